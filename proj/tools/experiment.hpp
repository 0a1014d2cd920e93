#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

#include "levylmm/pricing.hpp"

namespace levylmm {

struct ExperimentConfig {
  std::uint64_t seed = 20020219;
  int substeps = 4;
  int threads = 1;
  DriftMethod drift_method = DriftMethod::CumulantExpansion;
  std::uint64_t martingale_paths = 100000;
  std::uint64_t oracle_paths = 100000;
  std::uint64_t comparison_paths = 1000000;
  std::uint64_t property_paths = 20000;
  std::uint64_t refinement_paths = 100000;
  int drift_states = 100;
};

struct CriterionResult {
  int id = 0;
  std::string name;
  bool passed = false;
  std::string detail;
  double seconds = 0.0;
};

/// One line per criterion: "PASS  3 scheme_coincidence ...".
std::string format_result(const CriterionResult& r);

CriterionResult check_martingale(const MarketSetup& setup, const ExperimentConfig& cfg);
CriterionResult check_caplet_oracle(const MarketSetup& setup, const ExperimentConfig& cfg);
CriterionResult check_scheme_coincidence(const MarketSetup& setup, const ExperimentConfig& cfg);
CriterionResult check_drift_equivalence(const MarketSetup& setup, const ExperimentConfig& cfg);
CriterionResult check_taylor_accuracy(const ComparisonTable& caplets, double seconds);
CriterionResult check_frozen_deficiency(const ComparisonTable& caplets);
CriterionResult check_swaption_grid(const ComparisonTable& swaptions);
CriterionResult check_properties(const MarketSetup& setup, const ExperimentConfig& cfg);

struct AcceptanceRun {
  std::vector<CriterionResult> criteria;
  ComparisonTable caplets;
  ComparisonTable swaptions;

  bool passed() const;
};

/// Runs criteria 1 to 8 on one setup; `log` receives each result line as it finishes.
AcceptanceRun run_acceptance(const MarketSetup& setup, const ExperimentConfig& cfg, std::ostream* log = nullptr);

/// Rows "maturity multiplier |iv diff|" per scheme, blank line between maturities.
std::string caplet_surface_dat(const ComparisonTable& caplets, Scheme scheme);

/// Rows "option_index swap_end multiplier |price diff|".
std::string swaption_surface_dat(const ComparisonTable& swaptions, Scheme scheme);

std::string gnuplot_script();

}  // namespace levylmm
