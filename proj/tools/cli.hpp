#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "levylmm/drift_engine.hpp"
#include "levylmm/pricing.hpp"

namespace levylmm {

struct RunConfig {
  std::string subcommand;
  std::string setup_path;  // empty: bundled Feb 2002 setup
  Scheme scheme = Scheme::FullSde;
  std::uint64_t n_paths = 100000;
  std::uint64_t seed = 20020219;
  int substeps = 4;
  DriftMethod drift_method = DriftMethod::CumulantExpansion;
  int threads = 1;
  std::vector<double> strike_multipliers = default_strike_multipliers();
  std::optional<double> strike;  // absolute strike, overrides the multipliers
  std::optional<Eigen::Index> rate;
  std::optional<Eigen::Index> option_index;
  std::optional<Eigen::Index> swap_end;
  CouponConvention convention = CouponConvention::Accrued;
  std::string out;  // file, or directory for reproduce-paper; empty: stdout / current directory
};

/// Parses argv and runs one subcommand. Results go to `out` (or to --out),
/// diagnostics to `err`. Returns the process exit status.
int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

/// McEstimate rows with a fixed header.
std::string estimates_csv(const std::vector<InstrumentSpec>& specs, const std::vector<McEstimate>& estimates);

}  // namespace levylmm
