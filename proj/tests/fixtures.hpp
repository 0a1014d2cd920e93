#pragma once

#include <algorithm>
#include <cmath>
#include <vector>

#include "levylmm/setup_io.hpp"
#include "levylmm/term_structure.hpp"

namespace levylmm::test {

inline const MarketSetup& bundled_setup() {
  static const MarketSetup setup = load_setup(bundled_setup_path());
  return setup;
}

/// Same tenor and curve as the bundled setup with other constant vols.
inline MarketSetup with_vols(const Eigen::VectorXd& per_rate) {
  const MarketSetup& p = bundled_setup();
  return MarketSetup::assemble(p.tenor, p.curve, VolatilityStructure::constant(per_rate), p.driver, p.em);
}

struct SampleStats {
  double mean = 0.0;
  double variance = 0.0;
  double std_error = 0.0;
};

inline SampleStats stats(const std::vector<double>& xs) {
  SampleStats s;
  const double n = static_cast<double>(xs.size());
  for (double x : xs) s.mean += x;
  s.mean /= n;
  for (double x : xs) s.variance += (x - s.mean) * (x - s.mean);
  s.variance /= n - 1.0;
  s.std_error = std::sqrt(s.variance / n);
  return s;
}

/// Two-sample Kolmogorov-Smirnov statistic.
inline double ks_statistic(std::vector<double> a, std::vector<double> b) {
  std::sort(a.begin(), a.end());
  std::sort(b.begin(), b.end());
  std::size_t i = 0, j = 0;
  double d = 0.0;
  while (i < a.size() && j < b.size()) {
    const double x = std::min(a[i], b[j]);
    while (i < a.size() && a[i] <= x) ++i;
    while (j < b.size() && b[j] <= x) ++j;
    d = std::max(d, std::abs(double(i) / a.size() - double(j) / b.size()));
  }
  return d;
}

/// Critical value of the two-sample KS test at level 1%.
inline double ks_critical_1pct(std::size_t n, std::size_t m) {
  return 1.628 * std::sqrt(double(n + m) / (double(n) * double(m)));
}

}  // namespace levylmm::test
