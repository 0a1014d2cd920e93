#pragma once

#include <cmath>
#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <variant>
#include <vector>

#include "levylmm/simulator.hpp"

namespace levylmm {

/// Caplet on L(T_i, T_i), paid at T_{i+1}.
struct CapletSpec {
  double strike = 0.0;
  Eigen::Index rate = 1;
};

enum class CouponConvention {
  Accrued,  // coupon at T_k is delta_{k-1} K
  Literal,  // coupon at T_k is K
};

/// Payer swaption exercised at T_i into a swap paying at T_{i+1}..T_m.
struct SwaptionSpec {
  double strike = 0.0;
  Eigen::Index option_index = 1;
  Eigen::Index swap_end = 2;
  CouponConvention convention = CouponConvention::Accrued;
};

using InstrumentSpec = std::variant<CapletSpec, SwaptionSpec>;

struct McEstimate {
  double value = 0.0;
  double std_error = 0.0;
  std::uint64_t n_paths = 0;
  Scheme scheme = Scheme::FullSde;
  std::uint64_t seed = 0;
  std::uint64_t invalid_path_count = 0;
};

/// delta_i B(0,T*) prod_{l>i} (1 + delta_l L(T_i,T_l)) (L(T_i,T_i) - K)^+
double caplet_payoff(const PathBundle& bundle, const CapletSpec& spec, const MarketSetup& setup);

/// B(0,T*) (-sum_{k=i}^{m} c_k prod_{l=k}^{N} (1 + delta_l L(T_i,T_l)))^+ with c_i = -1.
/// A one-period swaption equals the caplet with the same strike exactly.
double swaption_payoff(const PathBundle& bundle, const SwaptionSpec& spec, const MarketSetup& setup);

double payoff(const PathBundle& bundle, const InstrumentSpec& spec, const MarketSetup& setup);

void check_spec(const InstrumentSpec& spec, const MarketSetup& setup);

/// Monte Carlo prices of several instruments from the same paths.
std::vector<McEstimate> price_mc(Scheme scheme, const std::vector<InstrumentSpec>& specs,
                                 const MarketSetup& setup, const SimulationGrid& grid,
                                 std::uint64_t n_paths, std::uint64_t seed, int threads = 1,
                                 DriftMethod method = DriftMethod::CumulantExpansion);

McEstimate price_mc(Scheme scheme, const InstrumentSpec& spec, const MarketSetup& setup,
                    const SimulationGrid& grid, std::uint64_t n_paths, std::uint64_t seed,
                    int threads = 1);

template <typename Scalar>
Scalar normal_cdf(Scalar x) {
  using std::erfc;
  return Scalar(0.5) * erfc(-x / std::sqrt(Scalar(2)));
}

/// Black-76 caplet: DF delta (F N(d1) - K N(d2)).
template <typename Scalar>
Scalar black76_caplet(Scalar forward, Scalar strike, Scalar sigma, Scalar expiry, Scalar delta,
                      Scalar discount) {
  using std::log;
  using std::sqrt;
  const Scalar sd = sigma * sqrt(expiry);
  if (!(sd > Scalar(0))) {
    const Scalar intrinsic = forward > strike ? forward - strike : Scalar(0);
    return discount * delta * intrinsic;
  }
  const Scalar d1 = (log(forward / strike) + Scalar(0.5) * sd * sd) / sd;
  const Scalar d2 = d1 - sd;
  return discount * delta * (forward * normal_cdf(d1) - strike * normal_cdf(d2));
}

/// The price is outside what Black-76 can reproduce on the volatility bracket.
class ImpliedVolError : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

inline constexpr double kImpliedVolLow = 1e-4;
inline constexpr double kImpliedVolHigh = 5.0;

/// Bisection on [1e-4, 5]; the returned sigma reprices to 1e-10 or better.
double implied_vol(double price, double forward, double strike, double expiry, double delta,
                   double discount);

/// Par rate of the swap from T_i to T_m under the accrued convention.
double forward_swap_rate(const MarketSetup& setup, Eigen::Index i, Eigen::Index m);

struct ComparisonRow {
  std::string instrument;
  Eigen::Index maturity_index = 0;
  Eigen::Index swap_end = 0;  // 0 for caplets
  double strike = 0.0;
  double moneyness = 1.0;     // strike / forward
  Scheme scheme = Scheme::FullSde;
  double price = 0.0;
  double std_error = 0.0;
  std::optional<double> implied_vol;
  std::optional<double> iv_diff_vs_full;
  double price_diff_vs_full = 0.0;
  double diff_std_error = 0.0;  // SE of the paired difference against the full scheme
  std::uint64_t n_paths = 0;
  std::uint64_t seed = 0;
  std::string error;
};

struct ComparisonTable {
  std::vector<ComparisonRow> rows;
  std::uint64_t invalid_path_count = 0;

  static const char* csv_header();
  std::string to_csv() const;
};

/// Prices every cell under all three schemes on common random numbers.
ComparisonTable compare_schemes(const std::vector<InstrumentSpec>& cells, const MarketSetup& setup,
                                const SimulationGrid& grid, std::uint64_t n_paths,
                                std::uint64_t seed, int threads = 1,
                                DriftMethod method = DriftMethod::CumulantExpansion);

/// Default multipliers of the forward for strike grids.
std::vector<double> default_strike_multipliers();

/// Caplets on every rate at multiplier x L(0,T_i).
std::vector<InstrumentSpec> caplet_grid(const MarketSetup& setup, const std::vector<double>& multipliers);

/// The eight payer swaptions: options at 1y and 2y into swaps of 12, 18, 24 and 30 months.
std::vector<InstrumentSpec> swaption_grid(const MarketSetup& setup, const std::vector<double>& multipliers,
                                          CouponConvention convention = CouponConvention::Accrued);

}  // namespace levylmm
