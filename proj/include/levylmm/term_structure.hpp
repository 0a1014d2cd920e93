#pragma once

#include <Eigen/Dense>

#include "levylmm/levy_driver.hpp"
#include "levylmm/validation.hpp"

namespace levylmm {

/// Tenor dates T_0 = 0 < T_1 < ... < T_{N+1} = T* in year fractions.
/// Rate indices in the public API are 1-based: rate i fixes at T_i and pays at T_{i+1}.
struct TenorStructure {
  Eigen::VectorXd dates;

  explicit TenorStructure(Eigen::VectorXd d);

  Eigen::Index num_rates() const { return dates.size() - 2; }
  double date(Eigen::Index i) const { return dates(i); }
  double accrual(Eigen::Index i) const { return dates(i + 1) - dates(i); }
  double terminal() const { return dates(dates.size() - 1); }

  /// Interval a with T_a < s <= T_{a+1}; s = 0 maps to interval 0.
  Eigen::Index interval_of(double s) const;
};

/// Discount factors B(0, T_i) for i = 1..N+1.
struct DiscountCurve {
  Eigen::VectorXd bonds;

  double bond(Eigen::Index i) const { return i == 0 ? 1.0 : bonds(i - 1); }
};

/// Piecewise-constant volatilities: levels(i-1, a) is lambda(s, T_i) for s in
/// (T_a, T_{a+1}]. Entries with a >= i are zero.
struct VolatilityStructure {
  Eigen::MatrixXd levels;  // N x N

  /// One constant level per rate, cut off after its fixing date.
  static VolatilityStructure constant(const Eigen::VectorXd& per_rate);

  /// Per-rate, per-interval levels; entries past fixing are forced to zero.
  static VolatilityStructure piecewise(Eigen::MatrixXd raw);

  Eigen::Index num_rates() const { return levels.rows(); }
  double level(Eigen::Index rate, Eigen::Index interval) const {
    return interval < levels.cols() ? levels(rate - 1, interval) : 0.0;
  }
};

/// L(0, T_i) = (B(0,T_i)/B(0,T_{i+1}) - 1) / delta_i. Throws std::domain_error
/// naming the first index whose bond ratio is not above 1.
Eigen::VectorXd initial_libor(const DiscountCurve& curve, const TenorStructure& tenor);

/// lambda(s, T_i) for 0 <= s <= T*. Throws std::out_of_range on a bad index.
double vol_at(double s, Eigen::Index i, const VolatilityStructure& vols, const TenorStructure& tenor);

struct MarketSetup {
  TenorStructure tenor;
  DiscountCurve curve;
  VolatilityStructure vols;
  LevyLocalTriplet driver;
  EmValidationConfig em;
  Eigen::VectorXd initial_libor;  // may hold non-positive entries until validated

  /// Assembles a setup without throwing on bad market data; run validate_setup.
  static MarketSetup assemble(TenorStructure tenor, DiscountCurve curve, VolatilityStructure vols,
                              LevyLocalTriplet driver, EmValidationConfig em);

  Eigen::Index num_rates() const { return tenor.num_rates(); }
};

/// Aggregates the volatility bound, the exponential-moment condition, monotone
/// positive bonds and positive initial rates. Never throws on bad market data.
ValidationReport validate_setup(const MarketSetup& setup);

}  // namespace levylmm
