#pragma once

#include <cmath>
#include <optional>
#include <stdexcept>
#include <string>

#include <Eigen/Dense>

#include "levylmm/rng.hpp"
#include "levylmm/validation.hpp"

namespace levylmm {

struct SimulationGrid;

/// Parameters of a normal inverse Gaussian process per unit time.
struct NigParams {
  double alpha = 1.5;
  double beta = 0.0;
  double delta_bar = 1.5;
  double mu = 0.0;

  /// sqrt(alpha^2 - beta^2)
  double gamma() const { return std::sqrt(alpha * alpha - beta * beta); }

  /// E[X_1]; the compensated driver subtracts this rate.
  double mean_rate() const { return mu + delta_bar * beta / gamma(); }

  /// Exponential moments exist for u in [lower, upper].
  double domain_lower() const { return -alpha - beta; }
  double domain_upper() const { return alpha - beta; }

  void validate() const {
    if (!(alpha > 0.0)) throw std::invalid_argument("NigParams: alpha must be > 0");
    if (!(delta_bar > 0.0)) throw std::invalid_argument("NigParams: delta_bar must be > 0");
    if (!(std::abs(beta) < alpha)) throw std::invalid_argument("NigParams: |beta| must be < alpha");
    if (!std::isfinite(mu)) throw std::invalid_argument("NigParams: mu must be finite");
  }
};

/// Cumulant generating function log E[exp(u X_1)] of the NIG law.
/// Throws std::domain_error outside the closed interval |u + beta| <= alpha.
template <typename Scalar>
Scalar nig_cumulant(Scalar u, const NigParams& p) {
  using std::sqrt;
  const Scalar shifted = p.beta + u;
  if (std::abs(static_cast<double>(shifted)) > p.alpha)
    throw std::domain_error("nig_cumulant: |u + beta| > alpha, exponential moment does not exist");
  const Scalar rad = p.alpha * p.alpha - shifted * shifted;
  // rad may round slightly below zero at the boundary
  const Scalar root = rad > Scalar(0) ? sqrt(rad) : Scalar(0);
  return p.mu * u + p.delta_bar * (Scalar(p.gamma()) - root);
}

/// Cumulant of the compensated jump part, i.e. the integral of
/// (e^{ux} - 1 - ux) against the NIG Levy measure.
template <typename Scalar>
Scalar nig_compensated_cumulant(Scalar u, const NigParams& p) {
  return nig_cumulant(u, p) - u * p.mean_rate();
}

/// Levy density of the NIG process, (delta alpha / pi) e^{beta x} K1(alpha|x|) / |x|.
double nig_levy_density(double x, const NigParams& p);

/// Marginal density of X_t for the (uncompensated) NIG process.
double nig_density(double x, const NigParams& p, double t);

/// Local characteristics of the driver, piecewise constant over the accrual
/// intervals [T_a, T_{a+1}) of the tenor. The jump part is a homogeneous NIG
/// measure; the driver always uses it in compensated form.
struct LevyLocalTriplet {
  Eigen::VectorXd drift;  // b per interval
  Eigen::VectorXd gauss;  // c per interval, >= 0
  NigParams jumps;

  static LevyLocalTriplet pure_jump(const NigParams& p, Eigen::Index intervals) {
    return {Eigen::VectorXd::Zero(intervals), Eigen::VectorXd::Zero(intervals), p};
  }

  bool has_gaussian_part() const { return gauss.size() > 0 && (gauss.array() != 0.0).any(); }

  /// kappa_s(u) = b u + c u^2 / 2 + compensated jump cumulant, on interval a.
  double cumulant(double u, Eigen::Index interval) const {
    return drift(interval) * u + 0.5 * gauss(interval) * u * u + nig_compensated_cumulant(u, jumps);
  }
};

struct EmValidationConfig {
  double M = 1.5;
  double epsilon = 0.01;
};

/// Checks the volatility bound and the exponential-moment condition.
/// `vol_levels` is rates x intervals; the bound is enforced per interval.
ValidationReport validate_em(const Eigen::MatrixXd& vol_levels, const EmValidationConfig& cfg,
                             const NigParams& p);

/// Inverse Gaussian variate (Michael, Schucany and Haas).
double sample_ig(double mean, double shape, Rng& rng);

/// Exact NIG(alpha, beta, delta_bar dt, mu dt) variate via IG subordination.
double sample_nig_increment(double dt, const NigParams& p, Rng& rng);

struct DriverIncrements {
  Eigen::VectorXd times;            // t_0 < ... < t_K
  Eigen::VectorXd dh;               // K increments of H
  std::optional<Eigen::VectorXd> dw;  // standard Brownian increments, if c != 0

  Eigen::Index steps() const { return dh.size(); }
};

/// One draw of the driver on the grid: compensated NIG jumps plus
/// sqrt(c dt)-scaled Gaussian increments where c > 0.
DriverIncrements simulate_driver_increments(const SimulationGrid& grid,
                                            const LevyLocalTriplet& triplet, Rng& rng);

/// Sums each run of `factor` consecutive increments: the same driver path on a
/// grid `factor` times coarser.
DriverIncrements coarsen_increments(const DriverIncrements& fine, int factor);

}  // namespace levylmm
