#include "levylmm/levy_driver.hpp"

#include <algorithm>
#include <numbers>
#include <sstream>
#include <stdexcept>

#include "levylmm/simulator.hpp"

namespace levylmm {

double nig_levy_density(double x, const NigParams& p) {
  const double ax = std::abs(x);
  if (ax == 0.0) return std::numeric_limits<double>::infinity();
  const double z = p.alpha * ax;
  // K1 underflows long before exp(beta x) can compensate since |beta| < alpha
  if (z > 700.0) return 0.0;
  return p.delta_bar * p.alpha / std::numbers::pi * std::exp(p.beta * x) *
         std::cyl_bessel_k(1.0, z) / ax;
}

double nig_density(double x, const NigParams& p, double t) {
  const double delta = p.delta_bar * t;
  const double centred = x - p.mu * t;
  const double r = std::hypot(delta, centred);
  const double z = p.alpha * r;
  if (z > 700.0) return 0.0;
  const double log_scale = delta * p.gamma() + p.beta * centred;
  return p.alpha * delta / (std::numbers::pi * r) * std::cyl_bessel_k(1.0, z) *
         std::exp(log_scale);
}

ValidationReport validate_em(const Eigen::MatrixXd& vol_levels, const EmValidationConfig& cfg,
                             const NigParams& p) {
  ValidationReport report;

  ValidationCheck config{"em_config", cfg.M > 0.0 && cfg.epsilon > 0.0, cfg.M, 0.0,
                         "M > 0 and epsilon > 0"};
  report.checks.push_back(config);

  // sup over time of sum_i |lambda(s, T_i)|, one interval at a time
  double sup_sum = 0.0;
  if (vol_levels.size() > 0) sup_sum = vol_levels.cwiseAbs().colwise().sum().maxCoeff();
  std::ostringstream vol_detail;
  vol_detail << "sup_s sum_i |lambda(s,T_i)| = " << sup_sum << " must be <= M = " << cfg.M;
  report.checks.push_back({"lr1_vol_sum", sup_sum <= cfg.M, sup_sum, cfg.M, vol_detail.str()});

  const double reach = std::min(p.domain_upper(), -p.domain_lower());
  std::ostringstream m_detail;
  m_detail << "M = " << cfg.M << " must lie in the closed cumulant domain, radius " << reach;
  report.checks.push_back({"em_bound_in_domain", cfg.M <= reach, cfg.M, reach, m_detail.str()});

  const double slack = (1.0 + cfg.epsilon) * sup_sum;
  std::ostringstream s_detail;
  s_detail << "(1 + epsilon) * vol sum = " << slack << " must lie in the closed cumulant domain, radius "
           << reach;
  report.checks.push_back({"em_moment_slack", slack <= reach, slack, reach, s_detail.str()});
  return report;
}

double sample_ig(double mean, double shape, Rng& rng) {
  const double n = rng.normal();
  const double y = mean * n * n / shape;
  // smaller root of the quadratic, written without cancellation
  const double x = mean / (1.0 + 0.5 * y + std::sqrt(y * (1.0 + 0.25 * y)));
  const double u = rng.uniform();
  return u <= mean / (mean + x) ? x : mean * mean / x;
}

double sample_nig_increment(double dt, const NigParams& p, Rng& rng) {
  const double scale = p.delta_bar * dt;
  const double z = sample_ig(scale / p.gamma(), scale * scale, rng);
  return p.mu * dt + p.beta * z + std::sqrt(z) * rng.normal();
}

DriverIncrements simulate_driver_increments(const SimulationGrid& grid,
                                            const LevyLocalTriplet& triplet, Rng& rng) {
  const Eigen::Index steps = grid.steps();
  DriverIncrements out;
  out.times = grid.times;
  out.dh.resize(steps);
  const bool gaussian = triplet.has_gaussian_part();
  if (gaussian) out.dw = Eigen::VectorXd(steps);
  const double mean_rate = triplet.jumps.mean_rate();

  for (Eigen::Index k = 0; k < steps; ++k) {
    const double dt = grid.dt(k);
    const Eigen::Index a = grid.step_interval[k];
    double dh = sample_nig_increment(dt, triplet.jumps, rng) - mean_rate * dt;
    if (triplet.drift.size() > a) dh += triplet.drift(a) * dt;
    if (gaussian) {
      const double dw = std::sqrt(dt) * rng.normal();
      (*out.dw)(k) = dw;
      dh += std::sqrt(triplet.gauss(a)) * dw;
    }
    out.dh(k) = dh;
  }
  return out;
}

DriverIncrements coarsen_increments(const DriverIncrements& fine, int factor) {
  if (factor < 1 || fine.steps() % factor != 0)
    throw std::invalid_argument("coarsen_increments: factor must divide the step count");
  const Eigen::Index steps = fine.steps() / factor;
  DriverIncrements out;
  out.times.resize(steps + 1);
  out.dh.resize(steps);
  if (fine.dw) out.dw = Eigen::VectorXd(steps);
  for (Eigen::Index k = 0; k < steps; ++k) {
    out.times(k) = fine.times(k * factor);
    out.dh(k) = fine.dh.segment(k * factor, factor).sum();
    if (fine.dw) (*out.dw)(k) = fine.dw->segment(k * factor, factor).sum();
  }
  out.times(steps) = fine.times(fine.steps());
  return out;
}

}  // namespace levylmm
