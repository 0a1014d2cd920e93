#include "oracles.hpp"

#include <bit>
#include <cmath>
#include <limits>
#include <numbers>
#include <stdexcept>

#include <boost/math/quadrature/exp_sinh.hpp>

namespace levylmm::oracle {

namespace {

// compensated cumulant, closed form
double kappa(double u, const NigParams& p) {
  const double g = std::sqrt(p.alpha * p.alpha - p.beta * p.beta);
  const double s = p.beta + u;
  return p.delta_bar * (g - std::sqrt(std::max(0.0, p.alpha * p.alpha - s * s))) -
         u * p.delta_bar * p.beta / g;
}

}  // namespace

double compensated_nig_density(double x, const NigParams& p, double t) {
  const double g = std::sqrt(p.alpha * p.alpha - p.beta * p.beta);
  const double d = p.delta_bar * t;
  // X_t = H_t + (mu + delta beta / gamma) t, then the location mu t is removed
  const double y = x + p.delta_bar * p.beta / g * t;
  const double r = std::sqrt(d * d + y * y);
  if (p.alpha * r > 700.0) return 0.0;
  return p.alpha * d / std::numbers::pi * std::exp(d * g + p.beta * y) *
         std::cyl_bessel_k(1.0, p.alpha * r) / r;
}

double last_rate_caplet(const MarketSetup& setup, double strike) {
  const Eigen::Index n = setup.num_rates();
  const Eigen::VectorXd lam = setup.vols.levels.row(n - 1);
  if ((lam.array() != lam(0)).any()) throw std::invalid_argument("oracle: rate N needs a constant vol");
  if (setup.driver.has_gaussian_part()) throw std::invalid_argument("oracle: pure-jump driver only");

  const NigParams& p = setup.driver.jumps;
  const double lambda = lam(0);
  const double expiry = setup.tenor.date(n);
  const double l0 = setup.curve.bond(n) / setup.curve.bond(n + 1) - 1.0;  // delta L(0,T_N)
  const double delta = setup.tenor.accrual(n);
  const double forward = l0 / delta;
  const double drift = -kappa(lambda, p) * expiry;

  const auto integrand = [&](double x) {
    const double density = compensated_nig_density(x, p, expiry);
    if (density == 0.0) return 0.0;
    const double rate = forward * std::exp(drift + lambda * x);
    return std::max(rate - strike, 0.0) * density;
  };
  const double lower = strike > 0.0 ? (std::log(strike / forward) - drift) / lambda
                                    : -std::numeric_limits<double>::infinity();
  boost::math::quadrature::exp_sinh<double> tail;
  double value = 0.0;
  if (std::isfinite(lower)) {
    value = tail.integrate([&](double y) { return integrand(lower + y); }, 0.0,
                           std::numeric_limits<double>::infinity(), 1e-14);
  } else {
    // zero strike: E[L] in closed form is not used here on purpose, integrate both halves
    value = tail.integrate(integrand, 0.0, std::numeric_limits<double>::infinity(), 1e-14) +
            tail.integrate([&](double y) { return integrand(-y); }, 0.0,
                           std::numeric_limits<double>::infinity(), 1e-14);
  }
  return delta * setup.curve.bond(n + 1) * value;
}

double drift_jump_term_enumerated(const MarketSetup& setup, Eigen::Index interval, Eigen::Index i,
                                  const Eigen::VectorXd& z) {
  const Eigen::Index n = setup.num_rates();
  const NigParams& p = setup.driver.jumps;
  const Eigen::Index later = n - i;  // rates i+1..N
  const double lambda_i = setup.vols.levels(i - 1, interval);

  std::vector<double> u(later), lam(later);
  for (Eigen::Index k = 0; k < later; ++k) {
    const Eigen::Index l = i + 1 + k;
    const double dl = setup.tenor.accrual(l) * std::exp(z(l - 1));
    u[k] = dl / (1.0 + dl);
    lam[k] = setup.vols.levels(l - 1, interval);
  }

  double total = kappa(lambda_i, p);
  for (std::uint64_t s = 1; s < (std::uint64_t{1} << later); ++s) {
    double w = 1.0;
    for (Eigen::Index k = 0; k < later; ++k)
      if (s >> k & 1) w *= u[k];
    const int size_s = std::popcount(s);
    // R ranges over subsets of S, with or without i
    double inner = 0.0;
    for (std::uint64_t r = s;; r = (r - 1) & s) {
      double sum = 0.0;
      for (Eigen::Index k = 0; k < later; ++k)
        if (r >> k & 1) sum += lam[k];
      const int size_r = std::popcount(r);
      // without i: |R| = size_r; with i: |R| = size_r + 1
      const double sign_without = ((size_s + 1 - size_r) % 2 == 0) ? 1.0 : -1.0;
      inner += sign_without * kappa(sum, p) - sign_without * kappa(sum + lambda_i, p);
      if (r == 0) break;
    }
    total += w * inner;
  }
  return total;
}

}  // namespace levylmm::oracle
