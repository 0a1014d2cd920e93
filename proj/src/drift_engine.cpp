#include "levylmm/drift_engine.hpp"

#include <bit>
#include <cmath>
#include <limits>
#include <numbers>
#include <sstream>

#include <boost/math/quadrature/exp_sinh.hpp>
#include <boost/math/quadrature/tanh_sinh.hpp>

#include "levylmm/simulator.hpp"

namespace levylmm {

namespace {

// C_S for one (interval, rate r), 0-based r. With h(T) = kappa(Lambda_T + lambda_r) -
// kappa(Lambda_T) over subsets T of the later rates, C is the Moebius transform of h:
// C_S = sum_{T subset S} (-1)^{|S|-|T|} h(T). This is the alternating sum over R
// subset S + {r} regrouped by whether R contains r.
Eigen::VectorXd build_coefficients(const MarketSetup& setup, Eigen::Index interval, Eigen::Index r) {
  const Eigen::Index n = setup.num_rates();
  const Eigen::Index bits = n - 1 - r;
  const Eigen::Index size = Eigen::Index{1} << bits;
  const double lambda_r = setup.vols.levels(r, interval);

  Eigen::VectorXd sums(size);  // Lambda_T
  sums(0) = 0.0;
  for (Eigen::Index s = 1; s < size; ++s) {
    const int low = std::countr_zero(static_cast<std::uint64_t>(s));
    sums(s) = sums(s & (s - 1)) + setup.vols.levels(n - 1 - low, interval);
  }

  const auto kappa = [&](double u) { return nig_compensated_cumulant(u, setup.driver.jumps); };
  Eigen::VectorXd c(size);
  for (Eigen::Index s = 0; s < size; ++s) c(s) = kappa(sums(s) + lambda_r) - kappa(sums(s));

  for (Eigen::Index b = 0; b < bits; ++b) {
    const Eigen::Index bit = Eigen::Index{1} << b;
    for (Eigen::Index s = 0; s < size; ++s)
      if (s & bit) c(s) -= c(s ^ bit);
  }
  return c;
}

// (e^y - 1) / y and (e^y - 1 - y) / y^2, both finite at 0
double phi1(double y) {
  if (std::abs(y) < 1e-2) return 1.0 + y * (1.0 / 2 + y * (1.0 / 6 + y * (1.0 / 24 + y * (1.0 / 120))));
  return std::expm1(y) / y;
}

double phi2(double y) {
  if (std::abs(y) < 1e-2) return 1.0 / 2 + y * (1.0 / 6 + y * (1.0 / 24 + y * (1.0 / 120 + y * (1.0 / 720))));
  return (std::expm1(y) - y) / (y * y);
}

// x^2 times the NIG Levy density; smooth and bounded at the origin where plain F has a 1/x^2 pole
double levy_density_x2(double x, const NigParams& p) {
  const double ax = std::abs(x);
  const double z = p.alpha * ax;
  const double scale = p.delta_bar * p.alpha / std::numbers::pi;
  if (z < 1e-150) return p.delta_bar / std::numbers::pi;
  if (z < 700.0) return scale * ax * std::cyl_bessel_k(1.0, z) * std::exp(p.beta * x);
  // large-argument expansion keeps e^{beta x - alpha |x|} in one exponent
  const double decay = std::exp(p.beta * x - z);
  if (decay == 0.0) return 0.0;
  const double series = 1.0 + 3.0 / (8.0 * z) - 15.0 / (128.0 * z * z);
  return scale * ax * std::sqrt(std::numbers::pi / (2.0 * z)) * series * decay;
}

struct QuadratureResult {
  double value = 0.0;
  double error = 0.0;
};

// Integrates g(x) F(dx) over the real line given g2(x) = g(x) / x^2.
template <typename G2>
QuadratureResult integrate_against_levy(G2 g2, const NigParams& p) {
  using boost::math::quadrature::exp_sinh;
  using boost::math::quadrature::tanh_sinh;
  constexpr double tol = 1e-14;
  const auto f = [&](double x) -> double {
    const double d = levy_density_x2(x, p);
    if (d == 0.0) return 0.0;
    const double v = g2(x) * d;
    // overflowing e^{lambda x} against an underflowing density: far tail, negligible inside the domain
    return std::isfinite(v) ? v : 0.0;
  };
  const auto mirrored = [&](double x) -> double { return f(-x); };
  thread_local tanh_sinh<double> near;
  thread_local exp_sinh<double> far;
  QuadratureResult out;
  double err = 0.0;
  out.value += near.integrate(f, 0.0, 1.0, tol, &err);
  out.error += err;
  out.value += near.integrate(mirrored, 0.0, 1.0, tol, &err);
  out.error += err;
  out.value += far.integrate(f, 1.0, std::numeric_limits<double>::infinity(), tol, &err);
  out.error += err;
  out.value += far.integrate(mirrored, 1.0, std::numeric_limits<double>::infinity(), tol, &err);
  out.error += err;
  return out;
}

constexpr double kQuadratureAbsTol = 1e-12;

void check_quadrature(const QuadratureResult& q, const char* what) {
  if (!(q.error <= kQuadratureAbsTol) || !std::isfinite(q.value)) {
    std::ostringstream msg;
    msg << what << ": quadrature did not converge, error estimate " << q.error;
    throw QuadratureError(msg.str(), q.error);
  }
}

double jump_integral_by_quadrature(const MarketSetup& setup, Eigen::Index interval, Eigen::Index r,
                                   const Eigen::VectorXd& z) {
  const Eigen::Index n = setup.num_rates();
  const double lambda_r = setup.vols.levels(r, interval);
  std::vector<double> u, lam;
  for (Eigen::Index l = r + 1; l < n; ++l) {
    u.push_back(link_weight(setup.tenor.accrual(l + 1), z(l)));
    lam.push_back(setup.vols.levels(l, interval));
  }
  // g = (e^{lr x} - 1 - lr x) + (e^{lr x} - 1)(prod beta_l - 1), divided by x^2.
  // e carries (prod beta_l - 1) / x.
  const auto g2 = [&](double x) {
    double e = 0.0;
    for (std::size_t k = 0; k < u.size(); ++k) e += (1.0 + x * e) * u[k] * lam[k] * phi1(lam[k] * x);
    return lambda_r * lambda_r * phi2(lambda_r * x) + lambda_r * phi1(lambda_r * x) * e;
  };
  const auto q = integrate_against_levy(g2, setup.driver.jumps);
  check_quadrature(q, "drift_quadrature");
  return q.value;
}

double jump_integral_by_expansion(const Eigen::VectorXd& coeffs, const MarketSetup& setup,
                                  const Eigen::VectorXd& z) {
  const Eigen::Index n = setup.num_rates();
  double total = coeffs(0);
  Eigen::VectorXd w(coeffs.size());
  w(0) = 1.0;
  for (Eigen::Index s = 1; s < coeffs.size(); ++s) {
    const int low = std::countr_zero(static_cast<std::uint64_t>(s));
    const Eigen::Index l = n - 1 - low;
    w(s) = w(s & (s - 1)) * link_weight(setup.tenor.accrual(l + 1), z(l));
    total += w(s) * coeffs(s);
  }
  return total;
}

double gaussian_part(const MarketSetup& setup, Eigen::Index interval, Eigen::Index r,
                     const Eigen::VectorXd& z) {
  const double c = setup.driver.gauss(interval);
  if (c == 0.0) return 0.0;
  const double lambda_r = setup.vols.levels(r, interval);
  double weighted = 0.0;
  for (Eigen::Index l = r + 1; l < setup.num_rates(); ++l)
    weighted += link_weight(setup.tenor.accrual(l + 1), z(l)) * setup.vols.levels(l, interval);
  return -0.5 * lambda_r * lambda_r * c - c * lambda_r * weighted;
}

void check_rate(const MarketSetup& setup, Eigen::Index i) {
  if (i < 1 || i > setup.num_rates()) throw std::out_of_range("drift: rate index out of range");
}

void check_domain(const MarketSetup& setup, Eigen::Index interval) {
  const double total = setup.vols.levels.col(interval).cwiseAbs().sum();
  const NigParams& p = setup.driver.jumps;
  if (total > p.domain_upper() || -total < p.domain_lower()) {
    std::ostringstream msg;
    msg << "drift: volatility sum " << total << " leaves the cumulant domain on interval " << interval;
    throw std::domain_error(msg.str());
  }
}

}  // namespace

DriftEngine::DriftEngine(const MarketSetup& setup) : setup_(setup), n_(setup.num_rates()) {
  if (n_ > kMaxExpansionRates)
    throw std::invalid_argument("DriftEngine: too many rates for the subset tables");
  coeffs_.resize(n_);
  for (Eigen::Index a = 0; a < n_; ++a) {
    check_domain(setup_, a);
    coeffs_[a].resize(n_);
    for (Eigen::Index r = a; r < n_; ++r) coeffs_[a][r] = build_coefficients(setup_, a, r);
  }
}

double DriftEngine::jump_term_expansion(Eigen::Index interval, Eigen::Index rate,
                                        const Eigen::VectorXd& z) const {
  check_rate(setup_, rate);
  if (interval >= rate) return 0.0;
  return jump_integral_by_expansion(coeffs_[interval][rate - 1], setup_, z);
}

double DriftEngine::jump_term_quadrature(Eigen::Index interval, Eigen::Index rate,
                                         const Eigen::VectorXd& z) const {
  check_rate(setup_, rate);
  if (interval >= rate) return 0.0;
  return jump_integral_by_quadrature(setup_, interval, rate - 1, z);
}

double DriftEngine::drift(Eigen::Index interval, Eigen::Index rate, const Eigen::VectorXd& z,
                          DriftMethod method) const {
  check_rate(setup_, rate);
  if (interval >= rate) return 0.0;
  const double jump = method == DriftMethod::CumulantExpansion
                          ? jump_term_expansion(interval, rate, z)
                          : jump_term_quadrature(interval, rate, z);
  return gaussian_part(setup_, interval, rate - 1, z) - jump;
}

void DriftEngine::fill_link_weights(Eigen::Index interval, const Eigen::VectorXd& z,
                                    DriftWorkspace& ws) const {
  ws.link.resize(n_);
  for (Eigen::Index l = interval + 1; l < n_; ++l)
    ws.link(l) = link_weight(setup_.tenor.accrual(l + 1), z(l));

  // subset weights over the rates after the first alive one
  const Eigen::Index bits = n_ - 1 - interval;
  const Eigen::Index size = Eigen::Index{1} << bits;
  if (ws.weights.size() < size) ws.weights.resize(size);
  ws.weights(0) = 1.0;
  for (Eigen::Index s = 1; s < size; ++s) {
    const int low = std::countr_zero(static_cast<std::uint64_t>(s));
    ws.weights(s) = ws.weights(s & (s - 1)) * ws.link(n_ - 1 - low);
  }
}

double DriftEngine::gaussian_terms(Eigen::Index interval, Eigen::Index rate,
                                   const Eigen::VectorXd& link) const {
  const double c = setup_.driver.gauss(interval);
  if (c == 0.0) return 0.0;
  const Eigen::Index r = rate - 1;
  const double lambda_r = setup_.vols.levels(r, interval);
  double weighted = 0.0;
  for (Eigen::Index l = r + 1; l < n_; ++l) weighted += link(l) * setup_.vols.levels(l, interval);
  return -0.5 * lambda_r * lambda_r * c - c * lambda_r * weighted;
}

void DriftEngine::drift_all(Eigen::Index interval, const Eigen::VectorXd& z,
                            Eigen::Ref<Eigen::VectorXd> out, DriftWorkspace& ws,
                            DriftMethod method) const {
  out.head(std::min(interval, n_)).setZero();
  if (interval >= n_) return;
  fill_link_weights(interval, z, ws);
  for (Eigen::Index r = interval; r < n_; ++r) {
    double jump;
    if (method == DriftMethod::CumulantExpansion) {
      const Eigen::VectorXd& c = coeffs_[interval][r];
      jump = c.dot(ws.weights.head(c.size()));
    } else {
      jump = jump_integral_by_quadrature(setup_, interval, r, z);
    }
    out(r) = gaussian_terms(interval, r + 1, ws.link) - jump;
  }
}

double terminal_drift(double s, Eigen::Index i, const StateVector& state, const MarketSetup& setup,
                      DriftMethod method) {
  check_rate(setup, i);
  if (s > setup.tenor.date(i)) return 0.0;
  const double jump = method == DriftMethod::CumulantExpansion
                          ? drift_cumulant_expansion(s, i, state, setup)
                          : drift_quadrature(s, i, state, setup);
  return gaussian_part(setup, setup.tenor.interval_of(s), i - 1, state.z) - jump;
}

double drift_cumulant_expansion(double s, Eigen::Index i, const StateVector& state,
                                const MarketSetup& setup) {
  check_rate(setup, i);
  if (s > setup.tenor.date(i)) return 0.0;
  const Eigen::Index a = setup.tenor.interval_of(s);
  check_domain(setup, a);
  return jump_integral_by_expansion(build_coefficients(setup, a, i - 1), setup, state.z);
}

double drift_quadrature(double s, Eigen::Index i, const StateVector& state, const MarketSetup& setup) {
  check_rate(setup, i);
  if (s > setup.tenor.date(i)) return 0.0;
  const Eigen::Index a = setup.tenor.interval_of(s);
  check_domain(setup, a);
  return jump_integral_by_quadrature(setup, a, i - 1, state.z);
}

double compensated_exponential_quadrature(double lambda, const NigParams& p) {
  const auto q = integrate_against_levy([lambda](double x) { return lambda * lambda * phi2(lambda * x); }, p);
  check_quadrature(q, "compensated_exponential_quadrature");
  return q.value;
}

Eigen::VectorXd deterministic_drift_table(Eigen::Index i, const MarketSetup& setup,
                                          const StateVector& state0, const SimulationGrid& grid) {
  check_rate(setup, i);
  const DriftEngine engine(setup);
  Eigen::VectorXd table(grid.steps());
  for (Eigen::Index k = 0; k < grid.steps(); ++k)
    table(k) = engine.drift(grid.step_interval[k], i, state0.z);
  return table;
}

}  // namespace levylmm
