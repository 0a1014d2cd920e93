#pragma once

#include <cmath>
#include <stdexcept>
#include <vector>

#include <Eigen/Dense>

#include "levylmm/term_structure.hpp"

namespace levylmm {

struct SimulationGrid;

/// delta L / (1 + delta L) with L = e^z; the weight a forward rate contributes
/// to the measure change. Stays in [0, 1] for any finite or infinite z.
template <typename Scalar>
Scalar link_weight(Scalar delta, Scalar z) {
  using std::exp;
  if (z > Scalar(0)) {
    const Scalar inv = exp(-z);
    return delta / (inv + delta);
  }
  const Scalar dl = delta * exp(z);
  return dl / (Scalar(1) + dl);
}

/// u (e^{lambda x} - 1) + 1, the density of one forward-measure step against the jump measure.
template <typename Scalar>
Scalar beta_factor(Scalar u, Scalar lambda, Scalar x) {
  using std::expm1;
  return u * expm1(lambda * x) + Scalar(1);
}

/// Log-rates z_l = log L(t-, T_l) for l = 1..N at one evaluation time.
struct StateVector {
  enum class Semantics { LogLibor, TaylorApprox };

  Eigen::VectorXd z;
  Semantics semantics = Semantics::LogLibor;
};

enum class DriftMethod { CumulantExpansion, Quadrature };

/// Quadrature did not reach the requested accuracy.
class QuadratureError : public std::runtime_error {
 public:
  QuadratureError(const std::string& what, double estimate)
      : std::runtime_error(what), error_estimate(estimate) {}
  double error_estimate;
};

/// Per-thread scratch for the subset weights.
struct DriftWorkspace {
  Eigen::VectorXd weights;
  Eigen::VectorXd link;
};

/// Terminal-measure drift of the log-LIBOR rates.
///
/// The jump integral
///   J = int ((e^{lambda_i x} - 1) prod_{l>i} beta_l(x) - lambda_i x) F(dx)
/// is a multilinear polynomial in the link weights u_l. Expanding the product
/// over subsets S of {i+1..N} gives J = sum_S w_S C_S with w_S = prod_{l in S} u_l
/// and C_S = sum_{R subset S+{i}} (-1)^{|S|+1-|R|} kappa(Lambda_R), where kappa is
/// the compensated jump cumulant. The C_S depend only on the volatilities, so they
/// are tabulated once per (accrual interval, rate); a drift evaluation is then a
/// dot product of length 2^{N-i}.
class DriftEngine {
 public:
  explicit DriftEngine(const MarketSetup& setup);

  const MarketSetup& setup() const { return setup_; }
  Eigen::Index num_rates() const { return n_; }

  /// b(s, T_rate) for s in accrual interval `interval`, rate 1-based.
  double drift(Eigen::Index interval, Eigen::Index rate, const Eigen::VectorXd& z,
               DriftMethod method = DriftMethod::CumulantExpansion) const;

  /// Jump integral J by the tabulated expansion.
  double jump_term_expansion(Eigen::Index interval, Eigen::Index rate, const Eigen::VectorXd& z) const;

  /// Jump integral J by adaptive quadrature against the NIG Levy density.
  double jump_term_quadrature(Eigen::Index interval, Eigen::Index rate, const Eigen::VectorXd& z) const;

  /// Drifts of every rate alive on `interval`; dead rates get 0.
  void drift_all(Eigen::Index interval, const Eigen::VectorXd& z, Eigen::Ref<Eigen::VectorXd> out,
                 DriftWorkspace& ws, DriftMethod method = DriftMethod::CumulantExpansion) const;

  /// Expansion coefficients C_S for (interval, rate); bit b of S stands for rate N - b.
  const Eigen::VectorXd& coefficients(Eigen::Index interval, Eigen::Index rate) const {
    return coeffs_[interval][rate - 1];
  }

 private:
  void fill_link_weights(Eigen::Index interval, const Eigen::VectorXd& z, DriftWorkspace& ws) const;
  double gaussian_terms(Eigen::Index interval, Eigen::Index rate, const Eigen::VectorXd& link) const;

  MarketSetup setup_;
  Eigen::Index n_;
  std::vector<std::vector<Eigen::VectorXd>> coeffs_;  // [interval][rate - 1]
};

/// Largest N for which the subset tables are built.
inline constexpr Eigen::Index kMaxExpansionRates = 22;

/// b(s, T_i; state) at time s. Zero once s is past the fixing T_i.
double terminal_drift(double s, Eigen::Index i, const StateVector& state, const MarketSetup& setup,
                      DriftMethod method = DriftMethod::CumulantExpansion);

/// The jump integral J of the drift by the cumulant expansion.
double drift_cumulant_expansion(double s, Eigen::Index i, const StateVector& state,
                                const MarketSetup& setup);

/// The jump integral J of the drift by adaptive quadrature (absolute tolerance 1e-12).
double drift_quadrature(double s, Eigen::Index i, const StateVector& state, const MarketSetup& setup);

/// Integral of (e^{lambda x} - 1 - lambda x) against the NIG Levy measure, by quadrature.
double compensated_exponential_quadrature(double lambda, const NigParams& p);

/// b(t_k, T_i; state0) for every step k of the grid, frozen at state0.
Eigen::VectorXd deterministic_drift_table(Eigen::Index i, const MarketSetup& setup,
                                          const StateVector& state0, const SimulationGrid& grid);

}  // namespace levylmm
