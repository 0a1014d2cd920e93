#pragma once

// Independent reference computations used to check the engine. Nothing here
// calls the simulator, the drift tables or the pricing code.

#include <Eigen/Dense>

#include "levylmm/term_structure.hpp"

namespace levylmm::oracle {

/// NIG density of H_t for the compensated driver, written out from the
/// Bessel-K1 form independently of the engine.
double compensated_nig_density(double x, const NigParams& p, double t);

/// Price of the caplet on the last rate by 1-D integration against the NIG
/// density: L(T_N,T_N) = L(0,T_N) exp(-kappa(lambda) T_N + lambda H_{T_N}).
/// Requires a pure-jump driver and a constant volatility for rate N.
double last_rate_caplet(const MarketSetup& setup, double strike);

/// The jump integral of the drift by direct enumeration of the subset formula:
/// kappa(lambda_i) + sum_{S != {}} w_S sum_{R subset S+{i}} (-1)^{|S|+1-|R|} kappa(Lambda_R).
double drift_jump_term_enumerated(const MarketSetup& setup, Eigen::Index interval, Eigen::Index i,
                                  const Eigen::VectorXd& z);

}  // namespace levylmm::oracle
