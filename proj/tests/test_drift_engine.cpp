#include <gtest/gtest.h>

#include <cmath>
#include <limits>

#include "fixtures.hpp"
#include "levylmm/drift_engine.hpp"
#include "levylmm/rng.hpp"
#include "levylmm/simulator.hpp"
#include "oracles.hpp"

namespace levylmm {
namespace {

using test::bundled_setup;

StateVector initial_state(const MarketSetup& s) { return {s.initial_libor.array().log().matrix()}; }

double kappa(double u) { return nig_cumulant(u, bundled_setup().driver.jumps); }

TEST(LinkWeight, ValuesAndLimits) {
  EXPECT_NEAR(link_weight(0.5, std::log(0.03861)), 0.5 * 0.03861 / (1 + 0.5 * 0.03861), 1e-15);
  EXPECT_NEAR(link_weight(0.5, std::log(0.03861)), 0.018939, 5e-7);
  EXPECT_EQ(link_weight(0.5, -std::numeric_limits<double>::infinity()), 0.0);
  EXPECT_EQ(link_weight(0.5, 800.0), 1.0);
  EXPECT_EQ(link_weight(0.5, -800.0), 0.0);
}

TEST(LinkWeight, LipschitzInRate) {
  const double d = 0.5;
  for (double l = 0.001; l < 3.0; l *= 1.7) {
    const double a = link_weight(d, std::log(l)), b = link_weight(d, std::log(l * 1.01));
    EXPECT_LE(std::abs(a - b), d * l * 0.01 * (1 + 1e-12));
  }
}

TEST(BetaFactor, Values) {
  EXPECT_EQ(beta_factor(0.3, 0.2, 0.0), 1.0);
  EXPECT_EQ(beta_factor(0.0, 0.2, 5.0), 1.0);
  EXPECT_NEAR(beta_factor(0.018939, 0.12, 1.0), 1.0 + 0.018939 * std::expm1(0.12), 1e-15);
  EXPECT_NEAR(beta_factor(0.018939, 0.12, 1.0), 1.0024147, 5e-8);
  EXPECT_GT(beta_factor(0.99, 0.2, -100.0), 0.0);
}

TEST(TerminalDrift, LastRateIsMinusKappa) {
  const auto& s = bundled_setup();
  const auto st = initial_state(s);
  for (double t : {0.0, 1.3, 4.5}) {
    EXPECT_NEAR(terminal_drift(t, 9, st, s), -kappa(0.12), 1e-17);
    EXPECT_NEAR(terminal_drift(t, 9, st, s, DriftMethod::Quadrature), -kappa(0.12), 1e-13);
  }
  EXPECT_NEAR(kappa(0.12), 0.00721156, 5e-9);
}

TEST(TerminalDrift, VanishingLaterRatesCollapse) {
  const auto& s = bundled_setup();
  StateVector st = initial_state(s);
  st.z.setConstant(-std::numeric_limits<double>::infinity());
  for (Eigen::Index i = 1; i <= 9; ++i) {
    const double lambda = s.vols.level(i, 0);
    EXPECT_NEAR(terminal_drift(0.1, i, st, s), -kappa(lambda), 1e-16);
  }
}

TEST(TerminalDrift, ZeroAfterFixing) {
  const auto& s = bundled_setup();
  const auto st = initial_state(s);
  EXPECT_EQ(terminal_drift(0.6, 1, st, s), 0.0);
  EXPECT_EQ(terminal_drift(4.6, 9, st, s), 0.0);
  EXPECT_NE(terminal_drift(0.5, 1, st, s), 0.0);
}

TEST(TerminalDrift, BadIndexAndDomain) {
  const auto& s = bundled_setup();
  const auto st = initial_state(s);
  EXPECT_THROW(terminal_drift(0.0, 0, st, s), std::out_of_range);
  EXPECT_THROW(terminal_drift(0.0, 10, st, s), std::out_of_range);
  const auto wild = test::with_vols(Eigen::VectorXd::Constant(9, 0.4));
  EXPECT_THROW(terminal_drift(0.0, 1, st, wild), std::domain_error);
  EXPECT_THROW(DriftEngine{wild}, std::domain_error);
}

TEST(TerminalDrift, ZeroLaterVolsCollapse) {
  Eigen::VectorXd vols = Eigen::VectorXd::Zero(9);
  vols(3) = 0.17;
  const auto s = test::with_vols(vols);
  EXPECT_NEAR(terminal_drift(0.2, 4, initial_state(s), s), -kappa(0.17), 1e-16);
}

TEST(TerminalDrift, GaussianPart) {
  auto s = bundled_setup();
  s.driver.gauss.setConstant(0.09);
  const auto st = initial_state(s);
  const double c = 0.09;
  const double li = s.vols.level(7, 0), l8 = s.vols.level(8, 0), l9 = s.vols.level(9, 0);
  const double u8 = link_weight(0.5, st.z(7)), u9 = link_weight(0.5, st.z(8));
  const double jump = oracle::drift_jump_term_enumerated(s, 0, 7, st.z);
  EXPECT_NEAR(terminal_drift(0.1, 7, st, s), -0.5 * li * li * c - c * li * (u8 * l8 + u9 * l9) - jump, 1e-15);
}

TEST(CumulantExpansion, EmptyAndZeroWeight) {
  const auto& s = bundled_setup();
  StateVector st = initial_state(s);
  EXPECT_NEAR(drift_cumulant_expansion(0.0, 9, st, s), kappa(0.12), 1e-17);
  st.z(8) = -std::numeric_limits<double>::infinity();
  EXPECT_NEAR(drift_cumulant_expansion(0.0, 8, st, s), kappa(s.vols.level(8, 0)), 1e-17);
}

TEST(CumulantExpansion, MatchesEnumeration) {
  const auto& s = bundled_setup();
  Rng rng(4);
  for (int k = 0; k < 20; ++k) {
    Eigen::VectorXd z(9);
    for (auto& v : z) v = std::log(0.01 + 0.2 * rng.uniform());
    const Eigen::Index a = k % 4;
    for (Eigen::Index i = a + 1; i <= 9; ++i) {
      const double expected = oracle::drift_jump_term_enumerated(s, a, i, z);
      const double t = s.tenor.date(a) + 0.25;
      EXPECT_NEAR(drift_cumulant_expansion(t, i, StateVector{z}, s), expected, 1e-15 + 1e-12 * std::abs(expected));
    }
  }
}

TEST(CumulantExpansion, SecondToLastAgainstQuadrature) {
  const auto& s = bundled_setup();
  StateVector st = initial_state(s);
  // u_N = 0.02
  st.z(8) = std::log(0.02 / 0.98 / 0.5);
  EXPECT_NEAR(link_weight(0.5, st.z(8)), 0.02, 1e-15);
  const double a = drift_cumulant_expansion(0.0, 8, st, s), b = drift_quadrature(0.0, 8, st, s);
  EXPECT_NEAR(a / b, 1.0, 1e-8);
}

TEST(CumulantExpansion, RandomStatesAgainstQuadrature) {
  const auto& s = bundled_setup();
  Rng rng(2024);
  for (int k = 0; k < 100; ++k) {
    StateVector st;
    st.z = (s.initial_libor.array() * (1.0 + (Eigen::ArrayXd::NullaryExpr(9, [&] { return rng.uniform(); }) - 0.5)))
               .log()
               .matrix();
    for (Eigen::Index i = 1; i <= 9; ++i) {
      const double t = rng.uniform() * s.tenor.date(i);
      const double a = drift_cumulant_expansion(t, i, st, s), b = drift_quadrature(t, i, st, s);
      EXPECT_LE(std::abs(a - b), 1e-6 * std::abs(b)) << "state " << k << " rate " << i;
    }
  }
}

TEST(CumulantExpansion, SkewedDriverAgainstQuadrature) {
  auto s = bundled_setup();
  s.driver.jumps = NigParams{2.0, -0.3, 1.1, 0.05};
  const auto st = initial_state(s);
  for (Eigen::Index i = 1; i <= 9; ++i) {
    const double a = drift_cumulant_expansion(0.0, i, st, s), b = drift_quadrature(0.0, i, st, s);
    EXPECT_LE(std::abs(a - b), 1e-9 * std::abs(b)) << "rate " << i;
  }
}

TEST(Quadrature, CompensatedExponential) {
  const auto& p = bundled_setup().driver.jumps;
  EXPECT_NEAR(compensated_exponential_quadrature(0.12, p), kappa(0.12), 1e-12);
  EXPECT_NEAR(compensated_exponential_quadrature(1.44, p), 1.62, 1e-12);
  EXPECT_NEAR(compensated_exponential_quadrature(-0.7, p), kappa(0.7), 1e-12);
  EXPECT_EQ(compensated_exponential_quadrature(0.0, p), 0.0);
}

TEST(Quadrature, SkewedCompensated) {
  const NigParams p{2.0, 0.6, 1.1, 0.2};
  for (double u : {-1.5, 0.3, 1.2})
    EXPECT_NEAR(compensated_exponential_quadrature(u, p), nig_compensated_cumulant(u, p), 1e-12);
}

TEST(Monotonicity, HigherLaterRatesLowerDrift) {
  const auto& s = bundled_setup();
  for (Eigen::Index i = 1; i <= 8; ++i) {
    double prev = std::numeric_limits<double>::infinity();
    for (double shift = -1.0; shift <= 1.0; shift += 0.25) {
      StateVector st{(s.initial_libor.array().log() + shift).matrix()};
      const double b = terminal_drift(0.0, i, st, s);
      EXPECT_LE(b, prev + 1e-12);
      prev = b;
    }
  }
}

TEST(DriftEngine, DriftAllMatchesPointwise) {
  const auto& s = bundled_setup();
  const DriftEngine engine(s);
  Rng rng(8);
  DriftWorkspace ws;
  Eigen::VectorXd out(9);
  for (Eigen::Index a = 0; a < 9; ++a) {
    Eigen::VectorXd z = s.initial_libor.array().log().matrix();
    for (auto& v : z) v += 0.3 * (rng.uniform() - 0.5);
    engine.drift_all(a, z, out, ws);
    for (Eigen::Index i = 1; i <= 9; ++i) {
      const double t = s.tenor.date(a) + 0.1;
      EXPECT_NEAR(out(i - 1), terminal_drift(t, i, StateVector{z}, s), 1e-16) << a << " " << i;
    }
  }
  EXPECT_THROW(engine.drift(0, 0, s.initial_libor), std::out_of_range);
}

TEST(DeterministicTable, LastRateAndDefinition) {
  const auto& s = bundled_setup();
  const auto st = initial_state(s);
  const auto grid = build_grid(s.tenor, 4);
  const Eigen::VectorXd last = deterministic_drift_table(9, s, st, grid);
  EXPECT_EQ(last.size(), 36);
  for (Eigen::Index k = 0; k < 36; ++k) EXPECT_NEAR(last(k), -kappa(0.12), 1e-17);

  const Eigen::VectorXd third = deterministic_drift_table(3, s, st, grid);
  // a step carries the characteristics of its interior
  for (Eigen::Index k = 0; k < 36; ++k) {
    const double mid = grid.times(k) + 0.5 * grid.dt(k);
    if (mid > s.tenor.date(3))
      EXPECT_EQ(third(k), 0.0);
    else
      EXPECT_EQ(third(k), terminal_drift(mid, 3, st, s));
  }
}

TEST(DeterministicTable, TaylorStateAtStartAgrees) {
  const auto& s = bundled_setup();
  StateVector x0 = initial_state(s);
  StateVector tx0{x0.z, StateVector::Semantics::TaylorApprox};
  for (Eigen::Index i = 1; i <= 9; ++i) EXPECT_EQ(terminal_drift(0.0, i, x0, s), terminal_drift(0.0, i, tx0, s));
}

}  // namespace
}  // namespace levylmm
