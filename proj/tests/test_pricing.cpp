#include <gtest/gtest.h>

#include <cmath>
#include <limits>

#include "fixtures.hpp"
#include "levylmm/pricing.hpp"
#include "oracles.hpp"

namespace levylmm {
namespace {

using test::bundled_setup;

// A path whose rates sit at given levels from t = 0 on.
PathBundle flat_path(const MarketSetup& s, const Eigen::VectorXd& rates) {
  PathBundle p;
  p.grid = std::make_shared<const SimulationGrid>(build_grid(s.tenor, 1));
  p.log_rates = rates.array().log().matrix().replicate(1, p.grid->steps() + 1);
  return p;
}

TEST(CapletPayoff, OutOfTheMoneyIsZero) {
  const auto& s = bundled_setup();
  const auto p = flat_path(s, s.initial_libor);
  EXPECT_EQ(caplet_payoff(p, {0.06, 3}, s), 0.0);
  EXPECT_EQ(caplet_payoff(p, {s.initial_libor(2), 3}, s), 0.0);
}

TEST(CapletPayoff, LastRateHasNoWeight) {
  const auto& s = bundled_setup();
  const auto p = flat_path(s, s.initial_libor);
  EXPECT_DOUBLE_EQ(caplet_payoff(p, {0.05, 9}, s), 0.5 * s.curve.bond(10) * (s.initial_libor(8) - 0.05));
}

TEST(CapletPayoff, ZeroStrikeSecondToLast) {
  const auto& s = bundled_setup();
  const auto p = flat_path(s, s.initial_libor);
  const double expected = 0.5 * s.curve.bond(10) * (1 + 0.5 * s.initial_libor(8)) * s.initial_libor(7);
  EXPECT_NEAR(caplet_payoff(p, {0.0, 8}, s), expected, 1e-17);
  // with the curve's own rates this is the discounted forward
  EXPECT_NEAR(expected, 0.5 * s.curve.bond(9) * s.initial_libor(7), 1e-16);
}

TEST(SwaptionPayoff, HugeStrikeIsZero) {
  const auto& s = bundled_setup();
  const auto p = flat_path(s, s.initial_libor);
  EXPECT_EQ(swaption_payoff(p, {10.0, 2, 6}, s), 0.0);
}

TEST(SwaptionPayoff, ZeroRatesGiveZero) {
  const auto& s = bundled_setup();
  const auto p = flat_path(s, Eigen::VectorXd::Constant(9, 1e-300));
  EXPECT_EQ(swaption_payoff(p, {0.04, 2, 6}, s), 0.0);
  EXPECT_EQ(swaption_payoff(p, {0.04, 2, 6, CouponConvention::Literal}, s), 0.0);
}

TEST(SwaptionPayoff, SinglePeriodIsCaplet) {
  const auto& s = bundled_setup();
  const PathSimulator sim(s, build_grid(s.tenor, 4));
  PathSimulator::Workspace ws;
  PathBundle p;
  int in_the_money = 0;
  for (std::uint64_t j = 0; j < 300; ++j) {
    Rng rng = Rng::substream(8, j);
    sim.simulate(Scheme::FullSde, sim.draw_increments(rng), p, ws);
    for (Eigen::Index i = 1; i < 9; ++i) {
      const double k = s.initial_libor(i - 1);
      const double cap = caplet_payoff(p, {k, i}, s);
      const double swp = swaption_payoff(p, {k, i, i + 1}, s);
      in_the_money += cap > 0.0;
      ASSERT_EQ(swp, cap) << "path " << j << " rate " << i;
    }
  }
  EXPECT_GT(in_the_money, 100);
}

// cash flows discounted one by one, without telescoping
double swaption_direct(const PathBundle& p, const SwaptionSpec& sw, const MarketSetup& s) {
  double sum = 0.0;
  for (Eigen::Index k = sw.option_index; k <= sw.swap_end; ++k) {
    double prod = 1.0;
    for (Eigen::Index l = k; l <= 9; ++l) prod *= 1.0 + 0.5 * p.fixing(sw.option_index, l);
    double c = k == sw.option_index ? -1.0 : (sw.convention == CouponConvention::Accrued ? 0.5 : 1.0) * sw.strike;
    if (k == sw.swap_end) c += 1.0;
    sum -= c * prod;
  }
  return s.curve.bond(10) * std::max(sum, 0.0);
}

TEST(SwaptionPayoff, MatchesDirectCashFlows) {
  const auto& s = bundled_setup();
  const PathSimulator sim(s, build_grid(s.tenor, 2));
  PathSimulator::Workspace ws;
  PathBundle p;
  for (std::uint64_t j = 0; j < 100; ++j) {
    Rng rng = Rng::substream(12, j);
    sim.simulate(Scheme::StrongTaylor, sim.draw_increments(rng), p, ws);
    for (const auto& cell : swaption_grid(s, {0.8, 1.0, 1.2}))
      for (auto conv : {CouponConvention::Accrued, CouponConvention::Literal}) {
        auto sw = std::get<SwaptionSpec>(cell);
        sw.convention = conv;
        EXPECT_NEAR(swaption_payoff(p, sw, s), swaption_direct(p, sw, s), 1e-15);
      }
  }
}

TEST(SwaptionPayoff, ConventionsDiffer) {
  const auto& s = bundled_setup();
  const auto p = flat_path(s, s.initial_libor * 1.3);
  const double k = forward_swap_rate(s, 2, 6);
  const double accrued = swaption_payoff(p, {k, 2, 6}, s);
  const double literal_same = swaption_payoff(p, {0.5 * k, 2, 6, CouponConvention::Literal}, s);
  EXPECT_GT(accrued, 0.0);
  EXPECT_NEAR(accrued, literal_same, 1e-15);
}

TEST(SwaptionPayoff, RejectsBadIndices) {
  const auto& s = bundled_setup();
  EXPECT_THROW(check_spec(SwaptionSpec{0.04, 4, 4}, s), std::invalid_argument);
  EXPECT_THROW(check_spec(SwaptionSpec{0.04, 4, 10}, s), std::invalid_argument);
  EXPECT_THROW(check_spec(CapletSpec{0.04, 0}, s), std::invalid_argument);
  EXPECT_THROW(check_spec(CapletSpec{-0.01, 3}, s), std::invalid_argument);
}

TEST(ForwardSwapRate, SinglePeriodIsLibor) {
  const auto& s = bundled_setup();
  for (Eigen::Index i = 1; i < 9; ++i) EXPECT_NEAR(forward_swap_rate(s, i, i + 1), s.initial_libor(i - 1), 1e-15);
}

TEST(PriceMc, ZeroStrikeIsDiscountedForward) {
  const auto& s = bundled_setup();
  const auto grid = build_grid(s.tenor, 4);
  std::vector<InstrumentSpec> specs;
  for (Eigen::Index i = 1; i <= 9; ++i) specs.push_back(CapletSpec{0.0, i});
  for (Scheme scheme : {Scheme::FullSde, Scheme::StrongTaylor}) {
    const auto est = price_mc(scheme, specs, s, grid, 50000, 17);
    for (Eigen::Index i = 1; i <= 9; ++i) {
      const double forward = 0.5 * s.curve.bond(i + 1) * s.initial_libor(i - 1);
      EXPECT_NEAR(est[i - 1].value, forward, 3 * est[i - 1].std_error) << to_string(scheme) << " rate " << i;
      EXPECT_EQ(est[i - 1].invalid_path_count, 0u);
    }
  }
}

TEST(PriceMc, SinglePathHasInfiniteError) {
  const auto& s = bundled_setup();
  const auto e = price_mc(Scheme::FullSde, CapletSpec{0.0, 4}, s, build_grid(s.tenor, 1), 1, 3);
  EXPECT_TRUE(std::isinf(e.std_error));
  EXPECT_TRUE(std::isfinite(e.value));
}

TEST(PriceMc, LastRateOracle) {
  const auto& s = bundled_setup();
  const double k = s.initial_libor(8);
  const double exact = oracle::last_rate_caplet(s, k);
  for (Scheme scheme : {Scheme::FullSde, Scheme::FrozenDrift}) {
    const auto e = price_mc(scheme, CapletSpec{k, 9}, s, build_grid(s.tenor, 4), 100000, 2002);
    EXPECT_NEAR(e.value, exact, 3 * e.std_error);
  }
}

TEST(PriceMc, DeterministicAcrossThreads) {
  const auto& s = bundled_setup();
  const auto grid = build_grid(s.tenor, 2);
  const auto specs = caplet_grid(s, {0.9, 1.1});
  const auto a = price_mc(Scheme::FullSde, specs, s, grid, 5000, 4, 1);
  const auto b = price_mc(Scheme::FullSde, specs, s, grid, 5000, 4, 3);
  for (std::size_t k = 0; k < a.size(); ++k) {
    EXPECT_EQ(a[k].value, b[k].value);
    EXPECT_EQ(a[k].std_error, b[k].std_error);
  }
}

TEST(Black76, IntrinsicLimit) {
  EXPECT_DOUBLE_EQ(black76_caplet(0.05, 0.04, 0.0, 1.0, 0.5, 0.9), 0.9 * 0.5 * 0.01);
  EXPECT_NEAR(black76_caplet(0.05, 0.04, 1e-9, 1.0, 0.5, 0.9), 0.9 * 0.5 * 0.01, 1e-15);
  EXPECT_EQ(black76_caplet(0.03, 0.04, 0.0, 1.0, 0.5, 0.9), 0.0);
}

TEST(Black76, AtTheMoneyClosedForm) {
  const double sd = 0.25 * std::sqrt(2.0);
  const double expected = 0.95 * 0.5 * 0.045 * std::erf(sd / 2 / std::sqrt(2.0));
  EXPECT_NEAR(black76_caplet(0.045, 0.045, 0.25, 2.0, 0.5, 0.95), expected, 1e-16);
}

TEST(ImpliedVol, RoundTrip) {
  const double price = black76_caplet(0.04, 0.04, 0.2, 1.0, 0.5, 0.97);
  EXPECT_NEAR(implied_vol(price, 0.04, 0.04, 1.0, 0.5, 0.97), 0.2, 1e-8);
  for (double k : {0.028, 0.04, 0.052})
    for (double sigma : {0.05, 0.3, 1.7}) {
      const double p = black76_caplet(0.04, k, sigma, 2.5, 0.5, 0.9);
      const double iv = implied_vol(p, 0.04, k, 2.5, 0.5, 0.9);
      EXPECT_NEAR(black76_caplet(0.04, k, iv, 2.5, 0.5, 0.9), p, 1e-10);
    }
}

TEST(ImpliedVol, BoundsAreErrors) {
  const double intrinsic = 0.97 * 0.5 * 0.01;
  EXPECT_THROW(implied_vol(intrinsic, 0.05, 0.04, 1.0, 0.5, 0.97), ImpliedVolError);
  EXPECT_THROW(implied_vol(0.97 * 0.5 * 0.05, 0.05, 0.04, 1.0, 0.5, 0.97), ImpliedVolError);
  EXPECT_THROW(implied_vol(1e-3, -0.05, 0.04, 1.0, 0.5, 0.97), std::invalid_argument);
}

TEST(ImpliedVol, Monotone) {
  const double a = implied_vol(0.0010, 0.04, 0.04, 1.0, 0.5, 0.97);
  const double b = implied_vol(0.0015, 0.04, 0.04, 1.0, 0.5, 0.97);
  const double c = implied_vol(0.0020, 0.04, 0.04, 1.0, 0.5, 0.97);
  EXPECT_LT(a, b);
  EXPECT_LT(b, c);
}

class BundledComparison : public ::testing::Test {
 protected:
  static void SetUpTestSuite() {
    const auto& s = bundled_setup();
    auto cells = caplet_grid(s, default_strike_multipliers());
    const auto sw = swaption_grid(s, default_strike_multipliers());
    cells.insert(cells.end(), sw.begin(), sw.end());
    table_ = new ComparisonTable(compare_schemes(cells, s, build_grid(s.tenor, 4), 100000, 20020219));
  }
  static void TearDownTestSuite() { delete table_; }
  static ComparisonTable* table_;
};

ComparisonTable* BundledComparison::table_ = nullptr;

TEST_F(BundledComparison, GridShape) {
  EXPECT_EQ(table_->rows.size(), 3u * (9 * 7 + 8 * 7));
  EXPECT_EQ(table_->invalid_path_count, 0u);
}

TEST_F(BundledComparison, LastRateRowsCoincide) {
  for (const auto& r : table_->rows) {
    if (r.instrument != "caplet" || r.maturity_index != 9) continue;
    EXPECT_EQ(r.price_diff_vs_full, 0.0);
    ASSERT_TRUE(r.iv_diff_vs_full.has_value());
    EXPECT_EQ(*r.iv_diff_vs_full, 0.0);
  }
}

TEST_F(BundledComparison, TaylorStaysWithinOneVolPoint) {
  for (const auto& r : table_->rows) {
    if (r.instrument != "caplet" || r.scheme != Scheme::StrongTaylor) continue;
    ASSERT_TRUE(r.iv_diff_vs_full.has_value()) << r.error;
    EXPECT_LT(std::abs(*r.iv_diff_vs_full), 0.01);
  }
}

TEST_F(BundledComparison, FrozenExceedsOneVolPointForDeepItm) {
  double worst = 0.0;
  for (const auto& r : table_->rows)
    if (r.instrument == "caplet" && r.scheme == Scheme::FrozenDrift && r.iv_diff_vs_full)
      worst = std::max(worst, std::abs(*r.iv_diff_vs_full));
  EXPECT_GT(worst, 0.01);
}

TEST_F(BundledComparison, PricesFallWithStrike) {
  // cells of one instrument are consecutive triples ordered by strike
  const auto& rows = table_->rows;
  for (std::size_t c = 3; c < rows.size(); c += 3) {
    const auto& prev = rows[c - 3];
    const auto& cur = rows[c];
    if (prev.instrument != cur.instrument || prev.maturity_index != cur.maturity_index ||
        prev.swap_end != cur.swap_end)
      continue;
    ASSERT_GT(cur.strike, prev.strike);
    for (std::size_t s = 0; s < 3; ++s)
      EXPECT_LE(rows[c + s].price, rows[c - 3 + s].price + 2 * rows[c + s].std_error);
  }
}

TEST_F(BundledComparison, CsvSchema) {
  const std::string csv = table_->to_csv();
  EXPECT_EQ(csv.rfind("instrument,maturity_index,strike,scheme,price,std_error,implied_vol,iv_diff_vs_full,"
                      "price_diff_vs_full,n_paths,seed\n",
                      0),
            0u);
  EXPECT_NE(csv.find("\nswaption_end_9,4,"), std::string::npos);
  EXPECT_EQ(std::count(csv.begin(), csv.end(), '\n'), 1 + static_cast<long>(table_->rows.size()));
}

TEST(SwaptionGrid, OptionAndSwapDates) {
  const auto& s = bundled_setup();
  const auto grid = swaption_grid(s, {1.0});
  ASSERT_EQ(grid.size(), 8u);
  const Eigen::Index expected[8][2] = {{2, 4}, {2, 5}, {2, 6}, {2, 7}, {4, 6}, {4, 7}, {4, 8}, {4, 9}};
  for (std::size_t k = 0; k < 8; ++k) {
    const auto& sw = std::get<SwaptionSpec>(grid[k]);
    EXPECT_EQ(sw.option_index, expected[k][0]);
    EXPECT_EQ(sw.swap_end, expected[k][1]);
    EXPECT_NEAR(sw.strike, forward_swap_rate(s, sw.option_index, sw.swap_end), 1e-16);
  }
}

}  // namespace
}  // namespace levylmm
