#include "levylmm/pricing.hpp"

#include <array>
#include <cstdio>
#include <limits>
#include <sstream>

namespace levylmm {

namespace {

// running sums for mean and standard error
struct Moments {
  double sum = 0.0;
  double sum_sq = 0.0;

  void add(double x) {
    sum += x;
    sum_sq += x * x;
  }
  void merge(const Moments& o) {
    sum += o.sum;
    sum_sq += o.sum_sq;
  }
  double mean(std::uint64_t n) const { return sum / static_cast<double>(n); }
  double std_error(std::uint64_t n) const {
    if (n < 2) return std::numeric_limits<double>::infinity();
    const double m = mean(n);
    const double var = std::max(0.0, (sum_sq - n * m * m) / static_cast<double>(n - 1));
    return std::sqrt(var / static_cast<double>(n));
  }
};

Eigen::Index find_date(const TenorStructure& tenor, double t) {
  for (Eigen::Index a = 0; a < tenor.dates.size(); ++a)
    if (std::abs(tenor.date(a) - t) < 1e-9) return a;
  std::ostringstream msg;
  msg << "no tenor date at t = " << t;
  throw std::invalid_argument(msg.str());
}

}  // namespace

void check_spec(const InstrumentSpec& spec, const MarketSetup& setup) {
  const Eigen::Index n = setup.num_rates();
  if (const auto* c = std::get_if<CapletSpec>(&spec)) {
    if (c->rate < 1 || c->rate > n) throw std::invalid_argument("caplet: rate index out of range");
    if (!(c->strike >= 0.0)) throw std::invalid_argument("caplet: strike must be >= 0");
  } else {
    const auto& s = std::get<SwaptionSpec>(spec);
    if (s.option_index < 1 || s.option_index >= s.swap_end || s.swap_end > n)
      throw std::invalid_argument("swaption: need 1 <= i < m <= N");
    if (!(s.strike >= 0.0)) throw std::invalid_argument("swaption: strike must be >= 0");
  }
}

double caplet_payoff(const PathBundle& bundle, const CapletSpec& spec, const MarketSetup& setup) {
  const Eigen::Index i = spec.rate;
  const double fixing = bundle.fixing(i, i);
  if (!(fixing > spec.strike)) return 0.0;
  // same multiplication order as the swaption tail, so a one-period swaption reproduces this bit for bit
  double weight = 1.0;
  for (Eigen::Index l = setup.num_rates(); l > i; --l) weight *= 1.0 + setup.tenor.accrual(l) * bundle.fixing(i, l);
  const double terminal_bond = setup.curve.bond(setup.num_rates() + 1);
  return setup.tenor.accrual(i) * terminal_bond * weight * (fixing - spec.strike);
}

double swaption_payoff(const PathBundle& bundle, const SwaptionSpec& spec, const MarketSetup& setup) {
  const Eigen::Index n = setup.num_rates();
  const Eigen::Index i = spec.option_index;
  const Eigen::Index m = spec.swap_end;
  const double terminal_bond = setup.curve.bond(n + 1);
  // Telescoped: prod_i - prod_m = sum_k delta_k L_k prod_{k+1}, which avoids the cancellation
  // of the floating leg against the final notional near the money.
  double tail = 1.0;  // prod_{l=k+1}^{N} (1 + delta_l L(T_i, T_l))
  for (Eigen::Index l = n; l >= m; --l) tail *= 1.0 + setup.tenor.accrual(l) * bundle.fixing(i, l);
  double value = 0.0;
  for (Eigen::Index k = m - 1; k >= i; --k) {
    const double delta = setup.tenor.accrual(k);
    const double fixing = bundle.fixing(i, k);
    if (spec.convention == CouponConvention::Accrued)
      value += delta * terminal_bond * tail * (fixing - spec.strike);
    else
      value += terminal_bond * tail * (delta * fixing - spec.strike);
    tail *= 1.0 + delta * fixing;
  }
  return value > 0.0 ? value : 0.0;
}

double payoff(const PathBundle& bundle, const InstrumentSpec& spec, const MarketSetup& setup) {
  return std::visit(
      [&](const auto& s) -> double {
        using T = std::decay_t<decltype(s)>;
        if constexpr (std::is_same_v<T, CapletSpec>)
          return caplet_payoff(bundle, s, setup);
        else
          return swaption_payoff(bundle, s, setup);
      },
      spec);
}

std::vector<McEstimate> price_mc(Scheme scheme, const std::vector<InstrumentSpec>& specs,
                                 const MarketSetup& setup, const SimulationGrid& grid,
                                 std::uint64_t n_paths, std::uint64_t seed, int threads,
                                 DriftMethod method) {
  if (n_paths < 1) throw std::invalid_argument("price_mc: n_paths must be >= 1");
  for (const auto& s : specs) check_spec(s, setup);
  const PathSimulator sim(setup, grid, method);
  const std::uint64_t blocks = (n_paths + kPathBlock - 1) / kPathBlock;
  std::vector<std::vector<Moments>> block_moments(blocks, std::vector<Moments>(specs.size()));
  std::vector<std::uint64_t> block_invalid(blocks, 0);

  for_each_block(n_paths, kPathBlock, threads, [&](std::uint64_t b, std::uint64_t begin, std::uint64_t end) {
    PathSimulator::Workspace ws;
    PathBundle bundle;
    for (std::uint64_t j = begin; j < end; ++j) {
      Rng rng = Rng::substream(seed, j);
      sim.simulate(scheme, sim.draw_increments(rng), bundle, ws);
      if (!bundle.valid) {
        ++block_invalid[b];
        continue;
      }
      for (std::size_t c = 0; c < specs.size(); ++c) block_moments[b][c].add(payoff(bundle, specs[c], setup));
    }
  });

  std::vector<Moments> total(specs.size());
  std::uint64_t invalid = 0;
  for (std::uint64_t b = 0; b < blocks; ++b) {
    invalid += block_invalid[b];
    for (std::size_t c = 0; c < specs.size(); ++c) total[c].merge(block_moments[b][c]);
  }
  const std::uint64_t used = n_paths - invalid;
  std::vector<McEstimate> out;
  for (const auto& m : total) {
    McEstimate e;
    e.value = used > 0 ? m.mean(used) : std::numeric_limits<double>::quiet_NaN();
    e.std_error = m.std_error(used);
    e.n_paths = n_paths;
    e.scheme = scheme;
    e.seed = seed;
    e.invalid_path_count = invalid;
    out.push_back(e);
  }
  return out;
}

McEstimate price_mc(Scheme scheme, const InstrumentSpec& spec, const MarketSetup& setup,
                    const SimulationGrid& grid, std::uint64_t n_paths, std::uint64_t seed, int threads) {
  return price_mc(scheme, std::vector<InstrumentSpec>{spec}, setup, grid, n_paths, seed, threads).front();
}

double implied_vol(double price, double forward, double strike, double expiry, double delta,
                   double discount) {
  if (!(forward > 0.0 && strike > 0.0 && expiry > 0.0 && delta > 0.0 && discount > 0.0))
    throw std::invalid_argument("implied_vol: F, K, T, delta and DF must be positive");
  const double scale = discount * delta;
  const double intrinsic = scale * std::max(forward - strike, 0.0);
  const double upper = scale * forward;
  if (!(price > intrinsic)) {
    std::ostringstream msg;
    msg << "implied_vol: price " << price << " is not above intrinsic value " << intrinsic;
    throw ImpliedVolError(msg.str());
  }
  if (!(price < upper)) {
    std::ostringstream msg;
    msg << "implied_vol: price " << price << " is not below the discounted forward " << upper;
    throw ImpliedVolError(msg.str());
  }
  const auto f = [&](double s) { return black76_caplet(forward, strike, s, expiry, delta, discount) - price; };
  double lo = kImpliedVolLow;
  double hi = kImpliedVolHigh;
  if (f(lo) > 0.0) {
    std::ostringstream msg;
    msg << "implied_vol: price " << price << " is below the Black value at sigma = " << lo;
    throw ImpliedVolError(msg.str());
  }
  if (f(hi) < 0.0) {
    std::ostringstream msg;
    msg << "implied_vol: price " << price << " is above the Black value at sigma = " << hi;
    throw ImpliedVolError(msg.str());
  }
  // run to the resolution of the bracket; the price criterion is then met as well
  for (int it = 0; it < 200 && hi - lo > 1e-15; ++it) {
    const double mid = 0.5 * (lo + hi);
    if (f(mid) < 0.0)
      lo = mid;
    else
      hi = mid;
  }
  return 0.5 * (lo + hi);
}

double forward_swap_rate(const MarketSetup& setup, Eigen::Index i, Eigen::Index m) {
  double annuity = 0.0;
  for (Eigen::Index k = i + 1; k <= m; ++k) annuity += setup.tenor.accrual(k - 1) * setup.curve.bond(k);
  return (setup.curve.bond(i) - setup.curve.bond(m)) / annuity;
}

const char* ComparisonTable::csv_header() {
  return "instrument,maturity_index,strike,scheme,price,std_error,implied_vol,iv_diff_vs_full,"
         "price_diff_vs_full,n_paths,seed";
}

namespace {

std::string fmt_double(double x) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.12g", x);
  return buf;
}

}  // namespace

std::string ComparisonTable::to_csv() const {
  std::ostringstream os;
  os << csv_header() << '\n';
  for (const auto& r : rows) {
    os << r.instrument << ',' << r.maturity_index << ',' << fmt_double(r.strike) << ','
       << to_string(r.scheme) << ',' << fmt_double(r.price) << ',' << fmt_double(r.std_error) << ','
       << (r.implied_vol ? fmt_double(*r.implied_vol) : "") << ','
       << (r.iv_diff_vs_full ? fmt_double(*r.iv_diff_vs_full) : "") << ','
       << fmt_double(r.price_diff_vs_full) << ',' << r.n_paths << ',' << r.seed << '\n';
  }
  return os.str();
}

ComparisonTable compare_schemes(const std::vector<InstrumentSpec>& cells, const MarketSetup& setup,
                                const SimulationGrid& grid, std::uint64_t n_paths,
                                std::uint64_t seed, int threads, DriftMethod method) {
  if (n_paths < 1) throw std::invalid_argument("compare_schemes: n_paths must be >= 1");
  constexpr std::array<Scheme, 3> schemes{Scheme::FullSde, Scheme::FrozenDrift, Scheme::StrongTaylor};
  for (const auto& c : cells) check_spec(c, setup);
  const PathSimulator sim(setup, grid, method);
  const std::size_t nc = cells.size();

  // per block: [scheme][cell] payoff moments, [scheme][cell] moments of (payoff - full payoff)
  struct BlockStats {
    std::array<std::vector<Moments>, 3> price;
    std::array<std::vector<Moments>, 3> diff;
    std::uint64_t invalid = 0;
  };
  const std::uint64_t blocks = (n_paths + kPathBlock - 1) / kPathBlock;
  std::vector<BlockStats> stats(blocks);

  for_each_block(n_paths, kPathBlock, threads, [&](std::uint64_t b, std::uint64_t begin, std::uint64_t end) {
    BlockStats& st = stats[b];
    for (std::size_t s = 0; s < 3; ++s) {
      st.price[s].assign(nc, {});
      st.diff[s].assign(nc, {});
    }
    PathSimulator::Workspace ws;
    std::array<PathBundle, 3> bundles;
    std::vector<double> full_payoff(nc);
    for (std::uint64_t j = begin; j < end; ++j) {
      Rng rng = Rng::substream(seed, j);
      const DriverIncrements inc = sim.draw_increments(rng);
      bool valid = true;
      for (std::size_t s = 0; s < 3; ++s) {
        sim.simulate(schemes[s], inc, bundles[s], ws);
        valid = valid && bundles[s].valid;
      }
      // drop the path from every scheme so the comparison stays paired
      if (!valid) {
        ++st.invalid;
        continue;
      }
      for (std::size_t c = 0; c < nc; ++c) {
        for (std::size_t s = 0; s < 3; ++s) {
          const double p = payoff(bundles[s], cells[c], setup);
          if (s == 0) full_payoff[c] = p;
          st.price[s][c].add(p);
          st.diff[s][c].add(p - full_payoff[c]);
        }
      }
    }
  });

  std::array<std::vector<Moments>, 3> price, diff;
  for (std::size_t s = 0; s < 3; ++s) {
    price[s].assign(nc, {});
    diff[s].assign(nc, {});
  }
  ComparisonTable table;
  for (const auto& st : stats) {
    table.invalid_path_count += st.invalid;
    for (std::size_t s = 0; s < 3; ++s)
      for (std::size_t c = 0; c < nc; ++c) {
        price[s][c].merge(st.price[s][c]);
        diff[s][c].merge(st.diff[s][c]);
      }
  }
  const std::uint64_t used = n_paths - table.invalid_path_count;

  for (std::size_t c = 0; c < nc; ++c) {
    std::array<ComparisonRow, 3> rows;
    for (std::size_t s = 0; s < 3; ++s) {
      ComparisonRow& r = rows[s];
      r.scheme = schemes[s];
      r.n_paths = n_paths;
      r.seed = seed;
      r.price = used > 0 ? price[s][c].mean(used) : std::numeric_limits<double>::quiet_NaN();
      r.std_error = price[s][c].std_error(used);
      r.price_diff_vs_full = used > 0 ? diff[s][c].mean(used) : std::numeric_limits<double>::quiet_NaN();
      r.diff_std_error = s == 0 ? 0.0 : diff[s][c].std_error(used);
      if (const auto* cap = std::get_if<CapletSpec>(&cells[c])) {
        const Eigen::Index i = cap->rate;
        const double forward = setup.initial_libor(i - 1);
        r.instrument = "caplet";
        r.maturity_index = i;
        r.strike = cap->strike;
        r.moneyness = cap->strike / forward;
        try {
          r.implied_vol = implied_vol(r.price, forward, cap->strike, setup.tenor.date(i),
                                      setup.tenor.accrual(i), setup.curve.bond(i + 1));
        } catch (const std::exception& e) {
          r.error = e.what();
        }
      } else {
        const auto& sw = std::get<SwaptionSpec>(cells[c]);
        r.instrument = "swaption_end_" + std::to_string(sw.swap_end);
        r.maturity_index = sw.option_index;
        r.swap_end = sw.swap_end;
        r.strike = sw.strike;
        double atm = forward_swap_rate(setup, sw.option_index, sw.swap_end);
        if (sw.convention == CouponConvention::Literal) atm *= setup.tenor.accrual(sw.option_index);
        r.moneyness = sw.strike / atm;
      }
    }
    for (std::size_t s = 0; s < 3; ++s) {
      if (rows[s].implied_vol && rows[0].implied_vol)
        rows[s].iv_diff_vs_full = *rows[s].implied_vol - *rows[0].implied_vol;
      table.rows.push_back(rows[s]);
    }
  }
  return table;
}

std::vector<double> default_strike_multipliers() { return {0.7, 0.8, 0.9, 1.0, 1.1, 1.2, 1.3}; }

std::vector<InstrumentSpec> caplet_grid(const MarketSetup& setup, const std::vector<double>& multipliers) {
  std::vector<InstrumentSpec> out;
  for (Eigen::Index i = 1; i <= setup.num_rates(); ++i)
    for (double m : multipliers) out.push_back(CapletSpec{m * setup.initial_libor(i - 1), i});
  return out;
}

std::vector<InstrumentSpec> swaption_grid(const MarketSetup& setup, const std::vector<double>& multipliers,
                                          CouponConvention convention) {
  std::vector<InstrumentSpec> out;
  for (double expiry : {1.0, 2.0}) {
    const Eigen::Index i = find_date(setup.tenor, expiry);
    for (double length : {1.0, 1.5, 2.0, 2.5}) {
      const Eigen::Index m = find_date(setup.tenor, expiry + length);
      double atm = forward_swap_rate(setup, i, m);
      if (convention == CouponConvention::Literal) atm *= setup.tenor.accrual(i);
      for (double mult : multipliers) out.push_back(SwaptionSpec{mult * atm, i, m, convention});
    }
  }
  return out;
}

}  // namespace levylmm
