#include "levylmm/simulator.hpp"

#include <algorithm>
#include <atomic>
#include <sstream>
#include <stdexcept>
#include <thread>

namespace levylmm {

namespace {

inline double advance(double z, double drift, double dt, double vol, double dh) {
  return z + drift * dt + vol * dh;
}

}  // namespace

SimulationGrid build_grid(const TenorStructure& tenor, int substeps) {
  if (substeps < 1) throw std::invalid_argument("build_grid: substeps must be >= 1");
  const Eigen::Index n = tenor.num_rates();
  SimulationGrid grid;
  grid.substeps_per_accrual = substeps;
  grid.times.resize(n * substeps + 1);
  grid.tenor_point.resize(n + 1);
  Eigen::Index k = 0;
  for (Eigen::Index a = 0; a < n; ++a) {
    grid.tenor_point[a] = k;
    const double start = tenor.date(a);
    const double step = tenor.accrual(a) / substeps;
    for (int j = 0; j < substeps; ++j) {
      grid.times(k++) = start + j * step;
      grid.step_interval.push_back(a);
    }
  }
  grid.times(k) = tenor.date(n);
  grid.tenor_point[n] = k;
  return grid;
}

std::string to_string(Scheme s) {
  switch (s) {
    case Scheme::FullSde: return "full";
    case Scheme::FrozenDrift: return "frozen";
    case Scheme::StrongTaylor: return "taylor";
  }
  return "unknown";
}

Scheme scheme_from_string(const std::string& s) {
  if (s == "full") return Scheme::FullSde;
  if (s == "frozen") return Scheme::FrozenDrift;
  if (s == "taylor") return Scheme::StrongTaylor;
  throw std::invalid_argument("unknown scheme '" + s + "' (expected full, frozen or taylor)");
}

namespace {

const MarketSetup& require_valid(const MarketSetup& setup) {
  const auto report = validate_setup(setup);
  if (!report.passed()) {
    std::ostringstream msg;
    msg << "PathSimulator: market setup failed validation:";
    for (const auto& c : report.checks)
      if (!c.passed) msg << " [" << c.name << ": " << c.detail << "]";
    throw std::invalid_argument(msg.str());
  }
  return setup;
}

}  // namespace

PathSimulator::PathSimulator(const MarketSetup& setup, SimulationGrid grid, DriftMethod method)
    : engine_(require_valid(setup)),
      grid_(std::make_shared<const SimulationGrid>(std::move(grid))),
      method_(method),
      z0_(setup.initial_libor.array().log().matrix()) {
  const Eigen::Index n = setup.num_rates();
  frozen_drift_ = Eigen::MatrixXd::Zero(n, n);
  DriftWorkspace ws;
  for (Eigen::Index a = 0; a < n; ++a) engine_.drift_all(a, z0_, frozen_drift_.col(a), ws, method_);
}

DriverIncrements PathSimulator::draw_increments(Rng& rng) const {
  return simulate_driver_increments(*grid_, setup().driver, rng);
}

void PathSimulator::run_frozen(const DriverIncrements& inc, Eigen::MatrixXd& log_rates) const {
  const Eigen::Index n = engine_.num_rates();
  const Eigen::MatrixXd& vols = setup().vols.levels;
  log_rates.resize(n, grid_->steps() + 1);
  log_rates.col(0) = z0_;
  for (Eigen::Index k = 0; k < grid_->steps(); ++k) {
    const Eigen::Index a = grid_->step_interval[k];
    const double dt = grid_->dt(k);
    log_rates.col(k + 1) = log_rates.col(k);
    for (Eigen::Index r = a; r < n; ++r)
      log_rates(r, k + 1) = advance(log_rates(r, k), frozen_drift_(r, a), dt, vols(r, a), inc.dh(k));
  }
}

void PathSimulator::run_with_state_drift(const DriverIncrements& inc,
                                         const Eigen::MatrixXd* drift_source,
                                         Eigen::MatrixXd& log_rates, Workspace& ws) const {
  const Eigen::Index n = engine_.num_rates();
  const Eigen::MatrixXd& vols = setup().vols.levels;
  log_rates.resize(n, grid_->steps() + 1);
  log_rates.col(0) = z0_;
  ws.drift.resize(n);
  for (Eigen::Index k = 0; k < grid_->steps(); ++k) {
    const Eigen::Index a = grid_->step_interval[k];
    const double dt = grid_->dt(k);
    // left-point state: own path for the full SDE, the TX path for the Taylor scheme
    if (drift_source)
      ws.state = drift_source->col(k);
    else
      ws.state = log_rates.col(k);
    engine_.drift_all(a, ws.state, ws.drift, ws.drift_ws, method_);
    log_rates.col(k + 1) = log_rates.col(k);
    for (Eigen::Index r = a; r < n; ++r)
      log_rates(r, k + 1) = advance(log_rates(r, k), ws.drift(r), dt, vols(r, a), inc.dh(k));
  }
}

void PathSimulator::simulate(Scheme scheme, const DriverIncrements& inc, PathBundle& out,
                             Workspace& ws) const {
  if (inc.steps() != grid_->steps())
    throw std::invalid_argument("PathSimulator: increments do not match the grid");
  out.scheme = scheme;
  out.grid = grid_;
  switch (scheme) {
    case Scheme::FrozenDrift:
      run_frozen(inc, out.log_rates);
      break;
    case Scheme::FullSde:
      run_with_state_drift(inc, nullptr, out.log_rates, ws);
      break;
    case Scheme::StrongTaylor:
      run_frozen(inc, ws.taylor_state);
      run_with_state_drift(inc, &ws.taylor_state, out.log_rates, ws);
      break;
  }
  out.valid = out.log_rates.allFinite();
}

PathBundle PathSimulator::simulate(Scheme scheme, const DriverIncrements& inc) const {
  PathBundle out;
  Workspace ws;
  simulate(scheme, inc, out, ws);
  return out;
}

PathBundle simulate_path(Scheme scheme, const SimulationGrid& grid, const MarketSetup& setup, Rng& rng) {
  const PathSimulator sim(setup, grid);
  return sim.simulate(scheme, sim.draw_increments(rng));
}

void for_each_block(std::uint64_t n_paths, std::uint64_t block_size, int threads,
                    const std::function<void(std::uint64_t, std::uint64_t, std::uint64_t)>& fn) {
  if (block_size == 0) throw std::invalid_argument("for_each_block: block_size must be > 0");
  const std::uint64_t blocks = (n_paths + block_size - 1) / block_size;
  const auto run_block = [&](std::uint64_t b) {
    fn(b, b * block_size, std::min(n_paths, (b + 1) * block_size));
  };
  const int workers = static_cast<int>(std::min<std::uint64_t>(std::max(threads, 1), blocks));
  if (workers <= 1) {
    for (std::uint64_t b = 0; b < blocks; ++b) run_block(b);
    return;
  }
  std::atomic<std::uint64_t> next{0};
  std::vector<std::exception_ptr> errors(workers);
  std::vector<std::thread> pool;
  for (int w = 0; w < workers; ++w) {
    pool.emplace_back([&, w] {
      try {
        for (std::uint64_t b = next++; b < blocks; b = next++) run_block(b);
      } catch (...) {
        errors[w] = std::current_exception();
        next = blocks;
      }
    });
  }
  for (auto& t : pool) t.join();
  for (auto& e : errors)
    if (e) std::rethrow_exception(e);
}

std::vector<PathBundle> simulate_ensemble(Scheme scheme, const SimulationGrid& grid,
                                          const MarketSetup& setup, std::uint64_t n_paths,
                                          std::uint64_t seed, int threads) {
  if (n_paths < 1) throw std::invalid_argument("simulate_ensemble: n_paths must be >= 1");
  const PathSimulator sim(setup, grid);
  std::vector<PathBundle> out(n_paths);
  for_each_block(n_paths, kPathBlock, threads, [&](std::uint64_t, std::uint64_t begin, std::uint64_t end) {
    PathSimulator::Workspace ws;
    for (std::uint64_t j = begin; j < end; ++j) {
      Rng rng = Rng::substream(seed, j);
      sim.simulate(scheme, sim.draw_increments(rng), out[j], ws);
      out[j].seed = seed;
      out[j].path_index = j;
    }
  });
  return out;
}

std::string dump_paths_csv(const std::vector<PathBundle>& paths) {
  std::ostringstream os;
  os.precision(17);
  os << "path,scheme,rate,grid_point,time,log_rate\n";
  for (const auto& p : paths) {
    for (Eigen::Index r = 0; r < p.log_rates.rows(); ++r)
      for (Eigen::Index k = 0; k < p.log_rates.cols(); ++k)
        os << p.path_index << ',' << to_string(p.scheme) << ',' << r + 1 << ',' << k << ','
           << p.grid->times(k) << ',' << p.log_rates(r, k) << '\n';
  }
  return os.str();
}

}  // namespace levylmm
