#pragma once

#include <cstdint>
#include <functional>
#include <memory>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "levylmm/drift_engine.hpp"
#include "levylmm/levy_driver.hpp"
#include "levylmm/rng.hpp"
#include "levylmm/term_structure.hpp"

namespace levylmm {

/// Time grid from 0 to T_N with every tenor date on-grid and equal substeps
/// inside each accrual period.
struct SimulationGrid {
  Eigen::VectorXd times;
  std::vector<Eigen::Index> step_interval;  // accrual interval of step k
  std::vector<Eigen::Index> tenor_point;    // grid index of T_a, a = 0..N
  int substeps_per_accrual = 1;

  Eigen::Index steps() const { return times.size() - 1; }
  double dt(Eigen::Index k) const { return times(k + 1) - times(k); }
};

SimulationGrid build_grid(const TenorStructure& tenor, int substeps);

enum class Scheme { FullSde, FrozenDrift, StrongTaylor };

std::string to_string(Scheme s);
Scheme scheme_from_string(const std::string& s);

/// One simulated path of all log-rates under the terminal measure.
struct PathBundle {
  Scheme scheme = Scheme::FullSde;
  std::shared_ptr<const SimulationGrid> grid;
  Eigen::MatrixXd log_rates;  // row i-1 is rate i, column k is grid point k
  std::uint64_t seed = 0;
  std::uint64_t path_index = 0;
  bool valid = true;

  /// L(T_i, T_l) for l >= i, read at the grid point of T_i.
  double fixing(Eigen::Index i, Eigen::Index l) const {
    return std::exp(log_rates(l - 1, grid->tenor_point[i]));
  }
};

/// Simulates paths of one market setup on one grid. The drift tables and the
/// frozen-drift table are built once; simulate() is const and may be called
/// concurrently with separate workspaces.
class PathSimulator {
 public:
  struct Workspace {
    DriftWorkspace drift_ws;
    Eigen::VectorXd state;
    Eigen::VectorXd drift;
    Eigen::MatrixXd taylor_state;
  };

  PathSimulator(const MarketSetup& setup, SimulationGrid grid,
                DriftMethod method = DriftMethod::CumulantExpansion);

  const MarketSetup& setup() const { return engine_.setup(); }
  const SimulationGrid& grid() const { return *grid_; }
  const std::shared_ptr<const SimulationGrid>& grid_ptr() const { return grid_; }
  const DriftEngine& engine() const { return engine_; }

  /// b(t, T_i; X(0)) per (rate, accrual interval).
  const Eigen::MatrixXd& frozen_drift() const { return frozen_drift_; }

  DriverIncrements draw_increments(Rng& rng) const;

  /// Runs `scheme` on given driver increments, writing into `out`.
  void simulate(Scheme scheme, const DriverIncrements& inc, PathBundle& out, Workspace& ws) const;

  PathBundle simulate(Scheme scheme, const DriverIncrements& inc) const;

 private:
  void run_frozen(const DriverIncrements& inc, Eigen::MatrixXd& log_rates) const;
  void run_with_state_drift(const DriverIncrements& inc, const Eigen::MatrixXd* drift_source,
                            Eigen::MatrixXd& log_rates, Workspace& ws) const;

  DriftEngine engine_;
  std::shared_ptr<const SimulationGrid> grid_;
  DriftMethod method_;
  Eigen::VectorXd z0_;
  Eigen::MatrixXd frozen_drift_;  // N x intervals
};

/// Simulates one path on its own substream.
PathBundle simulate_path(Scheme scheme, const SimulationGrid& grid, const MarketSetup& setup, Rng& rng);

/// Runs fn(block, begin, end) over fixed blocks of path indices on `threads`
/// workers. Block boundaries depend only on n_paths and block_size.
void for_each_block(std::uint64_t n_paths, std::uint64_t block_size, int threads,
                    const std::function<void(std::uint64_t, std::uint64_t, std::uint64_t)>& fn);

inline constexpr std::uint64_t kPathBlock = 2048;

/// Path j uses Rng::substream(seed, j); the result does not depend on `threads`.
std::vector<PathBundle> simulate_ensemble(Scheme scheme, const SimulationGrid& grid,
                                          const MarketSetup& setup, std::uint64_t n_paths,
                                          std::uint64_t seed, int threads = 1);

/// Rows "path,rate,grid_point,time,log_rate" for debugging.
std::string dump_paths_csv(const std::vector<PathBundle>& paths);

}  // namespace levylmm
