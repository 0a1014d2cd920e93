#pragma once

#include <cstdint>
#include <random>

namespace levylmm {

/// Seeded generator for a single path. Substream j of a run is fully determined
/// by (seed, j), so results never depend on how paths are spread across threads.
///
/// Not thread-safe: one instance per path.
class Rng {
 public:
  using engine_type = std::mt19937_64;

  explicit Rng(std::uint64_t seed) : Rng(seed, 0) {}
  Rng(std::uint64_t seed, std::uint64_t stream);

  static Rng substream(std::uint64_t seed, std::uint64_t path_index) {
    return Rng(seed, path_index);
  }

  double uniform() { return uniform_(engine_); }
  double normal() { return normal_(engine_); }

  engine_type& engine() { return engine_; }

 private:
  engine_type engine_;
  std::uniform_real_distribution<double> uniform_{0.0, 1.0};
  std::normal_distribution<double> normal_{0.0, 1.0};
};

}  // namespace levylmm
