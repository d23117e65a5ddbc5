#pragma once

#include <cstdint>

#include "vaidya/cutting_plane.hpp"
#include "vaidya/stochastic.hpp"

namespace vaidya {

struct SgdConfig {
  double step_size = 0.1;
  long long batch = 128;
  long long iterations = 300;
  double radius = 10.0;
  std::uint64_t seed = 0;
  unsigned threads = 1;

  void validate() const;
};

/// XOR-ed into the SGD seed so its batches never reuse Vaidya's sample seeds.
inline constexpr std::uint64_t kSgdSeedTag = 0x27d4eb2f165667c5ULL;

/// Euclidean projection onto the ball of radius R about the origin.
Vector project_ball(const Vector& x, double R);

/// Projected minibatch SGD from x0 = 0 with a constant step. Every iterate is
/// recorded with its value estimate; best_point is the iterate with the
/// lowest estimate, last_point the final iterate.
RunResult run_sgd(const StochasticOracle& oracle, const SgdConfig& cfg,
                  const ValueEstimator& estimate);

}  // namespace vaidya
