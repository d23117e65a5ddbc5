#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <limits>
#include <span>

#include <Eigen/Dense>

namespace vaidya {

using Vector = Eigen::VectorXd;

/// One realization xi of a stochastic objective f(x, xi).
///
/// Implementations must be pure in (x, seed): the same pair always yields
/// the same value and subgradient, so batches can be evaluated in any order
/// or concurrently.
class StochasticOracle {
 public:
  virtual ~StochasticOracle() = default;

  virtual std::size_t dimension() const = 0;

  /// Writes the subgradient of f(., xi_seed) at x into grad and returns f(x, xi_seed).
  virtual double sample(const Vector& x, std::uint64_t seed, Eigen::Ref<Vector> grad) const = 0;

  /// Declared sub-Gaussian noise level of the subgradient.
  virtual double noise_level() const = 0;
};

/// splitmix64 finalizer.
constexpr std::uint64_t splitmix64(std::uint64_t z) noexcept {
  z += 0x9e3779b97f4a7c15ULL;
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

/// Counter-based seed for sample `index` of the batch keyed by `base`.
constexpr std::uint64_t mix_seed(std::uint64_t base, std::uint64_t index) noexcept {
  return splitmix64(splitmix64(base) ^ (index * 0xd1b54a32d192ed03ULL));
}

/// XOR-ed into the base seed of value-estimation batches so they never
/// share sample seeds with subgradient batches.
inline constexpr std::uint64_t kValueSeedTag = 0x5bd1e9955bd1e995ULL;

/// Small counter-seeded generator satisfying UniformRandomBitGenerator;
/// cheap enough to construct once per sample.
class SplitMixEngine {
 public:
  using result_type = std::uint64_t;
  explicit SplitMixEngine(std::uint64_t seed) noexcept : state_(seed) {}
  static constexpr result_type min() { return 0; }
  static constexpr result_type max() { return std::numeric_limits<result_type>::max(); }
  result_type operator()() noexcept {
    state_ += 0x9e3779b97f4a7c15ULL;
    std::uint64_t z = state_;
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
  }

 private:
  std::uint64_t state_;
};

struct BatchMean {
  double value_mean = 0.0;
  Vector grad_mean;
};

/// Averages r independent samples drawn with seeds mix_seed(base_seed, l),
/// l = 1..r. Samples may be evaluated on `threads` workers; the reduction
/// always runs in index order, so the result does not depend on threads.
BatchMean minibatch_subgradient(const StochasticOracle& oracle, const Vector& x, long long r,
                                std::uint64_t base_seed, unsigned threads = 1);

/// Monte Carlo estimate of f(x) from the value channel, on the seed domain
/// mix_seed(base_seed ^ kValueSeedTag, l).
double estimate_value(const StochasticOracle& oracle, const Vector& x, long long r,
                      std::uint64_t base_seed, unsigned threads = 1);

struct DeltaCertificate {
  long long r = 0;
  double beta = 0.0;
  double delta = 0.0;
  long long N = 0;
};

/// Smallest r with (sqrt2 + sqrt(6 ln(N/beta))) sigma R / sqrt(r) <= eps / 2.
long long batch_size(double eps, double beta, double sigma, double R, long long N);

/// delta = (sqrt2 + sqrt(6 ln(N/beta))) sigma R / sqrt(r); beta is the overall
/// confidence, split over the N calls by the union bound.
DeltaCertificate delta_of_batch(long long r, double beta, double sigma, double R, long long N);

/// Checks f(y) >= f(x) + <g, y - x> - delta at every probe point y.
bool check_delta_subgradient(const std::function<double(const Vector&)>& f, const Vector& x,
                             const Vector& g, double delta, std::span<const Vector> probes);

}  // namespace vaidya
