#include "vaidya/stochastic.hpp"

#include <algorithm>
#include <cmath>
#include <string>
#include <thread>
#include <vector>

#include "vaidya/error.hpp"

namespace vaidya {

namespace {

// Evaluates all r samples into per-index slots. Column l-1 of grads holds
// sample l.
void evaluate_samples(const StochasticOracle& oracle, const Vector& x, long long r,
                      std::uint64_t base_seed, unsigned threads, Vector& values,
                      Eigen::MatrixXd* grads) {
  const auto n = static_cast<Eigen::Index>(oracle.dimension());
  values.resize(r);
  auto run_range = [&](long long begin, long long end) {
    Vector local(n);
    for (long long l = begin; l < end; ++l) {
      const std::uint64_t seed = mix_seed(base_seed, static_cast<std::uint64_t>(l + 1));
      if (grads) {
        values[l] = oracle.sample(x, seed, grads->col(l));
      } else {
        values[l] = oracle.sample(x, seed, local);
      }
    }
  };

  const unsigned workers =
      static_cast<unsigned>(std::clamp<long long>(threads == 0 ? 1 : threads, 1, r));
  if (workers == 1) {
    run_range(0, r);
    return;
  }
  std::vector<std::jthread> pool;
  pool.reserve(workers);
  const long long chunk = (r + workers - 1) / workers;
  for (unsigned w = 0; w < workers; ++w) {
    const long long begin = static_cast<long long>(w) * chunk;
    const long long end = std::min(r, begin + chunk);
    if (begin >= end) break;
    pool.emplace_back(run_range, begin, end);
  }
}

void require_batch(long long r) {
  if (r <= 0) {
    throw Error(ErrorKind::InvalidBatchSize, "batch size must be >= 1, got " + std::to_string(r));
  }
}

double delta_factor(double beta, long long N) {
  return std::sqrt(2.0) + std::sqrt(6.0 * std::log(static_cast<double>(N) / beta));
}

}  // namespace

BatchMean minibatch_subgradient(const StochasticOracle& oracle, const Vector& x, long long r,
                                std::uint64_t base_seed, unsigned threads) {
  require_batch(r);
  const auto n = static_cast<Eigen::Index>(oracle.dimension());
  if (x.size() != n) throw Error(ErrorKind::DimensionMismatch, "query point dimension mismatch");
  Vector values;
  Eigen::MatrixXd grads(n, r);
  evaluate_samples(oracle, x, r, base_seed, threads, values, &grads);

  BatchMean out;
  double vsum = 0.0;
  Vector gsum = Vector::Zero(n);
  for (long long l = 0; l < r; ++l) {
    vsum += values[l];
    gsum += grads.col(l);
  }
  out.value_mean = vsum / static_cast<double>(r);
  out.grad_mean = gsum / static_cast<double>(r);
  return out;
}

double estimate_value(const StochasticOracle& oracle, const Vector& x, long long r,
                      std::uint64_t base_seed, unsigned threads) {
  require_batch(r);
  if (x.size() != static_cast<Eigen::Index>(oracle.dimension())) {
    throw Error(ErrorKind::DimensionMismatch, "query point dimension mismatch");
  }
  Vector values;
  evaluate_samples(oracle, x, r, base_seed ^ kValueSeedTag, threads, values, nullptr);
  double vsum = 0.0;
  for (long long l = 0; l < r; ++l) vsum += values[l];
  return vsum / static_cast<double>(r);
}

long long batch_size(double eps, double beta, double sigma, double R, long long N) {
  if (!(eps > 0.0) || !(sigma > 0.0) || !(R > 0.0) || !(beta > 0.0 && beta < 1.0) || N < 1) {
    throw Error(ErrorKind::InvalidArgument,
                "batch_size needs eps, sigma, R > 0, beta in (0,1), N >= 1");
  }
  const double k = delta_factor(beta, N);
  const double r = 4.0 * sigma * sigma * R * R * k * k / (eps * eps);
  return static_cast<long long>(std::ceil(r));
}

DeltaCertificate delta_of_batch(long long r, double beta, double sigma, double R, long long N) {
  if (r < 1 || !(beta > 0.0 && beta < 1.0) || !(sigma >= 0.0) || !(R > 0.0) || N < 1) {
    throw Error(ErrorKind::InvalidArgument,
                "delta_of_batch needs r >= 1, beta in (0,1), sigma >= 0, R > 0, N >= 1");
  }
  DeltaCertificate cert;
  cert.r = r;
  cert.beta = beta;
  cert.N = N;
  cert.delta = delta_factor(beta, N) * sigma * R / std::sqrt(static_cast<double>(r));
  return cert;
}

bool check_delta_subgradient(const std::function<double(const Vector&)>& f, const Vector& x,
                             const Vector& g, double delta, std::span<const Vector> probes) {
  const double fx = f(x);
  return std::all_of(probes.begin(), probes.end(), [&](const Vector& y) {
    return f(y) >= fx + g.dot(y - x) - delta;
  });
}

}  // namespace vaidya
