#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>
#include <mutex>
#include <random>
#include <set>
#include <vector>

#include "test_util.hpp"
#include "vaidya/stochastic.hpp"

using namespace vaidya;

namespace {

// f(x, xi) = |x - c|^2 + sigma <z, x> with z ~ N(0, I) drawn from the seed.
class GaussQuadratic final : public StochasticOracle {
 public:
  GaussQuadratic(Vector c, double sigma) : c_(std::move(c)), sigma_(sigma) {}
  std::size_t dimension() const override { return static_cast<std::size_t>(c_.size()); }
  double noise_level() const override { return sigma_; }
  double sample(const Vector& x, std::uint64_t seed, Eigen::Ref<Vector> grad) const override {
    SplitMixEngine eng(seed);
    std::normal_distribution<double> normal;
    Vector z(c_.size());
    for (Eigen::Index j = 0; j < z.size(); ++j) z[j] = normal(eng);
    grad = 2.0 * (x - c_) + sigma_ * z;
    return (x - c_).squaredNorm() + sigma_ * z.dot(x);
  }

 private:
  Vector c_;
  double sigma_;
};

class SeedLog final : public StochasticOracle {
 public:
  std::size_t dimension() const override { return 1; }
  double noise_level() const override { return 0.0; }
  double sample(const Vector&, std::uint64_t seed, Eigen::Ref<Vector> grad) const override {
    std::lock_guard lock(mu_);
    seeds.insert(seed);
    grad.setZero();
    return static_cast<double>(seed % 97);
  }
  mutable std::set<std::uint64_t> seeds;

 private:
  mutable std::mutex mu_;
};

// Closed-form reference for batch_size in long double.
long long batch_size_ref(long double eps, long double beta, long double sigma, long double R,
                         long double N) {
  const long double inner = std::sqrt(2.0L) + std::sqrt(6.0L * std::log(N / beta));
  return static_cast<long long>(std::ceil(4.0L * sigma * sigma * R * R * inner * inner / (eps * eps)));
}

}  // namespace

TEST_CASE("splitmix64 reference values") {
  // First outputs of the splitmix64 generator seeded with 0.
  CHECK(splitmix64(0) == 0xe220a8397b1dcdafULL);
  SplitMixEngine eng(0);
  CHECK(eng() == 0xe220a8397b1dcdafULL);
  CHECK(eng() == 0x6e789e6aa1b965f4ULL);
  CHECK(mix_seed(7, 1) != mix_seed(7, 2));
  CHECK(mix_seed(7, 1) != mix_seed(8, 1));
}

TEST_CASE("minibatch_subgradient") {
  const Vector c = Vector::LinSpaced(4, -1.0, 1.0);
  const Vector x = Vector::Constant(4, 0.3);

  CHECK(error_kind([&] { minibatch_subgradient(GaussQuadratic(c, 1.0), x, 0, 1); }) ==
        ErrorKind::InvalidBatchSize);

  SUBCASE("zero noise is exact") {
    const GaussQuadratic f(c, 0.0);
    const BatchMean m = minibatch_subgradient(f, x, 37, 5);
    CHECK(m.value_mean == doctest::Approx((x - c).squaredNorm()).epsilon(1e-15));
    CHECK(m.grad_mean.isApprox(2.0 * (x - c), 1e-15));
  }
  SUBCASE("r = 1 is the sample at mix_seed(base, 1)") {
    const GaussQuadratic f(c, 1.0);
    Vector g(4);
    const double v = f.sample(x, mix_seed(99, 1), g);
    const BatchMean m = minibatch_subgradient(f, x, 1, 99);
    CHECK(m.value_mean == v);
    CHECK(m.grad_mean == g);
  }
  SUBCASE("thread count does not change a single bit") {
    const GaussQuadratic f(c, 2.0);
    const BatchMean a = minibatch_subgradient(f, x, 1001, 3, 1);
    for (unsigned t : {2u, 3u, 8u}) {
      const BatchMean b = minibatch_subgradient(f, x, 1001, 3, t);
      CHECK(a.value_mean == b.value_mean);
      CHECK(a.grad_mean == b.grad_mean);
    }
    const BatchMean again = minibatch_subgradient(f, x, 1001, 3, 1);
    CHECK(again.grad_mean == a.grad_mean);
  }
  SUBCASE("variance of the mean is n sigma^2 / r") {
    const double sigma = 1.5;
    const long long r = 10000;
    const GaussQuadratic f(c, sigma);
    double acc = 0.0;
    const int reps = 100;
    for (int k = 0; k < reps; ++k) {
      acc += (minibatch_subgradient(f, x, r, 1000 + k).grad_mean - 2.0 * (x - c)).squaredNorm();
    }
    const double expected = 4.0 * sigma * sigma / r;
    CHECK(std::abs(acc / reps - expected) <= 0.1 * expected);
  }
}

TEST_CASE("estimate_value") {
  const Vector c = Vector::Zero(3);
  const Vector x = Vector::Constant(3, 0.5);
  CHECK(estimate_value(GaussQuadratic(c, 0.0), x, 50, 1) ==
        doctest::Approx(x.squaredNorm()).epsilon(1e-15));

  SUBCASE("standard error is sigma_value / sqrt(r)") {
    const double sigma = 2.0;
    const long long r = 64;
    const GaussQuadratic f(c, sigma);
    const int reps = 1000;
    std::vector<double> est(reps);
    double mean = 0.0;
    for (int k = 0; k < reps; ++k) mean += (est[k] = estimate_value(f, x, r, 500 + k));
    mean /= reps;
    double var = 0.0;
    for (double e : est) var += (e - mean) * (e - mean);
    const double se = std::sqrt(var / (reps - 1));
    const double expected = sigma * x.norm() / std::sqrt(static_cast<double>(r));
    CHECK(std::abs(se - expected) <= 0.15 * expected);
  }

  SUBCASE("value and gradient batches use disjoint seeds") {
    SeedLog grad_log, value_log;
    const Vector y = Vector::Zero(1);
    for (std::uint64_t base = 0; base < 20; ++base) {
      minibatch_subgradient(grad_log, y, 200, base);
      estimate_value(value_log, y, 200, base);
    }
    CHECK(grad_log.seeds.size() == 4000);
    CHECK(value_log.seeds.size() == 4000);
    for (std::uint64_t s : value_log.seeds) CHECK_FALSE(grad_log.seeds.count(s));
  }
}

TEST_CASE("batch_size") {
  CHECK(batch_size(0.1, 0.01, 1.0, 1.0, 100) == 31316);
  CHECK(batch_size(0.1, 0.01, 1.0, 1.0, 100) == batch_size_ref(0.1L, 0.01L, 1, 1, 100));
  for (double eps : {0.05, 0.2, 0.7}) {
    for (long long N : {1LL, 20LL, 5000LL}) {
      CHECK(batch_size(eps, 0.1, 1.3, 2.0, N) == batch_size_ref(eps, 0.1L, 1.3L, 2.0L, N));
    }
  }
  const double ratio = static_cast<double>(batch_size(1e-4, 0.1, 1, 1, 10)) /
                       static_cast<double>(batch_size(2e-4, 0.1, 1, 1, 10));
  CHECK(ratio == doctest::Approx(4.0).epsilon(1e-6));

  CHECK(error_kind([] { batch_size(0.1, 0.1, 0.0, 1.0, 10); }) == ErrorKind::InvalidArgument);
  CHECK(error_kind([] { batch_size(0.1, 1.0, 1.0, 1.0, 10); }) == ErrorKind::InvalidArgument);
  CHECK(error_kind([] { batch_size(0.1, 0.1, 1.0, 1.0, 0); }) == ErrorKind::InvalidArgument);
  CHECK(error_kind([] { batch_size(-0.1, 0.1, 1.0, 1.0, 10); }) == ErrorKind::InvalidArgument);
}

TEST_CASE("delta_of_batch") {
  const DeltaCertificate d = delta_of_batch(100, std::exp(-1.0), 1.0, 1.0, 1);
  CHECK(d.delta == doctest::Approx((std::sqrt(2.0) + std::sqrt(6.0)) / 10.0).epsilon(1e-14));
  CHECK(d.delta == doctest::Approx(0.38637).epsilon(1e-5));
  CHECK(d.r == 100);
  CHECK(d.N == 1);

  for (double eps : {0.01, 0.2, 1.0}) {
    const long long r = batch_size(eps, 0.05, 0.7, 3.0, 40);
    CHECK(delta_of_batch(r, 0.05, 0.7, 3.0, 40).delta <= eps / 2);
    CHECK(delta_of_batch(r - 1, 0.05, 0.7, 3.0, 40).delta > eps / 2);
  }
  CHECK(delta_of_batch(400, 0.1, 1, 1, 5).delta ==
        doctest::Approx(delta_of_batch(100, 0.1, 1, 1, 5).delta / 2).epsilon(1e-14));

  const double base = delta_of_batch(100, 0.1, 1.0, 1.0, 10).delta;
  CHECK(delta_of_batch(101, 0.1, 1.0, 1.0, 10).delta < base);
  CHECK(delta_of_batch(100, 0.1, 1.0, 1.0, 11).delta > base);
  CHECK(delta_of_batch(100, 0.1, 1.1, 1.0, 10).delta > base);
  CHECK(delta_of_batch(100, 0.1, 1.0, 1.1, 10).delta > base);
  CHECK(delta_of_batch(100, 0.09, 1.0, 1.0, 10).delta > base);

  CHECK(error_kind([] { delta_of_batch(0, 0.1, 1, 1, 1); }) == ErrorKind::InvalidArgument);
  CHECK(error_kind([] { delta_of_batch(10, 0.0, 1, 1, 1); }) == ErrorKind::InvalidArgument);
}

TEST_CASE("check_delta_subgradient") {
  std::mt19937_64 rng(8);
  std::normal_distribution<double> normal;
  const double R = 2.0;
  std::vector<Vector> probes;
  for (int k = 0; k < 200; ++k) {
    Vector y(3);
    for (int j = 0; j < 3; ++j) y[j] = normal(rng);
    probes.push_back(R * std::pow(std::uniform_real_distribution<double>()(rng), 1.0 / 3) *
                     y.normalized());
  }
  // f(x) = |x| is 1-Lipschitz.
  const auto f = [](const Vector& y) { return y.norm(); };
  Vector x(3);
  x << 0.4, -0.3, 1.0;
  const Vector g = x.normalized();
  CHECK(check_delta_subgradient(f, x, g, 0.0, probes));

  const double p = 0.05;
  Vector e(3);
  e << 1.0, 2.0, -1.0;
  const Vector gp = g + p * e.normalized();
  CHECK(check_delta_subgradient(f, x, gp, 2.0 * p * R, probes));
  // A grossly wrong direction is caught.
  CHECK_FALSE(check_delta_subgradient(f, x, -g, 0.1, probes));
}
