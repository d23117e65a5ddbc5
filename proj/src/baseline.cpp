#include "vaidya/baseline.hpp"

#include <chrono>
#include <limits>

#include "vaidya/error.hpp"

namespace vaidya {

void SgdConfig::validate() const {
  // A zero step is allowed; it freezes the iterate at x0.
  if (!(step_size >= 0.0)) throw Error(ErrorKind::InvalidArgument, "step_size must be >= 0");
  if (batch < 1) throw Error(ErrorKind::InvalidBatchSize, "SGD batch must be >= 1");
  if (iterations < 0) throw Error(ErrorKind::InvalidArgument, "iterations must be >= 0");
  if (!(radius > 0.0)) throw Error(ErrorKind::InvalidArgument, "radius must be > 0");
}

Vector project_ball(const Vector& x, double R) {
  if (!(R > 0.0)) throw Error(ErrorKind::InvalidArgument, "radius must be > 0");
  const double nrm = x.norm();
  if (nrm <= R) return x;
  return (R / nrm) * x;
}

RunResult run_sgd(const StochasticOracle& oracle, const SgdConfig& cfg,
                  const ValueEstimator& estimate) {
  cfg.validate();
  const auto t0 = std::chrono::steady_clock::now();
  const std::uint64_t stream = cfg.seed ^ kSgdSeedTag;
  RunResult result;
  result.best_value_estimate = std::numeric_limits<double>::infinity();

  Vector x = Vector::Zero(static_cast<Eigen::Index>(oracle.dimension()));
  result.best_point = x;
  long long samples = 0;
  for (long long k = 1; k <= cfg.iterations; ++k) {
    const BatchMean g =
        minibatch_subgradient(oracle, x, cfg.batch, mix_seed(stream, static_cast<std::uint64_t>(k)),
                              cfg.threads);
    samples += cfg.batch;
    ++result.total_oracle_calls;
    x = project_ball(x - cfg.step_size * g.grad_mean, cfg.radius);

    TraceRecord rec;
    rec.iter = k;
    rec.action = Action::SgdStep;
    rec.x = x;
    const double v = estimate(x, static_cast<std::uint64_t>(k));
    rec.value_estimate = v;
    if (v < result.best_value_estimate) {
      result.best_value_estimate = v;
      result.best_point = x;
    }
    rec.cum_samples = samples;
    rec.wall_time = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    result.trace.records.push_back(std::move(rec));
  }
  result.last_point = x;
  result.total_samples = samples;
  return result;
}

}  // namespace vaidya
