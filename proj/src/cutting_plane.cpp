#include "vaidya/cutting_plane.hpp"

#include <chrono>
#include <cmath>
#include <limits>
#include <numbers>
#include <utility>

#include "vaidya/error.hpp"

namespace vaidya {

VaidyaConfig VaidyaConfig::theory() {
  VaidyaConfig cfg;
  cfg.eta = 1e-4;
  cfg.gamma = 1e-7;
  return cfg;
}

VaidyaConfig VaidyaConfig::practical() {
  VaidyaConfig cfg;
  cfg.eta = 40.0;
  cfg.gamma = 0.04;
  return cfg;
}

void VaidyaConfig::validate() const {
  if (!(eta > 0.0)) throw Error(ErrorKind::InvalidArgument, "eta must be > 0");
  if (!(gamma > 0.0)) throw Error(ErrorKind::InvalidArgument, "gamma must be > 0");
  if (gamma > eta) throw Error(ErrorKind::InvalidArgument, "gamma must not exceed eta");
  if (!(newton_tol > 0.0)) throw Error(ErrorKind::InvalidArgument, "newton_tol must be > 0");
  if (newton_max < 1) throw Error(ErrorKind::InvalidArgument, "newton_max must be >= 1");
  if (max_iters < 0) throw Error(ErrorKind::InvalidArgument, "max_iters must be >= 0");
  if (sample_budget < 0) throw Error(ErrorKind::InvalidArgument, "sample_budget must be >= 0");
}

MinibatchCutOracle::MinibatchCutOracle(const StochasticOracle& oracle, const FeasibleSet& set,
                                       long long r, std::uint64_t seed, unsigned threads)
    : oracle_(oracle), set_(set), r_(r), seed_(seed), threads_(threads) {
  if (r < 1) throw Error(ErrorKind::InvalidBatchSize, "batch size must be >= 1");
}

CutResponse MinibatchCutOracle::cut(const Vector& x, std::uint64_t query_index) {
  CutResponse resp;
  if (!set_.contains(x)) {
    resp.kind = CutKind::SeparationCut;
    resp.c = set_.separate(x);
    return resp;
  }
  const BatchMean batch = minibatch_subgradient(oracle_, x, r_, mix_seed(seed_, query_index),
                                                threads_);
  samples_ += r_;
  resp.kind = CutKind::ObjectiveCut;
  resp.c = -batch.grad_mean;
  return resp;
}

ExactCutOracle::ExactCutOracle(std::size_t n, const FeasibleSet& set, Subgradient subgradient)
    : n_(n), set_(set), subgradient_(std::move(subgradient)) {}

CutResponse ExactCutOracle::cut(const Vector& x, std::uint64_t /*query_index*/) {
  CutResponse resp;
  if (!set_.contains(x)) {
    resp.kind = CutKind::SeparationCut;
    resp.c = set_.separate(x);
  } else {
    resp.kind = CutKind::ObjectiveCut;
    resp.c = -subgradient_(x);
  }
  return resp;
}

std::string_view action_name(Action a) {
  switch (a) {
    case Action::Drop: return "drop";
    case Action::AddSeparation: return "add_sep";
    case Action::AddObjective: return "add_obj";
    case Action::Optimal: return "optimal";
    case Action::SgdStep: return "sgd";
  }
  return "unknown";
}

double choose_beta(const BarrierState& state, const Vector& c, double eta, double gamma) {
  if (c.size() != state.x.size()) {
    throw Error(ErrorKind::DimensionMismatch, "cut vector dimension mismatch");
  }
  if (c.squaredNorm() == 0.0) throw Error(ErrorKind::ZeroCutVector, "cut vector is zero");
  if (!(eta > 0.0) || !(gamma > 0.0)) {
    throw Error(ErrorKind::InvalidArgument, "eta and gamma must be > 0");
  }
  const double q = c.dot(state.solve(c));
  if (!(q > 0.0) || !std::isfinite(q)) {
    throw Error(ErrorKind::SingularHessian, "c^T H^{-1} c is not positive");
  }
  return c.dot(state.x) - std::sqrt(2.0 * q / std::sqrt(eta * gamma));
}

StepOutcome vaidya_step(const Polytope& P, const BarrierState& state, CutOracle& oracle,
                        const VaidyaConfig& cfg, std::uint64_t query_index) {
  const Eigen::Index i = state.argmin_sigma();
  if (state.sigma[i] < cfg.gamma) {
    return {drop_constraint(P, static_cast<std::size_t>(i)), Action::Drop, i, std::nullopt};
  }
  CutResponse resp = oracle.cut(state.x, query_index);
  if (resp.c.squaredNorm() == 0.0) {
    if (resp.kind == CutKind::SeparationCut) {
      throw Error(ErrorKind::ZeroCutVector, "separation oracle returned a zero vector");
    }
    // 0 is a subgradient: the center already minimizes f over Q.
    return {P, Action::Optimal, -1, std::move(resp)};
  }
  const double beta = choose_beta(state, resp.c, cfg.eta, cfg.gamma);
  const Action action =
      resp.kind == CutKind::SeparationCut ? Action::AddSeparation : Action::AddObjective;
  return {add_constraint(P, resp.c, beta), action, -1, std::move(resp)};
}

namespace {

// True when some slack at x is within a few thousand ulps of the magnitudes
// it is computed from, i.e. the localizer is no longer resolvable in doubles.
bool at_precision_limit(const Polytope& P, const Vector& x) {
  const Vector s = slacks(P, x);
  const Vector scale = (P.A().cwiseAbs() * x.cwiseAbs()).array() + P.b().array().abs();
  for (Eigen::Index i = 0; i < s.size(); ++i) {
    if (s[i] <= 1e-10 * (1.0 + scale[i])) return true;
  }
  return false;
}

}  // namespace

std::string_view stop_reason_name(StopReason r) {
  switch (r) {
    case StopReason::MaxIterations: return "max_iters";
    case StopReason::Optimal: return "optimal";
    case StopReason::PrecisionLimit: return "precision_limit";
    case StopReason::SampleBudget: return "sample_budget";
  }
  return "unknown";
}

RunResult run_vaidya(CutOracle& oracle, const Polytope& init, const Vector& x0,
                     const VaidyaConfig& cfg, const ValueEstimator& estimate) {
  cfg.validate();
  if (init.dim() != oracle.dimension()) {
    throw Error(ErrorKind::DimensionMismatch, "initial polytope and oracle dimensions differ");
  }
  if (!is_interior(init, x0)) {
    throw Error(ErrorKind::NonInteriorPoint, "start point is not interior to the initial polytope");
  }
  const auto t0 = std::chrono::steady_clock::now();
  RunResult result;
  result.best_value_estimate = std::numeric_limits<double>::infinity();

  Polytope P = init;
  Vector x = x0;
  bool have_feasible = false;

  result.stop_reason = StopReason::MaxIterations;
  for (long long k = 1; k <= cfg.max_iters; ++k) {
    if (cfg.sample_budget > 0 && oracle.samples_used() >= cfg.sample_budget) {
      result.stop_reason = StopReason::SampleBudget;
      break;
    }
    BarrierState state;
    try {
      state = volumetric_center(P, x, cfg.newton_tol, cfg.newton_max);
    } catch (const Error& e) {
      // A cut whose depth is below one ulp of c^T x leaves a zero slack at the
      // old center; that, a singular H, or a stalled Newton loop near such a
      // slack all mean the localizer is exhausted.
      const bool numeric = e.kind() == ErrorKind::CenteringFailed ||
                           e.kind() == ErrorKind::NonInteriorPoint ||
                           e.kind() == ErrorKind::SingularHessian;
      if (!numeric || !at_precision_limit(P, x)) throw;
      result.stop_reason = StopReason::PrecisionLimit;
      break;
    }
    x = state.x;

    TraceRecord rec;
    rec.iter = k;
    rec.m = static_cast<long long>(P.rows());
    rec.min_sigma = state.min_sigma();
    rec.x = x;

    StepOutcome step = vaidya_step(P, state, oracle, cfg, static_cast<std::uint64_t>(k));
    rec.action = step.action;
    rec.dropped_row = step.dropped_row;
    if (step.response) {
      ++result.total_oracle_calls;
      if (step.response->kind == CutKind::ObjectiveCut) {
        const double v = estimate(x, static_cast<std::uint64_t>(k));
        step.response->value_estimate = v;
        rec.value_estimate = v;
        if (!have_feasible || v < result.best_value_estimate) {
          result.best_value_estimate = v;
          result.best_point = x;
          have_feasible = true;
        }
      }
    }
    rec.cum_samples = oracle.samples_used();
    rec.wall_time = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    result.trace.records.push_back(std::move(rec));

    if (step.action == Action::Optimal) {
      result.stop_reason = StopReason::Optimal;
      break;
    }
    P = std::move(step.polytope);
  }

  result.last_point = x;
  result.total_samples = oracle.samples_used();
  if (!have_feasible) {
    throw Error(ErrorKind::NoFeasibleIterate, "no iterate fell inside the feasible set");
  }
  return result;
}

RunResult run_vaidya(CutOracle& oracle, const Polytope& init, const VaidyaConfig& cfg,
                     const ValueEstimator& estimate) {
  return run_vaidya(oracle, init, Vector::Zero(static_cast<Eigen::Index>(init.dim())), cfg,
                    estimate);
}

long long iterations_needed(long long n, double gamma, double B, double R, double rho,
                            double eps) {
  if (n < 1 || !(gamma > 0.0) || !(B > 0.0) || !(R > 0.0) || !(rho > 0.0) || !(eps > 0.0)) {
    throw Error(ErrorKind::InvalidArgument, "iterations_needed arguments must be positive");
  }
  if (eps > B) throw Error(ErrorKind::InvalidArgument, "eps must not exceed B");
  const long double nn = static_cast<long double>(n);
  const long double g = gamma;
  const long double arg = std::pow(nn, 1.5L) * B * R / (g * rho * eps);
  const long double value =
      2.0L * nn / g * std::log(arg) + std::log(std::numbers::pi_v<long double>) / g;
  return static_cast<long long>(std::ceil(value));
}

double theorem1_bound(long long n, double gamma, double B, double R, double rho, long long N,
                      double delta) {
  if (n < 1 || !(gamma > 0.0) || !(B > 0.0) || !(R > 0.0) || !(rho > 0.0) || N < 0 ||
      !(delta >= 0.0)) {
    throw Error(ErrorKind::InvalidArgument, "theorem1_bound arguments must be positive");
  }
  const double nn = static_cast<double>(n);
  const double scale = std::pow(nn, 1.5) * B * R / (gamma * rho);
  return scale * std::exp((std::log(std::numbers::pi) - gamma * static_cast<double>(N)) /
                          (2.0 * nn)) +
         delta;
}

}  // namespace vaidya
