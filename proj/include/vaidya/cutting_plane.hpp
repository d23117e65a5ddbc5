#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "vaidya/geometry.hpp"
#include "vaidya/stochastic.hpp"

namespace vaidya {

struct VaidyaConfig {
  double eta = 40.0;
  double gamma = 0.04;
  double newton_tol = 1e-8;
  int newton_max = 200;
  long long max_iters = 300;
  /// Stop once the oracle has consumed this many samples; 0 disables.
  long long sample_budget = 0;
  std::uint64_t seed = 0;

  /// eta = 1e-4, gamma = 1e-7: satisfies eta <= 1e-4, gamma <= 1e-3 eta.
  static VaidyaConfig theory();
  /// eta = 40, gamma = 0.04: same ratio eta / gamma = 1e3 as the theory
  /// preset, with a new cut entering at leverage sqrt(eta gamma) / 2 ~ 0.63.
  static VaidyaConfig practical();

  /// Throws InvalidArgument unless eta, gamma, newton_tol > 0, gamma <= eta,
  /// newton_max >= 1 and max_iters >= 0.
  void validate() const;
};

enum class CutKind { SeparationCut, ObjectiveCut };

struct CutResponse {
  CutKind kind = CutKind::ObjectiveCut;
  Vector c;
  std::optional<double> value_estimate;
};

/// Convex feasible set Q with membership and separation.
class FeasibleSet {
 public:
  virtual ~FeasibleSet() = default;
  virtual bool contains(const Vector& x) const = 0;
  /// For x outside Q, returns c with c^T (q - x) >= 0 for every q in Q.
  virtual Vector separate(const Vector& x) const = 0;
};

/// Oracle queried by the cutting-plane loop at each center.
class CutOracle {
 public:
  virtual ~CutOracle() = default;
  virtual std::size_t dimension() const = 0;
  virtual bool contains(const Vector& x) const = 0;
  /// Separation cut when x is outside Q, otherwise c in -(delta-)subdifferential of f at x.
  /// `query_index` keys the random stream of the call.
  virtual CutResponse cut(const Vector& x, std::uint64_t query_index) = 0;
  /// Cumulative number of stochastic samples consumed.
  virtual long long samples_used() const { return 0; }
};

/// Estimates f at a feasible iterate; `query_index` keys its random stream.
using ValueEstimator = std::function<double(const Vector& x, std::uint64_t query_index)>;

/// Objective cuts from a minibatched stochastic oracle over a feasible set.
/// Query k averages r samples on the seed stream mix_seed(seed, k).
class MinibatchCutOracle final : public CutOracle {
 public:
  MinibatchCutOracle(const StochasticOracle& oracle, const FeasibleSet& set, long long r,
                     std::uint64_t seed, unsigned threads = 1);

  std::size_t dimension() const override { return oracle_.dimension(); }
  bool contains(const Vector& x) const override { return set_.contains(x); }
  CutResponse cut(const Vector& x, std::uint64_t query_index) override;
  long long samples_used() const override { return samples_; }

 private:
  const StochasticOracle& oracle_;
  const FeasibleSet& set_;
  long long r_;
  std::uint64_t seed_;
  unsigned threads_;
  long long samples_ = 0;
};

/// Deterministic oracle built from an exact subgradient function.
class ExactCutOracle final : public CutOracle {
 public:
  using Subgradient = std::function<Vector(const Vector&)>;
  ExactCutOracle(std::size_t n, const FeasibleSet& set, Subgradient subgradient);

  std::size_t dimension() const override { return n_; }
  bool contains(const Vector& x) const override { return set_.contains(x); }
  CutResponse cut(const Vector& x, std::uint64_t query_index) override;

 private:
  std::size_t n_;
  const FeasibleSet& set_;
  Subgradient subgradient_;
};

enum class Action { Drop, AddSeparation, AddObjective, Optimal, SgdStep };

std::string_view action_name(Action a);

struct TraceRecord {
  long long iter = 0;
  long long m = 0;  // rows before the action; 0 for SGD steps
  Action action = Action::AddObjective;
  long long dropped_row = -1;
  std::optional<double> min_sigma;
  Vector x;
  std::optional<double> value_estimate;
  long long cum_samples = 0;
  double wall_time = 0.0;
};

struct RunTrace {
  std::vector<TraceRecord> records;
};

enum class StopReason {
  MaxIterations,
  /// An objective cut was exactly zero: the center minimizes f over Q.
  Optimal,
  /// Centering failed because the localizer shrank below double resolution.
  PrecisionLimit,
  SampleBudget,
};

std::string_view stop_reason_name(StopReason r);

struct RunResult {
  StopReason stop_reason = StopReason::MaxIterations;
  Vector best_point;
  double best_value_estimate = 0.0;
  Vector last_point;
  RunTrace trace;
  long long total_oracle_calls = 0;
  long long total_samples = 0;
};

/// Depth of the cut {c^T x >= beta} through the current center: solves
/// c^T H^{-1} c / (c^T x - beta)^2 = sqrt(eta gamma) / 2 for the root with
/// c^T x - beta > 0.
double choose_beta(const BarrierState& state, const Vector& c, double eta, double gamma);

struct StepOutcome {
  Polytope polytope;
  Action action;
  long long dropped_row = -1;
  std::optional<CutResponse> response;
};

/// One iteration at the (approximate) volumetric center `state` of P:
/// drops the row of least leverage if it is below gamma, otherwise queries
/// the oracle and appends its cut.
StepOutcome vaidya_step(const Polytope& P, const BarrierState& state, CutOracle& oracle,
                        const VaidyaConfig& cfg, std::uint64_t query_index);

/// Runs cfg.max_iters iterations from `init` starting at the interior point x0,
/// tracking the feasible iterate with the lowest value estimate.
RunResult run_vaidya(CutOracle& oracle, const Polytope& init, const Vector& x0,
                     const VaidyaConfig& cfg, const ValueEstimator& estimate);
/// Same, with x0 at the origin.
RunResult run_vaidya(CutOracle& oracle, const Polytope& init, const VaidyaConfig& cfg,
                     const ValueEstimator& estimate);

/// ceil((2n/gamma) ln(n^1.5 B R / (gamma rho eps)) + (1/gamma) ln pi)
long long iterations_needed(long long n, double gamma, double B, double R, double rho,
                            double eps);

/// (n^1.5 B R / (gamma rho)) exp((ln pi - gamma N) / (2n)) + delta
double theorem1_bound(long long n, double gamma, double B, double R, double rho, long long N,
                      double delta);

}  // namespace vaidya
