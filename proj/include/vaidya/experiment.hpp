#pragma once

#include <cstdint>
#include <filesystem>
#include <functional>
#include <iosfwd>
#include <optional>
#include <string>
#include <string_view>

#include "vaidya/geometry.hpp"

namespace vaidya {

// Experiment description read from one JSON document. Optional fields left
// unset are resolved at run time (presets, planning formulas, defaults that
// depend on the problem type) and reported under "resolved" in summary.json.

struct ProblemSection {
  std::string type = "synthetic";  // synthetic | logistic
  std::optional<double> radius;    // 1 for synthetic, 10 for logistic
  std::uint64_t seed = 0;          // problem draw, subsample and split

  // synthetic
  std::string kind = "noisy_quadratic";  // noisy_quadratic | noisy_max_affine
  int n = 4;
  double sigma = 1.0;
  int pieces = 0;  // max-affine; 0 means n + 1

  // logistic
  std::string csv;
  bool header = false;
  int label_column = -1;
  std::optional<double> positive_class = 2.0;
  long long subsample = 20000;  // 0 keeps every row
  double test_frac = 0.2;
  std::string scaling = "standardize";  // standardize | minmax | none
  bool synthetic_if_missing = true;
  double noise_level = 1.0;

  bool operator==(const ProblemSection&) const = default;
};

struct VaidyaSection {
  std::string preset = "practical";  // practical | theory
  std::optional<double> eta;
  std::optional<double> gamma;
  double newton_tol = 1e-8;
  int newton_max = 200;
  std::optional<long long> iterations;
  std::optional<long long> batch;
  std::optional<double> init_half_width;  // default 1.05 R

  bool operator==(const VaidyaSection&) const = default;
};

struct SgdSection {
  double step_size = 0.1;
  long long batch = 128;
  std::optional<long long> iterations;  // default: Vaidya's iteration count

  bool operator==(const SgdSection&) const = default;
};

struct PlanningSection {
  std::optional<double> eps;
  std::optional<double> beta;
  std::optional<double> sigma;  // synthetic default: problem.sigma
  std::optional<double> B;      // synthetic default: the problem's range bound
  std::optional<double> rho;    // default: the ball radius

  bool operator==(const PlanningSection&) const = default;
};

struct ExperimentConfig {
  ProblemSection problem;
  std::string solver = "both";  // vaidya | sgd | both
  VaidyaSection vaidya;
  SgdSection sgd;
  PlanningSection planning;
  long long value_batch = 128;
  long long max_samples = 0;  // 0: unlimited
  std::uint64_t seed = 0;
  unsigned threads = 1;
  std::string output_dir = "out";

  bool operator==(const ExperimentConfig&) const = default;
};

/// Throws Error(ConfigError) naming the offending field for unknown keys,
/// wrong types and out-of-range values.
ExperimentConfig parse_config(std::string_view json_text);
ExperimentConfig load_config(const std::filesystem::path& path);
void validate_config(const ExperimentConfig& cfg);
/// Inverse of parse_config; unset optionals are omitted.
std::string config_to_json(const ExperimentConfig& cfg);

/// Command-line overrides; unset fields keep the config's value.
struct RunOptions {
  std::filesystem::path config;
  std::optional<unsigned> threads;
  std::optional<std::string> out;
  std::optional<long long> max_samples;
};

/// Exit codes of cmd_run: 0 ok, 2 config, 3 data, 4 solver failure.
int cmd_run(const RunOptions& opts, std::ostream& out, std::ostream& err);

struct PlanInput {
  long long n = 0;
  double eps = 0.0;
  double beta = 0.0;
  double sigma = 0.0;
  double R = 0.0;
  double rho = 0.0;
  double B = 0.0;
  double gamma = 0.0;
  std::optional<long long> N;  // overrides iterations_needed
};

struct Plan {
  long long N = 0;
  long long r = 0;
  double delta = 0.0;
  long long oracle_calls = 0;
};

/// Throws InvalidArgument on bad input.
Plan compute_plan(const PlanInput& in);
/// Prints the plan; exit 2 on invalid arguments.
int cmd_plan(const PlanInput& in, std::ostream& out, std::ostream& err);

struct SelftestHooks {
  /// Replaces volumetric_gradient in the gradient check.
  std::function<Vector(const Polytope&, const Vector&)> gradient;
};

/// One "<name> PASS|FAIL" line per check; exit 1 on any failure.
int cmd_selftest(std::ostream& out, const SelftestHooks& hooks = {});

int cmd_dataset_info(std::ostream& out);

}  // namespace vaidya
