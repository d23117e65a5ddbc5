#pragma once

#include <cstdint>
#include <filesystem>
#include <functional>
#include <memory>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "vaidya/cutting_plane.hpp"
#include "vaidya/stochastic.hpp"

namespace vaidya {

// ---------------------------------------------------------------------------
// Feasible set

/// Euclidean ball of radius R about the origin; it is its own inner and
/// outer ball, so rho = R.
class BallSet final : public FeasibleSet {
 public:
  explicit BallSet(double radius);
  double radius() const { return radius_; }
  double inner_radius() const { return radius_; }

  /// Boundary inclusive.
  bool contains(const Vector& x) const override;
  /// -x / |x|; throws NotSeparable for points inside the ball.
  Vector separate(const Vector& x) const override;

 private:
  double radius_;
};

// ---------------------------------------------------------------------------
// Logistic regression

/// Numerically stable 1 / (1 + exp(-<w, x>)).
double logistic_prob(const Vector& w, const Eigen::Ref<const Vector>& x);
/// Negative log-likelihood -[y ln p + (1 - y) ln(1 - p)].
double logistic_loss(const Vector& w, const Eigen::Ref<const Vector>& x, double y);
/// (p - y) x
Vector logistic_subgrad(const Vector& w, const Eigen::Ref<const Vector>& x, double y);

/// Feature matrix (rows are samples, last column constant 1) and binary labels.
struct Dataset {
  Eigen::MatrixXd X;
  Vector y;
  std::vector<std::string> feature_names;

  long long size() const { return X.rows(); }
  long long features() const { return X.cols(); }
  /// Throws InvalidArgument if the invariants (non-empty, finite, unit last
  /// column, labels in {0, 1}) are violated.
  void validate() const;
};

struct CsvOptions {
  /// Zero-based label column; negative counts from the end (-1 = last).
  int label_column = -1;
  bool header = false;
  /// Label is 1 iff the raw class equals this value. Unset: raw labels must
  /// already be 0/1.
  std::optional<double> positive_class = 2.0;
};

/// Parses numeric comma-separated rows and appends the constant feature.
Dataset load_csv(const std::filesystem::path& path, const CsvOptions& opts = {});

/// Writes X without its constant column, followed by the label, with 17
/// significant digits.
void write_csv(const std::filesystem::path& path, const Dataset& ds);

enum class FeatureScaling {
  None,
  /// Zero mean, unit variance.
  Standardize,
  /// Affine map of the training range onto [0, 1].
  MinMax,
};

/// Per-column affine map x -> (x - shift) / scale; the constant column is
/// never touched.
struct Standardization {
  Vector mean;
  Vector scale;
};

/// Column statistics over ds; constant and degenerate columns get shift 0,
/// scale 1 so they pass through unchanged.
Standardization fit_standardization(const Dataset& ds,
                                    FeatureScaling kind = FeatureScaling::Standardize);
void apply_standardization(Dataset& ds, const Standardization& st);

/// Seeded shuffle, test size ceil(N * test_frac); the scaling fitted on the
/// training part is applied to both parts.
std::pair<Dataset, Dataset> train_test_split(const Dataset& ds, double test_frac,
                                             std::uint64_t seed,
                                             FeatureScaling scaling = FeatureScaling::Standardize);

/// Seeded subsample of `rows` rows without replacement (or ds when rows >= N).
Dataset subsample(const Dataset& ds, long long rows, std::uint64_t seed);

double mean_logistic_loss(const Dataset& ds, const Vector& w);
Vector mean_logistic_gradient(const Dataset& ds, const Vector& w);

/// Synthetic stand-in for a tabular binary task: standard normal features,
/// labels drawn from a logistic model with random weights.
Dataset make_synthetic_logistic(long long rows, long long raw_features, std::uint64_t seed);

/// Stand-in with the Covertype column layout (10 continuous, 4 + 40 one-hot,
/// plus the constant: d = 55): correlated continuous features on very
/// different scales and skewed category frequencies.
Dataset make_synthetic_covertype(long long rows, std::uint64_t seed);

/// Per-sample oracle: seed picks one training row uniformly with replacement.
class LogisticOracle final : public StochasticOracle {
 public:
  LogisticOracle(const Dataset& train, double noise_level);
  std::size_t dimension() const override { return static_cast<std::size_t>(train_.features()); }
  double sample(const Vector& w, std::uint64_t seed, Eigen::Ref<Vector> grad) const override;
  double noise_level() const override { return noise_; }

 private:
  const Dataset& train_;
  double noise_;
};

struct LogRegProblem {
  Dataset train;
  Dataset test;
  double radius = 10.0;
};

// ---------------------------------------------------------------------------
// Synthetic ground-truth problems

enum class SyntheticKind { NoisyQuadratic, NoisyMaxAffine };

struct SyntheticSpec {
  SyntheticKind kind = SyntheticKind::NoisyQuadratic;
  int n = 2;
  double sigma = 0.0;
  double radius = 1.0;
  /// Quadratic minimizer; drawn inside the ball of radius 0.5 R when empty.
  Vector target;
  /// Number of affine pieces (>= n + 1) for NoisyMaxAffine.
  int pieces = 0;
  std::uint64_t seed = 0;
};

struct SyntheticProblem {
  std::shared_ptr<const StochasticOracle> oracle;
  std::function<double(const Vector&)> exact_f;
  std::function<Vector(const Vector&)> exact_subgradient;
  Vector x_star;
  double f_star = 0.0;
  /// Upper bound on sup_{x,y in Q} |f(x) - f(y)|.
  double range_B = 0.0;
  /// Affine pieces, rows g_i^T and offsets c_i (max-affine only).
  Eigen::MatrixXd G;
  Vector offsets;
};

/// noisy_quadratic: f(x) = |x - x*|^2, sample f(x) + sigma <z, x>, subgradient 2(x - x*) + sigma z.
/// noisy_max_affine: f(x) = max_i <g_i, x> + c_i with all of the first n + 1
/// pieces active at x* and 0 in the interior of their gradient hull; sample
/// adds sigma <z, x> to the value and sigma z to the active-piece gradient.
SyntheticProblem make_synthetic(const SyntheticSpec& spec);

}  // namespace vaidya
