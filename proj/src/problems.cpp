#include "vaidya/problems.hpp"

#include <algorithm>
#include <cerrno>
#include <cmath>
#include <cstdlib>
#include <fstream>
#include <iomanip>
#include <numeric>
#include <random>
#include <sstream>

#include "vaidya/error.hpp"

namespace vaidya {

// ---------------------------------------------------------------------------
// BallSet

BallSet::BallSet(double radius) : radius_(radius) {
  if (!(radius > 0.0)) throw Error(ErrorKind::InvalidArgument, "ball radius must be > 0");
}

bool BallSet::contains(const Vector& x) const { return x.norm() <= radius_; }

Vector BallSet::separate(const Vector& x) const {
  const double nrm = x.norm();
  if (nrm <= radius_) {
    throw Error(ErrorKind::NotSeparable, "point lies inside the ball");
  }
  return -x / nrm;
}

// ---------------------------------------------------------------------------
// Logistic regression

namespace {

// log(1 + e^t) without overflow.
double softplus(double t) { return std::max(t, 0.0) + std::log1p(std::exp(-std::abs(t))); }

double sigmoid(double z) {
  if (z >= 0.0) return 1.0 / (1.0 + std::exp(-z));
  const double e = std::exp(z);
  return e / (1.0 + e);
}

}  // namespace

double logistic_prob(const Vector& w, const Eigen::Ref<const Vector>& x) {
  return sigmoid(w.dot(x));
}

double logistic_loss(const Vector& w, const Eigen::Ref<const Vector>& x, double y) {
  const double z = w.dot(x);
  return y * softplus(-z) + (1.0 - y) * softplus(z);
}

Vector logistic_subgrad(const Vector& w, const Eigen::Ref<const Vector>& x, double y) {
  return (sigmoid(w.dot(x)) - y) * x;
}

void Dataset::validate() const {
  if (X.rows() < 1) throw Error(ErrorKind::InvalidArgument, "dataset is empty");
  if (y.size() != X.rows()) throw Error(ErrorKind::DimensionMismatch, "label count mismatch");
  if (!X.allFinite() || !y.allFinite()) {
    throw Error(ErrorKind::InvalidArgument, "dataset contains NaN or Inf");
  }
  if ((X.col(X.cols() - 1).array() != 1.0).any()) {
    throw Error(ErrorKind::InvalidArgument, "last feature column must be the constant 1");
  }
  if (((y.array() != 0.0) && (y.array() != 1.0)).any()) {
    throw Error(ErrorKind::InvalidArgument, "labels must be 0 or 1");
  }
}

Dataset load_csv(const std::filesystem::path& path, const CsvOptions& opts) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorKind::ParseError, "cannot open " + path.string());

  std::vector<std::vector<double>> rows;
  std::vector<std::string> header_names;
  std::string line;
  long long lineno = 0;
  std::size_t width = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.find_first_not_of(" \t") == std::string::npos) continue;
    std::vector<std::string> cells;
    std::stringstream ss(line);
    std::string cell;
    while (std::getline(ss, cell, ',')) cells.push_back(cell);
    if (line.back() == ',') cells.emplace_back();

    if (opts.header && header_names.empty() && rows.empty()) {
      header_names = std::move(cells);
      continue;
    }
    std::vector<double> vals;
    vals.reserve(cells.size());
    for (std::size_t j = 0; j < cells.size(); ++j) {
      const char* begin = cells[j].c_str();
      char* end = nullptr;
      errno = 0;
      const double v = std::strtod(begin, &end);
      while (end && (*end == ' ' || *end == '\t')) ++end;
      if (end == begin || *end != '\0' || errno == ERANGE || !std::isfinite(v)) {
        throw Error(ErrorKind::ParseError, path.string() + ": row " + std::to_string(lineno) +
                                               ", column " + std::to_string(j + 1) +
                                               ": not a finite number: '" + cells[j] + "'");
      }
      vals.push_back(v);
    }
    if (width == 0) width = vals.size();
    if (vals.size() != width) {
      throw Error(ErrorKind::ParseError, path.string() + ": row " + std::to_string(lineno) +
                                             " has " + std::to_string(vals.size()) +
                                             " columns, expected " + std::to_string(width));
    }
    rows.push_back(std::move(vals));
  }
  if (rows.empty()) throw Error(ErrorKind::EmptyFile, path.string() + " has no data rows");
  if (width < 2) throw Error(ErrorKind::ParseError, "need at least one feature and a label");

  const int w = static_cast<int>(width);
  const int label = opts.label_column < 0 ? w + opts.label_column : opts.label_column;
  if (label < 0 || label >= w) {
    throw Error(ErrorKind::ParseError, "label column " + std::to_string(opts.label_column) +
                                           " out of range for " + std::to_string(w) + " columns");
  }

  Dataset ds;
  const auto n = static_cast<Eigen::Index>(rows.size());
  ds.X.resize(n, w);
  ds.y.resize(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    Eigen::Index c = 0;
    for (int j = 0; j < w; ++j) {
      if (j == label) continue;
      ds.X(i, c++) = rows[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)];
    }
    ds.X(i, w - 1) = 1.0;
    const double raw = rows[static_cast<std::size_t>(i)][static_cast<std::size_t>(label)];
    if (opts.positive_class) {
      ds.y[i] = raw == *opts.positive_class ? 1.0 : 0.0;
    } else {
      if (raw != 0.0 && raw != 1.0) {
        throw Error(ErrorKind::ParseError, path.string() + ": row " + std::to_string(i + 1) +
                                               ": label must be 0 or 1 without binarization");
      }
      ds.y[i] = raw;
    }
  }
  for (int j = 0; j < w; ++j) {
    if (j == label) continue;
    ds.feature_names.push_back(static_cast<std::size_t>(j) < header_names.size()
                                   ? header_names[static_cast<std::size_t>(j)]
                                   : "x" + std::to_string(j));
  }
  ds.feature_names.emplace_back("const");
  return ds;
}

void write_csv(const std::filesystem::path& path, const Dataset& ds) {
  std::ofstream out(path);
  if (!out) throw Error(ErrorKind::ParseError, "cannot write " + path.string());
  out << std::setprecision(17);
  for (Eigen::Index i = 0; i < ds.X.rows(); ++i) {
    for (Eigen::Index j = 0; j + 1 < ds.X.cols(); ++j) out << ds.X(i, j) << ',';
    out << ds.y[i] << '\n';
  }
}

Standardization fit_standardization(const Dataset& ds, FeatureScaling kind) {
  const Eigen::Index d = ds.X.cols();
  Standardization st{Vector::Zero(d), Vector::Ones(d)};
  if (kind == FeatureScaling::None) return st;
  const double n = static_cast<double>(ds.X.rows());
  for (Eigen::Index j = 0; j + 1 < d; ++j) {
    if (kind == FeatureScaling::MinMax) {
      const double lo = ds.X.col(j).minCoeff();
      const double hi = ds.X.col(j).maxCoeff();
      if (hi > lo) {
        st.mean[j] = lo;
        st.scale[j] = hi - lo;
      }
      continue;
    }
    const double mean = ds.X.col(j).mean();
    const double var = (ds.X.col(j).array() - mean).square().sum() / n;
    if (var > 1e-24 * (1.0 + mean * mean)) {
      st.mean[j] = mean;
      st.scale[j] = std::sqrt(var);
    }
  }
  return st;
}

void apply_standardization(Dataset& ds, const Standardization& st) {
  for (Eigen::Index j = 0; j + 1 < ds.X.cols(); ++j) {
    ds.X.col(j) = (ds.X.col(j).array() - st.mean[j]) / st.scale[j];
  }
}

namespace {

Dataset take_rows(const Dataset& ds, const std::vector<Eigen::Index>& idx) {
  Dataset out;
  out.X.resize(static_cast<Eigen::Index>(idx.size()), ds.X.cols());
  out.y.resize(static_cast<Eigen::Index>(idx.size()));
  for (std::size_t i = 0; i < idx.size(); ++i) {
    out.X.row(static_cast<Eigen::Index>(i)) = ds.X.row(idx[i]);
    out.y[static_cast<Eigen::Index>(i)] = ds.y[idx[i]];
  }
  out.feature_names = ds.feature_names;
  return out;
}

std::vector<Eigen::Index> shuffled_indices(Eigen::Index n, std::uint64_t seed) {
  std::vector<Eigen::Index> idx(static_cast<std::size_t>(n));
  std::iota(idx.begin(), idx.end(), Eigen::Index{0});
  std::mt19937_64 rng(seed);
  std::shuffle(idx.begin(), idx.end(), rng);
  return idx;
}

}  // namespace

std::pair<Dataset, Dataset> train_test_split(const Dataset& ds, double test_frac,
                                             std::uint64_t seed, FeatureScaling scaling) {
  if (!(test_frac > 0.0 && test_frac < 1.0)) {
    throw Error(ErrorKind::InvalidArgument, "test fraction must lie in (0, 1)");
  }
  const Eigen::Index n = ds.X.rows();
  const auto n_test = static_cast<Eigen::Index>(std::ceil(static_cast<double>(n) * test_frac));
  if (n_test >= n) throw Error(ErrorKind::InvalidArgument, "split leaves no training rows");
  const auto idx = shuffled_indices(n, seed);
  Dataset test = take_rows(ds, {idx.begin(), idx.begin() + n_test});
  Dataset train = take_rows(ds, {idx.begin() + n_test, idx.end()});
  if (scaling != FeatureScaling::None) {
    const Standardization st = fit_standardization(train, scaling);
    apply_standardization(train, st);
    apply_standardization(test, st);
  }
  return {std::move(train), std::move(test)};
}

Dataset subsample(const Dataset& ds, long long rows, std::uint64_t seed) {
  if (rows < 1) throw Error(ErrorKind::InvalidArgument, "subsample size must be >= 1");
  if (rows >= ds.size()) return ds;
  auto idx = shuffled_indices(ds.X.rows(), seed);
  idx.resize(static_cast<std::size_t>(rows));
  std::sort(idx.begin(), idx.end());
  return take_rows(ds, idx);
}

double mean_logistic_loss(const Dataset& ds, const Vector& w) {
  const Vector z = ds.X * w;
  double sum = 0.0;
  for (Eigen::Index i = 0; i < z.size(); ++i) {
    sum += ds.y[i] * softplus(-z[i]) + (1.0 - ds.y[i]) * softplus(z[i]);
  }
  return sum / static_cast<double>(z.size());
}

Vector mean_logistic_gradient(const Dataset& ds, const Vector& w) {
  const Vector z = ds.X * w;
  Vector resid(z.size());
  for (Eigen::Index i = 0; i < z.size(); ++i) resid[i] = sigmoid(z[i]) - ds.y[i];
  return ds.X.transpose() * resid / static_cast<double>(z.size());
}

Dataset make_synthetic_logistic(long long rows, long long raw_features, std::uint64_t seed) {
  if (rows < 1 || raw_features < 1) {
    throw Error(ErrorKind::InvalidArgument, "synthetic dataset needs rows, features >= 1");
  }
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> normal(0.0, 1.0);
  std::uniform_real_distribution<double> unif(0.0, 1.0);
  const auto d = static_cast<Eigen::Index>(raw_features + 1);
  Vector w_true(d);
  for (Eigen::Index j = 0; j < d; ++j) w_true[j] = normal(rng) / std::sqrt(double(raw_features));
  w_true *= 2.0;
  Dataset ds;
  ds.X.resize(rows, d);
  ds.y.resize(rows);
  for (Eigen::Index i = 0; i < rows; ++i) {
    for (Eigen::Index j = 0; j + 1 < d; ++j) ds.X(i, j) = normal(rng);
    ds.X(i, d - 1) = 1.0;
    ds.y[i] = unif(rng) < sigmoid(ds.X.row(i).dot(w_true)) ? 1.0 : 0.0;
  }
  for (Eigen::Index j = 0; j + 1 < d; ++j) ds.feature_names.push_back("x" + std::to_string(j));
  ds.feature_names.emplace_back("const");
  return ds;
}

Dataset make_synthetic_covertype(long long rows, std::uint64_t seed) {
  if (rows < 1) throw Error(ErrorKind::InvalidArgument, "synthetic dataset needs rows >= 1");
  constexpr int kContinuous = 10;
  constexpr int kLatent = 3;
  constexpr int kAreas = 4;
  constexpr int kSoils = 40;
  constexpr int kRaw = kContinuous + kAreas + kSoils;
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> normal(0.0, 1.0);
  std::uniform_real_distribution<double> unif(0.0, 1.0);

  // Continuous block: a few latent factors plus small idiosyncratic noise,
  // on wildly different scales, so the standardized block is ill-conditioned.
  Eigen::MatrixXd loading(kContinuous, kLatent);
  Vector scale(kContinuous), offset(kContinuous);
  for (int j = 0; j < kContinuous; ++j) {
    for (int l = 0; l < kLatent; ++l) loading(j, l) = normal(rng);
    scale[j] = std::pow(10.0, 3.0 * unif(rng));
    offset[j] = scale[j] * 5.0 * unif(rng);
  }
  // Category frequencies: a dominant few and a long tail of rare ones.
  const std::vector<double> area_p = {0.45, 0.05, 0.44, 0.06};
  std::vector<double> soil_p(kSoils);
  for (int k = 0; k < kSoils; ++k) soil_p[k] = 1.0 / std::pow(k + 1.0, 1.3);
  std::discrete_distribution<int> area_dist(area_p.begin(), area_p.end());
  std::discrete_distribution<int> soil_dist(soil_p.begin(), soil_p.end());

  Vector w_latent(kLatent), w_area(kAreas), w_soil(kSoils);
  for (auto* w : {&w_latent, &w_area, &w_soil}) {
    for (Eigen::Index j = 0; j < w->size(); ++j) (*w)[j] = normal(rng);
  }
  w_latent *= 1.5;

  Dataset ds;
  ds.X = Eigen::MatrixXd::Zero(rows, kRaw + 1);
  ds.y.resize(rows);
  Vector u(kLatent);
  for (Eigen::Index i = 0; i < rows; ++i) {
    for (int l = 0; l < kLatent; ++l) u[l] = normal(rng);
    for (int j = 0; j < kContinuous; ++j) {
      ds.X(i, j) = offset[j] + scale[j] * (loading.row(j).dot(u) + 0.1 * normal(rng));
    }
    const int area = area_dist(rng);
    const int soil = soil_dist(rng);
    ds.X(i, kContinuous + area) = 1.0;
    ds.X(i, kContinuous + kAreas + soil) = 1.0;
    ds.X(i, kRaw) = 1.0;
    const double logit = w_latent.dot(u) + w_area[area] + w_soil[soil];
    ds.y[i] = unif(rng) < sigmoid(logit) ? 1.0 : 0.0;
  }
  for (int j = 0; j < kContinuous; ++j) ds.feature_names.push_back("cont" + std::to_string(j));
  for (int j = 0; j < kAreas; ++j) ds.feature_names.push_back("area" + std::to_string(j));
  for (int j = 0; j < kSoils; ++j) ds.feature_names.push_back("soil" + std::to_string(j));
  ds.feature_names.emplace_back("const");
  return ds;
}

LogisticOracle::LogisticOracle(const Dataset& train, double noise_level)
    : train_(train), noise_(noise_level) {
  train_.validate();
}

double LogisticOracle::sample(const Vector& w, std::uint64_t seed, Eigen::Ref<Vector> grad) const {
  SplitMixEngine eng(seed);
  std::uniform_int_distribution<Eigen::Index> pick(0, train_.X.rows() - 1);
  const Eigen::Index i = pick(eng);
  const double z = train_.X.row(i).dot(w);
  const double y = train_.y[i];
  grad = (sigmoid(z) - y) * train_.X.row(i).transpose();
  return y * softplus(-z) + (1.0 - y) * softplus(z);
}

// ---------------------------------------------------------------------------
// Synthetic problems

namespace {

class NoisyQuadraticOracle final : public StochasticOracle {
 public:
  NoisyQuadraticOracle(Vector target, double sigma) : target_(std::move(target)), sigma_(sigma) {}
  std::size_t dimension() const override { return static_cast<std::size_t>(target_.size()); }
  double noise_level() const override { return sigma_; }

  double sample(const Vector& x, std::uint64_t seed, Eigen::Ref<Vector> grad) const override {
    const Vector diff = x - target_;
    grad = 2.0 * diff;
    double value = diff.squaredNorm();
    if (sigma_ > 0.0) {
      SplitMixEngine eng(seed);
      std::normal_distribution<double> normal(0.0, 1.0);
      for (Eigen::Index j = 0; j < grad.size(); ++j) {
        const double z = sigma_ * normal(eng);
        grad[j] += z;
        value += z * x[j];
      }
    }
    return value;
  }

 private:
  Vector target_;
  double sigma_;
};

Eigen::Index active_piece(const Eigen::MatrixXd& G, const Vector& c, const Vector& x) {
  const Vector vals = G * x + c;
  Eigen::Index best = 0;
  for (Eigen::Index i = 1; i < vals.size(); ++i) {
    if (vals[i] > vals[best]) best = i;
  }
  return best;
}

class NoisyMaxAffineOracle final : public StochasticOracle {
 public:
  NoisyMaxAffineOracle(Eigen::MatrixXd G, Vector c, double sigma)
      : G_(std::move(G)), c_(std::move(c)), sigma_(sigma) {}
  std::size_t dimension() const override { return static_cast<std::size_t>(G_.cols()); }
  double noise_level() const override { return sigma_; }

  double sample(const Vector& x, std::uint64_t seed, Eigen::Ref<Vector> grad) const override {
    const Eigen::Index k = active_piece(G_, c_, x);
    grad = G_.row(k).transpose();
    double value = G_.row(k).dot(x) + c_[k];
    if (sigma_ > 0.0) {
      SplitMixEngine eng(seed);
      std::normal_distribution<double> normal(0.0, 1.0);
      for (Eigen::Index j = 0; j < grad.size(); ++j) {
        const double z = sigma_ * normal(eng);
        grad[j] += z;
        value += z * x[j];
      }
    }
    return value;
  }

 private:
  Eigen::MatrixXd G_;
  Vector c_;
  double sigma_;
};

Vector random_in_ball(std::mt19937_64& rng, Eigen::Index n, double radius) {
  std::normal_distribution<double> normal(0.0, 1.0);
  std::uniform_real_distribution<double> unif(0.0, 1.0);
  Vector v(n);
  for (Eigen::Index j = 0; j < n; ++j) v[j] = normal(rng);
  v.normalize();
  return radius * std::pow(unif(rng), 1.0 / static_cast<double>(n)) * v;
}

}  // namespace

SyntheticProblem make_synthetic(const SyntheticSpec& spec) {
  if (spec.n < 1) throw Error(ErrorKind::InvalidArgument, "synthetic dimension must be >= 1");
  if (!(spec.sigma >= 0.0)) throw Error(ErrorKind::InvalidArgument, "sigma must be >= 0");
  if (!(spec.radius > 0.0)) throw Error(ErrorKind::InvalidArgument, "radius must be > 0");
  const Eigen::Index n = spec.n;
  const double R = spec.radius;
  std::mt19937_64 rng(spec.seed);

  Vector x_star;
  if (spec.target.size() > 0) {
    if (spec.target.size() != n) {
      throw Error(ErrorKind::InvalidArgument, "target dimension differs from n");
    }
    if (!(spec.target.norm() < R)) {
      throw Error(ErrorKind::InvalidArgument, "target must lie strictly inside the ball");
    }
    x_star = spec.target;
  } else {
    x_star = random_in_ball(rng, n, 0.5 * R);
  }

  SyntheticProblem prob;
  prob.x_star = x_star;

  if (spec.kind == SyntheticKind::NoisyQuadratic) {
    prob.oracle = std::make_shared<NoisyQuadraticOracle>(x_star, spec.sigma);
    prob.exact_f = [x_star](const Vector& x) { return (x - x_star).squaredNorm(); };
    prob.exact_subgradient = [x_star](const Vector& x) -> Vector { return 2.0 * (x - x_star); };
    prob.f_star = 0.0;
    const double reach = R + x_star.norm();
    prob.range_B = reach * reach;
    return prob;
  }

  const int k = spec.pieces == 0 ? spec.n + 1 : spec.pieces;
  if (k < spec.n + 1) {
    throw Error(ErrorKind::InvalidArgument, "max-affine needs at least n + 1 pieces");
  }
  std::normal_distribution<double> normal(0.0, 1.0);
  std::uniform_real_distribution<double> unif(0.0, 1.0);
  Eigen::MatrixXd G(k, n);
  Vector c(k);
  const double f_star = normal(rng);

  // First n + 1 gradients have a strictly positive combination equal to 0,
  // so x* is the unique minimizer with all of them active.
  Vector lambda(n + 1);
  for (Eigen::Index i = 0; i < n + 1; ++i) lambda[i] = 0.2 + unif(rng);
  Vector acc = Vector::Zero(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    for (Eigen::Index j = 0; j < n; ++j) G(i, j) = normal(rng);
    acc += lambda[i] * G.row(i).transpose();
  }
  G.row(n) = (-acc / lambda[n]).transpose();
  for (Eigen::Index i = 0; i < n + 1; ++i) c[i] = f_star - G.row(i).dot(x_star);
  for (Eigen::Index i = n + 1; i < k; ++i) {
    for (Eigen::Index j = 0; j < n; ++j) G(i, j) = normal(rng);
    c[i] = f_star - G.row(i).dot(x_star) - (0.1 + unif(rng));
  }

  prob.oracle = std::make_shared<NoisyMaxAffineOracle>(G, c, spec.sigma);
  prob.exact_f = [G, c](const Vector& x) { return (G * x + c).maxCoeff(); };
  prob.exact_subgradient = [G, c](const Vector& x) -> Vector {
    return G.row(active_piece(G, c, x)).transpose();
  };
  prob.f_star = f_star;
  double fmax = -std::numeric_limits<double>::infinity();
  for (Eigen::Index i = 0; i < k; ++i) fmax = std::max(fmax, G.row(i).norm() * R + c[i]);
  prob.range_B = fmax - f_star;
  prob.G = std::move(G);
  prob.offsets = std::move(c);
  return prob;
}

}  // namespace vaidya
