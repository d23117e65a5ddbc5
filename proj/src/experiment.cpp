#include "vaidya/experiment.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <limits>
#include <memory>
#include <random>
#include <set>
#include <sstream>

#include "json.hpp"
#include "vaidya/baseline.hpp"
#include "vaidya/cutting_plane.hpp"
#include "vaidya/error.hpp"
#include "vaidya/problems.hpp"

namespace vaidya {

using nlohmann::json;

namespace {

[[noreturn]] void config_error(const std::string& msg) { throw Error(ErrorKind::ConfigError, msg); }

// Reads the members of one JSON object, type-checking each and rejecting
// keys nobody asked for.
class Reader {
 public:
  Reader(const json& j, std::string prefix) : j_(j), prefix_(std::move(prefix)) {
    if (!j_.is_object()) config_error(where() + "must be an object");
  }

  const json* find(const char* key) {
    seen_.insert(key);
    auto it = j_.find(key);
    return it == j_.end() ? nullptr : &*it;
  }

  template <class T>
  void get(const char* key, T& dst) {
    if (const json* v = find(key)) {
      if (v->is_null()) config_error(field(key) + " must not be null");
      dst = convert<T>(*v, key);
    }
  }

  // Present null resets to unset; absent keeps the default.
  template <class T>
  void get(const char* key, std::optional<T>& dst) {
    if (const json* v = find(key)) {
      if (v->is_null()) {
        dst.reset();
      } else {
        dst = convert<T>(*v, key);
      }
    }
  }

  void finish() const {
    for (const auto& [k, v] : j_.items()) {
      if (!seen_.count(k)) config_error("unknown key " + field(k.c_str()));
    }
  }

  std::string field(const char* key) const { return prefix_.empty() ? key : prefix_ + "." + key; }

 private:
  std::string where() const { return prefix_.empty() ? "config " : prefix_ + " "; }

  template <class T>
  T convert(const json& v, const char* key) const {
    if constexpr (std::is_same_v<T, bool>) {
      if (!v.is_boolean()) config_error(field(key) + " must be a boolean");
      return v.get<bool>();
    } else if constexpr (std::is_same_v<T, std::string>) {
      if (!v.is_string()) config_error(field(key) + " must be a string");
      return v.get<std::string>();
    } else if constexpr (std::is_floating_point_v<T>) {
      if (!v.is_number()) config_error(field(key) + " must be a number");
      return v.get<T>();
    } else if constexpr (std::is_unsigned_v<T>) {
      if (!v.is_number_unsigned()) config_error(field(key) + " must be a non-negative integer");
      const auto u = v.get<std::uint64_t>();
      if (u > std::numeric_limits<T>::max()) config_error(field(key) + " is out of range");
      return static_cast<T>(u);
    } else {
      if (!v.is_number_integer()) config_error(field(key) + " must be an integer");
      const auto i = v.get<std::int64_t>();
      if (i < std::numeric_limits<T>::min() || i > std::numeric_limits<T>::max()) {
        config_error(field(key) + " is out of range");
      }
      return static_cast<T>(i);
    }
  }

  const json& j_;
  std::string prefix_;
  std::set<std::string> seen_;
};

template <class T>
void put(json& j, const char* key, const std::optional<T>& v) {
  if (v) j[key] = *v;
}

void require(bool ok, const std::string& msg) {
  if (!ok) config_error(msg);
}

void require_positive(const std::optional<double>& v, const char* name) {
  if (v) require(*v > 0.0 && std::isfinite(*v), std::string(name) + " must be > 0");
}

}  // namespace

ExperimentConfig parse_config(std::string_view json_text) {
  json j;
  try {
    j = json::parse(json_text);
  } catch (const json::parse_error& e) {
    config_error(std::string("invalid JSON: ") + e.what());
  }
  ExperimentConfig cfg;
  Reader top(j, "");
  if (const json* p = top.find("problem")) {
    Reader r(*p, "problem");
    auto& s = cfg.problem;
    r.get("type", s.type);
    r.get("radius", s.radius);
    r.get("seed", s.seed);
    r.get("kind", s.kind);
    r.get("n", s.n);
    r.get("sigma", s.sigma);
    r.get("pieces", s.pieces);
    r.get("csv", s.csv);
    r.get("header", s.header);
    r.get("label_column", s.label_column);
    r.get("positive_class", s.positive_class);
    r.get("subsample", s.subsample);
    r.get("test_frac", s.test_frac);
    r.get("scaling", s.scaling);
    r.get("synthetic_if_missing", s.synthetic_if_missing);
    r.get("noise_level", s.noise_level);
    r.finish();
  }
  top.get("solver", cfg.solver);
  if (const json* p = top.find("vaidya")) {
    Reader r(*p, "vaidya");
    auto& s = cfg.vaidya;
    r.get("preset", s.preset);
    r.get("eta", s.eta);
    r.get("gamma", s.gamma);
    r.get("newton_tol", s.newton_tol);
    r.get("newton_max", s.newton_max);
    r.get("iterations", s.iterations);
    r.get("batch", s.batch);
    r.get("init_half_width", s.init_half_width);
    r.finish();
  }
  if (const json* p = top.find("sgd")) {
    Reader r(*p, "sgd");
    r.get("step_size", cfg.sgd.step_size);
    r.get("batch", cfg.sgd.batch);
    r.get("iterations", cfg.sgd.iterations);
    r.finish();
  }
  if (const json* p = top.find("planning")) {
    Reader r(*p, "planning");
    auto& s = cfg.planning;
    r.get("eps", s.eps);
    r.get("beta", s.beta);
    r.get("sigma", s.sigma);
    r.get("B", s.B);
    r.get("rho", s.rho);
    r.finish();
  }
  top.get("value_batch", cfg.value_batch);
  top.get("max_samples", cfg.max_samples);
  top.get("seed", cfg.seed);
  top.get("threads", cfg.threads);
  top.get("output_dir", cfg.output_dir);
  top.finish();
  validate_config(cfg);
  return cfg;
}

ExperimentConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) config_error("cannot read config " + path.string());
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_config(ss.str());
}

void validate_config(const ExperimentConfig& cfg) {
  const auto& p = cfg.problem;
  require(p.type == "synthetic" || p.type == "logistic",
          "problem.type must be \"synthetic\" or \"logistic\"");
  require_positive(p.radius, "problem.radius");
  if (p.type == "synthetic") {
    require(p.kind == "noisy_quadratic" || p.kind == "noisy_max_affine",
            "problem.kind must be \"noisy_quadratic\" or \"noisy_max_affine\"");
    require(p.n >= 1, "problem.n must be >= 1");
    require(p.sigma >= 0.0 && std::isfinite(p.sigma), "problem.sigma must be >= 0");
    require(p.pieces == 0 || p.pieces >= p.n + 1, "problem.pieces must be 0 or >= n + 1");
  } else {
    require(p.subsample >= 0, "problem.subsample must be >= 0");
    require(p.test_frac > 0.0 && p.test_frac < 1.0, "problem.test_frac must be in (0, 1)");
    require(p.scaling == "standardize" || p.scaling == "minmax" || p.scaling == "none",
            "problem.scaling must be \"standardize\", \"minmax\" or \"none\"");
    require(p.noise_level >= 0.0, "problem.noise_level must be >= 0");
  }
  require(cfg.solver == "vaidya" || cfg.solver == "sgd" || cfg.solver == "both",
          "solver must be \"vaidya\", \"sgd\" or \"both\"");

  const auto& v = cfg.vaidya;
  require(v.preset == "practical" || v.preset == "theory",
          "vaidya.preset must be \"practical\" or \"theory\"");
  require_positive(v.eta, "vaidya.eta");
  require_positive(v.gamma, "vaidya.gamma");
  require(v.newton_tol > 0.0, "vaidya.newton_tol must be > 0");
  require(v.newton_max >= 1, "vaidya.newton_max must be >= 1");
  if (v.iterations) require(*v.iterations >= 0, "vaidya.iterations must be >= 0");
  if (v.batch) require(*v.batch >= 1, "vaidya.batch must be >= 1");
  require_positive(v.init_half_width, "vaidya.init_half_width");

  require(cfg.sgd.step_size >= 0.0, "sgd.step_size must be >= 0");
  require(cfg.sgd.batch >= 1, "sgd.batch must be >= 1");
  if (cfg.sgd.iterations) require(*cfg.sgd.iterations >= 0, "sgd.iterations must be >= 0");

  const auto& pl = cfg.planning;
  require_positive(pl.eps, "planning.eps");
  if (pl.beta) require(*pl.beta > 0.0 && *pl.beta < 1.0, "planning.beta must be in (0, 1)");
  if (pl.sigma) require(*pl.sigma >= 0.0, "planning.sigma must be >= 0");
  require_positive(pl.B, "planning.B");
  require_positive(pl.rho, "planning.rho");

  require(cfg.value_batch >= 1, "value_batch must be >= 1");
  require(cfg.max_samples >= 0, "max_samples must be >= 0");
  require(cfg.threads >= 1, "threads must be >= 1");
  require(!cfg.output_dir.empty(), "output_dir must not be empty");
}

namespace {

json config_json(const ExperimentConfig& cfg) {
  json j;
  const auto& p = cfg.problem;
  json& jp = j["problem"];
  jp["type"] = p.type;
  put(jp, "radius", p.radius);
  jp["seed"] = p.seed;
  jp["kind"] = p.kind;
  jp["n"] = p.n;
  jp["sigma"] = p.sigma;
  jp["pieces"] = p.pieces;
  jp["csv"] = p.csv;
  jp["header"] = p.header;
  jp["label_column"] = p.label_column;
  jp["positive_class"] = p.positive_class ? json(*p.positive_class) : json(nullptr);
  jp["subsample"] = p.subsample;
  jp["test_frac"] = p.test_frac;
  jp["scaling"] = p.scaling;
  jp["synthetic_if_missing"] = p.synthetic_if_missing;
  jp["noise_level"] = p.noise_level;

  j["solver"] = cfg.solver;
  json& jv = j["vaidya"];
  jv["preset"] = cfg.vaidya.preset;
  put(jv, "eta", cfg.vaidya.eta);
  put(jv, "gamma", cfg.vaidya.gamma);
  jv["newton_tol"] = cfg.vaidya.newton_tol;
  jv["newton_max"] = cfg.vaidya.newton_max;
  put(jv, "iterations", cfg.vaidya.iterations);
  put(jv, "batch", cfg.vaidya.batch);
  put(jv, "init_half_width", cfg.vaidya.init_half_width);

  json& js = j["sgd"];
  js["step_size"] = cfg.sgd.step_size;
  js["batch"] = cfg.sgd.batch;
  put(js, "iterations", cfg.sgd.iterations);

  json& jl = j["planning"];
  jl = json::object();
  put(jl, "eps", cfg.planning.eps);
  put(jl, "beta", cfg.planning.beta);
  put(jl, "sigma", cfg.planning.sigma);
  put(jl, "B", cfg.planning.B);
  put(jl, "rho", cfg.planning.rho);

  j["value_batch"] = cfg.value_batch;
  j["max_samples"] = cfg.max_samples;
  j["seed"] = cfg.seed;
  j["threads"] = cfg.threads;
  j["output_dir"] = cfg.output_dir;
  return j;
}

}  // namespace

std::string config_to_json(const ExperimentConfig& cfg) { return config_json(cfg).dump(2); }

// ---------------------------------------------------------------------------
// cmd_run

namespace {

struct Instance {
  std::unique_ptr<Dataset> train;
  std::unique_ptr<Dataset> test;
  std::shared_ptr<const StochasticOracle> oracle;
  std::optional<SyntheticProblem> synthetic;
  std::unique_ptr<BallSet> ball;
  std::function<double(const Vector&)> test_loss;
  std::string data_source;
  double sigma = 0.0;
  std::optional<double> range_B;
};

Instance build_instance(const ExperimentConfig& cfg) {
  const auto& p = cfg.problem;
  Instance inst;
  if (p.type == "synthetic") {
    SyntheticSpec spec;
    spec.kind = p.kind == "noisy_quadratic" ? SyntheticKind::NoisyQuadratic
                                            : SyntheticKind::NoisyMaxAffine;
    spec.n = p.n;
    spec.sigma = p.sigma;
    spec.radius = p.radius.value_or(1.0);
    spec.pieces = p.pieces > 0 ? p.pieces : p.n + 1;
    spec.seed = p.seed;
    inst.synthetic = make_synthetic(spec);
    inst.oracle = inst.synthetic->oracle;
    inst.ball = std::make_unique<BallSet>(spec.radius);
    inst.test_loss = inst.synthetic->exact_f;
    inst.data_source = "synthetic:" + p.kind;
    inst.sigma = p.sigma;
    inst.range_B = inst.synthetic->range_B;
    return inst;
  }

  Dataset ds;
  if (!p.csv.empty() && std::filesystem::exists(p.csv)) {
    CsvOptions opts;
    opts.header = p.header;
    opts.label_column = p.label_column;
    opts.positive_class = p.positive_class;
    ds = load_csv(p.csv, opts);
    if (p.subsample > 0) ds = subsample(ds, p.subsample, p.seed);
    inst.data_source = "csv:" + p.csv;
  } else if (p.synthetic_if_missing) {
    ds = make_synthetic_covertype(p.subsample > 0 ? p.subsample : 20000, p.seed);
    inst.data_source = "synthetic:covertype";
  } else {
    throw Error(ErrorKind::ParseError,
                p.csv.empty() ? std::string("problem.csv is empty") : "dataset not found: " + p.csv);
  }
  const FeatureScaling scaling = p.scaling == "standardize" ? FeatureScaling::Standardize
                                 : p.scaling == "minmax"    ? FeatureScaling::MinMax
                                                            : FeatureScaling::None;
  auto [train, test] = train_test_split(ds, p.test_frac, p.seed, scaling);
  inst.train = std::make_unique<Dataset>(std::move(train));
  inst.test = std::make_unique<Dataset>(std::move(test));
  inst.oracle = std::make_shared<LogisticOracle>(*inst.train, p.noise_level);
  inst.ball = std::make_unique<BallSet>(p.radius.value_or(10.0));
  const Dataset* test_ptr = inst.test.get();
  inst.test_loss = [test_ptr](const Vector& w) { return mean_logistic_loss(*test_ptr, w); };
  inst.sigma = p.noise_level;
  return inst;
}

struct Resolved {
  double eta = 0.0;
  double gamma = 0.0;
  long long N = 0;
  long long r = 0;
  std::optional<double> delta;
  long long sgd_iterations = 0;
  double radius = 0.0;
  double half_width = 0.0;
};

Resolved resolve(const ExperimentConfig& cfg, const Instance& inst) {
  Resolved res;
  const VaidyaConfig preset =
      cfg.vaidya.preset == "theory" ? VaidyaConfig::theory() : VaidyaConfig::practical();
  res.eta = cfg.vaidya.eta.value_or(preset.eta);
  res.gamma = cfg.vaidya.gamma.value_or(preset.gamma);
  if (res.gamma > res.eta) config_error("vaidya.gamma must not exceed vaidya.eta");
  res.radius = inst.ball->radius();
  res.half_width = cfg.vaidya.init_half_width.value_or(1.05 * res.radius);
  if (res.half_width < res.radius) {
    config_error("vaidya.init_half_width must be >= the ball radius");
  }

  const auto& pl = cfg.planning;
  const double rho = pl.rho.value_or(res.radius);
  const double sigma = pl.sigma.value_or(inst.sigma);
  const std::optional<double> B = pl.B ? pl.B : inst.range_B;
  const auto n = static_cast<long long>(inst.oracle->dimension());

  if (cfg.vaidya.iterations) {
    res.N = *cfg.vaidya.iterations;
  } else if (pl.eps) {
    if (!B) config_error("planning.B is required to derive vaidya.iterations");
    try {
      res.N = iterations_needed(n, res.gamma, *B, res.radius, rho, *pl.eps);
    } catch (const Error& e) {
      config_error(std::string("planning: ") + e.what());
    }
  } else {
    res.N = 300;
  }

  if (cfg.vaidya.batch) {
    res.r = *cfg.vaidya.batch;
  } else if (pl.eps && pl.beta) {
    res.r = sigma > 0.0 ? batch_size(*pl.eps, *pl.beta, sigma, res.radius, std::max(res.N, 1LL))
                        : 1;
  } else {
    res.r = 128;
  }
  if (pl.beta && sigma > 0.0) {
    res.delta = delta_of_batch(res.r, *pl.beta, sigma, res.radius, std::max(res.N, 1LL)).delta;
  }

  res.sgd_iterations = cfg.sgd.iterations.value_or(res.N);
  if (cfg.max_samples > 0) {
    res.sgd_iterations = std::min(res.sgd_iterations, cfg.max_samples / cfg.sgd.batch);
  }
  return res;
}

std::string num(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.12g", v);
  return buf;
}

std::string num(const std::optional<double>& v) { return v ? num(*v) : std::string(); }

// Per-iteration test loss: SGD at its iterate, Vaidya at its best-so-far
// feasible point (the one it would return if stopped there).
std::vector<std::optional<double>> test_losses(const RunTrace& trace, bool best_so_far,
                                               const std::function<double(const Vector&)>& loss) {
  std::vector<std::optional<double>> out;
  out.reserve(trace.records.size());
  std::optional<double> current;
  double best = std::numeric_limits<double>::infinity();
  for (const auto& rec : trace.records) {
    if (!best_so_far) {
      current = loss(rec.x);
    } else if (rec.value_estimate && *rec.value_estimate < best) {
      best = *rec.value_estimate;
      current = loss(rec.x);
    }
    out.push_back(current);
  }
  return out;
}

void write_trace(const std::filesystem::path& path, const std::string& solver,
                 const RunTrace& trace, const std::vector<std::optional<double>>& loss) {
  std::ofstream f(path);
  if (!f) throw Error(ErrorKind::ParseError, "cannot write " + path.string());
  f << "iter,solver,action,m,min_sigma,value_estimate,test_loss,cum_samples,wall_time_s\n";
  for (std::size_t i = 0; i < trace.records.size(); ++i) {
    const auto& rec = trace.records[i];
    const bool sgd = rec.action == Action::SgdStep;
    std::string action(action_name(rec.action));
    if (rec.action == Action::Drop) action += '(' + std::to_string(rec.dropped_row) + ')';
    f << rec.iter << ',' << solver << ',' << action << ','
      << (sgd ? std::string() : std::to_string(rec.m)) << ',' << num(rec.min_sigma) << ','
      << num(rec.value_estimate) << ',' << num(loss[i]) << ',' << rec.cum_samples << ','
      << num(rec.wall_time) << '\n';
  }
  if (!f) throw Error(ErrorKind::ParseError, "write failed: " + path.string());
}

json solver_summary(const RunResult& res, const std::vector<std::optional<double>>& loss,
                    const Instance& inst) {
  json j;
  j["stop_reason"] = std::string(stop_reason_name(res.stop_reason));
  j["iterations"] = res.trace.records.size();
  j["oracle_calls"] = res.total_oracle_calls;
  j["samples"] = res.total_samples;
  j["best_value_estimate"] = res.best_value_estimate;
  j["final_test_loss"] = loss.empty() || !loss.back() ? json(nullptr) : json(*loss.back());
  j["best_point_test_loss"] = inst.test_loss(res.best_point);
  j["last_point_test_loss"] = inst.test_loss(res.last_point);
  if (inst.synthetic) {
    j["best_point_gap"] = inst.synthetic->exact_f(res.best_point) - inst.synthetic->f_star;
    j["last_point_gap"] = inst.synthetic->exact_f(res.last_point) - inst.synthetic->f_star;
  }
  return j;
}

enum class Stage { Config, Data, Solver, Output };

int exit_code(Stage s) {
  switch (s) {
    case Stage::Config: return 2;
    case Stage::Data: return 3;
    case Stage::Solver: return 4;
    case Stage::Output: return 3;
  }
  return 1;
}

}  // namespace

int cmd_run(const RunOptions& opts, std::ostream& out, std::ostream& err) {
  Stage stage = Stage::Config;
  try {
    ExperimentConfig cfg = load_config(opts.config);
    if (opts.threads) cfg.threads = *opts.threads;
    if (opts.out) cfg.output_dir = *opts.out;
    if (opts.max_samples) cfg.max_samples = *opts.max_samples;
    validate_config(cfg);

    stage = Stage::Data;
    const Instance inst = build_instance(cfg);
    stage = Stage::Config;
    const Resolved res = resolve(cfg, inst);

    stage = Stage::Output;
    const std::filesystem::path dir(cfg.output_dir);
    std::filesystem::create_directories(dir);

    json summary;
    summary["config"] = config_json(cfg);
    json& jr = summary["resolved"];
    jr["eta"] = res.eta;
    jr["gamma"] = res.gamma;
    jr["N"] = res.N;
    jr["r"] = res.r;
    jr["delta"] = res.delta ? json(*res.delta) : json(nullptr);
    jr["sgd_iterations"] = res.sgd_iterations;
    jr["radius"] = res.radius;
    jr["init_half_width"] = res.half_width;
    json& jd = summary["data"];
    jd["source"] = inst.data_source;
    jd["dimension"] = inst.oracle->dimension();
    if (inst.train) {
      jd["train_rows"] = inst.train->size();
      jd["test_rows"] = inst.test->size();
    }
    if (inst.synthetic) jd["f_star"] = inst.synthetic->f_star;

    const StochasticOracle& oracle = *inst.oracle;
    const auto n = static_cast<Eigen::Index>(oracle.dimension());

    if (cfg.solver != "sgd") {
      stage = Stage::Solver;
      VaidyaConfig vc;
      vc.eta = res.eta;
      vc.gamma = res.gamma;
      vc.newton_tol = cfg.vaidya.newton_tol;
      vc.newton_max = cfg.vaidya.newton_max;
      vc.max_iters = res.N;
      vc.sample_budget = cfg.max_samples;
      vc.seed = cfg.seed;
      MinibatchCutOracle cut(oracle, *inst.ball, res.r, cfg.seed, cfg.threads);
      const std::uint64_t value_seed = cfg.seed;
      auto estimate = [&](const Vector& x, std::uint64_t k) {
        return estimate_value(oracle, x, cfg.value_batch, mix_seed(value_seed, k), cfg.threads);
      };
      const RunResult rr = run_vaidya(cut, Polytope::box(static_cast<std::size_t>(n), res.half_width),
                                      Vector::Zero(n), vc, estimate);
      stage = Stage::Output;
      const auto loss = test_losses(rr.trace, true, inst.test_loss);
      write_trace(dir / "trace_vaidya.csv", "vaidya", rr.trace, loss);
      summary["solvers"]["vaidya"] = solver_summary(rr, loss, inst);
      out << "vaidya: " << rr.trace.records.size() << " iterations, "
          << stop_reason_name(rr.stop_reason) << ", final test loss "
          << num(loss.empty() ? std::nullopt : loss.back()) << '\n';
    }

    if (cfg.solver != "vaidya") {
      stage = Stage::Solver;
      SgdConfig sc;
      sc.step_size = cfg.sgd.step_size;
      sc.batch = cfg.sgd.batch;
      sc.iterations = res.sgd_iterations;
      sc.radius = res.radius;
      sc.seed = cfg.seed;
      sc.threads = cfg.threads;
      const std::uint64_t value_seed = cfg.seed ^ kSgdSeedTag;
      auto estimate = [&](const Vector& x, std::uint64_t k) {
        return estimate_value(oracle, x, cfg.value_batch, mix_seed(value_seed, k), cfg.threads);
      };
      const RunResult rr = run_sgd(oracle, sc, estimate);
      stage = Stage::Output;
      const auto loss = test_losses(rr.trace, false, inst.test_loss);
      write_trace(dir / "trace_sgd.csv", "sgd", rr.trace, loss);
      summary["solvers"]["sgd"] = solver_summary(rr, loss, inst);
      out << "sgd: " << rr.trace.records.size() << " iterations, final test loss "
          << num(loss.empty() ? std::nullopt : loss.back()) << '\n';
    }

    std::ofstream sf(dir / "summary.json");
    sf << summary.dump(2) << '\n';
    if (!sf) throw Error(ErrorKind::ParseError, "cannot write summary.json");
    return 0;
  } catch (const Error& e) {
    if (e.kind() == ErrorKind::ConfigError) stage = Stage::Config;
    err << (stage == Stage::Config   ? "config error: "
            : stage == Stage::Solver ? "solver failure: "
                                     : "data error: ")
        << e.what() << '\n';
    return exit_code(stage);
  } catch (const std::exception& e) {
    err << "data error: " << e.what() << '\n';
    return exit_code(Stage::Data);
  }
}

// ---------------------------------------------------------------------------
// cmd_plan

Plan compute_plan(const PlanInput& in) {
  Plan p;
  p.N = in.N ? *in.N : iterations_needed(in.n, in.gamma, in.B, in.R, in.rho, in.eps);
  if (p.N < 1) throw Error(ErrorKind::InvalidArgument, "N must be >= 1");
  p.r = batch_size(in.eps, in.beta, in.sigma, in.R, p.N);
  p.delta = delta_of_batch(p.r, in.beta, in.sigma, in.R, p.N).delta;
  p.oracle_calls = p.N * p.r;
  return p;
}

int cmd_plan(const PlanInput& in, std::ostream& out, std::ostream& err) {
  Plan p;
  try {
    p = compute_plan(in);
  } catch (const Error& e) {
    err << "invalid arguments: " << e.what() << '\n';
    return 2;
  }
  out << "N " << p.N << '\n'
      << "r " << p.r << '\n'
      << "delta " << num(p.delta) << '\n'
      << "oracle_calls " << p.oracle_calls << '\n';
  return 0;
}

// ---------------------------------------------------------------------------
// cmd_selftest

namespace {

// Random polytope with unit normals through a random interior point.
std::pair<Polytope, Vector> random_polytope(std::mt19937_64& rng, int n, int m) {
  std::normal_distribution<double> normal;
  std::uniform_real_distribution<double> unif(0.2, 1.5);
  Matrix A(m, n);
  Vector x(n);
  for (int j = 0; j < n; ++j) x[j] = normal(rng);
  for (int i = 0; i < m; ++i) {
    for (int j = 0; j < n; ++j) A(i, j) = normal(rng);
    A.row(i).normalize();
  }
  Vector b = A * x;
  for (int i = 0; i < m; ++i) b[i] -= unif(rng);
  return {Polytope(std::move(A), std::move(b)), x};
}

bool check_trace(std::mt19937_64& rng) {
  for (int t = 0; t < 20; ++t) {
    const int n = 2 + t % 9;
    const auto [P, x] = random_polytope(rng, n, n + 1 + t % (3 * n));
    if (std::abs(leverage_scores(P, x).sum() - n) > 1e-8 * n) return false;
  }
  return true;
}

bool check_gradient(std::mt19937_64& rng, const SelftestHooks& hooks) {
  for (int t = 0; t < 20; ++t) {
    const int n = 2 + t % 9;
    const auto [P, x] = random_polytope(rng, n, n + 1 + t % (3 * n));
    const Vector g = hooks.gradient ? hooks.gradient(P, x) : volumetric_gradient(P, x);
    Vector fd(n);
    for (int j = 0; j < n; ++j) {
      const double h = 1e-6;
      Vector xp = x, xm = x;
      xp[j] += h;
      xm[j] -= h;
      fd[j] = (volumetric_value(P, xp) - volumetric_value(P, xm)) / (2 * h);
    }
    if ((fd - g).norm() > 1e-5 * std::max(g.norm(), 1e-8)) return false;
  }
  return true;
}

bool check_box_center() {
  Vector c(3);
  c << 0.3, -0.2, 0.5;
  const Polytope P = Polytope::box(c, 2.0);
  Vector x0 = c;
  x0[0] += 1.2;
  x0[2] -= 0.7;
  return (volumetric_center(P, x0, 1e-10, 100).x - c).norm() <= 1e-8;
}

bool check_choose_beta() {
  const Polytope P = Polytope::box(2, 1.0);
  const BarrierState st = evaluate_barrier(P, Vector::Zero(2));
  const Vector e1 = Vector::Unit(2, 0);
  return std::abs(choose_beta(st, e1, 0.04, 0.04) + 5.0) <= 1e-12 &&
         std::abs(choose_beta(st, e1, 1e-4, 1e-7) + std::sqrt(1.0 / std::sqrt(1e-11))) <= 1e-9;
}

bool check_plan() {
  PlanInput a{1, 1.0, 0.5, 1.0, 1.0, 1.0, 1.0, 1.0, std::nullopt};
  PlanInput b{1, 0.1, 0.01, 1.0, 1.0, 1.0, 1.0, 1.0, 100};
  return compute_plan(a).N == 2 && compute_plan(b).r == 31316;
}

}  // namespace

int cmd_selftest(std::ostream& out, const SelftestHooks& hooks) {
  std::mt19937_64 rng(20240611);
  struct Check {
    const char* name;
    std::function<bool()> run;
  };
  const Check checks[] = {
      {"leverage_trace", [&] { return check_trace(rng); }},
      {"volumetric_gradient", [&] { return check_gradient(rng, hooks); }},
      {"box_center", check_box_center},
      {"choose_beta", check_choose_beta},
      {"plan_formulas", check_plan},
  };
  bool all = true;
  for (const auto& c : checks) {
    bool ok = false;
    std::string why;
    try {
      ok = c.run();
    } catch (const std::exception& e) {
      why = e.what();
    }
    all = all && ok;
    out << c.name << ' ' << (ok ? "PASS" : "FAIL");
    if (!why.empty()) out << " (" << why << ')';
    out << '\n';
  }
  return all ? 0 : 1;
}

int cmd_dataset_info(std::ostream& out) {
  out << "dataset: UCI Covertype (covtype.data.gz)\n"
      << "url: https://archive.ics.uci.edu/ml/machine-learning-databases/covtype/covtype.data.gz\n"
      << "rows: 581012\n"
      << "columns: 54 features + class label (last column, classes 1..7)\n"
      << "features after constant append: 55\n"
      << "binarization: class 2 vs rest (problem.positive_class)\n"
      << "usage: gunzip, then set problem.csv to the extracted file\n";
  return 0;
}

}  // namespace vaidya
