#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <filesystem>
#include <fstream>
#include <random>
#include <sstream>

#include "json.hpp"
#include "test_util.hpp"
#include "vaidya/experiment.hpp"

using namespace vaidya;
namespace fs = std::filesystem;
using nlohmann::json;

namespace {

fs::path scratch(const std::string& name) {
  const fs::path p = fs::temp_directory_path() / ("vaidya_exp_" + name);
  fs::remove_all(p);
  return p;
}

fs::path write_config(const std::string& name, const json& j) {
  const fs::path p = fs::temp_directory_path() / ("vaidya_exp_" + name + ".json");
  std::ofstream(p) << j.dump();
  return p;
}

std::string read(const fs::path& p) {
  std::ifstream in(p);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

std::string config_error_message(const std::string& text) {
  try {
    parse_config(text);
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::ConfigError);
    return e.what();
  }
  return "";
}

json quadratic_config(const fs::path& out) {
  return {{"problem", {{"type", "synthetic"}, {"n", 3}, {"sigma", 1.0}, {"seed", 2}}},
          {"solver", "both"},
          {"vaidya", {{"iterations", 40}, {"batch", 64}}},
          {"value_batch", 32},
          {"seed", 5},
          {"output_dir", out.string()}};
}

// Trace rows with the wall-clock column removed.
std::vector<std::string> trace_without_time(const fs::path& p) {
  std::ifstream in(p);
  std::vector<std::string> rows;
  std::string line;
  while (std::getline(in, line)) rows.push_back(line.substr(0, line.rfind(',')));
  return rows;
}

}  // namespace

TEST_CASE("config parsing") {
  const ExperimentConfig def = parse_config("{}");
  CHECK(def == ExperimentConfig{});

  const ExperimentConfig c = parse_config(
      R"({"problem": {"type": "logistic", "csv": "x.csv", "positive_class": null, "scaling": "minmax"},
          "solver": "sgd", "sgd": {"step_size": 0.05, "iterations": 10},
          "planning": {"eps": 0.1, "beta": 0.05}, "seed": 18446744073709551615})");
  CHECK(c.problem.type == "logistic");
  CHECK_FALSE(c.problem.positive_class.has_value());
  CHECK(c.sgd.iterations == 10);
  CHECK(c.planning.eps == 0.1);
  CHECK(c.seed == 18446744073709551615ULL);

  CHECK(config_error_message(R"({"bogus": 1})").find("bogus") != std::string::npos);
  CHECK(config_error_message(R"({"vaidya": {"etaa": 1}})").find("vaidya.etaa") != std::string::npos);
  CHECK(config_error_message(R"({"planning": {"eps": -0.2}})").find("planning.eps") !=
        std::string::npos);
  CHECK(config_error_message(R"({"problem": {"n": 2.5}})").find("problem.n") != std::string::npos);
  CHECK(config_error_message(R"({"seed": -1})").find("seed") != std::string::npos);
  CHECK(config_error_message(R"({"solver": "adam"})").find("solver") != std::string::npos);
  CHECK(config_error_message(R"({"problem": 3})").find("problem") != std::string::npos);
  CHECK(config_error_message("{not json").find("invalid JSON") != std::string::npos);
  CHECK(error_kind([] { load_config("/nonexistent/config.json"); }) == ErrorKind::ConfigError);
}

TEST_CASE("config round trip") {
  ExperimentConfig c;
  c.problem.type = "logistic";
  c.problem.radius = 7.5;
  c.problem.positive_class.reset();
  c.vaidya.eta = 1e-4;
  c.vaidya.iterations = 123;
  c.sgd.iterations = 77;
  c.planning.eps = 0.3;
  c.planning.B = 2.0;
  c.seed = 1ULL << 63;
  c.threads = 4;
  const ExperimentConfig back = parse_config(config_to_json(c));
  CHECK(back == c);
  CHECK(parse_config(config_to_json(ExperimentConfig{})) == ExperimentConfig{});
}

TEST_CASE("cmd_plan") {
  std::ostringstream out, err;
  PlanInput a{1, 1.0, 0.5, 1.0, 1.0, 1.0, 1.0, 1.0, std::nullopt};
  CHECK(cmd_plan(a, out, err) == 0);
  CHECK(out.str().find("N 2\n") != std::string::npos);

  PlanInput b{1, 0.1, 0.01, 1.0, 1.0, 1.0, 1.0, 1.0, 100};
  const Plan p = compute_plan(b);
  CHECK(p.N == 100);
  CHECK(p.r == 31316);
  CHECK(p.oracle_calls == 3131600);
  CHECK(p.delta <= 0.05);

  PlanInput small{2, 0.1, 0.1, 1.0, 1.0, 1.0, 10.0, 0.04, std::nullopt};
  PlanInput large = small;
  large.n = 4;
  CHECK(compute_plan(large).N > compute_plan(small).N);

  PlanInput bad = a;
  bad.eps = -1;
  std::ostringstream o2, e2;
  CHECK(cmd_plan(bad, o2, e2) == 2);
  CHECK(o2.str().empty());
  bad = a;
  bad.beta = 1.5;
  CHECK(cmd_plan(bad, o2, e2) == 2);
}

TEST_CASE("cmd_selftest") {
  std::ostringstream out;
  CHECK(cmd_selftest(out) == 0);
  for (const char* name :
       {"leverage_trace", "volumetric_gradient", "box_center", "choose_beta", "plan_formulas"}) {
    CHECK(out.str().find(std::string(name) + " PASS") != std::string::npos);
  }
  SelftestHooks hooks;
  hooks.gradient = [](const Polytope& P, const Vector& x) { return Vector(-volumetric_gradient(P, x)); };
  std::ostringstream bad;
  CHECK(cmd_selftest(bad, hooks) == 1);
  CHECK(bad.str().find("volumetric_gradient FAIL") != std::string::npos);
  CHECK(bad.str().find("leverage_trace PASS") != std::string::npos);
}

TEST_CASE("cmd_run synthetic") {
  const fs::path out = scratch("quad");
  RunOptions opts;
  opts.config = write_config("quad", quadratic_config(out));
  std::ostringstream o, e;
  REQUIRE(cmd_run(opts, o, e) == 0);

  const auto vaidya_rows = trace_without_time(out / "trace_vaidya.csv");
  const auto sgd_rows = trace_without_time(out / "trace_sgd.csv");
  CHECK(vaidya_rows.size() == 41);
  CHECK(sgd_rows.size() == 41);
  CHECK(read(out / "trace_vaidya.csv").rfind(
            "iter,solver,action,m,min_sigma,value_estimate,test_loss,cum_samples,wall_time_s\n", 0) ==
        0);

  const json summary = json::parse(read(out / "summary.json"));
  CHECK(summary["solvers"]["vaidya"].contains("best_point_gap"));
  CHECK(summary["solvers"]["sgd"].contains("last_point_gap"));
  CHECK(summary["resolved"]["N"] == 40);
  CHECK(parse_config(summary["config"].dump()) == parse_config(quadratic_config(out).dump()));

  SUBCASE("threads and reruns reproduce the traces") {
    opts.threads = 3;
    REQUIRE(cmd_run(opts, o, e) == 0);
    CHECK(trace_without_time(out / "trace_vaidya.csv") == vaidya_rows);
    CHECK(trace_without_time(out / "trace_sgd.csv") == sgd_rows);
  }
  SUBCASE("planning sets N and r") {
    json j = quadratic_config(out);
    j["vaidya"] = json::object();
    j["solver"] = "vaidya";
    j["planning"] = {{"eps", 0.5}, {"beta", 0.1}};
    RunOptions p;
    p.config = write_config("plan", j);
    p.max_samples = 200000;
    REQUIRE(cmd_run(p, o, e) == 0);
    const json s = json::parse(read(out / "summary.json"));
    CHECK(s["resolved"]["r"].get<long long>() > 128);
    CHECK(s["solvers"]["vaidya"]["stop_reason"] == "sample_budget");
  }
  SUBCASE("overrides") {
    const fs::path other = scratch("quad_other");
    RunOptions p = opts;
    p.out = other.string();
    REQUIRE(cmd_run(p, o, e) == 0);
    CHECK(fs::exists(other / "summary.json"));
  }
}

TEST_CASE("cmd_run logistic from csv") {
  std::mt19937_64 rng(3);
  std::uniform_int_distribution<int> cls(1, 7), val(0, 3000);
  const fs::path csv = fs::temp_directory_path() / "vaidya_exp_cov.csv";
  {
    std::ofstream f(csv);
    for (int r = 0; r < 300; ++r) {
      for (int j = 0; j < 54; ++j) f << (j < 10 ? val(rng) : val(rng) % 2) << ',';
      f << cls(rng) << '\n';
    }
  }
  const fs::path out = scratch("lr");
  json j = {{"problem", {{"type", "logistic"}, {"csv", csv.string()}, {"subsample", 250}}},
            {"vaidya", {{"iterations", 15}}},
            {"output_dir", out.string()}};
  RunOptions opts;
  opts.config = write_config("lr", j);
  std::ostringstream o, e;
  REQUIRE(cmd_run(opts, o, e) == 0);
  const json s = json::parse(read(out / "summary.json"));
  CHECK(s["data"]["dimension"] == 55);
  CHECK(s["data"]["train_rows"] == 200);
  CHECK(s["data"]["test_rows"] == 50);
  CHECK(s["resolved"]["radius"] == 10.0);
}

TEST_CASE("cmd_run exit codes") {
  std::ostringstream o, e;
  RunOptions opts;

  opts.config = write_config("neg", {{"planning", {{"eps", -1.0}}}});
  CHECK(cmd_run(opts, o, e) == 2);
  CHECK(e.str().find("planning.eps") != std::string::npos);

  opts.config = "/nonexistent/config.json";
  CHECK(cmd_run(opts, o, e) == 2);

  opts.config = write_config("missing", {{"problem",
                                          {{"type", "logistic"},
                                           {"csv", "/nonexistent/data.csv"},
                                           {"synthetic_if_missing", false}}}});
  CHECK(cmd_run(opts, o, e) == 3);

  const fs::path bad = fs::temp_directory_path() / "vaidya_exp_bad.csv";
  std::ofstream(bad) << "1,2,2\n1,oops,1\n";
  opts.config = write_config("badcsv", {{"problem", {{"type", "logistic"}, {"csv", bad.string()}}}});
  std::ostringstream e3;
  CHECK(cmd_run(opts, o, e3) == 3);
  CHECK(e3.str().find("ParseError") != std::string::npos);

  json fail = quadratic_config(scratch("fail"));
  fail["vaidya"] = {{"iterations", 20}, {"newton_max", 1}, {"newton_tol", 1e-15}};
  opts.config = write_config("fail", fail);
  std::ostringstream e4;
  CHECK(cmd_run(opts, o, e4) == 4);
  CHECK(e4.str().find("CenteringFailed") != std::string::npos);
}

TEST_CASE("cmd_dataset_info") {
  std::ostringstream out;
  CHECK(cmd_dataset_info(out) == 0);
  CHECK(out.str().find("581012") != std::string::npos);
  CHECK(out.str().find("55") != std::string::npos);
}
