#include <cstdlib>
#include <iostream>
#include <sstream>
#include <string>

#include <unistd.h>

#include "CLI11.hpp"
#include "vaidya/experiment.hpp"
#include "vaidya/geometry.hpp"

namespace {

bool use_color() { return std::getenv("NO_COLOR") == nullptr && isatty(STDOUT_FILENO); }

// Colors the trailing PASS/FAIL of selftest lines.
void print_checks(const std::string& text, bool color) {
  std::istringstream in(text);
  std::string line;
  while (std::getline(in, line)) {
    if (color) {
      for (const char* word : {" PASS", " FAIL"}) {
        const auto pos = line.find(word);
        if (pos == std::string::npos) continue;
        const char* code = word[1] == 'P' ? "\033[32m" : "\033[31m";
        line = line.substr(0, pos + 1) + code + (word + 1) + "\033[0m" + line.substr(pos + 5);
        break;
      }
    }
    std::cout << line << '\n';
  }
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Volumetric-barrier cutting-plane method with minibatched stochastic oracles"};
  app.require_subcommand(1);

  vaidya::RunOptions run;
  std::string config_path;
  unsigned threads = 1;
  std::string out_dir;
  long long max_samples = 0;
  auto* run_cmd = app.add_subcommand("run", "Run an experiment described by a JSON config");
  run_cmd->add_option("--config", config_path, "Experiment config")->required();
  auto* threads_opt = run_cmd->add_option("--threads", threads, "Worker threads per batch")
                          ->check(CLI::PositiveNumber);
  auto* out_opt = run_cmd->add_option("--out", out_dir, "Output directory");
  auto* samples_opt = run_cmd->add_option("--max-samples", max_samples,
                                          "Stop each solver after this many samples")
                          ->check(CLI::NonNegativeNumber);

  vaidya::PlanInput plan;
  long long iters = 0;
  auto* plan_cmd = app.add_subcommand("plan", "Print N, r, delta and N*r for a target accuracy");
  plan_cmd->add_option("--n", plan.n, "Dimension")->required();
  plan_cmd->add_option("--eps", plan.eps, "Target accuracy")->required();
  plan_cmd->add_option("--beta", plan.beta, "Failure probability")->required();
  plan_cmd->add_option("--sigma", plan.sigma, "Noise level")->required();
  plan_cmd->add_option("--R", plan.R, "Outer ball radius")->required();
  plan_cmd->add_option("--rho", plan.rho, "Inner ball radius")->required();
  plan_cmd->add_option("--B", plan.B, "Bound on the range of f")->required();
  plan_cmd->add_option("--gamma", plan.gamma, "Drop threshold")->required();
  auto* iters_opt = plan_cmd->add_option("--iters", iters, "Use this N instead of the formula");

  bool flip_gradient = false;
  auto* self_cmd = app.add_subcommand("selftest", "Fast invariant checks");
  self_cmd->add_flag("--inject-gradient-sign-error", flip_gradient)->group("");

  auto* info_cmd = app.add_subcommand("dataset-info", "Where to get the Covertype data");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    // Help and version requests exit 0; any other usage error is an argument error.
    const int rc = app.exit(e);
    return rc == 0 ? 0 : 2;
  }

  if (run_cmd->parsed()) {
    run.config = config_path;
    if (*threads_opt) run.threads = threads;
    if (*out_opt) run.out = out_dir;
    if (*samples_opt) run.max_samples = max_samples;
    return vaidya::cmd_run(run, std::cout, std::cerr);
  }
  if (plan_cmd->parsed()) {
    if (*iters_opt) plan.N = iters;
    return vaidya::cmd_plan(plan, std::cout, std::cerr);
  }
  if (self_cmd->parsed()) {
    vaidya::SelftestHooks hooks;
    if (flip_gradient) {
      hooks.gradient = [](const vaidya::Polytope& P, const vaidya::Vector& x) {
        return vaidya::Vector(-vaidya::volumetric_gradient(P, x));
      };
    }
    std::ostringstream buf;
    const int rc = vaidya::cmd_selftest(buf, hooks);
    print_checks(buf.str(), use_color());
    return rc;
  }
  if (info_cmd->parsed()) return vaidya::cmd_dataset_info(std::cout);
  return 0;
}
