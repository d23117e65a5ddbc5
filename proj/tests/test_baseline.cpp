#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include "test_util.hpp"
#include "vaidya/baseline.hpp"
#include "vaidya/problems.hpp"

using namespace vaidya;

namespace {

ValueEstimator exact(const SyntheticProblem& p) {
  return [&p](const Vector& x, std::uint64_t) { return p.exact_f(x); };
}

}  // namespace

TEST_CASE("project_ball") {
  Vector x(2);
  x << 0.3, -0.4;
  CHECK(project_ball(x, 1.0) == x);
  x << 3, 4;
  const Vector p = project_ball(x, 1.0);
  CHECK(p.isApprox((Vector(2) << 0.6, 0.8).finished(), 1e-15));
  CHECK(project_ball(p, 1.0) == p);
  CHECK(error_kind([&] { project_ball(x, 0.0); }) == ErrorKind::InvalidArgument);
}

TEST_CASE("run_sgd") {
  SyntheticSpec spec;
  spec.n = 2;
  spec.radius = 1.0;
  spec.target = (Vector(2) << 0.3, -0.2).finished();
  const SyntheticProblem prob = make_synthetic(spec);

  SUBCASE("noiseless quadratic converges") {
    SgdConfig cfg;
    cfg.step_size = 0.1;
    cfg.iterations = 200;
    cfg.radius = 1.0;
    const RunResult res = run_sgd(*prob.oracle, cfg, exact(prob));
    CHECK(prob.exact_f(res.last_point) <= 1e-3);
    CHECK(res.trace.records.size() == 200);
    CHECK(res.total_samples == 200 * cfg.batch);
    CHECK(res.best_value_estimate == doctest::Approx(prob.exact_f(res.best_point)));
  }
  SUBCASE("zero step keeps x0") {
    SgdConfig cfg;
    cfg.step_size = 0.0;
    cfg.iterations = 5;
    const RunResult res = run_sgd(*prob.oracle, cfg, exact(prob));
    for (const auto& r : res.trace.records) CHECK(r.x == Vector::Zero(2));
  }
  SUBCASE("determinism and ball constraint") {
    SyntheticSpec noisy = spec;
    noisy.sigma = 3.0;
    noisy.target.resize(0);
    noisy.seed = 7;
    const SyntheticProblem p = make_synthetic(noisy);
    SgdConfig cfg;
    cfg.step_size = 0.5;
    cfg.batch = 4;
    cfg.iterations = 100;
    cfg.radius = 1.0;
    cfg.seed = 11;
    const RunResult a = run_sgd(*p.oracle, cfg, exact(p));
    cfg.threads = 3;
    const RunResult b = run_sgd(*p.oracle, cfg, exact(p));
    REQUIRE(a.trace.records.size() == b.trace.records.size());
    for (std::size_t k = 0; k < a.trace.records.size(); ++k) {
      CHECK(a.trace.records[k].x == b.trace.records[k].x);
      CHECK(a.trace.records[k].x.norm() <= 1.0 + 1e-12);
      CHECK(a.trace.records[k].action == Action::SgdStep);
    }
  }
  SUBCASE("invalid configs") {
    SgdConfig cfg;
    cfg.batch = 0;
    CHECK(error_kind([&] { cfg.validate(); }) == ErrorKind::InvalidBatchSize);
    cfg = SgdConfig{};
    cfg.step_size = -1;
    CHECK(error_kind([&] { cfg.validate(); }) == ErrorKind::InvalidArgument);
    cfg = SgdConfig{};
    cfg.radius = 0;
    CHECK(error_kind([&] { run_sgd(*prob.oracle, cfg, exact(prob)); }) ==
          ErrorKind::InvalidArgument);
  }
}
