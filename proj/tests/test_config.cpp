#include <doctest.h>

#include <string>

#include "treeval/config.hpp"
#include "treeval/error.hpp"

using namespace treeval;

namespace {

std::string config_error(const std::string& text) {
  try {
    build_config(parse_ini(text, "t.ini"));
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::Config);
    return e.what();
  }
  return "";
}

bool contains(const std::string& s, const std::string& part) {
  return s.find(part) != std::string::npos;
}

}  // namespace

TEST_CASE("INI syntax") {
  const auto doc = parse_ini("# top\n[run]\nseed = 7 # trailing\n; other\n\n[plan]\nn_test=10\n", "a.ini");
  REQUIRE(doc.entries.size() == 2);
  CHECK(doc.find("run", "seed")->value == "7");
  CHECK(doc.find("run", "seed")->line == 3);
  CHECK(doc.find("plan", "n_test")->value == "10");
  CHECK(doc.find("plan", "n_train") == nullptr);

  auto msg = [](const std::string& text) {
    try {
      parse_ini(text, "b.ini");
    } catch (const Error& e) {
      return std::string(e.what());
    }
    return std::string();
  };
  CHECK(contains(msg("[nope]\n"), "b.ini:1: unknown section [nope]"));
  CHECK(contains(msg("[run]\nfoo = 1\n"), "b.ini:2: unknown key 'foo'"));
  CHECK(contains(msg("[run]\nseed = 1\nseed = 2\n"), "duplicate key 'seed'"));
  CHECK(contains(msg("seed = 1\n"), "key outside of any section"));
  CHECK(contains(msg("[run]\nseed =\n"), "empty value"));
  CHECK(contains(msg("[run\n"), "unterminated"));
  CHECK(contains(msg("[run]\njunk\n"), "expected 'key = value'"));
}

TEST_CASE("defaults and overrides") {
  const auto cfg = build_config(parse_ini(""));
  CHECK(cfg.scale == Scale::Desk);
  CHECK(cfg.seed == 1);
  CHECK(cfg.plan.problem.name == "min-put");
  CHECK(cfg.plan.n_train == 5000);
  CHECK(cfg.bermudan.periods == 7);

  Overrides ov;
  ov.seed = 42;
  ov.scale = Scale::Paper;
  ov.out = "elsewhere";
  const auto o = build_config(parse_ini("[run]\nseed = 3\n"), ov);
  CHECK(o.seed == 42);
  CHECK(o.plan.seed == 42);
  CHECK(o.plan.n_test == 100000);
  CHECK(o.out == "elsewhere");
}

TEST_CASE("problem, plan, grids and measure") {
  const auto cfg = build_config(parse_ini(R"(
[problem]
payoff = brc
coupon = 0.05
[estimator]
kind = forest
regress_now = false
[forest]
trees = 50
nodesize = 3, 5
features = 4
sampling = subsample-without
subsample = 1000
[plan]
n_train = 2000
n_test = 500
dates = 0, 1, 6, T
[measure]
kind = clayton
marginal = logistic
theta = 2
[bermudan]
estimator = forest
periods = 5
)"));
  const auto& p = cfg.plan;
  CHECK(p.problem.payoff.kind == PayoffKind::BRC);
  CHECK(p.problem.payoff.coupon == 0.05);
  CHECK(p.problem.periods() == 12);
  CHECK(p.estimator == EstimatorKind::Forest);
  CHECK_FALSE(p.regress_now);
  CHECK(p.forest_grid.trees == std::vector<std::size_t>{50});
  CHECK(p.forest_grid.nodesize == std::vector<std::size_t>{3, 5});
  CHECK(p.forest_grid.features == std::vector<std::size_t>{4});
  CHECK(p.forest_grid.sampling == Sampling::SubsampleWithout);
  CHECK(p.n_train == 2000);
  CHECK(p.n_valid == 800);
  CHECK(p.n_test == 500);
  CHECK(p.resolved_dates() == std::vector<std::size_t>{0, 1, 6, 12});
  CHECK(p.grid().size() == 2);
  const auto& period = std::get<CopulaPeriod>(p.driver_measure().period(0));
  CHECK(period.family == CopulaFamily::Clayton);
  CHECK(period.theta == 2.0);
  CHECK(period.marginals[0].family == MarginalFamily::Logistic);
  CHECK(cfg.bermudan.periods == 5);
  CHECK(cfg.bermudan.estimator == EstimatorKind::Forest);

  const auto steps = build_config(parse_ini("[problem]\nassets = 2\nsteps = 1/4, 3/4\n"));
  CHECK(steps.plan.problem.components() == 2);
  CHECK(steps.plan.problem.model.steps[0] == 0.25);
}

TEST_CASE("invalid values name the key and line") {
  const auto bad_enum = config_error("[problem]\npayoff = asian\n");
  CHECK(contains(bad_enum, "t.ini:2: [problem] payoff: invalid value 'asian'"));
  CHECK(contains(bad_enum, "min-put"));
  CHECK(contains(config_error("[plan]\nn_test = -5\n"), "[plan] n_test"));
  CHECK(contains(config_error("[plan]\nvar_alpha = 1.5\n"), "[plan] var_alpha: must lie in (0, 1)"));
  CHECK(contains(config_error("[plan]\ndates = 0, 3\n"), "exceeds T"));
  CHECK(contains(config_error("[boost]\nlearning_rate = 0\n"), "[boost] learning_rate"));
  CHECK(contains(config_error("[forest]\nfeatures = 99\n"), "[forest] features"));
  CHECK(contains(config_error("[estimator]\nregress_now = maybe\n"), "true or false"));
  CHECK(contains(config_error("[problem]\nsteps = 1/0\n"), "division by zero"));
  CHECK(contains(config_error("[problem]\npayoff = brc\nbarrier = 1.5\n"), "barrier < strike"));
  CHECK(contains(config_error("[measure]\ntheta = 2\n"), "kind=normal"));
  CHECK(contains(config_error("[run]\nscale = huge\n"), "[run] scale"));
  CHECK(contains(config_error("[bermudan]\nsigma = 0\n"), "[bermudan] sigma: must be > 0"));
  CHECK_THROWS_AS(parse_scale("big"), Error);
  CHECK(parse_estimator("forest") == EstimatorKind::Forest);
}

TEST_CASE("snapshots round-trip") {
  const auto cfg = build_config(parse_ini(R"(
[run]
seed = 9
[problem]
payoff = max-call
[estimator]
kind = forest
[forest]
trees = 20
[plan]
n_train = 1000
n_inner = 50
[measure]
kind = product
marginal = uniform
loc = -1
scale = 2
)"));
  const auto snap = render_snapshot(cfg);
  const auto again = build_config(parse_ini(snap, "snapshot"));
  CHECK(render_snapshot(again) == snap);
  CHECK(again.seed == 9);
  CHECK(again.plan.problem.payoff.kind == PayoffKind::MaxCall);
  CHECK(again.plan.n_inner == 50);
  CHECK(again.plan.driver_measure().describe() == cfg.plan.driver_measure().describe());
  CHECK(render_snapshot(cfg.plan) == render_snapshot(again.plan));
  CHECK(render_snapshot(cfg.bermudan) == render_snapshot(again.bermudan));
}
