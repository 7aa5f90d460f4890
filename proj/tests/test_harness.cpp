#include <cmath>
#include <filesystem>
#include <sstream>

#include "aprox/errors.hpp"
#include "aprox/harness.hpp"
#include "aprox/verify.hpp"
#include "doctest.h"
#include "support.hpp"

using namespace aprox;
using testing::vec;

namespace {

RunConfig small_config(LossTag tag = LossTag::LeastSquares) {
  RunConfig c;
  c.experiment_id = "unit";
  c.gen_spec.family = tag;
  c.gen_spec.m = 100;
  c.gen_spec.n = 5;
  c.trials = 3;
  c.k_max = 2000;
  c.alpha_grid = {0.01, 1.0, 100.0};
  c.master_seed = 12;
  return c;
}

}  // namespace

TEST_SUITE("harness") {
  TEST_CASE("hit time on a deterministic quadratic") {
    const LossFamily fam{LossTag::LeastSquares, 1, 1};
    const Vector a = vec({1});
    const BoundSample f(fam, SampleView{Eigen::Map<const Vector>(a.data(), 1), 0.0});
    const verify::SingleSampleProblem problem(f, 1);
    TrialSettings s;
    s.model = ModelKind::FullProx;
    s.schedule = {1.0, 0.0};
    s.epsilon = 0.01;
    s.eval_stride = 1;
    s.initial_point = vec({1});
    std::vector<double> path;
    s.observer = [&](std::int64_t, const Vector& x) { path.push_back(x(0)); };
    RngStream sampler(0, "unit");
    const TrialRecord r = run_trial(problem, s, sampler);
    CHECK(r.converged());
    CHECK(r.hit_time == 4);
    REQUIRE(path.size() == 4);
    CHECK(path[3] == 0.125);
    CHECK(r.final_gap == doctest::Approx(1.0 / 128));

    s.initial_point = vec({0.01});
    RngStream sampler2(0, "unit");
    CHECK(run_trial(problem, s, sampler2).hit_time == 1);
  }

  TEST_CASE("gradient method on the quartic diverges") {
    const verify::QuarticLoss f;
    const verify::SingleSampleProblem problem(f, 1);
    TrialSettings s;
    s.model = ModelKind::SGM;
    s.schedule = {1.0, 0.0};
    s.initial_point = vec({2});
    s.eval_stride = 1;
    std::vector<double> path;
    s.observer = [&](std::int64_t, const Vector& x) { path.push_back(x(0)); };
    RngStream sampler(0, "unit");
    const TrialRecord r = run_trial(problem, s, sampler);
    CHECK(r.diverged());
    CHECK(!std::isfinite(r.final_gap));
    REQUIRE(path.size() >= 3);
    CHECK(path[1] == -6.0);
    CHECK(path[2] == 210.0);

    s.model = ModelKind::FullProx;
    RngStream sampler2(0, "unit");
    CHECK(!run_trial(problem, s, sampler2).diverged());
  }

  TEST_CASE("percentiles use linear interpolation") {
    std::vector<double> v;
    for (int i = 1; i <= 100; ++i) v.push_back(i);
    CHECK(percentile(v, 0.05) == doctest::Approx(5.95).epsilon(1e-12));
    CHECK(percentile(v, 0.5) == doctest::Approx(50.5).epsilon(1e-12));
    CHECK(percentile(v, 0.95) == doctest::Approx(95.05).epsilon(1e-12));
    CHECK(percentile({7.0}, 0.3) == 7.0);
  }

  TEST_CASE("summaries censor at k_max") {
    TrialRecord a;
    a.alpha0 = 1;
    a.outcome = TrialOutcome::Converged;
    a.hit_time = 10;
    TrialRecord b = a;
    b.outcome = TrialOutcome::NotConverged;
    b.hit_time = 0;
    const auto rows = summarize({a, b}, 100);
    REQUIRE(rows.size() == 1);
    CHECK(rows[0].median == 55.0);
    CHECK(rows[0].converged_fraction == 0.5);
    CHECK(rows[0].censored == 1);

    const auto single = summarize({a}, 100);
    CHECK(single[0].median == 10.0);
    CHECK(single[0].p5 == 10.0);
    CHECK(single[0].p95 == 10.0);
    CHECK(single[0].converged_fraction == 1.0);
  }

  TEST_CASE("csv emission") {
    const std::string header =
        "experiment_id,family,model,alpha0,beta,trial,hit_time,converged,diverged,final_gap,wall_nanos\n";
    CHECK(records_csv({}, "x") == header);
    TrialRecord r;
    r.alpha0 = 0.1;
    r.beta = 0.6;
    r.model = ModelKind::Truncated;
    r.family = LossTag::AbsoluteLoss;
    r.trial = 3;
    r.outcome = TrialOutcome::Converged;
    r.hit_time = 40;
    r.final_gap = 0.03;
    CHECK(records_csv({r}, "x") == header + "x,AbsoluteLoss,Truncated,0.1,0.6,3,40,1,0,0.03,0\n");
    r.outcome = TrialOutcome::Diverged;
    r.final_gap = INFINITY;
    const std::string row = records_csv({r}, "x").substr(header.size());
    CHECK(row.find(",NA,0,1,") != std::string::npos);
    CHECK(summary_csv({}) == "family,model,alpha0,median,p5,p95,converged_fraction\n");
  }

  TEST_CASE("sweeps are reproducible and independent of the worker count") {
    const RunConfig c = small_config();
    SweepOptions one;
    one.parallelism = 1;
    SweepOptions three;
    three.parallelism = 3;
    const SweepResult a = run_sweep(c, one);
    const SweepResult b = run_sweep(c, three);
    REQUIRE(a.records.size() == 3 * 4 * 3);
    CHECK(records_csv(a.records, c.experiment_id) == records_csv(b.records, c.experiment_id));
    CHECK(summary_csv(a.summaries) == summary_csv(b.summaries));
    CHECK(a.summaries.size() == 3 * 4);
    // Deterministic order: alpha, then model, then trial.
    CHECK(a.records[0].alpha0 == 0.01);
    CHECK(a.records[0].model == ModelKind::SGM);
    CHECK(a.records[1].trial == 1);
    CHECK(a.records[3].model == ModelKind::Truncated);
  }

  TEST_CASE("models share the dataset of their cell") {
    RunConfig c = small_config();
    CHECK(cell_dataset_seed(c, 0, 1) != cell_dataset_seed(c, 1, 1));
    c.shared_dataset = true;
    CHECK(cell_dataset_seed(c, 0, 1) == cell_dataset_seed(c, 1, 1));
    CHECK(cell_dataset_seed(c, 0, 1) != cell_dataset_seed(c, 0, 2));
  }

  TEST_CASE("uncertified references abort the sweep") {
    RunConfig c = small_config(LossTag::Poisson);
    c.alpha_grid = {1.0};
    c.trials = 1;
    SweepOptions o;
    o.reference.newton_iterations = 1;
    CHECK_THROWS_AS(run_sweep(c, o), NonCertified);
  }

  TEST_CASE("averaged iterate is tracked") {
    RunConfig c = small_config();
    c.track_average = true;
    c.alpha_grid = {1.0};
    const SweepResult r = run_sweep(c);
    for (const auto& rec : r.records) {
      CHECK(rec.average_final_gap.has_value());
    }
  }

  TEST_CASE("distance to the planted point never increases on easy problems") {
    for (const LossTag tag : {LossTag::AbsoluteLoss, LossTag::HalfspaceDist}) {
      GenSpec spec;
      spec.family = tag;
      spec.m = 300;
      spec.n = 20;
      spec.seed = 14;
      Dataset data = generate(spec);
      attach_reference(data, reference_optimum(data));
      const EmpiricalProblem problem(data);
      const Vector& x_star = *data.planted_optimum;
      for (const ModelKind kind : {ModelKind::Truncated, ModelKind::FullProx}) {
        for (int trial = 0; trial < 10; ++trial) {
          TrialSettings s;
          s.model = kind;
          s.schedule = {10.0, 0.6};
          s.k_max = 3000;
          s.epsilon = 0.0;
          double prev = INFINITY;
          bool monotone = true;
          s.observer = [&](std::int64_t, const Vector& x) {
            const double d = (x - x_star).norm();
            if (d > prev + 1e-12) monotone = false;
            prev = d;
          };
          RngStream sampler(15, "monotone-trial", {static_cast<std::uint64_t>(trial)});
          run_trial(problem, s, sampler);
          CHECK(monotone);
        }
      }
    }
  }

  TEST_CASE("run config validation") {
    RunConfig c = small_config();
    c.alpha_grid = {1.0, 0.1};
    CHECK_THROWS_AS(validate(c), ConfigError);
    c = small_config();
    c.k_max = 0;
    CHECK_THROWS_AS(validate(c), ConfigError);
    c = small_config();
    c.epsilon = 0.0;
    CHECK_THROWS_AS(validate(c), ConfigError);
    CHECK(default_alpha_grid().size() == 21);
    CHECK(default_alpha_grid().front() == doctest::Approx(1e-5));
    CHECK(default_alpha_grid().back() == doctest::Approx(1e5));
  }
}
