#include <string>

#include "aprox/config.hpp"
#include "aprox/errors.hpp"
#include "doctest.h"

using namespace aprox;

TEST_SUITE("config") {
  TEST_CASE("run config round-trips through JSON") {
    RunConfig c = default_run_config();
    c.experiment_id = "round";
    c.gen_spec.family = LossTag::MulticlassHinge;
    c.gen_spec.K = 4;
    c.gen_spec.p = 0.1;
    c.models = {ModelKind::Truncated, ModelKind::Bundle2};
    c.schedule = {2.0, 0.7};
    c.alpha_grid = {0.1, 0.30000000000000004, 7.0};
    c.master_seed = 0xffffffffffffffffull;
    const RunConfig back = run_config_from_json(nlohmann::json::parse(to_json(c).dump()));
    CHECK(to_json(back) == to_json(c));
    CHECK(back.alpha_grid[1] == 0.30000000000000004);
    CHECK(back.master_seed == c.master_seed);
  }

  TEST_CASE("defaults fill missing keys") {
    const RunConfig c = parse_run_config(R"({"experiment_id": "d"})");
    CHECK(c.k_max == 50000);
    CHECK(c.trials == 40);
    CHECK(c.eval_stride == 10);
    CHECK(c.schedule.beta == 0.6);
    CHECK(c.alpha_grid.size() == 21);
    CHECK(c.models.size() == 4);
    CHECK(!c.record_timing);
  }

  TEST_CASE("model accepts a single name") {
    const RunConfig c = parse_run_config(R"({"model": "FullProx"})");
    REQUIRE(c.models.size() == 1);
    CHECK(c.models[0] == ModelKind::FullProx);
  }

  TEST_CASE("rejections") {
    CHECK_THROWS_AS(parse_run_config(R"({"k_max": 10, "bogus": 1})"), ConfigError);
    CHECK_THROWS_AS(parse_run_config(R"({"gen_spec": {"family": "Huber"}})"), ConfigError);
    CHECK_THROWS_AS(parse_run_config(R"({"gen_spec": {"kappa": 0.5}})"), ConfigError);
    CHECK_THROWS_AS(parse_run_config(R"({"epsilon": "small"})"), ConfigError);
    CHECK_THROWS_AS(parse_run_config(R"({"alpha_grid": [3, 1]})"), ConfigError);
    try {
      parse_run_config("{\n  \"k_max\": 10,\n  oops\n}");
      FAIL("expected ConfigError");
    } catch (const ConfigError& e) {
      const std::string what = e.what();
      CHECK(what.find("malformed JSON") != std::string::npos);
      CHECK(what.find("line 3") != std::string::npos);
    }
  }

  TEST_CASE("metadata documents parse back to their config") {
    RunConfig c = default_run_config();
    c.experiment_id = "meta";
    c.master_seed = 99;
    const nlohmann::json meta = make_metadata(c, "2026-01-01T00:00:00Z");
    CHECK(meta["seeds"]["master"] == 99);
    CHECK(meta["version"].get<std::string>().rfind("0.1.0", 0) == 0);
    CHECK(to_json(parse_run_config(meta.dump())) == to_json(c));
    const std::string now = rfc3339_now();
    CHECK(now.size() == 20);
    CHECK(now.back() == 'Z');
  }

  TEST_CASE("missing config file is an I/O error") {
    CHECK_THROWS_AS(load_run_config("/nonexistent/config.json"), IoError);
  }
}
