#include "aprox/config.hpp"

#include <chrono>
#include <ctime>
#include <fstream>
#include <initializer_list>
#include <sstream>

#include "aprox/errors.hpp"

#ifndef APROX_VERSION
#define APROX_VERSION "0.1.0"
#endif

namespace aprox {
namespace {

using nlohmann::json;

void require_object(const json& j, const std::string& where,
                    std::initializer_list<std::string_view> allowed) {
  if (!j.is_object()) throw ConfigError(where + ": expected an object");
  for (const auto& item : j.items()) {
    bool known = false;
    for (const std::string_view key : allowed) known = known || key == item.key();
    if (!known) throw ConfigError(where + ": unknown key '" + item.key() + "'");
  }
}

template <typename T>
void read(const json& j, const char* key, T& out, const std::string& where) {
  if (!j.contains(key)) return;
  try {
    out = j.at(key).get<T>();
  } catch (const json::exception& e) {
    throw ConfigError(where + "." + key + ": " + e.what());
  }
}

}  // namespace

json to_json(const GenSpec& spec) {
  return json{{"family", to_string(spec.family)},
              {"m", spec.m},
              {"n", spec.n},
              {"kappa", spec.kappa},
              {"sigma", spec.sigma},
              {"p", spec.p},
              {"K", spec.K},
              {"seed", spec.seed},
              {"interpolation", spec.interpolation},
              {"margin_scale", spec.margin_scale}};
}

json to_json(const RunConfig& config) {
  json models = json::array();
  for (const ModelKind kind : config.models) models.push_back(to_string(kind));
  return json{{"experiment_id", config.experiment_id},
              {"gen_spec", to_json(config.gen_spec)},
              {"model", models},
              {"schedule", {{"alpha0", config.schedule.alpha0}, {"beta", config.schedule.beta}}},
              {"epsilon", config.epsilon},
              {"k_max", config.k_max},
              {"trials", config.trials},
              {"alpha_grid", config.alpha_grid},
              {"track_average", config.track_average},
              {"eval_stride", config.eval_stride},
              {"master_seed", config.master_seed},
              {"shared_dataset", config.shared_dataset},
              {"record_timing", config.record_timing}};
}

GenSpec gen_spec_from_json(const json& j) {
  const std::string where = "gen_spec";
  require_object(j, where, {"family", "m", "n", "kappa", "sigma", "p", "K", "seed", "interpolation",
                            "margin_scale"});
  GenSpec spec;
  if (j.contains("family")) {
    std::string family;
    read(j, "family", family, where);
    spec.family = parse_loss_tag(family);
  }
  read(j, "m", spec.m, where);
  read(j, "n", spec.n, where);
  read(j, "kappa", spec.kappa, where);
  read(j, "sigma", spec.sigma, where);
  read(j, "p", spec.p, where);
  read(j, "K", spec.K, where);
  read(j, "seed", spec.seed, where);
  read(j, "interpolation", spec.interpolation, where);
  read(j, "margin_scale", spec.margin_scale, where);
  validate(spec);
  return spec;
}

RunConfig run_config_from_json(const json& j) {
  const std::string where = "config";
  require_object(j, where, {"experiment_id", "gen_spec", "model", "schedule", "epsilon", "k_max",
                            "trials", "alpha_grid", "track_average", "eval_stride", "master_seed",
                            "shared_dataset", "record_timing"});
  RunConfig config = default_run_config();
  read(j, "experiment_id", config.experiment_id, where);
  if (j.contains("gen_spec")) config.gen_spec = gen_spec_from_json(j.at("gen_spec"));
  if (j.contains("model")) {
    const json& model = j.at("model");
    config.models.clear();
    if (model.is_string()) {
      config.models.push_back(parse_model_kind(model.get<std::string>()));
    } else if (model.is_array()) {
      for (const json& name : model) {
        if (!name.is_string()) throw ConfigError("config.model: entries must be strings");
        config.models.push_back(parse_model_kind(name.get<std::string>()));
      }
    } else {
      throw ConfigError("config.model: expected a name or a list of names");
    }
  }
  if (j.contains("schedule")) {
    const json& s = j.at("schedule");
    require_object(s, "config.schedule", {"alpha0", "beta"});
    read(s, "alpha0", config.schedule.alpha0, "config.schedule");
    read(s, "beta", config.schedule.beta, "config.schedule");
  }
  read(j, "epsilon", config.epsilon, where);
  read(j, "k_max", config.k_max, where);
  read(j, "trials", config.trials, where);
  read(j, "alpha_grid", config.alpha_grid, where);
  read(j, "track_average", config.track_average, where);
  read(j, "eval_stride", config.eval_stride, where);
  read(j, "master_seed", config.master_seed, where);
  read(j, "shared_dataset", config.shared_dataset, where);
  read(j, "record_timing", config.record_timing, where);
  validate(config);
  return config;
}

RunConfig parse_run_config(const std::string& text) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::parse_error& e) {
    throw ConfigError(std::string("malformed JSON: ") + e.what());
  }
  if (j.is_object() && j.contains("config") && j.contains("version")) return run_config_from_json(j.at("config"));
  return run_config_from_json(j);
}

RunConfig load_run_config(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open config '" + path + "'");
  std::ostringstream buffer;
  buffer << in.rdbuf();
  return parse_run_config(buffer.str());
}

std::string version_string() { return APROX_VERSION; }

json make_metadata(const RunConfig& config, const std::string& started_at) {
  return json{{"config", to_json(config)},
              {"version", version_string()},
              {"started_at", started_at},
              {"seeds", {{"master", config.master_seed}}}};
}

std::string rfc3339_now() {
  const std::time_t now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  std::tm utc{};
  gmtime_r(&now, &utc);
  char buffer[32];
  std::strftime(buffer, sizeof(buffer), "%Y-%m-%dT%H:%M:%SZ", &utc);
  return buffer;
}

}  // namespace aprox
