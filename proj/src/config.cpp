#include "asv/config.hpp"

#include <map>
#include <nlohmann/json.hpp>
#include <set>
#include <type_traits>

#include "asv/errors.hpp"
#include "asv/io.hpp"

namespace asv {

namespace {

using nlohmann::json;

constexpr const char* kFormat = "asv-run-config";

// Calls f(section, key, field) for every configurable field. Section "" is the
// document root.
template <class Cfg, class F>
void visit_fields(Cfg& c, F&& f) {
  f("", "seed", c.seed);
  f("", "output_dir", c.output_dir);
  f("", "vessel_params_file", c.vessel_params_file);

  auto& g = c.env.gen;
  f("gen", "n_obstacles", g.n_obstacles);
  f("gen", "n_waypoints_min", g.n_waypoints_min);
  f("gen", "n_waypoints_max", g.n_waypoints_max);
  f("gen", "path_length", g.path_length);
  f("gen", "mean_radius", g.mean_radius);
  f("gen", "offset_std", g.offset_std);
  f("gen", "vessel_width", g.vessel_width);

  auto& s = c.env.sensor;
  f("sensor", "n_rays", s.n_rays);
  f("sensor", "span", s.span);
  f("sensor", "range", s.range);
  f("sensor", "sectors", s.sectors);
  f("sensor", "width", s.width);

  auto& r = c.env.reward;
  f("reward", "gamma_e", r.gamma_e);
  f("reward", "gamma_theta", r.gamma_theta);
  f("reward", "gamma_x", r.gamma_x);
  f("reward", "epsilon_x", r.epsilon_x);
  f("reward", "alpha_r", r.alpha_r);
  f("reward", "r_collision", r.r_collision);
  f("reward", "alpha_lambda", r.alpha_lambda);
  f("reward", "beta_lambda", r.beta_lambda);

  auto& e = c.env;
  f("env", "step_size", e.step_size);
  f("env", "lookahead", e.lookahead);
  f("env", "gamma_omega", e.gamma_omega);
  f("env", "goal_radius", e.goal_radius);
  f("env", "reward_floor", e.reward_floor);
  f("env", "max_steps", e.max_steps);

  auto& p = c.ppo;
  f("ppo", "gamma", p.gamma);
  f("ppo", "gae_lambda", p.gae_lambda);
  f("ppo", "clip_eps", p.clip_eps);
  f("ppo", "c1", p.c1);
  f("ppo", "c2", p.c2);
  f("ppo", "learning_rate", p.learning_rate);
  f("ppo", "rollout_steps", p.rollout_steps);
  f("ppo", "workers", p.workers);
  f("ppo", "minibatch_size", p.minibatch_size);
  f("ppo", "epochs", p.epochs);
  f("ppo", "total_steps", p.total_steps);
  f("ppo", "normalize_advantages", p.normalize_advantages);

  f("train", "checkpoint_every", c.checkpoint_every);
  f("train", "cross_track_scale", c.cross_track_scale);
  f("eval", "threads", c.eval_threads);
}

template <class T>
void read_value(const json& v, T& out, const std::string& where) {
  if constexpr (std::is_same_v<T, bool>) {
    if (!v.is_boolean()) throw ParseError(where + " must be true or false");
    out = v.get<bool>();
  } else if constexpr (std::is_same_v<T, std::string>) {
    if (!v.is_string()) throw ParseError(where + " must be a string");
    out = v.get<std::string>();
  } else if constexpr (std::is_unsigned_v<T>) {
    if (!v.is_number_unsigned()) throw ParseError(where + " must be a non-negative integer");
    out = v.get<T>();
  } else if constexpr (std::is_integral_v<T>) {
    if (!v.is_number_integer()) throw ParseError(where + " must be an integer");
    out = v.get<T>();
  } else {
    if (!v.is_number()) throw ParseError(where + " must be a number");
    out = v.get<T>();
  }
}

}  // namespace

void RunConfig::finalize() {
  if (!vessel_params_file.empty()) env.vessel = load_vessel_params(vessel_params_file);
  if (checkpoint_every < 0) throw ConfigError("train.checkpoint_every must be >= 0");
  if (!(cross_track_scale > 0.0)) throw ConfigError("train.cross_track_scale must be > 0");
  if (eval_threads < 0) throw ConfigError("eval.threads must be >= 0");
  env.validate();
  ppo.validate();
}

RunConfig parse_run_config(const std::string& text, const std::string& source) {
  json doc;
  try {
    doc = json::parse(text);
  } catch (const json::parse_error& e) {
    throw ParseError(source + ": " + e.what());
  }
  if (!doc.is_object()) throw ParseError(source + ": run config must be a JSON object");
  if (doc.contains("format") && doc["format"] != kFormat)
    throw ParseError(source + ": not a run config (format must be \"" + kFormat + "\")");
  if (doc.contains("version")) {
    if (!doc["version"].is_number_integer() || doc["version"].get<int>() != kRunConfigVersion)
      throw UnsupportedVersionError(source + ": unsupported run config version " +
                                    doc["version"].dump());
  }

  std::map<std::string, std::set<std::string>> known;
  RunConfig cfg;
  visit_fields(cfg, [&](const char* section, const char* key, auto&) {
    known[section].insert(key);
  });
  for (const auto& [key, value] : doc.items()) {
    if (key == "format" || key == "version") continue;
    if (known[""].count(key)) continue;
    if (!known.count(key) || key.empty())
      throw ParseError(source + ": unknown key '" + key + "'");
    if (!value.is_object()) throw ParseError(source + ": section '" + key + "' must be an object");
    for (const auto& [sub, _] : value.items())
      if (!known[key].count(sub))
        throw ParseError(source + ": unknown key '" + key + "." + sub + "'");
  }

  visit_fields(cfg, [&](const std::string& section, const std::string& key, auto& field) {
    const json* v = nullptr;
    if (section.empty()) {
      if (doc.contains(key)) v = &doc[key];
    } else if (doc.contains(section) && doc[section].contains(key)) {
      v = &doc[section][key];
    }
    if (v) read_value(*v, field, source + ": '" + (section.empty() ? key : section + "." + key) + "'");
  });
  return cfg;
}

RunConfig load_run_config(const std::filesystem::path& file) {
  if (!std::filesystem::exists(file)) throw ParseError("config not found: " + file.string());
  return parse_run_config(read_file(file), file.string());
}

std::string run_config_to_json(const RunConfig& cfg) {
  json doc;
  doc["format"] = kFormat;
  doc["version"] = kRunConfigVersion;
  visit_fields(cfg, [&](const std::string& section, const std::string& key, const auto& field) {
    if (section.empty())
      doc[key] = field;
    else
      doc[section][key] = field;
  });
  return doc.dump(2) + "\n";
}

}  // namespace asv
