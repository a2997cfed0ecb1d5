#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <set>
#include <string>
#include <thread>
#include <vector>

#include "json.hpp"

#include "arbitrage/core.hpp"
#include "arbitrage/errors.hpp"
#include "arbitrage/io.hpp"
#include "arbitrage/rng.hpp"
#include "arbitrage/router.hpp"
#include "arbitrage/routing.hpp"
#include "arbitrage/teachers.hpp"

namespace arbitrage {

// Everything one run needs, parsed from a single JSON config file plus
// command-line overrides. `digest` is a hash of the canonicalized effective
// config (after overrides) and is stamped into every output.
struct RunConfig {
  std::uint64_t run_seed = 0;
  std::vector<std::string> languages;
  std::vector<TeacherSpec> teachers;

  Strategy strategy = Strategy::kRandom;
  FixedRoutingTable table;
  bool has_table = false;
  std::string router_path;

  std::string reward_kind = "simulated";  // simulated | remote
  std::string reward_endpoint;
  std::string reward_template;
  std::string reward_response_path;

  std::string judge_kind = "simulated";  // simulated | remote
  std::string judge_endpoint;
  std::string judge_template;
  std::string judge_response_path;

  std::string prompts_path;
  std::string dataset_out;
  std::string reports_dir;

  double failure_threshold = 0.1;
  double judge_margin = 0.05;
  double mtld_threshold = 0.72;
  double temperature = 1.0;

  TrainingConfig training;
  std::size_t workers = 0;  // 0 = logical CPU count

  std::string digest;

  [[nodiscard]] std::size_t resolve_workers() const {
    if (workers > 0) return workers;
    const unsigned hw = std::thread::hardware_concurrency();
    return hw == 0 ? 1 : hw;
  }
};

namespace detail {

using nlohmann::json;

inline const json& require_key(const json& j, const char* key, const char* where) {
  if (!j.contains(key)) {
    throw ConfigError(std::string("config: missing \"") + key + "\" in " + where);
  }
  return j.at(key);
}

template <typename T>
T get_or(const json& j, const char* key, T fallback) {
  if (!j.contains(key)) return fallback;
  try {
    return j.at(key).get<T>();
  } catch (const json::exception&) {
    throw ConfigError(std::string("config: bad value for \"") + key + "\"");
  }
}

inline http::HttpOptions parse_http_options(const json& j) {
  http::HttpOptions opt;
  opt.max_attempts = get_or<int>(j, "max_attempts", opt.max_attempts);
  opt.backoff_initial_ms = get_or<int>(j, "backoff_initial_ms", opt.backoff_initial_ms);
  opt.timeout_seconds = get_or<int>(j, "timeout_seconds", opt.timeout_seconds);
  if (opt.max_attempts < 1) throw ConfigError("config: max_attempts must be >= 1");
  return opt;
}

inline TeacherSpec parse_teacher(const json& j, const std::vector<std::string>& languages) {
  TeacherSpec t;
  t.id = require_key(j, "id", "teacher").get<std::string>();
  if (t.id.empty()) throw ConfigError("config: teacher with empty id");
  const std::string kind = require_key(j, "kind", "teacher").get<std::string>();
  if (kind == "simulated") {
    t.kind = TeacherKind::kSimulated;
  } else if (kind == "remote") {
    t.kind = TeacherKind::kRemote;
  } else {
    throw ConfigError("config: teacher \"" + t.id + "\" has unknown kind \"" + kind +
                      "\"");
  }
  if (j.contains("supported_languages")) {
    for (const auto& lang : j.at("supported_languages")) {
      const std::string code = lang.get<std::string>();
      require_valid_language(code, "teacher \"" + t.id + "\"");
      t.supported_languages.insert(code);
    }
  }
  if (t.kind == TeacherKind::kRemote) {
    t.endpoint = require_key(j, "endpoint", "remote teacher").get<std::string>();
    t.request_template =
        require_key(j, "request_template", "remote teacher").get<std::string>();
    t.response_path =
        require_key(j, "response_path", "remote teacher").get<std::string>();
    t.http = parse_http_options(j);
  } else {
    const json& profile = require_key(j, "profile", "simulated teacher");
    const json& quality = require_key(profile, "quality", "simulated profile");
    for (const auto& [lang, value] : quality.items()) {
      require_valid_language(lang, "quality map of teacher \"" + t.id + "\"");
      const double q = value.get<double>();
      if (q < 0.0 || q > 1.0) {
        throw ConfigError("config: quality[" + lang + "] of teacher \"" + t.id +
                          "\" must be in [0,1]");
      }
      t.profile.quality[lang] = q;
    }
    t.profile.verbosity = get_or<double>(profile, "verbosity", 100.0);
    t.profile.noise_sigma = get_or<double>(profile, "noise_sigma", 0.0);
    if (!(t.profile.verbosity > 0.0)) {
      throw ConfigError("config: verbosity of teacher \"" + t.id +
                        "\" must be positive");
    }
    if (t.profile.noise_sigma < 0.0) {
      throw ConfigError("config: noise_sigma of teacher \"" + t.id +
                        "\" must be nonnegative");
    }
    // every configured language the teacher can serve needs a quality entry
    for (const auto& lang : languages) {
      if (t.supports(lang) && !t.profile.quality.count(lang)) {
        throw ConfigError("config: teacher \"" + t.id +
                          "\" is missing a quality entry for \"" + lang + "\"");
      }
    }
  }
  return t;
}

}  // namespace detail

// Canonical JSON (sorted keys, minimal separators) of the effective config,
// hashed to a 16-hex-digit digest.
[[nodiscard]] inline std::string config_digest(const RunConfig& cfg) {
  nlohmann::json j;
  j["run_seed"] = cfg.run_seed;
  j["languages"] = cfg.languages;
  nlohmann::json teachers = nlohmann::json::array();
  for (const auto& t : cfg.teachers) {
    nlohmann::json tj;
    tj["id"] = t.id;
    tj["kind"] = t.kind == TeacherKind::kSimulated ? "simulated" : "remote";
    tj["supported_languages"] = t.supported_languages;
    if (t.kind == TeacherKind::kRemote) {
      tj["endpoint"] = t.endpoint;
      tj["request_template"] = t.request_template;
      tj["response_path"] = t.response_path;
    } else {
      tj["quality"] = t.profile.quality;
      tj["verbosity"] = t.profile.verbosity;
      tj["noise_sigma"] = t.profile.noise_sigma;
    }
    teachers.push_back(tj);
  }
  j["teachers"] = teachers;
  j["strategy"] = std::string(to_string(cfg.strategy));
  if (cfg.has_table) j["table"] = cfg.table.language_to_teacher;
  j["router_path"] = cfg.router_path;
  j["reward_kind"] = cfg.reward_kind;
  j["judge_kind"] = cfg.judge_kind;
  j["judge_margin"] = cfg.judge_margin;
  j["failure_threshold"] = cfg.failure_threshold;
  j["mtld_threshold"] = cfg.mtld_threshold;
  j["temperature"] = cfg.temperature;
  j["training"] = {{"learning_rate", cfg.training.learning_rate},
                   {"epochs", cfg.training.epochs},
                   {"batch_size", cfg.training.batch_size},
                   {"l2", cfg.training.l2}};
  j["prompts"] = cfg.prompts_path;

  char buf[17];
  std::snprintf(buf, sizeof(buf), "%016llx",
                static_cast<unsigned long long>(fnv1a64(j.dump())));
  return std::string(buf);
}

[[nodiscard]] inline RunConfig load_config(const std::string& path) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(io::read_text_file(path));
  } catch (const nlohmann::json::parse_error& e) {
    throw ConfigError("config file " + path + ": malformed JSON (" + e.what() + ")");
  }
  if (!j.is_object()) throw ConfigError("config file " + path + ": expected an object");

  RunConfig cfg;
  cfg.run_seed = detail::get_or<std::uint64_t>(j, "run_seed", 0);

  for (const auto& lang : detail::require_key(j, "languages", "config")) {
    const std::string code = lang.get<std::string>();
    require_valid_language(code, "languages list");
    cfg.languages.push_back(code);
  }
  if (cfg.languages.empty()) throw ConfigError("config: languages list is empty");
  {
    std::set<std::string> unique(cfg.languages.begin(), cfg.languages.end());
    if (unique.size() != cfg.languages.size()) {
      throw ConfigError("config: duplicate entries in languages list");
    }
  }

  const auto& teachers = detail::require_key(j, "teachers", "config");
  if (!teachers.is_array() || teachers.empty()) {
    throw ConfigError("config: teachers must be a nonempty array");
  }
  std::set<std::string> teacher_ids;
  for (const auto& tj : teachers) {
    TeacherSpec t = detail::parse_teacher(tj, cfg.languages);
    if (!teacher_ids.insert(t.id).second) {
      throw ConfigError("config: duplicate teacher id \"" + t.id + "\"");
    }
    cfg.teachers.push_back(std::move(t));
  }

  if (j.contains("routing")) {
    const auto& r = j.at("routing");
    cfg.strategy = strategy_from_string(
        detail::get_or<std::string>(r, "strategy", "random"));
    if (r.contains("table")) {
      for (const auto& [lang, teacher] : r.at("table").items()) {
        require_valid_language(lang, "routing table");
        cfg.table.language_to_teacher[lang] = teacher.get<std::string>();
      }
      cfg.has_table = true;
    }
    cfg.router_path = detail::get_or<std::string>(r, "router_path", "");
  }

  if (j.contains("reward")) {
    const auto& r = j.at("reward");
    cfg.reward_kind = detail::get_or<std::string>(r, "kind", "simulated");
    if (cfg.reward_kind == "remote") {
      cfg.reward_endpoint = detail::require_key(r, "endpoint", "reward").get<std::string>();
      cfg.reward_template =
          detail::require_key(r, "request_template", "reward").get<std::string>();
      cfg.reward_response_path =
          detail::require_key(r, "response_path", "reward").get<std::string>();
    } else if (cfg.reward_kind != "simulated") {
      throw ConfigError("config: reward kind must be simulated or remote");
    }
  }

  if (j.contains("judge")) {
    const auto& r = j.at("judge");
    cfg.judge_kind = detail::get_or<std::string>(r, "kind", "simulated");
    if (cfg.judge_kind == "remote") {
      cfg.judge_endpoint = detail::require_key(r, "endpoint", "judge").get<std::string>();
      cfg.judge_template =
          detail::require_key(r, "request_template", "judge").get<std::string>();
      cfg.judge_response_path =
          detail::require_key(r, "response_path", "judge").get<std::string>();
    } else if (cfg.judge_kind != "simulated") {
      throw ConfigError("config: judge kind must be simulated or remote");
    }
  }

  if (j.contains("paths")) {
    const auto& p = j.at("paths");
    cfg.prompts_path = detail::get_or<std::string>(p, "prompts", "");
    cfg.dataset_out = detail::get_or<std::string>(p, "dataset_out", "dataset.jsonl");
    cfg.reports_dir = detail::get_or<std::string>(p, "reports_dir", ".");
  }

  if (j.contains("thresholds")) {
    const auto& t = j.at("thresholds");
    cfg.failure_threshold = detail::get_or<double>(t, "failure_rate", 0.1);
    cfg.judge_margin = detail::get_or<double>(t, "judge_margin", 0.05);
    cfg.mtld_threshold = detail::get_or<double>(t, "mtld_threshold", 0.72);
    cfg.temperature = detail::get_or<double>(t, "temperature", 1.0);
    if (cfg.failure_threshold < 0.0 || cfg.failure_threshold > 1.0) {
      throw ConfigError("config: failure_rate must be in [0,1]");
    }
    if (cfg.judge_margin < 0.0) throw ConfigError("config: judge_margin must be >= 0");
    if (!(cfg.mtld_threshold > 0.0 && cfg.mtld_threshold < 1.0)) {
      throw ConfigError("config: mtld_threshold must be in (0,1)");
    }
    if (!(cfg.temperature > 0.0)) {
      throw ConfigError("config: temperature must be positive");
    }
  }

  if (j.contains("training")) {
    const auto& t = j.at("training");
    cfg.training.learning_rate = detail::get_or<double>(t, "learning_rate", 0.1);
    cfg.training.epochs = detail::get_or<std::size_t>(t, "epochs", 50);
    cfg.training.batch_size = detail::get_or<std::size_t>(t, "batch_size", 64);
    cfg.training.l2 = detail::get_or<double>(t, "l2", 1e-4);
    if (!(cfg.training.learning_rate > 0.0)) {
      throw ConfigError("config: learning_rate must be positive");
    }
    if (cfg.training.epochs == 0 || cfg.training.batch_size == 0) {
      throw ConfigError("config: epochs and batch_size must be positive");
    }
    if (cfg.training.l2 < 0.0) throw ConfigError("config: l2 must be nonnegative");
  }
  cfg.workers = detail::get_or<std::size_t>(j, "workers", 0);

  if (!cfg.prompts_path.empty() && !std::filesystem::exists(cfg.prompts_path)) {
    throw ConfigError("config: prompts file does not exist: " + cfg.prompts_path);
  }
  if (cfg.strategy == Strategy::kFixed) {
    if (!cfg.has_table) throw ConfigError("config: fixed strategy requires a routing table");
    validate_table(cfg.table, cfg.teachers, cfg.languages);
  }
  if (cfg.strategy == Strategy::kLearned && cfg.router_path.empty()) {
    throw ConfigError("config: learned strategy requires router_path");
  }

  cfg.training.temperature = cfg.temperature;
  cfg.training.seed = cfg.run_seed;
  cfg.digest = config_digest(cfg);
  return cfg;
}

struct Overrides {
  std::optional<std::uint64_t> seed;
  std::optional<std::string> strategy;
  std::optional<std::string> out;
  std::optional<std::size_t> workers;
};

// Flags win over the file; the digest is recomputed so outputs always name
// the effective configuration.
inline void apply_overrides(RunConfig& cfg, const Overrides& o) {
  if (o.seed) {
    cfg.run_seed = *o.seed;
    cfg.training.seed = *o.seed;
  }
  if (o.strategy) {
    cfg.strategy = strategy_from_string(*o.strategy);
    if (cfg.strategy == Strategy::kFixed) {
      if (!cfg.has_table) {
        throw ConfigError("config: fixed strategy requires a routing table");
      }
      validate_table(cfg.table, cfg.teachers, cfg.languages);
    }
    if (cfg.strategy == Strategy::kLearned && cfg.router_path.empty()) {
      throw ConfigError("config: learned strategy requires router_path");
    }
  }
  if (o.out) cfg.dataset_out = *o.out;
  if (o.workers) cfg.workers = *o.workers;
  cfg.digest = config_digest(cfg);
}

}  // namespace arbitrage
