#pragma once

#include <fstream>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <string_view>
#include <unordered_set>
#include <vector>

#include "json.hpp"

#include "arbitrage/core.hpp"
#include "arbitrage/errors.hpp"

namespace arbitrage::io {

using ordered_json = nlohmann::ordered_json;

[[nodiscard]] inline std::string trim(std::string_view s) {
  const char* ws = " \t\r\n";
  const auto b = s.find_first_not_of(ws);
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(ws);
  return std::string(s.substr(b, e - b + 1));
}

[[nodiscard]] inline std::string read_text_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ConfigError("cannot open file: " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

inline void write_text_file(const std::string& path, std::string_view content) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw ConfigError("cannot write file: " + path);
  out << content;
  if (!out) throw ConfigError("write failed: " + path);
}

namespace detail {

inline ordered_json parse_line(const std::string& line, const std::string& path,
                               std::size_t line_no) {
  ordered_json j;
  try {
    j = ordered_json::parse(line);
  } catch (const nlohmann::json::parse_error& e) {
    throw ConfigError(path + ":" + std::to_string(line_no) +
                      ": malformed JSON line (" + e.what() + ")");
  }
  if (!j.is_object()) {
    throw ConfigError(path + ":" + std::to_string(line_no) +
                      ": expected a JSON object");
  }
  return j;
}

inline std::string require_string(const ordered_json& j, const char* key,
                                  const std::string& path, std::size_t line_no) {
  if (!j.contains(key) || !j.at(key).is_string()) {
    throw ConfigError(path + ":" + std::to_string(line_no) +
                      ": missing or non-string field \"" + key + "\"");
  }
  return j.at(key).get<std::string>();
}

}  // namespace detail

// Reads a prompts file: one JSON object per line with fields id, language,
// text. Duplicate ids, invalid/unconfigured languages, and blank texts are
// rejected with the offending line number.
[[nodiscard]] inline std::vector<Prompt> load_prompts(
    const std::string& path,
    const std::optional<std::set<std::string>>& allowed_languages = std::nullopt) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ConfigError("cannot open prompts file: " + path);

  std::vector<Prompt> prompts;
  std::unordered_set<std::string> seen_ids;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (trim(line).empty()) continue;
    const ordered_json j = detail::parse_line(line, path, line_no);
    Prompt p;
    p.id = detail::require_string(j, "id", path, line_no);
    p.language = detail::require_string(j, "language", path, line_no);
    p.text = detail::require_string(j, "text", path, line_no);

    if (p.id.empty()) {
      throw ConfigError(path + ":" + std::to_string(line_no) + ": empty prompt id");
    }
    if (!seen_ids.insert(p.id).second) {
      throw ConfigError(path + ":" + std::to_string(line_no) +
                        ": duplicate prompt id \"" + p.id + "\"");
    }
    if (!is_valid_language(p.language)) {
      throw ConfigError(path + ":" + std::to_string(line_no) +
                        ": invalid language code \"" + p.language + "\"");
    }
    if (allowed_languages && !allowed_languages->count(p.language)) {
      throw ConfigError(path + ":" + std::to_string(line_no) + ": language \"" +
                        p.language + "\" not in the configured language set");
    }
    if (trim(p.text).empty()) {
      throw ConfigError(path + ":" + std::to_string(line_no) +
                        ": prompt text is empty (id \"" + p.id + "\")");
    }
    prompts.push_back(std::move(p));
  }
  return prompts;
}

[[nodiscard]] inline ordered_json sample_to_json(const RoutedSample& s) {
  ordered_json j;
  j["prompt_id"] = s.prompt.id;
  j["language"] = s.prompt.language;
  j["prompt"] = s.prompt.text;
  j["completion"] = s.completion.text;
  j["teacher_id"] = s.teacher_id;
  j["strategy"] = std::string(to_string(s.strategy));
  if (s.reward_vector) {
    ordered_json arr = ordered_json::array();
    for (const auto& e : s.reward_vector->entries) {
      arr.push_back({{"teacher_id", e.teacher_id}, {"score", e.score}});
    }
    j["reward_vector"] = std::move(arr);
  } else {
    j["reward_vector"] = nullptr;
  }
  if (s.chosen_reward) {
    j["chosen_reward"] = *s.chosen_reward;
  } else {
    j["chosen_reward"] = nullptr;
  }
  return j;
}

// One JSON line per sample, in dataset order. run_seed and config_digest go
// to a sidecar meta file so the dataset file itself stays pure rows.
inline void save_dataset(const std::string& path, const Dataset& dataset) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw ConfigError("cannot write dataset file: " + path);
  for (const auto& s : dataset.samples) {
    out << sample_to_json(s).dump() << '\n';
  }
  if (!out) throw ConfigError("write failed: " + path);

  ordered_json meta;
  meta["run_seed"] = dataset.run_seed;
  meta["config_digest"] = dataset.config_digest;
  write_text_file(path + ".meta.json", meta.dump() + "\n");
}

[[nodiscard]] inline Dataset load_dataset(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ConfigError("cannot open dataset file: " + path);

  Dataset ds;
  if (std::ifstream meta_in(path + ".meta.json", std::ios::binary); meta_in) {
    try {
      const auto meta = ordered_json::parse(meta_in);
      if (meta.contains("run_seed") && meta["run_seed"].is_number_unsigned()) {
        ds.run_seed = meta["run_seed"].get<std::uint64_t>();
      }
      if (meta.contains("config_digest") && meta["config_digest"].is_string()) {
        ds.config_digest = meta["config_digest"].get<std::string>();
      }
    } catch (const nlohmann::json::parse_error& e) {
      throw ConfigError(path + ".meta.json: malformed JSON (" + std::string(e.what()) +
                        ")");
    }
  }
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (trim(line).empty()) continue;
    const ordered_json j = detail::parse_line(line, path, line_no);
    RoutedSample s;
    s.prompt.id = detail::require_string(j, "prompt_id", path, line_no);
    s.prompt.language = detail::require_string(j, "language", path, line_no);
    s.prompt.text = detail::require_string(j, "prompt", path, line_no);
    s.completion.prompt_id = s.prompt.id;
    s.completion.teacher_id = detail::require_string(j, "teacher_id", path, line_no);
    s.completion.text = detail::require_string(j, "completion", path, line_no);
    s.teacher_id = s.completion.teacher_id;
    s.strategy =
        strategy_from_string(detail::require_string(j, "strategy", path, line_no));

    if (!j.contains("reward_vector") || !j.contains("chosen_reward")) {
      throw ConfigError(path + ":" + std::to_string(line_no) +
                        ": missing reward_vector or chosen_reward field");
    }
    const auto& rv = j.at("reward_vector");
    if (rv.is_array()) {
      RewardVector vec;
      vec.prompt_id = s.prompt.id;
      for (const auto& e : rv) {
        if (!e.is_object() || !e.contains("teacher_id") || !e.contains("score") ||
            !e.at("score").is_number()) {
          throw ConfigError(path + ":" + std::to_string(line_no) +
                            ": malformed reward_vector entry");
        }
        vec.entries.push_back({e.at("teacher_id").get<std::string>(),
                               e.at("score").get<double>()});
      }
      s.reward_vector = std::move(vec);
    } else if (!rv.is_null()) {
      throw ConfigError(path + ":" + std::to_string(line_no) +
                        ": reward_vector must be an array or null");
    }
    const auto& cr = j.at("chosen_reward");
    if (cr.is_number()) {
      s.chosen_reward = cr.get<double>();
    } else if (!cr.is_null()) {
      throw ConfigError(path + ":" + std::to_string(line_no) +
                        ": chosen_reward must be a number or null");
    }
    ds.samples.push_back(std::move(s));
  }
  return ds;
}

}  // namespace arbitrage::io
