#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "arbitrage/errors.hpp"

namespace arbitrage {

// Language codes are lowercase ISO-639-ish tags: two or three of [a-z].
[[nodiscard]] inline bool is_valid_language(std::string_view code) {
  if (code.size() < 2 || code.size() > 3) return false;
  for (char c : code) {
    if (c < 'a' || c > 'z') return false;
  }
  return true;
}

inline void require_valid_language(std::string_view code, std::string_view where) {
  if (!is_valid_language(code)) {
    throw ConfigError("invalid language code \"" + std::string(code) + "\" in " +
                      std::string(where));
  }
}

struct Prompt {
  std::string id;
  std::string language;
  std::string text;
};

// One teacher's answer to one prompt.
struct Completion {
  std::string prompt_id;
  std::string teacher_id;
  std::string text;
};

// Reward-model scores for every candidate completion of one prompt, in pool
// order. Parallel entries rather than a map so serialization is order-stable.
struct RewardEntry {
  std::string teacher_id;
  double score = 0.0;
};

struct RewardVector {
  std::string prompt_id;
  std::vector<RewardEntry> entries;
};

enum class Strategy { kFixed, kRandom, kReward, kLearned };

[[nodiscard]] inline std::string_view to_string(Strategy s) {
  switch (s) {
    case Strategy::kFixed: return "fixed";
    case Strategy::kRandom: return "random";
    case Strategy::kReward: return "reward";
    case Strategy::kLearned: return "learned";
  }
  return "unknown";
}

[[nodiscard]] inline Strategy strategy_from_string(std::string_view s) {
  if (s == "fixed") return Strategy::kFixed;
  if (s == "random") return Strategy::kRandom;
  if (s == "reward") return Strategy::kReward;
  if (s == "learned") return Strategy::kLearned;
  throw ConfigError("unknown strategy \"" + std::string(s) +
                    "\" (expected fixed|random|reward|learned)");
}

// The completion a routing strategy picked for one prompt. reward_vector and
// chosen_reward are populated only when the strategy scored candidates.
struct RoutedSample {
  Prompt prompt;
  Completion completion;
  std::string teacher_id;
  Strategy strategy = Strategy::kFixed;
  std::optional<RewardVector> reward_vector;
  std::optional<double> chosen_reward;
};

struct Dataset {
  std::vector<RoutedSample> samples;
  std::uint64_t run_seed = 0;
  std::string config_digest;
};

[[nodiscard]] inline std::map<std::string, std::vector<RoutedSample>>
partition_by_language(const Dataset& dataset) {
  std::map<std::string, std::vector<RoutedSample>> out;
  for (const auto& s : dataset.samples) out[s.prompt.language].push_back(s);
  return out;
}

}  // namespace arbitrage
