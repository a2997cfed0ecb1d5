#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "arbitrage/core.hpp"
#include "arbitrage/errors.hpp"
#include "arbitrage/parallel.hpp"
#include "arbitrage/rewards.hpp"
#include "arbitrage/rng.hpp"
#include "arbitrage/router.hpp"
#include "arbitrage/teachers.hpp"

namespace arbitrage {

struct FixedRoutingTable {
  std::map<std::string, std::string> language_to_teacher;
};

// Every configured language must be mapped, and every mapped teacher must
// exist in the pool.
inline void validate_table(const FixedRoutingTable& table,
                           const std::vector<TeacherSpec>& pool,
                           const std::vector<std::string>& languages) {
  for (const auto& lang : languages) {
    if (!table.language_to_teacher.count(lang)) {
      throw ConfigError("routing table has no teacher for language \"" + lang + "\"");
    }
  }
  for (const auto& [lang, teacher_id] : table.language_to_teacher) {
    bool found = false;
    for (const auto& t : pool) {
      if (t.id == teacher_id) {
        found = true;
        break;
      }
    }
    if (!found) {
      throw ConfigError("routing table maps \"" + lang + "\" to unknown teacher \"" +
                        teacher_id + "\"");
    }
  }
}

[[nodiscard]] inline const TeacherSpec& find_teacher(
    const std::vector<TeacherSpec>& pool, const std::string& teacher_id) {
  for (const auto& t : pool) {
    if (t.id == teacher_id) return t;
  }
  throw ConfigError("teacher \"" + teacher_id + "\" not found in pool");
}

[[nodiscard]] inline std::string route_fixed(const FixedRoutingTable& table,
                                             const Prompt& prompt) {
  const auto it = table.language_to_teacher.find(prompt.language);
  if (it == table.language_to_teacher.end()) {
    throw RoutingError("no fixed route for language \"" + prompt.language + "\"");
  }
  return it->second;
}

// Uniform draw over the teachers eligible for the prompt's language, seeded
// per prompt so concurrency and ordering never matter.
[[nodiscard]] inline std::string route_random(const std::vector<TeacherSpec>& pool,
                                              const Prompt& prompt,
                                              std::uint64_t run_seed) {
  if (pool.empty()) throw ConfigError("teacher pool is empty");
  std::vector<std::size_t> eligible;
  for (std::size_t k = 0; k < pool.size(); ++k) {
    if (pool[k].supports(prompt.language)) eligible.push_back(k);
  }
  if (eligible.empty()) {
    throw RoutingError("no eligible teacher for language \"" + prompt.language + "\"");
  }
  SeededRng rng(derive_subseed(derive_prompt_seed(run_seed, prompt.id), "route"));
  return pool[eligible[rng.next_below(eligible.size())]].id;
}

struct RewardRouteResult {
  std::string teacher_id;
  Completion completion;
  RewardVector rewards;
  double chosen_reward = 0.0;
};

// Generates from every eligible teacher, scores everything, returns the
// argmax. Ties break to the lowest pool index.
[[nodiscard]] inline RewardRouteResult route_reward_based(
    const std::vector<TeacherSpec>& pool, const Prompt& prompt,
    std::uint64_t run_seed, const Scorer& scorer) {
  const FanoutResult fan = generate_all(pool, prompt, run_seed);
  std::vector<GenerationResult> ok;
  ok.reserve(fan.results.size());
  for (const auto& r : fan.results) {
    if (r.backend_status == BackendStatus::kOk) ok.push_back(r);
  }
  const RewardVector rewards = score_all(scorer, prompt, ok);

  std::size_t best = 0;
  for (std::size_t k = 1; k < rewards.entries.size(); ++k) {
    if (rewards.entries[k].score > rewards.entries[best].score) best = k;
  }
  return {rewards.entries[best].teacher_id, ok[best].completion, rewards,
          rewards.entries[best].score};
}

// argmax of the router's predicted distribution; lowest index wins ties.
[[nodiscard]] inline std::string route_learned(const RouterModel& router,
                                               const Prompt& prompt) {
  const std::vector<double> probs = predict(router, prompt);
  std::size_t best = 0;
  for (std::size_t k = 1; k < probs.size(); ++k) {
    if (probs[k] > probs[best]) best = k;
  }
  return router.teacher_ids[best];
}

struct BuildFailure {
  std::string prompt_id;
  std::string reason;
};

struct BuildOptions {
  double failure_threshold = 0.1;  // fraction of prompts allowed to fail
  std::size_t workers = 1;
};

struct BuildResult {
  Dataset dataset;
  std::vector<BuildFailure> failures;
};

// Assembles one RoutedSample per prompt under the given strategy. Prompts are
// processed concurrently but emitted in input order; per-prompt routing or
// scoring failures are collected, and crossing the failure threshold aborts
// the build.
[[nodiscard]] inline BuildResult build_dataset(
    Strategy strategy, const std::vector<TeacherSpec>& pool,
    const std::vector<Prompt>& prompts, std::uint64_t run_seed,
    const Scorer* scorer = nullptr, const FixedRoutingTable* table = nullptr,
    const RouterModel* router = nullptr, const BuildOptions& options = {}) {
  if (pool.empty()) throw ConfigError("teacher pool is empty");
  if (strategy == Strategy::kFixed && table == nullptr) {
    throw ConfigError("fixed strategy requires a routing table");
  }
  if (strategy == Strategy::kReward && scorer == nullptr) {
    throw ConfigError("reward strategy requires a scorer");
  }
  if (strategy == Strategy::kLearned) {
    if (router == nullptr) throw ConfigError("learned strategy requires a router");
    for (const auto& id : router->teacher_ids) {
      (void)find_teacher(pool, id);  // throws on mismatch
    }
  }

  std::vector<std::optional<RoutedSample>> slots(prompts.size());
  std::vector<std::optional<BuildFailure>> failures(prompts.size());

  parallel_for(prompts.size(), options.workers, [&](std::size_t i) {
    const Prompt& prompt = prompts[i];
    try {
      RoutedSample sample;
      sample.prompt = prompt;
      sample.strategy = strategy;
      if (strategy == Strategy::kReward) {
        RewardRouteResult routed = route_reward_based(pool, prompt, run_seed, *scorer);
        sample.teacher_id = routed.teacher_id;
        sample.completion = std::move(routed.completion);
        sample.reward_vector = std::move(routed.rewards);
        sample.chosen_reward = routed.chosen_reward;
      } else {
        std::string teacher_id;
        switch (strategy) {
          case Strategy::kFixed:
            teacher_id = route_fixed(*table, prompt);
            break;
          case Strategy::kRandom:
            teacher_id = route_random(pool, prompt, run_seed);
            break;
          case Strategy::kLearned:
            teacher_id = route_learned(*router, prompt);
            break;
          case Strategy::kReward:
            break;  // handled above
        }
        const TeacherSpec& teacher = find_teacher(pool, teacher_id);
        GenerationResult gen = generate(teacher, prompt, run_seed);
        if (gen.backend_status != BackendStatus::kOk) {
          throw RoutingError("generation by \"" + teacher_id + "\" failed: " +
                             gen.note);
        }
        sample.teacher_id = teacher_id;
        sample.completion = std::move(gen.completion);
      }
      slots[i] = std::move(sample);
    } catch (const Error& e) {
      failures[i] = BuildFailure{prompt.id, e.what()};
    }
  });

  BuildResult out;
  out.dataset.run_seed = run_seed;
  for (std::size_t i = 0; i < prompts.size(); ++i) {
    if (slots[i]) {
      out.dataset.samples.push_back(std::move(*slots[i]));
    } else if (failures[i]) {
      out.failures.push_back(std::move(*failures[i]));
    }
  }
  if (!prompts.empty() &&
      static_cast<double>(out.failures.size()) >
          options.failure_threshold * static_cast<double>(prompts.size())) {
    throw DataFailureError(std::to_string(out.failures.size()) + " of " +
                           std::to_string(prompts.size()) +
                           " prompts failed during dataset assembly (threshold " +
                           std::to_string(options.failure_threshold) + ")");
  }
  return out;
}

}  // namespace arbitrage
