#include <catch2/catch_amalgamated.hpp>

#include <map>

#include "arbitrage/io.hpp"
#include "arbitrage/routing.hpp"
#include "test_util.hpp"

using namespace arbitrage;

namespace {

// Four cluster-style teachers with one strong language group each.
std::vector<TeacherSpec> cluster_pool() {
  return {
      sim_teacher("germanic-cluster",
                  {{"de", 0.9}, {"nl", 0.85}, {"en", 0.6}, {"fr", 0.3},
                   {"uk", 0.2}, {"zh", 0.2}}),
      sim_teacher("slavic-cluster",
                  {{"de", 0.4}, {"nl", 0.3}, {"en", 0.5}, {"fr", 0.35},
                   {"uk", 0.9}, {"zh", 0.25}}),
      sim_teacher("romance-cluster",
                  {{"de", 0.3}, {"nl", 0.2}, {"en", 0.7}, {"fr", 0.9},
                   {"uk", 0.3}, {"zh", 0.3}}),
      sim_teacher("east-asian-cluster",
                  {{"de", 0.2}, {"nl", 0.25}, {"en", 0.4}, {"fr", 0.2},
                   {"uk", 0.25}, {"zh", 0.9}}),
  };
}

FixedRoutingTable cluster_table() {
  FixedRoutingTable t;
  t.language_to_teacher = {
      {"de", "germanic-cluster"},  {"nl", "germanic-cluster"},
      {"uk", "slavic-cluster"},    {"fr", "romance-cluster"},
      {"en", "romance-cluster"},   {"zh", "east-asian-cluster"},
  };
  return t;
}

class ShiftedScorer final : public Scorer {
 public:
  ShiftedScorer(const Scorer& base, double shift) : base_(base), shift_(shift) {}
  [[nodiscard]] double score(const Prompt& p, const Completion& c) const override {
    return base_.score(p, c) + shift_;
  }

 private:
  const Scorer& base_;
  double shift_;
};

RouterModel tiny_router(std::vector<std::string> teacher_ids,
                        std::vector<std::string> languages) {
  RouterModel m;
  m.teacher_ids = std::move(teacher_ids);
  m.languages = std::move(languages);
  m.weights.assign(m.feature_dim() * m.n_teachers(), 0.0);
  m.bias.assign(m.n_teachers(), 0.0);
  return m;
}

}  // namespace

TEST_CASE("fixed routing follows the language table") {
  const auto table = cluster_table();
  CHECK(route_fixed(table, make_prompt("p1", "de", "x")) == "germanic-cluster");
  CHECK(route_fixed(table, make_prompt("p2", "nl", "x")) == "germanic-cluster");
  CHECK(route_fixed(table, make_prompt("p3", "uk", "x")) == "slavic-cluster");
  CHECK(route_fixed(table, make_prompt("p4", "fr", "x")) == "romance-cluster");
  CHECK(route_fixed(table, make_prompt("p5", "zh", "x")) == "east-asian-cluster");
  CHECK_THROWS_AS(route_fixed(table, make_prompt("p6", "hi", "x")), RoutingError);
}

TEST_CASE("table validation catches unknown teachers and uncovered languages") {
  const auto pool = cluster_pool();
  auto table = cluster_table();
  CHECK_NOTHROW(validate_table(table, pool, {"de", "fr", "uk"}));

  auto bad_teacher = table;
  bad_teacher.language_to_teacher["de"] = "nonexistent";
  CHECK_THROWS_AS(validate_table(bad_teacher, pool, {"de"}), ConfigError);

  CHECK_THROWS_AS(validate_table(table, pool, {"de", "ja"}), ConfigError);
}

TEST_CASE("random routing is deterministic per prompt and seed") {
  const auto pool = cluster_pool();
  auto p = make_prompt("p1", "en", "x");
  CHECK(route_random(pool, p, 42) == route_random(pool, p, 42));

  const std::vector<TeacherSpec> solo = {sim_teacher("only", {{"en", 0.5}})};
  for (int i = 0; i < 20; ++i) {
    auto q = make_prompt("p" + std::to_string(i), "en", "x");
    CHECK(route_random(solo, q, 42) == "only");
  }
}

TEST_CASE("random routing is uniform across the pool") {
  const auto pool = cluster_pool();
  std::map<std::string, int> counts;
  const int n = 10000;
  for (int i = 0; i < n; ++i) {
    counts[route_random(pool, make_prompt("prompt-" + std::to_string(i), "en", "x"),
                        42)]++;
  }
  REQUIRE(counts.size() == 4);
  const double expected = n / 4.0;
  double chi2 = 0.0;
  for (const auto& [id, c] : counts) {
    CHECK(c >= 0.22 * n);
    CHECK(c <= 0.28 * n);
    chi2 += (c - expected) * (c - expected) / expected;
  }
  // df=3 critical value at p=0.001.
  CHECK(chi2 < 16.26623619623813);
}

TEST_CASE("random routing only draws eligible teachers") {
  auto a = sim_teacher("a", {{"en", 0.5}});
  auto b = sim_teacher("b", {{"zh", 0.5}});
  b.supported_languages = {"zh"};
  for (int i = 0; i < 50; ++i) {
    CHECK(route_random({a, b}, make_prompt("p" + std::to_string(i), "en", "x"), 1) ==
          "a");
  }
  auto c = sim_teacher("c", {{"fr", 0.5}});
  c.supported_languages = {"fr"};
  CHECK_THROWS_AS(route_random({b, c}, make_prompt("p1", "en", "x"), 1),
                  RoutingError);
}

TEST_CASE("reward routing matches a brute-force argmax oracle") {
  const auto pool = cluster_pool();
  const std::vector<std::string> langs = {"de", "nl", "en", "fr", "uk", "zh"};
  SimulatedScorer scorer;
  int checked = 0;
  for (int i = 0; i < 120; ++i) {
    const auto& lang = langs[i % langs.size()];
    auto p = make_prompt("prompt-" + std::to_string(i), lang, "question text");

    std::string best_id;
    double best_q = -1.0;
    for (const auto& t : pool) {
      const double q = t.profile.quality.at(lang);
      if (q > best_q) {
        best_q = q;
        best_id = t.id;
      }
    }

    const auto routed = route_reward_based(pool, p, 42, scorer);
    CHECK(routed.teacher_id == best_id);
    CHECK(routed.chosen_reward == best_q);
    CHECK(routed.rewards.entries.size() == pool.size());
    CHECK(routed.completion.teacher_id == best_id);
    ++checked;
  }
  CHECK(checked == 120);
}

TEST_CASE("reward routing breaks ties toward the lowest pool index") {
  auto a = sim_teacher("first", {{"en", 0.7}});
  auto b = sim_teacher("second", {{"en", 0.7}});
  auto c = sim_teacher("third", {{"en", 0.2}});
  const auto routed =
      route_reward_based({a, b, c}, make_prompt("p1", "en", "x"), 9, SimulatedScorer{});
  CHECK(routed.teacher_id == "first");
}

TEST_CASE("reward routing is invariant to a constant shift of all scores") {
  const auto pool = cluster_pool();
  SimulatedScorer base;
  for (double shift : {-2.0, -0.5, 0.25, 3.0}) {
    ShiftedScorer shifted(base, shift);
    for (int i = 0; i < 24; ++i) {
      auto p = make_prompt("p" + std::to_string(i), i % 2 ? "fr" : "uk", "x");
      CHECK(route_reward_based(pool, p, 42, base).teacher_id ==
            route_reward_based(pool, p, 42, shifted).teacher_id);
    }
  }
}

TEST_CASE("learned routing takes the argmax of the predicted distribution") {
  auto m = tiny_router({"a", "b"}, {"en"});
  CHECK(route_learned(m, make_prompt("p1", "en", "hello")) == "a");
  m.bias = {0.0, 1.0};
  CHECK(route_learned(m, make_prompt("p1", "en", "hello")) == "b");
  // Unknown languages still route; the one-hot block is simply all zero.
  CHECK(route_learned(m, make_prompt("p1", "ja", "konnichiwa")) == "b");
}

TEST_CASE("with a single teacher every strategy picks it") {
  const std::vector<TeacherSpec> solo = {sim_teacher("only", {{"en", 0.5}})};
  FixedRoutingTable table;
  table.language_to_teacher = {{"en", "only"}};
  auto p = make_prompt("p1", "en", "x");
  CHECK(route_fixed(table, p) == "only");
  CHECK(route_random(solo, p, 123) == "only");
  CHECK(route_reward_based(solo, p, 123, SimulatedScorer{}).teacher_id == "only");
}

TEST_CASE("build_dataset validates strategy artifacts") {
  const auto pool = cluster_pool();
  const std::vector<Prompt> prompts = {make_prompt("p1", "en", "x")};
  CHECK_THROWS_AS(build_dataset(Strategy::kFixed, pool, prompts, 1), ConfigError);
  CHECK_THROWS_AS(build_dataset(Strategy::kReward, pool, prompts, 1), ConfigError);
  CHECK_THROWS_AS(build_dataset(Strategy::kLearned, pool, prompts, 1), ConfigError);

  auto router = tiny_router({"a", "ghost"}, {"en"});
  CHECK_THROWS_AS(build_dataset(Strategy::kLearned, pool, prompts, 1, nullptr,
                                nullptr, &router),
                  ConfigError);
}

TEST_CASE("build_dataset emits one sample per prompt in input order") {
  const auto pool = cluster_pool();
  const auto table = cluster_table();
  std::vector<Prompt> prompts;
  const std::vector<std::string> langs = {"de", "fr", "uk", "zh", "en"};
  for (int i = 0; i < 15; ++i) {
    prompts.push_back(make_prompt("p" + std::to_string(i), langs[i % langs.size()],
                                  "question " + std::to_string(i)));
  }

  SECTION("fixed strategy carries no reward vectors") {
    const auto built =
        build_dataset(Strategy::kFixed, pool, prompts, 42, nullptr, &table);
    REQUIRE(built.dataset.samples.size() == prompts.size());
    CHECK(built.failures.empty());
    CHECK(built.dataset.run_seed == 42);
    for (size_t i = 0; i < prompts.size(); ++i) {
      const auto& s = built.dataset.samples[i];
      CHECK(s.prompt.id == prompts[i].id);
      CHECK(s.strategy == Strategy::kFixed);
      CHECK(s.teacher_id == route_fixed(table, prompts[i]));
      CHECK(s.completion.teacher_id == s.teacher_id);
      CHECK_FALSE(s.reward_vector.has_value());
      CHECK_FALSE(s.chosen_reward.has_value());
    }
  }

  SECTION("reward strategy records the full vector and the chosen score") {
    SimulatedScorer scorer;
    const auto built = build_dataset(Strategy::kReward, pool, prompts, 42, &scorer);
    REQUIRE(built.dataset.samples.size() == prompts.size());
    for (const auto& s : built.dataset.samples) {
      CHECK(s.strategy == Strategy::kReward);
      REQUIRE(s.reward_vector.has_value());
      CHECK(s.reward_vector->entries.size() == pool.size());
      REQUIRE(s.chosen_reward.has_value());
      double best = s.reward_vector->entries[0].score;
      for (const auto& e : s.reward_vector->entries) best = std::max(best, e.score);
      CHECK(*s.chosen_reward == best);
    }
  }

  SECTION("random strategy is reproducible") {
    const auto a = build_dataset(Strategy::kRandom, pool, prompts, 42);
    const auto b = build_dataset(Strategy::kRandom, pool, prompts, 42);
    REQUIRE(a.dataset.samples.size() == b.dataset.samples.size());
    for (size_t i = 0; i < a.dataset.samples.size(); ++i) {
      CHECK(a.dataset.samples[i].teacher_id == b.dataset.samples[i].teacher_id);
      CHECK(a.dataset.samples[i].completion.text ==
            b.dataset.samples[i].completion.text);
    }
  }
}

TEST_CASE("build_dataset is independent of the worker count") {
  const auto pool = cluster_pool();
  std::vector<Prompt> prompts;
  const std::vector<std::string> langs = {"de", "fr", "uk", "zh", "en", "nl"};
  for (int i = 0; i < 30; ++i) {
    prompts.push_back(
        make_prompt("p" + std::to_string(i), langs[i % langs.size()], "question"));
  }
  SimulatedScorer scorer;
  TempDir dir;
  std::string paths[2];
  size_t workers[2] = {1, 4};
  for (int k = 0; k < 2; ++k) {
    BuildOptions opts;
    opts.workers = workers[k];
    auto built = build_dataset(Strategy::kReward, pool, prompts, 42, &scorer,
                               nullptr, nullptr, opts);
    built.dataset.config_digest = "deadbeefdeadbeef";
    paths[k] = dir.file("w" + std::to_string(workers[k]) + ".jsonl");
    io::save_dataset(paths[k], built.dataset);
  }
  CHECK(io::read_text_file(paths[0]) == io::read_text_file(paths[1]));
}

TEST_CASE("routing failures are tolerated up to the threshold") {
  auto en_only = sim_teacher("en-only", {{"en", 0.5}});
  en_only.supported_languages = {"en"};
  const std::vector<TeacherSpec> pool = {en_only};
  std::vector<Prompt> prompts;
  for (int i = 0; i < 4; ++i) {
    prompts.push_back(make_prompt("p" + std::to_string(i), "en", "x"));
  }
  prompts.push_back(make_prompt("p4", "xx", "untranslatable"));

  SECTION("crossing the threshold aborts the build") {
    BuildOptions opts;
    opts.failure_threshold = 0.1;
    CHECK_THROWS_AS(build_dataset(Strategy::kRandom, pool, prompts, 1, nullptr,
                                  nullptr, nullptr, opts),
                    DataFailureError);
  }

  SECTION("below the threshold the failure is recorded and skipped") {
    BuildOptions opts;
    opts.failure_threshold = 0.3;
    const auto built = build_dataset(Strategy::kRandom, pool, prompts, 1, nullptr,
                                     nullptr, nullptr, opts);
    CHECK(built.dataset.samples.size() == 4);
    REQUIRE(built.failures.size() == 1);
    CHECK(built.failures[0].prompt_id == "p4");
    CHECK_FALSE(built.failures[0].reason.empty());
    for (const auto& s : built.dataset.samples) {
      CHECK(s.prompt.language == "en");
    }
  }
}
