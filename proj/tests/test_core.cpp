#include <catch2/catch_amalgamated.hpp>

#include <fstream>
#include <set>

#include "arbitrage/core.hpp"
#include "arbitrage/errors.hpp"
#include "arbitrage/io.hpp"
#include "arbitrage/rng.hpp"
#include "test_util.hpp"

using namespace arbitrage;

TEST_CASE("language tags must be two or three lowercase letters") {
  CHECK(is_valid_language("en"));
  CHECK(is_valid_language("ukr"));
  CHECK_FALSE(is_valid_language("e"));
  CHECK_FALSE(is_valid_language("abcd"));
  CHECK_FALSE(is_valid_language("eN"));
  CHECK_FALSE(is_valid_language("e1"));
  CHECK_FALSE(is_valid_language(""));
  CHECK_FALSE(is_valid_language("en-US"));
  CHECK_THROWS_AS(require_valid_language("EN", "test prompt"), ConfigError);
}

TEST_CASE("strategy names round-trip") {
  for (Strategy s : {Strategy::kFixed, Strategy::kRandom, Strategy::kReward,
                     Strategy::kLearned}) {
    CHECK(strategy_from_string(to_string(s)) == s);
  }
  CHECK(to_string(Strategy::kReward) == "reward");
  CHECK_THROWS_AS(strategy_from_string("greedy"), ConfigError);
}

TEST_CASE("fnv1a64 matches the reference constants") {
  CHECK(fnv1a64("") == 14695981039346656037ULL);
  CHECK(fnv1a64("abc") == 16654208175385433931ULL);
}

TEST_CASE("prompt seed derivation is deterministic and id-sensitive") {
  CHECK(derive_prompt_seed(42, "p1") == 16974858199840056802ULL);
  CHECK(derive_prompt_seed(42, "p2") == 1627942972634577217ULL);
  CHECK(derive_prompt_seed(0, "") == 14087677454934409008ULL);
  CHECK(derive_prompt_seed(7, "prompt-00042") == 2128447436858905942ULL);
  CHECK(derive_prompt_seed(0xDEADBEEFULL, "x") == 579207936135974469ULL);
  CHECK(derive_prompt_seed(42, "p1") == derive_prompt_seed(42, "p1"));
  CHECK(derive_prompt_seed(42, "p1") != derive_prompt_seed(43, "p1"));
}

TEST_CASE("subseed streams differ by tag") {
  const uint64_t base = derive_prompt_seed(42, "p1");
  CHECK(derive_subseed(base, "route") != derive_subseed(base, "gen:t0:en"));
  CHECK(derive_subseed(base, "route") == derive_subseed(base, "route"));
}

TEST_CASE("seeded rng draws are deterministic and in range") {
  SeededRng a(123), b(123);
  for (int i = 0; i < 100; ++i) {
    CHECK(a.next_u64() == b.next_u64());
  }
  SeededRng c(7);
  for (int i = 0; i < 1000; ++i) {
    const double u = c.next_double();
    CHECK(u >= 0.0);
    CHECK(u < 1.0);
    const uint64_t k = c.next_below(17);
    CHECK(k < 17);
    CHECK(std::isfinite(c.next_normal()));
  }
}

TEST_CASE("next_below covers every residue") {
  SeededRng rng(99);
  std::set<uint64_t> seen;
  for (int i = 0; i < 500; ++i) seen.insert(rng.next_below(5));
  CHECK(seen == std::set<uint64_t>{0, 1, 2, 3, 4});
}

TEST_CASE("partition groups samples by prompt language preserving order") {
  Dataset d;
  d.run_seed = 1;
  auto add = [&](std::string id, std::string lang) {
    RoutedSample s;
    s.prompt = make_prompt(std::move(id), std::move(lang), "text");
    s.completion = {s.prompt.id, "t0", "out"};
    s.teacher_id = "t0";
    s.strategy = Strategy::kRandom;
    d.samples.push_back(std::move(s));
  };
  add("a", "en");
  add("b", "tr");
  add("c", "en");
  add("d", "uk");
  add("e", "en");

  auto groups = partition_by_language(d);
  REQUIRE(groups.size() == 3);
  REQUIRE(groups.at("en").size() == 3);
  CHECK(groups.at("en")[0].prompt.id == "a");
  CHECK(groups.at("en")[1].prompt.id == "c");
  CHECK(groups.at("en")[2].prompt.id == "e");
  CHECK(groups.at("tr").size() == 1);
  CHECK(groups.at("uk").size() == 1);

  size_t total = 0;
  for (const auto& [lang, rows] : groups) total += rows.size();
  CHECK(total == d.samples.size());

  CHECK(partition_by_language(Dataset{}).empty());
}

TEST_CASE("prompt files load with validation") {
  TempDir dir;
  const std::string path = dir.file("prompts.jsonl");

  SECTION("valid file round-trips") {
    std::ofstream out(path);
    out << R"({"id":"p1","language":"en","text":"hello there"})" << "\n";
    out << "\n";  // blank lines are skipped
    out << R"({"id":"p2","language":"tr","text":"merhaba"})" << "\n";
    out.close();
    auto prompts = io::load_prompts(path, std::nullopt);
    REQUIRE(prompts.size() == 2);
    CHECK(prompts[0].id == "p1");
    CHECK(prompts[1].language == "tr");
  }

  SECTION("duplicate ids are rejected with the offending id and line") {
    std::ofstream out(path);
    out << R"({"id":"p1","language":"en","text":"a"})" << "\n";
    out << R"({"id":"p1","language":"en","text":"b"})" << "\n";
    out.close();
    try {
      (void)io::load_prompts(path, std::nullopt);
      FAIL("expected ConfigError");
    } catch (const ConfigError& e) {
      const std::string msg = e.what();
      CHECK(msg.find("p1") != std::string::npos);
      CHECK(msg.find(":2") != std::string::npos);
    }
  }

  SECTION("invalid language tag is rejected") {
    std::ofstream out(path);
    out << R"({"id":"p1","language":"English","text":"a"})" << "\n";
    out.close();
    CHECK_THROWS_AS(io::load_prompts(path, std::nullopt), ConfigError);
  }

  SECTION("language outside the configured set is rejected") {
    std::ofstream out(path);
    out << R"({"id":"p1","language":"fr","text":"bonjour"})" << "\n";
    out.close();
    std::set<std::string> allowed{"en", "tr"};
    try {
      (void)io::load_prompts(path, allowed);
      FAIL("expected ConfigError");
    } catch (const ConfigError& e) {
      CHECK(std::string(e.what()).find("fr") != std::string::npos);
    }
  }

  SECTION("empty text is rejected") {
    std::ofstream out(path);
    out << R"({"id":"p1","language":"en","text":"   "})" << "\n";
    out.close();
    CHECK_THROWS_AS(io::load_prompts(path, std::nullopt), ConfigError);
  }

  SECTION("malformed json names the line") {
    std::ofstream out(path);
    out << R"({"id":"p1","language":"en","text":"a"})" << "\n";
    out << "{not json\n";
    out.close();
    try {
      (void)io::load_prompts(path, std::nullopt);
      FAIL("expected ConfigError");
    } catch (const ConfigError& e) {
      CHECK(std::string(e.what()).find(":2") != std::string::npos);
    }
  }

  SECTION("missing file is a config error") {
    CHECK_THROWS_AS(io::load_prompts(dir.file("absent.jsonl"), std::nullopt),
                    ConfigError);
  }
}

TEST_CASE("datasets survive a save/load round trip structurally intact") {
  TempDir dir;
  Dataset d;
  d.run_seed = 4242;
  d.config_digest = "0123456789abcdef";

  RoutedSample with_rewards;
  with_rewards.prompt = make_prompt("p1", "en", "what is a cat?");
  with_rewards.completion = {"p1", "t1", "a cat is small\nrm0p90000000000000002"};
  with_rewards.teacher_id = "t1";
  with_rewards.strategy = Strategy::kReward;
  RewardVector rv;
  rv.prompt_id = "p1";
  rv.entries = {{"t0", 0.25}, {"t1", 0.9000000000000000222}};
  with_rewards.reward_vector = rv;
  with_rewards.chosen_reward = 0.9000000000000000222;
  d.samples.push_back(with_rewards);

  RoutedSample bare;
  bare.prompt = make_prompt("p2", "tr", "kedi nedir?");
  bare.completion = {"p2", "t0", "kedi\nrm0p5"};
  bare.teacher_id = "t0";
  bare.strategy = Strategy::kRandom;
  d.samples.push_back(bare);

  const std::string path = dir.file("dataset.jsonl");
  io::save_dataset(path, d);
  const Dataset back = io::load_dataset(path);

  CHECK(back.run_seed == d.run_seed);
  CHECK(back.config_digest == d.config_digest);
  REQUIRE(back.samples.size() == 2);
  const RoutedSample& a = back.samples[0];
  CHECK(a.prompt.id == "p1");
  CHECK(a.prompt.language == "en");
  CHECK(a.prompt.text == "what is a cat?");
  CHECK(a.completion.text == with_rewards.completion.text);
  CHECK(a.teacher_id == "t1");
  CHECK(a.strategy == Strategy::kReward);
  REQUIRE(a.reward_vector.has_value());
  CHECK(a.reward_vector->prompt_id == "p1");
  REQUIRE(a.reward_vector->entries.size() == 2);
  CHECK(a.reward_vector->entries[1].teacher_id == "t1");
  CHECK(a.reward_vector->entries[1].score == rv.entries[1].score);
  REQUIRE(a.chosen_reward.has_value());
  CHECK(*a.chosen_reward == *with_rewards.chosen_reward);
  const RoutedSample& b = back.samples[1];
  CHECK_FALSE(b.reward_vector.has_value());
  CHECK_FALSE(b.chosen_reward.has_value());

  SECTION("a second save produces byte-identical files") {
    const std::string again = dir.file("dataset2.jsonl");
    io::save_dataset(again, back);
    CHECK(io::read_text_file(again) == io::read_text_file(path));
    CHECK(io::read_text_file(again + ".meta.json") ==
          io::read_text_file(path + ".meta.json"));
  }
}

TEST_CASE("dataset loader reports malformed rows with line numbers") {
  TempDir dir;
  const std::string path = dir.file("bad.jsonl");
  std::ofstream out(path);
  out << R"({"prompt_id":"p1","language":"en","prompt":"a","completion":"b",)"
      << R"("teacher_id":"t0","strategy":"random","reward_vector":null,)"
      << R"("chosen_reward":null})" << "\n";
  out << R"({"prompt_id":"p2"})" << "\n";
  out.close();
  try {
    (void)io::load_dataset(path);
    FAIL("expected ConfigError");
  } catch (const ConfigError& e) {
    CHECK(std::string(e.what()).find(":2") != std::string::npos);
  }
}
