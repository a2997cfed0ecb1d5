#pragma once

#include <array>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <vector>

#include "arbitrage/core.hpp"
#include "arbitrage/errors.hpp"
#include "arbitrage/http_client.hpp"
#include "arbitrage/rng.hpp"

namespace arbitrage {

enum class TeacherKind { kRemote, kSimulated };

// Deterministic stand-in for a generation backend: per-language quality in
// [0,1] drives both the completion length (mean verbosity*quality tokens)
// and the embedded quality marker (quality + N(0, noise_sigma)).
struct SimulatedProfile {
  std::map<std::string, double> quality;
  double verbosity = 100.0;
  double noise_sigma = 0.0;
};

struct TeacherSpec {
  std::string id;
  TeacherKind kind = TeacherKind::kSimulated;
  std::set<std::string> supported_languages;  // empty = all
  std::string endpoint;                       // remote only
  std::string request_template;               // remote only, resolved body template
  std::string response_path;                  // remote only, dotted extraction path
  SimulatedProfile profile;                   // simulated only
  http::HttpOptions http;

  [[nodiscard]] bool supports(std::string_view language) const {
    return supported_languages.empty() ||
           supported_languages.count(std::string(language)) > 0;
  }
};

enum class BackendStatus { kOk, kFailed };

struct GenerationResult {
  Completion completion;
  double latency_note = 0.0;
  BackendStatus backend_status = BackendStatus::kFailed;
  std::string note;  // failure reason when status is failed
};

struct SkipRecord {
  std::string teacher_id;
  std::string reason;
};

struct FanoutResult {
  std::vector<GenerationResult> results;  // eligible teachers, pool order
  std::vector<SkipRecord> skips;          // ineligible teachers
};

namespace detail {

// Small per-language lexicons for simulated completions. Every entry must be
// a single word token (letter runs; single Han characters for zh) so the
// generated token count is exact.
inline const std::vector<std::string>& filler_lexicon(std::string_view language) {
  static const std::vector<std::string> kEn = {
      "the",    "answer", "depends",  "mostly",  "on",     "context",
      "models", "route",  "prompts",  "toward",  "better", "teachers",
      "while",  "keeping", "quality", "steady"};
  static const std::vector<std::string> kFr = {
      "la",      "réponse", "dépend",   "surtout", "du",      "contexte",
      "modèles", "routent", "requêtes", "vers",    "meilleurs", "professeurs",
      "tout",    "en",      "gardant",  "qualité"};
  static const std::vector<std::string> kDe = {
      "die",     "antwort", "hängt",   "meistens", "vom",    "kontext",
      "modelle", "leiten",  "anfragen", "zu",      "besseren", "lehrern",
      "während", "sie",     "qualität", "halten"};
  static const std::vector<std::string> kTr = {
      "cevap",    "çoğunlukla", "bağlama", "bağlıdır", "modeller", "istemleri",
      "daha",     "iyi",        "öğretmenlere", "yönlendirir", "kaliteyi",
      "korurken", "veri",       "seçimi",  "önemli",   "kalır"};
  static const std::vector<std::string> kUk = {
      "відповідь", "залежить", "переважно", "від",     "контексту", "моделі",
      "скеровують", "запити",  "до",        "кращих",  "вчителів",  "зберігаючи",
      "якість",    "даних",    "під",       "час"};
  static const std::vector<std::string> kAr = {
      "الإجابة", "تعتمد",  "غالبا",  "على",    "السياق", "النماذج",
      "توجه",    "الطلبات", "نحو",   "معلمين", "أفضل",   "مع",
      "الحفاظ",  "على",    "جودة",   "البيانات"};
  static const std::vector<std::string> kZh = {
      "答", "案", "取", "决", "于", "上", "下", "文",
      "模", "型", "路", "由", "更", "好", "教", "师"};
  static const std::vector<std::string> kDefault = {
      "alpha", "beta",  "gamma", "delta", "omega", "sigma",
      "kappa", "theta", "lambda", "zeta", "eta",   "iota",
      "rho",   "tau",   "phi",    "chi"};
  if (language == "en") return kEn;
  if (language == "fr") return kFr;
  if (language == "de") return kDe;
  if (language == "tr") return kTr;
  if (language == "uk") return kUk;
  if (language == "ar") return kAr;
  if (language == "zh") return kZh;
  return kDefault;
}

}  // namespace detail

inline constexpr std::string_view kMarkerPrefix = "rm";

// Encodes a double as a single alphanumeric token: %.17g with '.' -> 'p' and
// '-' -> 'n', prefixed with "rm". 17 significant digits round-trip exactly.
[[nodiscard]] inline std::string encode_marker(double value) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.17g", value);
  std::string s(buf);
  for (char& c : s) {
    if (c == '.') c = 'p';
    if (c == '-') c = 'n';
  }
  return std::string(kMarkerPrefix) + s;
}

// Inverse of encode_marker. Returns nullopt when the token is not a marker.
[[nodiscard]] inline std::optional<double> decode_marker(std::string_view token) {
  if (token.size() <= kMarkerPrefix.size() ||
      token.substr(0, kMarkerPrefix.size()) != kMarkerPrefix) {
    return std::nullopt;
  }
  std::string s(token.substr(kMarkerPrefix.size()));
  for (char& c : s) {
    if (c == 'p') c = '.';
    if (c == 'n') c = '-';
  }
  char* end = nullptr;
  const double v = std::strtod(s.c_str(), &end);
  if (end == nullptr || *end != '\0') return std::nullopt;
  return v;
}

namespace detail {

inline GenerationResult generate_simulated(const TeacherSpec& teacher,
                                           const Prompt& prompt,
                                           std::uint64_t run_seed) {
  const auto q_it = teacher.profile.quality.find(prompt.language);
  if (q_it == teacher.profile.quality.end()) {
    throw ConfigError("teacher \"" + teacher.id + "\" has no quality entry for \"" +
                      prompt.language + "\"");
  }
  const double quality = q_it->second;
  const std::uint64_t prompt_seed = derive_prompt_seed(run_seed, prompt.id);
  SeededRng rng(derive_subseed(prompt_seed,
                               "gen:" + teacher.id + ":" + prompt.language));

  const double mean_tokens = teacher.profile.verbosity * quality;
  const double count_noise = rng.next_normal();
  const double marker_noise = rng.next_normal();
  const long long raw_count = std::llround(
      mean_tokens + teacher.profile.noise_sigma * teacher.profile.verbosity *
                        0.05 * count_noise);
  const std::size_t n_tokens = raw_count < 1 ? 1 : static_cast<std::size_t>(raw_count);
  const double marker = quality + teacher.profile.noise_sigma * marker_noise;

  const auto& lex = filler_lexicon(prompt.language);
  std::string text;
  for (std::size_t k = 0; k + 1 < n_tokens; ++k) {
    if (!text.empty()) text.push_back(' ');
    text += lex[rng.next_below(lex.size())];
  }
  if (!text.empty()) text.push_back('\n');
  text += encode_marker(marker);

  GenerationResult out;
  out.completion = {prompt.id, teacher.id, std::move(text)};
  out.backend_status = BackendStatus::kOk;
  return out;
}

inline GenerationResult generate_remote(const TeacherSpec& teacher,
                                        const Prompt& prompt) {
  GenerationResult out;
  out.completion.prompt_id = prompt.id;
  out.completion.teacher_id = teacher.id;

  const std::string body = http::render_template(
      teacher.request_template,
      {{"prompt", prompt.text}, {"language", prompt.language}});
  const http::PostResult res = http::post_json(teacher.endpoint, body, teacher.http);
  if (!res.ok) {
    out.note = res.error;
    return out;
  }
  const auto field = http::extract_path(res.body, teacher.response_path);
  if (!field || !field->is_string()) {
    out.note = "response path \"" + teacher.response_path + "\" missing or non-string";
    return out;
  }
  out.completion.text = field->get<std::string>();
  out.backend_status = BackendStatus::kOk;
  return out;
}

}  // namespace detail

// Simulated output is a pure function of (teacher.id, prompt.id,
// prompt.language, run_seed); remote teachers issue one HTTP request with
// bounded retries.
[[nodiscard]] inline GenerationResult generate(const TeacherSpec& teacher,
                                               const Prompt& prompt,
                                               std::uint64_t run_seed) {
  if (!teacher.supports(prompt.language)) {
    throw RoutingError("teacher \"" + teacher.id + "\" does not support language \"" +
                       prompt.language + "\"");
  }
  if (teacher.kind == TeacherKind::kSimulated) {
    return detail::generate_simulated(teacher, prompt, run_seed);
  }
  return detail::generate_remote(teacher, prompt);
}

// One result per eligible teacher in pool order; ineligible teachers become
// skip records. Raises when nothing in the pool produced a completion.
[[nodiscard]] inline FanoutResult generate_all(const std::vector<TeacherSpec>& pool,
                                               const Prompt& prompt,
                                               std::uint64_t run_seed) {
  if (pool.empty()) throw ConfigError("teacher pool is empty");
  FanoutResult out;
  for (const auto& teacher : pool) {
    if (!teacher.supports(prompt.language)) {
      out.skips.push_back(
          {teacher.id, "language \"" + prompt.language + "\" unsupported"});
      continue;
    }
    out.results.push_back(generate(teacher, prompt, run_seed));
  }
  bool any_ok = false;
  for (const auto& r : out.results) {
    if (r.backend_status == BackendStatus::kOk) {
      any_ok = true;
      break;
    }
  }
  if (!any_ok) {
    throw RoutingError("teacher pool exhausted for prompt \"" + prompt.id +
                       "\": no backend produced a completion");
  }
  return out;
}

}  // namespace arbitrage
