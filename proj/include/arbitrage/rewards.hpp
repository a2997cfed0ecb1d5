#pragma once

#include <cmath>
#include <string>
#include <string_view>
#include <vector>

#include "arbitrage/core.hpp"
#include "arbitrage/errors.hpp"
#include "arbitrage/http_client.hpp"
#include "arbitrage/teachers.hpp"

namespace arbitrage {

// Scalar reward RM(prompt, completion). Implementations must be pure per
// (prompt, completion) for a fixed backend state.
class Scorer {
 public:
  virtual ~Scorer() = default;
  [[nodiscard]] virtual double score(const Prompt& prompt,
                                     const Completion& completion) const = 0;
};

// Reads the quality marker trailer emitted by simulated teachers and returns
// its value exactly.
class SimulatedScorer final : public Scorer {
 public:
  [[nodiscard]] double score(const Prompt& prompt,
                             const Completion& completion) const override {
    if (completion.prompt_id != prompt.id) {
      throw ScoringError("completion for prompt \"" + completion.prompt_id +
                         "\" scored against prompt \"" + prompt.id + "\"");
    }
    const std::string& text = completion.text;
    const auto nl = text.find_last_of('\n');
    const std::string_view last_line =
        nl == std::string::npos ? std::string_view(text)
                                : std::string_view(text).substr(nl + 1);
    const auto value = decode_marker(last_line);
    if (!value || !std::isfinite(*value)) {
      throw ScoringError("completion for prompt \"" + prompt.id + "\" by \"" +
                         completion.teacher_id + "\" has no parseable quality marker");
    }
    return *value;
  }
};

class RemoteScorer final : public Scorer {
 public:
  RemoteScorer(std::string endpoint, std::string request_template,
               std::string response_path, http::HttpOptions options = {})
      : endpoint_(std::move(endpoint)),
        request_template_(std::move(request_template)),
        response_path_(std::move(response_path)),
        options_(options) {}

  [[nodiscard]] double score(const Prompt& prompt,
                             const Completion& completion) const override {
    const std::string body = http::render_template(
        request_template_,
        {{"prompt", prompt.text}, {"completion", completion.text}});
    const http::PostResult res = http::post_json(endpoint_, body, options_);
    if (!res.ok) {
      throw ScoringError("reward backend failed for prompt \"" + prompt.id +
                         "\": " + res.error);
    }
    const auto field = http::extract_path(res.body, response_path_);
    if (!field || !field->is_number()) {
      throw ScoringError("reward response path \"" + response_path_ +
                         "\" missing or non-numeric for prompt \"" + prompt.id + "\"");
    }
    const double v = field->get<double>();
    if (!std::isfinite(v)) {
      throw ScoringError("non-finite reward for prompt \"" + prompt.id + "\"");
    }
    return v;
  }

 private:
  std::string endpoint_;
  std::string request_template_;
  std::string response_path_;
  http::HttpOptions options_;
};

// One entry per successful generation, pool order preserved. Any individual
// scoring failure aborts the whole vector.
[[nodiscard]] inline RewardVector score_all(
    const Scorer& scorer, const Prompt& prompt,
    const std::vector<GenerationResult>& results) {
  if (results.empty()) {
    throw ScoringError("no completions to score for prompt \"" + prompt.id + "\"");
  }
  RewardVector out;
  out.prompt_id = prompt.id;
  out.entries.reserve(results.size());
  for (const auto& r : results) {
    if (r.backend_status != BackendStatus::kOk) {
      throw ScoringError("cannot score failed generation by \"" +
                         r.completion.teacher_id + "\" for prompt \"" + prompt.id +
                         "\"");
    }
    out.entries.push_back({r.completion.teacher_id,
                           scorer.score(prompt, r.completion)});
  }
  return out;
}

}  // namespace arbitrage
