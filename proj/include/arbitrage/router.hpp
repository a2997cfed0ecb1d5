#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <map>
#include <set>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include "arbitrage/core.hpp"
#include "arbitrage/errors.hpp"
#include "arbitrage/io.hpp"
#include "arbitrage/rewards.hpp"
#include "arbitrage/rng.hpp"
#include "arbitrage/teachers.hpp"
#include "arbitrage/unicode.hpp"

namespace arbitrage {

inline constexpr std::size_t kNgramDim = 1u << 16;
inline constexpr std::string_view kRouterFormatVersion = "arbitrage-router/1";

// Sparse feature vector: strictly increasing indices over the hashed
// trigram block [0, ngram_dim) followed by the language one-hot block.
struct FeatureVector {
  std::vector<std::pair<std::uint32_t, double>> entries;
};

struct RouterModel {
  std::vector<std::string> teacher_ids;  // defines output order M
  std::vector<std::string> languages;    // defines one-hot block order
  std::size_t ngram_dim = kNgramDim;
  std::vector<double> weights;  // row-major, (ngram_dim + |languages|) x M
  std::vector<double> bias;     // length M
  std::string version = std::string(kRouterFormatVersion);

  [[nodiscard]] std::size_t feature_dim() const { return ngram_dim + languages.size(); }
  [[nodiscard]] std::size_t n_teachers() const { return teacher_ids.size(); }
};

struct RouterTrainingExample {
  Prompt prompt;
  RewardVector reward_vector;
};

struct TrainingConfig {
  double learning_rate = 0.1;
  std::size_t epochs = 50;
  std::size_t batch_size = 64;
  double temperature = 1.0;
  double l2 = 1e-4;
  std::uint64_t seed = 0;
};

struct TrainResult {
  RouterModel model;
  std::vector<double> epoch_loss;  // full-dataset mean loss after each epoch
};

// Case-folded codepoint trigrams hashed into [0, ngram_dim), L2-normalized so
// gradient-descent step bounds hold regardless of text length, then the
// language one-hot (1.0 in that language's slot; all zeros for a language
// outside the configured list).
[[nodiscard]] inline FeatureVector featurize(const Prompt& prompt,
                                             const std::vector<std::string>& languages,
                                             std::size_t ngram_dim = kNgramDim) {
  std::map<std::uint32_t, double> acc;
  const std::string folded = uni::fold_utf8(prompt.text);
  const std::vector<char32_t> cps = uni::decode_all(folded);
  auto hash_span = [&](std::size_t begin, std::size_t len) {
    std::string bytes;
    for (std::size_t k = begin; k < begin + len; ++k) uni::encode(cps[k], bytes);
    acc[static_cast<std::uint32_t>(fnv1a64(bytes) % ngram_dim)] += 1.0;
  };
  if (cps.size() >= 3) {
    for (std::size_t k = 0; k + 3 <= cps.size(); ++k) hash_span(k, 3);
  } else if (!cps.empty()) {
    hash_span(0, cps.size());
  }

  double norm_sq = 0.0;
  for (const auto& [idx, v] : acc) norm_sq += v * v;
  const double inv_norm = norm_sq > 0.0 ? 1.0 / std::sqrt(norm_sq) : 0.0;

  FeatureVector fv;
  fv.entries.reserve(acc.size() + 1);
  for (const auto& [idx, v] : acc) fv.entries.emplace_back(idx, v * inv_norm);
  for (std::size_t li = 0; li < languages.size(); ++li) {
    if (languages[li] == prompt.language) {
      fv.entries.emplace_back(static_cast<std::uint32_t>(ngram_dim + li), 1.0);
      break;
    }
  }
  return fv;
}

[[nodiscard]] inline std::vector<double> softmax(const std::vector<double>& logits,
                                                 double temperature = 1.0) {
  if (logits.empty()) throw ConfigError("softmax of an empty vector");
  if (!(temperature > 0.0)) throw ConfigError("softmax temperature must be positive");
  const double m = *std::max_element(logits.begin(), logits.end());
  std::vector<double> out(logits.size());
  double sum = 0.0;
  for (std::size_t k = 0; k < logits.size(); ++k) {
    out[k] = std::exp((logits[k] - m) / temperature);
    sum += out[k];
  }
  for (double& v : out) v /= sum;
  return out;
}

// KL(p || q) = sum p_k ln(p_k / q_k), with 0 ln 0 := 0. q must be strictly
// positive (softmax output always is).
[[nodiscard]] inline double kl_divergence(const std::vector<double>& p,
                                          const std::vector<double>& q) {
  if (p.size() != q.size()) {
    throw ConfigError("kl_divergence length mismatch: " + std::to_string(p.size()) +
                      " vs " + std::to_string(q.size()));
  }
  double kl = 0.0;
  for (std::size_t k = 0; k < p.size(); ++k) {
    if (p[k] > 0.0) kl += p[k] * std::log(p[k] / q[k]);
  }
  return kl < 0.0 ? 0.0 : kl;  // guard tiny negative rounding
}

[[nodiscard]] inline std::vector<double> predict_logits(const RouterModel& model,
                                                        const FeatureVector& fv) {
  const std::size_t m = model.n_teachers();
  std::vector<double> logits(model.bias);
  for (const auto& [idx, val] : fv.entries) {
    const double* row = model.weights.data() + static_cast<std::size_t>(idx) * m;
    for (std::size_t j = 0; j < m; ++j) logits[j] += val * row[j];
  }
  return logits;
}

// R(p): probability distribution over model.teacher_ids given the prompt
// alone. Prompts in unseen languages still get a valid distribution.
[[nodiscard]] inline std::vector<double> predict(const RouterModel& model,
                                                 const Prompt& prompt) {
  return softmax(predict_logits(model, featurize(prompt, model.languages,
                                                 model.ngram_dim)),
                 1.0);
}

namespace detail {

[[nodiscard]] inline std::vector<double> reward_target(const RouterModel& model,
                                                       const RewardVector& rv,
                                                       double temperature) {
  if (rv.entries.size() != model.n_teachers()) {
    throw ConfigError("reward vector for prompt \"" + rv.prompt_id + "\" covers " +
                      std::to_string(rv.entries.size()) + " teachers, router has " +
                      std::to_string(model.n_teachers()));
  }
  std::vector<double> scores(rv.entries.size());
  for (std::size_t j = 0; j < rv.entries.size(); ++j) {
    if (rv.entries[j].teacher_id != model.teacher_ids[j]) {
      throw ConfigError("reward vector order mismatch at index " + std::to_string(j) +
                        " for prompt \"" + rv.prompt_id + "\"");
    }
    scores[j] = rv.entries[j].score;
  }
  return softmax(scores, temperature);
}

[[nodiscard]] inline double l2_penalty(const RouterModel& model, double l2) {
  if (l2 == 0.0) return 0.0;
  double sq = 0.0;
  for (double w : model.weights) sq += w * w;
  return l2 * sq;
}

}  // namespace detail

// Loss and gradient over already-featurized (features, target) pairs. These
// carry the actual math; the prompt-level wrappers below featurize and build
// softmax targets first. Gradient of KL(target || softmax(logits)) wrt
// logits is softmax(logits) - target.
[[nodiscard]] inline double loss_on_features(const RouterModel& model,
                                             const FeatureVector& features,
                                             const std::vector<double>& target,
                                             double l2) {
  const std::vector<double> predicted =
      softmax(predict_logits(model, features), 1.0);
  return kl_divergence(target, predicted) + detail::l2_penalty(model, l2);
}

struct Gradient {
  std::vector<double> weights;  // same layout as RouterModel::weights
  std::vector<double> bias;
};

[[nodiscard]] inline Gradient gradient_on_features(
    const RouterModel& model,
    const std::vector<std::pair<FeatureVector, std::vector<double>>>& batch,
    double l2) {
  if (batch.empty()) throw ConfigError("gradient over an empty batch");
  const std::size_t m = model.n_teachers();
  Gradient g;
  g.weights.assign(model.weights.size(), 0.0);
  g.bias.assign(m, 0.0);

  const double inv_n = 1.0 / static_cast<double>(batch.size());
  std::vector<double> delta(m);
  for (const auto& [features, target] : batch) {
    const std::vector<double> predicted =
        softmax(predict_logits(model, features), 1.0);
    for (std::size_t j = 0; j < m; ++j) {
      delta[j] = (predicted[j] - target[j]) * inv_n;
      g.bias[j] += delta[j];
    }
    for (const auto& [idx, val] : features.entries) {
      double* row = g.weights.data() + static_cast<std::size_t>(idx) * m;
      for (std::size_t j = 0; j < m; ++j) row[j] += val * delta[j];
    }
  }
  if (l2 > 0.0) {
    for (std::size_t k = 0; k < g.weights.size(); ++k) {
      g.weights[k] += 2.0 * l2 * model.weights[k];
    }
  }
  return g;
}

// Per-example training loss: KL(softmax(r/tau) || R(p)) + l2 * ||W||^2.
// Note the argument order: the reward-derived distribution is the target
// (first argument), the router prediction is being fitted to it.
[[nodiscard]] inline double loss(const RouterModel& model,
                                 const RouterTrainingExample& example,
                                 double temperature, double l2) {
  return loss_on_features(
      model, featurize(example.prompt, model.languages, model.ngram_dim),
      detail::reward_target(model, example.reward_vector, temperature), l2);
}

[[nodiscard]] inline Gradient gradient(const RouterModel& model,
                                       const std::vector<RouterTrainingExample>& batch,
                                       double temperature, double l2) {
  std::vector<std::pair<FeatureVector, std::vector<double>>> feat;
  feat.reserve(batch.size());
  for (const auto& ex : batch) {
    feat.emplace_back(featurize(ex.prompt, model.languages, model.ngram_dim),
                      detail::reward_target(model, ex.reward_vector, temperature));
  }
  return gradient_on_features(model, feat, l2);
}

// Mini-batch gradient descent with a seeded per-epoch shuffle. Deterministic
// for a fixed (examples, config); epoch_loss holds the full-dataset mean loss
// after each epoch.
[[nodiscard]] inline TrainResult train(const std::vector<RouterTrainingExample>& examples,
                                       const TrainingConfig& config) {
  if (examples.empty()) throw ConfigError("train called with no examples");
  if (!(config.learning_rate > 0.0)) throw ConfigError("learning_rate must be positive");
  if (config.epochs == 0 || config.batch_size == 0) {
    throw ConfigError("epochs and batch_size must be positive");
  }
  if (config.l2 < 0.0) throw ConfigError("l2 must be nonnegative");

  RouterModel model;
  for (const auto& e : examples[0].reward_vector.entries) {
    model.teacher_ids.push_back(e.teacher_id);
  }
  {
    std::set<std::string> unique(model.teacher_ids.begin(), model.teacher_ids.end());
    if (unique.size() != model.teacher_ids.size()) {
      throw ConfigError("duplicate teacher ids in training data");
    }
  }
  if (examples.size() < model.teacher_ids.size()) {
    throw ConfigError("need at least " + std::to_string(model.teacher_ids.size()) +
                      " examples, got " + std::to_string(examples.size()));
  }
  {
    std::set<std::string> langs;
    for (const auto& ex : examples) langs.insert(ex.prompt.language);
    model.languages.assign(langs.begin(), langs.end());
  }
  const std::size_t m = model.n_teachers();
  model.weights.assign(model.feature_dim() * m, 0.0);
  model.bias.assign(m, 0.0);

  std::vector<std::pair<FeatureVector, std::vector<double>>> feat;
  feat.reserve(examples.size());
  for (const auto& ex : examples) {
    feat.emplace_back(featurize(ex.prompt, model.languages, model.ngram_dim),
                      detail::reward_target(model, ex.reward_vector,
                                            config.temperature));
  }

  const std::size_t n = feat.size();
  std::vector<std::size_t> order(n);
  for (std::size_t k = 0; k < n; ++k) order[k] = k;

  TrainResult result;
  result.epoch_loss.reserve(config.epochs);
  std::vector<std::pair<FeatureVector, std::vector<double>>> batch;
  for (std::size_t epoch = 0; epoch < config.epochs; ++epoch) {
    SeededRng rng(derive_subseed(config.seed, "epoch:" + std::to_string(epoch)));
    for (std::size_t k = n; k > 1; --k) {
      std::swap(order[k - 1], order[rng.next_below(k)]);
    }
    for (std::size_t start = 0; start < n; start += config.batch_size) {
      const std::size_t stop = std::min(n, start + config.batch_size);
      batch.clear();
      for (std::size_t k = start; k < stop; ++k) batch.push_back(feat[order[k]]);
      const Gradient g = gradient_on_features(model, batch, config.l2);
      for (std::size_t k = 0; k < model.weights.size(); ++k) {
        model.weights[k] -= config.learning_rate * g.weights[k];
      }
      for (std::size_t j = 0; j < m; ++j) {
        model.bias[j] -= config.learning_rate * g.bias[j];
      }
    }
    const double reg = detail::l2_penalty(model, config.l2);
    double mean_kl = 0.0;
    for (const auto& [features, target] : feat) {
      mean_kl += kl_divergence(target, softmax(predict_logits(model, features), 1.0));
    }
    mean_kl /= static_cast<double>(n);
    const double epoch_loss = mean_kl + reg;
    if (!std::isfinite(epoch_loss)) {
      throw NumericError("non-finite training loss after epoch " +
                         std::to_string(epoch + 1));
    }
    result.epoch_loss.push_back(epoch_loss);
  }
  result.model = std::move(model);
  return result;
}

// Builds (prompt, reward vector) pairs by fanning every prompt out to the
// whole pool and scoring each completion. Prompts that cannot produce a
// full-pool reward vector are skipped and reported.
struct CollectFailure {
  std::string prompt_id;
  std::string reason;
};

struct CollectResult {
  std::vector<RouterTrainingExample> examples;
  std::vector<CollectFailure> failures;
};

[[nodiscard]] inline CollectResult collect_training_data(
    const std::vector<TeacherSpec>& pool, const std::vector<Prompt>& prompts,
    std::uint64_t run_seed, const Scorer& scorer, double failure_threshold = 0.1) {
  if (pool.empty()) throw ConfigError("teacher pool is empty");
  CollectResult out;
  for (const auto& prompt : prompts) {
    try {
      const FanoutResult fan = generate_all(pool, prompt, run_seed);
      if (!fan.skips.empty()) {
        throw ScoringError("pool only partially eligible for language \"" +
                           prompt.language + "\"");
      }
      std::vector<GenerationResult> ok;
      ok.reserve(fan.results.size());
      for (const auto& r : fan.results) {
        if (r.backend_status == BackendStatus::kOk) {
          ok.push_back(r);
        } else {
          throw ScoringError("generation by \"" + r.completion.teacher_id +
                             "\" failed: " + r.note);
        }
      }
      out.examples.push_back({prompt, score_all(scorer, prompt, ok)});
    } catch (const Error& e) {
      out.failures.push_back({prompt.id, e.what()});
    }
  }
  if (!prompts.empty() &&
      static_cast<double>(out.failures.size()) >
          failure_threshold * static_cast<double>(prompts.size())) {
    throw DataFailureError(
        std::to_string(out.failures.size()) + " of " + std::to_string(prompts.size()) +
        " prompts failed during training-data collection (threshold " +
        std::to_string(failure_threshold) + ")");
  }
  return out;
}

namespace detail {

inline void append_double(std::string& out, double v) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  out += buf;
}

}  // namespace detail

// Versioned plain-text serialization; doubles at 17 significant digits so a
// round trip is value-exact.
inline void save_router(const std::string& path, const RouterModel& model) {
  std::string out;
  out.reserve(model.weights.size() * 20);
  out += model.version;
  out += "\nteachers ";
  out += std::to_string(model.teacher_ids.size());
  out += '\n';
  for (const auto& id : model.teacher_ids) {
    out += id;
    out += '\n';
  }
  out += "languages ";
  out += std::to_string(model.languages.size());
  out += '\n';
  for (const auto& lang : model.languages) {
    out += lang;
    out += '\n';
  }
  out += "ngram_dim ";
  out += std::to_string(model.ngram_dim);
  out += "\nbias";
  for (double b : model.bias) {
    out += ' ';
    detail::append_double(out, b);
  }
  out += "\nweights ";
  out += std::to_string(model.feature_dim());
  out += ' ';
  out += std::to_string(model.n_teachers());
  out += '\n';
  const std::size_t m = model.n_teachers();
  for (std::size_t row = 0; row < model.feature_dim(); ++row) {
    for (std::size_t j = 0; j < m; ++j) {
      if (j > 0) out += ' ';
      detail::append_double(out, model.weights[row * m + j]);
    }
    out += '\n';
  }
  io::write_text_file(path, out);
}

[[nodiscard]] inline RouterModel load_router(const std::string& path) {
  std::istringstream in(io::read_text_file(path));
  auto fail = [&](const std::string& what) -> ConfigError {
    return ConfigError("router file " + path + ": " + what);
  };

  RouterModel model;
  std::string line;
  if (!std::getline(in, line)) throw fail("empty file");
  if (line != kRouterFormatVersion) {
    throw fail("unsupported format version \"" + line + "\"");
  }
  std::string keyword;
  std::size_t count = 0;
  in >> keyword >> count;
  if (keyword != "teachers" || count == 0) throw fail("bad teachers header");
  model.teacher_ids.resize(count);
  for (auto& id : model.teacher_ids) {
    if (!(in >> id)) throw fail("truncated teacher list");
  }
  in >> keyword >> count;
  if (keyword != "languages") throw fail("bad languages header");
  model.languages.resize(count);
  for (auto& lang : model.languages) {
    if (!(in >> lang)) throw fail("truncated language list");
  }
  in >> keyword >> model.ngram_dim;
  if (keyword != "ngram_dim" || model.ngram_dim == 0) throw fail("bad ngram_dim");
  in >> keyword;
  if (keyword != "bias") throw fail("bad bias header");
  model.bias.resize(model.n_teachers());
  for (auto& b : model.bias) {
    if (!(in >> b)) throw fail("truncated bias");
  }
  std::size_t rows = 0, cols = 0;
  in >> keyword >> rows >> cols;
  if (keyword != "weights" || rows != model.feature_dim() ||
      cols != model.n_teachers()) {
    throw fail("bad weights header");
  }
  model.weights.resize(rows * cols);
  for (auto& w : model.weights) {
    if (!(in >> w)) throw fail("truncated weights");
  }
  for (double w : model.weights) {
    if (!std::isfinite(w)) throw fail("non-finite weight");
  }
  return model;
}

}  // namespace arbitrage
