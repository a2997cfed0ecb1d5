#pragma once

#include <algorithm>
#include <cctype>
#include <cmath>
#include <map>
#include <set>
#include <string>
#include <string_view>
#include <vector>

#include "json.hpp"

#include "arbitrage/core.hpp"
#include "arbitrage/errors.hpp"
#include "arbitrage/http_client.hpp"
#include "arbitrage/io.hpp"
#include "arbitrage/rewards.hpp"
#include "arbitrage/textmetrics.hpp"

namespace arbitrage {

enum class JudgeVerdict { kWinA, kWinB, kTie };

// Single-order pairwise judge. judge_once sees (a, b) in presentation order;
// judge_pair below runs both orders and reconciles.
class Judge {
 public:
  virtual ~Judge() = default;
  [[nodiscard]] virtual JudgeVerdict judge_once(const Prompt& prompt,
                                                const Completion& a,
                                                const Completion& b) const = 0;
};

// Compares reward scores: win to the higher side when the gap exceeds the
// margin, tie otherwise. Order-symmetric by construction.
class SimulatedJudge final : public Judge {
 public:
  explicit SimulatedJudge(const Scorer& scorer, double margin = 0.05)
      : scorer_(scorer), margin_(margin) {}

  [[nodiscard]] JudgeVerdict judge_once(const Prompt& prompt, const Completion& a,
                                        const Completion& b) const override {
    const double sa = scorer_.score(prompt, a);
    const double sb = scorer_.score(prompt, b);
    if (sa - sb > margin_) return JudgeVerdict::kWinA;
    if (sb - sa > margin_) return JudgeVerdict::kWinB;
    return JudgeVerdict::kTie;
  }

 private:
  const Scorer& scorer_;
  double margin_;
};

class RemoteJudge final : public Judge {
 public:
  RemoteJudge(std::string endpoint, std::string request_template,
              std::string response_path, http::HttpOptions options = {})
      : endpoint_(std::move(endpoint)),
        request_template_(std::move(request_template)),
        response_path_(std::move(response_path)),
        options_(options) {}

  [[nodiscard]] JudgeVerdict judge_once(const Prompt& prompt, const Completion& a,
                                        const Completion& b) const override {
    const std::string body = http::render_template(
        request_template_, {{"prompt", prompt.text},
                            {"completion_a", a.text},
                            {"completion_b", b.text}});
    const http::PostResult res = http::post_json(endpoint_, body, options_);
    if (!res.ok) {
      throw ScoringError("judge backend failed for prompt \"" + prompt.id +
                         "\": " + res.error);
    }
    const auto field = http::extract_path(res.body, response_path_);
    if (!field || !field->is_string()) {
      throw ScoringError("judge response path \"" + response_path_ +
                         "\" missing or non-string for prompt \"" + prompt.id + "\"");
    }
    std::string v = field->get<std::string>();
    std::transform(v.begin(), v.end(), v.begin(),
                   [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
    if (v == "a") return JudgeVerdict::kWinA;
    if (v == "b") return JudgeVerdict::kWinB;
    if (v == "tie") return JudgeVerdict::kTie;
    throw ScoringError("judge returned unrecognized verdict \"" + v +
                       "\" for prompt \"" + prompt.id + "\"");
  }

 private:
  std::string endpoint_;
  std::string request_template_;
  std::string response_path_;
  http::HttpOptions options_;
};

// Both presentation orders; a winner stands only if both orders agree on it,
// anything else is a tie (position-bias mitigation).
[[nodiscard]] inline JudgeVerdict judge_pair(const Judge& judge, const Prompt& prompt,
                                             const Completion& a,
                                             const Completion& b) {
  const JudgeVerdict forward = judge.judge_once(prompt, a, b);
  const JudgeVerdict swapped = judge.judge_once(prompt, b, a);
  JudgeVerdict backward = JudgeVerdict::kTie;
  if (swapped == JudgeVerdict::kWinA) backward = JudgeVerdict::kWinB;
  if (swapped == JudgeVerdict::kWinB) backward = JudgeVerdict::kWinA;
  return forward == backward ? forward : JudgeVerdict::kTie;
}

struct WinRateRow {
  std::string language;  // "overall" for the totals row
  std::size_t n_matches = 0;
  std::size_t wins_a = 0;
  std::size_t wins_b = 0;
  std::size_t ties = 0;
  double win_rate_a = 0.0;   // percent; ties stay in the denominator
  double win_rate_b = 0.0;
  double win_loss_diff = 0.0;
};

struct WinRateReport {
  std::vector<WinRateRow> per_language;
  WinRateRow overall;
  std::size_t unjudged = 0;  // judge-backend failures, excluded from totals
};

namespace detail {

inline void finalize_row(WinRateRow& row) {
  row.n_matches = row.wins_a + row.wins_b + row.ties;
  if (row.n_matches > 0) {
    row.win_rate_a = 100.0 * static_cast<double>(row.wins_a) /
                     static_cast<double>(row.n_matches);
    row.win_rate_b = 100.0 * static_cast<double>(row.wins_b) /
                     static_cast<double>(row.n_matches);
  }
  row.win_loss_diff = row.win_rate_a - row.win_rate_b;
}

}  // namespace detail

// One judged match per prompt id shared by both datasets, aggregated per
// language and overall.
[[nodiscard]] inline WinRateReport run_pairwise_eval(const Dataset& gens_a,
                                                     const Dataset& gens_b,
                                                     const Judge& judge) {
  std::map<std::string, const RoutedSample*> by_id_b;
  for (const auto& s : gens_b.samples) by_id_b[s.prompt.id] = &s;

  std::map<std::string, WinRateRow> rows;
  WinRateReport report;
  std::size_t shared = 0;
  for (const auto& sa : gens_a.samples) {
    const auto it = by_id_b.find(sa.prompt.id);
    if (it == by_id_b.end()) continue;
    ++shared;
    const RoutedSample& sb = *it->second;
    WinRateRow& row = rows[sa.prompt.language];
    row.language = sa.prompt.language;
    try {
      switch (judge_pair(judge, sa.prompt, sa.completion, sb.completion)) {
        case JudgeVerdict::kWinA: ++row.wins_a; break;
        case JudgeVerdict::kWinB: ++row.wins_b; break;
        case JudgeVerdict::kTie: ++row.ties; break;
      }
    } catch (const Error&) {
      ++report.unjudged;
    }
  }
  if (shared == 0) {
    throw ConfigError("datasets share no prompt ids; nothing to evaluate");
  }
  report.overall.language = "overall";
  for (auto& [lang, row] : rows) {
    detail::finalize_row(row);
    report.overall.wins_a += row.wins_a;
    report.overall.wins_b += row.wins_b;
    report.overall.ties += row.ties;
    report.per_language.push_back(row);
  }
  detail::finalize_row(report.overall);
  return report;
}

struct CompositionCell {
  std::size_t count = 0;
  double pct = 0.0;
};

// language -> teacher -> share of that language's samples.
struct CompositionReport {
  std::map<std::string, std::map<std::string, CompositionCell>> by_language;
};

[[nodiscard]] inline CompositionReport composition_report(const Dataset& dataset) {
  if (dataset.samples.empty()) throw ConfigError("composition report of an empty dataset");
  CompositionReport report;
  std::map<std::string, std::size_t> language_totals;
  for (const auto& s : dataset.samples) {
    ++report.by_language[s.prompt.language][s.teacher_id].count;
    ++language_totals[s.prompt.language];
  }
  for (auto& [lang, teachers] : report.by_language) {
    const double total = static_cast<double>(language_totals[lang]);
    for (auto& [teacher, cell] : teachers) {
      cell.pct = 100.0 * static_cast<double>(cell.count) / total;
    }
  }
  return report;
}

struct GroupedText {
  std::string id;
  std::string language;
  std::string text;
};

struct CharacteristicsRow {
  std::string group;
  std::size_t n = 0;
  double mean_tokens = 0.0;
  double mean_gunning_fog = 0.0;
  double mean_rix = 0.0;
  double mean_mtld = 0.0;
};

struct CharacteristicsReport {
  std::vector<CharacteristicsRow> rows;  // group order = map order
  std::vector<std::string> warnings;
};

// Mean text metrics per group. Empty groups and untokenizable texts are
// excluded, with a warning each.
[[nodiscard]] inline CharacteristicsReport characteristics_report(
    const std::map<std::string, std::vector<GroupedText>>& groups,
    double mtld_threshold = 0.72) {
  CharacteristicsReport report;
  for (const auto& [group, texts] : groups) {
    CharacteristicsRow row;
    row.group = group;
    for (const auto& t : texts) {
      try {
        const metrics::TextMetrics m =
            metrics::compute_metrics(t.text, t.language, mtld_threshold);
        row.mean_tokens += static_cast<double>(m.n_tokens);
        row.mean_gunning_fog += m.gunning_fog;
        row.mean_rix += m.rix;
        row.mean_mtld += m.mtld;
        ++row.n;
      } catch (const MetricsError& e) {
        report.warnings.push_back("group \"" + group + "\" text \"" + t.id +
                                  "\" skipped: " + e.what());
      }
    }
    if (row.n == 0) {
      report.warnings.push_back("group \"" + group + "\" is empty; excluded");
      continue;
    }
    const double n = static_cast<double>(row.n);
    row.mean_tokens /= n;
    row.mean_gunning_fog /= n;
    row.mean_rix /= n;
    row.mean_mtld /= n;
    report.rows.push_back(std::move(row));
  }
  return report;
}

struct PromptStatsRow {
  std::string language;
  std::string teacher_id;
  std::size_t n = 0;
  double mean_prompt_tokens = 0.0;
  double mean_prompt_mtld = 0.0;
};

struct PromptStatsReport {
  std::vector<PromptStatsRow> rows;  // sorted by (language, teacher_id)
  std::vector<std::string> warnings;
};

// Token-count and MTLD means over the PROMPTS routed to each teacher,
// grouped by (language, teacher).
[[nodiscard]] inline PromptStatsReport routed_prompt_stats(const Dataset& dataset) {
  if (dataset.samples.empty()) throw ConfigError("prompt stats of an empty dataset");
  std::map<std::pair<std::string, std::string>, PromptStatsRow> rows;
  PromptStatsReport report;
  for (const auto& s : dataset.samples) {
    try {
      const metrics::TokenizedText tok = metrics::tokenize(s.prompt.text);
      const double m = metrics::mtld(tok.tokens);
      PromptStatsRow& row = rows[{s.prompt.language, s.teacher_id}];
      row.language = s.prompt.language;
      row.teacher_id = s.teacher_id;
      row.mean_prompt_tokens += static_cast<double>(tok.tokens.size());
      row.mean_prompt_mtld += m;
      ++row.n;
    } catch (const MetricsError& e) {
      report.warnings.push_back("prompt \"" + s.prompt.id + "\" skipped: " + e.what());
    }
  }
  for (auto& [key, row] : rows) {
    const double n = static_cast<double>(row.n);
    row.mean_prompt_tokens /= n;
    row.mean_prompt_mtld /= n;
    report.rows.push_back(std::move(row));
  }
  return report;
}

// ---- report writers ----

namespace detail {

// Shortest decimal representation that round-trips, via the JSON encoder;
// gives stable bytes for golden-file comparisons.
[[nodiscard]] inline std::string fmt(double v) { return nlohmann::json(v).dump(); }

[[nodiscard]] inline std::string aligned_table(
    const std::vector<std::vector<std::string>>& rows) {
  std::vector<std::size_t> width;
  for (const auto& row : rows) {
    if (width.size() < row.size()) width.resize(row.size(), 0);
    for (std::size_t c = 0; c < row.size(); ++c) {
      width[c] = std::max(width[c], row[c].size());
    }
  }
  std::string out;
  for (const auto& row : rows) {
    for (std::size_t c = 0; c < row.size(); ++c) {
      if (c > 0) out += "  ";
      out += row[c];
      if (c + 1 < row.size()) {
        out.append(width[c] - row[c].size(), ' ');
      }
    }
    out += '\n';
  }
  return out;
}

[[nodiscard]] inline std::vector<std::string> winrate_cells(const WinRateRow& r) {
  return {r.language,
          std::to_string(r.n_matches),
          std::to_string(r.wins_a),
          std::to_string(r.wins_b),
          std::to_string(r.ties),
          fmt(r.win_rate_a),
          fmt(r.win_rate_b),
          fmt(r.win_loss_diff)};
}

}  // namespace detail

inline void write_winrate_csv(const std::string& path, const WinRateReport& report) {
  std::string out = "language,n,wins_a,wins_b,ties,win_rate_a,win_rate_b,diff\n";
  auto add = [&out](const WinRateRow& r) {
    const auto cells = detail::winrate_cells(r);
    for (std::size_t c = 0; c < cells.size(); ++c) {
      if (c > 0) out += ',';
      out += cells[c];
    }
    out += '\n';
  };
  for (const auto& row : report.per_language) add(row);
  add(report.overall);
  io::write_text_file(path, out);
}

inline void write_winrate_jsonl(const std::string& path, const WinRateReport& report) {
  std::string out;
  auto add = [&out](const WinRateRow& r) {
    io::ordered_json j;
    j["language"] = r.language;
    j["n"] = r.n_matches;
    j["wins_a"] = r.wins_a;
    j["wins_b"] = r.wins_b;
    j["ties"] = r.ties;
    j["win_rate_a"] = r.win_rate_a;
    j["win_rate_b"] = r.win_rate_b;
    j["diff"] = r.win_loss_diff;
    out += j.dump();
    out += '\n';
  };
  for (const auto& row : report.per_language) add(row);
  add(report.overall);
  io::write_text_file(path, out);
}

inline void write_winrate_text(const std::string& path, const WinRateReport& report) {
  std::vector<std::vector<std::string>> rows;
  rows.push_back({"language", "n", "wins_a", "wins_b", "ties", "win_rate_a",
                  "win_rate_b", "diff"});
  for (const auto& row : report.per_language) {
    rows.push_back(detail::winrate_cells(row));
  }
  rows.push_back(detail::winrate_cells(report.overall));
  std::string out = detail::aligned_table(rows);
  if (report.unjudged > 0) {
    out += "unjudged matches excluded: " + std::to_string(report.unjudged) + "\n";
  }
  io::write_text_file(path, out);
}

inline void write_composition_jsonl(const std::string& path,
                                    const CompositionReport& report) {
  std::string out;
  for (const auto& [lang, teachers] : report.by_language) {
    for (const auto& [teacher, cell] : teachers) {
      io::ordered_json j;
      j["language"] = lang;
      j["teacher_id"] = teacher;
      j["count"] = cell.count;
      j["pct"] = cell.pct;
      out += j.dump();
      out += '\n';
    }
  }
  io::write_text_file(path, out);
}

inline void write_composition_text(const std::string& path,
                                   const CompositionReport& report) {
  std::vector<std::vector<std::string>> rows;
  rows.push_back({"language", "teacher_id", "count", "pct"});
  for (const auto& [lang, teachers] : report.by_language) {
    for (const auto& [teacher, cell] : teachers) {
      rows.push_back({lang, teacher, std::to_string(cell.count),
                      detail::fmt(cell.pct)});
    }
  }
  io::write_text_file(path, detail::aligned_table(rows));
}

inline void write_characteristics_jsonl(const std::string& path,
                                        const CharacteristicsReport& report) {
  std::string out;
  for (const auto& r : report.rows) {
    io::ordered_json j;
    j["group"] = r.group;
    j["n"] = r.n;
    j["mean_tokens"] = r.mean_tokens;
    j["mean_gunning_fog"] = r.mean_gunning_fog;
    j["mean_rix"] = r.mean_rix;
    j["mean_mtld"] = r.mean_mtld;
    out += j.dump();
    out += '\n';
  }
  io::write_text_file(path, out);
}

inline void write_characteristics_text(const std::string& path,
                                       const CharacteristicsReport& report) {
  std::vector<std::vector<std::string>> rows;
  rows.push_back({"group", "n", "mean_tokens", "mean_gunning_fog", "mean_rix",
                  "mean_mtld"});
  for (const auto& r : report.rows) {
    rows.push_back({r.group, std::to_string(r.n), detail::fmt(r.mean_tokens),
                    detail::fmt(r.mean_gunning_fog), detail::fmt(r.mean_rix),
                    detail::fmt(r.mean_mtld)});
  }
  std::string out = detail::aligned_table(rows);
  for (const auto& w : report.warnings) {
    out += "warning: " + w + "\n";
  }
  io::write_text_file(path, out);
}

inline void write_prompt_stats_jsonl(const std::string& path,
                                     const PromptStatsReport& report) {
  std::string out;
  for (const auto& r : report.rows) {
    io::ordered_json j;
    j["language"] = r.language;
    j["teacher_id"] = r.teacher_id;
    j["n"] = r.n;
    j["mean_prompt_tokens"] = r.mean_prompt_tokens;
    j["mean_prompt_mtld"] = r.mean_prompt_mtld;
    out += j.dump();
    out += '\n';
  }
  io::write_text_file(path, out);
}

inline void write_prompt_stats_text(const std::string& path,
                                    const PromptStatsReport& report) {
  std::vector<std::vector<std::string>> rows;
  rows.push_back(
      {"language", "teacher_id", "n", "mean_prompt_tokens", "mean_prompt_mtld"});
  for (const auto& r : report.rows) {
    rows.push_back({r.language, r.teacher_id, std::to_string(r.n),
                    detail::fmt(r.mean_prompt_tokens),
                    detail::fmt(r.mean_prompt_mtld)});
  }
  std::string out = detail::aligned_table(rows);
  for (const auto& w : report.warnings) {
    out += "warning: " + w + "\n";
  }
  io::write_text_file(path, out);
}

}  // namespace arbitrage
