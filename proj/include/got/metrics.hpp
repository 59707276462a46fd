#pragma once

#include <cmath>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include "json.hpp"

#include "got/dataset.hpp"
#include "got/error.hpp"
#include "got/pipeline.hpp"
#include "got/text.hpp"

namespace got {

inline std::vector<std::string> metric_tokens(const std::string& s) {
  std::vector<std::string> out;
  std::istringstream ss(text::normalize(s));
  std::string w;
  while (ss >> w) out.push_back(w);
  return out;
}

/// Longest-common-subsequence F-measure with recall weighted by beta = 1.2.
inline double rouge_l(const std::string& candidate, const std::string& reference) {
  const auto c = metric_tokens(candidate);
  const auto r = metric_tokens(reference);
  if (r.empty()) throw EmptyInputError("rouge_l: reference has no tokens");
  if (c.empty()) return 0.0;
  std::vector<std::vector<int>> dp(r.size() + 1, std::vector<int>(c.size() + 1, 0));
  for (size_t i = 1; i <= r.size(); ++i)
    for (size_t j = 1; j <= c.size(); ++j)
      dp[i][j] = r[i - 1] == c[j - 1] ? dp[i - 1][j - 1] + 1 : std::max(dp[i - 1][j], dp[i][j - 1]);
  const double lcs = dp[r.size()][c.size()];
  if (lcs == 0.0) return 0.0;
  const double rec = lcs / static_cast<double>(r.size());
  const double prec = lcs / static_cast<double>(c.size());
  const double b2 = 1.2 * 1.2;
  return (1.0 + b2) * rec * prec / (rec + b2 * prec);
}

namespace detail_metrics {

inline std::map<std::string, int> ngram_counts(const std::vector<std::string>& toks, int n) {
  std::map<std::string, int> counts;
  if (static_cast<int>(toks.size()) < n) return counts;
  for (size_t i = 0; i + n <= toks.size(); ++i) {
    std::string key;
    for (int k = 0; k < n; ++k) {
      key += toks[i + k];
      key.push_back('\x1f');
    }
    ++counts[key];
  }
  return counts;
}

}  // namespace detail_metrics

/// Single-reference BLEU-n: geometric mean of clipped n-gram precisions for
/// orders 1..max_n times the brevity penalty. Any zero precision gives 0.
inline double bleu(const std::string& candidate, const std::string& reference, int max_n) {
  if (max_n < 1) throw ConfigError("bleu: order must be at least 1");
  const auto c = metric_tokens(candidate);
  const auto r = metric_tokens(reference);
  if (r.empty()) throw EmptyInputError("bleu: reference has no tokens");
  if (c.empty()) return 0.0;
  double log_sum = 0.0;
  for (int n = 1; n <= max_n; ++n) {
    const auto cand = detail_metrics::ngram_counts(c, n);
    if (cand.empty()) return 0.0;  // candidate shorter than the order
    const auto ref = detail_metrics::ngram_counts(r, n);
    int matched = 0;
    int total = 0;
    for (const auto& [key, count] : cand) {
      total += count;
      auto it = ref.find(key);
      if (it != ref.end()) matched += std::min(count, it->second);
    }
    if (matched == 0) return 0.0;
    log_sum += std::log(static_cast<double>(matched) / total) / max_n;
  }
  const double bp = c.size() >= r.size()
                        ? 1.0
                        : std::exp(1.0 - static_cast<double>(r.size()) / static_cast<double>(c.size()));
  return bp * std::exp(log_sum);
}

struct EvalBucket {
  int correct = 0;
  int total = 0;
  double accuracy() const { return total == 0 ? 0.0 : static_cast<double>(correct) / total; }
};

struct EvalReport {
  int total = 0;
  int correct = 0;
  int abstained = 0;
  double accuracy = 0.0;
  int rationale_count = 0;  // samples with a gold rationale to score against
  double mean_rouge_l = 0.0;
  double mean_bleu1 = 0.0;
  double mean_bleu4 = 0.0;
  std::map<std::string, EvalBucket> per_class;

  nlohmann::json to_json() const {
    nlohmann::json j;
    j["total"] = total;
    j["correct"] = correct;
    j["abstained"] = abstained;
    j["accuracy"] = accuracy;
    j["rationale_scored"] = rationale_count;
    j["rouge_l"] = mean_rouge_l;
    j["bleu1"] = mean_bleu1;
    j["bleu4"] = mean_bleu4;
    nlohmann::json pc = nlohmann::json::object();
    for (const auto& [tag, b] : per_class)
      pc[tag] = {{"correct", b.correct}, {"total", b.total}, {"accuracy", b.accuracy()}};
    j["per_class"] = pc;
    return j;
  }
};

/// Scores predictions against gold samples. Every sample needs exactly one
/// prediction row with its id; an abstain counts as wrong. Rationale overlap
/// metrics average over the samples that carry a gold rationale.
template <typename T>
EvalReport evaluate(const std::vector<Sample<T>>& samples, const std::vector<Prediction>& preds) {
  if (samples.empty()) throw EmptyInputError("evaluate: no samples");
  std::map<std::string, const Prediction*> by_id;
  for (const auto& p : preds) {
    if (by_id.count(p.id)) throw SchemaError("duplicate prediction for id " + p.id);
    by_id[p.id] = &p;
  }
  std::map<std::string, int> sample_ids;
  for (const auto& s : samples) ++sample_ids[s.id];
  for (const auto& p : preds)
    if (!sample_ids.count(p.id)) throw UnknownReferenceError("prediction for unknown id " + p.id);

  EvalReport rep;
  double rouge_sum = 0.0, bleu1_sum = 0.0, bleu4_sum = 0.0;
  for (const auto& s : samples) {
    auto it = by_id.find(s.id);
    if (it == by_id.end()) throw UnknownReferenceError("no prediction for sample " + s.id);
    const Prediction& p = *it->second;
    ++rep.total;
    const int chosen = extract_answer(p.answer, s.choices);
    if (chosen < 0) ++rep.abstained;
    const bool ok = chosen >= 0 && chosen == s.answer;
    if (ok) ++rep.correct;
    for (const auto& tag : s.labels) {
      ++rep.per_class[tag].total;
      if (ok) ++rep.per_class[tag].correct;
    }
    if (!metric_tokens(s.rationale).empty()) {
      ++rep.rationale_count;
      rouge_sum += rouge_l(p.rationale, s.rationale);
      bleu1_sum += bleu(p.rationale, s.rationale, 1);
      bleu4_sum += bleu(p.rationale, s.rationale, 4);
    }
  }
  rep.accuracy = static_cast<double>(rep.correct) / rep.total;
  if (rep.rationale_count > 0) {
    rep.mean_rouge_l = rouge_sum / rep.rationale_count;
    rep.mean_bleu1 = bleu1_sum / rep.rationale_count;
    rep.mean_bleu4 = bleu4_sum / rep.rationale_count;
  }
  return rep;
}

}  // namespace got
