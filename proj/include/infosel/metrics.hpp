#pragma once

#include <map>
#include <optional>
#include <string>
#include <vector>

#include "infosel/core.hpp"

namespace infosel {

enum class MetricKind { ExactMatch, TokenF1, VqaAccuracy };

const char* to_string(MetricKind m);
MetricKind metric_from_string(const std::string& s);

struct EvalReport {
  std::string system_name;
  MetricKind metric = MetricKind::TokenF1;
  double mean_score = 0.0;  // 100 * mean(per_instance)
  std::map<std::string, double> per_instance;
  std::optional<std::map<std::string, double>> selection_shares;
  size_t n = 0;
};

// Answer normalization: lowercase, strip punctuation (ASCII set plus Unicode
// general-category P), drop articles {a, an, the}, split on whitespace.
std::vector<std::string> normalize(const std::string& text);

// Max over golds of the token-multiset F1. Both token lists empty -> 1,
// exactly one empty -> 0.
double token_f1(const std::string& pred, const std::vector<std::string>& golds);

// 1 iff normalize(pred) equals normalize(g) for some gold.
double exact_match(const std::string& pred, const std::vector<std::string>& golds);

// min(matches/3, 1) when >= 3 golds are provided, exact match otherwise.
double vqa_accuracy(const std::string& pred, const std::vector<std::string>& golds);

// Dispatch on metric kind; result in [0,1].
double score(MetricKind metric, const std::string& pred, const std::vector<std::string>& golds);

// Per-instance best candidate under the metric; the ensemble upper bound.
EvalReport oracle(const Dataset& dataset, MetricKind metric);

struct Choice {
  std::string answer;
  std::optional<size_t> model_index;
};

// Scores one answer per instance; fills selection shares when every choice
// carries a model index.
EvalReport evaluate_predictions(const std::map<std::string, Choice>& choices,
                                const Dataset& dataset, MetricKind metric,
                                const std::string& system_name);

// CSV row set: system,metric,n,mean_score plus one share column per model.
void write_report_csv(const std::vector<EvalReport>& reports,
                      const std::vector<std::string>& roster, const std::string& path);

// Per-instance sidecar, one JSON object per (system, instance).
void write_report_jsonl(const std::vector<EvalReport>& reports, const std::string& path);

}  // namespace infosel
