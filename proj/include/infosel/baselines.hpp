#pragma once

#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "infosel/encode.hpp"
#include "infosel/metrics.hpp"

namespace infosel {

// Per-instance winner pickers over one candidate list. All argmax ties break
// to the lowest model index except majority_vote, which randomizes (seeded).

// Index of a most-frequent answer after normalization.
size_t majority_vote(const std::vector<std::string>& answers, uint64_t seed);

// Argmax of summed weights over normalized answer groups.
size_t weighted_vote(const std::vector<std::string>& answers, const std::vector<double>& weights);

using SimilarityFn = std::function<double(const std::string&, const std::string&)>;

// token_f1 between two answer strings; the default graph kernel.
double answer_similarity(const std::string& a, const std::string& b);

struct PageRankResult {
  size_t winner = 0;
  std::vector<double> scores;  // stochastic, sums to 1
};

// Consensus ranking over the answer-similarity graph: column-normalized
// transition matrix, damped power iteration until the L1 change drops
// below tol.
PageRankResult pagerank_select(const std::vector<std::string>& answers,
                               const SimilarityFn& similarity = answer_similarity,
                               double damping = 0.85, double tol = 1e-9,
                               size_t max_iter = 1000);

// N x K matrix of per-candidate metric scores on the train split.
struct CorrectnessMatrix {
  size_t rows = 0;
  size_t cols = 0;
  std::vector<double> values;  // row-major

  double at(size_t i, size_t j) const { return values[i * cols + j]; }
};

struct OlaIndex {
  std::vector<FeatureVector> queries;  // one per train instance
  CorrectnessMatrix correctness;
  size_t k_neighbors = 7;
};

// Dynamic selection: stores instance-level encodings and the correctness
// matrix; at query time the model with the highest mean correctness among
// the k nearest train neighbors wins.
OlaIndex ola_fit(const Dataset& train, const Encoder& encoder, MetricKind metric, size_t k = 7);

size_t ola_select(const OlaIndex& index, const FeatureVector& query);

// Mean train metric per model; the weighted-vote weights.
std::vector<double> model_accuracies(const Dataset& train, MetricKind metric);

}  // namespace infosel
