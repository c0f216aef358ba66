#include "infosel/baselines.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <numeric>

#include "infosel/rng.hpp"

namespace infosel {

namespace {

std::string group_key(const std::string& answer) {
  const auto toks = normalize(answer);
  std::string key;
  for (const auto& t : toks) {
    if (!key.empty()) key.push_back(' ');
    key += t;
  }
  return key;
}

}  // namespace

size_t majority_vote(const std::vector<std::string>& answers, uint64_t seed) {
  if (answers.empty()) throw DataError("majority_vote: no answers");
  std::map<std::string, std::pair<size_t, size_t>> groups;  // key -> (count, first index)
  for (size_t j = 0; j < answers.size(); ++j) {
    auto [it, inserted] = groups.try_emplace(group_key(answers[j]), 0, j);
    ++it->second.first;
  }
  size_t best_count = 0;
  for (const auto& [key, g] : groups) best_count = std::max(best_count, g.first);

  std::vector<size_t> tied;  // first index of each tied group, ascending
  for (const auto& [key, g] : groups) {
    if (g.first == best_count) tied.push_back(g.second);
  }
  std::sort(tied.begin(), tied.end());
  if (tied.size() == 1) return tied.front();
  Rng rng(seed);
  return tied[static_cast<size_t>(rng.below(tied.size()))];
}

size_t weighted_vote(const std::vector<std::string>& answers, const std::vector<double>& weights) {
  if (answers.empty()) throw DataError("weighted_vote: no answers");
  if (weights.size() != answers.size()) {
    throw ConfigError("weighted_vote: weight count does not match answer count");
  }
  double total = 0.0;
  for (double w : weights) {
    if (w < 0.0) throw ConfigError("weighted_vote: negative weight");
    total += w;
  }
  if (total == 0.0) throw ConfigError("weighted_vote: all weights are zero");

  std::map<std::string, std::pair<double, size_t>> groups;  // key -> (weight sum, first index)
  for (size_t j = 0; j < answers.size(); ++j) {
    auto [it, inserted] = groups.try_emplace(group_key(answers[j]), 0.0, j);
    it->second.first += weights[j];
  }
  double best = -1.0;
  size_t winner = 0;
  for (const auto& [key, g] : groups) {
    if (g.first > best || (g.first == best && g.second < winner)) {
      best = g.first;
      winner = g.second;
    }
  }
  return winner;
}

double answer_similarity(const std::string& a, const std::string& b) {
  return token_f1(a, {b});
}

PageRankResult pagerank_select(const std::vector<std::string>& answers,
                               const SimilarityFn& similarity, double damping, double tol,
                               size_t max_iter) {
  const size_t k = answers.size();
  if (k < 2) throw DataError("pagerank_select: needs at least 2 answers");

  // Symmetric similarity graph with unit diagonal.
  std::vector<double> sim(k * k, 0.0);
  for (size_t i = 0; i < k; ++i) {
    sim[i * k + i] = 1.0;
    for (size_t j = i + 1; j < k; ++j) {
      const double s = similarity(answers[i], answers[j]);
      sim[i * k + j] = s;
      sim[j * k + i] = s;
    }
  }

  // Column-stochastic transitions over the off-diagonal mass. Self-loops
  // would make the matrix doubly stochastic and freeze the uniform vector,
  // so consensus could never surface; columns without any similar neighbor
  // spread uniformly instead.
  std::vector<double> m(k * k, 0.0);
  for (size_t j = 0; j < k; ++j) {
    double col_sum = 0.0;
    for (size_t i = 0; i < k; ++i) {
      if (i != j) col_sum += sim[i * k + j];
    }
    if (col_sum == 0.0) {
      for (size_t i = 0; i < k; ++i) m[i * k + j] = 1.0 / static_cast<double>(k);
    } else {
      for (size_t i = 0; i < k; ++i) {
        m[i * k + j] = i == j ? 0.0 : sim[i * k + j] / col_sum;
      }
    }
  }

  std::vector<double> p(k, 1.0 / static_cast<double>(k));
  std::vector<double> next(k, 0.0);
  const double teleport = (1.0 - damping) / static_cast<double>(k);
  for (size_t iter = 0; iter < max_iter; ++iter) {
    for (size_t i = 0; i < k; ++i) {
      double s = 0.0;
      for (size_t j = 0; j < k; ++j) s += m[i * k + j] * p[j];
      next[i] = teleport + damping * s;
    }
    double delta = 0.0;
    for (size_t i = 0; i < k; ++i) delta += std::abs(next[i] - p[i]);
    p.swap(next);
    if (delta < tol) {
      PageRankResult res;
      res.scores = p;
      res.winner = static_cast<size_t>(
          std::max_element(p.begin(), p.end()) - p.begin());
      return res;
    }
  }
  throw NumericError("pagerank_select: no convergence after " + std::to_string(max_iter) +
                     " iterations");
}

std::vector<double> model_accuracies(const Dataset& train, MetricKind metric) {
  if (!train.has_candidates()) throw DataError("model_accuracies: dataset has no candidates");
  const size_t k = train.num_models();
  std::vector<double> acc(k, 0.0);
  for (const auto& inst : train.instances) {
    const auto& cand = train.candidates_for(inst.id);
    for (size_t j = 0; j < k; ++j) {
      acc[j] += score(metric, cand.answers[j], inst.gold_answers);
    }
  }
  for (double& a : acc) a /= static_cast<double>(train.instances.size());
  return acc;
}

OlaIndex ola_fit(const Dataset& train, const Encoder& encoder, MetricKind metric, size_t k) {
  if (!train.has_candidates()) throw DataError("ola_fit: dataset has no candidates");
  const size_t n = train.instances.size();
  if (k == 0 || k > n) {
    throw ConfigError("ola_fit: k=" + std::to_string(k) + " out of range for n=" +
                      std::to_string(n));
  }
  OlaIndex index;
  index.k_neighbors = k;
  index.queries.reserve(n);
  index.correctness.rows = n;
  index.correctness.cols = train.num_models();
  index.correctness.values.resize(n * train.num_models());
  for (size_t i = 0; i < n; ++i) {
    const Instance& inst = train.instances[i];
    index.queries.push_back(encoder.encode_query(inst));
    const auto& cand = train.candidates_for(inst.id);
    for (size_t j = 0; j < train.num_models(); ++j) {
      index.correctness.values[i * train.num_models() + j] =
          score(metric, cand.answers[j], inst.gold_answers);
    }
  }
  return index;
}

size_t ola_select(const OlaIndex& index, const FeatureVector& query) {
  const size_t n = index.queries.size();
  if (n == 0) throw DataError("ola_select: empty index");

  // Cosine distance on unit vectors; stable tie order by train position.
  std::vector<std::pair<double, size_t>> dist;
  dist.reserve(n);
  for (size_t i = 0; i < n; ++i) {
    dist.emplace_back(1.0 - dot(index.queries[i], query), i);
  }
  const size_t k = std::min(index.k_neighbors, n);
  std::partial_sort(dist.begin(), dist.begin() + static_cast<ptrdiff_t>(k), dist.end());

  const size_t cols = index.correctness.cols;
  std::vector<double> competence(cols, 0.0);
  for (size_t r = 0; r < k; ++r) {
    const size_t row = dist[r].second;
    for (size_t j = 0; j < cols; ++j) competence[j] += index.correctness.at(row, j);
  }
  size_t winner = 0;
  for (size_t j = 1; j < cols; ++j) {
    if (competence[j] > competence[winner]) winner = j;
  }
  return winner;
}

}  // namespace infosel
