#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <unordered_map>
#include <vector>

#include "infosel/errors.hpp"

namespace infosel {

enum class TaskKind { Tqa, Vqa };

const char* to_string(TaskKind k);
TaskKind task_kind_from_string(const std::string& s);

// Image-side surrogate: region feature vectors plus detected object tags.
// Features are consumed from files, never computed here.
struct VisualContext {
  std::vector<std::vector<double>> region_features;
  std::vector<std::string> tags;

  // All region vectors must share one dimensionality; 0 when empty.
  size_t region_dim() const;
};

struct Instance {
  std::string id;
  std::optional<std::string> context;
  std::string question;
  std::vector<std::string> gold_answers;
  std::optional<VisualContext> visual;
  TaskKind task_kind = TaskKind::Tqa;
};

// Per-instance candidate answers, one per base model, in roster order.
struct CandidateSet {
  std::string instance_id;
  std::vector<std::string> answers;
};

struct Dataset {
  std::vector<Instance> instances;
  std::unordered_map<std::string, CandidateSet> candidates;
  std::vector<std::string> roster;  // shared model-name order

  bool has_candidates() const { return !candidates.empty(); }
  size_t size() const { return instances.size(); }
  size_t num_models() const { return roster.size(); }

  const CandidateSet& candidates_for(const std::string& instance_id) const;

  // Every instance has a candidate set of roster size; golds non-empty.
  void validate() const;
};

struct SplitSpec {
  double train_fraction = 0.8;
  uint64_t seed = 0;
};

// Line-delimited JSON records. Unknown fields are ignored; the roster is
// inferred from the first record carrying candidates and enforced after.
// "visual_ref" fields resolve relative to the dataset file's directory.
Dataset load_dataset(const std::string& path);

// Inverse of load_dataset up to field order.
void write_dataset(const Dataset& dataset, const std::string& path);

// Deterministic disjoint cover; |train| = round(train_fraction * N).
std::pair<Dataset, Dataset> split(const Dataset& dataset, const SplitSpec& spec);

// Uniform sample without replacement, deterministic per seed.
Dataset subsample(const Dataset& dataset, size_t n, uint64_t seed);

// Roster reduction for leave-one-model-out runs.
Dataset drop_model(const Dataset& dataset, const std::string& model_name);

}  // namespace infosel
