#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "infosel/baselines.hpp"
#include "infosel/collect.hpp"
#include "infosel/learner.hpp"

namespace infosel {

enum class SystemKind { Base, Oracle, Mv, Wv, PageRank, Ola, InfoSel, Ft, InfoSelStar };

SystemKind system_from_string(const std::string& s);
const char* to_string(SystemKind s);

struct SelectorSettings {
  TrainConfig train;
  HeadMode head_mode = HeadMode::PerModel;
  size_t vocab_size = 3000;
  size_t ola_k = 7;
  bool star_on_val = false;  // stage-2 training data: train split unless set
};

struct ExperimentConfig {
  std::string train_path;
  std::string val_path;  // optional
  std::string test_path;
  MetricKind metric = MetricKind::TokenF1;
  std::vector<SystemKind> systems;
  EncoderConfig encoder;
  SelectorSettings selector;
  std::optional<PromptTemplate> prompt_template;
  std::string external_vectors;   // optional precomputed-embedding file
  std::string ft_predictions;     // optional imported FT answers (id + 1 column)
  bool compare_fusion = false;    // adds fused + concat InfoSel rows
  std::string out_dir = "out";
  uint64_t seed = 0;
};

ExperimentConfig load_experiment_config(const std::string& path);

// In-memory variant for callers that already hold the datasets.
struct ExperimentData {
  Dataset train;
  std::optional<Dataset> val;
  Dataset test;
};

// Trains the requested learners on train, evaluates every requested system
// on test, writes report.csv and per_instance.jsonl under out_dir. Base
// model rows and the Oracle row are always included.
std::vector<EvalReport> run_experiment(const ExperimentConfig& config);
std::vector<EvalReport> run_experiment(const ExperimentConfig& config, const ExperimentData& data);

struct SweepConfig {
  ExperimentConfig experiment;
  std::vector<size_t> sizes;
  std::vector<uint64_t> seeds;  // subsample seeds; one cell per (size, seed)
};

SweepConfig load_sweep_config(const std::string& path);

struct SweepRow {
  std::string system;
  size_t size = 0;
  uint64_t seed = 0;
  double mean_score = 0.0;
};

// Long-form rows plus per-(system, size) mean/std aggregates; both written
// as CSV under out_dir.
std::vector<SweepRow> sweep(const SweepConfig& config);
std::vector<SweepRow> sweep(const SweepConfig& config, const ExperimentData& data);

// Retrains the selector with and without one base model; returns both
// InfoSel reports (full first).
std::pair<EvalReport, EvalReport> ablate_models(const ExperimentConfig& config,
                                                const std::string& drop);
std::pair<EvalReport, EvalReport> ablate_models(const ExperimentConfig& config,
                                                const ExperimentData& data,
                                                const std::string& drop);

// Fraction of instances for which each roster model was chosen.
std::map<std::string, double> selection_shares(const std::vector<size_t>& chosen_indices,
                                               const std::vector<std::string>& roster);

enum class PlantedRule { QuestionCue, UnanswerableVqa, JointCue };

PlantedRule rule_from_string(const std::string& s);

struct SynthSpec {
  size_t n = 1000;
  size_t k = 3;
  PlantedRule rule = PlantedRule::QuestionCue;
  uint64_t seed = 0;
};

// Self-labelling benchmark families. question_cue: a token in the question
// names the one model that copies the gold answer. unanswerable_vqa: a vqa
// set where 30% of golds are "unanswerable", absent from every candidate.
// joint_cue: the winner is marked by a question/answer token match, visible
// only to joint representations.
Dataset gen_synthetic(const SynthSpec& spec);

}  // namespace infosel
