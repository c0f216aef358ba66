#pragma once

#include <cstdint>
#include <functional>
#include <map>
#include <string>
#include <vector>

#include "infosel/encode.hpp"
#include "infosel/metrics.hpp"

namespace infosel {

// Fused per-candidate inputs X_i with per-candidate quality targets Y_i.
struct TrainingRecord {
  std::string instance_id;
  std::vector<FeatureVector> features;  // K entries
  std::vector<double> targets;          // K entries in [0,1]
};

enum class HeadMode { PerModel, Shared };
enum class OptimizerKind { Adam, Sgd };

HeadMode head_mode_from_string(const std::string& s);
const char* to_string(HeadMode m);

struct TrainConfig {
  // Desk-scale default for the hashed encoder; transformer fine-tuning
  // setups typically run far lower rates (5e-5).
  double learning_rate = 1e-2;
  size_t epochs = 5;        // tqa default; vqa runs usually use 20
  size_t batch_size = 4;    // tqa default; vqa runs usually use 16
  uint64_t seed = 0;
  OptimizerKind optimizer = OptimizerKind::Adam;
  double adam_beta1 = 0.9;
  double adam_beta2 = 0.999;
  double adam_eps = 1e-8;

  void validate() const;
};

// Linear winner-selection head over per-candidate representations.
// PerModel keeps one weight vector per roster slot (position-aware);
// Shared applies a single vector to every candidate.
struct SelectorModel {
  HeadMode head_mode = HeadMode::PerModel;
  std::vector<std::vector<double>> weights;  // K rows (PerModel) or 1 (Shared)
  std::vector<double> biases;                // matches weights rows
  size_t feature_dim = 0;
  std::vector<std::string> roster;
  EncoderConfig encoder_config;

  size_t num_candidates() const {
    return head_mode == HeadMode::PerModel ? weights.size() : roster.size();
  }
};

using PromptFn = std::function<std::string(const Instance&)>;

// context ␟ question, or just the question when context is absent.
std::string default_prompt(const Instance& instance);

// Builds one record per instance: targets are metric scores of each
// candidate against the golds, features come from the encoder.
std::vector<TrainingRecord> make_records(const Dataset& dataset, const Encoder& encoder,
                                         MetricKind metric,
                                         const PromptFn& prompt_fn = default_prompt);

// Minimizes the mean summed binary cross entropy of sigmoid(logit_j)
// against the soft targets. Deterministic given (records, config, mode).
SelectorModel train_selector(const std::vector<TrainingRecord>& records, const TrainConfig& config,
                             HeadMode head_mode, std::vector<std::string> roster = {},
                             EncoderConfig encoder_config = {},
                             std::vector<double>* loss_curve = nullptr);

struct Selection {
  size_t winner = 0;
  std::vector<double> scores;  // sigmoid probabilities per candidate
};

Selection select_winner(const SelectorModel& model, const std::vector<FeatureVector>& features);

// Summed BCE loss of one record under the model; the quantity grad_check
// differentiates.
double selector_loss(const SelectorModel& model, const TrainingRecord& record);

// Analytic gradient vs central finite differences on randomly sampled
// parameter coordinates; returns the max relative error.
double grad_check(const SelectorModel& model, const TrainingRecord& record, double eps = 1e-5,
                  size_t coords = 20, uint64_t seed = 0);

// Frequent-answer classifier: predicts directly from the answer-free input
// representation, so it can emit labels no base model produces.
struct FtClassifier {
  std::vector<std::string> vocabulary;       // surface forms, frequency order
  std::vector<std::vector<double>> weights;  // |vocabulary| rows
  std::vector<double> biases;
  size_t feature_dim = 0;
  EncoderConfig encoder_config;
};

// One-vs-all logistic training over the top vocab_size most frequent
// normalized train gold answers. The encoder must have use_answer=false.
FtClassifier train_ft(const Dataset& train, const Encoder& encoder, MetricKind metric,
                      size_t vocab_size = 3000, const TrainConfig& config = {});

struct FtPrediction {
  std::string answer;
  size_t class_index = 0;
};

FtPrediction ft_predict(const FtClassifier& ft, const FeatureVector& query);

// Answer-free input features for the FT classifier.
FeatureVector ft_features(const Encoder& encoder, const Instance& instance,
                          const PromptFn& prompt_fn = default_prompt);

// Second-stage selector over the two-candidate roster {stage-1 winner
// answer, FT answer}.
struct StarModel {
  SelectorModel inner;
};

inline const char* kStarRosterFirst = "InfoSel";
inline const char* kStarRosterSecond = "FT";

using AnswerMap = std::map<std::string, std::string>;  // instance id -> answer

// Stage-1 winner answers for every instance of the dataset.
AnswerMap selector_answers(const SelectorModel& model, const Dataset& dataset,
                           const Encoder& encoder, const PromptFn& prompt_fn = default_prompt);

AnswerMap ft_answers(const FtClassifier& ft, const Dataset& dataset, const Encoder& ft_encoder,
                     const PromptFn& prompt_fn = default_prompt);

StarModel train_star(const Dataset& data, const AnswerMap& stage1, const AnswerMap& ft,
                     const Encoder& encoder, MetricKind metric, const TrainConfig& config,
                     HeadMode head_mode = HeadMode::PerModel,
                     const PromptFn& prompt_fn = default_prompt);

// Final two-way pick for one instance.
Selection star_select(const StarModel& star, const Instance& instance,
                      const std::string& stage1_answer, const std::string& ft_answer,
                      const Encoder& encoder, const PromptFn& prompt_fn = default_prompt);

// Versioned JSON weight dumps carrying the encoder config and roster.
void save_selector(const SelectorModel& model, const std::string& path);
SelectorModel load_selector(const std::string& path);
void save_ft(const FtClassifier& ft, const std::string& path);
FtClassifier load_ft(const std::string& path);

// Refuses models whose roster or input width cannot serve the dataset.
void require_compatible(const SelectorModel& model, const Dataset& dataset);

}  // namespace infosel
