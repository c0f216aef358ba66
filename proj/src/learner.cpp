#include "infosel/learner.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <unordered_map>

#include "infosel/rng.hpp"
#include "json.hpp"

using json = nlohmann::json;

namespace infosel {

HeadMode head_mode_from_string(const std::string& s) {
  if (s == "per_model") return HeadMode::PerModel;
  if (s == "shared") return HeadMode::Shared;
  throw ConfigError("unknown head mode: \"" + s + "\"");
}

const char* to_string(HeadMode m) {
  return m == HeadMode::PerModel ? "per_model" : "shared";
}

void TrainConfig::validate() const {
  if (learning_rate <= 0.0) throw ConfigError("learning_rate must be positive");
  if (epochs == 0) throw ConfigError("epochs must be positive");
  if (batch_size == 0) throw ConfigError("batch_size must be positive");
}

std::string default_prompt(const Instance& instance) {
  if (instance.context) return *instance.context + kSep + instance.question;
  return instance.question;
}

namespace {

constexpr double kProbFloor = 1e-12;

double sigmoid(double z) { return 1.0 / (1.0 + std::exp(-z)); }

double bce(double p, double y) {
  const double q = std::clamp(p, kProbFloor, 1.0 - kProbFloor);
  return -(y * std::log(q) + (1.0 - y) * std::log(1.0 - q));
}

FeatureVector candidate_features(const Encoder& encoder, const Instance& inst,
                                 const std::string& answer, size_t model_index,
                                 const PromptFn& prompt_fn) {
  if (encoder.kind() == EncoderKind::External) {
    return encoder.lookup(inst.id, static_cast<int>(model_index));
  }
  if (inst.task_kind == TaskKind::Vqa) {
    return encoder.encode_vqa(inst.visual ? &*inst.visual : nullptr, inst.question, answer);
  }
  return encoder.encode_tqa(prompt_fn(inst), answer);
}

// Adam/SGD over a flat parameter vector.
class Optimizer {
 public:
  Optimizer(const TrainConfig& cfg, size_t n_params)
      : cfg_(cfg), m_(n_params, 0.0), v_(n_params, 0.0) {}

  void step(std::vector<double>& params, const std::vector<double>& grad) {
    if (cfg_.optimizer == OptimizerKind::Sgd) {
      for (size_t i = 0; i < params.size(); ++i) params[i] -= cfg_.learning_rate * grad[i];
      return;
    }
    ++t_;
    const double bc1 = 1.0 - std::pow(cfg_.adam_beta1, static_cast<double>(t_));
    const double bc2 = 1.0 - std::pow(cfg_.adam_beta2, static_cast<double>(t_));
    for (size_t i = 0; i < params.size(); ++i) {
      m_[i] = cfg_.adam_beta1 * m_[i] + (1.0 - cfg_.adam_beta1) * grad[i];
      v_[i] = cfg_.adam_beta2 * v_[i] + (1.0 - cfg_.adam_beta2) * grad[i] * grad[i];
      const double mhat = m_[i] / bc1;
      const double vhat = v_[i] / bc2;
      params[i] -= cfg_.learning_rate * mhat / (std::sqrt(vhat) + cfg_.adam_eps);
    }
  }

 private:
  TrainConfig cfg_;
  uint64_t t_ = 0;
  std::vector<double> m_, v_;
};

}  // namespace

std::vector<TrainingRecord> make_records(const Dataset& dataset, const Encoder& encoder,
                                         MetricKind metric, const PromptFn& prompt_fn) {
  if (!dataset.has_candidates()) throw DataError("make_records: dataset has no candidates");
  std::vector<TrainingRecord> records;
  records.reserve(dataset.instances.size());
  for (const auto& inst : dataset.instances) {
    const auto& cand = dataset.candidates_for(inst.id);
    TrainingRecord rec;
    rec.instance_id = inst.id;
    rec.features.reserve(cand.answers.size());
    rec.targets.reserve(cand.answers.size());
    for (size_t j = 0; j < cand.answers.size(); ++j) {
      rec.features.push_back(candidate_features(encoder, inst, cand.answers[j], j, prompt_fn));
      rec.targets.push_back(score(metric, cand.answers[j], inst.gold_answers));
    }
    records.push_back(std::move(rec));
  }
  return records;
}

SelectorModel train_selector(const std::vector<TrainingRecord>& records, const TrainConfig& config,
                             HeadMode head_mode, std::vector<std::string> roster,
                             EncoderConfig encoder_config, std::vector<double>* loss_curve) {
  config.validate();
  if (records.empty()) throw DataError("train_selector: no records");
  const size_t k = records.front().features.size();
  const size_t dim = records.front().features.empty() ? 0 : records.front().features.front().size();
  if (k == 0 || dim == 0) throw DataError("train_selector: zero-length features");
  for (const auto& rec : records) {
    if (rec.features.size() != k || rec.targets.size() != k) {
      throw DataError("train_selector: inconsistent candidate count at \"" + rec.instance_id + "\"");
    }
    for (const auto& f : rec.features) {
      if (f.size() != dim) {
        throw DataError("train_selector: inconsistent feature length at \"" + rec.instance_id +
                        "\"");
      }
    }
  }

  const size_t rows = head_mode == HeadMode::PerModel ? k : 1;
  // Flat layout: rows * dim weights, then rows biases.
  std::vector<double> params(rows * dim + rows, 0.0);
  std::vector<double> grad(params.size(), 0.0);
  Optimizer opt(config, params.size());

  std::vector<size_t> order(records.size());
  for (size_t i = 0; i < order.size(); ++i) order[i] = i;
  Rng rng(config.seed);

  for (size_t epoch = 0; epoch < config.epochs; ++epoch) {
    rng.shuffle(order);
    double epoch_loss = 0.0;
    for (size_t start = 0; start < order.size(); start += config.batch_size) {
      const size_t end = std::min(order.size(), start + config.batch_size);
      std::fill(grad.begin(), grad.end(), 0.0);
      double batch_loss = 0.0;
      for (size_t b = start; b < end; ++b) {
        const TrainingRecord& rec = records[order[b]];
        for (size_t j = 0; j < k; ++j) {
          const size_t row = head_mode == HeadMode::PerModel ? j : 0;
          const double* w = params.data() + row * dim;
          const FeatureVector& x = rec.features[j];
          double z = params[rows * dim + row];
          for (size_t d = 0; d < dim; ++d) z += w[d] * x[d];
          const double p = sigmoid(z);
          batch_loss += bce(p, rec.targets[j]);
          const double g = p - rec.targets[j];
          double* gw = grad.data() + row * dim;
          for (size_t d = 0; d < dim; ++d) gw[d] += g * x[d];
          grad[rows * dim + row] += g;
        }
      }
      const double inv = 1.0 / static_cast<double>(end - start);
      for (double& g : grad) g *= inv;
      if (!std::isfinite(batch_loss)) {
        throw NumericError("train_selector: non-finite loss at epoch " + std::to_string(epoch));
      }
      opt.step(params, grad);
      epoch_loss += batch_loss;
    }
    if (loss_curve) loss_curve->push_back(epoch_loss / static_cast<double>(records.size()));
  }

  SelectorModel model;
  model.head_mode = head_mode;
  model.feature_dim = dim;
  model.roster = std::move(roster);
  model.encoder_config = std::move(encoder_config);
  model.weights.resize(rows);
  model.biases.resize(rows);
  for (size_t r = 0; r < rows; ++r) {
    model.weights[r].assign(params.begin() + static_cast<ptrdiff_t>(r * dim),
                            params.begin() + static_cast<ptrdiff_t>((r + 1) * dim));
    model.biases[r] = params[rows * dim + r];
  }
  return model;
}

namespace {

std::vector<double> selector_logits(const SelectorModel& model,
                                    const std::vector<FeatureVector>& features) {
  if (model.head_mode == HeadMode::PerModel && features.size() != model.weights.size()) {
    throw DataError("select_winner: candidate count " + std::to_string(features.size()) +
                    " does not match the trained head count " +
                    std::to_string(model.weights.size()));
  }
  std::vector<double> logits(features.size());
  for (size_t j = 0; j < features.size(); ++j) {
    const size_t row = model.head_mode == HeadMode::PerModel ? j : 0;
    const auto& w = model.weights[row];
    if (features[j].size() != w.size()) {
      throw DataError("select_winner: feature length mismatch");
    }
    double z = model.biases[row];
    for (size_t d = 0; d < w.size(); ++d) z += w[d] * features[j][d];
    logits[j] = z;
  }
  return logits;
}

}  // namespace

Selection select_winner(const SelectorModel& model, const std::vector<FeatureVector>& features) {
  if (features.empty()) throw DataError("select_winner: no candidates");
  const auto logits = selector_logits(model, features);
  Selection sel;
  sel.scores.resize(logits.size());
  for (size_t j = 0; j < logits.size(); ++j) sel.scores[j] = sigmoid(logits[j]);
  sel.winner = 0;
  for (size_t j = 1; j < sel.scores.size(); ++j) {
    if (sel.scores[j] > sel.scores[sel.winner]) sel.winner = j;
  }
  return sel;
}

double selector_loss(const SelectorModel& model, const TrainingRecord& record) {
  const auto logits = selector_logits(model, record.features);
  double loss = 0.0;
  for (size_t j = 0; j < logits.size(); ++j) loss += bce(sigmoid(logits[j]), record.targets[j]);
  return loss;
}

double grad_check(const SelectorModel& model, const TrainingRecord& record, double eps,
                  size_t coords, uint64_t seed) {
  const size_t rows = model.weights.size();
  const size_t dim = model.feature_dim;
  const size_t n_params = rows * dim + rows;

  // Analytic gradient of the per-record loss.
  std::vector<double> grad(n_params, 0.0);
  const auto logits = selector_logits(model, record.features);
  for (size_t j = 0; j < record.features.size(); ++j) {
    const size_t row = model.head_mode == HeadMode::PerModel ? j : 0;
    const double g = sigmoid(logits[j]) - record.targets[j];
    const FeatureVector& x = record.features[j];
    for (size_t d = 0; d < dim; ++d) grad[row * dim + d] += g * x[d];
    grad[rows * dim + row] += g;
  }

  SelectorModel probe = model;
  auto param_ref = [&](size_t idx) -> double& {
    if (idx < rows * dim) return probe.weights[idx / dim][idx % dim];
    return probe.biases[idx - rows * dim];
  };

  Rng rng(seed);
  double max_rel = 0.0;
  for (size_t c = 0; c < coords; ++c) {
    const size_t idx = static_cast<size_t>(rng.below(n_params));
    double& p = param_ref(idx);
    const double saved = p;
    p = saved + eps;
    const double lo_hi = selector_loss(probe, record);
    p = saved - eps;
    const double lo_lo = selector_loss(probe, record);
    p = saved;
    const double numeric = (lo_hi - lo_lo) / (2.0 * eps);
    const double analytic = grad[idx];
    const double denom = std::max({1e-3, std::abs(analytic), std::abs(numeric)});
    max_rel = std::max(max_rel, std::abs(analytic - numeric) / denom);
  }
  return max_rel;
}

FeatureVector ft_features(const Encoder& encoder, const Instance& instance,
                          const PromptFn& prompt_fn) {
  if (encoder.kind() == EncoderKind::External) return encoder.lookup(instance.id, -1);
  if (instance.task_kind == TaskKind::Vqa) {
    return encoder.encode_vqa(instance.visual ? &*instance.visual : nullptr, instance.question,
                              "");
  }
  return encoder.encode_tqa(prompt_fn(instance), "");
}

FtClassifier train_ft(const Dataset& train, const Encoder& encoder, MetricKind metric,
                      size_t vocab_size, const TrainConfig& config) {
  config.validate();
  if (encoder.config().use_answer) {
    throw ConfigError("train_ft: encoder must be configured with use_answer=false");
  }
  if (train.instances.empty()) throw DataError("train_ft: empty dataset");
  if (vocab_size == 0) throw ConfigError("train_ft: vocab_size must be positive");

  // Frequency-ranked vocabulary of normalized train gold answers.
  struct VocabEntry {
    std::string surface;
    size_t count = 0;
    size_t first_seen = 0;
  };
  std::unordered_map<std::string, VocabEntry> by_key;
  size_t seen = 0;
  for (const auto& inst : train.instances) {
    for (const auto& gold : inst.gold_answers) {
      const auto toks = normalize(gold);
      if (toks.empty()) continue;
      std::string key;
      for (const auto& t : toks) {
        if (!key.empty()) key.push_back(' ');
        key += t;
      }
      auto [it, inserted] = by_key.try_emplace(key);
      if (inserted) {
        it->second.surface = gold;
        it->second.first_seen = seen;
      }
      ++it->second.count;
      ++seen;
    }
  }
  if (by_key.empty()) throw DataError("train_ft: empty vocabulary (all golds normalize to nothing)");

  std::vector<std::pair<std::string, VocabEntry>> ranked(by_key.begin(), by_key.end());
  std::sort(ranked.begin(), ranked.end(), [](const auto& a, const auto& b) {
    if (a.second.count != b.second.count) return a.second.count > b.second.count;
    return a.second.first_seen < b.second.first_seen;
  });
  if (ranked.size() > vocab_size) ranked.resize(vocab_size);

  FtClassifier ft;
  ft.encoder_config = encoder.config();
  std::unordered_map<std::string, size_t> key_to_class;
  for (size_t c = 0; c < ranked.size(); ++c) {
    ft.vocabulary.push_back(ranked[c].second.surface);
    key_to_class.emplace(ranked[c].first, c);
  }
  const size_t n_classes = ft.vocabulary.size();

  // Token -> classes index so TokenF1 targets only touch overlapping entries.
  std::unordered_map<std::string, std::vector<size_t>> token_classes;
  if (metric == MetricKind::TokenF1) {
    for (size_t c = 0; c < n_classes; ++c) {
      for (const auto& tok : normalize(ft.vocabulary[c])) token_classes[tok].push_back(c);
    }
  }

  // Features and sparse targets per instance.
  const size_t n = train.instances.size();
  std::vector<FeatureVector> feats(n);
  std::vector<std::vector<std::pair<size_t, double>>> targets(n);
  for (size_t i = 0; i < n; ++i) {
    const Instance& inst = train.instances[i];
    feats[i] = ft_features(encoder, inst);
    std::vector<size_t> cand_classes;
    if (metric == MetricKind::TokenF1) {
      for (const auto& gold : inst.gold_answers) {
        for (const auto& tok : normalize(gold)) {
          auto it = token_classes.find(tok);
          if (it != token_classes.end()) {
            cand_classes.insert(cand_classes.end(), it->second.begin(), it->second.end());
          }
        }
      }
    } else {
      for (const auto& gold : inst.gold_answers) {
        const auto toks = normalize(gold);
        std::string key;
        for (const auto& t : toks) {
          if (!key.empty()) key.push_back(' ');
          key += t;
        }
        auto it = key_to_class.find(key);
        if (it != key_to_class.end()) cand_classes.push_back(it->second);
      }
    }
    std::sort(cand_classes.begin(), cand_classes.end());
    cand_classes.erase(std::unique(cand_classes.begin(), cand_classes.end()), cand_classes.end());
    for (size_t c : cand_classes) {
      const double y = score(metric, ft.vocabulary[c], inst.gold_answers);
      if (y > 0.0) targets[i].emplace_back(c, y);
    }
  }

  const size_t dim = feats.front().size();
  ft.feature_dim = dim;
  std::vector<double> params(n_classes * dim + n_classes, 0.0);
  std::vector<double> grad(params.size(), 0.0);
  Optimizer opt(config, params.size());

  std::vector<size_t> order(n);
  for (size_t i = 0; i < n; ++i) order[i] = i;
  Rng rng(config.seed);

  for (size_t epoch = 0; epoch < config.epochs; ++epoch) {
    rng.shuffle(order);
    for (size_t start = 0; start < n; start += config.batch_size) {
      const size_t end = std::min(n, start + config.batch_size);
      std::fill(grad.begin(), grad.end(), 0.0);
      double batch_loss = 0.0;
      for (size_t b = start; b < end; ++b) {
        const size_t i = order[b];
        const FeatureVector& x = feats[i];
        std::vector<double> dense_y(n_classes, 0.0);
        for (const auto& [c, y] : targets[i]) dense_y[c] = y;
        for (size_t c = 0; c < n_classes; ++c) {
          const double* w = params.data() + c * dim;
          double z = params[n_classes * dim + c];
          for (size_t d = 0; d < dim; ++d) z += w[d] * x[d];
          const double p = sigmoid(z);
          batch_loss += bce(p, dense_y[c]);
          const double g = p - dense_y[c];
          double* gw = grad.data() + c * dim;
          for (size_t d = 0; d < dim; ++d) gw[d] += g * x[d];
          grad[n_classes * dim + c] += g;
        }
      }
      if (!std::isfinite(batch_loss)) {
        throw NumericError("train_ft: non-finite loss at epoch " + std::to_string(epoch));
      }
      const double inv = 1.0 / static_cast<double>(end - start);
      for (double& g : grad) g *= inv;
      opt.step(params, grad);
    }
  }

  ft.weights.resize(n_classes);
  ft.biases.resize(n_classes);
  for (size_t c = 0; c < n_classes; ++c) {
    ft.weights[c].assign(params.begin() + static_cast<ptrdiff_t>(c * dim),
                         params.begin() + static_cast<ptrdiff_t>((c + 1) * dim));
    ft.biases[c] = params[n_classes * dim + c];
  }
  return ft;
}

FtPrediction ft_predict(const FtClassifier& ft, const FeatureVector& query) {
  if (ft.vocabulary.empty()) throw DataError("ft_predict: empty vocabulary");
  if (query.size() != ft.feature_dim) throw DataError("ft_predict: feature length mismatch");
  size_t best = 0;
  double best_z = -std::numeric_limits<double>::infinity();
  for (size_t c = 0; c < ft.vocabulary.size(); ++c) {
    double z = ft.biases[c];
    for (size_t d = 0; d < ft.feature_dim; ++d) z += ft.weights[c][d] * query[d];
    if (z > best_z) {
      best_z = z;
      best = c;
    }
  }
  return {ft.vocabulary[best], best};
}

AnswerMap selector_answers(const SelectorModel& model, const Dataset& dataset,
                           const Encoder& encoder, const PromptFn& prompt_fn) {
  AnswerMap out;
  for (const auto& inst : dataset.instances) {
    const auto& cand = dataset.candidates_for(inst.id);
    std::vector<FeatureVector> feats;
    feats.reserve(cand.answers.size());
    for (size_t j = 0; j < cand.answers.size(); ++j) {
      feats.push_back(candidate_features(encoder, inst, cand.answers[j], j, prompt_fn));
    }
    out[inst.id] = cand.answers[select_winner(model, feats).winner];
  }
  return out;
}

AnswerMap ft_answers(const FtClassifier& ft, const Dataset& dataset, const Encoder& ft_encoder,
                     const PromptFn& prompt_fn) {
  AnswerMap out;
  for (const auto& inst : dataset.instances) {
    out[inst.id] = ft_predict(ft, ft_features(ft_encoder, inst, prompt_fn)).answer;
  }
  return out;
}

namespace {

std::vector<FeatureVector> star_features(const Encoder& encoder, const Instance& inst,
                                         const std::string& stage1_answer,
                                         const std::string& ft_answer,
                                         const PromptFn& prompt_fn) {
  std::vector<FeatureVector> feats;
  feats.reserve(2);
  for (const std::string* ans : {&stage1_answer, &ft_answer}) {
    if (inst.task_kind == TaskKind::Vqa) {
      feats.push_back(
          encoder.encode_vqa(inst.visual ? &*inst.visual : nullptr, inst.question, *ans));
    } else {
      feats.push_back(encoder.encode_tqa(prompt_fn(inst), *ans));
    }
  }
  return feats;
}

}  // namespace

StarModel train_star(const Dataset& data, const AnswerMap& stage1, const AnswerMap& ft,
                     const Encoder& encoder, MetricKind metric, const TrainConfig& config,
                     HeadMode head_mode, const PromptFn& prompt_fn) {
  std::vector<TrainingRecord> records;
  records.reserve(data.instances.size());
  for (const auto& inst : data.instances) {
    auto s1 = stage1.find(inst.id);
    auto s2 = ft.find(inst.id);
    if (s1 == stage1.end() || s2 == ft.end()) {
      throw DataError("train_star: missing stage-1 or ft answer for \"" + inst.id + "\"");
    }
    TrainingRecord rec;
    rec.instance_id = inst.id;
    rec.features = star_features(encoder, inst, s1->second, s2->second, prompt_fn);
    rec.targets = {score(metric, s1->second, inst.gold_answers),
                   score(metric, s2->second, inst.gold_answers)};
    records.push_back(std::move(rec));
  }
  StarModel star;
  star.inner = train_selector(records, config, head_mode,
                              {kStarRosterFirst, kStarRosterSecond}, encoder.config());
  return star;
}

Selection star_select(const StarModel& star, const Instance& instance,
                      const std::string& stage1_answer, const std::string& ft_answer,
                      const Encoder& encoder, const PromptFn& prompt_fn) {
  return select_winner(star.inner,
                       star_features(encoder, instance, stage1_answer, ft_answer, prompt_fn));
}

namespace {

constexpr int kModelFormatVersion = 1;

json selector_to_json(const SelectorModel& model) {
  json j;
  j["format_version"] = kModelFormatVersion;
  j["kind"] = "selector";
  j["head_mode"] = to_string(model.head_mode);
  j["weights"] = model.weights;
  j["biases"] = model.biases;
  j["feature_dim"] = model.feature_dim;
  j["roster"] = model.roster;
  j["encoder"] = encoder_config_to_json(model.encoder_config);
  return j;
}

SelectorModel selector_from_json(const json& j) {
  if (j.value("format_version", -1) != kModelFormatVersion) {
    throw DataError("unsupported model format version");
  }
  if (j.value("kind", "") != "selector") throw DataError("not a selector model file");
  SelectorModel model;
  model.head_mode = head_mode_from_string(j.at("head_mode"));
  model.weights = j.at("weights").get<std::vector<std::vector<double>>>();
  model.biases = j.at("biases").get<std::vector<double>>();
  model.feature_dim = j.at("feature_dim").get<size_t>();
  model.roster = j.at("roster").get<std::vector<std::string>>();
  model.encoder_config = encoder_config_from_json(j.at("encoder"));
  for (const auto& w : model.weights) {
    if (w.size() != model.feature_dim) throw DataError("model weight length mismatch");
    for (double x : w) {
      if (!std::isfinite(x)) throw DataError("model carries non-finite weights");
    }
  }
  return model;
}

}  // namespace

void save_selector(const SelectorModel& model, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw DataError("cannot open model file for writing: " + path);
  out << selector_to_json(model).dump(2) << "\n";
}

SelectorModel load_selector(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open model file: " + path);
  json j;
  try {
    in >> j;
  } catch (const json::exception& e) {
    throw DataError("malformed model file " + path + ": " + e.what());
  }
  return selector_from_json(j);
}

void save_ft(const FtClassifier& ft, const std::string& path) {
  json j;
  j["format_version"] = kModelFormatVersion;
  j["kind"] = "ft";
  j["vocabulary"] = ft.vocabulary;
  j["weights"] = ft.weights;
  j["biases"] = ft.biases;
  j["feature_dim"] = ft.feature_dim;
  j["encoder"] = encoder_config_to_json(ft.encoder_config);
  std::ofstream out(path);
  if (!out) throw DataError("cannot open model file for writing: " + path);
  out << j.dump(2) << "\n";
}

FtClassifier load_ft(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open model file: " + path);
  json j;
  try {
    in >> j;
  } catch (const json::exception& e) {
    throw DataError("malformed model file " + path + ": " + e.what());
  }
  if (j.value("format_version", -1) != kModelFormatVersion) {
    throw DataError("unsupported model format version");
  }
  if (j.value("kind", "") != "ft") throw DataError("not an ft model file");
  FtClassifier ft;
  ft.vocabulary = j.at("vocabulary").get<std::vector<std::string>>();
  ft.weights = j.at("weights").get<std::vector<std::vector<double>>>();
  ft.biases = j.at("biases").get<std::vector<double>>();
  ft.feature_dim = j.at("feature_dim").get<size_t>();
  ft.encoder_config = encoder_config_from_json(j.at("encoder"));
  return ft;
}

void require_compatible(const SelectorModel& model, const Dataset& dataset) {
  if (!model.roster.empty() && model.roster != dataset.roster) {
    throw ConfigError("model roster does not match the dataset roster");
  }
  if (model.head_mode == HeadMode::PerModel && !dataset.roster.empty() &&
      model.weights.size() != dataset.roster.size()) {
    throw ConfigError("model head count does not match the dataset roster size");
  }
}

}  // namespace infosel
