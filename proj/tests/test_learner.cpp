#include "infosel/learner.hpp"

#include <algorithm>
#include <cmath>

#include "doctest.h"
#include "infosel/harness.hpp"
#include "infosel/rng.hpp"
#include "test_util.hpp"

using namespace infosel;

namespace {

EncoderConfig enc_config(size_t dim = 512) {
  EncoderConfig c;
  c.dim = dim;
  return c;
}

TrainConfig quick_train(size_t epochs = 12, uint64_t seed = 0) {
  TrainConfig c;
  c.epochs = epochs;
  c.batch_size = 16;
  c.seed = seed;
  return c;
}

// Fraction of instances where the selector picks the gold-copying candidate.
double selection_accuracy(const SelectorModel& model, const Dataset& test, const Encoder& enc) {
  size_t hits = 0;
  for (const auto& inst : test.instances) {
    const auto& cand = test.candidates_for(inst.id);
    std::vector<FeatureVector> feats;
    for (const auto& a : cand.answers) feats.push_back(enc.encode_tqa(default_prompt(inst), a));
    const auto sel = select_winner(model, feats);
    if (cand.answers[sel.winner] == inst.gold_answers[0]) ++hits;
  }
  return static_cast<double>(hits) / static_cast<double>(test.size());
}

}  // namespace

TEST_CASE("make_records reproduces metric targets") {
  const Dataset ds = gen_synthetic({20, 3, PlantedRule::QuestionCue, 5});
  const Encoder enc{enc_config()};
  const auto records = make_records(ds, enc, MetricKind::TokenF1);
  REQUIRE(records.size() == 20);
  for (size_t i = 0; i < records.size(); ++i) {
    const auto& rec = records[i];
    const auto& inst = ds.instances[i];
    const auto& cand = ds.candidates_for(inst.id);
    REQUIRE(rec.features.size() == 3);
    REQUIRE(rec.targets.size() == 3);
    for (size_t j = 0; j < 3; ++j) {
      CHECK(rec.targets[j] ==
            doctest::Approx(token_f1(cand.answers[j], inst.gold_answers)));
    }
    // exactly one candidate copies the gold
    CHECK(std::count(rec.targets.begin(), rec.targets.end(), 1.0) == 1);
  }
}

TEST_CASE("train_selector learns a planted question cue") {
  const Dataset train = gen_synthetic({500, 3, PlantedRule::QuestionCue, 1});
  const Dataset test = gen_synthetic({200, 3, PlantedRule::QuestionCue, 2});
  const Encoder enc{enc_config()};
  const auto records = make_records(train, enc, MetricKind::ExactMatch);

  SUBCASE("per-model head") {
    const auto model =
        train_selector(records, quick_train(), HeadMode::PerModel, train.roster, enc.config());
    CHECK(selection_accuracy(model, test, enc) >= 0.95);
  }
  SUBCASE("shared head") {
    const auto model =
        train_selector(records, quick_train(), HeadMode::Shared, train.roster, enc.config());
    CHECK(selection_accuracy(model, test, enc) >= 0.95);
  }
}

TEST_CASE("train_selector is bitwise deterministic per seed") {
  const Dataset train = gen_synthetic({50, 3, PlantedRule::QuestionCue, 3});
  const Encoder enc{enc_config(256)};
  const auto records = make_records(train, enc, MetricKind::ExactMatch);
  const auto a = train_selector(records, quick_train(4, 9), HeadMode::PerModel);
  const auto b = train_selector(records, quick_train(4, 9), HeadMode::PerModel);
  CHECK(a.weights == b.weights);
  CHECK(a.biases == b.biases);

  const auto c = train_selector(records, quick_train(4, 10), HeadMode::PerModel);
  CHECK(a.weights != c.weights);
}

TEST_CASE("all-zero targets drive logits negative; ties fall to index 0") {
  Rng rng(4);
  std::vector<TrainingRecord> records;
  for (int i = 0; i < 30; ++i) {
    TrainingRecord rec;
    rec.instance_id = "z" + std::to_string(i);
    for (int j = 0; j < 3; ++j) {
      FeatureVector f(64);
      for (double& x : f) x = rng.uniform();
      l2_normalize(f);
      rec.features.push_back(std::move(f));
      rec.targets.push_back(0.0);
    }
    records.push_back(std::move(rec));
  }
  const auto model = train_selector(records, quick_train(20), HeadMode::Shared);
  const auto sel = select_winner(model, records.front().features);
  for (double s : sel.scores) CHECK(s < 0.5);

  // identical features under the shared head leave only the tie rule
  std::vector<FeatureVector> same(3, records.front().features.front());
  CHECK(select_winner(model, same).winner == 0);
}

TEST_CASE("sgd optimizer trains and reports a loss curve") {
  const Dataset train = gen_synthetic({300, 3, PlantedRule::QuestionCue, 17});
  const Dataset test = gen_synthetic({100, 3, PlantedRule::QuestionCue, 18});
  const Encoder enc{enc_config()};
  const auto records = make_records(train, enc, MetricKind::ExactMatch);

  TrainConfig cfg;
  cfg.optimizer = OptimizerKind::Sgd;
  cfg.learning_rate = 0.5;
  cfg.epochs = 30;
  cfg.batch_size = 16;

  std::vector<double> curve;
  const auto model =
      train_selector(records, cfg, HeadMode::PerModel, train.roster, enc.config(), &curve);
  REQUIRE(curve.size() == 30);
  CHECK(curve.back() < curve.front());
  CHECK(selection_accuracy(model, test, enc) >= 0.9);

  std::vector<double> curve2;
  const auto again =
      train_selector(records, cfg, HeadMode::PerModel, train.roster, enc.config(), &curve2);
  CHECK(again.weights == model.weights);  // sgd path deterministic too
  CHECK(curve2 == curve);
}

TEST_CASE("train_selector input validation") {
  CHECK_THROWS_AS(train_selector({}, quick_train(), HeadMode::PerModel), DataError);

  TrainingRecord rec;
  rec.instance_id = "a";
  rec.features = {FeatureVector{}};
  rec.targets = {0.5};
  CHECK_THROWS_AS(train_selector({rec}, quick_train(), HeadMode::PerModel), DataError);

  TrainConfig bad = quick_train();
  bad.learning_rate = 0.0;
  TrainingRecord ok;
  ok.instance_id = "b";
  ok.features = {FeatureVector(8, 0.5)};
  ok.targets = {1.0};
  CHECK_THROWS_AS(train_selector({ok}, bad, HeadMode::PerModel), ConfigError);
}

TEST_CASE("select_winner edge rules") {
  SelectorModel shared;
  shared.head_mode = HeadMode::Shared;
  shared.feature_dim = 4;
  shared.weights = {{1.0, -0.5, 0.25, 0.0}};
  shared.biases = {0.1};

  // K=1 trivially picks 0
  CHECK(select_winner(shared, {FeatureVector{0.1, 0.2, 0.3, 0.4}}).winner == 0);

  // identical features under a shared head tie to index 0
  std::vector<FeatureVector> same(3, FeatureVector{0.5, 0.5, 0.0, 0.0});
  CHECK(select_winner(shared, same).winner == 0);

  // permuting candidates permutes scores identically
  std::vector<FeatureVector> feats = {
      {1.0, 0.0, 0.0, 0.0}, {0.0, 1.0, 0.0, 0.0}, {0.0, 0.0, 1.0, 0.0}};
  const auto base = select_winner(shared, feats);
  std::vector<FeatureVector> rotated = {feats[1], feats[2], feats[0]};
  const auto rot = select_winner(shared, rotated);
  for (size_t j = 0; j < 3; ++j) {
    CHECK(rot.scores[j] == doctest::Approx(base.scores[(j + 1) % 3]));
  }
}

TEST_CASE("per-model head is position-aware, not permutation-equivariant") {
  SelectorModel per_model;
  per_model.head_mode = HeadMode::PerModel;
  per_model.feature_dim = 4;
  per_model.weights = {{1.0, 0.0, 0.0, 0.0}, {0.0, 1.0, 0.0, 0.0}, {0.0, 0.0, 1.0, 0.0}};
  per_model.biases = {0.0, 0.0, 0.0};

  std::vector<FeatureVector> feats = {
      {1.0, 0.0, 0.0, 0.0}, {0.0, 1.0, 0.0, 0.0}, {0.0, 0.0, 0.0, 1.0}};
  const auto base = select_winner(per_model, feats);
  std::vector<FeatureVector> rotated = {feats[1], feats[2], feats[0]};
  const auto rot = select_winner(per_model, rotated);
  // model identity is a feature: rotating candidates does not rotate scores
  bool equivariant = true;
  for (size_t j = 0; j < 3; ++j) {
    if (std::abs(rot.scores[j] - base.scores[(j + 1) % 3]) > 1e-12) equivariant = false;
  }
  CHECK_FALSE(equivariant);
}

namespace {

// Deterministic random model/record pair for gradient checking.
std::pair<SelectorModel, TrainingRecord> random_case(uint64_t seed, HeadMode mode, size_t dim = 64,
                                                     size_t k = 3) {
  Rng rng(seed);
  SelectorModel model;
  model.head_mode = mode;
  model.feature_dim = dim;
  const size_t rows = mode == HeadMode::PerModel ? k : 1;
  model.weights.resize(rows);
  model.biases.resize(rows);
  for (size_t r = 0; r < rows; ++r) {
    model.weights[r].resize(dim);
    for (double& w : model.weights[r]) w = 2.0 * rng.uniform() - 1.0;
    model.biases[r] = 2.0 * rng.uniform() - 1.0;
  }
  TrainingRecord rec;
  rec.instance_id = "r" + std::to_string(seed);
  for (size_t j = 0; j < k; ++j) {
    FeatureVector f(dim);
    for (double& x : f) x = 2.0 * rng.uniform() - 1.0;
    l2_normalize(f);
    rec.features.push_back(std::move(f));
    rec.targets.push_back(rng.uniform());
  }
  return {std::move(model), std::move(rec)};
}

}  // namespace

TEST_CASE("grad_check stays under 1e-4 on random cases") {
  for (uint64_t seed = 0; seed < 25; ++seed) {
    const auto mode = seed % 2 == 0 ? HeadMode::PerModel : HeadMode::Shared;
    const auto [model, rec] = random_case(seed, mode);
    CHECK(grad_check(model, rec, 1e-5, 20, seed) < 1e-4);
  }
}

TEST_CASE("zero feature vector means zero gradient on its weight coordinates") {
  auto [model, rec] = random_case(7, HeadMode::PerModel);
  rec.features[1].assign(model.feature_dim, 0.0);
  const double base = selector_loss(model, rec);
  SelectorModel probe = model;
  probe.weights[1][5] += 0.25;  // only candidate 1's weights
  CHECK(selector_loss(probe, rec) == base);
}

TEST_CASE("central differences are second order in eps") {
  const auto [model, rec] = random_case(11, HeadMode::PerModel);
  const double e1 = grad_check(model, rec, 1e-3, 20, 99);
  const double e2 = grad_check(model, rec, 2e-3, 20, 99);
  CHECK(e2 <= 10.0 * e1 + 1e-12);
}

TEST_CASE("train_ft builds a frequency vocabulary and learns a mapping") {
  const Dataset train = gen_synthetic({400, 3, PlantedRule::UnanswerableVqa, 13});
  EncoderConfig c = enc_config();
  c.use_answer = false;
  const Encoder enc{c};
  const auto ft = train_ft(train, enc, MetricKind::VqaAccuracy, 3000, quick_train(20));

  // ~30% unanswerable golds put "unanswerable" in the vocabulary (top slot)
  CHECK(std::find(ft.vocabulary.begin(), ft.vocabulary.end(), "unanswerable") !=
        ft.vocabulary.end());
  CHECK(ft.vocabulary.front() == "unanswerable");

  const Dataset test = gen_synthetic({150, 3, PlantedRule::UnanswerableVqa, 14});
  size_t hits = 0;
  for (const auto& inst : test.instances) {
    const auto pred = ft_predict(ft, ft_features(enc, inst));
    CHECK(pred.answer == ft.vocabulary[pred.class_index]);  // decoding rule
    if (vqa_accuracy(pred.answer, inst.gold_answers) == 1.0) ++hits;
  }
  CHECK(static_cast<double>(hits) / static_cast<double>(test.size()) > 0.8);
}

TEST_CASE("train_ft guards") {
  const Dataset train = gen_synthetic({20, 3, PlantedRule::QuestionCue, 1});
  const Encoder with_answers{enc_config()};
  CHECK_THROWS_AS(train_ft(train, with_answers, MetricKind::ExactMatch), ConfigError);

  EncoderConfig c = enc_config();
  c.use_answer = false;
  const Encoder enc{c};
  // vocab truncation keeps training runnable even when golds fall outside
  const auto ft = train_ft(train, enc, MetricKind::ExactMatch, 1, quick_train(2));
  CHECK(ft.vocabulary.size() == 1);
}

TEST_CASE("train_star picks the reliable side") {
  const Dataset data = gen_synthetic({300, 3, PlantedRule::QuestionCue, 21});
  const Dataset held = gen_synthetic({100, 3, PlantedRule::QuestionCue, 22});
  const Encoder enc{enc_config()};

  AnswerMap right, wrong;
  for (const Dataset* d : {&data, &held}) {
    for (const auto& inst : d->instances) {
      right[inst.id] = inst.gold_answers[0];
      wrong[inst.id] = "zzz bogus";
    }
  }

  SUBCASE("stage-1 right, ft wrong -> star goes stage-1") {
    const auto star = train_star(data, right, wrong, enc, MetricKind::ExactMatch, quick_train());
    CHECK(star.inner.roster.size() == 2);
    size_t side0 = 0;
    for (const auto& inst : held.instances) {
      const auto sel = star_select(star, inst, right.at(inst.id), wrong.at(inst.id), enc);
      if (sel.winner == 0) ++side0;
    }
    CHECK(static_cast<double>(side0) / static_cast<double>(held.size()) >= 0.95);
  }
  SUBCASE("mirrored: ft right -> star goes ft") {
    const auto star = train_star(data, wrong, right, enc, MetricKind::ExactMatch, quick_train());
    size_t side1 = 0;
    for (const auto& inst : held.instances) {
      const auto sel = star_select(star, inst, wrong.at(inst.id), right.at(inst.id), enc);
      if (sel.winner == 1) ++side1;
    }
    CHECK(static_cast<double>(side1) / static_cast<double>(held.size()) >= 0.95);
  }
}

TEST_CASE("selector model save/load round trip and compatibility checks") {
  TempDir dir;
  const Dataset train = gen_synthetic({30, 3, PlantedRule::QuestionCue, 2});
  const Encoder enc{enc_config(256)};
  const auto records = make_records(train, enc, MetricKind::ExactMatch);
  const auto model =
      train_selector(records, quick_train(3), HeadMode::PerModel, train.roster, enc.config());

  const std::string path = dir.file("model.json");
  save_selector(model, path);
  const SelectorModel back = load_selector(path);
  CHECK(back.weights == model.weights);
  CHECK(back.biases == model.biases);
  CHECK(back.roster == model.roster);
  CHECK(back.head_mode == model.head_mode);
  CHECK(back.encoder_config.dim == model.encoder_config.dim);

  require_compatible(back, train);
  Dataset other = train;
  other.roster = {"x", "y", "z"};
  CHECK_THROWS_AS(require_compatible(back, other), ConfigError);

  write_file(dir.file("bad.json"), R"({"format_version": 999, "kind": "selector"})");
  CHECK_THROWS_AS(load_selector(dir.file("bad.json")), DataError);
}

TEST_CASE("ft save/load round trip") {
  TempDir dir;
  const Dataset train = gen_synthetic({50, 3, PlantedRule::UnanswerableVqa, 31});
  EncoderConfig c = enc_config(256);
  c.use_answer = false;
  const Encoder enc{c};
  const auto ft = train_ft(train, enc, MetricKind::VqaAccuracy, 100, quick_train(2));
  const std::string path = dir.file("ft.json");
  save_ft(ft, path);
  const auto back = load_ft(path);
  CHECK(back.vocabulary == ft.vocabulary);
  CHECK(back.weights == ft.weights);
  CHECK(back.feature_dim == ft.feature_dim);
}
