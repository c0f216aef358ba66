#include "infosel/harness.hpp"

#include <algorithm>
#include <filesystem>
#include <set>

#include "doctest.h"
#include "test_util.hpp"

using namespace infosel;
namespace fs = std::filesystem;

namespace {

const EvalReport& row(const std::vector<EvalReport>& reports, const std::string& name) {
  for (const auto& rep : reports) {
    if (rep.system_name == name) return rep;
  }
  REQUIRE_MESSAGE(false, "missing report row: " << name);
  static EvalReport dummy;
  return dummy;
}

ExperimentConfig synth_config(MetricKind metric, std::vector<SystemKind> systems,
                              const std::string& out_dir = "") {
  ExperimentConfig cfg;
  cfg.metric = metric;
  cfg.systems = std::move(systems);
  cfg.encoder.dim = 512;
  cfg.selector.train.epochs = 10;
  cfg.selector.train.batch_size = 16;
  cfg.out_dir = out_dir;
  return cfg;
}

}  // namespace

TEST_CASE("selection_shares sums to one") {
  const std::vector<std::string> roster = {"a", "b", "c", "d"};
  const auto all_first = selection_shares({0, 0, 0, 0}, roster);
  CHECK(all_first.at("a") == doctest::Approx(1.0));
  CHECK(all_first.at("b") == doctest::Approx(0.0));

  const auto uniform = selection_shares({0, 1, 2, 3}, roster);
  double sum = 0.0;
  for (const auto& [m, s] : uniform) {
    CHECK(s == doctest::Approx(0.25));
    sum += s;
  }
  CHECK(sum == doctest::Approx(1.0).epsilon(1e-9));

  CHECK_THROWS_AS(selection_shares({}, roster), DataError);
}

TEST_CASE("gen_synthetic constructions") {
  SUBCASE("question cue: oracle is perfect, exactly one candidate right") {
    const Dataset ds = gen_synthetic({300, 3, PlantedRule::QuestionCue, 7});
    CHECK(oracle(ds, MetricKind::ExactMatch).mean_score == doctest::Approx(100.0));
    for (const auto& inst : ds.instances) {
      const auto& cand = ds.candidates_for(inst.id);
      size_t right = 0;
      for (const auto& a : cand.answers) {
        if (exact_match(a, inst.gold_answers) == 1.0) ++right;
      }
      CHECK(right == 1);
    }
  }
  SUBCASE("unanswerable variant keeps the oracle below 100") {
    const Dataset ds = gen_synthetic({400, 3, PlantedRule::UnanswerableVqa, 7});
    const double mean = oracle(ds, MetricKind::VqaAccuracy).mean_score;
    CHECK(mean < 100.0);
    CHECK(mean > 50.0);  // answerable share is still solvable
    size_t unanswerable = 0;
    for (const auto& inst : ds.instances) {
      if (inst.gold_answers.front() == "unanswerable") ++unanswerable;
      CHECK(inst.visual.has_value());
      CHECK(inst.gold_answers.size() == 10);
    }
    const double share = static_cast<double>(unanswerable) / 400.0;
    CHECK(share > 0.2);
    CHECK(share < 0.4);
  }
  SUBCASE("k below 2 is rejected") {
    CHECK_THROWS_AS(gen_synthetic({10, 1, PlantedRule::QuestionCue, 0}), ConfigError);
  }
  SUBCASE("deterministic per seed") {
    const Dataset a = gen_synthetic({25, 3, PlantedRule::JointCue, 3});
    const Dataset b = gen_synthetic({25, 3, PlantedRule::JointCue, 3});
    for (size_t i = 0; i < a.size(); ++i) {
      CHECK(a.instances[i].question == b.instances[i].question);
      CHECK(a.candidates_for(a.instances[i].id).answers ==
            b.candidates_for(b.instances[i].id).answers);
    }
  }
}

TEST_CASE("run_experiment emits base, oracle and selector rows") {
  TempDir dir;
  ExperimentData data;
  data.train = gen_synthetic({300, 3, PlantedRule::QuestionCue, 1});
  data.test = gen_synthetic({150, 3, PlantedRule::QuestionCue, 2});

  ExperimentConfig cfg = synth_config(
      MetricKind::ExactMatch,
      {SystemKind::Base, SystemKind::Oracle, SystemKind::Mv, SystemKind::Wv, SystemKind::PageRank,
       SystemKind::Ola, SystemKind::InfoSel},
      dir.file("out"));
  const auto reports = run_experiment(cfg, data);

  const double oracle_mean = row(reports, "Oracle").mean_score;
  CHECK(oracle_mean == doctest::Approx(100.0));
  for (const auto& rep : reports) {
    CHECK(rep.mean_score <= oracle_mean + 1e-9);
    CHECK(rep.n == 150);
  }
  CHECK(row(reports, "InfoSel").mean_score >= 95.0);
  REQUIRE(row(reports, "InfoSel").selection_shares.has_value());

  CHECK(fs::exists(dir.file("out") + "/report.csv"));
  CHECK(fs::exists(dir.file("out") + "/per_instance.jsonl"));
}

TEST_CASE("run_experiment is byte-identical across reruns") {
  TempDir dir;
  ExperimentData data;
  data.train = gen_synthetic({120, 3, PlantedRule::QuestionCue, 5});
  data.test = gen_synthetic({80, 3, PlantedRule::QuestionCue, 6});

  ExperimentConfig cfg = synth_config(MetricKind::ExactMatch,
                                      {SystemKind::Base, SystemKind::Oracle, SystemKind::Mv,
                                       SystemKind::InfoSel},
                                      dir.file("a"));
  run_experiment(cfg, data);
  cfg.out_dir = dir.file("b");
  run_experiment(cfg, data);

  CHECK(read_file(dir.file("a") + "/report.csv") == read_file(dir.file("b") + "/report.csv"));
  CHECK(read_file(dir.file("a") + "/per_instance.jsonl") ==
        read_file(dir.file("b") + "/per_instance.jsonl"));
}

TEST_CASE("run_experiment config validation") {
  ExperimentData data;
  data.train = gen_synthetic({30, 3, PlantedRule::QuestionCue, 1});
  data.test = gen_synthetic({20, 3, PlantedRule::QuestionCue, 2});

  // star without infosel
  ExperimentConfig cfg = synth_config(MetricKind::ExactMatch,
                                      {SystemKind::Ft, SystemKind::InfoSelStar});
  CHECK_THROWS_AS(run_experiment(cfg, data), ConfigError);

  // star without ft enabled or imported
  cfg = synth_config(MetricKind::ExactMatch, {SystemKind::InfoSel, SystemKind::InfoSelStar});
  CHECK_THROWS_AS(run_experiment(cfg, data), ConfigError);

  // star on val without a val split
  cfg = synth_config(MetricKind::ExactMatch,
                     {SystemKind::InfoSel, SystemKind::Ft, SystemKind::InfoSelStar});
  cfg.selector.star_on_val = true;
  CHECK_THROWS_AS(run_experiment(cfg, data), ConfigError);
}

TEST_CASE("imported ft predictions feed the two-stage path") {
  TempDir dir;
  ExperimentData data;
  data.train = gen_synthetic({200, 3, PlantedRule::QuestionCue, 61});
  data.test = gen_synthetic({100, 3, PlantedRule::QuestionCue, 62});

  // pre-recorded FT answers: always right, like an extractive reader would be
  // on this family
  std::string csv = "id,ft\n";
  for (const Dataset* d : {&data.train, &data.test}) {
    for (const auto& inst : d->instances) {
      csv += inst.id + "," + inst.gold_answers[0] + "\n";
    }
  }
  write_file(dir.file("ft.csv"), csv);

  ExperimentConfig cfg = synth_config(
      MetricKind::ExactMatch,
      {SystemKind::Base, SystemKind::Oracle, SystemKind::InfoSel, SystemKind::Ft,
       SystemKind::InfoSelStar});
  cfg.ft_predictions = dir.file("ft.csv");
  const auto reports = run_experiment(cfg, data);

  CHECK(row(reports, "FT").mean_score == doctest::Approx(100.0));
  CHECK(row(reports, "InfoSel*").mean_score >= row(reports, "InfoSel").mean_score - 2.0);
  CHECK(row(reports, "InfoSel*").mean_score >= 95.0);
}

TEST_CASE("unknown system names are rejected at parse") {
  CHECK_THROWS_AS(system_from_string("nonsense"), ConfigError);
  CHECK(system_from_string("infosel_star") == SystemKind::InfoSelStar);
}

TEST_CASE("experiment config json round trip") {
  TempDir dir;
  const std::string path = dir.file("exp.json");
  write_file(path, R"({
    "train": "t.jsonl", "test": "e.jsonl", "metric": "vqa_acc",
    "systems": ["base", "oracle", "mv", "infosel"],
    "encoder": {"dim": 128, "fusion_mode": "concat"},
    "train_config": {"learning_rate": 0.05, "epochs": 7, "batch_size": 8, "optimizer": "sgd"},
    "head_mode": "shared",
    "vocab_size": 50,
    "star_stage_data": "train",
    "compare_fusion": true,
    "out_dir": "somewhere",
    "seed": 11
  })");
  const ExperimentConfig cfg = load_experiment_config(path);
  CHECK(cfg.metric == MetricKind::VqaAccuracy);
  CHECK(cfg.systems.size() == 4);
  CHECK(cfg.encoder.dim == 128);
  CHECK(cfg.encoder.fusion_mode == FusionMode::Concat);
  CHECK(cfg.selector.train.learning_rate == doctest::Approx(0.05));
  CHECK(cfg.selector.train.epochs == 7);
  CHECK(cfg.selector.train.optimizer == OptimizerKind::Sgd);
  CHECK(cfg.selector.head_mode == HeadMode::Shared);
  CHECK(cfg.selector.vocab_size == 50);
  CHECK(cfg.compare_fusion);
  CHECK(cfg.seed == 11);

  write_file(path, R"({"train": "t", "test": "e", "systems": ["wat"]})");
  CHECK_THROWS_AS(load_experiment_config(path), ConfigError);
}

TEST_CASE("sweep produces per-cell rows and aggregates") {
  TempDir dir;
  ExperimentData data;
  data.train = gen_synthetic({60, 3, PlantedRule::QuestionCue, 1});
  data.test = gen_synthetic({40, 3, PlantedRule::QuestionCue, 2});

  SweepConfig cfg;
  cfg.experiment = synth_config(MetricKind::ExactMatch,
                                {SystemKind::Base, SystemKind::Oracle, SystemKind::InfoSel},
                                dir.file("sweep"));
  cfg.experiment.selector.train.epochs = 4;
  cfg.sizes = {10};
  cfg.seeds = {1, 2, 3, 4, 5, 6, 7, 8, 9, 10};

  const auto rows = sweep(cfg, data);
  // 10 seeds x (3 base + oracle + infosel) rows
  CHECK(rows.size() == 10 * 5);

  size_t infosel_rows = 0;
  double mean = 0.0;
  for (const auto& r : rows) {
    if (r.system == "InfoSel") {
      ++infosel_rows;
      mean += r.mean_score;
      CHECK(r.size == 10);
    }
  }
  CHECK(infosel_rows == 10);
  mean /= 10.0;

  const std::string summary = read_file(dir.file("sweep") + "/sweep_summary.csv");
  CHECK(summary.find("system,size,runs,mean,std") == 0);
  char expect[64];
  std::snprintf(expect, sizeof(expect), "InfoSel,10,10,%.4f", mean);
  CHECK(summary.find(expect) != std::string::npos);
  CHECK(fs::exists(dir.file("sweep") + "/sweep_raw.csv"));

  SweepConfig bad = cfg;
  bad.sizes = {1000};
  CHECK_THROWS_AS(sweep(bad, data), ConfigError);
}

TEST_CASE("ablate_models retrains without one model") {
  TempDir dir;
  ExperimentData data;
  data.train = gen_synthetic({200, 3, PlantedRule::QuestionCue, 3});
  data.test = gen_synthetic({100, 3, PlantedRule::QuestionCue, 4});

  ExperimentConfig cfg = synth_config(MetricKind::ExactMatch,
                                      {SystemKind::Base, SystemKind::Oracle, SystemKind::InfoSel},
                                      dir.file("out"));
  const auto [full, without] = ablate_models(cfg, data, "model_2");
  CHECK(full.n == 100);
  CHECK(without.n == 100);
  REQUIRE(without.selection_shares.has_value());
  CHECK(without.selection_shares->count("model_2") == 0);  // only remaining models
  CHECK(without.selection_shares->size() == 2);

  // dropping below K=2 is refused
  ExperimentData two;
  two.train = drop_model(data.train, "model_0");
  two.test = drop_model(data.test, "model_0");
  CHECK_THROWS_AS(ablate_models(cfg, two, "model_1"), ConfigError);
}

TEST_CASE("external embeddings drive a full experiment") {
  TempDir dir;
  ExperimentData data;
  data.train = gen_synthetic({80, 3, PlantedRule::QuestionCue, 71});
  data.test = gen_synthetic({40, 3, PlantedRule::QuestionCue, 72});

  // winner candidates get e_0, losers e_1; instance-level rows carry e_2
  const size_t dim = 64;
  std::string lines;
  for (const Dataset* d : {&data.train, &data.test}) {
    for (const auto& inst : d->instances) {
      const auto& cand = d->candidates_for(inst.id);
      for (int j = -1; j < static_cast<int>(cand.answers.size()); ++j) {
        nlohmann::json rec;
        rec["instance_id"] = inst.id;
        rec["model_index"] = j;
        std::vector<double> v(dim, 0.0);
        if (j < 0) {
          v[2] = 1.0;
        } else {
          const bool right =
              exact_match(cand.answers[static_cast<size_t>(j)], inst.gold_answers) == 1.0;
          v[right ? 0 : 1] = 1.0;
        }
        rec["vector"] = v;
        lines += rec.dump() + "\n";
      }
    }
  }
  write_file(dir.file("vecs.jsonl"), lines);

  ExperimentConfig cfg = synth_config(
      MetricKind::ExactMatch,
      {SystemKind::Base, SystemKind::Oracle, SystemKind::Ola, SystemKind::InfoSel});
  cfg.encoder.dim = dim;
  cfg.external_vectors = dir.file("vecs.jsonl");
  cfg.selector.train.epochs = 20;
  const auto reports = run_experiment(cfg, data);
  // the planted coordinate is trivially separable
  CHECK(row(reports, "InfoSel").mean_score == doctest::Approx(100.0));
  CHECK(row(reports, "OLA").n == 40);
}

TEST_CASE("star can stage on the validation split") {
  ExperimentData data;
  data.train = gen_synthetic({150, 3, PlantedRule::UnanswerableVqa, 81});
  data.val = gen_synthetic({80, 3, PlantedRule::UnanswerableVqa, 82});
  data.test = gen_synthetic({80, 3, PlantedRule::UnanswerableVqa, 83});

  ExperimentConfig cfg = synth_config(
      MetricKind::VqaAccuracy,
      {SystemKind::Base, SystemKind::Oracle, SystemKind::Ola, SystemKind::InfoSel, SystemKind::Ft,
       SystemKind::InfoSelStar});
  cfg.selector.star_on_val = true;
  cfg.selector.train.epochs = 15;
  const auto reports = run_experiment(cfg, data);
  CHECK(row(reports, "InfoSel*").n == 80);
  CHECK(row(reports, "FT").mean_score > row(reports, "model_0").mean_score);
  CHECK(row(reports, "OLA").n == 80);  // vqa query encoding path
}

TEST_CASE("mv on all-distinct synthetic answers sits near 1/K") {
  ExperimentData data;
  data.train = gen_synthetic({50, 3, PlantedRule::QuestionCue, 8});
  data.test = gen_synthetic({1000, 3, PlantedRule::QuestionCue, 9});
  ExperimentConfig cfg =
      synth_config(MetricKind::ExactMatch, {SystemKind::Base, SystemKind::Oracle, SystemKind::Mv});
  const auto reports = run_experiment(cfg, data);
  const double mv = row(reports, "MV").mean_score;
  CHECK(mv > 100.0 / 3.0 - 7.0);
  CHECK(mv < 100.0 / 3.0 + 7.0);
}
