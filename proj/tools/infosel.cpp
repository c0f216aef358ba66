// Command-line front end: dataset preparation, answer collection/import,
// training, evaluation, sweeps, ablations, synthetic data and gradient checks.

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <iostream>

#include "CLI11.hpp"
#include "infosel/harness.hpp"
#include "infosel/rng.hpp"
#include "json.hpp"

namespace fs = std::filesystem;
using namespace infosel;

namespace {

PromptTemplate load_template(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open prompt template: " + path);
  nlohmann::json j;
  try {
    in >> j;
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError("malformed prompt template " + path + ": " + e.what());
  }
  PromptTemplate t;
  t.template_id = j.value("template_id", "custom");
  t.body = j.at("body").get<std::string>();
  if (t.body.find("{question}") == std::string::npos) {
    throw ConfigError("prompt template body must contain {question}");
  }
  return t;
}

void print_reports(const std::vector<EvalReport>& reports) {
  std::printf("%-24s %-12s %8s %10s\n", "system", "metric", "n", "mean");
  for (const auto& rep : reports) {
    std::printf("%-24s %-12s %8zu %10.4f\n", rep.system_name.c_str(), to_string(rep.metric),
                rep.n, rep.mean_score);
  }
}

int run_gradcheck(size_t n_records, size_t dim, size_t k, uint64_t seed) {
  double worst = 0.0;
  for (size_t r = 0; r < n_records; ++r) {
    Rng rng(mix_seed(seed, r));
    SelectorModel model;
    model.head_mode = r % 2 == 0 ? HeadMode::PerModel : HeadMode::Shared;
    model.feature_dim = dim;
    const size_t rows = model.head_mode == HeadMode::PerModel ? k : 1;
    model.weights.resize(rows);
    model.biases.resize(rows);
    for (size_t row = 0; row < rows; ++row) {
      model.weights[row].resize(dim);
      for (double& w : model.weights[row]) w = 2.0 * rng.uniform() - 1.0;
      model.biases[row] = 2.0 * rng.uniform() - 1.0;
    }
    TrainingRecord rec;
    rec.instance_id = "g" + std::to_string(r);
    for (size_t j = 0; j < k; ++j) {
      FeatureVector f(dim);
      for (double& x : f) x = 2.0 * rng.uniform() - 1.0;
      l2_normalize(f);
      rec.features.push_back(std::move(f));
      rec.targets.push_back(rng.uniform());
    }
    worst = std::max(worst, grad_check(model, rec, 1e-5, 20, mix_seed(seed, 1000 + r)));
  }
  std::printf("gradcheck: max relative error %.3e over %zu records\n", worst, n_records);
  if (worst >= 1e-4) {
    std::fprintf(stderr, "gradcheck FAILED (threshold 1e-4)\n");
    return 4;
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Black-box QA ensembling: selector training, baselines and evaluation"};
  app.require_subcommand(1);

  std::string config_path;
  std::string out_override;
  std::string cache_dir = "cache";
  uint64_t seed_override = 0;
  bool seed_set = false;
  app.add_option("--config", config_path, "experiment/sweep config file")->configurable(false);
  app.add_option("--out", out_override, "output directory override");
  app.add_option("--cache-dir", cache_dir, "answer cache directory");
  app.add_option("--seed", seed_override, "seed override")->each([&](const std::string&) {
    seed_set = true;
  });

  // collect
  auto* cmd_collect = app.add_subcommand("collect", "query endpoints for candidate answers");
  std::string collect_dataset, collect_endpoints, collect_template, collect_out;
  size_t concurrency = 4;
  cmd_collect->add_option("--dataset", collect_dataset)->required();
  cmd_collect->add_option("--endpoints", collect_endpoints)->required();
  cmd_collect->add_option("--template", collect_template)->required();
  cmd_collect->add_option("--output", collect_out)->required();
  cmd_collect->add_option("--concurrency", concurrency);

  // import
  auto* cmd_import = app.add_subcommand("import", "attach pre-recorded answers to a dataset");
  std::string import_dataset, import_answers_path, import_out;
  cmd_import->add_option("--dataset", import_dataset)->required();
  cmd_import->add_option("--answers", import_answers_path)->required();
  cmd_import->add_option("--output", import_out)->required();

  // prepare
  auto* cmd_prepare = app.add_subcommand("prepare", "split a dataset into train/val files");
  std::string prepare_dataset, prepare_out = "data";
  double fraction = 0.8;
  uint64_t prepare_seed = 0;
  cmd_prepare->add_option("--dataset", prepare_dataset)->required();
  cmd_prepare->add_option("--fraction", fraction);
  cmd_prepare->add_option("--split-seed", prepare_seed);
  cmd_prepare->add_option("--output", prepare_out);

  // train
  auto* cmd_train = app.add_subcommand("train", "train the selector (and FT) and save weights");

  // eval
  auto* cmd_eval = app.add_subcommand("eval", "run the configured systems and write reports");

  // sweep
  auto* cmd_sweep = app.add_subcommand("sweep", "train-size x seed grid, aggregated CSVs");

  // ablate
  auto* cmd_ablate = app.add_subcommand("ablate", "retrain with one base model removed");
  std::string drop_model_name;
  cmd_ablate->add_option("--drop", drop_model_name)->required();

  // synth
  auto* cmd_synth = app.add_subcommand("synth", "generate a planted-rule benchmark file");
  std::string synth_rule = "question_cue", synth_out;
  size_t synth_n = 1000, synth_k = 3;
  uint64_t synth_seed = 0;
  cmd_synth->add_option("--rule", synth_rule);
  cmd_synth->add_option("--n", synth_n);
  cmd_synth->add_option("--k", synth_k);
  cmd_synth->add_option("--gen-seed", synth_seed);
  cmd_synth->add_option("--output", synth_out)->required();

  // gradcheck
  auto* cmd_gradcheck = app.add_subcommand("gradcheck", "finite-difference check of the loss");
  size_t gc_records = 100, gc_dim = 256, gc_k = 3;
  cmd_gradcheck->add_option("--records", gc_records);
  cmd_gradcheck->add_option("--dim", gc_dim);
  cmd_gradcheck->add_option("--k", gc_k);

  CLI11_PARSE(app, argc, argv);

  try {
    if (cmd_collect->parsed()) {
      Dataset ds = load_dataset(collect_dataset);
      const auto endpoints = load_endpoints(collect_endpoints);
      const auto tmpl = load_template(collect_template);
      CollectStats stats;
      auto candidates = collect_answers(endpoints, ds.instances, tmpl, cache_dir, concurrency,
                                        &stats);
      ds.candidates = std::move(candidates);
      ds.roster.clear();
      for (const auto& ep : endpoints) ds.roster.push_back(ep.name);
      ds.validate();
      write_dataset(ds, collect_out);
      std::printf("collect: %zu cache hits, %zu network calls, %zu failures -> %s\n",
                  stats.cache_hits, stats.network_calls, stats.failures, collect_out.c_str());
    } else if (cmd_import->parsed()) {
      const Dataset ds = load_dataset(import_dataset);
      const Dataset merged = import_answers(import_answers_path, ds);
      write_dataset(merged, import_out);
      std::printf("import: %zu instances, %zu models -> %s\n", merged.size(),
                  merged.num_models(), import_out.c_str());
    } else if (cmd_prepare->parsed()) {
      const Dataset ds = load_dataset(prepare_dataset);
      const auto [train, val] = split(ds, SplitSpec{fraction, prepare_seed});
      fs::create_directories(prepare_out);
      write_dataset(train, (fs::path(prepare_out) / "train.jsonl").string());
      write_dataset(val, (fs::path(prepare_out) / "val.jsonl").string());
      std::printf("prepare: %zu train / %zu val -> %s\n", train.size(), val.size(),
                  prepare_out.c_str());
    } else if (cmd_train->parsed()) {
      if (config_path.empty()) throw ConfigError("train needs --config");
      ExperimentConfig cfg = load_experiment_config(config_path);
      if (!out_override.empty()) cfg.out_dir = out_override;
      if (seed_set) cfg.seed = seed_override;
      const Dataset train_data = load_dataset(cfg.train_path);
      const Encoder encoder = cfg.external_vectors.empty()
                                  ? Encoder(cfg.encoder)
                                  : Encoder::external(cfg.encoder, cfg.external_vectors);
      const PromptFn prompt_fn = cfg.prompt_template
                                     ? PromptFn([t = *cfg.prompt_template](const Instance& i) {
                                         return render_prompt(t, i);
                                       })
                                     : PromptFn(default_prompt);
      const auto records = make_records(train_data, encoder, cfg.metric, prompt_fn);
      std::vector<double> curve;
      const SelectorModel model =
          train_selector(records, cfg.selector.train, cfg.selector.head_mode, train_data.roster,
                         cfg.encoder, &curve);
      fs::create_directories(cfg.out_dir);
      save_selector(model, (fs::path(cfg.out_dir) / "infosel.json").string());
      std::printf("train: selector saved to %s/infosel.json\n", cfg.out_dir.c_str());
      for (size_t e = 0; e < curve.size(); ++e) {
        std::printf("  epoch %zu: loss %.6f\n", e + 1, curve[e]);
      }
      const bool wants_ft =
          std::find(cfg.systems.begin(), cfg.systems.end(), SystemKind::Ft) != cfg.systems.end() ||
          std::find(cfg.systems.begin(), cfg.systems.end(), SystemKind::InfoSelStar) !=
              cfg.systems.end();
      if (wants_ft && cfg.ft_predictions.empty()) {
        EncoderConfig ft_config = cfg.encoder;
        ft_config.use_answer = false;
        ft_config.fusion_mode = FusionMode::Fused;
        const Encoder ft_encoder(ft_config);
        const FtClassifier ft = train_ft(train_data, ft_encoder, cfg.metric,
                                         cfg.selector.vocab_size, cfg.selector.train);
        save_ft(ft, (fs::path(cfg.out_dir) / "ft.json").string());
        std::printf("train: ft classifier (%zu labels) saved to %s/ft.json\n",
                    ft.vocabulary.size(), cfg.out_dir.c_str());
      }
    } else if (cmd_eval->parsed()) {
      if (config_path.empty()) throw ConfigError("eval needs --config");
      ExperimentConfig cfg = load_experiment_config(config_path);
      if (!out_override.empty()) cfg.out_dir = out_override;
      if (seed_set) cfg.seed = seed_override;
      const auto reports = run_experiment(cfg);
      print_reports(reports);
      std::printf("eval: reports written to %s\n", cfg.out_dir.c_str());
    } else if (cmd_sweep->parsed()) {
      if (config_path.empty()) throw ConfigError("sweep needs --config");
      SweepConfig cfg = load_sweep_config(config_path);
      if (!out_override.empty()) cfg.experiment.out_dir = out_override;
      const auto rows = sweep(cfg);
      std::printf("sweep: %zu rows -> %s\n", rows.size(), cfg.experiment.out_dir.c_str());
    } else if (cmd_ablate->parsed()) {
      if (config_path.empty()) throw ConfigError("ablate needs --config");
      ExperimentConfig cfg = load_experiment_config(config_path);
      if (!out_override.empty()) cfg.out_dir = out_override;
      if (seed_set) cfg.seed = seed_override;
      const auto [full, without] = ablate_models(cfg, drop_model_name);
      print_reports({full, without});
      std::printf("ablate: delta %.4f (dropping %s)\n", without.mean_score - full.mean_score,
                  drop_model_name.c_str());
    } else if (cmd_synth->parsed()) {
      SynthSpec spec;
      spec.rule = rule_from_string(synth_rule);
      spec.n = synth_n;
      spec.k = synth_k;
      spec.seed = synth_seed;
      const Dataset ds = gen_synthetic(spec);
      write_dataset(ds, synth_out);
      std::printf("synth: %zu instances (%s, k=%zu) -> %s\n", ds.size(), synth_rule.c_str(),
                  synth_k, synth_out.c_str());
    } else if (cmd_gradcheck->parsed()) {
      return run_gradcheck(gc_records, gc_dim, gc_k, seed_set ? seed_override : 0);
    }
  } catch (const ConfigError& e) {
    std::fprintf(stderr, "config error: %s\n", e.what());
    return 2;
  } catch (const DataError& e) {
    std::fprintf(stderr, "data error: %s\n", e.what());
    return 3;
  } catch (const NumericError& e) {
    std::fprintf(stderr, "numeric failure: %s\n", e.what());
    return 4;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 3;
  }
  return 0;
}
