#include "infosel/harness.hpp"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>

#include "infosel/rng.hpp"
#include "json.hpp"

namespace fs = std::filesystem;
using json = nlohmann::json;

namespace infosel {

SystemKind system_from_string(const std::string& s) {
  if (s == "base") return SystemKind::Base;
  if (s == "oracle") return SystemKind::Oracle;
  if (s == "mv") return SystemKind::Mv;
  if (s == "wv") return SystemKind::Wv;
  if (s == "pagerank") return SystemKind::PageRank;
  if (s == "ola") return SystemKind::Ola;
  if (s == "infosel") return SystemKind::InfoSel;
  if (s == "ft") return SystemKind::Ft;
  if (s == "infosel_star") return SystemKind::InfoSelStar;
  throw ConfigError("unknown system: \"" + s + "\"");
}

const char* to_string(SystemKind s) {
  switch (s) {
    case SystemKind::Base: return "base";
    case SystemKind::Oracle: return "Oracle";
    case SystemKind::Mv: return "MV";
    case SystemKind::Wv: return "WV";
    case SystemKind::PageRank: return "PageRank";
    case SystemKind::Ola: return "OLA";
    case SystemKind::InfoSel: return "InfoSel";
    case SystemKind::Ft: return "FT";
    case SystemKind::InfoSelStar: return "InfoSel*";
  }
  return "?";
}

PlantedRule rule_from_string(const std::string& s) {
  if (s == "question_cue") return PlantedRule::QuestionCue;
  if (s == "unanswerable_vqa") return PlantedRule::UnanswerableVqa;
  if (s == "joint_cue") return PlantedRule::JointCue;
  throw ConfigError("unknown synthetic rule: \"" + s + "\"");
}

namespace {

TrainConfig train_config_from_json(const json& j) {
  TrainConfig c;
  c.learning_rate = j.value("learning_rate", c.learning_rate);
  c.epochs = j.value("epochs", c.epochs);
  c.batch_size = j.value("batch_size", c.batch_size);
  c.seed = j.value("seed", c.seed);
  if (j.contains("optimizer")) {
    const std::string o = j.at("optimizer").get<std::string>();
    if (o == "adam") {
      c.optimizer = OptimizerKind::Adam;
    } else if (o == "sgd") {
      c.optimizer = OptimizerKind::Sgd;
    } else {
      throw ConfigError("unknown optimizer: \"" + o + "\"");
    }
  }
  c.validate();
  return c;
}

ExperimentConfig experiment_from_json(const json& j) {
  ExperimentConfig cfg;
  cfg.train_path = j.value("train", "");
  cfg.val_path = j.value("val", "");
  cfg.test_path = j.value("test", "");
  if (j.contains("metric")) cfg.metric = metric_from_string(j.at("metric"));
  if (j.contains("systems")) {
    for (const auto& s : j.at("systems")) {
      cfg.systems.push_back(system_from_string(s.get<std::string>()));
    }
  } else {
    cfg.systems = {SystemKind::Base, SystemKind::Oracle};
  }
  if (j.contains("encoder")) cfg.encoder = encoder_config_from_json(j.at("encoder"));
  if (j.contains("train_config")) cfg.selector.train = train_config_from_json(j.at("train_config"));
  if (j.contains("head_mode")) {
    cfg.selector.head_mode = head_mode_from_string(j.at("head_mode"));
  }
  cfg.selector.vocab_size = j.value("vocab_size", cfg.selector.vocab_size);
  cfg.selector.ola_k = j.value("ola_k", cfg.selector.ola_k);
  if (j.contains("star_stage_data")) {
    const std::string s = j.at("star_stage_data").get<std::string>();
    if (s == "val") {
      cfg.selector.star_on_val = true;
    } else if (s != "train") {
      throw ConfigError("star_stage_data must be \"train\" or \"val\"");
    }
  }
  if (j.contains("prompt_template")) {
    PromptTemplate t;
    t.template_id = j.at("prompt_template").value("template_id", "custom");
    t.body = j.at("prompt_template").at("body").get<std::string>();
    cfg.prompt_template = std::move(t);
  }
  cfg.external_vectors = j.value("external_vectors", "");
  cfg.ft_predictions = j.value("ft_predictions", "");
  cfg.compare_fusion = j.value("compare_fusion", false);
  cfg.out_dir = j.value("out_dir", cfg.out_dir);
  cfg.seed = j.value("seed", cfg.seed);
  return cfg;
}

json read_json_file(const std::string& path, const char* what) {
  std::ifstream in(path);
  if (!in) throw ConfigError(std::string("cannot open ") + what + ": " + path);
  json j;
  try {
    in >> j;
  } catch (const json::exception& e) {
    throw ConfigError(std::string("malformed ") + what + " " + path + ": " + e.what());
  }
  return j;
}

}  // namespace

ExperimentConfig load_experiment_config(const std::string& path) {
  return experiment_from_json(read_json_file(path, "experiment config"));
}

SweepConfig load_sweep_config(const std::string& path) {
  const json j = read_json_file(path, "sweep config");
  SweepConfig cfg;
  cfg.experiment = experiment_from_json(j.at("experiment"));
  cfg.sizes = j.at("sizes").get<std::vector<size_t>>();
  if (j.contains("seeds")) {
    cfg.seeds = j.at("seeds").get<std::vector<uint64_t>>();
  } else {
    const auto n = j.value("num_seeds", static_cast<size_t>(10));
    for (size_t i = 0; i < n; ++i) cfg.seeds.push_back(cfg.experiment.seed + i);
  }
  if (cfg.sizes.empty()) throw ConfigError("sweep: sizes must be non-empty");
  if (cfg.seeds.empty()) throw ConfigError("sweep: seeds must be non-empty");
  return cfg;
}

std::map<std::string, double> selection_shares(const std::vector<size_t>& chosen_indices,
                                               const std::vector<std::string>& roster) {
  if (chosen_indices.empty()) throw DataError("selection_shares: no choices");
  std::vector<size_t> counts(roster.size(), 0);
  for (size_t idx : chosen_indices) {
    if (idx >= roster.size()) throw DataError("selection_shares: model index out of range");
    ++counts[idx];
  }
  std::map<std::string, double> shares;
  for (size_t j = 0; j < roster.size(); ++j) {
    shares[roster[j]] = static_cast<double>(counts[j]) / static_cast<double>(chosen_indices.size());
  }
  return shares;
}

namespace {

bool has_system(const ExperimentConfig& cfg, SystemKind kind) {
  return std::find(cfg.systems.begin(), cfg.systems.end(), kind) != cfg.systems.end();
}

PromptFn make_prompt_fn(const ExperimentConfig& cfg) {
  if (cfg.prompt_template) {
    PromptTemplate tmpl = *cfg.prompt_template;
    return [tmpl](const Instance& inst) { return render_prompt(tmpl, inst); };
  }
  return default_prompt;
}

Encoder make_encoder(const EncoderConfig& config, const std::string& external_vectors) {
  if (!external_vectors.empty()) return Encoder::external(config, external_vectors);
  return Encoder(config);
}

// Per-instance choices of a per-candidate picker.
template <typename PickFn>
EvalReport run_picker(const Dataset& test, MetricKind metric, const std::string& name,
                      PickFn&& pick) {
  std::map<std::string, Choice> choices;
  for (const auto& inst : test.instances) {
    const auto& cand = test.candidates_for(inst.id);
    const size_t j = pick(inst, cand);
    choices.emplace(inst.id, Choice{cand.answers[j], j});
  }
  return evaluate_predictions(choices, test, metric, name);
}

// FT answers covering the given instances, either from the trained
// classifier or from an imported prediction file.
AnswerMap ft_answers_for(const ExperimentConfig& cfg, const std::vector<const Dataset*>& splits,
                         const FtClassifier* ft, const Encoder* ft_encoder,
                         const PromptFn& prompt_fn) {
  if (!cfg.ft_predictions.empty()) {
    Dataset merged;
    for (const Dataset* d : splits) {
      for (const auto& inst : d->instances) {
        // Splits produced by subsampling may overlap; keep one copy.
        if (std::none_of(merged.instances.begin(), merged.instances.end(),
                         [&](const Instance& x) { return x.id == inst.id; })) {
          merged.instances.push_back(inst);
        }
      }
    }
    const Dataset imported = import_answers(cfg.ft_predictions, merged);
    if (imported.roster.size() != 1) {
      throw ConfigError("ft_predictions file must carry exactly one model column, got " +
                        std::to_string(imported.roster.size()));
    }
    AnswerMap out;
    for (const auto& [id, cand] : imported.candidates) out[id] = cand.answers.front();
    return out;
  }
  AnswerMap out;
  for (const Dataset* d : splits) {
    for (const auto& inst : d->instances) {
      out[inst.id] = ft_predict(*ft, ft_features(*ft_encoder, inst, prompt_fn)).answer;
    }
  }
  return out;
}

EvalReport infosel_report(const ExperimentConfig& cfg, const ExperimentData& data,
                          const Encoder& encoder, const PromptFn& prompt_fn,
                          const std::string& row_name, SelectorModel* model_out) {
  auto records = make_records(data.train, encoder, cfg.metric, prompt_fn);
  SelectorModel model = train_selector(records, cfg.selector.train, cfg.selector.head_mode,
                                       data.train.roster, encoder.config());
  require_compatible(model, data.test);
  std::map<std::string, Choice> choices;
  for (const auto& inst : data.test.instances) {
    const auto& cand = data.test.candidates_for(inst.id);
    std::vector<FeatureVector> feats;
    feats.reserve(cand.answers.size());
    for (size_t j = 0; j < cand.answers.size(); ++j) {
      feats.push_back([&] {
        if (encoder.kind() == EncoderKind::External) {
          return encoder.lookup(inst.id, static_cast<int>(j));
        }
        if (inst.task_kind == TaskKind::Vqa) {
          return encoder.encode_vqa(inst.visual ? &*inst.visual : nullptr, inst.question,
                                    cand.answers[j]);
        }
        return encoder.encode_tqa(prompt_fn(inst), cand.answers[j]);
      }());
    }
    const auto sel = select_winner(model, feats);
    choices.emplace(inst.id, Choice{cand.answers[sel.winner], sel.winner});
  }
  if (model_out) *model_out = std::move(model);
  return evaluate_predictions(choices, data.test, cfg.metric, row_name);
}

// Module errors surface with the failing system's name attached.
template <typename Fn>
auto with_system(const char* system, Fn&& fn) -> decltype(fn()) {
  try {
    return fn();
  } catch (const ConfigError& e) {
    throw ConfigError(std::string(system) + ": " + e.what());
  } catch (const NumericError& e) {
    throw NumericError(std::string(system) + ": " + e.what());
  } catch (const DataError& e) {
    throw DataError(std::string(system) + ": " + e.what());
  }
}

}  // namespace

std::vector<EvalReport> run_experiment(const ExperimentConfig& config) {
  ExperimentData data;
  data.train = load_dataset(config.train_path);
  if (!config.val_path.empty()) data.val = load_dataset(config.val_path);
  data.test = load_dataset(config.test_path);
  return run_experiment(config, data);
}

std::vector<EvalReport> run_experiment(const ExperimentConfig& config,
                                       const ExperimentData& data) {
  if (!data.train.has_candidates() || !data.test.has_candidates()) {
    throw DataError("run_experiment: train and test need candidate answers");
  }
  const bool wants_star = has_system(config, SystemKind::InfoSelStar);
  const bool wants_ft = has_system(config, SystemKind::Ft) || wants_star;
  if (wants_star && !has_system(config, SystemKind::InfoSel)) {
    throw ConfigError("infosel_star requires infosel");
  }
  if (wants_star && !has_system(config, SystemKind::Ft) && config.ft_predictions.empty()) {
    throw ConfigError("infosel_star requires ft (trained) or ft_predictions (imported)");
  }
  if (config.selector.star_on_val && wants_star && !data.val) {
    throw ConfigError("star_stage_data=val but no validation split configured");
  }

  const PromptFn prompt_fn = make_prompt_fn(config);
  const Encoder encoder = make_encoder(config.encoder, config.external_vectors);

  std::vector<EvalReport> reports;

  // Base model rows and the oracle bound are always part of the report.
  for (size_t j = 0; j < data.test.roster.size(); ++j) {
    reports.push_back(run_picker(data.test, config.metric, data.test.roster[j],
                                 [j](const Instance&, const CandidateSet&) { return j; }));
  }
  reports.push_back(oracle(data.test, config.metric));

  if (has_system(config, SystemKind::Mv)) {
    const uint64_t seed = config.seed;
    reports.push_back(with_system("MV", [&] {
      return run_picker(data.test, config.metric, "MV",
                        [seed](const Instance& inst, const CandidateSet& cand) {
                          return majority_vote(cand.answers, mix_seed(seed, fnv1a64(inst.id)));
                        });
    }));
  }
  if (has_system(config, SystemKind::Wv)) {
    reports.push_back(with_system("WV", [&] {
      const auto weights = model_accuracies(data.train, config.metric);
      return run_picker(data.test, config.metric, "WV",
                        [&weights](const Instance&, const CandidateSet& cand) {
                          return weighted_vote(cand.answers, weights);
                        });
    }));
  }
  if (has_system(config, SystemKind::PageRank)) {
    reports.push_back(with_system("PageRank", [&] {
      return run_picker(data.test, config.metric, "PageRank",
                        [](const Instance&, const CandidateSet& cand) {
                          return pagerank_select(cand.answers).winner;
                        });
    }));
  }
  if (has_system(config, SystemKind::Ola)) {
    reports.push_back(with_system("OLA", [&] {
      const OlaIndex index = ola_fit(data.train, encoder, config.metric,
                                     std::min(config.selector.ola_k, data.train.size()));
      return run_picker(data.test, config.metric, "OLA",
                        [&](const Instance& inst, const CandidateSet&) {
                          return ola_select(index, encoder.encode_query(inst));
                        });
    }));
  }

  SelectorModel infosel_model;
  bool have_infosel = false;
  if (has_system(config, SystemKind::InfoSel)) {
    if (config.compare_fusion) {
      for (FusionMode mode : {FusionMode::Fused, FusionMode::Concat}) {
        ExperimentConfig variant = config;
        variant.encoder.fusion_mode = mode;
        const std::string name = std::string("InfoSel[") + to_string(mode) + "]";
        reports.push_back(with_system(name.c_str(), [&] {
          const Encoder venc = make_encoder(variant.encoder, variant.external_vectors);
          SelectorModel* out = mode == FusionMode::Fused ? &infosel_model : nullptr;
          return infosel_report(variant, data, venc, prompt_fn, name, out);
        }));
        if (mode == FusionMode::Fused) have_infosel = true;
      }
    } else {
      reports.push_back(with_system("InfoSel", [&] {
        return infosel_report(config, data, encoder, prompt_fn, "InfoSel", &infosel_model);
      }));
      have_infosel = true;
    }
  }

  if (wants_ft) {
    FtClassifier ft;
    std::optional<Encoder> ft_encoder;
    if (config.ft_predictions.empty()) {
      with_system("FT", [&] {
        EncoderConfig ft_config = config.encoder;
        ft_config.use_answer = false;
        ft_config.fusion_mode = FusionMode::Fused;
        ft_encoder.emplace(ft_config);
        ft = train_ft(data.train, *ft_encoder, config.metric, config.selector.vocab_size,
                      config.selector.train);
      });
    }

    const Dataset& stage =
        (config.selector.star_on_val && data.val) ? *data.val : data.train;
    std::vector<const Dataset*> splits{&stage, &data.test};
    const AnswerMap ft_map = with_system("FT", [&] {
      return ft_answers_for(config, splits, &ft, ft_encoder ? &*ft_encoder : nullptr, prompt_fn);
    });

    if (has_system(config, SystemKind::Ft)) {
      std::map<std::string, Choice> choices;
      for (const auto& inst : data.test.instances) {
        choices.emplace(inst.id, Choice{ft_map.at(inst.id), std::nullopt});
      }
      reports.push_back(evaluate_predictions(choices, data.test, config.metric, "FT"));
    }

    if (wants_star) {
      if (!have_infosel) throw ConfigError("infosel_star requires a trained InfoSel model");
      reports.push_back(with_system("InfoSel*", [&] {
        // Compare-fusion runs use the fused model as stage 1.
        const Encoder star_encoder = [&] {
          EncoderConfig c = config.encoder;
          c.fusion_mode = FusionMode::Fused;
          return make_encoder(c, config.external_vectors);
        }();
        const AnswerMap stage1 = selector_answers(infosel_model, stage, star_encoder, prompt_fn);
        const StarModel star = train_star(stage, stage1, ft_map, star_encoder, config.metric,
                                          config.selector.train, config.selector.head_mode,
                                          prompt_fn);
        const AnswerMap stage1_test =
            selector_answers(infosel_model, data.test, star_encoder, prompt_fn);
        std::map<std::string, Choice> choices;
        for (const auto& inst : data.test.instances) {
          const std::string& a_sel = stage1_test.at(inst.id);
          const std::string& a_ft = ft_map.at(inst.id);
          const auto pick = star_select(star, inst, a_sel, a_ft, star_encoder, prompt_fn);
          choices.emplace(inst.id, Choice{pick.winner == 0 ? a_sel : a_ft, std::nullopt});
        }
        return evaluate_predictions(choices, data.test, config.metric, "InfoSel*");
      }));
    }
  }

  if (!config.out_dir.empty()) {
    fs::create_directories(config.out_dir);
    write_report_csv(reports, data.test.roster, (fs::path(config.out_dir) / "report.csv").string());
    write_report_jsonl(reports, (fs::path(config.out_dir) / "per_instance.jsonl").string());
  }
  return reports;
}

std::vector<SweepRow> sweep(const SweepConfig& config) {
  ExperimentData data;
  data.train = load_dataset(config.experiment.train_path);
  if (!config.experiment.val_path.empty()) data.val = load_dataset(config.experiment.val_path);
  data.test = load_dataset(config.experiment.test_path);
  return sweep(config, data);
}

std::vector<SweepRow> sweep(const SweepConfig& config, const ExperimentData& data) {
  for (size_t size : config.sizes) {
    if (size > data.train.size()) {
      throw ConfigError("sweep: size " + std::to_string(size) + " exceeds train size " +
                        std::to_string(data.train.size()));
    }
  }

  std::vector<SweepRow> rows;
  for (size_t size : config.sizes) {
    for (uint64_t seed : config.seeds) {
      ExperimentConfig cell = config.experiment;
      cell.out_dir.clear();  // cells report through the sweep CSVs only
      cell.seed = seed;
      cell.selector.train.seed = seed;
      ExperimentData cell_data;
      cell_data.train = subsample(data.train, size, seed);
      cell_data.val = data.val;
      cell_data.test = data.test;
      const auto reports = run_experiment(cell, cell_data);
      for (const auto& rep : reports) {
        rows.push_back({rep.system_name, size, seed, rep.mean_score});
      }
    }
  }

  if (!config.experiment.out_dir.empty()) {
    fs::create_directories(config.experiment.out_dir);
    const fs::path dir(config.experiment.out_dir);
    char buf[64];
    {
      std::ofstream raw(dir / "sweep_raw.csv");
      raw << "system,size,seed,mean_score\n";
      for (const auto& r : rows) {
        std::snprintf(buf, sizeof(buf), "%.4f", r.mean_score);
        raw << r.system << "," << r.size << "," << r.seed << "," << buf << "\n";
      }
    }
    {
      // Aggregate in first-appearance order to keep the file deterministic.
      std::vector<std::pair<std::string, size_t>> keys;
      std::map<std::pair<std::string, size_t>, std::vector<double>> cells;
      for (const auto& r : rows) {
        auto key = std::make_pair(r.system, r.size);
        if (!cells.count(key)) keys.push_back(key);
        cells[key].push_back(r.mean_score);
      }
      std::ofstream summary(dir / "sweep_summary.csv");
      summary << "system,size,runs,mean,std\n";
      for (const auto& key : keys) {
        const auto& v = cells[key];
        double mean = 0.0;
        for (double x : v) mean += x;
        mean /= static_cast<double>(v.size());
        double var = 0.0;
        for (double x : v) var += (x - mean) * (x - mean);
        var /= static_cast<double>(v.size());
        std::snprintf(buf, sizeof(buf), "%.4f", mean);
        summary << key.first << "," << key.second << "," << v.size() << "," << buf;
        std::snprintf(buf, sizeof(buf), "%.4f", std::sqrt(var));
        summary << "," << buf << "\n";
      }
    }
  }
  return rows;
}

std::pair<EvalReport, EvalReport> ablate_models(const ExperimentConfig& config,
                                                const std::string& drop) {
  ExperimentData data;
  data.train = load_dataset(config.train_path);
  if (!config.val_path.empty()) data.val = load_dataset(config.val_path);
  data.test = load_dataset(config.test_path);
  return ablate_models(config, data, drop);
}

std::pair<EvalReport, EvalReport> ablate_models(const ExperimentConfig& config,
                                                const ExperimentData& data,
                                                const std::string& drop) {
  if (data.train.roster.size() < 3) {
    throw ConfigError("ablate_models: roster must have at least 3 models before dropping");
  }
  const PromptFn prompt_fn = make_prompt_fn(config);
  const Encoder encoder = make_encoder(config.encoder, config.external_vectors);

  EvalReport full = infosel_report(config, data, encoder, prompt_fn, "InfoSel", nullptr);

  ExperimentData reduced;
  reduced.train = drop_model(data.train, drop);
  reduced.test = drop_model(data.test, drop);
  EvalReport without =
      infosel_report(config, reduced, encoder, prompt_fn, "InfoSel (w/o " + drop + ")", nullptr);

  if (!config.out_dir.empty()) {
    fs::create_directories(config.out_dir);
    write_report_csv({full, without}, data.test.roster,
                     (fs::path(config.out_dir) / "ablate.csv").string());
  }
  return {full, without};
}

namespace {

const char* kCueWords[] = {"alpha", "bravo", "charlie", "delta",
                           "echo",  "foxtrot", "golf",   "hotel"};

std::string cue_word(size_t j) {
  if (j < std::size(kCueWords)) return kCueWords[j];
  return "cue" + std::to_string(j);
}

std::string letter_token(size_t idx) { return std::string(1, static_cast<char>('a' + idx % 26)); }

VisualContext noise_visual(Rng& rng, size_t regions, size_t dim) {
  VisualContext v;
  v.region_features.resize(regions);
  for (auto& row : v.region_features) {
    row.resize(dim);
    for (double& x : row) x = 2.0 * rng.uniform() - 1.0;
  }
  return v;
}

}  // namespace

Dataset gen_synthetic(const SynthSpec& spec) {
  if (spec.k < 2) throw ConfigError("gen_synthetic: k must be >= 2");
  if (spec.n == 0) throw ConfigError("gen_synthetic: n must be positive");

  Dataset ds;
  for (size_t j = 0; j < spec.k; ++j) ds.roster.push_back("model_" + std::to_string(j));

  constexpr size_t kNumLabels = 20;

  for (size_t i = 0; i < spec.n; ++i) {
    Rng rng(mix_seed(spec.seed, i));
    const size_t winner = static_cast<size_t>(rng.below(spec.k));
    Instance inst;
    // seed in the id and in every filler token keeps generated splits
    // disjoint: only the planted cues transfer between train and test
    const std::string uid = std::to_string(spec.seed) + "n" + std::to_string(i);
    inst.id = "syn-" + uid;
    CandidateSet cand;
    cand.instance_id = inst.id;

    switch (spec.rule) {
      case PlantedRule::QuestionCue: {
        inst.task_kind = TaskKind::Tqa;
        inst.question = "signal " + cue_word(winner) + " item q" + uid;
        const std::string gold = "gold" + uid;
        inst.gold_answers = {gold};
        for (size_t j = 0; j < spec.k; ++j) {
          cand.answers.push_back(j == winner ? gold : "wrong" + uid + "x" + std::to_string(j));
        }
        break;
      }
      case PlantedRule::UnanswerableVqa: {
        inst.task_kind = TaskKind::Vqa;
        const size_t label = static_cast<size_t>(rng.below(kNumLabels));
        const bool unanswerable = rng.uniform() < 0.3;
        inst.question = cue_word(winner) + " describe object_" + std::to_string(label) + " q" +
                        uid + (unanswerable ? " blurry" : "");
        const std::string label_answer = "label_" + std::to_string(label);
        inst.gold_answers.assign(10, unanswerable ? "unanswerable" : label_answer);

        VisualContext v = noise_visual(rng, 4, 16);
        v.region_features[0][label % 16] += 2.0;
        if (unanswerable) v.region_features[1][0] += 3.0;
        v.tags = {"object_" + std::to_string(label)};
        if (unanswerable) v.tags.push_back("blurry");
        inst.visual = std::move(v);

        for (size_t j = 0; j < spec.k; ++j) {
          if (j == winner) {
            cand.answers.push_back(label_answer);  // wrong when unanswerable
          } else {
            cand.answers.push_back("label_" + std::to_string((label + 1 + j) % kNumLabels));
          }
        }
        break;
      }
      case PlantedRule::JointCue: {
        inst.task_kind = TaskKind::Vqa;
        const size_t letter = static_cast<size_t>(rng.below(26));
        inst.question = "probe q" + uid + " " + letter_token(letter);
        // Candidates differ only in the leading letter; the winner repeats
        // the question's final letter, so no single block carries the cue.
        std::string gold;
        for (size_t j = 0; j < spec.k; ++j) {
          const size_t offset = j == winner ? 0 : 1 + j;
          const std::string answer = letter_token(letter + offset) + " pay" + uid;
          if (j == winner) gold = answer;
          cand.answers.push_back(answer);
        }
        inst.gold_answers = {gold};
        inst.visual = VisualContext{};  // present but carries no signal
        break;
      }
    }

    ds.candidates.emplace(inst.id, std::move(cand));
    ds.instances.push_back(std::move(inst));
  }
  ds.validate();
  return ds;
}

}  // namespace infosel
