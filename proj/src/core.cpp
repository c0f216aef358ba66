#include "infosel/core.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <unordered_set>

#include "infosel/rng.hpp"
#include "json.hpp"

namespace fs = std::filesystem;
using json = nlohmann::json;

namespace infosel {

const char* to_string(TaskKind k) {
  return k == TaskKind::Tqa ? "tqa" : "vqa";
}

TaskKind task_kind_from_string(const std::string& s) {
  std::string lower;
  lower.reserve(s.size());
  for (char c : s) lower.push_back(static_cast<char>(std::tolower(static_cast<unsigned char>(c))));
  if (lower == "tqa") return TaskKind::Tqa;
  if (lower == "vqa") return TaskKind::Vqa;
  throw DataError("unknown task_kind: \"" + s + "\"");
}

size_t VisualContext::region_dim() const {
  if (region_features.empty()) return 0;
  size_t dim = region_features.front().size();
  for (const auto& v : region_features) {
    if (v.size() != dim) {
      throw DataError("region feature vectors have mixed dimensionality");
    }
  }
  return dim;
}

const CandidateSet& Dataset::candidates_for(const std::string& instance_id) const {
  auto it = candidates.find(instance_id);
  if (it == candidates.end()) {
    throw DataError("no candidate set for instance \"" + instance_id + "\"");
  }
  return it->second;
}

void Dataset::validate() const {
  std::unordered_set<std::string> seen;
  for (const auto& inst : instances) {
    if (!seen.insert(inst.id).second) {
      throw DataError("duplicate instance id \"" + inst.id + "\"");
    }
    if (inst.gold_answers.empty()) {
      throw DataError("instance \"" + inst.id + "\" has empty gold_answers");
    }
    if (inst.visual && inst.task_kind != TaskKind::Vqa) {
      throw DataError("instance \"" + inst.id + "\" carries visual context but is not vqa");
    }
    if (inst.visual) inst.visual->region_dim();
  }
  if (!candidates.empty()) {
    for (const auto& inst : instances) {
      auto it = candidates.find(inst.id);
      if (it == candidates.end()) {
        throw DataError("instance \"" + inst.id + "\" has no candidate set");
      }
      if (it->second.answers.size() != roster.size()) {
        throw DataError("instance \"" + inst.id + "\" candidate count does not match roster");
      }
    }
  }
}

namespace {

VisualContext parse_visual(const json& v, const std::string& where) {
  VisualContext out;
  if (v.contains("region_features")) {
    for (const auto& row : v.at("region_features")) {
      out.region_features.push_back(row.get<std::vector<double>>());
    }
  }
  if (v.contains("tags")) {
    out.tags = v.at("tags").get<std::vector<std::string>>();
  }
  size_t dim = out.region_features.empty() ? 0 : out.region_features.front().size();
  for (const auto& row : out.region_features) {
    if (row.size() != dim) {
      throw DataError(where + ": region feature vectors have mixed dimensionality");
    }
  }
  return out;
}

}  // namespace

Dataset load_dataset(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open dataset file: " + path);
  const fs::path base_dir = fs::path(path).parent_path();

  Dataset ds;
  std::unordered_set<std::string> seen_ids;
  std::string line;
  size_t line_no = 0;
  bool roster_set = false;
  bool any_candidates = false;

  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty() || line.find_first_not_of(" \t\r") == std::string::npos) continue;

    json rec;
    try {
      rec = json::parse(line);
    } catch (const json::exception& e) {
      throw DataError("malformed record at line " + std::to_string(line_no) + ": " + e.what());
    }

    const std::string where = "line " + std::to_string(line_no);
    try {
      Instance inst;
      inst.id = rec.at("id").get<std::string>();
      if (!seen_ids.insert(inst.id).second) {
        throw DataError(where + ": duplicate instance id \"" + inst.id + "\"");
      }
      if (rec.contains("context") && !rec.at("context").is_null()) {
        inst.context = rec.at("context").get<std::string>();
      }
      inst.question = rec.at("question").get<std::string>();
      inst.gold_answers = rec.at("gold_answers").get<std::vector<std::string>>();
      if (inst.gold_answers.empty()) {
        throw DataError(where + ": empty gold_answers for \"" + inst.id + "\"");
      }
      inst.task_kind = task_kind_from_string(rec.value("task_kind", "tqa"));

      if (rec.contains("visual") && !rec.at("visual").is_null()) {
        inst.visual = parse_visual(rec.at("visual"), where);
      } else if (rec.contains("visual_ref") && !rec.at("visual_ref").is_null()) {
        const fs::path ref = base_dir / rec.at("visual_ref").get<std::string>();
        std::ifstream vin(ref);
        if (!vin) throw DataError(where + ": cannot open visual_ref file: " + ref.string());
        json v;
        try {
          vin >> v;
        } catch (const json::exception& e) {
          throw DataError(where + ": malformed visual_ref file " + ref.string() + ": " + e.what());
        }
        inst.visual = parse_visual(v, where);
      }
      if (inst.visual && inst.task_kind != TaskKind::Vqa) {
        throw DataError(where + ": visual context on non-vqa instance \"" + inst.id + "\"");
      }

      if (rec.contains("candidates") && !rec.at("candidates").is_null()) {
        const json& cand = rec.at("candidates");
        auto models = cand.at("models").get<std::vector<std::string>>();
        auto answers = cand.at("answers").get<std::vector<std::string>>();
        if (models.size() != answers.size()) {
          throw DataError(where + ": candidates models/answers length mismatch");
        }
        if (models.empty()) {
          throw DataError(where + ": empty candidate roster");
        }
        if (!roster_set) {
          ds.roster = models;
          roster_set = true;
        } else if (models != ds.roster) {
          throw DataError(where + ": model roster differs from the first record's roster");
        }
        any_candidates = true;
        ds.candidates.emplace(inst.id, CandidateSet{inst.id, std::move(answers)});
      } else if (any_candidates) {
        throw DataError(where + ": record lacks candidates but earlier records carry them");
      }

      ds.instances.push_back(std::move(inst));
    } catch (const DataError&) {
      throw;
    } catch (const json::exception& e) {
      throw DataError(where + ": " + e.what());
    }
  }

  if (ds.instances.empty()) {
    throw DataError("empty dataset: " + path);
  }
  ds.validate();
  return ds;
}

void write_dataset(const Dataset& dataset, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw DataError("cannot open output file: " + path);
  for (const auto& inst : dataset.instances) {
    json rec;
    rec["id"] = inst.id;
    if (inst.context) rec["context"] = *inst.context;
    rec["question"] = inst.question;
    rec["gold_answers"] = inst.gold_answers;
    rec["task_kind"] = to_string(inst.task_kind);
    if (inst.visual) {
      json v;
      v["region_features"] = inst.visual->region_features;
      v["tags"] = inst.visual->tags;
      rec["visual"] = std::move(v);
    }
    auto it = dataset.candidates.find(inst.id);
    if (it != dataset.candidates.end()) {
      json cand;
      cand["models"] = dataset.roster;
      cand["answers"] = it->second.answers;
      rec["candidates"] = std::move(cand);
    }
    out << rec.dump() << "\n";
  }
}

namespace {

Dataset take_instances(const Dataset& src, const std::vector<size_t>& idx) {
  Dataset out;
  out.roster = src.roster;
  out.instances.reserve(idx.size());
  for (size_t i : idx) {
    const Instance& inst = src.instances[i];
    out.instances.push_back(inst);
    auto it = src.candidates.find(inst.id);
    if (it != src.candidates.end()) out.candidates.emplace(inst.id, it->second);
  }
  return out;
}

}  // namespace

std::pair<Dataset, Dataset> split(const Dataset& dataset, const SplitSpec& spec) {
  if (dataset.instances.empty()) throw DataError("split: empty dataset");
  if (!(spec.train_fraction > 0.0 && spec.train_fraction < 1.0)) {
    throw ConfigError("split: train_fraction must lie in (0,1)");
  }
  const size_t n = dataset.instances.size();
  std::vector<size_t> order(n);
  for (size_t i = 0; i < n; ++i) order[i] = i;
  Rng rng(spec.seed);
  rng.shuffle(order);

  const auto n_train = static_cast<size_t>(std::llround(spec.train_fraction * static_cast<double>(n)));
  std::vector<size_t> train_idx(order.begin(), order.begin() + static_cast<ptrdiff_t>(n_train));
  std::vector<size_t> val_idx(order.begin() + static_cast<ptrdiff_t>(n_train), order.end());
  return {take_instances(dataset, train_idx), take_instances(dataset, val_idx)};
}

Dataset subsample(const Dataset& dataset, size_t n, uint64_t seed) {
  const size_t total = dataset.instances.size();
  if (n == 0) throw ConfigError("subsample: n must be positive");
  if (n > total) {
    throw ConfigError("subsample: n=" + std::to_string(n) + " exceeds dataset size " +
                      std::to_string(total));
  }
  std::vector<size_t> order(total);
  for (size_t i = 0; i < total; ++i) order[i] = i;
  Rng rng(seed);
  rng.shuffle(order);
  order.resize(n);
  return take_instances(dataset, order);
}

Dataset drop_model(const Dataset& dataset, const std::string& model_name) {
  auto it = std::find(dataset.roster.begin(), dataset.roster.end(), model_name);
  if (it == dataset.roster.end()) {
    throw ConfigError("drop_model: \"" + model_name + "\" is not in the roster");
  }
  const size_t drop_idx = static_cast<size_t>(it - dataset.roster.begin());
  Dataset out;
  out.instances = dataset.instances;
  out.roster = dataset.roster;
  out.roster.erase(out.roster.begin() + static_cast<ptrdiff_t>(drop_idx));
  for (const auto& [id, cand] : dataset.candidates) {
    CandidateSet reduced{id, cand.answers};
    reduced.answers.erase(reduced.answers.begin() + static_cast<ptrdiff_t>(drop_idx));
    out.candidates.emplace(id, std::move(reduced));
  }
  return out;
}

}  // namespace infosel
