#include "infosel/encode.hpp"

#include <cctype>
#include <cmath>
#include <cstring>
#include <fstream>

#include "infosel/rng.hpp"
#include "json.hpp"

namespace infosel {

double dot(const FeatureVector& a, const FeatureVector& b) {
  if (a.size() != b.size()) throw DataError("dot: vector length mismatch");
  double s = 0.0;
  for (size_t i = 0; i < a.size(); ++i) s += static_cast<double>(a[i]) * static_cast<double>(b[i]);
  return s;
}

void l2_normalize(FeatureVector& v) {
  double sq = 0.0;
  for (double x : v) sq += x * x;
  if (sq == 0.0) return;
  const double inv = 1.0 / std::sqrt(sq);
  for (double& x : v) x *= inv;
}

FusionMode fusion_from_string(const std::string& s) {
  if (s == "fused") return FusionMode::Fused;
  if (s == "concat") return FusionMode::Concat;
  throw ConfigError("unknown fusion mode: \"" + s + "\"");
}

const char* to_string(FusionMode m) {
  return m == FusionMode::Fused ? "fused" : "concat";
}

void EncoderConfig::validate() const {
  if (dim < 64) throw ConfigError("encoder dim must be >= 64");
  if (!use_visual && !use_question && !use_answer) {
    throw ConfigError("encoder must keep at least one of visual/question/answer");
  }
  if (word_ngram_min < 1 || word_ngram_max < word_ngram_min) {
    throw ConfigError("bad word n-gram range");
  }
  if (char_ngram_min < 1 || char_ngram_max < char_ngram_min) {
    throw ConfigError("bad char n-gram range");
  }
}

size_t EncoderConfig::concat_parts(TaskKind task) const {
  size_t parts = 0;
  if (task == TaskKind::Vqa && use_visual) ++parts;
  if (use_question) ++parts;
  if (use_answer) ++parts;
  return parts;
}

size_t EncoderConfig::output_dim(TaskKind task) const {
  if (fusion_mode == FusionMode::Fused) return dim;
  return dim * concat_parts(task);
}

nlohmann::json encoder_config_to_json(const EncoderConfig& config) {
  nlohmann::json j;
  j["dim"] = config.dim;
  j["word_ngrams"] = {config.word_ngram_min, config.word_ngram_max};
  j["char_ngrams"] = {config.char_ngram_min, config.char_ngram_max};
  j["use_visual"] = config.use_visual;
  j["use_question"] = config.use_question;
  j["use_answer"] = config.use_answer;
  j["fusion_mode"] = to_string(config.fusion_mode);
  j["seed"] = config.seed;
  return j;
}

EncoderConfig encoder_config_from_json(const nlohmann::json& j) {
  EncoderConfig c;
  c.dim = j.value("dim", c.dim);
  if (j.contains("word_ngrams")) {
    c.word_ngram_min = j.at("word_ngrams").at(0).get<int>();
    c.word_ngram_max = j.at("word_ngrams").at(1).get<int>();
  }
  if (j.contains("char_ngrams")) {
    c.char_ngram_min = j.at("char_ngrams").at(0).get<int>();
    c.char_ngram_max = j.at("char_ngrams").at(1).get<int>();
  }
  c.use_visual = j.value("use_visual", c.use_visual);
  c.use_question = j.value("use_question", c.use_question);
  c.use_answer = j.value("use_answer", c.use_answer);
  if (j.contains("fusion_mode")) c.fusion_mode = fusion_from_string(j.at("fusion_mode"));
  c.seed = j.value("seed", c.seed);
  c.validate();
  return c;
}

Encoder::Encoder(EncoderConfig config) : config_(std::move(config)) {
  config_.validate();
}

Encoder Encoder::external(EncoderConfig config, const std::string& vectors_path) {
  Encoder enc(std::move(config));
  enc.kind_ = EncoderKind::External;

  std::ifstream in(vectors_path);
  if (!in) throw DataError("cannot open embedding file: " + vectors_path);
  std::string line;
  size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    nlohmann::json rec;
    try {
      rec = nlohmann::json::parse(line);
    } catch (const nlohmann::json::exception& e) {
      throw DataError("embedding file line " + std::to_string(line_no) + ": " + e.what());
    }
    const auto id = rec.at("instance_id").get<std::string>();
    const auto model_index = rec.at("model_index").get<int>();
    auto vec = rec.at("vector").get<std::vector<double>>();
    if (vec.size() != enc.config_.dim) {
      throw DataError("embedding file line " + std::to_string(line_no) + ": vector length " +
                      std::to_string(vec.size()) + " != configured dim " +
                      std::to_string(enc.config_.dim));
    }
    enc.external_[id + "\x1f" + std::to_string(model_index)] = std::move(vec);
  }
  return enc;
}

namespace {

// Hash namespaces keep word and char grams in separate feature spaces.
constexpr uint64_t kWordSalt = 0x77;
constexpr uint64_t kCharSalt = 0x63;

void accumulate(std::vector<double>& acc, uint64_t h, size_t dim) {
  const size_t bucket = static_cast<size_t>(h % dim);
  acc[bucket] += (h >> 63) ? 1.0 : -1.0;
}

}  // namespace

FeatureVector Encoder::hash_ngrams(const std::string& text) const {
  std::vector<double> acc(config_.dim, 0.0);

  // Word n-grams over whitespace tokens.
  std::vector<std::pair<size_t, size_t>> tokens;  // (begin, len)
  size_t pos = 0;
  while (pos < text.size()) {
    while (pos < text.size() && std::isspace(static_cast<unsigned char>(text[pos]))) ++pos;
    size_t start = pos;
    while (pos < text.size() && !std::isspace(static_cast<unsigned char>(text[pos]))) ++pos;
    if (pos > start) tokens.emplace_back(start, pos - start);
  }
  for (int n = config_.word_ngram_min; n <= config_.word_ngram_max; ++n) {
    if (tokens.size() < static_cast<size_t>(n)) break;
    for (size_t i = 0; i + static_cast<size_t>(n) <= tokens.size(); ++i) {
      uint64_t h = mix_seed(config_.seed, kWordSalt + static_cast<uint64_t>(n));
      for (int k = 0; k < n; ++k) {
        const auto& [b, l] = tokens[i + static_cast<size_t>(k)];
        h = fnv1a64(text.data() + b, l, h);
      }
      accumulate(acc, h, config_.dim);
    }
  }

  // Char n-grams over the raw bytes, whitespace included.
  for (int n = config_.char_ngram_min; n <= config_.char_ngram_max; ++n) {
    if (text.size() < static_cast<size_t>(n)) break;
    const uint64_t salt = mix_seed(config_.seed, kCharSalt + static_cast<uint64_t>(n));
    for (size_t i = 0; i + static_cast<size_t>(n) <= text.size(); ++i) {
      accumulate(acc, fnv1a64(text.data() + i, static_cast<size_t>(n), salt), config_.dim);
    }
  }

  FeatureVector out(acc.begin(), acc.end());
  l2_normalize(out);
  return out;
}

FeatureVector Encoder::encode_text(const std::string& text) const {
  if (kind_ != EncoderKind::HashedNGram) {
    throw ConfigError("encode_text requires a hashed n-gram encoder");
  }
  return hash_ngrams(text);
}

FeatureVector Encoder::encode_tqa(const std::string& prompt, const std::string& answer) const {
  if (!config_.use_question && !config_.use_answer) {
    throw ConfigError("encode_tqa: both segments ablated");
  }
  if (config_.fusion_mode == FusionMode::Fused) {
    std::string joint;
    if (config_.use_question) joint = prompt;
    if (config_.use_answer) {
      if (config_.use_question) joint += kSep;
      joint += answer;
    }
    return hash_ngrams(joint);
  }

  FeatureVector out;
  out.reserve(config_.output_dim(TaskKind::Tqa));
  if (config_.use_question) {
    auto q = hash_ngrams(prompt);
    out.insert(out.end(), q.begin(), q.end());
  }
  if (config_.use_answer) {
    auto a = hash_ngrams(answer);
    out.insert(out.end(), a.begin(), a.end());
  }
  return out;
}

const std::vector<double>& Encoder::projection_for(size_t region_dim) const {
  std::lock_guard<std::mutex> lock(projections_->mutex);
  auto it = projections_->by_dim.find(region_dim);
  if (it != projections_->by_dim.end()) return it->second;

  // Random-sign projection, one column per input coordinate, filled from a
  // seeded stream so the matrix is identical across runs and platforms.
  std::vector<double> mat(config_.dim * region_dim);
  for (size_t j = 0; j < region_dim; ++j) {
    Rng rng(mix_seed(config_.seed, 0x5650000ULL + j));
    uint64_t bits = 0;
    int have = 0;
    for (size_t i = 0; i < config_.dim; ++i) {
      if (have == 0) {
        bits = rng.next();
        have = 64;
      }
      mat[i * region_dim + j] = (bits & 1) ? 1.0 : -1.0;
      bits >>= 1;
      --have;
    }
  }
  return projections_->by_dim.emplace(region_dim, std::move(mat)).first->second;
}

FeatureVector Encoder::project_regions(const VisualContext& visual) const {
  const size_t region_dim = visual.region_dim();
  FeatureVector out(config_.dim, 0.0f);
  if (region_dim == 0) return out;

  std::vector<double> pooled(region_dim, 0.0);
  for (const auto& region : visual.region_features) {
    for (size_t j = 0; j < region_dim; ++j) pooled[j] += region[j];
  }
  const double inv = 1.0 / static_cast<double>(visual.region_features.size());
  for (double& x : pooled) x *= inv;

  const auto& mat = projection_for(region_dim);
  for (size_t i = 0; i < config_.dim; ++i) {
    double s = 0.0;
    const double* row = mat.data() + i * region_dim;
    for (size_t j = 0; j < region_dim; ++j) s += row[j] * pooled[j];
    out[i] = s;
  }
  l2_normalize(out);
  return out;
}

FeatureVector Encoder::encode_vqa(const VisualContext* visual, const std::string& question,
                                  const std::string& answer) const {
  if (config_.concat_parts(TaskKind::Vqa) == 0) {
    throw ConfigError("encode_vqa: all input parts ablated");
  }
  if (config_.use_visual && visual == nullptr) {
    throw DataError("encode_vqa: visual context required but absent");
  }

  auto tag_text = [&]() {
    std::string t;
    if (visual != nullptr) {
      for (const auto& tag : visual->tags) {
        if (!t.empty()) t += kSep;
        t += tag;
      }
    }
    return t;
  };

  if (config_.fusion_mode == FusionMode::Fused) {
    std::string joint;
    auto append = [&joint](const std::string& seg) {
      if (!joint.empty()) joint += kSep;
      joint += seg;
    };
    if (config_.use_question) append(question);
    if (config_.use_answer) append(answer);
    if (config_.use_visual) {
      const std::string tags = tag_text();
      if (!tags.empty()) append(tags);
    }
    FeatureVector out = hash_ngrams(joint);
    if (config_.use_visual && !visual->region_features.empty()) {
      FeatureVector proj = project_regions(*visual);
      for (size_t i = 0; i < out.size(); ++i) out[i] += proj[i];
      l2_normalize(out);
    }
    return out;
  }

  // Concat: V, Q, A blocks.
  FeatureVector out;
  out.reserve(config_.output_dim(TaskKind::Vqa));
  if (config_.use_visual) {
    FeatureVector vblock = project_regions(*visual);
    const std::string tags = tag_text();
    if (!tags.empty()) {
      FeatureVector tagv = hash_ngrams(tags);
      for (size_t i = 0; i < vblock.size(); ++i) vblock[i] += tagv[i];
      l2_normalize(vblock);
    }
    out.insert(out.end(), vblock.begin(), vblock.end());
  }
  if (config_.use_question) {
    auto q = hash_ngrams(question);
    out.insert(out.end(), q.begin(), q.end());
  }
  if (config_.use_answer) {
    auto a = hash_ngrams(answer);
    out.insert(out.end(), a.begin(), a.end());
  }
  return out;
}

FeatureVector Encoder::encode_query(const Instance& instance) const {
  if (kind_ == EncoderKind::External) {
    return lookup(instance.id, -1);
  }
  if (instance.task_kind == TaskKind::Vqa) {
    std::string joint = instance.question;
    const VisualContext* visual = instance.visual ? &*instance.visual : nullptr;
    if (visual != nullptr) {
      for (const auto& tag : visual->tags) {
        joint += kSep;
        joint += tag;
      }
    }
    FeatureVector out = hash_ngrams(joint);
    if (visual != nullptr && !visual->region_features.empty()) {
      FeatureVector proj = project_regions(*visual);
      for (size_t i = 0; i < out.size(); ++i) out[i] += proj[i];
      l2_normalize(out);
    }
    return out;
  }
  std::string joint;
  if (instance.context) {
    joint = *instance.context;
    joint += kSep;
  }
  joint += instance.question;
  return hash_ngrams(joint);
}

FeatureVector Encoder::lookup(const std::string& instance_id, int model_index) const {
  if (kind_ != EncoderKind::External) {
    throw ConfigError("lookup requires an external encoder");
  }
  auto it = external_.find(instance_id + "\x1f" + std::to_string(model_index));
  if (it == external_.end()) {
    throw DataError("no external vector for (" + instance_id + ", " +
                    std::to_string(model_index) + ")");
  }
  return it->second;
}

}  // namespace infosel
