#pragma once

#include <cstdint>
#include <memory>
#include <mutex>
#include <string>
#include <unordered_map>
#include <vector>

#include "infosel/core.hpp"
#include "json.hpp"

namespace infosel {

// Feature vectors are L2-normalized after assembly (all-zero stays zero).
using FeatureVector = std::vector<double>;

double dot(const FeatureVector& a, const FeatureVector& b);
void l2_normalize(FeatureVector& v);

enum class FusionMode { Fused, Concat };
enum class VisualPool { MeanPool };

FusionMode fusion_from_string(const std::string& s);
const char* to_string(FusionMode m);

struct EncoderConfig {
  size_t dim = 4096;
  int word_ngram_min = 1;
  int word_ngram_max = 2;
  int char_ngram_min = 3;
  int char_ngram_max = 5;
  bool use_visual = true;
  bool use_question = true;
  bool use_answer = true;
  FusionMode fusion_mode = FusionMode::Fused;
  VisualPool visual_pool = VisualPool::MeanPool;
  uint64_t seed = 0;  // hash salt

  void validate() const;

  // Concat stacks one dim-sized block per enabled input part; Fused always
  // emits a single block.
  size_t output_dim(TaskKind task) const;
  size_t concat_parts(TaskKind task) const;
};

nlohmann::json encoder_config_to_json(const EncoderConfig& config);
EncoderConfig encoder_config_from_json(const nlohmann::json& j);

// Segment delimiter for joint strings. U+241F so it cannot collide with
// natural text.
inline constexpr const char* kSep = "␟";

enum class EncoderKind { HashedNGram, External };

// Deterministic drop-in for a sentence/multimodal backbone: signed feature
// hashing of word and character n-grams, plus a seeded random-sign projection
// for region features. An External encoder serves precomputed vectors keyed
// by (instance_id, model_index); model_index -1 holds instance-level vectors
// used for queries.
class Encoder {
 public:
  explicit Encoder(EncoderConfig config);
  static Encoder external(EncoderConfig config, const std::string& vectors_path);

  const EncoderConfig& config() const { return config_; }
  EncoderKind kind() const { return kind_; }

  // Hashed bag of n-grams over one string, L2-normalized. Empty text gives
  // the zero vector.
  FeatureVector encode_text(const std::string& text) const;

  // Joint prompt/answer representation; ablation flags drop segments.
  FeatureVector encode_tqa(const std::string& prompt, const std::string& answer) const;

  // Fused: text part (question ␟ answer ␟ tags) + projected mean-pooled
  // region features, renormalized. Concat: one block per enabled part in
  // V, Q, A order.
  FeatureVector encode_vqa(const VisualContext* visual, const std::string& question,
                           const std::string& answer) const;

  // Instance-level representation for neighbor search and answer-free
  // classification: prompt text for tqa, visual+question for vqa.
  FeatureVector encode_query(const Instance& instance) const;

  FeatureVector lookup(const std::string& instance_id, int model_index) const;

 private:
  FeatureVector hash_ngrams(const std::string& text) const;
  FeatureVector project_regions(const VisualContext& visual) const;
  const std::vector<double>& projection_for(size_t region_dim) const;

  struct ProjectionCache {
    std::mutex mutex;
    std::unordered_map<size_t, std::vector<double>> by_dim;
  };

  EncoderConfig config_;
  EncoderKind kind_ = EncoderKind::HashedNGram;
  std::unordered_map<std::string, FeatureVector> external_;
  std::unique_ptr<ProjectionCache> projections_ = std::make_unique<ProjectionCache>();
};

}  // namespace infosel
