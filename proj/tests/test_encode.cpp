#include "infosel/encode.hpp"

#include <cmath>

#include "doctest.h"
#include "test_util.hpp"

using namespace infosel;

namespace {

double norm_of(const FeatureVector& v) {
  double s = 0.0;
  for (double x : v) s += x * x;
  return std::sqrt(s);
}

EncoderConfig small_config() {
  EncoderConfig c;
  c.dim = 256;
  return c;
}

VisualContext sample_visual() {
  VisualContext v;
  v.region_features = {{0.5, -1.0, 2.0, 0.25}, {1.5, 0.0, -0.5, 1.0}};
  v.tags = {"cat", "sofa"};
  return v;
}

}  // namespace

TEST_CASE("encode_text determinism and norm") {
  const Encoder enc(small_config());
  const auto a = enc.encode_text("the quick brown fox");
  const auto b = enc.encode_text("the quick brown fox");
  CHECK(a == b);
  CHECK(norm_of(a) == doctest::Approx(1.0).epsilon(1e-9));

  const auto c = enc.encode_text("xyz totally different");
  CHECK(dot(a, c) < 1.0 - 1e-6);

  CHECK(norm_of(enc.encode_text("")) == 0.0);  // zero vector stays zero
}

TEST_CASE("different seeds give different hash spaces") {
  EncoderConfig c1 = small_config();
  EncoderConfig c2 = small_config();
  c2.seed = 99;
  const Encoder e1(c1), e2(c2);
  CHECK(e1.encode_text("hello world") != e2.encode_text("hello world"));
}

TEST_CASE("encoder config validation") {
  EncoderConfig c = small_config();
  c.dim = 32;
  CHECK_THROWS_AS(Encoder{c}, ConfigError);
  c = small_config();
  c.use_visual = c.use_question = c.use_answer = false;
  CHECK_THROWS_AS(Encoder{c}, ConfigError);
}

TEST_CASE("encode_tqa ablation flags") {
  EncoderConfig c = small_config();
  const Encoder full{c};

  c.use_question = false;
  const Encoder answer_only{c};

  // answer-only vectors ignore the prompt entirely
  CHECK(answer_only.encode_tqa("prompt one", "ans") ==
        answer_only.encode_tqa("prompt two", "ans"));

  // two answers differing in one token give different vectors
  CHECK(full.encode_tqa("p", "yes sir") != full.encode_tqa("p", "yes maam"));

  // Q+A differs from A-only on inputs whose prompt contributes occupied buckets
  CHECK(full.encode_tqa("what color is it", "blue") !=
        answer_only.encode_tqa("what color is it", "blue"));

  c = small_config();
  c.use_question = false;
  c.use_answer = false;
  c.use_visual = true;  // keeps config valid; tqa still has no segments
  const Encoder none{c};
  CHECK_THROWS_AS(none.encode_tqa("p", "a"), ConfigError);
}

TEST_CASE("encode_vqa fused vs concat shapes") {
  const VisualContext vis = sample_visual();
  EncoderConfig c = small_config();

  const Encoder fused{c};
  const auto fv = fused.encode_vqa(&vis, "what is it", "cat");
  CHECK(fv.size() == c.dim);
  CHECK(norm_of(fv) == doctest::Approx(1.0).epsilon(1e-9));

  c.fusion_mode = FusionMode::Concat;
  const Encoder concat{c};
  const auto cv = concat.encode_vqa(&vis, "what is it", "cat");
  CHECK(cv.size() == 3 * c.dim);
}

TEST_CASE("tags travel with the visual flag") {
  VisualContext with_tags = sample_visual();
  VisualContext no_tags = with_tags;
  no_tags.tags.clear();

  EncoderConfig c = small_config();
  const Encoder visual_on{c};
  CHECK(visual_on.encode_vqa(&with_tags, "q", "a") != visual_on.encode_vqa(&no_tags, "q", "a"));

  c.use_visual = false;
  const Encoder visual_off{c};
  CHECK(visual_off.encode_vqa(&with_tags, "q", "a") == visual_off.encode_vqa(&no_tags, "q", "a"));
}

TEST_CASE("encode_vqa error paths") {
  EncoderConfig c = small_config();
  const Encoder enc{c};
  CHECK_THROWS_AS(enc.encode_vqa(nullptr, "q", "a"), DataError);  // visual required

  VisualContext broken;
  broken.region_features = {{1.0, 2.0}, {1.0}};
  CHECK_THROWS_AS(enc.encode_vqa(&broken, "q", "a"), DataError);
}

TEST_CASE("ablation soundness: answer-free vectors constant across candidates") {
  EncoderConfig c = small_config();
  c.use_answer = false;
  const Encoder enc{c};
  const VisualContext vis = sample_visual();
  const auto v1 = enc.encode_vqa(&vis, "what is it", "cat");
  const auto v2 = enc.encode_vqa(&vis, "what is it", "dog");
  CHECK(v1 == v2);
}

TEST_CASE("encode_query uses context+question or visual+question") {
  const Encoder enc(small_config());

  Instance tqa;
  tqa.id = "t";
  tqa.context = "some context";
  tqa.question = "some question";
  tqa.gold_answers = {"g"};
  const auto qt = enc.encode_query(tqa);
  CHECK(norm_of(qt) == doctest::Approx(1.0).epsilon(1e-9));

  Instance bare = tqa;
  bare.context.reset();
  CHECK(enc.encode_query(bare) != qt);

  Instance vqa;
  vqa.id = "v";
  vqa.task_kind = TaskKind::Vqa;
  vqa.question = "some question";
  vqa.gold_answers = {"g"};
  vqa.visual = sample_visual();
  const auto qv = enc.encode_query(vqa);
  CHECK(norm_of(qv) == doctest::Approx(1.0).epsilon(1e-9));
  CHECK(qv != qt);
}

TEST_CASE("external encoder round trip and validation") {
  TempDir dir;
  const std::string path = dir.file("vecs.jsonl");
  EncoderConfig c = small_config();
  c.dim = 64;

  std::string lines;
  for (int j = -1; j < 2; ++j) {
    nlohmann::json rec;
    rec["instance_id"] = "i0";
    rec["model_index"] = j;
    std::vector<double> vec(64, 0.0);
    vec[static_cast<size_t>(j + 1)] = 1.0;
    rec["vector"] = vec;
    lines += rec.dump() + "\n";
  }
  write_file(path, lines);

  const Encoder a = Encoder::external(c, path);
  const Encoder b = Encoder::external(c, path);
  CHECK(a.lookup("i0", 0) == b.lookup("i0", 0));  // identical across loads
  CHECK(a.lookup("i0", -1)[0] == 1.0);
  CHECK_THROWS_AS(a.lookup("i0", 5), DataError);
  CHECK_THROWS_AS(a.encode_text("x"), ConfigError);

  // dimension mismatch refused
  c.dim = 128;
  CHECK_THROWS_AS(Encoder::external(c, path), DataError);
}

TEST_CASE("encoder config json round trip") {
  EncoderConfig c = small_config();
  c.use_visual = false;
  c.fusion_mode = FusionMode::Concat;
  c.seed = 17;
  c.word_ngram_max = 3;
  const EncoderConfig back = encoder_config_from_json(encoder_config_to_json(c));
  CHECK(back.dim == c.dim);
  CHECK(back.use_visual == c.use_visual);
  CHECK(back.fusion_mode == c.fusion_mode);
  CHECK(back.seed == c.seed);
  CHECK(back.word_ngram_max == c.word_ngram_max);
}
