#include <gtest/gtest.h>

#include <fstream>
#include <random>

#include "oracles.hpp"
#include "sqa/error.hpp"
#include "sqa/model_io.hpp"

namespace {

using sqa::HeadVariant;

sqa::PredictorHead random_head(HeadVariant v, std::mt19937_64& rng, bool layer_norm = true) {
  std::normal_distribution<double> g(0, 1);
  auto cfg = sqa::make_head_config(v, 6, 17, 4);
  cfg.use_layer_norm = layer_norm;
  auto head = sqa::init_head(cfg, v == HeadVariant::spectrum ? 9 : 0, 1.0);
  auto p = sqa::flatten_parameters(head);
  for (auto& x : p) x = g(rng) * std::pow(10.0, std::uniform_int_distribution<int>(-6, 3)(rng));
  sqa::assign_parameters(head, p);
  return head;
}

sqa::PooledFeatures random_input(const sqa::PredictorHead& h, std::mt19937_64& rng) {
  std::normal_distribution<double> g(0, 1);
  sqa::PooledFeatures x;
  x.fixed.resize(h.config.variant == HeadVariant::spectrum ? h.config.embedding_dim : h.config.feature_dim());
  for (auto& v : x.fixed) v = g(rng);
  x.raw_aux.resize(h.raw_aux_dim);
  for (auto& v : x.raw_aux) v = g(rng);
  return x;
}

TEST(ModelFile, EveryVariantRoundTripsExactly) {
  std::mt19937_64 rng(1);
  for (auto v : {HeadVariant::plain, HeadVariant::compressed_pitch, HeadVariant::pitch_histogram,
                 HeadVariant::spectrum}) {
    for (bool ln : {true, false}) {
      sqa::ModelFile m{random_head(v, rng, ln), std::nullopt};
      const auto text = sqa::serialize_model(m);
      const auto back = sqa::parse_model(text);
      EXPECT_EQ(back, m) << sqa::to_string(v);
      EXPECT_EQ(sqa::serialize_model(back), text);
      for (int i = 0; i < 10; ++i) {
        const auto x = random_input(m.head, rng);
        EXPECT_NEAR(sqa::model_score(back, x), sqa::model_score(m, x), 1e-9);
      }
    }
  }
}

TEST(ModelFile, BiasBranchSectionRoundTrips) {
  std::mt19937_64 rng(2);
  std::normal_distribution<double> g(0, 1);
  sqa::ModelFile m{random_head(HeadVariant::plain, rng), sqa::zero_branch(6, 4.25, 1.75)};
  for (auto& w : m.bias_branch->add_weights) w = static_cast<float>(g(rng));
  for (auto& w : m.bias_branch->sub_weights) w = static_cast<float>(g(rng));
  m.bias_branch->add_bias = 0.125f;
  m.bias_branch->sub_bias = -1e-7f;
  const auto text = sqa::serialize_model(m);
  EXPECT_NE(text.find("bias_branch 1"), std::string::npos);
  EXPECT_EQ(sqa::parse_model(text), m);
}

TEST(ModelFile, TextIsNamedAndVersioned) {
  std::mt19937_64 rng(3);
  const auto text = sqa::serialize_model({random_head(HeadVariant::pitch_histogram, rng), std::nullopt});
  EXPECT_EQ(text.rfind("sqa-model 1\n", 0), 0u);
  for (const char* key : {"variant pitch_histogram", "embedding_dim 6", "aux_dim 120", "seed 17", "weights 126 ",
                          "norm_scale 126 ", "end"}) {
    EXPECT_NE(text.find(key), std::string::npos) << key;
  }
}

TEST(ModelFile, CorruptTextIsRejected) {
  std::mt19937_64 rng(4);
  const auto text = sqa::serialize_model({random_head(HeadVariant::plain, rng), std::nullopt});
  EXPECT_THROW(sqa::parse_model("sqa-model 2\nend\n"), sqa::FormatError);
  EXPECT_THROW(sqa::parse_model(text.substr(0, text.size() / 2)), sqa::FormatError);
  std::string bad = text;
  bad.replace(bad.find("weights 6"), 9, "weights 7");
  EXPECT_THROW(sqa::parse_model(bad), sqa::FormatError);
  std::string wrong = text;
  wrong.replace(wrong.find("embedding_dim 6"), 15, "embedding_dim 5");
  EXPECT_THROW(sqa::parse_model(wrong), sqa::FormatError);
  EXPECT_THROW(sqa::parse_model(text + "extra 1\n"), sqa::FormatError);
}

TEST(ModelFile, SaveLoadThroughDisk) {
  sqa::testing::TempDir dir;
  std::mt19937_64 rng(5);
  const sqa::ModelFile m{random_head(HeadVariant::spectrum, rng), std::nullopt};
  sqa::save_model(m, dir / "m.txt");
  EXPECT_EQ(sqa::load_model(dir / "m.txt"), m);
  EXPECT_THROW(sqa::load_model(dir / "missing.txt"), sqa::IoError);
}

TEST(FusionFile, RoundTripAndDigests) {
  sqa::testing::TempDir dir;
  std::mt19937_64 rng(6);
  sqa::save_model({random_head(HeadVariant::plain, rng), std::nullopt}, dir / "a.model");
  sqa::save_model({random_head(HeadVariant::plain, rng), std::nullopt}, dir / "b.model");
  sqa::FusionModel f{{"a.model", "b.model"},
                     {sqa::file_digest(dir / "a.model"), sqa::file_digest(dir / "b.model")},
                     {0.25f, 0.75f},
                     -0.5f};
  const auto text = sqa::serialize_fusion(f);
  EXPECT_TRUE(sqa::is_fusion_text(text));
  EXPECT_EQ(sqa::parse_fusion(text), f);
  EXPECT_NO_THROW(sqa::verify_members(f, dir.path()));

  sqa::save_model({random_head(HeadVariant::plain, rng), std::nullopt}, dir / "b.model");
  try {
    sqa::verify_members(f, dir.path());
    FAIL() << "expected a stale-member error";
  } catch (const sqa::FormatError& e) {
    EXPECT_NE(std::string(e.what()).find("b.model"), std::string::npos);
  }
}

TEST(Digest, KnownFnvVectors) {
  // FNV-1a 64 reference values.
  EXPECT_EQ(sqa::content_digest(""), "fnv1a64:cbf29ce484222325");
  EXPECT_EQ(sqa::content_digest("a"), "fnv1a64:af63dc4c8601ec8c");
  EXPECT_EQ(sqa::content_digest("foobar"), "fnv1a64:85944171f73967e8");
}

}  // namespace
