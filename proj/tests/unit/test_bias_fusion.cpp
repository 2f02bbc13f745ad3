#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "sqa/bias_correction.hpp"
#include "sqa/error.hpp"
#include "sqa/fusion.hpp"
#include "sqa/heads.hpp"

namespace {

using sqa::HeadVariant;
using sqa::LabeledExample;

// Piecewise definition written out independently.
double eq_oracle(double y, double ba, double bs, double alpha, double beta) {
  if (y > alpha) return y + ba;
  if (y < beta) return y - bs;
  return y;
}

sqa::PredictorHead identity_head(std::size_t dim) {
  // forward(v) = v[0]
  auto head = sqa::init_head(sqa::make_head_config(HeadVariant::plain, dim));
  head.weights[0] = 1.0f;
  return head;
}

// ---------------------------------------------------------------- apply_bias

TEST(ApplyBias, ReferenceValues) {
  EXPECT_EQ(sqa::apply_bias(3.0, 9, 9, 4.0, 2.0), 3.0);
  EXPECT_DOUBLE_EQ(sqa::apply_bias(4.5, 0.2, 0, 4.0, 2.0), 4.7);
  EXPECT_DOUBLE_EQ(sqa::apply_bias(1.5, 0, 0.3, 4.0, 2.0), 1.2);
  EXPECT_EQ(sqa::apply_bias(4.0, 1, 1, 4.0, 2.0), 4.0);
  EXPECT_EQ(sqa::apply_bias(2.0, 1, 1, 4.0, 2.0), 2.0);
}

TEST(ApplyBias, ThresholdOrderingIsEnforced) {
  EXPECT_THROW(sqa::apply_bias(3, 0, 0, 2.0, 4.0), sqa::InvalidArgument);
  EXPECT_THROW(sqa::apply_bias(3, 0, 0, 5.0, 2.0), sqa::InvalidArgument);
  EXPECT_THROW(sqa::apply_bias(3, 0, 0, 4.0, 1.0), sqa::InvalidArgument);
  EXPECT_THROW(sqa::zero_branch(3, 3.0, 3.0), sqa::InvalidArgument);
}

TEST(ApplyBias, GridMatchesPiecewiseDefinition) {
  for (auto [beta, alpha] : {std::pair{2.0, 4.0}, std::pair{1.5, 4.5}}) {
    for (int i = 100; i <= 500; ++i) {
      const double y = i / 100.0;
      EXPECT_EQ(sqa::apply_bias(y, 0.37, -0.21, alpha, beta), eq_oracle(y, 0.37, -0.21, alpha, beta));
      EXPECT_EQ(sqa::apply_bias(y, 0.0, 0.0, alpha, beta), y);
    }
  }
}

// ---------------------------------------------------------------- forward_corrected

TEST(ForwardCorrected, ZeroBranchIsIdentity) {
  std::mt19937_64 rng(1);
  std::normal_distribution<double> g(3, 2);
  auto head = sqa::init_head(sqa::make_head_config(HeadVariant::plain, 5));
  for (auto& w : head.weights) w = static_cast<float>(g(rng) - 3);
  head.bias = 2.5f;
  const auto branch = sqa::zero_branch(5);
  for (int i = 0; i < 200; ++i) {
    std::vector<double> v(5);
    for (auto& x : v) x = g(rng);
    EXPECT_EQ(sqa::forward_corrected(head, branch, v), sqa::forward(head, v));
  }
}

TEST(ForwardCorrected, MatchesCompositionOracleAndMiddleIgnoresBranch) {
  std::mt19937_64 rng(2);
  std::normal_distribution<double> g(0, 1);
  std::uniform_real_distribution<double> y(0.5, 5.5);
  const auto head = identity_head(4);
  auto branch = sqa::zero_branch(4, 4.0, 2.0);
  for (int i = 0; i < 500; ++i) {
    for (auto& w : branch.add_weights) w = static_cast<float>(g(rng));
    for (auto& w : branch.sub_weights) w = static_cast<float>(g(rng));
    branch.add_bias = static_cast<float>(g(rng));
    branch.sub_bias = static_cast<float>(g(rng));
    std::vector<double> v = {y(rng), g(rng), g(rng), g(rng)};
    double ba = branch.add_bias, bs = branch.sub_bias;
    for (int k = 0; k < 4; ++k) {
      ba += branch.add_weights[k] * v[k];
      bs += branch.sub_weights[k] * v[k];
    }
    const double got = sqa::forward_corrected(head, branch, v);
    EXPECT_NEAR(got, eq_oracle(v[0], ba, bs, 4.0, 2.0), 1e-12);
    if (v[0] >= 2.0 && v[0] <= 4.0) {
      EXPECT_EQ(got, v[0]);
    }
  }
  EXPECT_THROW(sqa::forward_corrected(head, sqa::zero_branch(3), std::vector<double>{1, 2, 3, 4}),
               sqa::DimensionError);
}

// ---------------------------------------------------------------- train_bias_branch

// Features [y_hat, 1]; base head returns the first feature.
std::vector<LabeledExample> offset_set(std::mt19937_64& rng, std::size_t n, double high_offset) {
  std::uniform_real_distribution<double> y(1.0, 5.0);
  std::vector<LabeledExample> out;
  for (std::size_t i = 0; i < n; ++i) {
    const double label = y(rng);
    const double pred = label > 4.0 ? label - high_offset : label;
    out.push_back({{{pred, 1.0}, {}}, label, "s" + std::to_string(i % 8)});
  }
  return out;
}

TEST(TrainBias, LearnsConstantOffsetAboveAlpha) {
  std::mt19937_64 rng(3);
  // Base head is 0.5 too low for labels above 4.5 (predictions above 4).
  auto make = [&](std::size_t n) {
    std::uniform_real_distribution<double> y(1.0, 5.0);
    std::vector<LabeledExample> out;
    for (std::size_t i = 0; i < n; ++i) {
      const double label = y(rng);
      const double pred = label >= 4.5 ? label - 0.5 : std::min(label, 4.0);
      out.push_back({{{pred, 1.0}, {}}, label, "s" + std::to_string(i % 8)});
    }
    return out;
  };
  const auto train = make(400);
  const auto val = make(200);
  const auto head = identity_head(2);
  sqa::TrainConfig cfg;
  cfg.learning_rate = 1e-3;
  const auto before = head;
  const auto result = sqa::train_bias_branch(head, train, val, 4.0, 2.0, cfg);
  EXPECT_EQ(head, before);
  EXPECT_FALSE(result.inactive);
  // b_a at the center of the affected region.
  const double ba = result.branch.add_weights[0] * 4.25 + result.branch.add_weights[1] + result.branch.add_bias;
  EXPECT_NEAR(ba, 0.5, 0.1);

  std::vector<double> raw, corrected, labels;
  for (const auto& ex : val) {
    if (ex.label < 4.5) continue;
    raw.push_back(sqa::forward(head, ex.features.fixed));
    corrected.push_back(sqa::forward_corrected(head, result.branch, ex.features.fixed));
    labels.push_back(ex.label);
  }
  const auto seg_raw = sqa::segment_mse(raw, labels);
  const auto seg_cor = sqa::segment_mse(corrected, labels);
  EXPECT_LT(*seg_cor[14].mse, *seg_raw[14].mse);
}

TEST(TrainBias, UnbiasedBaseStaysClose) {
  std::mt19937_64 rng(4);
  const auto train = offset_set(rng, 300, 0.0);
  const auto val = offset_set(rng, 150, 0.0);
  const auto head = identity_head(2);
  const auto result = sqa::train_bias_branch(head, train, val, 4.0, 2.0, {});
  double raw = 0, cor = 0;
  for (const auto& ex : val) {
    raw += std::abs(sqa::forward(head, ex.features.fixed) - ex.label);
    cor += std::abs(sqa::forward_corrected(head, result.branch, ex.features.fixed) - ex.label);
  }
  EXPECT_NEAR(cor / val.size(), raw / val.size(), 1e-3);
}

TEST(TrainBias, NoActiveExampleReturnsZeroBranch) {
  std::vector<LabeledExample> mid;
  for (int i = 0; i < 10; ++i) mid.push_back({{{2.5 + 0.1 * i, 1.0}, {}}, 3.0, "s" + std::to_string(i % 2)});
  const auto result = sqa::train_bias_branch(identity_head(2), mid, mid, 4.0, 2.0, {});
  EXPECT_TRUE(result.inactive);
  EXPECT_EQ(result.branch, sqa::zero_branch(2, 4.0, 2.0));
}

// ---------------------------------------------------------------- segments

TEST(Segments, Basics) {
  const std::vector<double> l(10, 3.1);
  const auto s = sqa::segment_mse(l, l);
  for (std::size_t k = 0; k < 16; ++k) {
    if (k == 8) {
      EXPECT_EQ(s[k].count, 10u);
      EXPECT_EQ(*s[k].mse, 0.0);
    } else {
      EXPECT_EQ(s[k].count, 0u);
      EXPECT_FALSE(s[k].mse.has_value());
    }
  }
  const auto top = sqa::segment_mse(std::vector<double>{4.0}, std::vector<double>{5.0});
  EXPECT_EQ(top[15].count, 1u);
  EXPECT_EQ(*top[15].mse, 1.0);
  EXPECT_EQ(top[15].lo, 4.75);
  EXPECT_THROW(sqa::segment_mse(std::vector<double>{1}, std::vector<double>{0.5}), sqa::InvalidArgument);
}

TEST(Segments, MatchBruteForce) {
  std::mt19937_64 rng(5);
  std::uniform_real_distribution<double> u(1, 5);
  std::normal_distribution<double> g(0, 0.4);
  std::vector<double> p, l;
  for (int i = 0; i < 200; ++i) {
    l.push_back(u(rng));
    p.push_back(l.back() + g(rng));
  }
  const auto s = sqa::segment_mse(p, l);
  for (int k = 0; k < 16; ++k) {
    const double lo = 1 + 0.25 * k, hi = lo + 0.25;
    double sq = 0;
    std::size_t n = 0;
    for (int i = 0; i < 200; ++i) {
      if (l[i] >= lo && (l[i] < hi || (k == 15 && l[i] <= 5))) {
        sq += (p[i] - l[i]) * (p[i] - l[i]);
        ++n;
      }
    }
    EXPECT_EQ(s[k].count, n);
    if (n > 0) {
      EXPECT_NEAR(*s[k].mse, sq / n, 1e-12);
    }
  }
  const auto csv = sqa::segment_mse_csv(s);
  EXPECT_EQ(csv.substr(0, csv.find('\n')), "segment_lo,segment_hi,count,mse");
}

// ---------------------------------------------------------------- fusion

sqa::MetricReport report(double srcc, double mse) {
  sqa::MetricReport r;
  r.system.srcc = srcc;
  r.system.mse = mse;
  return r;
}

TEST(Rank, TieBrokenByMse) {
  const std::vector<sqa::PredictorReport> reports = {
      {"PH", report(0.939, 0.241)}, {"C", report(0.931, 0.010)}, {"CP", report(0.939, 0.036)}};
  EXPECT_EQ(sqa::rank_predictors(reports, 2), (std::vector<std::string>{"CP", "PH"}));
  EXPECT_EQ(sqa::rank_predictors(reports, 3), (std::vector<std::string>{"CP", "PH", "C"}));
  EXPECT_THROW(sqa::rank_predictors(reports, 4), sqa::InvalidArgument);
  const std::vector<sqa::PredictorReport> one = {{"only", report(0.5, 0.5)}};
  EXPECT_EQ(sqa::rank_predictors(one, 1), (std::vector<std::string>{"only"}));
}

TEST(Rank, FullTieFallsBackToIdAndNanSortsLast) {
  const std::vector<sqa::PredictorReport> reports = {
      {"b", report(0.8, 0.1)}, {"n", report(std::nan(""), 0.0)}, {"a", report(0.8, 0.1)}};
  EXPECT_EQ(sqa::rank_predictors(reports, 3), (std::vector<std::string>{"a", "b", "n"}));
}

TEST(FuseForward, UniformOneHotAndOracle) {
  sqa::FusionModel m{{"a", "b", "c"}, {"", "", ""}, {1.0f / 3, 1.0f / 3, 1.0f / 3}, 0.0f};
  const std::vector<double> s = {3.0, 4.5, 1.5};
  EXPECT_NEAR(sqa::fuse_forward(s, m), 3.0, 1e-7);
  m.combiner_weights = {0, 1, 0};
  EXPECT_EQ(sqa::fuse_forward(s, m), 4.5);
  m.combiner_weights = {0.3f, -1.2f, 2.0f};
  m.combiner_bias = 0.7f;
  const double oracle = 0.3f * 3.0 + -1.2f * 4.5 + 2.0f * 1.5 + 0.7f;
  EXPECT_NEAR(sqa::fuse_forward(s, m), oracle, 1e-12);
  EXPECT_THROW(sqa::fuse_forward(std::vector<double>{1, 2}, m), sqa::DimensionError);
}

TEST(FuseForward, MonotoneUnderNonNegativeWeights) {
  std::mt19937_64 rng(6);
  std::uniform_real_distribution<double> u(0, 2);
  sqa::FusionModel m{{"a", "b", "c"}, {"", "", ""}, {0.2f, 0.0f, 1.1f}, -0.3f};
  for (int i = 0; i < 100; ++i) {
    std::vector<double> s = {u(rng), u(rng), u(rng)};
    const double base = sqa::fuse_forward(s, m);
    s[i % 3] += u(rng);
    EXPECT_GE(sqa::fuse_forward(s, m), base);
  }
}

sqa::MemberScores member_set(std::mt19937_64& rng, std::size_t n, std::vector<double> noise) {
  std::uniform_real_distribution<double> u(1, 5);
  sqa::MemberScores s;
  for (std::size_t i = 0; i < n; ++i) {
    const double y = u(rng);
    std::vector<double> row;
    for (double sd : noise) row.push_back(y + std::normal_distribution<double>(0, sd)(rng));
    s.scores.push_back(row);
    s.labels.push_back(y);
    s.system_ids.push_back("s" + std::to_string(i % 10));
  }
  return s;
}

double fused_l1(const sqa::FusionModel& m, const sqa::MemberScores& s) {
  double acc = 0;
  for (std::size_t i = 0; i < s.labels.size(); ++i) acc += std::abs(sqa::fuse_forward(s.scores[i], m) - s.labels[i]);
  return acc / s.labels.size();
}

TEST(Combiner, ExactMemberDominates) {
  std::mt19937_64 rng(7);
  const auto train = member_set(rng, 200, {0.0, 0.8});
  const auto val = member_set(rng, 100, {0.0, 0.8});
  sqa::TrainConfig cfg;
  cfg.learning_rate = 1e-3;
  const auto r = sqa::train_combiner({"exact", "noisy"}, train, val, cfg);
  EXPECT_LT(fused_l1(r.model, val), 0.05);
  EXPECT_GT(r.model.combiner_weights[0], r.model.combiner_weights[1]);
}

TEST(Combiner, SingleUnbiasedMemberStaysNearIdentity) {
  std::mt19937_64 rng(8);
  const auto train = member_set(rng, 200, {0.2});
  const auto val = member_set(rng, 100, {0.2});
  const auto r = sqa::train_combiner({"m"}, train, val, {});
  EXPECT_NEAR(r.model.combiner_weights[0], 1.0, 0.05);
  EXPECT_NEAR(r.model.combiner_bias, 0.0, 0.15);
}

TEST(Combiner, IdenticalMembersNoWorseThanOne) {
  std::mt19937_64 rng(9);
  auto train = member_set(rng, 100, {0.3, 0.3});
  auto val = member_set(rng, 50, {0.3, 0.3});
  for (auto* s : {&train, &val}) {
    for (auto& row : s->scores) row[1] = row[0];
  }
  const auto r = sqa::train_combiner({"a", "b"}, train, val, {});
  double single = 0;
  for (std::size_t i = 0; i < val.labels.size(); ++i) single += std::abs(val.scores[i][0] - val.labels[i]);
  EXPECT_LE(fused_l1(r.model, val), single / val.labels.size() + 1e-6);
}

TEST(Combiner, InitialisesUniformAndValidates) {
  std::mt19937_64 rng(10);
  const auto set = member_set(rng, 20, {0.1, 0.1, 0.1});
  sqa::TrainConfig cfg;
  cfg.max_epochs = 1;
  cfg.learning_rate = 1e-12;
  const auto r = sqa::train_combiner({"a", "b", "c"}, set, set, cfg);
  for (float w : r.model.combiner_weights) EXPECT_FLOAT_EQ(w, 1.0f / 3);
  EXPECT_THROW(sqa::train_combiner({}, set, set, cfg), sqa::InvalidArgument);
  EXPECT_THROW(sqa::train_combiner({"a", "b"}, set, set, cfg), sqa::DimensionError);
}

}  // namespace
