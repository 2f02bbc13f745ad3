#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "oracles.hpp"
#include "sqa/error.hpp"
#include "sqa/metrics.hpp"

namespace {

using sqa::testing::oracle_ktau;
using sqa::testing::oracle_pearson;
using sqa::testing::oracle_srcc;

std::vector<double> random_vector(std::mt19937_64& rng, std::size_t n, bool ties) {
  std::uniform_real_distribution<double> u(1.0, 5.0);
  std::uniform_int_distribution<int> coarse(1, 6);
  std::vector<double> v(n);
  for (auto& x : v) x = ties ? coarse(rng) * 0.5 : u(rng);
  return v;
}

TEST(Mse, Basics) {
  const std::vector<double> a = {1, 2, 3};
  EXPECT_EQ(sqa::mse(a, a), 0.0);
  const std::vector<double> b = {1.5, 2.5, 3.5};
  EXPECT_EQ(sqa::mse(b, a), 0.25);
  EXPECT_THROW(sqa::mse(std::vector<double>{}, std::vector<double>{}), sqa::InvalidArgument);
  EXPECT_THROW(sqa::mse(a, std::vector<double>{1, 2}), sqa::DimensionError);
}

TEST(Mse, MatchesSummationOracle) {
  std::mt19937_64 rng(1);
  const auto p = random_vector(rng, 50, false);
  const auto l = random_vector(rng, 50, false);
  long double s = 0;
  for (std::size_t i = 0; i < 50; ++i) s += (p[i] - l[i]) * (p[i] - l[i]);
  const double oracle = static_cast<double>(s / 50);
  EXPECT_NEAR(sqa::mse(p, l), oracle, 1e-9 * oracle);
}

TEST(Lcc, AffineAndSign) {
  const std::vector<double> l = {1.0, 2.5, 3.0, 4.5, 2.0};
  std::vector<double> p, q;
  for (double x : l) {
    p.push_back(2 * x + 1);
    q.push_back(-x);
  }
  EXPECT_NEAR(sqa::lcc(p, l), 1.0, 1e-15);
  EXPECT_NEAR(sqa::lcc(q, l), -1.0, 1e-15);
}

TEST(Lcc, FixedPairsMatchDirectCovariance) {
  const std::vector<double> p = {3.1, 2.2, 4.8, 1.9, 3.3};
  const std::vector<double> l = {3.0, 2.5, 4.1, 2.2, 2.9};
  // Direct covariance: means 3.06 and 2.94.
  double sxy = 0, sxx = 0, syy = 0;
  for (int i = 0; i < 5; ++i) {
    sxy += (p[i] - 3.06) * (l[i] - 2.94);
    sxx += (p[i] - 3.06) * (p[i] - 3.06);
    syy += (l[i] - 2.94) * (l[i] - 2.94);
  }
  EXPECT_NEAR(sqa::lcc(p, l), sxy / std::sqrt(sxx * syy), 1e-12);
}

TEST(Degenerate, ConstantInputsGiveNan) {
  const std::vector<double> c = {3, 3, 3};
  const std::vector<double> v = {1, 2, 3};
  EXPECT_TRUE(std::isnan(sqa::lcc(c, v)));
  EXPECT_TRUE(std::isnan(sqa::srcc(v, c)));
  EXPECT_TRUE(std::isnan(sqa::ktau(c, v)));
  EXPECT_TRUE(std::isnan(sqa::srcc(std::vector<double>{1}, std::vector<double>{2})));
}

TEST(Ranks, AverageTies) {
  const auto r = sqa::average_ranks(std::vector<double>{10, 20, 20, 5});
  EXPECT_EQ(r, (std::vector<double>{2, 3.5, 3.5, 1}));
}

TEST(Srcc, MonotoneAndReversed) {
  const std::vector<double> l = {1.2, 3.3, 2.1, 4.9, 4.0};
  std::vector<double> mono, rev;
  for (double x : l) {
    mono.push_back(std::exp(x));
    rev.push_back(-x * x * x);
  }
  EXPECT_NEAR(sqa::srcc(mono, l), 1.0, 1e-15);
  EXPECT_NEAR(sqa::srcc(rev, l), -1.0, 1e-15);
}

TEST(Srcc, TiedExampleMatchesRankOracle) {
  const std::vector<double> p = {1, 2, 2, 4};
  const std::vector<double> l = {1, 3, 2, 4};
  // ranks p: 1, 2.5, 2.5, 4; ranks l: 1, 3, 2, 4
  const double expected = oracle_pearson({1, 2.5, 2.5, 4}, {1, 3, 2, 4});
  EXPECT_NEAR(expected, 0.9486832980505138, 1e-15);
  EXPECT_NEAR(sqa::srcc(p, l), expected, 1e-15);
  EXPECT_NEAR(oracle_srcc(p, l), expected, 1e-15);
}

TEST(Ktau, IdentityAndOneSwap) {
  const std::vector<double> a = {1, 2, 3, 4};
  EXPECT_EQ(sqa::ktau(a, a), 1.0);
  const std::vector<double> b = {1, 3, 2, 4};
  EXPECT_NEAR(sqa::ktau(b, a), 2.0 / 3.0, 1e-15);
  EXPECT_NEAR(oracle_ktau(b, a), 2.0 / 3.0, 1e-15);
}

TEST(RankMetrics, MatchPairwiseOraclesOnRandomVectors) {
  std::mt19937_64 rng(42);
  std::uniform_int_distribution<std::size_t> len(2, 200);
  for (int trial = 0; trial < 200; ++trial) {
    const std::size_t n = len(rng);
    const bool ties = trial % 2 == 0;
    const auto p = random_vector(rng, n, ties);
    const auto l = random_vector(rng, n, !ties || trial % 4 == 0);
    const double s = sqa::srcc(p, l);
    const double k = sqa::ktau(p, l);
    const double so = oracle_srcc(p, l);
    const double ko = oracle_ktau(p, l);
    if (std::isnan(so)) {
      EXPECT_TRUE(std::isnan(s));
    } else {
      EXPECT_NEAR(s, so, 1e-12);
    }
    if (std::isnan(ko)) {
      EXPECT_TRUE(std::isnan(k));
    } else {
      EXPECT_NEAR(k, ko, 1e-12);
    }
  }
}

TEST(RankMetrics, InvariantUnderIncreasingTransforms) {
  std::mt19937_64 rng(7);
  for (int trial = 0; trial < 50; ++trial) {
    const auto p = random_vector(rng, 40, trial % 2 == 0);
    const auto l = random_vector(rng, 40, false);
    std::vector<double> tp;
    for (double x : p) tp.push_back(std::log(x) * 3 + std::pow(x, 3));
    EXPECT_NEAR(sqa::srcc(tp, l), sqa::srcc(p, l), 1e-12);
    EXPECT_NEAR(sqa::ktau(tp, l), sqa::ktau(p, l), 1e-12);
    EXPECT_NEAR(sqa::srcc(l, p), sqa::srcc(p, l), 1e-12);
    EXPECT_NEAR(sqa::ktau(l, p), sqa::ktau(p, l), 1e-12);
    EXPECT_EQ(sqa::mse(l, p), sqa::mse(p, l));
  }
}

TEST(Lcc, AffineInvarianceProperty) {
  std::mt19937_64 rng(8);
  std::uniform_real_distribution<double> a(0.1, 10.0);
  for (int trial = 0; trial < 50; ++trial) {
    const auto p = random_vector(rng, 30, false);
    const auto l = random_vector(rng, 30, false);
    const double scale = a(rng), shift = a(rng) - 5;
    std::vector<double> tp, np;
    for (double x : p) {
      tp.push_back(scale * x + shift);
      np.push_back(-scale * x + shift);
    }
    EXPECT_NEAR(sqa::lcc(tp, l), sqa::lcc(p, l), 1e-12);
    EXPECT_NEAR(sqa::lcc(np, l), -sqa::lcc(p, l), 1e-12);
    EXPECT_NEAR(sqa::lcc(l, p), sqa::lcc(p, l), 1e-12);
    EXPECT_NEAR(sqa::lcc(p, l), oracle_pearson(p, l), 1e-12);
  }
}

TEST(SystemAggregate, Basics) {
  const std::vector<double> p = {1, 2, 3, 10};
  const std::vector<double> l = {2, 2, 2, 4};
  const std::vector<std::string> one = {"x", "x", "x", "x"};
  const auto a = sqa::system_aggregate(p, l, one);
  ASSERT_EQ(a.system_ids.size(), 1u);
  EXPECT_EQ(a.mean_pred[0], 4.0);
  EXPECT_EQ(a.mean_label[0], 2.5);

  const std::vector<std::string> two = {"b", "a", "b", "a"};
  const std::vector<double> cp = {1, 7, 1, 7};
  const auto b = sqa::system_aggregate(cp, cp, two);
  EXPECT_EQ(b.system_ids, (std::vector<std::string>{"a", "b"}));
  EXPECT_EQ(b.mean_pred, (std::vector<double>{7, 1}));
}

TEST(SystemAggregate, MatchesBruteForceGroupMeans) {
  std::mt19937_64 rng(3);
  std::uniform_int_distribution<int> sys(0, 6);
  const auto p = random_vector(rng, 120, false);
  const auto l = random_vector(rng, 120, false);
  std::vector<std::string> ids;
  for (int i = 0; i < 120; ++i) ids.push_back("s" + std::to_string(sys(rng)));
  const auto a = sqa::system_aggregate(p, l, ids);
  for (std::size_t s = 0; s < a.system_ids.size(); ++s) {
    double sp = 0, sl = 0, n = 0;
    for (std::size_t i = 0; i < ids.size(); ++i) {
      if (ids[i] != a.system_ids[s]) continue;
      sp += p[i];
      sl += l[i];
      n += 1;
    }
    EXPECT_NEAR(a.mean_pred[s], sp / n, 1e-12);
    EXPECT_NEAR(a.mean_label[s], sl / n, 1e-12);
  }
}

TEST(FullReport, PerfectPredictions) {
  const std::vector<double> l = {1.5, 2.0, 3.5, 4.0, 4.5, 2.5};
  const std::vector<std::string> ids = {"a", "a", "b", "b", "c", "c"};
  const auto r = sqa::full_report(l, l, ids);
  EXPECT_EQ(r.utterance.mse, 0.0);
  EXPECT_EQ(r.system.mse, 0.0);
  for (double c : {r.utterance.lcc, r.utterance.srcc, r.utterance.ktau, r.system.lcc, r.system.srcc,
                   r.system.ktau}) {
    EXPECT_NEAR(c, 1.0, 1e-15);
  }
  EXPECT_EQ(r.n_utterances, 6u);
  EXPECT_EQ(r.n_systems, 3u);
}

TEST(FullReport, WithinSystemScrambleKeepsSystemBlock) {
  const std::vector<double> l = {1.0, 2.0, 3.0, 3.5, 4.0, 5.0};
  const std::vector<double> p = {1.1, 1.9, 3.2, 3.3, 4.1, 4.8};
  const std::vector<double> scrambled = {1.9, 1.1, 3.3, 3.2, 4.8, 4.1};
  const std::vector<std::string> ids = {"a", "a", "b", "b", "c", "c"};
  const auto r1 = sqa::full_report(p, l, ids);
  const auto r2 = sqa::full_report(scrambled, l, ids);
  EXPECT_EQ(r1.system.mse, r2.system.mse);
  EXPECT_EQ(r1.system.srcc, r2.system.srcc);
  EXPECT_EQ(r1.system.ktau, r2.system.ktau);
  EXPECT_NEAR(r1.system.lcc, r2.system.lcc, 1e-15);
  EXPECT_LT(r2.utterance.srcc, r1.utterance.srcc);
}

TEST(ReportCsv, RoundTripIsExact) {
  std::mt19937_64 rng(12);
  const auto p = random_vector(rng, 60, false);
  const auto l = random_vector(rng, 60, false);
  std::vector<std::string> ids;
  for (int i = 0; i < 60; ++i) ids.push_back("s" + std::to_string(i % 5));
  const auto r = sqa::full_report(p, l, ids);
  const auto text = sqa::report_to_csv(r);
  EXPECT_EQ(text.substr(0, text.find('\n')), sqa::kReportCsvHeader);
  const auto back = sqa::report_from_csv(text);
  EXPECT_EQ(back.utterance.mse, r.utterance.mse);
  EXPECT_EQ(back.utterance.ktau, r.utterance.ktau);
  EXPECT_EQ(back.system.srcc, r.system.srcc);
  EXPECT_EQ(back.system.lcc, r.system.lcc);
}

TEST(ReportCsv, DegenerateValuesSurvive) {
  const std::vector<double> l = {1, 2, 3};
  const std::vector<std::string> ids = {"a", "a", "a"};
  const auto r = sqa::full_report(l, l, ids);
  EXPECT_TRUE(std::isnan(r.system.srcc));
  const auto text = sqa::report_to_csv(r);
  EXPECT_NE(text.find("nan"), std::string::npos);
  EXPECT_TRUE(std::isnan(sqa::report_from_csv(text).system.lcc));
  EXPECT_NE(sqa::report_to_table(r).find("n/a"), std::string::npos);
}

}  // namespace
