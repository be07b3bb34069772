#include <gtest/gtest.h>

#include <random>
#include <sstream>

#include "clearance/score_model.hpp"
#include "oracles.hpp"

namespace clearance {
namespace {

TEST(EcdfEval, TieIncludedByLessOrEqual) {
  const Ecdf e({0.3, 0.7});
  EXPECT_EQ(ecdf_eval(e, 0.3), 0.5);
  EXPECT_EQ(ecdf_eval(e, 0.75), 1.0);
  EXPECT_EQ(ecdf_eval(Ecdf({0.1, 0.2, 0.3, 0.4}), 0.25), 0.5);
  EXPECT_EQ(ecdf_eval(e, 1.0), 1.0);
  EXPECT_EQ(ecdf_eval(e, 0.0), 0.0);
}

TEST(TailEval, CountsValuesAtOrAbove) {
  EXPECT_EQ(tail_eval(Ecdf({0.6, 0.7, 0.8, 0.9}), 0.8), 0.5);
  EXPECT_EQ(tail_eval(Ecdf({0.6, 0.7, 0.8, 0.9}), 0.0), 1.0);
  EXPECT_EQ(tail_eval(Ecdf({0.5}), 0.5), 1.0);
}

TEST(EcdfProperty, AgreesWithBruteForceCounting) {
  std::mt19937_64 rng(7);
  for (int trial = 0; trial < 200; ++trial) {
    const std::size_t n = 1 + rng() % 1000;
    auto v = oracle::uniform_sample(rng, n);
    // Inject ties.
    for (std::size_t i = 0; i + 1 < v.size(); i += 7) v[i + 1] = v[i];
    const Ecdf e(v);
    for (int k = 0; k < 20; ++k) {
      const double x = (k % 2 == 0) ? v[rng() % v.size()] : std::uniform_real_distribution<>(0, 1)(rng);
      ASSERT_EQ(ecdf_eval(e, x), oracle::frac_le(v, x));
      ASSERT_EQ(tail_eval(e, x), oracle::frac_ge(v, x));
      std::size_t eq = 0;
      for (double s : v) eq += s == x;
      const double at = static_cast<double>(eq) / static_cast<double>(v.size());
      ASSERT_NEAR(tail_eval(e, x) + ecdf_eval(e, x) - at, 1.0, 1e-12);
    }
  }
}

TEST(ThresholdH, Examples) {
  const ScorePartition p({0.6, 0.7, 0.8, 0.9}, {0.1});
  EXPECT_EQ(threshold_h(p, 0.5), 0.8);
  EXPECT_EQ(threshold_h(p, 1.0), 0.6);
  EXPECT_EQ(threshold_h(p, 0.0), 0.9);
}

TEST(ThresholdL, Examples) {
  const ScorePartition p({0.9}, {0.1, 0.2, 0.3, 0.4});
  EXPECT_EQ(threshold_l(p, 0.5), 0.2);
  EXPECT_EQ(threshold_l(p, 0.0), 0.0);
  EXPECT_EQ(threshold_l(p, 1.0), 0.4);
}

TEST(Thresholds, EmptyPopulationsAreErrors) {
  const ScorePartition no_pos({}, {0.2});
  const ScorePartition no_neg({0.2}, {});
  EXPECT_THROW(
      {
        try {
          threshold_h(no_pos, 0.5);
        } catch (const Error& e) {
          EXPECT_STREQ(e.what(), "no recalled samples");
          throw;
        }
      },
      Error);
  EXPECT_THROW(
      {
        try {
          threshold_l(no_neg, 0.5);
        } catch (const Error& e) {
          EXPECT_STREQ(e.what(), "no unrecalled samples");
          throw;
        }
      },
      Error);
}

TEST(ThresholdProperty, MatchesExhaustiveScanAndIsMonotone) {
  std::mt19937_64 rng(11);
  for (int trial = 0; trial < 100; ++trial) {
    auto pos = oracle::uniform_sample(rng, 1 + rng() % 200);
    auto neg = oracle::uniform_sample(rng, 1 + rng() % 200);
    for (std::size_t i = 0; i + 1 < pos.size(); i += 5) pos[i + 1] = pos[i];
    const ScorePartition p(pos, neg);
    double prev_h = 2.0, prev_l = -1.0;
    for (int k = 0; k <= 50; ++k) {
      const double xi = k / 50.0;
      const double h = threshold_h(p, xi);
      const double l = threshold_l(p, xi);
      ASSERT_EQ(h, oracle::scan_threshold_h(pos, xi)) << xi;
      ASSERT_EQ(l, oracle::scan_threshold_l(neg, xi)) << xi;
      ASSERT_GE(tail_eval(p.positives(), h), xi);
      ASSERT_GE(ecdf_eval(p.negatives(), l), xi);
      ASSERT_LE(h, prev_h);
      ASSERT_GE(l, prev_l);
      prev_h = h;
      prev_l = l;
    }
  }
}

TEST(ScorePartition, PrevalenceIsExactRatio) {
  const ScorePartition p({0.5, 0.6, 0.7}, {0.1, 0.2, 0.3, 0.4, 0.45, 0.46, 0.47});
  EXPECT_EQ(p.prevalence(), 3.0 / 10.0);
  EXPECT_EQ(p.n_pos(), 3u);
  EXPECT_EQ(p.n_neg(), 7u);
  // Sorted regardless of input order.
  const ScorePartition q({0.9, 0.1}, {0.5, 0.2});
  EXPECT_EQ(q.positives().values()[0], 0.1);
  EXPECT_EQ(q.negatives().values()[0], 0.2);
}

TEST(ScoreCsv, ReadsAndRoundTrips) {
  std::istringstream in("device_id,score,label\nK1,0.25,1\nK2,0.125,0\n");
  const auto d = read_scores_csv(in);
  ASSERT_EQ(d.size(), 2u);
  EXPECT_EQ(d[0].device_id, "K1");
  EXPECT_EQ(d[0].score, 0.25);
  EXPECT_EQ(d[0].label, 1);
  EXPECT_EQ(d[1].historical, HistoricalAction::Accept);

  std::ostringstream out;
  write_scores_csv(out, d, true);
  std::istringstream back(out.str());
  const auto d2 = read_scores_csv(back);
  ASSERT_EQ(d2.size(), 2u);
  EXPECT_EQ(d2[1].score, 0.125);
}

TEST(ScoreCsv, RejectsBoundaryScoresWithLineNumbers) {
  for (const char* bad : {"device_id,score,label\nK1,0.5,1\nK2,1,0\n",
                          "device_id,score,label\nK1,0.5,1\nK2,0,0\n",
                          "device_id,score,label\nK1,0.5,1\nK2,abc,0\n",
                          "device_id,score,label\nK1,0.5,1\nK2,0.5,2\n",
                          "device_id,score,label\nK1,0.5,1\nK2,0.5\n"}) {
    std::istringstream in(bad);
    try {
      read_scores_csv(in);
      FAIL() << "accepted: " << bad;
    } catch (const Error& e) {
      EXPECT_NE(std::string(e.what()).find("line 3"), std::string::npos) << e.what();
    }
  }
}

TEST(ScoreCsv, RejectsWrongHeader) {
  std::istringstream in("id,score,label\nK1,0.5,1\n");
  EXPECT_THROW(read_scores_csv(in), Error);
}

TEST(ScoreCsv, ReadsHistoryColumns) {
  std::istringstream in(
      "device_id,score,label,fda_rejected,historical_action\nA,0.9,1,1,reject\nB,0.1,0,0,accept\n");
  const auto d = read_scores_csv(in);
  EXPECT_TRUE(d[0].fda_rejected);
  EXPECT_EQ(d[0].historical, HistoricalAction::Reject);
  EXPECT_EQ(d[1].historical, HistoricalAction::Accept);
}

}  // namespace
}  // namespace clearance
