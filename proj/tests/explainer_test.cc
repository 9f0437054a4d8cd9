#include "gcal/explainer.h"

#include <gtest/gtest.h>

#include <algorithm>
#include <fstream>
#include <numeric>

#include "gcal/error.h"
#include "gcal/random.h"
#include "gcal/synthetic.h"
#include "support/fixtures.h"

namespace gcal {
namespace {

using testing::TempDir;

ForwardTrace TraceWith(const std::string& id, std::vector<double> weights) {
  ForwardTrace t;
  t.news_id = id;
  t.sentence_weights = std::move(weights);
  return t;
}

SentenceRanking RankingOf(const std::string& id, const std::vector<int>& indices) {
  SentenceRanking r;
  r.news_id = id;
  for (int i : indices) r.sentences.push_back({i, 0.0});
  return r;
}

// Plain-loop restatement of the greedy nearest-unused matching.
double ApOracle(const std::vector<int>& predicted, const std::vector<int>& truth, int n) {
  if (truth.empty()) return 0.0;
  std::vector<bool> used(truth.size(), false);
  double sum = 0.0;
  int hits = 0;
  for (std::size_t r = 0; r < predicted.size(); ++r) {
    int best = -1;
    for (std::size_t g = 0; g < truth.size(); ++g) {
      if (used[g] || std::abs(truth[g] - predicted[r]) > n) continue;
      if (best < 0) {
        best = static_cast<int>(g);
        continue;
      }
      const int d = std::abs(truth[g] - predicted[r]);
      const int bd = std::abs(truth[best] - predicted[r]);
      if (d < bd || (d == bd && truth[g] < truth[best])) best = static_cast<int>(g);
    }
    if (best >= 0) {
      used[best] = true;
      ++hits;
      sum += static_cast<double>(hits) / static_cast<double>(r + 1);
    }
  }
  return sum / static_cast<double>(truth.size());
}

TEST(RankTest, DescendingWeights) {
  const SentenceRanking r = RankSentences(TraceWith("a", {0.7, 0.2, 0.1}), 2);
  EXPECT_EQ(r.indices(), (std::vector<int>{0, 1}));
  EXPECT_EQ(r.sentences[0].weight, 0.7);
  EXPECT_EQ(r.news_id, "a");
}

TEST(RankTest, TiesBreakByIndex) {
  EXPECT_EQ(RankSentences(TraceWith("a", {0.25, 0.25, 0.25, 0.25}), 2).indices(),
            (std::vector<int>{0, 1}));
  EXPECT_EQ(RankSentences(TraceWith("a", {0.1, 0.45, 0.45}), 3).indices(),
            (std::vector<int>{1, 2, 0}));
}

TEST(RankTest, OversizedKReturnsAll) {
  EXPECT_EQ(RankSentences(TraceWith("a", {0.2, 0.5, 0.3}), 10).indices(),
            (std::vector<int>{1, 2, 0}));
}

TEST(RankTest, RejectsNonPositiveK) {
  EXPECT_THROW(RankSentences(TraceWith("a", {1.0}), 0), Error);
}

TEST(RankTest, RandomRankingsAreSortedPermutations) {
  std::mt19937_64 rng(3);
  for (int trial = 0; trial < 200; ++trial) {
    std::vector<double> w(1 + rng() % 20);
    for (double& x : w) x = static_cast<double>(rng() % 5);
    const int k = 1 + static_cast<int>(rng() % 25);
    const SentenceRanking r = RankSentences(TraceWith("x", w), k);
    ASSERT_EQ(r.sentences.size(), std::min<std::size_t>(k, w.size()));
    for (std::size_t i = 1; i < r.sentences.size(); ++i) {
      const auto& a = r.sentences[i - 1];
      const auto& b = r.sentences[i];
      EXPECT_TRUE(a.weight > b.weight || (a.weight == b.weight && a.index < b.index));
    }
    for (const auto& s : r.sentences) EXPECT_EQ(s.weight, w[s.index]);
  }
}

TEST(TopIndicesTest, HighestScoresFirst) {
  EXPECT_EQ(TopIndices({0.1, 0.9, 0.5, 0.9}, 3), (std::vector<int>{1, 3, 2}));
}

TEST(MapTest, PerfectPrediction) {
  OracleScores o;
  o.scores["a"] = {0.9, 0.8, 0.1, 0.0};
  EXPECT_EQ(MapAtK({RankingOf("a", {0, 1})}, o, 2, 0), 1.0);
}

TEST(MapTest, DisjointPrediction) {
  OracleScores o;
  o.scores["a"] = {0.0, 0.0, 0.9, 0.8, 0.0, 0.0};
  EXPECT_EQ(MapAtK({RankingOf("a", {0, 5})}, o, 2, 0), 0.0);
}

TEST(MapTest, NeighborToleranceExample) {
  // Prediction [2, 7] against ground truth {3, 9} with n = 1: rank 1 hits 3,
  // rank 2 misses, so AP = (1/1) / 2.
  std::vector<double> scores(10, 0.0);
  scores[3] = 0.9;
  scores[9] = 0.8;
  OracleScores o;
  o.scores["a"] = scores;
  EXPECT_DOUBLE_EQ(MapAtK({RankingOf("a", {2, 7})}, o, 2, 1), 0.5);
  EXPECT_DOUBLE_EQ(AveragePrecision({2, 7}, {3, 9}, 1), 0.5);
  EXPECT_DOUBLE_EQ(AveragePrecision({2, 7}, {3, 9}, 0), 0.0);
  EXPECT_DOUBLE_EQ(AveragePrecision({2, 7}, {3, 9}, 2), 1.0);
}

TEST(MapTest, GroundTruthIndexIsConsumedOnce) {
  EXPECT_DOUBLE_EQ(AveragePrecision({4, 5}, {5}, 1), 1.0);
  EXPECT_DOUBLE_EQ(AveragePrecision({4, 6}, {5, 9}, 1), 0.5);
}

TEST(MapTest, MeanOverNews) {
  OracleScores o;
  o.scores["a"] = {0.9, 0.1};
  o.scores["b"] = {0.9, 0.1};
  EXPECT_DOUBLE_EQ(MapAtK({RankingOf("a", {0}), RankingOf("b", {1})}, o, 1, 0), 0.5);
}

TEST(MapTest, MissingOracleEntry) {
  OracleScores o;
  o.scores["a"] = {0.9};
  try {
    MapAtK({RankingOf("b", {0})}, o, 1, 0);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kOracleMissing);
  }
}

TEST(MapTest, ToleranceOutOfRange) {
  OracleScores o;
  o.scores["a"] = {0.9};
  EXPECT_THROW(MapAtK({RankingOf("a", {0})}, o, 1, 5), Error);
  EXPECT_THROW(MapAtK({RankingOf("a", {0})}, o, 1, -1), Error);
  EXPECT_THROW(MapAtK({RankingOf("a", {0})}, o, 0, 0), Error);
}

TEST(MapTest, MatchesOracleAndIsMonotoneInTolerance) {
  std::mt19937_64 rng(11);
  for (int trial = 0; trial < 500; ++trial) {
    const int sentences = 1 + static_cast<int>(rng() % 15);
    const int k = 1 + static_cast<int>(rng() % 8);
    std::vector<double> weights(sentences), scores(sentences);
    for (double& w : weights) w = UniformUnit(rng);
    for (double& s : scores) s = UniformUnit(rng);
    OracleScores o;
    o.scores["x"] = scores;
    const SentenceRanking ranking = RankSentences(TraceWith("x", weights), k);
    double previous = -1.0;
    for (int n = 0; n <= 4; ++n) {
      const double value = MapAtK({ranking}, o, k, n);
      const std::vector<int> predicted = ranking.indices();
      EXPECT_NEAR(value, ApOracle(predicted, TopIndices(scores, k), n), 1e-15);
      EXPECT_GE(value, previous);
      EXPECT_GE(value, 0.0);
      EXPECT_LE(value, 1.0);
      previous = value;
    }
  }
}

class SyntheticOracleTest : public ::testing::Test {
 protected:
  void SetUp() override {
    SyntheticConfig c = ExplainabilitySyntheticConfig();
    c.news = 20;
    dataset_ = SyntheticDataset(c);
    for (const std::string& m : SyntheticMarkers()) {
      if (dataset_.vocabulary.contains(m)) markers_.insert(dataset_.vocabulary.id(m));
    }
  }

  Dataset dataset_;
  std::set<TokenId> markers_;
};

TEST_F(SyntheticOracleTest, MarkedSentencesScoreHigh) {
  ASSERT_FALSE(markers_.empty());
  const OracleScores o = SyntheticOracle(dataset_, 1, markers_);
  int marked = 0;
  for (const NewsItem& news : dataset_.news) {
    const auto& scores = o.scores.at(news.id);
    ASSERT_EQ(scores.size(), news.sentences.size());
    for (std::size_t i = 0; i < scores.size(); ++i) {
      const bool has_marker = std::any_of(news.sentences[i].begin(), news.sentences[i].end(),
                                          [&](TokenId t) { return markers_.count(t) > 0; });
      marked += has_marker;
      if (has_marker) {
        EXPECT_GE(scores[i], 0.9);
        EXPECT_LT(scores[i], 1.0);
      } else {
        EXPECT_GE(scores[i], 0.0);
        EXPECT_LT(scores[i], 0.1);
      }
    }
  }
  EXPECT_GT(marked, 0);
}

TEST_F(SyntheticOracleTest, SeededAndReproducible) {
  EXPECT_EQ(SyntheticOracle(dataset_, 4, markers_), SyntheticOracle(dataset_, 4, markers_));
  EXPECT_EQ(SyntheticOracle(dataset_, 4), SyntheticOracle(dataset_, 4));
  EXPECT_NE(SyntheticOracle(dataset_, 4), SyntheticOracle(dataset_, 5));
}

TEST_F(SyntheticOracleTest, FileRoundTrip) {
  TempDir dir("oracle");
  const OracleScores o = SyntheticOracle(dataset_, 2, markers_);
  WriteOracleScores(dir / "oracle.jsonl", o);
  EXPECT_EQ(ReadOracleScores(dir / "oracle.jsonl"), o);
}

TEST(OracleFileTest, MalformedLineNamesLine) {
  TempDir dir("oracle");
  {
    std::ofstream out(dir / "bad.jsonl");
    out << "{\"news_id\": \"a\", \"scores\": [0.5]}\n{\"news_id\": 3}\n";
  }
  try {
    ReadOracleScores(dir / "bad.jsonl");
    FAIL();
  } catch (const Error& e) {
    EXPECT_NE(std::string(e.what()).find(":2"), std::string::npos) << e.what();
  }
}

TEST_F(SyntheticOracleTest, ExplainReport) {
  std::vector<ForwardTrace> traces;
  for (const NewsItem& news : dataset_.news) {
    std::vector<double> w(news.sentences.size());
    std::iota(w.rbegin(), w.rend(), 1.0);  // first sentence heaviest
    traces.push_back(TraceWith(news.id, w));
  }
  const OracleScores o = SyntheticOracle(dataset_, 1, markers_);
  const ExplainResult r = Explain(traces, dataset_, o);
  EXPECT_EQ(r.map.size(), 10u);
  EXPECT_EQ(r.report.get("news"), std::to_string(dataset_.news.size()));
  EXPECT_TRUE(r.report.contains("map.k5.n0"));
  EXPECT_TRUE(r.report.contains("map.k10.n4"));
  const std::string id = dataset_.news.front().id;
  EXPECT_EQ(r.report.get("news." + id + ".rank1.index"), "0");
  EXPECT_EQ(r.report.get("news." + id + ".rank1.text"), dataset_.news.front().raw_sentences[0]);
  for (int k : {5, 10}) {
    for (int n = 1; n <= 4; ++n) EXPECT_GE(r.map.at({k, n}), r.map.at({k, n - 1}));
  }
  OracleScores partial = o;
  partial.scores.erase(id);
  EXPECT_THROW(Explain(traces, dataset_, partial), Error);
}

}  // namespace
}  // namespace gcal
