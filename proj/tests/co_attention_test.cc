#include "gcal/co_attention.h"

#include <gtest/gtest.h>

#include <cmath>

#include "gcal/error.h"
#include "gcal/gradcheck.h"
#include "support/fixtures.h"
#include "support/oracle.h"

namespace gcal {
namespace {

using oracle::FromDense;
using oracle::RandomMatrix;
using testing::MaxAbsDiff;
using testing::Randomize;
using testing::Row;

struct HeadFixture {
  ParameterSet set;
  CoAttentionParams head;

  HeadFixture(int d, int d_graph, int k_a, std::uint64_t seed) {
    CoAttentionConfig c;
    c.d = d;
    c.d_graph = d_graph;
    c.attention_width = k_a;
    head = CoAttentionParams::Create(set, c);
    Randomize(set, seed);
  }
};

DenseMatrix RowOf(std::initializer_list<double> values) {
  DenseMatrix m(1, static_cast<Eigen::Index>(values.size()));
  Eigen::Index j = 0;
  for (double v : values) m(0, j++) = v;
  return m;
}

TEST(UserCommentConcatTest, SingleRow) {
  std::mt19937_64 rng(1);
  Tape tape;
  const Var c = UserCommentConcat(
      tape, tape.constant(RandomMatrix(rng, 1, 3)), tape.constant(RandomMatrix(rng, 1, 3)),
      tape.constant(RandomMatrix(rng, 6, 4)), tape.constant(RandomMatrix(rng, 1, 4)));
  EXPECT_EQ(c.rows(), 1);
  EXPECT_EQ(c.cols(), 4);
}

TEST(UserCommentConcatTest, ZeroInputsAndBiasGiveZero) {
  std::mt19937_64 rng(2);
  Tape tape;
  const Var c = UserCommentConcat(
      tape, tape.constant(DenseMatrix::Zero(3, 3)), tape.constant(DenseMatrix::Zero(3, 3)),
      tape.constant(RandomMatrix(rng, 6, 4)), tape.constant(DenseMatrix::Zero(1, 4)));
  EXPECT_EQ(c.value(), DenseMatrix::Zero(3, 4));
}

TEST(UserCommentConcatTest, MatchesConcatThenMultiply) {
  for (std::uint64_t seed = 1; seed <= 100; ++seed) {
    std::mt19937_64 rng(seed);
    const DenseMatrix u = RandomMatrix(rng, 3, 2), c = RandomMatrix(rng, 3, 2);
    const DenseMatrix p = RandomMatrix(rng, 4, 5), b = RandomMatrix(rng, 1, 5);
    Tape tape;
    const Var out = UserCommentConcat(tape, tape.constant(u), tape.constant(c), tape.constant(p),
                                      tape.constant(b));
    const oracle::Mat expected =
        oracle::ConcatProject(FromDense(u), FromDense(c), FromDense(p), FromDense(b));
    EXPECT_LT(oracle::MaxAbsDiff(expected, out.value()), 1e-12);
  }
}

TEST(UserCommentConcatTest, RowCountMismatchIsRejected) {
  Tape tape;
  EXPECT_THROW(UserCommentConcat(tape, tape.constant(DenseMatrix::Zero(2, 2)),
                                 tape.constant(DenseMatrix::Zero(3, 2)),
                                 tape.constant(DenseMatrix::Zero(4, 2)),
                                 tape.constant(DenseMatrix::Zero(1, 2))),
               Error);
}

TEST(ConformityTest, ZeroMapGivesZero) {
  std::mt19937_64 rng(3);
  Tape tape;
  const Var f =
      Conformity(tape, tape.constant(RandomMatrix(rng, 2, 3)),
                 tape.constant(RandomMatrix(rng, 4, 3)), tape.constant(DenseMatrix::Zero(3, 3)));
  EXPECT_EQ(f.value(), DenseMatrix::Zero(2, 4));
}

TEST(ConformityTest, ScalarCase) {
  Tape tape;
  const Var f = Conformity(tape, tape.constant(RowOf({2.0})), tape.constant(RowOf({0.5})),
                           tape.constant(RowOf({0.5})));
  EXPECT_NEAR(f.scalar(), 0.4621, 1e-4);
  EXPECT_DOUBLE_EQ(f.scalar(), std::tanh(0.5));
}

TEST(ConformityTest, MatchesTripleProduct) {
  for (std::uint64_t seed = 1; seed <= 100; ++seed) {
    std::mt19937_64 rng(seed);
    const DenseMatrix c = RandomMatrix(rng, 2, 4), s = RandomMatrix(rng, 3, 4);
    const DenseMatrix w = RandomMatrix(rng, 4, 4);
    Tape tape;
    const Var f = Conformity(tape, tape.constant(c), tape.constant(s), tape.constant(w));
    EXPECT_LT(
        oracle::MaxAbsDiff(oracle::Conformity(FromDense(c), FromDense(w), FromDense(s)), f.value()),
        1e-12);
    EXPECT_LT(f.value().cwiseAbs().maxCoeff(), 1.0);
  }
}

TEST(AttentionMapsTest, ZeroConformityDecouples) {
  std::mt19937_64 rng(4);
  const DenseMatrix s = RandomMatrix(rng, 3, 4), c = RandomMatrix(rng, 2, 4);
  const DenseMatrix ws = RandomMatrix(rng, 5, 4), wc = RandomMatrix(rng, 5, 4);
  Tape tape;
  const AttentionMaps m = ComputeAttentionMaps(tape, tape.constant(s), tape.constant(c),
                                               tape.constant(DenseMatrix::Zero(2, 3)),
                                               tape.constant(ws), tape.constant(wc));
  EXPECT_LT(
      (m.sentence.value() - DenseMatrix((ws * s.transpose()).array().tanh())).cwiseAbs().maxCoeff(),
      1e-15);
  EXPECT_LT(
      (m.comment.value() - DenseMatrix((wc * c.transpose()).array().tanh())).cwiseAbs().maxCoeff(),
      1e-15);
}

TEST(AttentionMapsTest, ZeroWeightsGiveZeroMaps) {
  std::mt19937_64 rng(5);
  Tape tape;
  const AttentionMaps m = ComputeAttentionMaps(
      tape, tape.constant(RandomMatrix(rng, 3, 4)), tape.constant(RandomMatrix(rng, 2, 4)),
      tape.constant(RandomMatrix(rng, 2, 3)), tape.constant(DenseMatrix::Zero(5, 4)),
      tape.constant(DenseMatrix::Zero(5, 4)));
  EXPECT_EQ(m.sentence.value(), DenseMatrix::Zero(5, 3));
  EXPECT_EQ(m.comment.value(), DenseMatrix::Zero(5, 2));
}

TEST(AttentionMapsTest, MatchesExplicitComputation) {
  for (std::uint64_t seed = 1; seed <= 100; ++seed) {
    std::mt19937_64 rng(seed);
    const DenseMatrix s = RandomMatrix(rng, 2, 4), c = RandomMatrix(rng, 2, 4);
    const DenseMatrix f = RandomMatrix(rng, 2, 2);
    const DenseMatrix ws = RandomMatrix(rng, 3, 4), wc = RandomMatrix(rng, 3, 4);
    Tape tape;
    const AttentionMaps m =
        ComputeAttentionMaps(tape, tape.constant(s), tape.constant(c), tape.constant(f),
                             tape.constant(ws), tape.constant(wc));
    const oracle::Maps expected = oracle::AttentionMaps(FromDense(s), FromDense(c), FromDense(f),
                                                        FromDense(ws), FromDense(wc));
    EXPECT_LT(oracle::MaxAbsDiff(expected.sentence, m.sentence.value()), 1e-12);
    EXPECT_LT(oracle::MaxAbsDiff(expected.comment, m.comment.value()), 1e-12);
  }
}

TEST(AttentionMapsTest, PrintedFormOnlyClosesWhenCountsAgree) {
  std::mt19937_64 rng(6);
  const DenseMatrix ws = RandomMatrix(rng, 3, 4), wc = RandomMatrix(rng, 3, 4);
  Tape tape;
  EXPECT_THROW(ComputeAttentionMaps(tape, tape.constant(RandomMatrix(rng, 3, 4)),
                                    tape.constant(RandomMatrix(rng, 2, 4)),
                                    tape.constant(RandomMatrix(rng, 2, 3)), tape.constant(ws),
                                    tape.constant(wc), true),
               Error);
  const DenseMatrix s = RandomMatrix(rng, 2, 4), c = RandomMatrix(rng, 2, 4);
  const DenseMatrix f = RandomMatrix(rng, 2, 2);
  const AttentionMaps m =
      ComputeAttentionMaps(tape, tape.constant(s), tape.constant(c), tape.constant(f),
                           tape.constant(ws), tape.constant(wc), true);
  const DenseMatrix expected =
      (wc * s.transpose() + (ws * c.transpose()) * f.transpose()).array().tanh();
  EXPECT_LT((m.comment.value() - expected).cwiseAbs().maxCoeff(), 1e-15);
}

TEST(AttentionWeightsTest, ZeroVectorIsUniform) {
  std::mt19937_64 rng(7);
  Tape tape;
  const Var a = AttentionWeights(tape, tape.constant(RandomMatrix(rng, 3, 4)),
                                 tape.constant(DenseMatrix::Zero(3, 1)));
  for (int t = 0; t < 4; ++t) EXPECT_DOUBLE_EQ(a.value()(0, t), 0.25);
}

TEST(AttentionWeightsTest, SingleColumn) {
  std::mt19937_64 rng(8);
  Tape tape;
  const Var a = AttentionWeights(tape, tape.constant(RandomMatrix(rng, 3, 1)),
                                 tape.constant(RandomMatrix(rng, 3, 1)));
  EXPECT_EQ(a.value(), DenseMatrix::Ones(1, 1));
}

TEST(AttentionWeightsTest, MatchesHandSoftmax) {
  for (std::uint64_t seed = 1; seed <= 100; ++seed) {
    std::mt19937_64 rng(seed);
    const DenseMatrix h = RandomMatrix(rng, 3, 5), w = RandomMatrix(rng, 3, 1, 3.0);
    Tape tape;
    const Var a = AttentionWeights(tape, tape.constant(h), tape.constant(w));
    EXPECT_LT(MaxAbsDiff(oracle::AttentionWeights(FromDense(h), FromDense(w)), Row(a.value())),
              1e-12);
    EXPECT_NEAR(a.value().sum(), 1.0, 1e-12);
  }
}

TEST(AttendTest, UniformWeightsGiveRowMean) {
  std::mt19937_64 rng(9);
  const DenseMatrix rows = RandomMatrix(rng, 4, 3);
  Tape tape;
  const Var out =
      Attend(tape, tape.constant(rows), tape.constant(DenseMatrix::Constant(1, 4, 0.25)));
  EXPECT_LT((out.value() - rows.colwise().mean()).cwiseAbs().maxCoeff(), 1e-15);
}

TEST(AttendTest, OneHotSelectsRow) {
  std::mt19937_64 rng(10);
  const DenseMatrix rows = RandomMatrix(rng, 4, 3);
  Tape tape;
  const Var out = Attend(tape, tape.constant(rows), tape.constant(RowOf({0, 0, 1, 0})));
  EXPECT_EQ(out.value(), DenseMatrix(rows.row(2)));
}

TEST(AttendTest, MatchesExplicitSummation) {
  for (std::uint64_t seed = 1; seed <= 100; ++seed) {
    std::mt19937_64 rng(seed);
    const DenseMatrix rows = RandomMatrix(rng, 4, 3);
    const DenseMatrix a = softmax_rows(RandomMatrix(rng, 1, 4));
    Tape tape;
    const Var out = Attend(tape, tape.constant(rows), tape.constant(a));
    EXPECT_LT(MaxAbsDiff(oracle::Attend(FromDense(rows), Row(a)), Row(out.value())), 1e-12);
  }
}

TEST(AttendTest, WeightCountMustMatchRows) {
  Tape tape;
  EXPECT_THROW(
      Attend(tape, tape.constant(DenseMatrix::Zero(3, 2)), tape.constant(DenseMatrix::Zero(1, 4))),
      Error);
}

TEST(PredictTest, ZeroClassifierIsUndecided) {
  Tape tape;
  const Var y =
      Predict(tape, tape.constant(DenseMatrix::Ones(1, 3)), tape.constant(DenseMatrix::Ones(1, 3)),
              tape.constant(DenseMatrix::Zero(2, 6)), tape.constant(DenseMatrix::Zero(1, 2)));
  EXPECT_EQ(y.value(), RowOf({0.5, 0.5}));
}

TEST(PredictTest, BiasOnlyClosedForm) {
  Tape tape;
  const Var y =
      Predict(tape, tape.constant(DenseMatrix::Ones(1, 3)), tape.constant(DenseMatrix::Ones(1, 3)),
              tape.constant(DenseMatrix::Zero(2, 6)), tape.constant(RowOf({std::log(3.0), 0.0})));
  EXPECT_NEAR(y.value()(0, 0), 0.75, 1e-15);
  EXPECT_NEAR(y.value()(0, 1), 0.25, 1e-15);
}

TEST(PredictTest, MatchesHandComputation) {
  for (std::uint64_t seed = 1; seed <= 100; ++seed) {
    std::mt19937_64 rng(seed);
    const DenseMatrix s = RandomMatrix(rng, 1, 3), c = RandomMatrix(rng, 1, 3);
    const DenseMatrix wf = RandomMatrix(rng, 2, 6, 2.0), bf = RandomMatrix(rng, 1, 2);
    Tape tape;
    const Var y =
        Predict(tape, tape.constant(s), tape.constant(c), tape.constant(wf), tape.constant(bf));
    EXPECT_LT(
        MaxAbsDiff(oracle::Predict(Row(s), Row(c), FromDense(wf), FromDense(bf)), Row(y.value())),
        1e-12);
    EXPECT_NEAR(y.value().sum(), 1.0, 1e-12);
  }
}

double PrintedLoss(std::initializer_list<double> y_hat, int label) {
  Tape tape;
  return Loss(tape, tape.constant(RowOf(y_hat)), label).scalar();
}

double TwoSidedLoss(std::initializer_list<double> y_hat, int label) {
  Tape tape;
  return CrossEntropyLoss(tape, tape.constant(RowOf(y_hat)), label).scalar();
}

TEST(LossTest, PerfectPredictionIsClampedZero) {
  EXPECT_NEAR(PrintedLoss({0.0, 1.0}, 1), 1e-12, 1e-15);
  EXPECT_NEAR(TwoSidedLoss({0.0, 1.0}, 1), 1e-12, 1e-15);
}

TEST(LossTest, EvenSplit) {
  EXPECT_NEAR(PrintedLoss({0.5, 0.5}, 1), 0.6931, 1e-4);
  EXPECT_DOUBLE_EQ(PrintedLoss({0.5, 0.5}, 1), std::log(2.0));
}

TEST(LossTest, PrintedFormForFakeLabel) { EXPECT_NEAR(PrintedLoss({0.9, 0.1}, 0), 2.3026, 1e-4); }

TEST(LossTest, PrintedFormIgnoresTheLabel) {
  std::mt19937_64 rng(12);
  for (int trial = 0; trial < 50; ++trial) {
    const DenseMatrix y = softmax_rows(RandomMatrix(rng, 1, 2, 4.0));
    Tape tape;
    EXPECT_NEAR(Loss(tape, tape.constant(y), 0).scalar(), Loss(tape, tape.constant(y), 1).scalar(),
                1e-12);
  }
}

TEST(LossTest, TwoSidedFormSeparatesLabels) {
  EXPECT_NEAR(TwoSidedLoss({0.9, 0.1}, 0), -std::log(0.9), 1e-12);
  EXPECT_NEAR(TwoSidedLoss({0.9, 0.1}, 1), -std::log(0.1), 1e-12);
}

TEST(LossTest, MatchesScalarFormulasAndIsNonNegative) {
  for (std::uint64_t seed = 1; seed <= 100; ++seed) {
    std::mt19937_64 rng(seed);
    const DenseMatrix y = softmax_rows(RandomMatrix(rng, 1, 2, 5.0));
    for (int label : {0, 1}) {
      Tape tape;
      const double printed = Loss(tape, tape.constant(y), label).scalar();
      const double two_sided = CrossEntropyLoss(tape, tape.constant(y), label).scalar();
      EXPECT_NEAR(printed, oracle::PrintedLoss(Row(y), label), 1e-12);
      EXPECT_NEAR(two_sided, oracle::CrossEntropy(Row(y), label), 1e-12);
      EXPECT_GT(printed, 0.0);
      EXPECT_GT(two_sided, 0.0);
    }
  }
}

TEST(LossTest, RejectsLabelsOutsideZeroOne) {
  Tape tape;
  EXPECT_THROW(Loss(tape, tape.constant(RowOf({0.5, 0.5})), 2), Error);
}

TEST(CoAttendTest, DistributionsAreNormalized) {
  for (std::uint64_t seed = 1; seed <= 50; ++seed) {
    HeadFixture f(4, 3, 5, seed);
    std::mt19937_64 rng(seed);
    const int n = 1 + static_cast<int>(seed % 6), k = 1 + static_cast<int>(seed % 4);
    Tape tape;
    const CoAttentionResult r = CoAttend(tape, f.head, tape.constant(RandomMatrix(rng, n, 4)),
                                         tape.constant(RandomMatrix(rng, k, 4)));
    EXPECT_NEAR(r.y_hat.value().sum(), 1.0, 1e-12);
    EXPECT_NEAR(r.sentence_weights.value().sum(), 1.0, 1e-12);
    EXPECT_NEAR(r.comment_weights.value().sum(), 1.0, 1e-12);
    EXPECT_EQ(r.sentence_weights.cols(), n);
    EXPECT_EQ(r.comment_weights.cols(), k);
  }
}

TEST(CoAttendTest, CommentPermutationIsEquivariant) {
  HeadFixture f(4, 3, 5, 21);
  std::mt19937_64 rng(22);
  const DenseMatrix s = RandomMatrix(rng, 3, 4);
  const DenseMatrix c = RandomMatrix(rng, 4, 4);
  const int perm[] = {2, 0, 3, 1};
  DenseMatrix permuted(4, 4);
  for (int i = 0; i < 4; ++i) permuted.row(i) = c.row(perm[i]);
  Tape tape;
  const CoAttentionResult a = CoAttend(tape, f.head, tape.constant(s), tape.constant(c));
  const CoAttentionResult b = CoAttend(tape, f.head, tape.constant(s), tape.constant(permuted));
  for (int i = 0; i < 4; ++i) {
    EXPECT_NEAR(b.comment_weights.value()(0, i), a.comment_weights.value()(0, perm[i]), 1e-14);
  }
  EXPECT_LT((a.c_hat.value() - b.c_hat.value()).cwiseAbs().maxCoeff(), 1e-14);
  EXPECT_LT((a.y_hat.value() - b.y_hat.value()).cwiseAbs().maxCoeff(), 1e-14);
  EXPECT_LT((a.sentence_weights.value() - b.sentence_weights.value()).cwiseAbs().maxCoeff(), 1e-14);
}

TEST(CoAttendTest, HeadGradientsMatchFiniteDifferences) {
  HeadFixture f(4, 3, 5, 31);
  std::mt19937_64 rng(32);
  const DenseMatrix s = RandomMatrix(rng, 2, 4);
  const DenseMatrix users = RandomMatrix(rng, 2, 3);
  const DenseMatrix comments = RandomMatrix(rng, 2, 3);
  for (int label : {0, 1}) {
    const GradCheckReport r = FiniteDifferenceCheck(
        [&](Tape& t) {
          const Var c =
              UserCommentConcat(t, t.constant(users), t.constant(comments),
                                t.param(*f.head.concat_projection), t.param(*f.head.concat_bias));
          const CoAttentionResult out = CoAttend(t, f.head, t.constant(s), c);
          return CrossEntropyLoss(t, out.y_hat, label);
        },
        f.set);
    EXPECT_LT(r.max_rel_error, 1e-4);
    // Includes null_comment, which is unused here and checks as zero.
    EXPECT_EQ(r.entries_checked, f.set.scalar_count());
  }
}

TEST(CoAttendTest, TraceJsonRoundTrip) {
  HeadFixture f(4, 3, 5, 41);
  std::mt19937_64 rng(42);
  Tape tape;
  const CoAttentionResult r = CoAttend(tape, f.head, tape.constant(RandomMatrix(rng, 3, 4)),
                                       tape.constant(RandomMatrix(rng, 2, 4)));
  const ForwardTrace t = MakeTrace("news-7", r, {"c1", "c2"});
  const ForwardTrace back = TraceFromJson(TraceToJson(t));
  EXPECT_EQ(back.news_id, "news-7");
  EXPECT_EQ(back.y_hat, t.y_hat);
  EXPECT_EQ(back.sentence_weights, t.sentence_weights);
  EXPECT_EQ(back.comment_weights, t.comment_weights);
  EXPECT_EQ(back.comment_ids, t.comment_ids);
  EXPECT_THROW(TraceFromJson("{\"news_id\": 3}"), Error);
}

}  // namespace
}  // namespace gcal
