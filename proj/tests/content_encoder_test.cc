#include "gcal/content_encoder.h"

#include <gtest/gtest.h>

#include <cmath>

#include "gcal/error.h"
#include "gcal/gradcheck.h"
#include "support/fixtures.h"
#include "support/oracle.h"

namespace gcal {
namespace {

using oracle::FromDense;
using oracle::Mat;
using testing::MaxAbsDiff;
using testing::Randomize;
using testing::Row;

WordEncoderConfig SmallWords() {
  WordEncoderConfig c;
  c.vocab_size = 9;
  c.d_word = 4;
  c.layers = 2;
  c.heads = 2;
  c.ffn_hidden = 5;
  c.max_len = 8;
  return c;
}

// Loop implementation of the self-attention encoder.
Mat EncodeWordsOracle(const WordEncoderParams& p, const std::vector<TokenId>& tokens) {
  const int m = static_cast<int>(tokens.size());
  const int d = p.config.d_word;
  const int heads = p.config.heads;
  const int hw = d / heads;
  Mat x(m, d);
  for (int t = 0; t < m; ++t) {
    for (int j = 0; j < d; ++j) {
      x(t, j) = p.token_embedding->value(tokens[t], j) + p.position_embedding->value(t, j);
    }
  }
  auto times = [](const Mat& a, const DenseMatrix& w) {
    Mat out(a.rows, static_cast<int>(w.cols()));
    for (int i = 0; i < a.rows; ++i) {
      for (int j = 0; j < out.cols; ++j) {
        double acc = 0.0;
        for (int k = 0; k < a.cols; ++k) acc += a(i, k) * w(k, j);
        out(i, j) = acc;
      }
    }
    return out;
  };
  for (const auto& layer : p.layers) {
    const Mat q = times(x, layer.query->value);
    const Mat k = times(x, layer.key->value);
    const Mat v = times(x, layer.value->value);
    Mat attended(m, d);
    for (int h = 0; h < heads; ++h) {
      for (int i = 0; i < m; ++i) {
        std::vector<double> scores(m);
        for (int j = 0; j < m; ++j) {
          double s = 0.0;
          for (int c = 0; c < hw; ++c) s += q(i, h * hw + c) * k(j, h * hw + c);
          scores[j] = s / std::sqrt(static_cast<double>(hw));
        }
        const std::vector<double> w = oracle::Softmax(scores);
        for (int c = 0; c < hw; ++c) {
          double acc = 0.0;
          for (int j = 0; j < m; ++j) acc += w[j] * v(j, h * hw + c);
          attended(i, h * hw + c) = acc;
        }
      }
    }
    const Mat projected = times(attended, layer.output->value);
    for (std::size_t e = 0; e < x.v.size(); ++e) x.v[e] += projected.v[e];
    Mat hidden = times(x, layer.ffn_in->value);
    for (int i = 0; i < m; ++i) {
      for (int j = 0; j < hidden.cols; ++j) {
        hidden(i, j) = std::tanh(hidden(i, j) + layer.ffn_in_bias->value(0, j));
      }
    }
    const Mat out = times(hidden, layer.ffn_out->value);
    for (int i = 0; i < m; ++i) {
      for (int j = 0; j < d; ++j) x(i, j) += out(i, j) + layer.ffn_out_bias->value(0, j);
    }
  }
  return x;
}

TEST(EncodeWordsTest, MatchesLoopImplementation) {
  for (std::uint64_t seed = 1; seed <= 20; ++seed) {
    ParameterSet set;
    const WordEncoderParams p = WordEncoderParams::Create(set, SmallWords());
    Randomize(set, seed);
    const std::vector<TokenId> tokens = {2, 5, 3, 8, 2};
    Tape tape;
    const Var h = EncodeWords(tape, p, tokens);
    EXPECT_LT(oracle::MaxAbsDiff(EncodeWordsOracle(p, tokens), h.value()), 1e-12);
  }
}

TEST(EncodeWordsTest, SingleTokenHasNoCrossTokenMixing) {
  ParameterSet set;
  const WordEncoderParams p = WordEncoderParams::Create(set, SmallWords());
  Randomize(set, 2);
  Tape tape;
  const Var h = EncodeWords(tape, p, std::vector<TokenId>{4});
  // With one token every attention weight is 1, so each layer adds x Wv Wo.
  DenseMatrix x = p.token_embedding->value.row(4) + p.position_embedding->value.row(0);
  for (const auto& layer : p.layers) {
    x += x * layer.value->value * layer.output->value;
    DenseMatrix hidden = (x * layer.ffn_in->value + layer.ffn_in_bias->value).array().tanh();
    x += hidden * layer.ffn_out->value + layer.ffn_out_bias->value;
  }
  EXPECT_LT((h.value() - x).cwiseAbs().maxCoeff(), 1e-12);
}

TEST(EncodeWordsTest, TokenOrderMatters) {
  for (std::uint64_t seed = 1; seed <= 10; ++seed) {
    ParameterSet set;
    const WordEncoderParams p = WordEncoderParams::Create(set, SmallWords());
    Randomize(set, seed);
    Tape tape;
    const DenseMatrix ab = EncodeWords(tape, p, std::vector<TokenId>{2, 3}).value();
    const DenseMatrix ba = EncodeWords(tape, p, std::vector<TokenId>{3, 2}).value();
    DenseMatrix ba_swapped(2, ba.cols());
    ba_swapped.row(0) = ba.row(1);
    ba_swapped.row(1) = ba.row(0);
    EXPECT_GT((ab - ba_swapped).cwiseAbs().maxCoeff(), 1e-6);
  }
}

TEST(EncodeWordsTest, ZeroLayersReduceToEmbeddings) {
  ParameterSet set;
  const WordEncoderParams p = WordEncoderParams::Create(set, SmallWords());
  Randomize(set, 3);
  for (const auto& layer : p.layers) {
    for (Parameter* q : {layer.query, layer.key, layer.value, layer.output, layer.ffn_in,
                         layer.ffn_in_bias, layer.ffn_out, layer.ffn_out_bias}) {
      q->value.setZero();
    }
  }
  const std::vector<TokenId> tokens = {7, 2, 2};
  Tape tape;
  const DenseMatrix h = EncodeWords(tape, p, tokens).value();
  for (int t = 0; t < 3; ++t) {
    const DenseMatrix expected =
        p.token_embedding->value.row(tokens[t]) + p.position_embedding->value.row(t);
    EXPECT_EQ(DenseMatrix(h.row(t)), expected);
  }
}

TEST(EncodeWordsTest, EmptySentenceIsRejected) {
  ParameterSet set;
  const WordEncoderParams p = WordEncoderParams::Create(set, SmallWords());
  Tape tape;
  try {
    EncodeWords(tape, p, std::vector<TokenId>{});
    FAIL() << "expected EmptySentence";
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kEmptySentence);
  }
}

TEST(WordAttentionTest, SingleWord) {
  std::mt19937_64 rng(1);
  Tape tape;
  const DenseMatrix h = oracle::RandomMatrix(rng, 1, 4);
  const WordAttentionResult r =
      WordAttention(tape, tape.constant(h), tape.constant(oracle::RandomMatrix(rng, 1, 4)));
  EXPECT_EQ(r.alpha.value()(0, 0), 1.0);
  EXPECT_LT((r.sentence.value() - h).cwiseAbs().maxCoeff(), 1e-15);
}

TEST(WordAttentionTest, IdenticalRowsSplitEvenly) {
  std::mt19937_64 rng(2);
  const DenseMatrix row = oracle::RandomMatrix(rng, 1, 4);
  DenseMatrix h(2, 4);
  h << row, row;
  Tape tape;
  const WordAttentionResult r =
      WordAttention(tape, tape.constant(h), tape.constant(oracle::RandomMatrix(rng, 1, 4)));
  EXPECT_DOUBLE_EQ(r.alpha.value()(0, 0), 0.5);
  EXPECT_DOUBLE_EQ(r.alpha.value()(0, 1), 0.5);
  EXPECT_LT((r.sentence.value() - row).cwiseAbs().maxCoeff(), 1e-15);
}

TEST(WordAttentionTest, MatchesExplicitWeightedSum) {
  for (std::uint64_t seed = 1; seed <= 100; ++seed) {
    std::mt19937_64 rng(seed);
    const DenseMatrix h = oracle::RandomMatrix(rng, 3, 4, 2.0);
    const DenseMatrix ctx = oracle::RandomMatrix(rng, 1, 4, 2.0);
    Tape tape;
    const WordAttentionResult r = WordAttention(tape, tape.constant(h), tape.constant(ctx));
    const oracle::Pooled expected = oracle::WordAttention(FromDense(h), Row(ctx));
    EXPECT_LT(MaxAbsDiff(expected.vector, Row(r.sentence.value())), 1e-12);
    EXPECT_LT(MaxAbsDiff(expected.alpha, Row(r.alpha.value())), 1e-12);
    EXPECT_NEAR(r.alpha.value().sum(), 1.0, 1e-12);
  }
}

struct GruFixture {
  ParameterSet set;
  SentenceEncoderParams params;

  GruFixture(int input, int d, std::uint64_t seed) {
    params = SentenceEncoderParams::Create(set, input, d);
    Randomize(set, seed);
  }
};

TEST(EncodeSentencesTest, SingleSentence) {
  GruFixture f(4, 6, 1);
  std::mt19937_64 rng(5);
  const DenseMatrix v = oracle::RandomMatrix(rng, 1, 4);
  Tape tape;
  const DenseMatrix s = EncodeSentences(tape, f.params, tape.constant(v)).value();
  EXPECT_EQ(s.rows(), 1);
  EXPECT_EQ(s.cols(), 6);
  const Mat expected = oracle::BiGru(testing::ToOracle(f.params.forward),
                                     testing::ToOracle(f.params.backward), FromDense(v));
  EXPECT_LT(oracle::MaxAbsDiff(expected, s), 1e-12);
}

TEST(EncodeSentencesTest, ZeroInputsAndGatesStayAtZero) {
  ParameterSet set;
  const SentenceEncoderParams p = SentenceEncoderParams::Create(set, 4, 6);
  Tape tape;
  const DenseMatrix s = EncodeSentences(tape, p, tape.constant(DenseMatrix::Zero(3, 4))).value();
  EXPECT_EQ(s, DenseMatrix::Zero(3, 6));
}

TEST(EncodeSentencesTest, MatchesScalarRecurrence) {
  for (std::uint64_t seed = 1; seed <= 100; ++seed) {
    GruFixture f(4, 6, seed);
    std::mt19937_64 rng(seed + 1000);
    const DenseMatrix v = oracle::RandomMatrix(rng, 3, 4, 2.0);
    Tape tape;
    const DenseMatrix s = EncodeSentences(tape, f.params, tape.constant(v)).value();
    const Mat expected = oracle::BiGru(testing::ToOracle(f.params.forward),
                                       testing::ToOracle(f.params.backward), FromDense(v));
    EXPECT_LT(oracle::MaxAbsDiff(expected, s), 1e-12);
  }
}

TEST(EncodeSentencesTest, ReversingSentencesSwapsDirections) {
  GruFixture f(4, 6, 7);
  for (std::size_t i = 0; i < f.set.size(); ++i) {
    const std::string& name = f.set[i].name;
    const auto pos = name.find(".backward.");
    if (pos == std::string::npos) continue;
    std::string twin = name;
    twin.replace(pos, 10, ".forward.");
    f.set[i].value = f.set.find(twin)->value;
  }
  std::mt19937_64 rng(8);
  const DenseMatrix v = oracle::RandomMatrix(rng, 4, 4);
  const DenseMatrix reversed = v.colwise().reverse();
  Tape tape;
  const DenseMatrix s = EncodeSentences(tape, f.params, tape.constant(v)).value();
  const DenseMatrix r = EncodeSentences(tape, f.params, tape.constant(reversed)).value();
  for (int i = 0; i < 4; ++i) {
    EXPECT_EQ(DenseMatrix(r.block(i, 0, 1, 3)), DenseMatrix(s.block(3 - i, 3, 1, 3)));
    EXPECT_EQ(DenseMatrix(r.block(i, 3, 1, 3)), DenseMatrix(s.block(3 - i, 0, 1, 3)));
  }
}

struct ContentFixture {
  ParameterSet set;
  WordEncoderParams words;
  SentenceEncoderParams sentences;

  explicit ContentFixture(std::uint64_t seed) {
    words = WordEncoderParams::Create(set, SmallWords());
    sentences = SentenceEncoderParams::Create(set, 4, 6);
    Randomize(set, seed);
  }
};

TEST(EncodeContentTest, AttentionSumsToOnePerSentence) {
  ContentFixture f(3);
  Tape tape;
  const ContentEncoding c =
      EncodeContent(tape, f.words, f.sentences, {{2, 3, 4}, {5}, {6, 7, 8, 2, 3}});
  ASSERT_EQ(c.word_attention.size(), 3u);
  for (const Var& a : c.word_attention) EXPECT_NEAR(a.value().sum(), 1.0, 1e-12);
  EXPECT_EQ(c.sentences.rows(), 3);
  EXPECT_EQ(c.sentences.cols(), 6);
}

TEST(EncodeContentTest, SentencesBeyondTheLimitAreIgnored) {
  ContentFixture f(4);
  std::vector<std::vector<TokenId>> news;
  for (int i = 0; i < 51; ++i) news.push_back({2 + i % 7, 3});
  Tape tape;
  const DenseMatrix full = EncodeContent(tape, f.words, f.sentences, news, 50).sentences.value();
  news.pop_back();
  const DenseMatrix fifty = EncodeContent(tape, f.words, f.sentences, news, 50).sentences.value();
  EXPECT_EQ(full.rows(), 50);
  EXPECT_EQ(full, fifty);
}

TEST(EncodeContentTest, GradientsMatchFiniteDifferences) {
  ContentFixture f(5);
  const std::vector<std::vector<TokenId>> news = {{2, 3, 4}, {5, 6, 7}};
  std::mt19937_64 rng(6);
  const DenseMatrix weights = oracle::RandomMatrix(rng, 2, 6);
  const GradCheckReport r = FiniteDifferenceCheck(
      [&](Tape& t) {
        Var s = EncodeContent(t, f.words, f.sentences, news).sentences;
        return ops::sum(ops::mul(s, t.constant(weights)));
      },
      f.set);
  EXPECT_LT(r.max_rel_error, 1e-4);
  EXPECT_GT(r.entries_checked, 0u);
}

}  // namespace
}  // namespace gcal
