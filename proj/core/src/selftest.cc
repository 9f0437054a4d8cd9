#include "gcal/selftest.h"

#include <cmath>
#include <random>

#include "gcal/gradcheck.h"
#include "gcal/graph.h"
#include "gcal/random.h"
#include "gcal/synthetic.h"

namespace gcal {
namespace {

double RowSumError(const DenseMatrix& m) {
  double worst = 0.0;
  for (Eigen::Index r = 0; r < m.rows(); ++r)
    worst = std::max(worst, std::abs(m.row(r).sum() - 1.0));
  return worst;
}

DenseMatrix RandomMatrix(std::mt19937_64& rng, Eigen::Index rows, Eigen::Index cols) {
  DenseMatrix m(rows, cols);
  for (Eigen::Index i = 0; i < m.size(); ++i) m.data()[i] = 2.0 * UniformUnit(rng) - 1.0;
  return m;
}

// Explicit index loops for the co-attention head, independent of the tape.
struct LoopHead {
  std::vector<double> y_hat;
  std::vector<double> a_s;
  std::vector<double> a_c;
};

std::vector<double> LoopSoftmax(const std::vector<double>& x) {
  double top = x[0];
  for (double v : x) top = std::max(top, v);
  std::vector<double> out(x.size());
  double sum = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) sum += out[i] = std::exp(x[i] - top);
  for (double& v : out) v /= sum;
  return out;
}

LoopHead LoopCoAttention(const DenseMatrix& s, const DenseMatrix& c, const CoAttentionParams& p) {
  const Eigen::Index n = s.rows(), k = c.rows(), d = s.cols();
  const DenseMatrix& wi = p.w_i->value;
  const DenseMatrix& ws = p.w_s->value;
  const DenseMatrix& wc = p.w_c->value;
  const Eigen::Index ka = ws.rows();
  DenseMatrix f(k, n);
  for (Eigen::Index a = 0; a < k; ++a) {
    for (Eigen::Index b = 0; b < n; ++b) {
      double acc = 0.0;
      for (Eigen::Index i = 0; i < d; ++i) {
        for (Eigen::Index j = 0; j < d; ++j) acc += c(a, i) * wi(i, j) * s(b, j);
      }
      f(a, b) = std::tanh(acc);
    }
  }
  DenseMatrix ps(ka, n), pc(ka, k);
  for (Eigen::Index r = 0; r < ka; ++r) {
    for (Eigen::Index b = 0; b < n; ++b) {
      double acc = 0.0;
      for (Eigen::Index i = 0; i < d; ++i) acc += ws(r, i) * s(b, i);
      ps(r, b) = acc;
    }
    for (Eigen::Index a = 0; a < k; ++a) {
      double acc = 0.0;
      for (Eigen::Index i = 0; i < d; ++i) acc += wc(r, i) * c(a, i);
      pc(r, a) = acc;
    }
  }
  std::vector<double> score_s(static_cast<std::size_t>(n)), score_c(static_cast<std::size_t>(k));
  for (Eigen::Index b = 0; b < n; ++b) {
    double acc = 0.0;
    for (Eigen::Index r = 0; r < ka; ++r) {
      double h = ps(r, b);
      for (Eigen::Index a = 0; a < k; ++a) h += pc(r, a) * f(a, b);
      acc += p.w_hs->value(r, 0) * std::tanh(h);
    }
    score_s[static_cast<std::size_t>(b)] = acc;
  }
  for (Eigen::Index a = 0; a < k; ++a) {
    double acc = 0.0;
    for (Eigen::Index r = 0; r < ka; ++r) {
      double h = pc(r, a);
      for (Eigen::Index b = 0; b < n; ++b) h += ps(r, b) * f(a, b);
      acc += p.w_hc->value(r, 0) * std::tanh(h);
    }
    score_c[static_cast<std::size_t>(a)] = acc;
  }
  LoopHead out;
  out.a_s = LoopSoftmax(score_s);
  out.a_c = LoopSoftmax(score_c);
  std::vector<double> joined(static_cast<std::size_t>(2 * d), 0.0);
  for (Eigen::Index i = 0; i < d; ++i) {
    for (Eigen::Index b = 0; b < n; ++b) joined[i] += out.a_s[b] * s(b, i);
    for (Eigen::Index a = 0; a < k; ++a) joined[d + i] += out.a_c[a] * c(a, i);
  }
  std::vector<double> logits(2);
  for (int o = 0; o < 2; ++o) {
    double acc = p.b_f->value(0, o);
    for (Eigen::Index i = 0; i < 2 * d; ++i) acc += p.w_f->value(o, i) * joined[i];
    logits[o] = acc;
  }
  out.y_hat = LoopSoftmax(logits);
  return out;
}

}  // namespace

bool SelfTestResult::ok() const {
  for (const SelfTestCheck& c : checks) {
    if (!c.passed) return false;
  }
  return true;
}

ModelConfig TinyModelConfig(int vocab_size) {
  ModelConfig c;
  c.vocab_size = vocab_size;
  c.d = 6;
  c.d_word = 4;
  c.word_layers = 2;
  c.word_heads = 2;
  c.word_ffn = 6;
  c.max_sentence_words = 8;
  c.d_graph = 4;
  c.attention_width = 3;
  return c;
}

SelfTestCheck ModelGradientCheck(std::uint64_t seed, double threshold) {
  const Dataset dataset = CanonicalDataset();
  const HeteroGraph graph = BuildGraph(dataset);
  GcalModel model(TinyModelConfig(static_cast<int>(dataset.vocabulary.size())));
  model.initialize(seed);
  const NewsItem& news = dataset.news.front();
  const GradCheckReport report = FiniteDifferenceCheck(
      [&](Tape& tape) {
        const NewsForward forward = ForwardNews(tape, model, graph, news, {Ablation::kNone, seed});
        return NewsLoss(tape, model, forward, news.label);
      },
      model.params());
  SelfTestCheck check;
  check.name = "gradient.full_model";
  check.value = report.max_rel_error;
  check.threshold = threshold;
  check.passed = report.max_rel_error < threshold;
  std::string worst;
  double worst_error = -1.0;
  for (const GradCheckEntry& e : report.per_parameter) {
    if (e.max_rel_error > worst_error) {
      worst_error = e.max_rel_error;
      worst = e.parameter;
    }
  }
  check.detail = std::to_string(report.entries_checked) + " entries, worst " + worst;
  return check;
}

SelfTestCheck NormalizationCheck(std::uint64_t seed, int passes, double threshold) {
  const Dataset dataset = CanonicalDataset();
  const HeteroGraph graph = BuildGraph(dataset);
  GcalModel model(TinyModelConfig(static_cast<int>(dataset.vocabulary.size())));
  double worst = 0.0;
  for (int i = 0; i < passes; ++i) {
    model.initialize(MixSeed(seed, static_cast<std::uint64_t>(i)));
    Tape tape;
    const NewsForward f = ForwardNews(tape, model, graph, dataset.news.front(),
                                      {Ablation::kNone, static_cast<std::uint64_t>(i)});
    for (const Var& alpha : f.content.word_attention)
      worst = std::max(worst, RowSumError(alpha.value()));
    for (const Var& w : f.mixture_weights) worst = std::max(worst, RowSumError(w.value()));
    worst = std::max(worst, RowSumError(f.head.sentence_weights.value()));
    worst = std::max(worst, RowSumError(f.head.comment_weights.value()));
    worst = std::max(worst, RowSumError(f.y_hat().value()));
  }
  SelfTestCheck check;
  check.name = "normalization";
  check.value = worst;
  check.threshold = threshold;
  check.passed = worst < threshold;
  check.detail = std::to_string(passes) + " forward passes";
  return check;
}

SelfTestCheck HeadLoopCheck(std::uint64_t seed, int instances, double threshold) {
  std::mt19937_64 rng(seed);
  double worst = 0.0;
  for (int t = 0; t < instances; ++t) {
    CoAttentionConfig config;
    config.d = 2 + static_cast<int>(UniformIndex(rng, 5));
    config.d_graph = 2;
    config.attention_width = 1 + static_cast<int>(UniformIndex(rng, 4));
    ParameterSet set;
    const CoAttentionParams p = CoAttentionParams::Create(set, config);
    for (std::size_t i = 0; i < set.size(); ++i) {
      set[i].value = RandomMatrix(rng, set[i].value.rows(), set[i].value.cols());
    }
    const Eigen::Index n = 1 + static_cast<Eigen::Index>(UniformIndex(rng, 5));
    const Eigen::Index k = 1 + static_cast<Eigen::Index>(UniformIndex(rng, 5));
    const DenseMatrix s = RandomMatrix(rng, n, config.d);
    const DenseMatrix c = RandomMatrix(rng, k, config.d);
    Tape tape;
    const CoAttentionResult r = CoAttend(tape, p, tape.constant(s), tape.constant(c));
    const LoopHead loop = LoopCoAttention(s, c, p);
    for (int o = 0; o < 2; ++o)
      worst = std::max(worst, std::abs(r.y_hat.value()(0, o) - loop.y_hat[o]));
    for (Eigen::Index b = 0; b < n; ++b) {
      worst = std::max(worst, std::abs(r.sentence_weights.value()(0, b) - loop.a_s[b]));
    }
    for (Eigen::Index a = 0; a < k; ++a) {
      worst = std::max(worst, std::abs(r.comment_weights.value()(0, a) - loop.a_c[a]));
    }
  }
  SelfTestCheck check;
  check.name = "coattention.loop_oracle";
  check.value = worst;
  check.threshold = threshold;
  check.passed = worst < threshold;
  check.detail = std::to_string(instances) + " random instances";
  return check;
}

SelfTestResult RunSelfTest(std::uint64_t seed) {
  SelfTestResult result;
  result.checks.push_back(ModelGradientCheck(seed));
  result.checks.push_back(NormalizationCheck(seed, 200));
  result.checks.push_back(HeadLoopCheck(seed, 100));
  return result;
}

}  // namespace gcal
