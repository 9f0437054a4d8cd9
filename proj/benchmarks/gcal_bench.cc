#include <benchmark/benchmark.h>

#include <random>

#include "gcal/co_attention.h"
#include "gcal/graph.h"
#include "gcal/model.h"
#include "gcal/synthetic.h"
#include "gcal/tensor.h"

namespace gcal {
namespace {

DenseMatrix Random(std::mt19937_64& rng, Eigen::Index rows, Eigen::Index cols) {
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  DenseMatrix m(rows, cols);
  for (Eigen::Index i = 0; i < m.size(); ++i) m.data()[i] = u(rng);
  return m;
}

void BM_Matmul(benchmark::State& state) {
  const auto n = static_cast<Eigen::Index>(state.range(0));
  std::mt19937_64 rng(1);
  const DenseMatrix a = Random(rng, n, n), b = Random(rng, n, n);
  for (auto _ : state) {
    DenseMatrix c = a * b;
    benchmark::DoNotOptimize(c.data());
  }
  state.SetItemsProcessed(state.iterations() * 2 * n * n * n);
}
BENCHMARK(BM_Matmul)->Arg(16)->Arg(64)->Arg(200);

void BM_MatmulTape(benchmark::State& state) {
  const auto n = static_cast<Eigen::Index>(state.range(0));
  std::mt19937_64 rng(2);
  ParameterSet set;
  Parameter& w = set.add("w", n, n);
  w.value = Random(rng, n, n);
  const DenseMatrix x = Random(rng, 8, n);
  for (auto _ : state) {
    Tape tape;
    Var y = ops::mean_rows(ops::tanh(ops::matmul(tape.constant(x), tape.param(w))));
    Var loss = ops::sum(y);
    tape.backward(loss);
    benchmark::DoNotOptimize(w.gradient.data());
  }
}
BENCHMARK(BM_MatmulTape)->Arg(16)->Arg(64)->Arg(200);

void BM_CoAttentionHead(benchmark::State& state) {
  const int sentences = static_cast<int>(state.range(0));
  const int comments = static_cast<int>(state.range(1));
  CoAttentionConfig config;
  ParameterSet set;
  const CoAttentionParams head = CoAttentionParams::Create(set, config);
  std::mt19937_64 rng(3);
  for (std::size_t i = 0; i < set.size(); ++i) {
    set[i].value = Random(rng, set[i].value.rows(), set[i].value.cols()) * 0.1;
  }
  const DenseMatrix s = Random(rng, sentences, config.d);
  const DenseMatrix c = Random(rng, comments, config.d);
  for (auto _ : state) {
    Tape tape;
    const CoAttentionResult r = CoAttend(tape, head, tape.constant(s), tape.constant(c));
    benchmark::DoNotOptimize(r.y_hat.value().data());
  }
}
BENCHMARK(BM_CoAttentionHead)->Args({10, 5})->Args({50, 30});

struct Corpus {
  Dataset dataset;
  HeteroGraph graph;
  GcalModel model;

  explicit Corpus(int width)
      : dataset(SyntheticDataset(SyntheticConfig{})),
        graph(BuildGraph(dataset)),
        model(Config(static_cast<int>(dataset.vocabulary.size()), width)) {
    model.initialize(1);
  }

  static ModelConfig Config(int vocab, int width) {
    ModelConfig c;
    c.vocab_size = vocab;
    c.d = width;
    c.d_graph = width;
    c.attention_width = width;
    return c;
  }
};

void BM_NewsForward(benchmark::State& state) {
  static Corpus corpus(static_cast<int>(state.range(0)));
  std::size_t i = 0;
  for (auto _ : state) {
    Tape tape;
    const NewsItem& news = corpus.dataset.news[i++ % corpus.dataset.news.size()];
    const NewsForward f = ForwardNews(tape, corpus.model, corpus.graph, news);
    benchmark::DoNotOptimize(f.y_hat().value().data());
  }
}
BENCHMARK(BM_NewsForward)->Arg(64)->Unit(benchmark::kMillisecond);

void BM_NewsForwardBackward(benchmark::State& state) {
  static Corpus corpus(static_cast<int>(state.range(0)));
  std::size_t i = 0;
  for (auto _ : state) {
    Tape tape;
    const NewsItem& news = corpus.dataset.news[i++ % corpus.dataset.news.size()];
    const NewsForward f = ForwardNews(tape, corpus.model, corpus.graph, news);
    tape.backward(NewsLoss(tape, corpus.model, f, news.label));
    benchmark::DoNotOptimize(corpus.model.params()[0].gradient.data());
  }
}
BENCHMARK(BM_NewsForwardBackward)->Arg(64)->Unit(benchmark::kMillisecond);

}  // namespace
}  // namespace gcal

BENCHMARK_MAIN();
