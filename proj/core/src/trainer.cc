#include "gcal/trainer.h"

#include <cmath>
#include <limits>
#include <numeric>

#include "gcal/error.h"
#include "gcal/random.h"

namespace gcal {
namespace {

std::vector<DenseMatrix> Snapshot(const ParameterSet& params) {
  std::vector<DenseMatrix> values;
  values.reserve(params.size());
  for (std::size_t i = 0; i < params.size(); ++i) values.push_back(params[i].value);
  return values;
}

void Restore(ParameterSet& params, const std::vector<DenseMatrix>& values) {
  for (std::size_t i = 0; i < params.size(); ++i) params[i].value = values[i];
}

std::string EpochName(int epoch) {
  std::string digits = std::to_string(epoch);
  while (digits.size() < 3) digits.insert(digits.begin(), '0');
  return "epoch_" + digits + ".ckpt";
}

double MeanLoss(const GcalModel& model, const Dataset& dataset, const HeteroGraph& graph,
                std::uint64_t sample_seed, Ablation ablation) {
  if (dataset.news.empty()) return 0.0;
  double total = 0.0;
  Tape tape;
  for (const NewsItem& news : dataset.news) {
    tape.clear();
    const NewsForward forward = ForwardNews(tape, model, graph, news, {ablation, sample_seed});
    total += NewsLoss(tape, model, forward, news.label).scalar();
  }
  return total / static_cast<double>(dataset.news.size());
}

}  // namespace

void TrainConfig::validate() const {
  if (!(learning_rate > 0.0)) {
    throw Error(ErrorCode::kInvalidArgument, "learning_rate must be > 0");
  }
  if (epochs < 1) throw Error(ErrorCode::kInvalidArgument, "epochs must be >= 1");
  if (batch_size < 1) throw Error(ErrorCode::kInvalidArgument, "batch_size must be >= 1");
  if (runs < 1) throw Error(ErrorCode::kInvalidArgument, "runs must be >= 1");
  if (!(train_fraction > 0.0 && train_fraction < 1.0)) {
    throw Error(ErrorCode::kInvalidArgument, "train_fraction must lie in (0, 1)");
  }
  if (patience < 0) throw Error(ErrorCode::kInvalidArgument, "patience must be >= 0");
}

TrainConfig TrainConfig::GossipPreset() {
  TrainConfig config;
  config.learning_rate = 0.0015;
  return config;
}

std::string OptimizerName(OptimizerKind kind) {
  return kind == OptimizerKind::kAdam ? "adam" : "sgd";
}

Report DescribeConfig(const TrainConfig& c) {
  Report r;
  r.set("learning_rate", c.learning_rate);
  r.set("epochs", c.epochs);
  r.set("seed", std::to_string(c.seed));
  r.set("optimizer", OptimizerName(c.optimizer));
  r.set("beta1", c.beta1);
  r.set("beta2", c.beta2);
  r.set("epsilon", c.epsilon);
  r.set("batch_size", c.batch_size);
  r.set("runs", c.runs);
  r.set("train_fraction", c.train_fraction);
  r.set("resplit_per_run", c.resplit_per_run);
  r.set("patience", c.patience);
  r.set("ablation", AblationName(c.ablation));
  const ModelConfig& m = c.model;
  r.set("model.vocab_size", m.vocab_size);
  r.set("model.d", m.d);
  r.set("model.d_word", m.d_word);
  r.set("model.word_layers", m.word_layers);
  r.set("model.word_heads", m.word_heads);
  r.set("model.word_ffn", m.word_ffn);
  r.set("model.max_sentence_words", m.max_sentence_words);
  r.set("model.max_news_sentences", m.max_news_sentences);
  r.set("model.d_graph", m.d_graph);
  r.set("model.attention_width", m.attention_width);
  r.set("model.comment_sample_size", m.comment_sample_size);
  r.set("model.user_sample_size", m.user_sample_size);
  r.set("model.readout", m.readout == AggregatorReadout::kMean ? "mean" : "last");
  r.set("model.leaky_slope", m.leaky_slope);
  r.set("model.eq11_verbatim", m.eq11_verbatim);
  r.set("model.verbatim_loss", m.verbatim_loss);
  return r;
}

Optimizer::Optimizer(const TrainConfig& config, const ParameterSet& params)
    : kind_(config.optimizer),
      lr_(config.learning_rate),
      beta1_(config.beta1),
      beta2_(config.beta2),
      epsilon_(config.epsilon) {
  if (kind_ == OptimizerKind::kAdam) {
    for (std::size_t i = 0; i < params.size(); ++i) {
      m_.push_back(DenseMatrix::Zero(params[i].value.rows(), params[i].value.cols()));
      v_.push_back(DenseMatrix::Zero(params[i].value.rows(), params[i].value.cols()));
    }
  }
}

void Optimizer::step(ParameterSet& params) {
  ++t_;
  if (kind_ == OptimizerKind::kSgd) {
    for (std::size_t i = 0; i < params.size(); ++i) {
      Parameter& p = params[i];
      if (p.gradient.size() == 0) continue;
      p.value -= lr_ * p.gradient;
    }
    return;
  }
  const double correction1 = 1.0 - std::pow(beta1_, static_cast<double>(t_));
  const double correction2 = 1.0 - std::pow(beta2_, static_cast<double>(t_));
  for (std::size_t i = 0; i < params.size(); ++i) {
    Parameter& p = params[i];
    if (p.gradient.size() == 0) continue;
    m_[i] = beta1_ * m_[i] + (1.0 - beta1_) * p.gradient;
    v_[i] = beta2_ * v_[i] + (1.0 - beta2_) * p.gradient.cwiseProduct(p.gradient);
    p.value.array() -=
        lr_ * (m_[i].array() / correction1) / ((v_[i].array() / correction2).sqrt() + epsilon_);
  }
}

TrainResult Train(const TrainConfig& config, const Dataset& train, const HeteroGraph& graph,
                  GcalModel& model, const TrainOptions& options) {
  config.validate();
  if (train.news.empty()) throw Error(ErrorCode::kInvalidArgument, "empty training set");
  if (options.checkpoint_dir) std::filesystem::create_directories(*options.checkpoint_dir);

  ParameterSet& params = model.params();
  Optimizer optimizer(config, params);
  TrainResult result;
  std::vector<DenseMatrix> last_good = Snapshot(params);
  std::vector<DenseMatrix> best = last_good;
  double best_validation = std::numeric_limits<double>::infinity();
  int since_best = 0;
  const bool early_stop =
      config.patience > 0 && options.validation && !options.validation->news.empty();

  std::vector<std::size_t> order(train.news.size());
  Tape tape;
  params.zero_grad();
  for (int epoch = 1; epoch <= config.epochs; ++epoch) {
    std::iota(order.begin(), order.end(), 0);
    std::mt19937_64 rng(MixSeed(config.seed, static_cast<std::uint64_t>(epoch)));
    Shuffle(order, rng);

    double epoch_loss = 0.0;
    for (std::size_t start = 0; start < order.size();
         start += static_cast<std::size_t>(config.batch_size)) {
      const std::size_t end =
          std::min(order.size(), start + static_cast<std::size_t>(config.batch_size));
      const double weight = 1.0 / static_cast<double>(end - start);
      for (std::size_t b = start; b < end; ++b) {
        const NewsItem& news = train.news[order[b]];
        tape.clear();
        const NewsForward forward =
            ForwardNews(tape, model, graph, news, {config.ablation, config.seed});
        const Var loss = NewsLoss(tape, model, forward, news.label);
        double value = loss.scalar();
        if (epoch == options.inject_nan_at_epoch) value = std::nan("");
        if (!std::isfinite(value)) {
          Restore(params, last_good);
          if (options.checkpoint_dir) model.save(*options.checkpoint_dir / "last_good.ckpt");
          throw Error(ErrorCode::kDivergence,
                      "non-finite loss at epoch " + std::to_string(epoch) + " on news " + news.id);
        }
        epoch_loss += value;
        tape.backward(ops::scale(loss, weight));
      }
      optimizer.step(params);
      params.zero_grad();
    }
    result.epoch_losses.push_back(epoch_loss / static_cast<double>(order.size()));
    result.epochs_run = epoch;
    last_good = Snapshot(params);
    if (options.checkpoint_dir) model.save(*options.checkpoint_dir / EpochName(epoch));

    if (options.validation && !options.validation->news.empty()) {
      const double validation =
          MeanLoss(model, *options.validation, graph, config.seed, config.ablation);
      result.validation_losses.push_back(validation);
      if (validation < best_validation) {
        best_validation = validation;
        best = last_good;
        result.best_epoch = epoch;
        since_best = 0;
      } else if (early_stop && ++since_best >= config.patience) {
        result.stopped_early = true;
        break;
      }
    }
  }
  if (result.stopped_early) {
    Restore(params, best);
  } else {
    result.best_epoch = result.epochs_run;
  }
  if (options.checkpoint_dir) model.save(*options.checkpoint_dir / "final.ckpt");
  return result;
}

Evaluation Evaluate(const GcalModel& model, const Dataset& dataset, const HeteroGraph& graph,
                    std::uint64_t sample_seed, Ablation ablation) {
  Evaluation out;
  Tape tape;
  double total = 0.0;
  for (const NewsItem& news : dataset.news) {
    tape.clear();
    const NewsForward forward = ForwardNews(tape, model, graph, news, {ablation, sample_seed});
    total += NewsLoss(tape, model, forward, news.label).scalar();
    const DenseMatrix& y = forward.y_hat().value();
    out.predictions.push_back({news.label, y(0, 0), y(0, 1)});
    out.traces.push_back(MakeTrace(news.id, forward.head, forward.comment_ids));
  }
  if (!dataset.news.empty()) out.mean_loss = total / static_cast<double>(dataset.news.size());
  out.metrics = ComputeMetrics(out.predictions);
  return out;
}

std::uint64_t RunSeed(std::uint64_t base, int run) {
  return run == 0 ? base : MixSeed(base, static_cast<std::uint64_t>(run));
}

Report DescribeMetrics(const Metrics& m) {
  Report r;
  r.set("accuracy", FormatMetric(m.accuracy));
  r.set("precision", FormatMetric(m.precision));
  r.set("recall", FormatMetric(m.recall));
  r.set("f1", FormatMetric(m.f1));
  r.set("auc", FormatMetric(m.auc));
  r.set("tp", m.confusion.tp);
  r.set("fp", m.confusion.fp);
  r.set("tn", m.confusion.tn);
  r.set("fn", m.confusion.fn);
  return r;
}

RunResult RunOnce(const TrainConfig& config, const Dataset& dataset, const HeteroGraph& graph,
                  std::uint64_t run_seed,
                  const std::optional<std::filesystem::path>& checkpoint_dir) {
  RunResult r;
  r.seed = run_seed;
  const auto [train, validation] =
      SplitDataset(dataset, config.train_fraction, config.resplit_per_run ? run_seed : config.seed);
  TrainConfig run_config = config;
  run_config.seed = run_seed;
  ModelConfig model_config = config.model;
  model_config.vocab_size = static_cast<int>(dataset.vocabulary.size());
  GcalModel model(model_config);
  model.initialize(run_seed);
  TrainOptions options;
  if (config.patience > 0) options.validation = &validation;
  options.checkpoint_dir = checkpoint_dir;
  r.training = Train(run_config, train, graph, model, options);
  r.evaluation = Evaluate(model, validation, graph, run_seed, config.ablation);
  r.train_news = train.news.size();
  r.validation_news = validation.news.size();
  return r;
}

ExperimentResult RunExperiment(const TrainConfig& config, const Dataset& dataset,
                               const HeteroGraph& graph, const ExperimentOptions& options) {
  config.validate();
  ExperimentResult out;
  out.report.merge("config", DescribeConfig(config));
  std::vector<Metrics> all;
  for (int run = 0; run < config.runs; ++run) {
    std::optional<std::filesystem::path> dir;
    if (options.checkpoint_root) {
      dir = config.runs == 1 ? *options.checkpoint_root
                             : *options.checkpoint_root / ("run_" + std::to_string(run));
    }
    RunResult r = RunOnce(config, dataset, graph, RunSeed(config.seed, run), dir);
    all.push_back(r.evaluation.metrics);

    const std::string prefix = "run." + std::to_string(run);
    out.report.set(prefix + ".seed", std::to_string(r.seed));
    out.report.set(prefix + ".train_news", r.train_news);
    out.report.set(prefix + ".validation_news", r.validation_news);
    for (std::size_t e = 0; e < r.training.epoch_losses.size(); ++e) {
      out.report.set(prefix + ".epoch." + std::to_string(e + 1) + ".loss",
                     r.training.epoch_losses[e]);
      if (e < r.training.validation_losses.size()) {
        out.report.set(prefix + ".epoch." + std::to_string(e + 1) + ".validation_loss",
                       r.training.validation_losses[e]);
      }
    }
    out.report.set(prefix + ".epochs_run", r.training.epochs_run);
    out.report.set(prefix + ".stopped_early", r.training.stopped_early);
    out.report.set(prefix + ".validation_loss", r.evaluation.mean_loss);
    out.report.merge(prefix + ".metrics", DescribeMetrics(r.evaluation.metrics));
    out.runs.push_back(std::move(r));
  }
  out.summary = Summarize(all);
  const std::pair<const char*, double Metrics::*> fields[] = {{"accuracy", &Metrics::accuracy},
                                                              {"precision", &Metrics::precision},
                                                              {"recall", &Metrics::recall},
                                                              {"f1", &Metrics::f1},
                                                              {"auc", &Metrics::auc}};
  for (const auto& [name, member] : fields) {
    out.report.set(std::string("mean.") + name, FormatMetric(out.summary.mean.*member));
    out.report.set(std::string("stddev.") + name, FormatMetric(out.summary.stddev.*member));
  }
  return out;
}

ExperimentResult RunExperiment(const TrainConfig& config, const Dataset& dataset,
                               const GraphConfig& graph_config) {
  return RunExperiment(config, dataset, BuildGraph(dataset, graph_config));
}

}  // namespace gcal
