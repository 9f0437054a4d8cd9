#ifndef GCAL_TRAINER_H_
#define GCAL_TRAINER_H_

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "gcal/co_attention.h"
#include "gcal/data_model.h"
#include "gcal/graph.h"
#include "gcal/metrics.h"
#include "gcal/model.h"
#include "gcal/parameters.h"
#include "gcal/report.h"

namespace gcal {

enum class OptimizerKind { kAdam, kSgd };

struct TrainConfig {
  double learning_rate = 0.0002;
  int epochs = 30;
  std::uint64_t seed = 1;
  OptimizerKind optimizer = OptimizerKind::kAdam;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double epsilon = 1e-8;
  int batch_size = 8;
  int runs = 5;
  double train_fraction = 0.75;
  bool resplit_per_run = true;
  // Early stop on validation loss; 0 disables. Ignored without validation.
  int patience = 5;
  Ablation ablation = Ablation::kNone;
  ModelConfig model;

  // Throws Error(kInvalidArgument) when learning_rate <= 0 or epochs < 1.
  void validate() const;
  // Learning rate 0.0015 for the gossip-style corpus.
  static TrainConfig GossipPreset();
};

std::string OptimizerName(OptimizerKind kind);

// Echo of every field as report lines.
Report DescribeConfig(const TrainConfig& config);

class Optimizer {
 public:
  Optimizer(const TrainConfig& config, const ParameterSet& params);

  // One update from the gradients currently stored in `params`.
  void step(ParameterSet& params);
  std::int64_t steps() const { return t_; }

 private:
  OptimizerKind kind_;
  double lr_;
  double beta1_;
  double beta2_;
  double epsilon_;
  std::int64_t t_ = 0;
  std::vector<DenseMatrix> m_;
  std::vector<DenseMatrix> v_;
};

struct TrainOptions {
  const Dataset* validation = nullptr;
  // Checkpoints epoch_<n>.ckpt per epoch and final.ckpt go here when set.
  std::optional<std::filesystem::path> checkpoint_dir;
  // Forces a non-finite loss at this epoch (1-based); used to exercise the
  // divergence path.
  int inject_nan_at_epoch = 0;
};

struct TrainResult {
  std::vector<double> epoch_losses;       // mean per-news training loss
  std::vector<double> validation_losses;  // empty without validation
  int epochs_run = 0;
  int best_epoch = 0;  // 1-based epoch of the retained parameters
  bool stopped_early = false;
};

// Trains `model` in place. Throws Error(kDivergence) on a non-finite loss;
// the parameters are first restored to the last completed epoch and, with a
// checkpoint directory, written to last_good.ckpt.
TrainResult Train(const TrainConfig& config, const Dataset& train, const HeteroGraph& graph,
                  GcalModel& model, const TrainOptions& options = {});

struct Evaluation {
  Metrics metrics;
  double mean_loss = 0.0;
  std::vector<Prediction> predictions;
  std::vector<ForwardTrace> traces;
};

Evaluation Evaluate(const GcalModel& model, const Dataset& dataset, const HeteroGraph& graph,
                    std::uint64_t sample_seed, Ablation ablation = Ablation::kNone);

struct RunResult {
  std::uint64_t seed = 0;
  std::size_t train_news = 0;
  std::size_t validation_news = 0;
  TrainResult training;
  Evaluation evaluation;
};

struct ExperimentResult {
  std::vector<RunResult> runs;
  MetricSummary summary;
  Report report;
};

struct ExperimentOptions {
  // Per-run checkpoints under <root>/run_<r>/ when set.
  std::optional<std::filesystem::path> checkpoint_root;
};

// config.runs times: split (re-seeded per run when resplit_per_run), build a
// fresh model, train, evaluate on the held-out part.
ExperimentResult RunExperiment(const TrainConfig& config, const Dataset& dataset,
                               const HeteroGraph& graph, const ExperimentOptions& options = {});
ExperimentResult RunExperiment(const TrainConfig& config, const Dataset& dataset,
                               const GraphConfig& graph_config);

// One split/train/evaluate cycle with the given run seed.
RunResult RunOnce(const TrainConfig& config, const Dataset& dataset, const HeteroGraph& graph,
                  std::uint64_t run_seed,
                  const std::optional<std::filesystem::path>& checkpoint_dir = {});

std::uint64_t RunSeed(std::uint64_t base, int run);

// Report lines for one evaluation: metrics in three-decimal form plus counts.
Report DescribeMetrics(const Metrics& metrics);

}  // namespace gcal

#endif  // GCAL_TRAINER_H_
