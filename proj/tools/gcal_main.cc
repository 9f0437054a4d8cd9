#include <chrono>
#include <cstdlib>
#include <ctime>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "gcal/container.h"
#include "gcal/data_model.h"
#include "gcal/error.h"
#include "gcal/explainer.h"
#include "gcal/graph.h"
#include "gcal/model.h"
#include "gcal/report.h"
#include "gcal/selftest.h"
#include "gcal/synthetic.h"
#include "gcal/trainer.h"

namespace fs = std::filesystem;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitSelfTestFailed = 1;
constexpr int kExitUsage = 2;

class UsageError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct Timer {
  std::chrono::steady_clock::time_point start = std::chrono::steady_clock::now();
  std::time_t started = std::time(nullptr);
};

// Wall-clock data lives beside the report so the report itself is
// reproducible.
void WriteTiming(const fs::path& report_path, const Timer& timer) {
  char stamp[32];
  std::strftime(stamp, sizeof(stamp), "%Y-%m-%dT%H:%M:%SZ", std::gmtime(&timer.started));
  const double seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - timer.start).count();
  gcal::Report timing;
  timing.set("started_utc", stamp);
  timing.set("wall_seconds", seconds);
  timing.save(fs::path(report_path.string() + ".timing"));
}

void EnsureParent(const fs::path& path) {
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
}

void RequireFile(const fs::path& path, const std::string& what) {
  if (!fs::is_regular_file(path)) throw UsageError(what + " not found: " + path.string());
}

void Emit(const gcal::Report& report, const std::optional<fs::path>& path, const Timer& timer) {
  std::cout << report.str();
  if (path) {
    EnsureParent(*path);
    report.save(*path);
    WriteTiming(*path, timer);
  }
}

template <typename Enum>
CLI::Option* Choice(CLI::Option* option, const std::map<std::string, Enum>& table) {
  std::string names;
  for (const auto& entry : table) names += (names.empty() ? "" : ",") + entry.first;
  CLI::Validator validator = CLI::Transformer(table, CLI::ignore_case);
  validator.description("");
  return option->transform(validator)->type_name("{" + names + "}");
}

const std::map<std::string, gcal::Ablation> kAblations = {
    {"full", gcal::Ablation::kNone},
    {"no_comment", gcal::Ablation::kNoComment},
    {"no_user", gcal::Ablation::kNoUser}};

enum class SplitPart { kAll, kTrain, kValidation };
const std::map<std::string, SplitPart> kSplitParts = {
    {"all", SplitPart::kAll}, {"train", SplitPart::kTrain}, {"validation", SplitPart::kValidation}};

struct IngestArgs {
  fs::path data;
  std::optional<fs::path> out;
  std::optional<fs::path> report;
  bool dry_run = false;
  gcal::IngestConfig config;
};

struct GraphArgs {
  fs::path dataset;
  fs::path out;
  std::optional<fs::path> report;
  gcal::GraphConfig config;
};

struct TrainArgs {
  fs::path dataset;
  fs::path graph;
  fs::path checkpoint_dir;
  std::optional<fs::path> report;
  std::string preset = "politifact";
  gcal::TrainConfig config;
  std::optional<double> learning_rate;
};

struct EvalArgs {
  fs::path dataset;
  fs::path graph;
  fs::path checkpoint;
  std::optional<fs::path> report;
  std::optional<fs::path> traces;
  SplitPart split = SplitPart::kAll;
  double train_fraction = 0.75;
  std::uint64_t seed = 1;
  gcal::Ablation ablation = gcal::Ablation::kNone;
};

struct ExplainArgs {
  EvalArgs eval;
  std::optional<fs::path> oracle;
  bool synthetic_oracle = false;
  std::optional<fs::path> write_oracle;
  bool fake_only = false;
  std::vector<int> ks = {5, 10};
  int listed = 5;
};

struct SynthArgs {
  fs::path out;
  gcal::SyntheticConfig config;
  std::string layout = "both";
  bool explainability = false;
};

void AddEvalOptions(CLI::App* sub, EvalArgs& a) {
  sub->add_option("--dataset", a.dataset, "Dataset cache written by ingest")->required();
  sub->add_option("--graph", a.graph, "Graph cache written by graph")->required();
  sub->add_option("--checkpoint", a.checkpoint, "Model checkpoint")->required();
  sub->add_option("--report", a.report, "Report file (key = value)");
  Choice(sub->add_option("--split", a.split, "News to score: all, train or validation"),
         kSplitParts);
  sub->add_option("--train-fraction", a.train_fraction, "Train share used to rebuild the split")
      ->check(CLI::Range(0.0, 1.0));
  sub->add_option("--seed", a.seed, "Split and neighbor-sampling seed (env GCAL_SEED)");
  Choice(sub->add_option("--ablation", a.ablation, "full, no_comment or no_user"), kAblations);
}

void AddModelOptions(CLI::App* sub, gcal::ModelConfig& m) {
  sub->add_option("--d", m.d, "Sentence and co-attention width (even)");
  sub->add_option("--d-word", m.d_word, "Word vector width");
  sub->add_option("--word-layers", m.word_layers, "Self-attention layers in the word encoder");
  sub->add_option("--word-heads", m.word_heads, "Attention heads per word-encoder layer");
  sub->add_option("--word-ffn", m.word_ffn, "Word-encoder feed-forward width");
  sub->add_option("--d-graph", m.d_graph, "Node embedding width (even)");
  sub->add_option("--attention-width", m.attention_width, "Co-attention map width k_a");
  sub->add_option("--comment-sample-size", m.comment_sample_size,
                  "Sampled comment neighbors per node");
  Choice(sub->add_option("--readout", m.readout, "Bi-LSTM readout: mean or last"),
         std::map<std::string, gcal::AggregatorReadout>{{"mean", gcal::AggregatorReadout::kMean},
                                                        {"last", gcal::AggregatorReadout::kLast}});
  sub->add_flag("--eq11-verbatim", m.eq11_verbatim,
                "Use the printed comment attention-map form (needs K = N)");
  sub->add_flag("--verbatim-loss", m.verbatim_loss,
                "Train on -y log y1 - (1 - y) log(1 - y0) instead of cross-entropy");
}

gcal::Dataset LoadDataset(const fs::path& path) {
  RequireFile(path, "dataset cache");
  return gcal::LoadDatasetCache(path);
}

gcal::HeteroGraph LoadGraph(const fs::path& path, const gcal::Dataset& dataset) {
  RequireFile(path, "graph cache");
  gcal::HeteroGraph graph = gcal::HeteroGraph::load(path);
  if (graph.count(gcal::NodeKind::kUser) != dataset.users.size() ||
      graph.count(gcal::NodeKind::kComment) != dataset.comments.size()) {
    throw UsageError("graph " + path.string() + " was not built from this dataset");
  }
  return graph;
}

gcal::Dataset SelectPart(const gcal::Dataset& dataset, SplitPart part, double fraction,
                         std::uint64_t seed) {
  if (part == SplitPart::kAll) return dataset;
  auto [train, validation] = gcal::SplitDataset(dataset, fraction, seed);
  return part == SplitPart::kTrain ? train : validation;
}

int RunIngest(const IngestArgs& a) {
  Timer timer;
  if (!fs::is_directory(a.data)) throw UsageError("dataset root not found: " + a.data.string());
  for (const char* name : {"news.jsonl", "comments.jsonl", "users.jsonl"}) {
    RequireFile(a.data / name, name);
  }
  if (!a.dry_run && !a.out) throw UsageError("--out is required unless --dry-run is given");
  gcal::IngestReport ingest;
  const gcal::Dataset dataset = gcal::ParseDataset(a.data, a.config, &ingest);
  std::cout << gcal::FormatIngestReport(ingest);
  if (a.report) {
    EnsureParent(*a.report);
    gcal::WriteTextAtomic(*a.report, gcal::FormatIngestReport(ingest));
    WriteTiming(*a.report, timer);
  }
  if (!a.dry_run) {
    EnsureParent(*a.out);
    gcal::SaveDatasetCache(*a.out, dataset);
  }
  return kExitOk;
}

int RunGraph(const GraphArgs& a) {
  Timer timer;
  const gcal::Dataset dataset = LoadDataset(a.dataset);
  const gcal::HeteroGraph graph = gcal::BuildGraph(dataset, a.config);
  const gcal::ValidationReport validation = gcal::ValidateGraph(graph, a.config.max_predecessors);
  std::cout << gcal::FormatValidationReport(validation);
  if (a.report) {
    EnsureParent(*a.report);
    gcal::WriteTextAtomic(*a.report, gcal::FormatValidationReport(validation));
    WriteTiming(*a.report, timer);
  }
  if (!validation.ok()) {
    std::cerr << "error: graph failed validation\n";
    return kExitUsage;
  }
  EnsureParent(a.out);
  graph.save(a.out);
  return kExitOk;
}

int RunTrain(TrainArgs& a) {
  Timer timer;
  if (a.preset == "gossip" && !a.learning_rate) a.config.learning_rate = 0.0015;
  if (a.learning_rate) a.config.learning_rate = *a.learning_rate;
  a.config.validate();
  const gcal::Dataset dataset = LoadDataset(a.dataset);
  const gcal::HeteroGraph graph = LoadGraph(a.graph, dataset);
  a.config.model.vocab_size = static_cast<int>(dataset.vocabulary.size());
  gcal::ExperimentOptions options;
  options.checkpoint_root = a.checkpoint_dir;
  const gcal::ExperimentResult result = gcal::RunExperiment(a.config, dataset, graph, options);
  gcal::Report report;
  report.set("dataset", a.dataset.string());
  report.set("graph", a.graph.string());
  report.set("checkpoint_dir", a.checkpoint_dir.string());
  report.set("preset", a.preset);
  for (const auto& [key, value] : result.report.entries()) report.set(key, value);
  const fs::path path = a.report.value_or(a.checkpoint_dir / "train_report.txt");
  Emit(report, path, timer);
  return kExitOk;
}

int RunEval(const EvalArgs& a) {
  Timer timer;
  RequireFile(a.checkpoint, "checkpoint");
  const gcal::Dataset dataset = LoadDataset(a.dataset);
  const gcal::HeteroGraph graph = LoadGraph(a.graph, dataset);
  const gcal::GcalModel model = gcal::GcalModel::load(a.checkpoint);
  if (model.config().vocab_size != static_cast<int>(dataset.vocabulary.size())) {
    throw UsageError("checkpoint vocabulary does not match the dataset");
  }
  const gcal::Dataset part = SelectPart(dataset, a.split, a.train_fraction, a.seed);
  const gcal::Evaluation evaluation = gcal::Evaluate(model, part, graph, a.seed, a.ablation);
  gcal::Report report;
  report.set("dataset", a.dataset.string());
  report.set("checkpoint", a.checkpoint.string());
  report.set("news", part.news.size());
  report.set("ablation", gcal::AblationName(a.ablation));
  report.set("mean_loss", evaluation.mean_loss);
  report.merge("metrics", gcal::DescribeMetrics(evaluation.metrics));
  if (a.traces) {
    std::string lines;
    for (const gcal::ForwardTrace& t : evaluation.traces) lines += gcal::TraceToJson(t) + "\n";
    EnsureParent(*a.traces);
    gcal::WriteTextAtomic(*a.traces, lines);
  }
  Emit(report, a.report, timer);
  return kExitOk;
}

int RunExplain(const ExplainArgs& a) {
  Timer timer;
  if (a.oracle.has_value() == a.synthetic_oracle) {
    throw UsageError("give exactly one of --oracle FILE or --synthetic-oracle");
  }
  RequireFile(a.eval.checkpoint, "checkpoint");
  if (a.oracle) RequireFile(*a.oracle, "oracle score file");
  const gcal::Dataset dataset = LoadDataset(a.eval.dataset);
  const gcal::HeteroGraph graph = LoadGraph(a.eval.graph, dataset);
  const gcal::GcalModel model = gcal::GcalModel::load(a.eval.checkpoint);
  gcal::Dataset part = SelectPart(dataset, a.eval.split, a.eval.train_fraction, a.eval.seed);
  if (a.fake_only) {
    std::erase_if(part.news, [](const gcal::NewsItem& n) { return n.label != gcal::Label::kFake; });
  }

  gcal::OracleScores oracle;
  if (a.oracle) {
    oracle = gcal::ReadOracleScores(*a.oracle);
  } else {
    std::set<gcal::TokenId> markers;
    for (const std::string& m : gcal::SyntheticMarkers()) {
      if (dataset.vocabulary.contains(m)) markers.insert(dataset.vocabulary.id(m));
    }
    oracle = gcal::SyntheticOracle(dataset, a.eval.seed, markers);
  }
  if (a.write_oracle) {
    EnsureParent(*a.write_oracle);
    gcal::WriteOracleScores(*a.write_oracle, oracle);
  }

  const gcal::Evaluation evaluation =
      gcal::Evaluate(model, part, graph, a.eval.seed, a.eval.ablation);
  gcal::ExplainOptions options;
  options.ks = a.ks;
  options.listed_sentences = a.listed;
  const gcal::ExplainResult result = gcal::Explain(evaluation.traces, part, oracle, options);
  gcal::Report report;
  report.set("dataset", a.eval.dataset.string());
  report.set("checkpoint", a.eval.checkpoint.string());
  report.set("oracle", a.oracle ? a.oracle->string() : std::string("synthetic"));
  for (const auto& [key, value] : result.report.entries()) report.set(key, value);
  Emit(report, a.eval.report, timer);
  return kExitOk;
}

int RunSelfTest(std::uint64_t seed, const std::optional<fs::path>& path) {
  Timer timer;
  const gcal::SelfTestResult result = gcal::RunSelfTest(seed);
  gcal::Report report;
  for (const gcal::SelfTestCheck& c : result.checks) {
    report.set(c.name + ".status", c.passed ? "pass" : "fail");
    report.set(c.name + ".value", c.value);
    report.set(c.name + ".threshold", c.threshold);
    report.set(c.name + ".detail", c.detail);
  }
  report.set("result", result.ok() ? "pass" : "fail");
  Emit(report, path, timer);
  return result.ok() ? kExitOk : kExitSelfTestFailed;
}

int RunSynth(SynthArgs& a) {
  gcal::SyntheticConfig config = a.config;
  if (a.explainability) {
    const gcal::SyntheticConfig e = gcal::ExplainabilitySyntheticConfig();
    config.min_sentences = e.min_sentences;
    config.max_sentences = e.max_sentences;
    config.marker_sentences = e.marker_sentences;
  }
  config.layout =
      a.layout == "split" ? gcal::SignalLayout::kSplit : gcal::SignalLayout::kContentAndComments;
  const gcal::RawCorpus corpus = gcal::GenerateSyntheticCorpus(config);
  gcal::WriteRawCorpus(a.out, corpus);
  std::cout << "news = " << corpus.news.size() << "\n"
            << "comments = " << corpus.comments.size() << "\n"
            << "users = " << corpus.users.size() << "\n";
  return kExitOk;
}

std::string Normalize(std::string key) {
  for (char& c : key) {
    if (c == '_') c = '-';
  }
  return key;
}

// Expands "--config FILE" into "--key=value" arguments placed before the
// command-line ones, then GCAL_SEED, so explicit flags take precedence.
std::vector<std::string> ExpandArguments(CLI::App& app, int argc, char** argv) {
  std::vector<std::string> args(argv + 1, argv + argc);
  if (args.empty()) return args;
  CLI::App* sub = nullptr;
  std::size_t sub_index = 0;
  for (; sub_index < args.size(); ++sub_index) {
    for (CLI::App* candidate : app.get_subcommands({})) {
      if (candidate->get_name() == args[sub_index]) sub = candidate;
    }
    if (sub != nullptr) break;
  }
  if (sub == nullptr) return args;

  std::vector<std::string> head(args.begin(), args.begin() + static_cast<long>(sub_index) + 1);
  std::vector<std::string> rest(args.begin() + static_cast<long>(sub_index) + 1, args.end());
  std::vector<std::string> from_config;
  std::vector<std::string> user;
  bool seed_given = false;
  for (std::size_t i = 0; i < rest.size(); ++i) {
    const std::string& arg = rest[i];
    if (arg == "--config" || arg.rfind("--config=", 0) == 0) {
      std::string file;
      if (arg == "--config") {
        if (i + 1 >= rest.size()) throw UsageError("--config needs a file");
        file = rest[++i];
      } else {
        file = arg.substr(9);
      }
      RequireFile(file, "config file");
      for (const auto& [raw_key, value] : gcal::ReadKeyValueFile(file)) {
        const std::string key = Normalize(raw_key);
        if (key == "config" || sub->get_option_no_throw("--" + key) == nullptr) {
          throw UsageError("unknown config key '" + raw_key + "' in " + file);
        }
        from_config.push_back("--" + key + "=" + value);
      }
      continue;
    }
    if (arg == "--seed" || arg.rfind("--seed=", 0) == 0) seed_given = true;
    user.push_back(arg);
  }
  std::vector<std::string> out = head;
  out.insert(out.end(), from_config.begin(), from_config.end());
  const char* env_seed = std::getenv("GCAL_SEED");
  if (!seed_given && env_seed != nullptr && *env_seed != '\0' &&
      sub->get_option_no_throw("--seed") != nullptr) {
    out.push_back(std::string("--seed=") + env_seed);
  }
  out.insert(out.end(), user.begin(), user.end());
  return out;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"gcal: graph and co-attention fake news detector"};
  app.require_subcommand(1);
  app.option_defaults()->multi_option_policy(CLI::MultiOptionPolicy::TakeLast);
  app.set_version_flag("--version", "gcal 0.1.0");

  const std::string config_help =
      "key = value file; keys are long flag names without dashes, flags win";
  std::string config_path;  // consumed by ExpandArguments

  IngestArgs ingest;
  auto* ingest_cmd =
      app.add_subcommand("ingest", "Validate raw JSONL files and write a dataset cache");
  ingest_cmd->add_option("--config", config_path, config_help);
  ingest_cmd
      ->add_option("--data", ingest.data, "Directory with news.jsonl, comments.jsonl, users.jsonl")
      ->required();
  ingest_cmd->add_option("--out", ingest.out, "Dataset cache to write");
  ingest_cmd->add_option("--report", ingest.report, "Ingest report file");
  ingest_cmd->add_flag("--dry-run", ingest.dry_run, "Report only; write no cache");
  ingest_cmd->add_option("--max-news-sentences", ingest.config.max_news_sentences,
                         "Sentences kept per news item");
  ingest_cmd->add_option("--max-sentence-words", ingest.config.max_sentence_words,
                         "Tokens kept per sentence");
  ingest_cmd->add_option("--max-comment-words", ingest.config.max_comment_words,
                         "Tokens kept per comment");
  ingest_cmd->add_option("--min-freq", ingest.config.min_freq, "Minimum token frequency");
  ingest_cmd->add_option("--max-malformed-fraction", ingest.config.max_malformed_fraction,
                         "Malformed-line share that aborts ingestion");

  GraphArgs graph;
  auto* graph_cmd = app.add_subcommand("graph", "Build, validate and cache the user-comment graph");
  graph_cmd->add_option("--config", config_path, config_help);
  graph_cmd->add_option("--dataset", graph.dataset, "Dataset cache")->required();
  graph_cmd->add_option("--out", graph.out, "Graph cache to write")->required();
  graph_cmd->add_option("--report", graph.report, "Validation report file");
  graph_cmd->add_option("--max-predecessors", graph.config.max_predecessors,
                        "Earlier comments linked per comment");
  Choice(graph_cmd->add_option("--policy", graph.config.predecessor_policy,
                               "Predecessor choice: nearest or seeded_random"),
         std::map<std::string, gcal::PredecessorPolicy>{
             {"nearest", gcal::PredecessorPolicy::kNearest},
             {"seeded_random", gcal::PredecessorPolicy::kSeededRandom}});
  graph_cmd->add_option("--seed", graph.config.seed, "Seed for seeded_random (env GCAL_SEED)");
  graph_cmd->add_option("--max-user-text-words", graph.config.max_user_text_words,
                        "Tokens of user text kept");

  TrainArgs train;
  auto* train_cmd = app.add_subcommand("train", "Train, checkpoint and evaluate on held-out news");
  train_cmd->add_option("--config", config_path, config_help);
  train_cmd->add_option("--dataset", train.dataset, "Dataset cache")->required();
  train_cmd->add_option("--graph", train.graph, "Graph cache")->required();
  train_cmd->add_option("--checkpoint-dir", train.checkpoint_dir, "Checkpoint directory")
      ->required();
  train_cmd->add_option("--report", train.report,
                        "Report file (default <checkpoint-dir>/train_report.txt)");
  train_cmd->add_option("--preset", train.preset, "politifact (lr 0.0002) or gossip (lr 0.0015)")
      ->check(CLI::IsMember({"politifact", "gossip"}));
  train_cmd->add_option("--learning-rate", train.learning_rate, "Step size (> 0)");
  train_cmd->add_option("--epochs", train.config.epochs, "Epochs per run");
  train_cmd->add_option("--seed", train.config.seed, "Base seed (env GCAL_SEED)");
  Choice(train_cmd->add_option("--optimizer", train.config.optimizer, "adam or sgd"),
         std::map<std::string, gcal::OptimizerKind>{{"adam", gcal::OptimizerKind::kAdam},
                                                    {"sgd", gcal::OptimizerKind::kSgd}});
  train_cmd->add_option("--batch-size", train.config.batch_size, "News per optimizer step");
  train_cmd->add_option("--runs", train.config.runs, "Independent runs averaged in the report");
  train_cmd->add_option("--train-fraction", train.config.train_fraction,
                        "Train share of each split");
  train_cmd->add_option("--resplit-per-run", train.config.resplit_per_run,
                        "Draw a new split for every run (true/false)");
  train_cmd->add_option("--patience", train.config.patience,
                        "Early-stop patience on validation loss; 0 disables");
  Choice(train_cmd->add_option("--ablation", train.config.ablation, "full, no_comment or no_user"),
         kAblations);
  AddModelOptions(train_cmd, train.config.model);

  EvalArgs eval;
  auto* eval_cmd = app.add_subcommand("eval", "Score news with a checkpoint");
  eval_cmd->add_option("--config", config_path, config_help);
  AddEvalOptions(eval_cmd, eval);
  eval_cmd->add_option("--traces", eval.traces, "JSONL file for per-news forward traces");

  ExplainArgs explain;
  auto* explain_cmd =
      app.add_subcommand("explain", "Rank sentences and score them against an oracle");
  explain_cmd->add_option("--config", config_path, config_help);
  AddEvalOptions(explain_cmd, explain.eval);
  explain_cmd->add_option("--oracle", explain.oracle, "JSONL oracle scores {news_id, scores}");
  explain_cmd->add_flag("--synthetic-oracle", explain.synthetic_oracle,
                        "Score sentences by planted markers (seeded random without markers)");
  explain_cmd->add_option("--write-oracle", explain.write_oracle, "Save the oracle scores used");
  explain_cmd->add_flag("--fake-only", explain.fake_only, "Explain fake-labelled news only");
  explain_cmd->add_option("--k", explain.ks, "Ranking depths")->delimiter(',');
  explain_cmd->add_option("--listed", explain.listed, "Top sentences listed per news");

  std::uint64_t selftest_seed = 1;
  std::optional<fs::path> selftest_report;
  auto* selftest_cmd = app.add_subcommand("selftest", "Gradient, normalization and oracle checks");
  selftest_cmd->add_option("--config", config_path, config_help);
  selftest_cmd->add_option("--seed", selftest_seed, "Seed (env GCAL_SEED)");
  selftest_cmd->add_option("--report", selftest_report, "Report file");

  SynthArgs synth;
  auto* synth_cmd = app.add_subcommand("synth", "Write a planted-signal corpus as JSONL");
  synth_cmd->add_option("--config", config_path, config_help);
  synth_cmd->add_option("--out", synth.out, "Output directory")->required();
  synth_cmd->add_option("--news", synth.config.news, "News items");
  synth_cmd->add_option("--users", synth.config.users, "User pool size");
  synth_cmd->add_option("--seed", synth.config.seed, "Seed (env GCAL_SEED)");
  synth_cmd->add_option("--layout", synth.layout, "both or split")
      ->check(CLI::IsMember({"both", "split"}));
  synth_cmd->add_flag("--explainability", synth.explainability,
                      "Longer news with five marker sentences per fake item");

  try {
    std::vector<std::string> args = ExpandArguments(app, argc, argv);
    std::reverse(args.begin(), args.end());
    app.parse(args);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForVersion& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kExitUsage;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitUsage;
  }

  try {
    if (*ingest_cmd) return RunIngest(ingest);
    if (*graph_cmd) return RunGraph(graph);
    if (*train_cmd) return RunTrain(train);
    if (*eval_cmd) return RunEval(eval);
    if (*explain_cmd) return RunExplain(explain);
    if (*selftest_cmd) return RunSelfTest(selftest_seed, selftest_report);
    if (*synth_cmd) return RunSynth(synth);
  } catch (const UsageError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitUsage;
  } catch (const gcal::Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitUsage;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitUsage;
  }
  return kExitUsage;
}
