#ifndef GCAL_MODEL_H_
#define GCAL_MODEL_H_

// The full detector: content encoder, heterogeneous graph encoder and
// co-attention head sharing one parameter set.

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "gcal/co_attention.h"
#include "gcal/content_encoder.h"
#include "gcal/data_model.h"
#include "gcal/graph.h"
#include "gcal/het_gnn.h"
#include "gcal/parameters.h"

namespace gcal {

struct ModelConfig {
  int vocab_size = 2;
  int d = 200;  // sentence / co-attention width
  int d_word = 64;
  int word_layers = 2;
  int word_heads = 4;
  int word_ffn = 128;
  int max_sentence_words = 50;
  int max_news_sentences = 50;
  int d_graph = 200;
  int attention_width = 80;
  int comment_sample_size = 10;
  int user_sample_size = 1;
  AggregatorReadout readout = AggregatorReadout::kMean;
  double leaky_slope = 0.01;
  bool eq11_verbatim = false;
  // Train on the printed loss form instead of two-sided cross-entropy.
  bool verbatim_loss = false;

  std::string to_json() const;
  static ModelConfig from_json(const std::string& text);
  bool operator==(const ModelConfig&) const = default;
};

// Which half of each C' row is silenced.
enum class Ablation { kNone, kNoComment, kNoUser };

std::string AblationName(Ablation ablation);

class GcalModel {
 public:
  explicit GcalModel(const ModelConfig& config);
  GcalModel(GcalModel&&) = default;

  // Xavier-uniform matrices, N(0, 0.02) embeddings and null vectors, zero
  // biases.
  void initialize(std::uint64_t seed);

  const ModelConfig& config() const { return config_; }
  ParameterSet& params() { return params_; }
  const ParameterSet& params() const { return params_; }
  const WordEncoderParams& words() const { return words_; }
  const SentenceEncoderParams& sentences() const { return sentences_; }
  const HetGnnParams& gnn() const { return gnn_; }
  const CoAttentionParams& coattention() const { return coattention_; }

  void save(const std::filesystem::path& path) const;
  static GcalModel load(const std::filesystem::path& path);

 private:
  ModelConfig config_;
  ParameterSet params_;
  WordEncoderParams words_;
  SentenceEncoderParams sentences_;
  HetGnnParams gnn_;
  CoAttentionParams coattention_;
};

struct ForwardOptions {
  Ablation ablation = Ablation::kNone;
  std::uint64_t sample_seed = 0;
};

struct NewsForward {
  ContentEncoding content;
  Var c_prime;
  CoAttentionResult head;
  std::vector<std::string> comment_ids;
  // Types-mixture weights (1 x 3) of every comment and author embedded.
  std::vector<Var> mixture_weights;

  Var y_hat() const { return head.y_hat; }
};

// One news item end to end. Comments come from the graph in (timestamp, id)
// order; a news item without comments uses the learned null comment row.
NewsForward ForwardNews(Tape& tape, const GcalModel& model, const HeteroGraph& graph,
                        const NewsItem& news, const ForwardOptions& options = {});

Var NewsLoss(Tape& tape, const GcalModel& model, const NewsForward& forward, Label label);

}  // namespace gcal

#endif  // GCAL_MODEL_H_
