#ifndef GCAL_HET_GNN_H_
#define GCAL_HET_GNN_H_

// Heterogeneous graph encoder for user and comment nodes.
//
// For a node j the base feature is the elementwise mean of its projected
// attribute one-hot A_j and its projected text vector W_j (word encoder plus
// word attention over the node's tokens). Sampled neighbors of each kind are
// run through a per-kind Bi-LSTM and read out as one vector, and the node's
// own feature is mixed with the two per-kind aggregates by a softmax over
// LeakyReLU(u . [neighbor_agg, self]).

#include <cstdint>
#include <filesystem>
#include <map>
#include <string>
#include <unordered_map>
#include <vector>

#include "gcal/content_encoder.h"
#include "gcal/graph.h"
#include "gcal/parameters.h"
#include "gcal/tensor.h"

namespace gcal {

enum class AggregatorReadout { kMean, kLast };

struct HetGnnConfig {
  int d_graph = 200;
  int comment_sample_size = 10;
  int user_sample_size = 1;
  AggregatorReadout readout = AggregatorReadout::kMean;
  double leaky_slope = 0.01;
  int user_attribute_width = 23;
  int comment_attribute_width = 21;
};

struct LstmParams {
  // Row-vector convention: gate = x * W + h * U + b.
  Parameter* w_input = nullptr;
  Parameter* u_input = nullptr;
  Parameter* b_input = nullptr;
  Parameter* w_forget = nullptr;
  Parameter* u_forget = nullptr;
  Parameter* b_forget = nullptr;
  Parameter* w_output = nullptr;
  Parameter* u_output = nullptr;
  Parameter* b_output = nullptr;
  Parameter* w_cell = nullptr;
  Parameter* u_cell = nullptr;
  Parameter* b_cell = nullptr;

  static LstmParams Create(ParameterSet& set, int input, int hidden, const std::string& prefix);
  int hidden() const { return static_cast<int>(u_input->value.rows()); }
};

struct BiLstmParams {
  LstmParams forward;
  LstmParams backward;

  static BiLstmParams Create(ParameterSet& set, int input, int hidden, const std::string& prefix);
};

struct HetGnnParams {
  HetGnnConfig config;
  Parameter* user_attribute_projection = nullptr;     // 23 x d_graph
  Parameter* comment_attribute_projection = nullptr;  // 21 x d_graph
  Parameter* text_projection = nullptr;               // d_word x d_graph
  Parameter* null_text = nullptr;                     // 1 x d_graph
  BiLstmParams comment_aggregator;
  BiLstmParams user_aggregator;
  Parameter* mixture = nullptr;  // u, 1 x 2 d_graph

  static HetGnnParams Create(ParameterSet& set, const HetGnnConfig& config, int d_word,
                             const std::string& prefix = "gnn");
};

struct LstmState {
  Var h;
  Var c;
};

// i, f, o = sigmoid(.), g = tanh(.); c' = f c + i g; h' = o tanh(c').
LstmState LstmStep(Tape& tape, const LstmParams& params, Var x, LstmState state);

// Bi-LSTM over the ordered neighbor features. kMean averages the per-step
// [forward, backward] states over time; kLast concatenates the final state of
// each direction. An empty list yields a zero vector of width
// 2 * hidden.
Var AggregateSameType(Tape& tape, const std::vector<Var>& neighbors, const BiLstmParams& params,
                      AggregatorReadout readout);

struct MixtureResult {
  Var embedding;  // 1 x d_graph
  Var weights;    // 1 x 3, order (self, comment, user)
};

MixtureResult TypesMixture(Tape& tape, Var self, Var comment_agg, Var user_agg, Var u,
                           double slope);

// Embeds nodes onto one tape, memoizing per-node features so a node shared
// by several neighborhoods is encoded once.
class NodeEmbedder {
 public:
  NodeEmbedder(Tape& tape, const HeteroGraph& graph, const HetGnnParams& params,
               const WordEncoderParams& words, std::uint64_t seed);

  // N_j = (A_j + W_j) / 2, memoized per node for the lifetime of the tape.
  Var features(NodeId node);
  Var attribute_vector(NodeId node);
  Var text_vector(NodeId node);
  // Final embedding v_j, memoized.
  Var embed(NodeId node);
  // Mixture weights of the last embed() of `node` (1 x 3).
  Var mixture_weights(NodeId node) const { return weights_.at(node); }

 private:
  Tape& tape_;
  const HeteroGraph& graph_;
  const HetGnnParams& params_;
  const WordEncoderParams& words_;
  std::uint64_t seed_;
  std::unordered_map<NodeId, Var> features_;
  std::unordered_map<NodeId, Var> embeddings_;
  std::unordered_map<NodeId, Var> weights_;
};

// id -> 1 x d_graph embedding for every node, users and comments.
struct NodeEmbeddings {
  std::map<std::string, DenseMatrix> users;
  std::map<std::string, DenseMatrix> comments;

  bool operator==(const NodeEmbeddings&) const = default;
};

NodeEmbeddings EmbedAllNodes(const HeteroGraph& graph, const HetGnnParams& params,
                             const WordEncoderParams& words, std::uint64_t seed);

// Checkpoint container keyed by "user:<id>" / "comment:<id>".
void SaveNodeEmbeddings(const std::filesystem::path& path, const NodeEmbeddings& embeddings);
NodeEmbeddings LoadNodeEmbeddings(const std::filesystem::path& path);

}  // namespace gcal

#endif  // GCAL_HET_GNN_H_
