#include "gcal/het_gnn.h"

#include "gcal/error.h"

namespace gcal {

LstmParams LstmParams::Create(ParameterSet& set, int input, int hidden, const std::string& prefix) {
  LstmParams p;
  p.w_input = &set.add(prefix + ".w_input", input, hidden);
  p.u_input = &set.add(prefix + ".u_input", hidden, hidden);
  p.b_input = &set.add(prefix + ".b_input", 1, hidden);
  p.w_forget = &set.add(prefix + ".w_forget", input, hidden);
  p.u_forget = &set.add(prefix + ".u_forget", hidden, hidden);
  p.b_forget = &set.add(prefix + ".b_forget", 1, hidden);
  p.w_output = &set.add(prefix + ".w_output", input, hidden);
  p.u_output = &set.add(prefix + ".u_output", hidden, hidden);
  p.b_output = &set.add(prefix + ".b_output", 1, hidden);
  p.w_cell = &set.add(prefix + ".w_cell", input, hidden);
  p.u_cell = &set.add(prefix + ".u_cell", hidden, hidden);
  p.b_cell = &set.add(prefix + ".b_cell", 1, hidden);
  return p;
}

BiLstmParams BiLstmParams::Create(ParameterSet& set, int input, int hidden,
                                  const std::string& prefix) {
  return {LstmParams::Create(set, input, hidden, prefix + ".forward"),
          LstmParams::Create(set, input, hidden, prefix + ".backward")};
}

HetGnnParams HetGnnParams::Create(ParameterSet& set, const HetGnnConfig& config, int d_word,
                                  const std::string& prefix) {
  if (config.d_graph % 2 != 0) {
    throw Error(ErrorCode::kInvalidArgument, "d_graph must be even");
  }
  HetGnnParams p;
  p.config = config;
  const int d = config.d_graph;
  p.user_attribute_projection =
      &set.add(prefix + ".user_attribute_projection", config.user_attribute_width, d);
  p.comment_attribute_projection =
      &set.add(prefix + ".comment_attribute_projection", config.comment_attribute_width, d);
  p.text_projection = &set.add(prefix + ".text_projection", d_word, d);
  p.null_text = &set.add(prefix + ".null_text", 1, d);
  p.comment_aggregator = BiLstmParams::Create(set, d, d / 2, prefix + ".comment_aggregator");
  p.user_aggregator = BiLstmParams::Create(set, d, d / 2, prefix + ".user_aggregator");
  p.mixture = &set.add(prefix + ".mixture", 1, 2 * d);
  return p;
}

LstmState LstmStep(Tape& tape, const LstmParams& p, Var x, LstmState state) {
  using namespace ops;
  auto gate = [&](Parameter* w, Parameter* u, Parameter* b) {
    return add_row(add(matmul(x, tape.param(*w)), matmul(state.h, tape.param(*u))), tape.param(*b));
  };
  Var i = sigmoid(gate(p.w_input, p.u_input, p.b_input));
  Var f = sigmoid(gate(p.w_forget, p.u_forget, p.b_forget));
  Var o = sigmoid(gate(p.w_output, p.u_output, p.b_output));
  Var g = ops::tanh(gate(p.w_cell, p.u_cell, p.b_cell));
  Var c = add(mul(f, state.c), mul(i, g));
  return {mul(o, ops::tanh(c)), c};
}

Var AggregateSameType(Tape& tape, const std::vector<Var>& neighbors, const BiLstmParams& params,
                      AggregatorReadout readout) {
  using namespace ops;
  const int hf = params.forward.hidden();
  const int hb = params.backward.hidden();
  if (neighbors.empty()) return tape.constant(DenseMatrix::Zero(1, hf + hb));

  const std::size_t n = neighbors.size();
  std::vector<Var> forward(n);
  std::vector<Var> backward(n);
  LstmState s{tape.constant(DenseMatrix::Zero(1, hf)), tape.constant(DenseMatrix::Zero(1, hf))};
  for (std::size_t t = 0; t < n; ++t) {
    s = LstmStep(tape, params.forward, neighbors[t], s);
    forward[t] = s.h;
  }
  s = {tape.constant(DenseMatrix::Zero(1, hb)), tape.constant(DenseMatrix::Zero(1, hb))};
  for (std::size_t t = n; t > 0; --t) {
    s = LstmStep(tape, params.backward, neighbors[t - 1], s);
    backward[t - 1] = s.h;
  }
  if (readout == AggregatorReadout::kLast) {
    return concat(forward.back(), backward.front(), Axis::kCols);
  }
  std::vector<Var> steps;
  steps.reserve(n);
  for (std::size_t t = 0; t < n; ++t) {
    steps.push_back(concat(forward[t], backward[t], Axis::kCols));
  }
  return n == 1 ? steps.front() : mean_rows(concat(steps, Axis::kRows));
}

MixtureResult TypesMixture(Tape& tape, Var self, Var comment_agg, Var user_agg, Var u,
                           double slope) {
  using namespace ops;
  (void)tape;
  if (self.cols() != comment_agg.cols() || self.cols() != user_agg.cols() ||
      u.cols() != 2 * self.cols()) {
    throw Error(ErrorCode::kShapeMismatch, "types mixture operand widths disagree");
  }
  const Var pairs[] = {concat(self, self, Axis::kCols), concat(comment_agg, self, Axis::kCols),
                       concat(user_agg, self, Axis::kCols)};
  Var scores = transpose(matmul(concat(pairs, Axis::kRows), transpose(u)));  // 1 x 3
  Var weights = softmax_rows(leaky_relu(scores, slope));
  const Var rows[] = {self, comment_agg, user_agg};
  return {matmul(weights, concat(rows, Axis::kRows)), weights};
}

NodeEmbedder::NodeEmbedder(Tape& tape, const HeteroGraph& graph, const HetGnnParams& params,
                           const WordEncoderParams& words, std::uint64_t seed)
    : tape_(tape), graph_(graph), params_(params), words_(words), seed_(seed) {}

Var NodeEmbedder::attribute_vector(NodeId node) {
  const GraphNode& n = graph_.node(node);
  DenseMatrix onehot(1, static_cast<Eigen::Index>(n.attributes.size()));
  for (std::size_t i = 0; i < n.attributes.size(); ++i)
    onehot(0, static_cast<Eigen::Index>(i)) = n.attributes[i];
  Parameter& projection = n.kind == NodeKind::kUser ? *params_.user_attribute_projection
                                                    : *params_.comment_attribute_projection;
  return ops::matmul(tape_.constant(std::move(onehot)), tape_.param(projection));
}

Var NodeEmbedder::text_vector(NodeId node) {
  const GraphNode& n = graph_.node(node);
  if (n.tokens.empty()) return tape_.param(*params_.null_text);
  std::span<const TokenId> tokens(n.tokens);
  if (static_cast<int>(tokens.size()) > words_.config.max_len) {
    tokens = tokens.first(static_cast<std::size_t>(words_.config.max_len));
  }
  Var h = EncodeWords(tape_, words_, tokens);
  Var pooled = WordAttention(tape_, h, words_).sentence;
  return ops::matmul(pooled, tape_.param(*params_.text_projection));
}

Var NodeEmbedder::features(NodeId node) {
  auto it = features_.find(node);
  if (it != features_.end()) return it->second;
  Var f = ops::scale(ops::add(attribute_vector(node), text_vector(node)), 0.5);
  features_.emplace(node, f);
  return f;
}

Var NodeEmbedder::embed(NodeId node) {
  auto it = embeddings_.find(node);
  if (it != embeddings_.end()) return it->second;
  const HetGnnConfig& cfg = params_.config;
  Var self = features(node);

  auto aggregate = [&](NodeKind kind, int sample_size, const BiLstmParams& lstm) {
    std::vector<Var> feats;
    for (NodeId n : SampleNeighbors(graph_, node, kind, sample_size, seed_)) {
      feats.push_back(features(n));
    }
    return AggregateSameType(tape_, feats, lstm, cfg.readout);
  };
  Var comment_agg =
      aggregate(NodeKind::kComment, cfg.comment_sample_size, params_.comment_aggregator);
  Var user_agg = graph_.node(node).kind == NodeKind::kComment
                     ? aggregate(NodeKind::kUser, cfg.user_sample_size, params_.user_aggregator)
                     : tape_.constant(DenseMatrix::Zero(1, cfg.d_graph));
  MixtureResult mix = TypesMixture(tape_, self, comment_agg, user_agg,
                                   tape_.param(*params_.mixture), cfg.leaky_slope);
  embeddings_.emplace(node, mix.embedding);
  weights_[node] = mix.weights;
  return mix.embedding;
}

NodeEmbeddings EmbedAllNodes(const HeteroGraph& graph, const HetGnnParams& params,
                             const WordEncoderParams& words, std::uint64_t seed) {
  NodeEmbeddings out;
  for (NodeId i = 0; i < graph.size(); ++i) {
    Tape tape;
    NodeEmbedder embedder(tape, graph, params, words, seed);
    const GraphNode& node = graph.node(i);
    DenseMatrix v = embedder.embed(i).value();
    if (node.kind == NodeKind::kUser) {
      out.users.emplace(node.id, std::move(v));
    } else {
      out.comments.emplace(node.id, std::move(v));
    }
  }
  return out;
}

void SaveNodeEmbeddings(const std::filesystem::path& path, const NodeEmbeddings& embeddings) {
  ParameterSet set;
  for (const auto& [id, v] : embeddings.users) {
    set.add("user:" + id, v.rows(), v.cols()).value = v;
  }
  for (const auto& [id, v] : embeddings.comments) {
    set.add("comment:" + id, v.rows(), v.cols()).value = v;
  }
  SaveCheckpoint(path, set, R"({"content":"node_embeddings"})");
}

NodeEmbeddings LoadNodeEmbeddings(const std::filesystem::path& path) {
  const ParameterSet set = LoadCheckpointAsSet(path);
  NodeEmbeddings out;
  for (std::size_t i = 0; i < set.size(); ++i) {
    const Parameter& p = set[i];
    if (p.name.rfind("user:", 0) == 0) {
      out.users.emplace(p.name.substr(5), p.value);
    } else if (p.name.rfind("comment:", 0) == 0) {
      out.comments.emplace(p.name.substr(8), p.value);
    }
  }
  return out;
}

}  // namespace gcal
