#ifndef GCAL_GRAPH_H_
#define GCAL_GRAPH_H_

// Heterogeneous user/comment graph.
//
// Node table: one USER node per user, one COMMENT node per comment. Users come
// first, then comments, each block in ascending string-id order, so NodeId
// order agrees with id order inside a kind.
//
// Relations:
//   USER_COMMENT     author edge; every comment has exactly one.
//   COMMENT_COMMENT  each comment links to the (up to) ten comments of the
//                    same news released before it. Stored directed as
//                    predecessor lists and undirected for aggregation.
//
// Nodes carry their own payload (attribute one-hot, token ids) so the graph
// alone is enough to embed any node.

#include <cstdint>
#include <filesystem>
#include <map>
#include <span>
#include <string>
#include <unordered_map>
#include <vector>

#include "gcal/data_model.h"

namespace gcal {

enum class NodeKind : std::uint8_t { kUser = 0, kComment = 1 };
using NodeId = std::uint32_t;

std::string NodeKindName(NodeKind kind);

struct GraphNode {
  NodeKind kind = NodeKind::kUser;
  std::string id;
  std::vector<double> attributes;  // one-hot, see EncodeAttributes
  // Comment tokens, or for users the concatenation of their comments in
  // (timestamp, id) order truncated to the text limit.
  std::vector<TokenId> tokens;
  std::string news_id;  // comments only
  std::int64_t timestamp = 0;

  bool operator==(const GraphNode&) const = default;
};

enum class PredecessorPolicy { kNearest, kSeededRandom };

struct GraphConfig {
  int max_predecessors = 10;
  PredecessorPolicy predecessor_policy = PredecessorPolicy::kNearest;
  std::uint64_t seed = 0;  // used by kSeededRandom only
  int max_user_text_words = 50;
  AttributeSpec attributes;
};

class HeteroGraph {
 public:
  std::size_t size() const { return nodes_.size(); }
  std::size_t count(NodeKind kind) const;
  const GraphNode& node(NodeId id) const { return nodes_.at(id); }
  const std::vector<GraphNode>& nodes() const { return nodes_; }

  // Neighbors of the given kind, ascending NodeId. COMMENT_COMMENT is
  // undirected here.
  std::span<const NodeId> neighbors(NodeId id, NodeKind kind) const;
  // Directed predecessor edges of a comment, nearest in time first.
  std::span<const NodeId> predecessors(NodeId id) const { return predecessors_.at(id); }

  // Comment nodes of a news item in (timestamp, id) order; empty if none.
  std::span<const NodeId> comments_of_news(const std::string& news_id) const;

  NodeId find(NodeKind kind, const std::string& id) const;  // throws if absent
  bool contains(NodeKind kind, const std::string& id) const;

  // Edge counts: USER_COMMENT edges and undirected COMMENT_COMMENT edges.
  std::size_t user_comment_edges() const;
  std::size_t comment_comment_edges() const;

  // Deterministic binary serialization (container kind "graph").
  std::vector<std::uint8_t> serialize() const;
  static HeteroGraph deserialize(const std::vector<std::uint8_t>& bytes);
  void save(const std::filesystem::path& path) const;
  static HeteroGraph load(const std::filesystem::path& path);

  // Adds an extra author edge to a comment; for fault-injection tests of
  // ValidateGraph only.
  void inject_user_edge_for_testing(NodeId comment, NodeId user);

  bool operator==(const HeteroGraph&) const = default;

 private:
  friend HeteroGraph BuildGraph(const Dataset&, const GraphConfig&);

  void index();

  std::vector<GraphNode> nodes_;
  std::vector<std::vector<NodeId>> user_neighbors_;
  std::vector<std::vector<NodeId>> comment_neighbors_;
  std::vector<std::vector<NodeId>> predecessors_;
  std::map<std::string, std::vector<NodeId>> news_comments_;
  std::unordered_map<std::string, NodeId> user_index_;
  std::unordered_map<std::string, NodeId> comment_index_;
};

HeteroGraph BuildGraph(const Dataset& dataset, const GraphConfig& config = {});

// Returns every neighbor of `kind` when there are at most `sample_size`,
// otherwise a uniform sample without replacement seeded by (seed, node,
// kind). Output is in ascending NodeId order.
std::vector<NodeId> SampleNeighbors(const HeteroGraph& graph, NodeId node, NodeKind kind,
                                    int sample_size, std::uint64_t seed);

struct ValidationReport {
  std::size_t user_nodes = 0;
  std::size_t comment_nodes = 0;
  std::size_t user_comment_edges = 0;
  std::size_t comment_comment_edges = 0;
  std::size_t isolated_nodes = 0;
  // degree -> node count
  std::map<std::size_t, std::size_t> user_degree_histogram;
  std::map<std::size_t, std::size_t> comment_degree_histogram;
  std::vector<std::string> violations;

  bool ok() const { return violations.empty(); }
};

ValidationReport ValidateGraph(const HeteroGraph& graph, int max_predecessors = 10);
std::string FormatValidationReport(const ValidationReport& report);

}  // namespace gcal

#endif  // GCAL_GRAPH_H_
