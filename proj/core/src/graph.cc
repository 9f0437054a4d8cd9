#include "gcal/graph.h"

#include <algorithm>
#include <set>
#include <sstream>

#include "gcal/container.h"
#include "gcal/error.h"
#include "gcal/random.h"
#include "json.hpp"

namespace gcal {
namespace {

constexpr std::uint32_t kGraphFormatVersion = 1;

void WriteIds(ByteWriter& w, const std::vector<NodeId>& ids) {
  w.u32(static_cast<std::uint32_t>(ids.size()));
  for (NodeId id : ids) w.u32(id);
}

std::vector<NodeId> ReadIds(ByteReader& r) {
  std::vector<NodeId> ids(r.u32());
  for (NodeId& id : ids) id = r.u32();
  return ids;
}

bool Earlier(const GraphNode& a, const GraphNode& b) {
  return std::tie(a.timestamp, a.id) < std::tie(b.timestamp, b.id);
}

}  // namespace

std::string NodeKindName(NodeKind kind) { return kind == NodeKind::kUser ? "USER" : "COMMENT"; }

std::size_t HeteroGraph::count(NodeKind kind) const {
  return static_cast<std::size_t>(std::count_if(
      nodes_.begin(), nodes_.end(), [kind](const GraphNode& n) { return n.kind == kind; }));
}

std::span<const NodeId> HeteroGraph::neighbors(NodeId id, NodeKind kind) const {
  return kind == NodeKind::kUser ? std::span<const NodeId>(user_neighbors_.at(id))
                                 : std::span<const NodeId>(comment_neighbors_.at(id));
}

std::span<const NodeId> HeteroGraph::comments_of_news(const std::string& news_id) const {
  auto it = news_comments_.find(news_id);
  if (it == news_comments_.end()) return {};
  return it->second;
}

NodeId HeteroGraph::find(NodeKind kind, const std::string& id) const {
  const auto& index = kind == NodeKind::kUser ? user_index_ : comment_index_;
  auto it = index.find(id);
  if (it == index.end()) {
    throw Error(ErrorCode::kInvalidArgument, "no " + NodeKindName(kind) + " node with id " + id);
  }
  return it->second;
}

bool HeteroGraph::contains(NodeKind kind, const std::string& id) const {
  const auto& index = kind == NodeKind::kUser ? user_index_ : comment_index_;
  return index.count(id) > 0;
}

std::size_t HeteroGraph::user_comment_edges() const {
  std::size_t n = 0;
  for (std::size_t i = 0; i < nodes_.size(); ++i) {
    if (nodes_[i].kind == NodeKind::kComment) n += user_neighbors_[i].size();
  }
  return n;
}

std::size_t HeteroGraph::comment_comment_edges() const {
  std::size_t n = 0;
  for (std::size_t i = 0; i < nodes_.size(); ++i) {
    if (nodes_[i].kind == NodeKind::kComment) n += comment_neighbors_[i].size();
  }
  return n / 2;
}

void HeteroGraph::index() {
  user_index_.clear();
  comment_index_.clear();
  news_comments_.clear();
  for (NodeId i = 0; i < nodes_.size(); ++i) {
    const GraphNode& n = nodes_[i];
    if (n.kind == NodeKind::kUser) {
      user_index_.emplace(n.id, i);
    } else {
      comment_index_.emplace(n.id, i);
      news_comments_[n.news_id].push_back(i);
    }
  }
  for (auto& [news_id, list] : news_comments_) {
    std::sort(list.begin(), list.end(),
              [this](NodeId a, NodeId b) { return Earlier(nodes_[a], nodes_[b]); });
  }
}

void HeteroGraph::inject_user_edge_for_testing(NodeId comment, NodeId user) {
  auto& list = user_neighbors_.at(comment);
  list.push_back(user);
  std::sort(list.begin(), list.end());
}

HeteroGraph BuildGraph(const Dataset& dataset, const GraphConfig& config) {
  HeteroGraph g;
  const auto by_news = dataset.comments_by_news();

  // Users: text is the concatenation of their comments in time order.
  std::map<std::string, std::vector<const Comment*>> by_user;
  for (const auto& [news_id, list] : by_news) {
    for (const Comment* c : list) by_user[c->user_id].push_back(c);
  }
  for (const auto& [id, user] : dataset.users) {
    GraphNode node;
    node.kind = NodeKind::kUser;
    node.id = id;
    node.attributes = EncodeAttributes(user, config.attributes);
    auto it = by_user.find(id);
    if (it != by_user.end()) {
      std::vector<const Comment*> list = it->second;
      std::sort(list.begin(), list.end(), [](const Comment* a, const Comment* b) {
        return std::tie(a->timestamp, a->id) < std::tie(b->timestamp, b->id);
      });
      for (const Comment* c : list) {
        for (TokenId t : c->tokens) {
          if (static_cast<int>(node.tokens.size()) == config.max_user_text_words) break;
          node.tokens.push_back(t);
        }
      }
    }
    g.nodes_.push_back(std::move(node));
  }
  for (const auto& [id, comment] : dataset.comments) {
    GraphNode node;
    node.kind = NodeKind::kComment;
    node.id = id;
    node.attributes = EncodeAttributes(comment, config.attributes);
    node.tokens = comment.tokens;
    node.news_id = comment.news_id;
    node.timestamp = comment.timestamp;
    g.nodes_.push_back(std::move(node));
  }
  g.index();

  const std::size_t n = g.nodes_.size();
  g.user_neighbors_.assign(n, {});
  g.comment_neighbors_.assign(n, {});
  g.predecessors_.assign(n, {});

  for (const auto& [id, comment] : dataset.comments) {
    const NodeId c = g.comment_index_.at(id);
    const NodeId u = g.user_index_.at(comment.user_id);
    g.user_neighbors_[c].push_back(u);
    g.comment_neighbors_[u].push_back(c);
  }

  for (const auto& [news_id, order] : g.news_comments_) {
    for (std::size_t p = 0; p < order.size(); ++p) {
      std::vector<NodeId>& preds = g.predecessors_[order[p]];
      if (config.predecessor_policy == PredecessorPolicy::kNearest ||
          p <= static_cast<std::size_t>(config.max_predecessors)) {
        for (std::size_t k = p;
             k > 0 && preds.size() < static_cast<std::size_t>(config.max_predecessors); --k) {
          preds.push_back(order[k - 1]);
        }
      } else {
        std::vector<std::size_t> positions(p);
        for (std::size_t k = 0; k < p; ++k) positions[k] = k;
        std::mt19937_64 rng(MixSeed(config.seed, order[p]));
        Shuffle(positions, rng);
        positions.resize(static_cast<std::size_t>(config.max_predecessors));
        std::sort(positions.rbegin(), positions.rend());
        for (std::size_t k : positions) preds.push_back(order[k]);
      }
      for (NodeId q : preds) {
        g.comment_neighbors_[order[p]].push_back(q);
        g.comment_neighbors_[q].push_back(order[p]);
      }
    }
  }
  for (std::size_t i = 0; i < n; ++i) {
    auto& cn = g.comment_neighbors_[i];
    std::sort(cn.begin(), cn.end());
    cn.erase(std::unique(cn.begin(), cn.end()), cn.end());
    std::sort(g.user_neighbors_[i].begin(), g.user_neighbors_[i].end());
  }
  return g;
}

std::vector<NodeId> SampleNeighbors(const HeteroGraph& graph, NodeId node, NodeKind kind,
                                    int sample_size, std::uint64_t seed) {
  if (sample_size < 1) {
    throw Error(ErrorCode::kInvalidArgument, "sample_size must be >= 1");
  }
  const std::span<const NodeId> all = graph.neighbors(node, kind);
  std::vector<NodeId> out(all.begin(), all.end());
  if (out.size() <= static_cast<std::size_t>(sample_size)) return out;
  std::mt19937_64 rng(MixSeed(MixSeed(seed, node), static_cast<std::uint64_t>(kind) + 1));
  // Partial Fisher-Yates: the first sample_size slots become the sample.
  for (std::size_t i = 0; i < static_cast<std::size_t>(sample_size); ++i) {
    const std::size_t j = i + UniformIndex(rng, out.size() - i);
    std::swap(out[i], out[j]);
  }
  out.resize(static_cast<std::size_t>(sample_size));
  std::sort(out.begin(), out.end());
  return out;
}

std::vector<std::uint8_t> HeteroGraph::serialize() const {
  ByteWriter w;
  w.u32(kGraphFormatVersion);
  w.u32(static_cast<std::uint32_t>(nodes_.size()));
  for (const GraphNode& n : nodes_) {
    w.u8(static_cast<std::uint8_t>(n.kind));
    w.str(n.id);
    w.str(n.news_id);
    w.i64(n.timestamp);
    w.u32(static_cast<std::uint32_t>(n.attributes.size()));
    for (double a : n.attributes) w.f64(a);
    w.u32(static_cast<std::uint32_t>(n.tokens.size()));
    for (TokenId t : n.tokens) w.u32(static_cast<std::uint32_t>(t));
  }
  for (std::size_t i = 0; i < nodes_.size(); ++i) {
    WriteIds(w, user_neighbors_[i]);
    WriteIds(w, comment_neighbors_[i]);
    WriteIds(w, predecessors_[i]);
  }
  return std::move(w.bytes());
}

HeteroGraph HeteroGraph::deserialize(const std::vector<std::uint8_t>& bytes) {
  ByteReader r(bytes);
  if (r.u32() != kGraphFormatVersion) {
    throw Error(ErrorCode::kCorruptFile, "unsupported graph format version");
  }
  HeteroGraph g;
  const std::uint32_t n = r.u32();
  g.nodes_.resize(n);
  for (GraphNode& node : g.nodes_) {
    const std::uint8_t kind = r.u8();
    if (kind > 1) throw Error(ErrorCode::kCorruptFile, "bad node kind");
    node.kind = static_cast<NodeKind>(kind);
    node.id = r.str();
    node.news_id = r.str();
    node.timestamp = r.i64();
    node.attributes.resize(r.u32());
    for (double& a : node.attributes) a = r.f64();
    node.tokens.resize(r.u32());
    for (TokenId& t : node.tokens) t = static_cast<TokenId>(r.u32());
  }
  g.user_neighbors_.resize(n);
  g.comment_neighbors_.resize(n);
  g.predecessors_.resize(n);
  for (std::uint32_t i = 0; i < n; ++i) {
    g.user_neighbors_[i] = ReadIds(r);
    g.comment_neighbors_[i] = ReadIds(r);
    g.predecessors_[i] = ReadIds(r);
    for (const auto* list :
         {&g.user_neighbors_[i], &g.comment_neighbors_[i], &g.predecessors_[i]}) {
      for (NodeId id : *list) {
        if (id >= n) throw Error(ErrorCode::kCorruptFile, "edge to unknown node");
      }
    }
  }
  if (!r.done()) throw Error(ErrorCode::kCorruptFile, "trailing bytes in graph payload");
  g.index();
  return g;
}

void HeteroGraph::save(const std::filesystem::path& path) const {
  nlohmann::ordered_json manifest;
  manifest["counts"] = {{"user_nodes", count(NodeKind::kUser)},
                        {"comment_nodes", count(NodeKind::kComment)},
                        {"user_comment_edges", user_comment_edges()},
                        {"comment_comment_edges", comment_comment_edges()}};
  Container c;
  c.kind = "graph";
  c.format_version = static_cast<int>(kGraphFormatVersion);
  c.manifest_json = manifest.dump();
  c.payload = serialize();
  WriteContainer(path, c);
}

HeteroGraph HeteroGraph::load(const std::filesystem::path& path) {
  return deserialize(ReadContainer(path, "graph").payload);
}

ValidationReport ValidateGraph(const HeteroGraph& graph, int max_predecessors) {
  ValidationReport report;
  report.user_nodes = graph.count(NodeKind::kUser);
  report.comment_nodes = graph.count(NodeKind::kComment);
  report.user_comment_edges = graph.user_comment_edges();
  report.comment_comment_edges = graph.comment_comment_edges();

  auto violate = [&report](const std::string& what, const GraphNode& node) {
    report.violations.push_back(what + " at " + NodeKindName(node.kind) + " " + node.id);
  };
  auto has = [](std::span<const NodeId> list, NodeId id) {
    return std::binary_search(list.begin(), list.end(), id);
  };

  for (NodeId i = 0; i < graph.size(); ++i) {
    const GraphNode& node = graph.node(i);
    const auto users = graph.neighbors(i, NodeKind::kUser);
    const auto comments = graph.neighbors(i, NodeKind::kComment);
    const std::size_t degree = users.size() + comments.size();
    if (degree == 0) ++report.isolated_nodes;

    for (NodeId u : users) {
      if (graph.node(u).kind != NodeKind::kUser) violate("user list holds a comment", node);
    }
    for (NodeId c : comments) {
      if (graph.node(c).kind != NodeKind::kComment) violate("comment list holds a user", node);
    }

    if (node.kind == NodeKind::kUser) {
      ++report.user_degree_histogram[degree];
      if (!users.empty()) violate("user-user edge", node);
      for (NodeId c : comments) {
        if (!has(graph.neighbors(c, NodeKind::kUser), i)) {
          violate("user-comment edge not mirrored", node);
        }
      }
      continue;
    }

    ++report.comment_degree_histogram[degree];
    if (users.size() != 1) violate("comment-user not one-to-one", node);
    for (NodeId u : users) {
      if (!has(graph.neighbors(u, NodeKind::kComment), i)) {
        violate("user-comment edge not mirrored", node);
      }
    }
    const auto preds = graph.predecessors(i);
    if (preds.size() > static_cast<std::size_t>(max_predecessors)) {
      violate("more than " + std::to_string(max_predecessors) + " predecessors", node);
    }
    for (NodeId p : preds) {
      const GraphNode& q = graph.node(p);
      if (q.news_id != node.news_id) violate("predecessor edge crosses news", node);
      if (!Earlier(q, node)) violate("predecessor is not earlier", node);
      if (!has(comments, p)) violate("predecessor missing from neighbor list", node);
    }
    for (NodeId c : comments) {
      if (c == i) violate("comment self loop", node);
      if (graph.node(c).news_id != node.news_id) violate("comment-comment edge crosses news", node);
      if (!has(graph.neighbors(c, NodeKind::kComment), i)) {
        violate("comment-comment edge not symmetric", node);
      }
      const auto back = graph.predecessors(c);
      const bool linked = std::find(preds.begin(), preds.end(), c) != preds.end() ||
                          std::find(back.begin(), back.end(), i) != back.end();
      if (!linked) violate("comment-comment edge without predecessor relation", node);
    }
  }
  return report;
}

std::string FormatValidationReport(const ValidationReport& r) {
  std::ostringstream out;
  out << "user_nodes = " << r.user_nodes << "\n"
      << "comment_nodes = " << r.comment_nodes << "\n"
      << "user_comment_edges = " << r.user_comment_edges << "\n"
      << "comment_comment_edges = " << r.comment_comment_edges << "\n"
      << "isolated_nodes = " << r.isolated_nodes << "\n";
  for (const auto& [degree, count] : r.user_degree_histogram) {
    out << "user_degree." << degree << " = " << count << "\n";
  }
  for (const auto& [degree, count] : r.comment_degree_histogram) {
    out << "comment_degree." << degree << " = " << count << "\n";
  }
  out << "violations = " << r.violations.size() << "\n";
  for (const std::string& v : r.violations) out << "# " << v << "\n";
  return out.str();
}

}  // namespace gcal
