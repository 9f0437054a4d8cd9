#include "gcal/model.h"

#include "gcal/error.h"
#include "json.hpp"

namespace gcal {
namespace {

bool EndsWith(const std::string& s, const std::string& suffix) {
  return s.size() >= suffix.size() &&
         s.compare(s.size() - suffix.size(), suffix.size(), suffix) == 0;
}

std::string LastComponent(const std::string& name) {
  const auto dot = name.rfind('.');
  return dot == std::string::npos ? name : name.substr(dot + 1);
}

}  // namespace

std::string ModelConfig::to_json() const {
  nlohmann::ordered_json j;
  j["vocab_size"] = vocab_size;
  j["d"] = d;
  j["d_word"] = d_word;
  j["word_layers"] = word_layers;
  j["word_heads"] = word_heads;
  j["word_ffn"] = word_ffn;
  j["max_sentence_words"] = max_sentence_words;
  j["max_news_sentences"] = max_news_sentences;
  j["d_graph"] = d_graph;
  j["attention_width"] = attention_width;
  j["comment_sample_size"] = comment_sample_size;
  j["user_sample_size"] = user_sample_size;
  j["readout"] = readout == AggregatorReadout::kMean ? "mean" : "last";
  j["leaky_slope"] = leaky_slope;
  j["eq11_verbatim"] = eq11_verbatim;
  j["verbatim_loss"] = verbatim_loss;
  return j.dump();
}

ModelConfig ModelConfig::from_json(const std::string& text) {
  ModelConfig c;
  try {
    const auto j = nlohmann::json::parse(text);
    c.vocab_size = j.at("vocab_size");
    c.d = j.at("d");
    c.d_word = j.at("d_word");
    c.word_layers = j.at("word_layers");
    c.word_heads = j.at("word_heads");
    c.word_ffn = j.at("word_ffn");
    c.max_sentence_words = j.at("max_sentence_words");
    c.max_news_sentences = j.at("max_news_sentences");
    c.d_graph = j.at("d_graph");
    c.attention_width = j.at("attention_width");
    c.comment_sample_size = j.at("comment_sample_size");
    c.user_sample_size = j.at("user_sample_size");
    c.readout = j.at("readout") == "last" ? AggregatorReadout::kLast : AggregatorReadout::kMean;
    c.leaky_slope = j.at("leaky_slope");
    c.eq11_verbatim = j.at("eq11_verbatim");
    c.verbatim_loss = j.at("verbatim_loss");
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::kCorruptFile, std::string("model config: ") + e.what());
  }
  return c;
}

std::string AblationName(Ablation ablation) {
  switch (ablation) {
    case Ablation::kNone:
      return "full";
    case Ablation::kNoComment:
      return "no_comment";
    case Ablation::kNoUser:
      return "no_user";
  }
  return "full";
}

GcalModel::GcalModel(const ModelConfig& config) : config_(config) {
  WordEncoderConfig wc;
  wc.vocab_size = config.vocab_size;
  wc.d_word = config.d_word;
  wc.layers = config.word_layers;
  wc.heads = config.word_heads;
  wc.ffn_hidden = config.word_ffn;
  wc.max_len = config.max_sentence_words;
  words_ = WordEncoderParams::Create(params_, wc);
  sentences_ = SentenceEncoderParams::Create(params_, config.d_word, config.d);

  HetGnnConfig gc;
  gc.d_graph = config.d_graph;
  gc.comment_sample_size = config.comment_sample_size;
  gc.user_sample_size = config.user_sample_size;
  gc.readout = config.readout;
  gc.leaky_slope = config.leaky_slope;
  const AttributeSpec spec;
  gc.user_attribute_width = spec.user_width();
  gc.comment_attribute_width = spec.comment_width();
  gnn_ = HetGnnParams::Create(params_, gc, config.d_word);

  CoAttentionConfig cc;
  cc.d = config.d;
  cc.d_graph = config.d_graph;
  cc.attention_width = config.attention_width;
  cc.eq11_verbatim = config.eq11_verbatim;
  coattention_ = CoAttentionParams::Create(params_, cc);
}

void GcalModel::initialize(std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  for (std::size_t i = 0; i < params_.size(); ++i) {
    Parameter& p = params_[i];
    const std::string last = LastComponent(p.name);
    if (EndsWith(last, "embedding") || last.rfind("null_", 0) == 0) {
      NormalInit(p, 0.02, rng);
    } else if (last.rfind("b_", 0) == 0 || EndsWith(last, "bias")) {
      p.value.setZero();
    } else {
      XavierUniform(p, rng);
    }
  }
}

void GcalModel::save(const std::filesystem::path& path) const {
  SaveCheckpoint(path, params_, config_.to_json());
}

GcalModel GcalModel::load(const std::filesystem::path& path) {
  GcalModel model(ModelConfig::from_json(ReadCheckpointMeta(path)));
  LoadCheckpoint(path, model.params_);
  return model;
}

NewsForward ForwardNews(Tape& tape, const GcalModel& model, const HeteroGraph& graph,
                        const NewsItem& news, const ForwardOptions& options) {
  NewsForward out;
  out.content = EncodeContent(tape, model.words(), model.sentences(), news.sentences,
                              model.config().max_news_sentences);

  const auto comments = graph.comments_of_news(news.id);
  if (comments.empty()) {
    out.c_prime = tape.param(*model.coattention().null_comment);
  } else {
    NodeEmbedder embedder(tape, graph, model.gnn(), model.words(), options.sample_seed);
    std::vector<Var> comment_rows;
    std::vector<Var> user_rows;
    for (NodeId c : comments) {
      out.comment_ids.push_back(graph.node(c).id);
      comment_rows.push_back(embedder.embed(c));
      const auto author = graph.neighbors(c, NodeKind::kUser);
      user_rows.push_back(embedder.embed(author.front()));
      out.mixture_weights.push_back(embedder.mixture_weights(c));
      out.mixture_weights.push_back(embedder.mixture_weights(author.front()));
    }
    auto stack = [](const std::vector<Var>& rows) {
      return rows.size() == 1 ? rows.front() : ops::concat(rows, ops::Axis::kRows);
    };
    Var comment_matrix = stack(comment_rows);
    Var user_matrix = stack(user_rows);
    const Eigen::Index k = comment_matrix.rows();
    if (options.ablation == Ablation::kNoComment) {
      comment_matrix = tape.constant(DenseMatrix::Zero(k, model.config().d_graph));
    } else if (options.ablation == Ablation::kNoUser) {
      user_matrix = tape.constant(DenseMatrix::Zero(k, model.config().d_graph));
    }
    out.c_prime = UserCommentConcat(tape, user_matrix, comment_matrix,
                                    tape.param(*model.coattention().concat_projection),
                                    tape.param(*model.coattention().concat_bias));
  }
  out.head = CoAttend(tape, model.coattention(), out.content.sentences, out.c_prime);
  return out;
}

Var NewsLoss(Tape& tape, const GcalModel& model, const NewsForward& forward, Label label) {
  const double clamp = model.coattention().config.probability_clamp;
  const int y = static_cast<int>(label);
  return model.config().verbatim_loss ? Loss(tape, forward.y_hat(), y, clamp)
                                      : CrossEntropyLoss(tape, forward.y_hat(), y, clamp);
}

}  // namespace gcal
