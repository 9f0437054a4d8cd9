#include "gcal/co_attention.h"

#include "gcal/error.h"
#include "json.hpp"

namespace gcal {
namespace {

std::vector<double> RowValues(const DenseMatrix& m) {
  return std::vector<double>(m.data(), m.data() + m.size());
}

}  // namespace

CoAttentionParams CoAttentionParams::Create(ParameterSet& set, const CoAttentionConfig& config,
                                            const std::string& prefix) {
  CoAttentionParams p;
  p.config = config;
  const int d = config.d;
  const int k = config.attention_width;
  p.concat_projection = &set.add(prefix + ".concat_projection", 2 * config.d_graph, d);
  p.concat_bias = &set.add(prefix + ".concat_bias", 1, d);
  p.w_i = &set.add(prefix + ".w_i", d, d);
  p.w_s = &set.add(prefix + ".w_s", k, d);
  p.w_c = &set.add(prefix + ".w_c", k, d);
  p.w_hs = &set.add(prefix + ".w_hs", k, 1);
  p.w_hc = &set.add(prefix + ".w_hc", k, 1);
  p.w_f = &set.add(prefix + ".w_f", 2, 2 * d);
  p.b_f = &set.add(prefix + ".b_f", 1, 2);
  p.null_comment = &set.add(prefix + ".null_comment", 1, d);
  return p;
}

Var UserCommentConcat(Tape& tape, Var users, Var comments, Var projection, Var bias) {
  (void)tape;
  if (users.rows() != comments.rows()) {
    throw Error(ErrorCode::kShapeMismatch, "user rows " + std::to_string(users.rows()) +
                                               " vs comment rows " +
                                               std::to_string(comments.rows()));
  }
  Var joined = ops::concat(users, comments, ops::Axis::kCols);
  return ops::add_row(ops::matmul(joined, projection), bias);
}

Var Conformity(Tape& tape, Var c_prime, Var s, Var w_i) {
  (void)tape;
  return ops::tanh(ops::matmul(ops::matmul(c_prime, w_i), ops::transpose(s)));
}

AttentionMaps ComputeAttentionMaps(Tape& tape, Var s, Var c_prime, Var f, Var w_s, Var w_c,
                                   bool eq11_verbatim) {
  using namespace ops;
  (void)tape;
  Var s_cols = transpose(s);        // d x N
  Var c_cols = transpose(c_prime);  // d x K
  Var ws_s = matmul(w_s, s_cols);   // k_a x N
  Var wc_c = matmul(w_c, c_cols);   // k_a x K
  AttentionMaps maps;
  maps.sentence = ops::tanh(add(ws_s, matmul(wc_c, f)));
  if (eq11_verbatim) {
    maps.comment = ops::tanh(add(matmul(w_c, s_cols), matmul(matmul(w_s, c_cols), transpose(f))));
  } else {
    maps.comment = ops::tanh(add(wc_c, matmul(ws_s, transpose(f))));
  }
  return maps;
}

Var AttentionWeights(Tape& tape, Var h, Var w) {
  (void)tape;
  return ops::softmax_rows(ops::matmul(ops::transpose(w), h));
}

Var Attend(Tape& tape, Var rows, Var a) {
  (void)tape;
  if (a.rows() != 1 || a.cols() != rows.rows()) {
    throw Error(ErrorCode::kShapeMismatch, "attention weights do not match row count");
  }
  return ops::matmul(a, rows);
}

Var Predict(Tape& tape, Var s_hat, Var c_hat, Var w_f, Var b_f) {
  (void)tape;
  Var joined = ops::concat(s_hat, c_hat, ops::Axis::kCols);
  return ops::softmax_rows(ops::add_row(ops::matmul(joined, ops::transpose(w_f)), b_f));
}

Var Loss(Tape& tape, Var y_hat, int label, double clamp) {
  (void)tape;
  using namespace ops;
  if (label != 0 && label != 1) {
    throw Error(ErrorCode::kInvalidArgument, "label must be 0 or 1");
  }
  const double y = static_cast<double>(label);
  Var p1 = ops::clamp(element(y_hat, 0, 1), clamp, 1.0 - clamp);
  Var p0 = ops::clamp(element(y_hat, 0, 0), clamp, 1.0 - clamp);
  Var term_true = scale(ops::log(p1), -y);
  Var term_fake = scale(ops::log(add_scalar(scale(p0, -1.0), 1.0)), -(1.0 - y));
  return add(term_true, term_fake);
}

Var CrossEntropyLoss(Tape& tape, Var y_hat, int label, double clamp) {
  (void)tape;
  using namespace ops;
  if (label != 0 && label != 1) {
    throw Error(ErrorCode::kInvalidArgument, "label must be 0 or 1");
  }
  const double y = static_cast<double>(label);
  Var p1 = ops::clamp(element(y_hat, 0, 1), clamp, 1.0 - clamp);
  Var p0 = ops::clamp(element(y_hat, 0, 0), clamp, 1.0 - clamp);
  return add(scale(ops::log(p1), -y), scale(ops::log(p0), -(1.0 - y)));
}

CoAttentionResult CoAttend(Tape& tape, const CoAttentionParams& params, Var s, Var c_prime) {
  CoAttentionResult r;
  r.conformity = Conformity(tape, c_prime, s, tape.param(*params.w_i));
  r.maps = ComputeAttentionMaps(tape, s, c_prime, r.conformity, tape.param(*params.w_s),
                                tape.param(*params.w_c), params.config.eq11_verbatim);
  r.sentence_weights = AttentionWeights(tape, r.maps.sentence, tape.param(*params.w_hs));
  r.comment_weights = AttentionWeights(tape, r.maps.comment, tape.param(*params.w_hc));
  r.s_hat = Attend(tape, s, r.sentence_weights);
  r.c_hat = Attend(tape, c_prime, r.comment_weights);
  r.y_hat = Predict(tape, r.s_hat, r.c_hat, tape.param(*params.w_f), tape.param(*params.b_f));
  return r;
}

ForwardTrace MakeTrace(const std::string& news_id, const CoAttentionResult& r,
                       const std::vector<std::string>& comment_ids) {
  ForwardTrace t;
  t.news_id = news_id;
  t.y_hat = RowValues(r.y_hat.value());
  t.sentence_weights = RowValues(r.sentence_weights.value());
  t.comment_weights = RowValues(r.comment_weights.value());
  t.comment_ids = comment_ids;
  t.s_hat = r.s_hat.value();
  t.c_hat = r.c_hat.value();
  t.conformity = r.conformity.value();
  t.sentence_map = r.maps.sentence.value();
  t.comment_map = r.maps.comment.value();
  return t;
}

std::string TraceToJson(const ForwardTrace& trace) {
  nlohmann::ordered_json j;
  j["news_id"] = trace.news_id;
  j["y_hat"] = trace.y_hat;
  auto& s = j["sentence_weights"] = nlohmann::ordered_json::array();
  for (std::size_t i = 0; i < trace.sentence_weights.size(); ++i) {
    s.push_back({{"index", i}, {"weight", trace.sentence_weights[i]}});
  }
  auto& c = j["comment_weights"] = nlohmann::ordered_json::array();
  for (std::size_t i = 0; i < trace.comment_weights.size(); ++i) {
    const std::string id = i < trace.comment_ids.size() ? trace.comment_ids[i] : "";
    c.push_back({{"id", id}, {"weight", trace.comment_weights[i]}});
  }
  return j.dump();
}

ForwardTrace TraceFromJson(const std::string& line) {
  ForwardTrace t;
  try {
    const auto j = nlohmann::json::parse(line);
    t.news_id = j.at("news_id");
    t.y_hat = j.at("y_hat").get<std::vector<double>>();
    for (const auto& s : j.at("sentence_weights")) {
      const std::size_t index = s.at("index");
      if (t.sentence_weights.size() <= index) t.sentence_weights.resize(index + 1);
      t.sentence_weights[index] = s.at("weight");
    }
    for (const auto& c : j.at("comment_weights")) {
      t.comment_ids.push_back(c.at("id"));
      t.comment_weights.push_back(c.at("weight"));
    }
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::kCorruptFile, std::string("trace record: ") + e.what());
  }
  return t;
}

}  // namespace gcal
