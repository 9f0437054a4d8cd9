#ifndef GCAL_CO_ATTENTION_H_
#define GCAL_CO_ATTENTION_H_

// Sentence-comment co-attention head.
//
// Orientation: sentence matrix S is N x d (one row per sentence), comment
// matrix C' is K x d (one row per comment). In column form, with S^T as
// d x N and C'^T as d x K:
//
//   F     = tanh(C' W_I S^T)                          K x N
//   H^S   = tanh(W_S S^T + (W_C' C'^T) F)             k_a x N
//   H^C'  = tanh(W_C' C'^T + (W_S S^T) F^T)           k_a x K
//   a^S   = softmax(w_hs^T H^S)                       1 x N
//   a^C'  = softmax(w_hc^T H^C')                      1 x K
//   s_hat = a^S S,  c_hat = a^C' C'                    1 x d each
//   y_hat = softmax([s_hat, c_hat] W_f^T + b_f)       1 x 2

#include <string>
#include <vector>

#include "gcal/parameters.h"
#include "gcal/tensor.h"

namespace gcal {

struct CoAttentionConfig {
  int d = 200;
  int d_graph = 200;
  int attention_width = 80;  // k_a
  // Reproduces the printed H^C' form tanh(W_C' S^T + (W_S C'^T) F^T), which
  // only closes dimensionally when K == N.
  bool eq11_verbatim = false;
  double probability_clamp = 1e-12;
};

struct CoAttentionParams {
  CoAttentionConfig config;
  Parameter* concat_projection = nullptr;  // 2 d_graph x d
  Parameter* concat_bias = nullptr;        // 1 x d
  Parameter* w_i = nullptr;                // d x d
  Parameter* w_s = nullptr;                // k_a x d
  Parameter* w_c = nullptr;                // k_a x d
  Parameter* w_hs = nullptr;               // k_a x 1
  Parameter* w_hc = nullptr;               // k_a x 1
  Parameter* w_f = nullptr;                // 2 x 2d
  Parameter* b_f = nullptr;                // 1 x 2
  Parameter* null_comment = nullptr;       // 1 x d, stands in for C' when K = 0

  static CoAttentionParams Create(ParameterSet& set, const CoAttentionConfig& config,
                                  const std::string& prefix = "coattention");
};

// C'_i = [U_i, C_i] P + b. Throws on row-count or width mismatch.
Var UserCommentConcat(Tape& tape, Var users, Var comments, Var projection, Var bias);

Var Conformity(Tape& tape, Var c_prime, Var s, Var w_i);

struct AttentionMaps {
  Var sentence;  // H^S, k_a x N
  Var comment;   // H^C', k_a x K
};

AttentionMaps ComputeAttentionMaps(Tape& tape, Var s, Var c_prime, Var f, Var w_s, Var w_c,
                                   bool eq11_verbatim = false);

// softmax(w^T H): H is k_a x T, w is k_a x 1 -> 1 x T.
Var AttentionWeights(Tape& tape, Var h, Var w);

// Weighted sum of rows: a (1 x T) times rows (T x d).
Var Attend(Tape& tape, Var rows, Var a);

Var Predict(Tape& tape, Var s_hat, Var c_hat, Var w_f, Var b_f);

// -y log(y_hat_1) - (1 - y) log(1 - y_hat_0), probabilities clamped to
// [clamp, 1 - clamp]. label: 0 = fake, 1 = true. Because y_hat_0 + y_hat_1 = 1
// both terms equal -log(y_hat_1), so this form does not depend on the label;
// training uses CrossEntropyLoss unless asked for this one.
Var Loss(Tape& tape, Var y_hat, int label, double clamp = 1e-12);

// -y log(y_hat_1) - (1 - y) log(y_hat_0), same clamping.
Var CrossEntropyLoss(Tape& tape, Var y_hat, int label, double clamp = 1e-12);

struct CoAttentionResult {
  Var y_hat;
  Var conformity;
  AttentionMaps maps;
  Var sentence_weights;  // a^S
  Var comment_weights;   // a^C'
  Var s_hat;
  Var c_hat;
};

CoAttentionResult CoAttend(Tape& tape, const CoAttentionParams& params, Var s, Var c_prime);

// Plain values of one forward pass, exported for evaluation and explanation.
struct ForwardTrace {
  std::string news_id;
  std::vector<double> y_hat;             // [fake, true]
  std::vector<double> sentence_weights;  // a^S
  std::vector<double> comment_weights;   // a^C'
  std::vector<std::string> comment_ids;  // row order of C'
  DenseMatrix s_hat;
  DenseMatrix c_hat;
  DenseMatrix conformity;
  DenseMatrix sentence_map;
  DenseMatrix comment_map;
};

ForwardTrace MakeTrace(const std::string& news_id, const CoAttentionResult& r,
                       const std::vector<std::string>& comment_ids);

// One JSON object per line: {news_id, y_hat, sentence_weights:[{index,
// weight}], comment_weights:[{id, weight}]}.
std::string TraceToJson(const ForwardTrace& trace);
ForwardTrace TraceFromJson(const std::string& line);

}  // namespace gcal

#endif  // GCAL_CO_ATTENTION_H_
