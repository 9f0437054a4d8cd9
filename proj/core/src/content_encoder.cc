#include "gcal/content_encoder.h"

#include <cmath>
#include <numeric>

#include "gcal/error.h"

namespace gcal {

WordEncoderParams WordEncoderParams::Create(ParameterSet& set, const WordEncoderConfig& config,
                                            const std::string& prefix) {
  if (config.layers < 1 || config.heads < 1 || config.d_word % config.heads != 0) {
    throw Error(ErrorCode::kInvalidArgument,
                "word encoder needs layers >= 1 and d_word divisible by heads");
  }
  WordEncoderParams p;
  p.config = config;
  const int d = config.d_word;
  p.token_embedding = &set.add(prefix + ".token_embedding", config.vocab_size, d);
  p.position_embedding = &set.add(prefix + ".position_embedding", config.max_len, d);
  for (int l = 0; l < config.layers; ++l) {
    const std::string name = prefix + ".layer" + std::to_string(l);
    Layer layer;
    layer.query = &set.add(name + ".query", d, d);
    layer.key = &set.add(name + ".key", d, d);
    layer.value = &set.add(name + ".value", d, d);
    layer.output = &set.add(name + ".output", d, d);
    layer.ffn_in = &set.add(name + ".ffn_in", d, config.ffn_hidden);
    layer.ffn_in_bias = &set.add(name + ".ffn_in_bias", 1, config.ffn_hidden);
    layer.ffn_out = &set.add(name + ".ffn_out", config.ffn_hidden, d);
    layer.ffn_out_bias = &set.add(name + ".ffn_out_bias", 1, d);
    p.layers.push_back(layer);
  }
  p.context = &set.add(prefix + ".context", 1, d);
  return p;
}

Var EncodeWords(Tape& tape, const WordEncoderParams& params, std::span<const TokenId> tokens) {
  using namespace ops;
  if (tokens.empty()) {
    throw Error(ErrorCode::kEmptySentence, "cannot encode an empty sentence");
  }
  const int m = static_cast<int>(tokens.size());
  if (m > params.config.max_len) {
    throw Error(ErrorCode::kInvalidArgument, "sentence of " + std::to_string(m) +
                                                 " tokens exceeds max_len " +
                                                 std::to_string(params.config.max_len));
  }
  std::vector<int> positions(static_cast<std::size_t>(m));
  std::iota(positions.begin(), positions.end(), 0);
  std::vector<int> ids(tokens.begin(), tokens.end());

  Var x = add(gather_rows(tape.param(*params.token_embedding), ids),
              gather_rows(tape.param(*params.position_embedding), positions));

  const int heads = params.config.heads;
  const int head_width = params.config.d_word / heads;
  const double inv_sqrt = 1.0 / std::sqrt(static_cast<double>(head_width));
  for (const WordEncoderParams::Layer& layer : params.layers) {
    Var q = matmul(x, tape.param(*layer.query));
    Var k = matmul(x, tape.param(*layer.key));
    Var v = matmul(x, tape.param(*layer.value));
    std::vector<Var> outputs;
    outputs.reserve(static_cast<std::size_t>(heads));
    for (int h = 0; h < heads; ++h) {
      Var qh = slice_cols(q, h * head_width, head_width);
      Var kh = slice_cols(k, h * head_width, head_width);
      Var vh = slice_cols(v, h * head_width, head_width);
      Var weights = softmax_rows(scale(matmul(qh, transpose(kh)), inv_sqrt));
      outputs.push_back(matmul(weights, vh));
    }
    Var attended = heads == 1 ? outputs.front() : concat(outputs, Axis::kCols);
    x = add(x, matmul(attended, tape.param(*layer.output)));

    Var hidden =
        ops::tanh(add_row(matmul(x, tape.param(*layer.ffn_in)), tape.param(*layer.ffn_in_bias)));
    x = add(x,
            add_row(matmul(hidden, tape.param(*layer.ffn_out)), tape.param(*layer.ffn_out_bias)));
  }
  return x;
}

WordAttentionResult WordAttention(Tape& tape, Var words, Var context) {
  using namespace ops;
  (void)tape;
  // scores: (M x d) (d x 1) -> M x 1, laid out as a 1 x M row for softmax.
  Var scores = transpose(matmul(ops::tanh(words), transpose(context)));
  Var alpha = softmax_rows(scores);
  return {matmul(alpha, words), alpha};
}

WordAttentionResult WordAttention(Tape& tape, Var words, const WordEncoderParams& params) {
  return WordAttention(tape, words, tape.param(*params.context));
}

GruParams GruParams::Create(ParameterSet& set, int input, int hidden, const std::string& prefix) {
  GruParams p;
  p.w_update = &set.add(prefix + ".w_update", input, hidden);
  p.u_update = &set.add(prefix + ".u_update", hidden, hidden);
  p.b_update = &set.add(prefix + ".b_update", 1, hidden);
  p.w_reset = &set.add(prefix + ".w_reset", input, hidden);
  p.u_reset = &set.add(prefix + ".u_reset", hidden, hidden);
  p.b_reset = &set.add(prefix + ".b_reset", 1, hidden);
  p.w_candidate = &set.add(prefix + ".w_candidate", input, hidden);
  p.u_candidate = &set.add(prefix + ".u_candidate", hidden, hidden);
  p.b_candidate = &set.add(prefix + ".b_candidate", 1, hidden);
  return p;
}

SentenceEncoderParams SentenceEncoderParams::Create(ParameterSet& set, int input, int d,
                                                    const std::string& prefix) {
  if (d % 2 != 0) {
    throw Error(ErrorCode::kInvalidArgument, "sentence width d must be even");
  }
  SentenceEncoderParams p;
  p.forward = GruParams::Create(set, input, d / 2, prefix + ".forward");
  p.backward = GruParams::Create(set, input, d / 2, prefix + ".backward");
  return p;
}

Var GruStep(Tape& tape, const GruParams& p, Var x, Var h) {
  using namespace ops;
  auto gate = [&](Parameter* w, Parameter* u, Parameter* b, Var state) {
    return add_row(add(matmul(x, tape.param(*w)), matmul(state, tape.param(*u))), tape.param(*b));
  };
  Var z = sigmoid(gate(p.w_update, p.u_update, p.b_update, h));
  Var r = sigmoid(gate(p.w_reset, p.u_reset, p.b_reset, h));
  Var c = ops::tanh(gate(p.w_candidate, p.u_candidate, p.b_candidate, mul(r, h)));
  // (1 - z) h + z c  ==  h + z (c - h)
  return add(h, mul(z, sub(c, h)));
}

Var EncodeSentences(Tape& tape, const SentenceEncoderParams& params, Var v_seq) {
  using namespace ops;
  const Eigen::Index n = v_seq.rows();
  if (n < 1) throw Error(ErrorCode::kShapeMismatch, "no sentences to encode");
  std::vector<Var> inputs;
  inputs.reserve(static_cast<std::size_t>(n));
  for (Eigen::Index i = 0; i < n; ++i) inputs.push_back(slice_rows(v_seq, i, 1));

  std::vector<Var> forward(static_cast<std::size_t>(n));
  std::vector<Var> backward(static_cast<std::size_t>(n));
  Var h = tape.constant(DenseMatrix::Zero(1, params.forward.hidden()));
  for (Eigen::Index i = 0; i < n; ++i) {
    h = GruStep(tape, params.forward, inputs[i], h);
    forward[i] = h;
  }
  h = tape.constant(DenseMatrix::Zero(1, params.backward.hidden()));
  for (Eigen::Index i = n - 1; i >= 0; --i) {
    h = GruStep(tape, params.backward, inputs[i], h);
    backward[i] = h;
  }
  std::vector<Var> rows;
  rows.reserve(static_cast<std::size_t>(n));
  for (Eigen::Index i = 0; i < n; ++i) {
    rows.push_back(concat(forward[i], backward[i], Axis::kCols));
  }
  return n == 1 ? rows.front() : concat(rows, Axis::kRows);
}

ContentEncoding EncodeContent(Tape& tape, const WordEncoderParams& words,
                              const SentenceEncoderParams& sentences,
                              const std::vector<std::vector<TokenId>>& news, int max_sentences) {
  ContentEncoding out;
  std::vector<Var> pooled;
  const std::size_t n = std::min(news.size(), static_cast<std::size_t>(max_sentences));
  for (std::size_t i = 0; i < n; ++i) {
    std::span<const TokenId> tokens(news[i]);
    if (static_cast<int>(tokens.size()) > words.config.max_len) {
      tokens = tokens.first(static_cast<std::size_t>(words.config.max_len));
    }
    Var h = EncodeWords(tape, words, tokens);
    WordAttentionResult att = WordAttention(tape, h, words);
    pooled.push_back(att.sentence);
    out.word_attention.push_back(att.alpha);
  }
  if (pooled.empty()) {
    throw Error(ErrorCode::kEmptySentence, "news item has no sentences");
  }
  Var v_seq = pooled.size() == 1 ? pooled.front() : ops::concat(pooled, ops::Axis::kRows);
  out.sentences = EncodeSentences(tape, sentences, v_seq);
  return out;
}

}  // namespace gcal
