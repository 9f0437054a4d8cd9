#ifndef GCAL_CONTENT_ENCODER_H_
#define GCAL_CONTENT_ENCODER_H_

// News content branch: contextual word vectors from a small self-attention
// encoder, word-level attention pooling into one vector per sentence, and a
// bidirectional GRU over the sentence sequence.

#include <span>
#include <string>
#include <vector>

#include "gcal/parameters.h"
#include "gcal/tensor.h"
#include "gcal/tokenizer.h"

namespace gcal {

struct WordEncoderConfig {
  int vocab_size = 2;
  int d_word = 64;
  int layers = 2;
  int heads = 4;
  int ffn_hidden = 128;
  int max_len = 50;
};

struct WordEncoderParams {
  struct Layer {
    Parameter* query = nullptr;
    Parameter* key = nullptr;
    Parameter* value = nullptr;
    Parameter* output = nullptr;
    Parameter* ffn_in = nullptr;
    Parameter* ffn_in_bias = nullptr;
    Parameter* ffn_out = nullptr;
    Parameter* ffn_out_bias = nullptr;
  };

  WordEncoderConfig config;
  Parameter* token_embedding = nullptr;     // vocab x d_word
  Parameter* position_embedding = nullptr;  // max_len x d_word
  std::vector<Layer> layers;
  Parameter* context = nullptr;  // 1 x d_word word-attention context vector

  // Registers "<prefix>.*" parameters (zero-valued) in `set`.
  static WordEncoderParams Create(ParameterSet& set, const WordEncoderConfig& config,
                                  const std::string& prefix = "word");
};

// Contextual vectors for one sentence: token + position embeddings followed
// by `layers` residual blocks of multi-head self-attention and a tanh
// feed-forward. Output is M x d_word. Throws Error(kEmptySentence) for an
// empty sentence; sequences longer than max_len are rejected.
Var EncodeWords(Tape& tape, const WordEncoderParams& params, std::span<const TokenId> tokens);

struct WordAttentionResult {
  Var sentence;  // 1 x d_word, sum_t alpha_t h_t
  Var alpha;     // 1 x M
};

// alpha = softmax_t(tanh(h_t) . context); the pooled vector sums the
// untransformed rows h_t.
WordAttentionResult WordAttention(Tape& tape, Var words, Var context);
WordAttentionResult WordAttention(Tape& tape, Var words, const WordEncoderParams& params);

struct GruParams {
  // Row-vector convention: gate = x * W + h * U + b.
  Parameter* w_update = nullptr;
  Parameter* u_update = nullptr;
  Parameter* b_update = nullptr;
  Parameter* w_reset = nullptr;
  Parameter* u_reset = nullptr;
  Parameter* b_reset = nullptr;
  Parameter* w_candidate = nullptr;
  Parameter* u_candidate = nullptr;
  Parameter* b_candidate = nullptr;

  static GruParams Create(ParameterSet& set, int input, int hidden, const std::string& prefix);
  int hidden() const { return static_cast<int>(u_update->value.rows()); }
};

struct SentenceEncoderParams {
  GruParams forward;
  GruParams backward;

  static SentenceEncoderParams Create(ParameterSet& set, int input, int d,
                                      const std::string& prefix = "sentence");
};

// One GRU step:
//   z = sigmoid(x Wz + h Uz + bz)
//   r = sigmoid(x Wr + h Ur + br)
//   c = tanh(x Wc + (r . h) Uc + bc)
//   h' = (1 - z) . h + z . c
Var GruStep(Tape& tape, const GruParams& params, Var x, Var h);

// v_seq is N x d_word (one row per sentence). Row i of the result is
// [forward_i, backward_i] where the forward GRU reads sentences 1..N and the
// backward GRU reads N..1; width 2 * hidden.
Var EncodeSentences(Tape& tape, const SentenceEncoderParams& params, Var v_seq);

struct ContentEncoding {
  Var sentences;                    // N x d
  std::vector<Var> word_attention;  // per sentence, 1 x M_i
};

// Full content branch for one news item (sentences beyond max_sentences are
// ignored).
ContentEncoding EncodeContent(Tape& tape, const WordEncoderParams& words,
                              const SentenceEncoderParams& sentences,
                              const std::vector<std::vector<TokenId>>& news,
                              int max_sentences = 50);

}  // namespace gcal

#endif  // GCAL_CONTENT_ENCODER_H_
