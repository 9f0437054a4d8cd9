#ifndef GCAL_TOKENIZER_H_
#define GCAL_TOKENIZER_H_

#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

namespace gcal {

using TokenId = int;

inline constexpr TokenId kPadId = 0;
inline constexpr TokenId kUnkId = 1;

// Lowercased words of a UTF-8 string. Whitespace and punctuation (ASCII and
// the common Unicode punctuation/space blocks) separate words and are
// dropped; every other code point is a word character. Invalid UTF-8 bytes
// are treated as separators.
std::vector<std::string> SplitWords(std::string_view text);

class Vocabulary {
 public:
  Vocabulary();

  // Tokens seen at least `min_freq` times get ids >= 2 in order of first
  // appearance; rarer tokens map to UNK.
  static Vocabulary Build(const std::vector<std::string>& corpus, int min_freq);
  // Rebuilds from an id-ordered token list whose first two entries are the
  // PAD and UNK markers.
  static Vocabulary FromTokens(std::vector<std::string> tokens);

  TokenId id(const std::string& token) const;
  const std::string& token(TokenId id) const { return tokens_.at(id); }
  int size() const { return static_cast<int>(tokens_.size()); }
  bool contains(const std::string& token) const { return index_.count(token) > 0; }
  const std::vector<std::string>& tokens() const { return tokens_; }

  bool operator==(const Vocabulary& other) const { return tokens_ == other.tokens_; }

 private:
  TokenId add(const std::string& token);

  std::vector<std::string> tokens_;
  std::unordered_map<std::string, TokenId> index_;
};

// Token ids of `text`, truncated to the first `max_len`. No padding.
std::vector<TokenId> Tokenize(std::string_view text, const Vocabulary& vocab, int max_len);

}  // namespace gcal

#endif  // GCAL_TOKENIZER_H_
