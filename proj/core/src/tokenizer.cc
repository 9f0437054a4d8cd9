#include "gcal/tokenizer.h"

#include <cstdint>
#include <map>

#include "gcal/error.h"

namespace gcal {
namespace {

constexpr char32_t kInvalid = 0xFFFFFFFF;

// Decodes one code point starting at text[i]; advances i.
char32_t NextCodePoint(std::string_view text, std::size_t& i) {
  const auto byte = [&](std::size_t k) { return static_cast<std::uint8_t>(text[k]); };
  const std::uint8_t lead = byte(i);
  int extra = 0;
  char32_t cp = 0;
  if (lead < 0x80) {
    ++i;
    return lead;
  } else if ((lead & 0xE0) == 0xC0) {
    extra = 1;
    cp = lead & 0x1F;
  } else if ((lead & 0xF0) == 0xE0) {
    extra = 2;
    cp = lead & 0x0F;
  } else if ((lead & 0xF8) == 0xF0) {
    extra = 3;
    cp = lead & 0x07;
  } else {
    ++i;
    return kInvalid;
  }
  if (i + extra >= text.size()) {
    ++i;
    return kInvalid;
  }
  for (int k = 1; k <= extra; ++k) {
    const std::uint8_t b = byte(i + k);
    if ((b & 0xC0) != 0x80) {
      ++i;
      return kInvalid;
    }
    cp = (cp << 6) | (b & 0x3F);
  }
  i += extra + 1;
  return cp;
}

void AppendUtf8(std::string& out, char32_t cp) {
  if (cp < 0x80) {
    out.push_back(static_cast<char>(cp));
  } else if (cp < 0x800) {
    out.push_back(static_cast<char>(0xC0 | (cp >> 6)));
    out.push_back(static_cast<char>(0x80 | (cp & 0x3F)));
  } else if (cp < 0x10000) {
    out.push_back(static_cast<char>(0xE0 | (cp >> 12)));
    out.push_back(static_cast<char>(0x80 | ((cp >> 6) & 0x3F)));
    out.push_back(static_cast<char>(0x80 | (cp & 0x3F)));
  } else {
    out.push_back(static_cast<char>(0xF0 | (cp >> 18)));
    out.push_back(static_cast<char>(0x80 | ((cp >> 12) & 0x3F)));
    out.push_back(static_cast<char>(0x80 | ((cp >> 6) & 0x3F)));
    out.push_back(static_cast<char>(0x80 | (cp & 0x3F)));
  }
}

bool IsSeparator(char32_t cp) {
  if (cp == kInvalid) return true;
  if (cp < 0x80) {
    const bool alnum =
        (cp >= '0' && cp <= '9') || (cp >= 'a' && cp <= 'z') || (cp >= 'A' && cp <= 'Z');
    return !alnum;
  }
  return (cp >= 0x80 && cp <= 0xBF) ||      // Latin-1 controls, NBSP, symbols
         cp == 0xD7 || cp == 0xF7 ||        // multiplication / division signs
         (cp >= 0x2000 && cp <= 0x206F) ||  // general punctuation and spaces
         (cp >= 0x20A0 && cp <= 0x20CF) ||  // currency
         (cp >= 0x2190 && cp <= 0x2BFF) ||  // arrows, math, dingbats, boxes
         (cp >= 0x3000 && cp <= 0x303F) ||  // CJK punctuation
         (cp >= 0xFE30 && cp <= 0xFE4F) || (cp >= 0xFF00 && cp <= 0xFF0F) ||
         (cp >= 0xFF1A && cp <= 0xFF20) || (cp >= 0xFF3B && cp <= 0xFF40) ||
         (cp >= 0xFF5B && cp <= 0xFF65) ||
         (cp >= 0x1F000 && cp <= 0x1FAFF);  // emoji and pictographs
}

char32_t ToLower(char32_t cp) {
  if (cp >= 'A' && cp <= 'Z') return cp + 0x20;
  if (cp >= 0xC0 && cp <= 0xDE && cp != 0xD7) return cp + 0x20;
  if (cp >= 0x391 && cp <= 0x3A9 && cp != 0x3A2) return cp + 0x20;
  if (cp >= 0x410 && cp <= 0x42F) return cp + 0x20;
  if (cp >= 0x400 && cp <= 0x40F) return cp + 0x50;
  if (cp >= 0xFF21 && cp <= 0xFF3A) return cp + 0x20;  // fullwidth Latin
  return cp;
}

}  // namespace

std::vector<std::string> SplitWords(std::string_view text) {
  std::vector<std::string> words;
  std::string current;
  std::size_t i = 0;
  while (i < text.size()) {
    const char32_t cp = NextCodePoint(text, i);
    if (IsSeparator(cp)) {
      if (!current.empty()) words.push_back(std::move(current));
      current.clear();
    } else {
      AppendUtf8(current, ToLower(cp));
    }
  }
  if (!current.empty()) words.push_back(std::move(current));
  return words;
}

Vocabulary::Vocabulary() {
  add("<pad>");
  add("<unk>");
}

TokenId Vocabulary::add(const std::string& token) {
  auto [it, inserted] = index_.emplace(token, static_cast<TokenId>(tokens_.size()));
  if (inserted) tokens_.push_back(token);
  return it->second;
}

Vocabulary Vocabulary::Build(const std::vector<std::string>& corpus, int min_freq) {
  if (min_freq < 1) {
    throw Error(ErrorCode::kInvalidArgument, "min_freq must be >= 1");
  }
  std::unordered_map<std::string, int> counts;
  std::vector<std::string> order;
  for (const std::string& doc : corpus) {
    for (std::string& w : SplitWords(doc)) {
      if (counts[w]++ == 0) order.push_back(std::move(w));
    }
  }
  Vocabulary vocab;
  for (const std::string& w : order) {
    if (counts[w] >= min_freq) vocab.add(w);
  }
  return vocab;
}

Vocabulary Vocabulary::FromTokens(std::vector<std::string> tokens) {
  if (tokens.size() < 2) {
    throw Error(ErrorCode::kCorruptFile, "vocabulary lacks PAD/UNK entries");
  }
  Vocabulary vocab;
  for (std::size_t i = 2; i < tokens.size(); ++i) {
    if (vocab.add(tokens[i]) != static_cast<TokenId>(i)) {
      throw Error(ErrorCode::kCorruptFile, "duplicate vocabulary token " + tokens[i]);
    }
  }
  return vocab;
}

TokenId Vocabulary::id(const std::string& token) const {
  auto it = index_.find(token);
  if (it == index_.end() || it->second < 2) return kUnkId;
  return it->second;
}

std::vector<TokenId> Tokenize(std::string_view text, const Vocabulary& vocab, int max_len) {
  if (max_len < 1) throw Error(ErrorCode::kInvalidArgument, "max_len must be >= 1");
  std::vector<TokenId> ids;
  for (const std::string& w : SplitWords(text)) {
    if (static_cast<int>(ids.size()) == max_len) break;
    ids.push_back(vocab.id(w));
  }
  return ids;
}

}  // namespace gcal
