#include "gcal/synthetic.h"

#include <algorithm>

#include "gcal/error.h"
#include "gcal/random.h"

namespace gcal {
namespace {

constexpr const char* kOnsets[] = {"b", "d", "f", "g", "k", "l", "m", "n", "p", "r", "s", "t", "v"};
constexpr const char* kVowels[] = {"a", "e", "i", "o", "u"};

std::vector<std::string> FillerVocabulary(int count) {
  std::vector<std::string> words;
  const int onsets = static_cast<int>(std::size(kOnsets));
  const int vowels = static_cast<int>(std::size(kVowels));
  for (int i = 0; static_cast<int>(words.size()) < count; ++i) {
    std::string w;
    int x = i;
    for (int s = 0; s < 3; ++s) {
      w += kOnsets[x % onsets];
      x /= onsets;
      w += kVowels[x % vowels];
      x /= vowels;
    }
    words.push_back(w);
  }
  return words;
}

int Between(std::mt19937_64& rng, int lo, int hi) {
  return lo + static_cast<int>(UniformIndex(rng, static_cast<std::uint64_t>(hi - lo + 1)));
}

std::string Join(const std::vector<std::string>& words) {
  std::string out;
  for (const std::string& w : words) {
    if (!out.empty()) out += ' ';
    out += w;
  }
  return out;
}

std::string Pad(int value, int width) {
  std::string digits = std::to_string(value);
  while (static_cast<int>(digits.size()) < width) digits.insert(digits.begin(), '0');
  return digits;
}

}  // namespace

const std::vector<std::string>& SyntheticMarkers() {
  static const std::vector<std::string> markers = {"zorblax", "quendrix", "vashtor"};
  return markers;
}

SyntheticConfig ExplainabilitySyntheticConfig() {
  SyntheticConfig c;
  c.min_sentences = 12;
  c.max_sentences = 14;
  c.marker_sentences = 5;
  return c;
}

RawCorpus GenerateSyntheticCorpus(const SyntheticConfig& c) {
  if (c.news < 2 || c.users < 1 || c.min_sentences < 1 || c.max_sentences < c.min_sentences ||
      c.min_comments < 0 || c.max_comments < c.min_comments || c.min_sentence_words < 1 ||
      c.max_sentence_words < c.min_sentence_words || c.min_comment_words < 1 ||
      c.max_comment_words < c.min_comment_words || c.marker_sentences < 1 ||
      c.marker_sentences > c.min_sentences || c.filler_words < 1) {
    throw Error(ErrorCode::kInvalidArgument, "inconsistent synthetic corpus settings");
  }
  std::mt19937_64 rng(MixSeed(c.seed, 0x5e7a11ull));
  const std::vector<std::string> filler = FillerVocabulary(c.filler_words);
  const auto& markers = SyntheticMarkers();
  auto filler_word = [&] { return filler[UniformIndex(rng, filler.size())]; };
  auto marker_word = [&] { return markers[UniformIndex(rng, markers.size())]; };
  auto sentence = [&](int lo, int hi, bool marked) {
    std::vector<std::string> words(static_cast<std::size_t>(Between(rng, lo, hi)));
    for (auto& w : words) w = filler_word();
    if (marked) words[UniformIndex(rng, words.size())] = marker_word();
    return Join(words);
  };

  RawCorpus corpus;
  for (int u = 0; u < c.users; ++u) {
    RawUser user;
    user.id = "u" + Pad(u, 4);
    user.attributes.followers = static_cast<std::int64_t>(UniformIndex(rng, 20000));
    user.attributes.friends = static_cast<std::int64_t>(UniformIndex(rng, 3000));
    user.attributes.statuses = static_cast<std::int64_t>(UniformIndex(rng, 50000));
    user.attributes.verified = UniformUnit(rng) < 0.1;
    corpus.users.push_back(user);
  }

  const int fakes = static_cast<int>(c.fake_fraction * c.news + 0.5);
  std::vector<Label> labels(static_cast<std::size_t>(c.news), Label::kTrue);
  std::fill(labels.begin(), labels.begin() + fakes, Label::kFake);
  Shuffle(labels, rng);

  int fake_seen = 0;
  int comment_counter = 0;
  for (int i = 0; i < c.news; ++i) {
    RawNews news;
    news.id = "n" + Pad(i, 4);
    news.label = labels[static_cast<std::size_t>(i)];
    bool content_signal = false;
    bool comment_signal = false;
    if (news.label == Label::kFake) {
      if (c.layout == SignalLayout::kContentAndComments) {
        content_signal = comment_signal = true;
      } else {
        content_signal = fake_seen % 2 == 0;
        comment_signal = !content_signal;
      }
      ++fake_seen;
    }

    const int n_sentences = Between(rng, c.min_sentences, c.max_sentences);
    std::vector<int> slots(static_cast<std::size_t>(n_sentences));
    for (int s = 0; s < n_sentences; ++s) slots[static_cast<std::size_t>(s)] = s;
    Shuffle(slots, rng);
    std::vector<bool> marked(static_cast<std::size_t>(n_sentences), false);
    if (content_signal) {
      for (int m = 0; m < c.marker_sentences; ++m)
        marked[slots[static_cast<std::size_t>(m)]] = true;
    }
    for (int s = 0; s < n_sentences; ++s) {
      news.text += sentence(c.min_sentence_words, c.max_sentence_words, marked[s]) + ". ";
    }
    news.text.pop_back();
    corpus.news.push_back(news);

    const int n_comments = Between(rng, std::max(c.min_comments, comment_signal ? 3 : 0),
                                   std::max(c.max_comments, comment_signal ? 3 : 0));
    std::int64_t time = 1'600'000'000 + static_cast<std::int64_t>(i) * 100'000;
    for (int k = 0; k < n_comments; ++k) {
      RawComment comment;
      comment.id = "c" + Pad(comment_counter++, 6);
      comment.news_id = news.id;
      comment.user_id = corpus.users[UniformIndex(rng, corpus.users.size())].id;
      comment.text = sentence(c.min_comment_words, c.max_comment_words, comment_signal);
      time += 1 + static_cast<std::int64_t>(UniformIndex(rng, 600));
      comment.timestamp = time;
      comment.attributes.likes = static_cast<std::int64_t>(UniformIndex(rng, 500));
      comment.attributes.retweets = static_cast<std::int64_t>(UniformIndex(rng, 100));
      comment.attributes.replies = static_cast<std::int64_t>(UniformIndex(rng, 50));
      corpus.comments.push_back(comment);
    }
  }
  return corpus;
}

Dataset SyntheticDataset(const SyntheticConfig& config) {
  IngestConfig ingest;
  ingest.min_freq = 1;
  return BuildDataset(GenerateSyntheticCorpus(config), ingest, nullptr);
}

RawCorpus CanonicalCorpus() {
  RawCorpus corpus;
  corpus.news.push_back({"n1", "alpha beta gamma. gamma delta alpha.", Label::kFake});
  RawComment first;
  first.id = "c1";
  first.news_id = "n1";
  first.user_id = "u1";
  first.text = "beta delta";
  first.timestamp = 100;
  first.attributes = {12, 3, 1};
  RawComment second;
  second.id = "c2";
  second.news_id = "n1";
  second.user_id = "u2";
  second.text = "alpha gamma beta";
  second.timestamp = 160;
  second.attributes = {0, 0, 2};
  corpus.comments = {first, second};
  RawUser u1;
  u1.id = "u1";
  u1.attributes = {1500, 20, 900, false};
  RawUser u2;
  u2.id = "u2";
  u2.attributes = {3, 7, 45000, true};
  corpus.users = {u1, u2};
  return corpus;
}

Dataset CanonicalDataset() {
  IngestConfig ingest;
  ingest.min_freq = 1;
  return BuildDataset(CanonicalCorpus(), ingest, nullptr);
}

}  // namespace gcal
