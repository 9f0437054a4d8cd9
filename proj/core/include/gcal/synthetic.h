#ifndef GCAL_SYNTHETIC_H_
#define GCAL_SYNTHETIC_H_

// Planted-signal corpora: fake news carry marker tokens that no true news
// item contains, so labels are learnable and the marker sentences give a
// known explanation target.

#include <cstdint>
#include <string>
#include <vector>

#include "gcal/data_model.h"

namespace gcal {

enum class SignalLayout {
  // Every fake item has marker sentences and marker comments.
  kContentAndComments,
  // Fake items alternate between marker sentences only and marker comments
  // only.
  kSplit,
};

struct SyntheticConfig {
  int news = 200;
  double fake_fraction = 0.5;
  int users = 400;
  int filler_words = 400;
  int min_sentences = 6;
  int max_sentences = 9;
  int min_sentence_words = 5;
  int max_sentence_words = 9;
  int marker_sentences = 2;  // per fake item carrying content signal
  int min_comments = 3;
  int max_comments = 6;
  int min_comment_words = 4;
  int max_comment_words = 8;
  SignalLayout layout = SignalLayout::kContentAndComments;
  std::uint64_t seed = 1;
};

// Settings used for explanation checks: more sentences, five marker
// sentences per fake item.
SyntheticConfig ExplainabilitySyntheticConfig();

const std::vector<std::string>& SyntheticMarkers();

RawCorpus GenerateSyntheticCorpus(const SyntheticConfig& config);

// Generate and ingest with min_freq 1.
Dataset SyntheticDataset(const SyntheticConfig& config);

// One fake news item with two three-word sentences and two comments by two
// users; every word appears once in the news text.
RawCorpus CanonicalCorpus();
Dataset CanonicalDataset();

}  // namespace gcal

#endif  // GCAL_SYNTHETIC_H_
