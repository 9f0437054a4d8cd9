#ifndef GCAL_EXPLAINER_H_
#define GCAL_EXPLAINER_H_

// Sentence ranking by co-attention weight and its evaluation against an
// external per-sentence score list with neighbor-tolerant mean average
// precision.

#include <cstdint>
#include <filesystem>
#include <map>
#include <set>
#include <string>
#include <utility>
#include <vector>

#include "gcal/co_attention.h"
#include "gcal/data_model.h"
#include "gcal/report.h"

namespace gcal {

struct RankedSentence {
  int index = 0;
  double weight = 0.0;

  bool operator==(const RankedSentence&) const = default;
};

struct SentenceRanking {
  std::string news_id;
  std::vector<RankedSentence> sentences;  // weight descending, ties by index

  std::vector<int> indices() const;
};

// Top-k sentences of the trace's sentence weights; all of them when k > N.
// Throws Error(kInvalidArgument) for k < 1.
SentenceRanking RankSentences(const ForwardTrace& trace, int k);

// news id -> one score per sentence.
struct OracleScores {
  std::map<std::string, std::vector<double>> scores;

  bool operator==(const OracleScores&) const = default;
};

// Indices of the k highest scores, ties by ascending index.
std::vector<int> TopIndices(const std::vector<double>& scores, int k);

// Average precision of a ranked prediction against a ground-truth set. A
// prediction at rank r is a hit when an unused ground-truth index lies within
// +-n; the nearest such index (the smaller on a tie) is consumed. AP is the
// sum of hits-so-far / r over hit ranks divided by the ground-truth size.
double AveragePrecision(const std::vector<int>& predicted, const std::vector<int>& truth, int n);

// Mean over rankings of AveragePrecision(top-k prediction, top-k oracle, n).
// Throws Error(kOracleMissing) when a ranked news id has no oracle entry and
// Error(kInvalidArgument) unless 0 <= n <= 4 and k >= 1.
double MapAtK(const std::vector<SentenceRanking>& rankings, const OracleScores& oracle, int k,
              int n);

// One line per news: {"news_id": ..., "scores": [...]}.
void WriteOracleScores(const std::filesystem::path& path, const OracleScores& oracle);
OracleScores ReadOracleScores(const std::filesystem::path& path);

// Sentences holding any marker token score in [0.9, 1.0), the rest in
// [0, 0.1). With no markers every sentence gets a seeded uniform score.
OracleScores SyntheticOracle(const Dataset& dataset, std::uint64_t seed,
                             const std::set<TokenId>& markers = {});

struct ExplainOptions {
  std::vector<int> ks = {5, 10};
  std::vector<int> ns = {0, 1, 2, 3, 4};
  int listed_sentences = 5;  // per-news top sentences written to the report
};

struct ExplainResult {
  std::vector<SentenceRanking> rankings;
  std::map<std::pair<int, int>, double> map;  // (k, n) -> MAP
  Report report;
};

// Traces without an oracle entry raise Error(kOracleMissing).
ExplainResult Explain(const std::vector<ForwardTrace>& traces, const Dataset& dataset,
                      const OracleScores& oracle, const ExplainOptions& options = {});

}  // namespace gcal

#endif  // GCAL_EXPLAINER_H_
