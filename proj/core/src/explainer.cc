#include "gcal/explainer.h"

#include <algorithm>
#include <cstdlib>
#include <fstream>
#include <numeric>

#include "gcal/container.h"
#include "gcal/error.h"
#include "gcal/metrics.h"
#include "gcal/random.h"
#include "json.hpp"

namespace gcal {
namespace {

std::uint64_t HashId(const std::string& id) {
  std::uint64_t h = 0xcbf29ce484222325ull;
  for (unsigned char c : id) {
    h ^= c;
    h *= 0x100000001b3ull;
  }
  return h;
}

}  // namespace

std::vector<int> SentenceRanking::indices() const {
  std::vector<int> out;
  out.reserve(sentences.size());
  for (const RankedSentence& s : sentences) out.push_back(s.index);
  return out;
}

std::vector<int> TopIndices(const std::vector<double>& scores, int k) {
  std::vector<int> order(scores.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](int a, int b) { return scores[a] > scores[b]; });
  if (static_cast<int>(order.size()) > k) order.resize(static_cast<std::size_t>(k));
  return order;
}

SentenceRanking RankSentences(const ForwardTrace& trace, int k) {
  if (k < 1) throw Error(ErrorCode::kInvalidArgument, "k must be >= 1");
  SentenceRanking ranking;
  ranking.news_id = trace.news_id;
  for (int index : TopIndices(trace.sentence_weights, k)) {
    ranking.sentences.push_back({index, trace.sentence_weights[index]});
  }
  return ranking;
}

double AveragePrecision(const std::vector<int>& predicted, const std::vector<int>& truth, int n) {
  if (truth.empty()) return 0.0;
  std::vector<bool> used(truth.size(), false);
  int hits = 0;
  double sum = 0.0;
  for (std::size_t r = 0; r < predicted.size(); ++r) {
    int best = -1;
    for (std::size_t t = 0; t < truth.size(); ++t) {
      if (used[t]) continue;
      const int distance = std::abs(truth[t] - predicted[r]);
      if (distance > n) continue;
      if (best < 0) {
        best = static_cast<int>(t);
        continue;
      }
      const int best_distance = std::abs(truth[best] - predicted[r]);
      if (distance < best_distance || (distance == best_distance && truth[t] < truth[best])) {
        best = static_cast<int>(t);
      }
    }
    if (best >= 0) {
      used[best] = true;
      ++hits;
      sum += static_cast<double>(hits) / static_cast<double>(r + 1);
    }
  }
  return sum / static_cast<double>(truth.size());
}

double MapAtK(const std::vector<SentenceRanking>& rankings, const OracleScores& oracle, int k,
              int n) {
  if (k < 1) throw Error(ErrorCode::kInvalidArgument, "k must be >= 1");
  if (n < 0 || n > 4) throw Error(ErrorCode::kInvalidArgument, "n must lie in 0..4");
  if (rankings.empty()) return 0.0;
  double total = 0.0;
  for (const SentenceRanking& ranking : rankings) {
    const auto it = oracle.scores.find(ranking.news_id);
    if (it == oracle.scores.end()) {
      throw Error(ErrorCode::kOracleMissing, "no oracle scores for news " + ranking.news_id);
    }
    std::vector<int> predicted = ranking.indices();
    if (static_cast<int>(predicted.size()) > k) predicted.resize(static_cast<std::size_t>(k));
    total += AveragePrecision(predicted, TopIndices(it->second, k), n);
  }
  return total / static_cast<double>(rankings.size());
}

void WriteOracleScores(const std::filesystem::path& path, const OracleScores& oracle) {
  std::string text;
  for (const auto& [news_id, scores] : oracle.scores) {
    nlohmann::ordered_json j;
    j["news_id"] = news_id;
    j["scores"] = scores;
    text += j.dump() + "\n";
  }
  WriteTextAtomic(path, text);
}

OracleScores ReadOracleScores(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::kMissingFile, "cannot open oracle file " + path.string());
  OracleScores oracle;
  std::string line;
  int number = 0;
  while (std::getline(in, line)) {
    ++number;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    try {
      const auto j = nlohmann::json::parse(line);
      auto scores = j.at("scores").get<std::vector<double>>();
      for (double s : scores) {
        if (!(s >= 0.0 && s <= 1.0))
          throw Error(ErrorCode::kMalformedRecord, "score outside [0, 1]");
      }
      oracle.scores[j.at("news_id").get<std::string>()] = std::move(scores);
    } catch (const nlohmann::json::exception& e) {
      throw Error(ErrorCode::kMalformedRecord,
                  path.filename().string() + ":" + std::to_string(number) + ": " + e.what());
    } catch (const Error& e) {
      throw Error(ErrorCode::kMalformedRecord,
                  path.filename().string() + ":" + std::to_string(number) + ": " + e.what());
    }
  }
  return oracle;
}

OracleScores SyntheticOracle(const Dataset& dataset, std::uint64_t seed,
                             const std::set<TokenId>& markers) {
  OracleScores oracle;
  for (const NewsItem& news : dataset.news) {
    std::mt19937_64 rng(MixSeed(seed, HashId(news.id)));
    std::vector<double>& scores = oracle.scores[news.id];
    for (const auto& sentence : news.sentences) {
      const double u = UniformUnit(rng);
      if (markers.empty()) {
        scores.push_back(u);
        continue;
      }
      const bool marked = std::any_of(sentence.begin(), sentence.end(),
                                      [&](TokenId t) { return markers.count(t) > 0; });
      scores.push_back(marked ? 0.9 + 0.1 * u : 0.1 * u);
    }
  }
  return oracle;
}

ExplainResult Explain(const std::vector<ForwardTrace>& traces, const Dataset& dataset,
                      const OracleScores& oracle, const ExplainOptions& options) {
  ExplainResult out;
  std::map<std::string, const NewsItem*> by_id;
  for (const NewsItem& news : dataset.news) by_id[news.id] = &news;

  int max_k = options.listed_sentences;
  for (int k : options.ks) max_k = std::max(max_k, k);
  for (const ForwardTrace& trace : traces) {
    if (oracle.scores.count(trace.news_id) == 0) {
      throw Error(ErrorCode::kOracleMissing, "no oracle scores for news " + trace.news_id);
    }
    out.rankings.push_back(RankSentences(trace, max_k));
  }
  for (int k : options.ks) {
    for (int n : options.ns) {
      const double value = MapAtK(out.rankings, oracle, k, n);
      out.map[{k, n}] = value;
      out.report.set("map.k" + std::to_string(k) + ".n" + std::to_string(n), FormatMetric(value));
    }
  }
  out.report.set("news", out.rankings.size());
  for (const SentenceRanking& ranking : out.rankings) {
    const NewsItem* news = by_id.count(ranking.news_id) ? by_id.at(ranking.news_id) : nullptr;
    const std::size_t listed =
        std::min(ranking.sentences.size(), static_cast<std::size_t>(options.listed_sentences));
    for (std::size_t r = 0; r < listed; ++r) {
      const RankedSentence& s = ranking.sentences[r];
      const std::string prefix = "news." + ranking.news_id + ".rank" + std::to_string(r + 1);
      out.report.set(prefix + ".index", s.index);
      out.report.set(prefix + ".weight", s.weight);
      if (news && s.index < static_cast<int>(news->raw_sentences.size())) {
        out.report.set(prefix + ".text", news->raw_sentences[s.index]);
      }
    }
  }
  return out;
}

}  // namespace gcal
