#include "gcal/metrics.h"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <numeric>

#include "gcal/error.h"

namespace gcal {

Confusion CountConfusion(const std::vector<Prediction>& predictions) {
  Confusion c;
  for (const Prediction& p : predictions) {
    const bool actual_fake = p.truth == Label::kFake;
    const bool predicted_fake = p.predicted() == Label::kFake;
    if (actual_fake && predicted_fake) ++c.tp;
    if (!actual_fake && predicted_fake) ++c.fp;
    if (!actual_fake && !predicted_fake) ++c.tn;
    if (actual_fake && !predicted_fake) ++c.fn;
  }
  return c;
}

double RankSumAuc(const std::vector<double>& scores, const std::vector<bool>& positive) {
  if (scores.size() != positive.size()) {
    throw Error(ErrorCode::kShapeMismatch, "scores and labels differ in length");
  }
  const std::size_t n = scores.size();
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(),
            [&](std::size_t a, std::size_t b) { return scores[a] < scores[b]; });
  std::vector<double> rank(n);
  for (std::size_t i = 0; i < n;) {
    std::size_t j = i;
    while (j + 1 < n && scores[order[j + 1]] == scores[order[i]]) ++j;
    const double mid = (static_cast<double>(i) + static_cast<double>(j)) / 2.0 + 1.0;
    for (std::size_t t = i; t <= j; ++t) rank[order[t]] = mid;
    i = j + 1;
  }
  double positives = 0.0;
  double rank_sum = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    if (positive[i]) {
      positives += 1.0;
      rank_sum += rank[i];
    }
  }
  const double negatives = static_cast<double>(n) - positives;
  if (positives == 0.0 || negatives == 0.0) return 0.5;
  return (rank_sum - positives * (positives + 1.0) / 2.0) / (positives * negatives);
}

Metrics ComputeMetrics(const std::vector<Prediction>& predictions) {
  Metrics m;
  m.confusion = CountConfusion(predictions);
  const Confusion& c = m.confusion;
  const double total = static_cast<double>(c.total());
  if (total == 0.0) return m;
  m.accuracy = static_cast<double>(c.tp + c.tn) / total;
  m.precision =
      c.tp + c.fp == 0 ? 0.0 : static_cast<double>(c.tp) / static_cast<double>(c.tp + c.fp);
  m.recall = c.tp + c.fn == 0 ? 0.0 : static_cast<double>(c.tp) / static_cast<double>(c.tp + c.fn);
  m.f1 =
      m.precision + m.recall == 0.0 ? 0.0 : 2.0 * m.precision * m.recall / (m.precision + m.recall);

  std::vector<double> scores;
  std::vector<bool> positive;
  for (const Prediction& p : predictions) {
    scores.push_back(p.fake_probability);
    positive.push_back(p.truth == Label::kFake);
  }
  m.auc = RankSumAuc(scores, positive);
  return m;
}

MetricSummary Summarize(const std::vector<Metrics>& runs) {
  MetricSummary s;
  if (runs.empty()) return s;
  const double n = static_cast<double>(runs.size());
  auto field = [&](double Metrics::* member, double* mean, double* stddev) {
    double sum = 0.0;
    for (const Metrics& m : runs) sum += m.*member;
    *mean = sum / n;
    double sq = 0.0;
    for (const Metrics& m : runs) sq += (m.*member - *mean) * (m.*member - *mean);
    *stddev = std::sqrt(sq / n);
  };
  field(&Metrics::accuracy, &s.mean.accuracy, &s.stddev.accuracy);
  field(&Metrics::precision, &s.mean.precision, &s.stddev.precision);
  field(&Metrics::recall, &s.mean.recall, &s.stddev.recall);
  field(&Metrics::f1, &s.mean.f1, &s.stddev.f1);
  field(&Metrics::auc, &s.mean.auc, &s.stddev.auc);
  if (runs.size() == 1) s.mean.confusion = runs.front().confusion;
  return s;
}

std::string FormatMetric(double value) {
  char buffer[32];
  std::snprintf(buffer, sizeof(buffer), "%.3f", value);
  return buffer;
}

}  // namespace gcal
