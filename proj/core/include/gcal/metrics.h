#ifndef GCAL_METRICS_H_
#define GCAL_METRICS_H_

// Binary classification metrics with fake news (label 0) as the positive
// class.

#include <cstddef>
#include <string>
#include <vector>

#include "gcal/data_model.h"

namespace gcal {

struct Confusion {
  std::size_t tp = 0;
  std::size_t fp = 0;
  std::size_t tn = 0;
  std::size_t fn = 0;

  std::size_t total() const { return tp + fp + tn + fn; }
  bool operator==(const Confusion&) const = default;
};

struct Metrics {
  double accuracy = 0.0;
  double precision = 0.0;
  double recall = 0.0;
  double f1 = 0.0;
  double auc = 0.5;
  Confusion confusion;

  bool operator==(const Metrics&) const = default;
};

struct Prediction {
  Label truth = Label::kFake;
  double fake_probability = 0.5;  // y_hat[0]
  double true_probability = 0.5;  // y_hat[1]

  // argmax over (fake, true); a tie resolves to fake.
  Label predicted() const {
    return fake_probability >= true_probability ? Label::kFake : Label::kTrue;
  }
};

Confusion CountConfusion(const std::vector<Prediction>& predictions);

// Precision is 0 when nothing is predicted fake; recall is 0 without fake
// items; f1 is 0 when precision + recall is 0.
Metrics ComputeMetrics(const std::vector<Prediction>& predictions);

// Mann-Whitney rank-sum over the fake-class probability with midranks for
// ties. 0.5 when either class is absent.
double RankSumAuc(const std::vector<double>& scores, const std::vector<bool>& positive);

struct MetricSummary {
  Metrics mean;
  Metrics stddev;  // population standard deviation per field; confusion unused
};

MetricSummary Summarize(const std::vector<Metrics>& runs);

std::string FormatMetric(double value);  // three decimals, e.g. "0.924"

}  // namespace gcal

#endif  // GCAL_METRICS_H_
