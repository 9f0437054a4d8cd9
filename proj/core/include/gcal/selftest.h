#ifndef GCAL_SELFTEST_H_
#define GCAL_SELFTEST_H_

// Built-in numerical checks run by `gcal selftest`.

#include <cstdint>
#include <string>
#include <vector>

#include "gcal/model.h"

namespace gcal {

struct SelfTestCheck {
  std::string name;
  bool passed = false;
  double value = 0.0;      // measured error or deviation
  double threshold = 0.0;  // passes when value < threshold
  std::string detail;
};

struct SelfTestResult {
  std::vector<SelfTestCheck> checks;

  bool ok() const;
};

// Small widths for numerical checks on the canonical fixture.
ModelConfig TinyModelConfig(int vocab_size);

// Finite-difference check of every parameter of the full model on the
// canonical fixture. Returns the largest relative error.
SelfTestCheck ModelGradientCheck(std::uint64_t seed, double threshold = 1e-4);

// Sums of every attention distribution and of y_hat over `passes` randomly
// initialized forward passes on the canonical fixture.
SelfTestCheck NormalizationCheck(std::uint64_t seed, int passes, double threshold = 1e-12);

// Co-attention head against an explicit loop implementation on random
// instances.
SelfTestCheck HeadLoopCheck(std::uint64_t seed, int instances, double threshold = 1e-10);

SelfTestResult RunSelfTest(std::uint64_t seed);

}  // namespace gcal

#endif  // GCAL_SELFTEST_H_
