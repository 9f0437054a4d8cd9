#ifndef GCAL_GRADCHECK_H_
#define GCAL_GRADCHECK_H_

#include <functional>
#include <string>
#include <vector>

#include "gcal/parameters.h"
#include "gcal/tensor.h"

namespace gcal {

// Builds a scalar loss on the given tape from the current parameter values.
// Must be deterministic.
using LossBuilder = std::function<Var(Tape&)>;

struct GradCheckEntry {
  std::string parameter;
  double max_rel_error = 0.0;
  Eigen::Index worst_index = -1;
  double analytic = 0.0;
  double numeric = 0.0;
};

struct GradCheckReport {
  double max_rel_error = 0.0;
  std::size_t entries_checked = 0;
  std::vector<GradCheckEntry> per_parameter;
};

// Compares backward() against central differences (f(x+eps) - f(x-eps)) /
// (2 eps) for every entry of every listed parameter. Relative error is
// |a - n| / max(|a|, |n|, denominator_floor). Parameter values are restored
// before returning; gradients are left holding the analytic result.
GradCheckReport FiniteDifferenceCheck(const LossBuilder& loss,
                                      const std::vector<Parameter*>& params, double eps = 1e-5,
                                      double denominator_floor = 1e-6);
GradCheckReport FiniteDifferenceCheck(const LossBuilder& loss, ParameterSet& params,
                                      double eps = 1e-5, double denominator_floor = 1e-6);

}  // namespace gcal

#endif  // GCAL_GRADCHECK_H_
