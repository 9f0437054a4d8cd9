#include "gcal/gradcheck.h"

#include <algorithm>
#include <cmath>

#include "gcal/error.h"

namespace gcal {
namespace {

double Evaluate(const LossBuilder& loss) {
  Tape tape;
  return loss(tape).scalar();
}

}  // namespace

GradCheckReport FiniteDifferenceCheck(const LossBuilder& loss,
                                      const std::vector<Parameter*>& params, double eps,
                                      double denominator_floor) {
  if (eps <= 0.0) throw Error(ErrorCode::kInvalidArgument, "eps must be > 0");
  for (Parameter* p : params) p->gradient.setZero(p->value.rows(), p->value.cols());
  {
    Tape tape;
    tape.backward(loss(tape));
  }

  GradCheckReport report;
  for (Parameter* p : params) {
    GradCheckEntry entry;
    entry.parameter = p->name;
    for (Eigen::Index k = 0; k < p->value.size(); ++k) {
      double& x = p->value.data()[k];
      const double saved = x;
      x = saved + eps;
      const double up = Evaluate(loss);
      x = saved - eps;
      const double down = Evaluate(loss);
      x = saved;
      const double numeric = (up - down) / (2.0 * eps);
      const double analytic = p->gradient.data()[k];
      const double denom = std::max({std::abs(analytic), std::abs(numeric), denominator_floor});
      const double rel = std::abs(analytic - numeric) / denom;
      if (rel > entry.max_rel_error || entry.worst_index < 0) {
        entry.max_rel_error = rel;
        entry.worst_index = k;
        entry.analytic = analytic;
        entry.numeric = numeric;
      }
      ++report.entries_checked;
    }
    report.max_rel_error = std::max(report.max_rel_error, entry.max_rel_error);
    report.per_parameter.push_back(entry);
  }
  return report;
}

GradCheckReport FiniteDifferenceCheck(const LossBuilder& loss, ParameterSet& params, double eps,
                                      double denominator_floor) {
  std::vector<Parameter*> all;
  for (std::size_t i = 0; i < params.size(); ++i) all.push_back(&params[i]);
  return FiniteDifferenceCheck(loss, all, eps, denominator_floor);
}

}  // namespace gcal
