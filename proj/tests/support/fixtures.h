#ifndef GCAL_TESTS_FIXTURES_H_
#define GCAL_TESTS_FIXTURES_H_

#include <filesystem>
#include <random>
#include <string>

#include "gcal/content_encoder.h"
#include "gcal/het_gnn.h"
#include "gcal/parameters.h"
#include "oracle.h"

namespace gcal::testing {

// Every parameter uniform in [-scale, scale].
inline void Randomize(ParameterSet& set, std::uint64_t seed, double scale = 0.5) {
  std::mt19937_64 rng(seed);
  for (std::size_t i = 0; i < set.size(); ++i) {
    set[i].value = oracle::RandomMatrix(rng, static_cast<int>(set[i].value.rows()),
                                        static_cast<int>(set[i].value.cols()), scale);
  }
}

inline oracle::GruWeights ToOracle(const GruParams& p) {
  using oracle::FromDense;
  return {FromDense(p.w_update->value),    FromDense(p.u_update->value),
          FromDense(p.b_update->value),    FromDense(p.w_reset->value),
          FromDense(p.u_reset->value),     FromDense(p.b_reset->value),
          FromDense(p.w_candidate->value), FromDense(p.u_candidate->value),
          FromDense(p.b_candidate->value)};
}

inline oracle::LstmWeights ToOracle(const LstmParams& p) {
  using oracle::FromDense;
  return {FromDense(p.w_input->value),  FromDense(p.u_input->value),  FromDense(p.b_input->value),
          FromDense(p.w_forget->value), FromDense(p.u_forget->value), FromDense(p.b_forget->value),
          FromDense(p.w_output->value), FromDense(p.u_output->value), FromDense(p.b_output->value),
          FromDense(p.w_cell->value),   FromDense(p.u_cell->value),   FromDense(p.b_cell->value)};
}

inline std::vector<double> Row(const DenseMatrix& m, Eigen::Index r = 0) {
  std::vector<double> out(static_cast<std::size_t>(m.cols()));
  for (Eigen::Index j = 0; j < m.cols(); ++j) out[static_cast<std::size_t>(j)] = m(r, j);
  return out;
}

inline double MaxAbsDiff(const std::vector<double>& a, const std::vector<double>& b) {
  if (a.size() != b.size()) return INFINITY;
  double worst = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) worst = std::max(worst, std::abs(a[i] - b[i]));
  return worst;
}

// Fresh directory under the system temp dir, removed on destruction.
class TempDir {
 public:
  explicit TempDir(const std::string& tag) {
    std::random_device rd;
    path_ = std::filesystem::temp_directory_path() /
            ("gcal_" + tag + "_" + std::to_string(rd()) + std::to_string(rd()));
    std::filesystem::create_directories(path_);
  }
  ~TempDir() {
    std::error_code ec;
    std::filesystem::remove_all(path_, ec);
  }
  TempDir(const TempDir&) = delete;
  TempDir& operator=(const TempDir&) = delete;

  const std::filesystem::path& path() const { return path_; }
  std::filesystem::path operator/(const std::string& name) const { return path_ / name; }

 private:
  std::filesystem::path path_;
};

}  // namespace gcal::testing

#endif  // GCAL_TESTS_FIXTURES_H_
