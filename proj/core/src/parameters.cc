#include "gcal/parameters.h"

#include <cmath>

#include "gcal/container.h"
#include "gcal/error.h"
#include "gcal/random.h"
#include "json.hpp"

namespace gcal {

Parameter& ParameterSet::add(const std::string& name, Eigen::Index rows, Eigen::Index cols) {
  if (find(name) != nullptr) {
    throw Error(ErrorCode::kInvalidArgument, "duplicate parameter " + name);
  }
  auto p = std::make_unique<Parameter>();
  p->name = name;
  p->value = DenseMatrix::Zero(rows, cols);
  p->gradient = DenseMatrix::Zero(rows, cols);
  params_.push_back(std::move(p));
  return *params_.back();
}

Parameter* ParameterSet::find(const std::string& name) {
  for (auto& p : params_) {
    if (p->name == name) return p.get();
  }
  return nullptr;
}

const Parameter* ParameterSet::find(const std::string& name) const {
  for (const auto& p : params_) {
    if (p->name == name) return p.get();
  }
  return nullptr;
}

std::size_t ParameterSet::scalar_count() const {
  std::size_t n = 0;
  for (const auto& p : params_) n += static_cast<std::size_t>(p->value.size());
  return n;
}

void ParameterSet::zero_grad() {
  for (auto& p : params_) p->gradient.setZero(p->value.rows(), p->value.cols());
}

void ParameterSet::copy_values_from(const ParameterSet& other) {
  for (auto& p : params_) {
    const Parameter* src = other.find(p->name);
    if (src == nullptr || src->value.rows() != p->value.rows() ||
        src->value.cols() != p->value.cols()) {
      throw Error(ErrorCode::kShapeMismatch, "cannot copy parameter " + p->name);
    }
    p->value = src->value;
  }
}

void XavierUniform(Parameter& p, std::mt19937_64& rng) {
  const double fan = static_cast<double>(p.value.rows() + p.value.cols());
  const double a = std::sqrt(6.0 / fan);
  for (Eigen::Index i = 0; i < p.value.size(); ++i) {
    p.value.data()[i] = (2.0 * UniformUnit(rng) - 1.0) * a;
  }
}

void NormalInit(Parameter& p, double stddev, std::mt19937_64& rng) {
  // Box-Muller on the portable uniform source.
  for (Eigen::Index i = 0; i < p.value.size(); ++i) {
    const double u1 = 1.0 - UniformUnit(rng);
    const double u2 = UniformUnit(rng);
    p.value.data()[i] = stddev * std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * M_PI * u2);
  }
}

void SaveCheckpoint(const std::filesystem::path& path, const ParameterSet& params,
                    const std::string& meta_json) {
  nlohmann::ordered_json manifest;
  manifest["meta"] = nlohmann::ordered_json::parse(meta_json);
  auto& entries = manifest["parameters"] = nlohmann::ordered_json::array();
  ByteWriter payload;
  for (std::size_t i = 0; i < params.size(); ++i) {
    const Parameter& p = params[i];
    entries.push_back({{"name", p.name},
                       {"shape", {p.value.rows(), p.value.cols()}},
                       {"offset", payload.bytes().size()}});
    for (Eigen::Index k = 0; k < p.value.size(); ++k) payload.f64(p.value.data()[k]);
  }
  Container c;
  c.kind = "checkpoint";
  c.manifest_json = manifest.dump();
  c.payload = std::move(payload.bytes());
  WriteContainer(path, c);
}

void LoadCheckpoint(const std::filesystem::path& path, ParameterSet& params) {
  Container c = ReadContainer(path, "checkpoint");
  const auto manifest = nlohmann::json::parse(c.manifest_json);
  const auto& entries = manifest.at("parameters");
  if (entries.size() != params.size()) {
    throw Error(ErrorCode::kCorruptFile, "checkpoint holds " + std::to_string(entries.size()) +
                                             " parameters, model expects " +
                                             std::to_string(params.size()));
  }
  for (const auto& e : entries) {
    const std::string name = e.at("name");
    Parameter* p = params.find(name);
    if (p == nullptr) {
      throw Error(ErrorCode::kCorruptFile, "unknown parameter " + name);
    }
    const Eigen::Index rows = e.at("shape")[0];
    const Eigen::Index cols = e.at("shape")[1];
    if (rows != p->value.rows() || cols != p->value.cols()) {
      throw Error(ErrorCode::kCorruptFile, "shape mismatch for " + name);
    }
    const std::size_t offset = e.at("offset");
    const std::size_t bytes = static_cast<std::size_t>(rows * cols) * 8;
    if (offset + bytes > c.payload.size()) {
      throw Error(ErrorCode::kCorruptFile, "payload too short for " + name);
    }
    std::vector<std::uint8_t> slice(c.payload.begin() + offset, c.payload.begin() + offset + bytes);
    ByteReader reader(slice);
    for (Eigen::Index k = 0; k < p->value.size(); ++k) p->value.data()[k] = reader.f64();
  }
}

ParameterSet LoadCheckpointAsSet(const std::filesystem::path& path) {
  Container c = ReadContainer(path, "checkpoint");
  const auto manifest = nlohmann::json::parse(c.manifest_json);
  ParameterSet set;
  for (const auto& e : manifest.at("parameters")) {
    set.add(e.at("name").get<std::string>(), e.at("shape")[0].get<Eigen::Index>(),
            e.at("shape")[1].get<Eigen::Index>());
  }
  LoadCheckpoint(path, set);
  return set;
}

std::string ReadCheckpointMeta(const std::filesystem::path& path) {
  Container c = ReadContainer(path, "checkpoint");
  return nlohmann::json::parse(c.manifest_json).at("meta").dump();
}

}  // namespace gcal
