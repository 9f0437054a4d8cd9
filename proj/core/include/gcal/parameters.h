#ifndef GCAL_PARAMETERS_H_
#define GCAL_PARAMETERS_H_

#include <cstdint>
#include <filesystem>
#include <memory>
#include <random>
#include <string>
#include <vector>

#include "gcal/tensor.h"

namespace gcal {

// Named collection of trainable parameters (the model's weights). Parameters
// have stable addresses for the lifetime of the set, so modules may hold raw
// pointers into it.
class ParameterSet {
 public:
  ParameterSet() = default;
  ParameterSet(const ParameterSet&) = delete;
  ParameterSet& operator=(const ParameterSet&) = delete;
  ParameterSet(ParameterSet&&) = default;
  ParameterSet& operator=(ParameterSet&&) = default;

  // Registers a zero-valued parameter. Names must be unique.
  Parameter& add(const std::string& name, Eigen::Index rows, Eigen::Index cols);

  Parameter* find(const std::string& name);
  const Parameter* find(const std::string& name) const;

  std::size_t size() const { return params_.size(); }
  std::size_t scalar_count() const;
  Parameter& operator[](std::size_t i) { return *params_[i]; }
  const Parameter& operator[](std::size_t i) const { return *params_[i]; }

  void zero_grad();
  // Copies values from a set with identical names and shapes.
  void copy_values_from(const ParameterSet& other);

 private:
  std::vector<std::unique_ptr<Parameter>> params_;
};

// uniform(-a, a) with a = sqrt(6 / (fan_in + fan_out)).
void XavierUniform(Parameter& p, std::mt19937_64& rng);
void NormalInit(Parameter& p, double stddev, std::mt19937_64& rng);

// Checkpoint file: container kind "checkpoint". The manifest lists every
// parameter with name, shape and byte offset into the payload of raw
// little-endian doubles; `meta_json` is an arbitrary JSON object stored
// alongside (the model configuration).
void SaveCheckpoint(const std::filesystem::path& path, const ParameterSet& params,
                    const std::string& meta_json = "{}");
// Loads values into an already-shaped set. Rejects missing names, shape
// mismatches and checksum failures with Error(kCorruptFile).
void LoadCheckpoint(const std::filesystem::path& path, ParameterSet& params);
// Materializes every stored parameter with the shape recorded in the file.
ParameterSet LoadCheckpointAsSet(const std::filesystem::path& path);
// Reads only the stored meta object.
std::string ReadCheckpointMeta(const std::filesystem::path& path);

}  // namespace gcal

#endif  // GCAL_PARAMETERS_H_
