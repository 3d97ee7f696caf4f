#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <string>

#include "kgeeg/network.hpp"
#include "kgeeg/optimizer.hpp"

namespace kgeeg {

inline constexpr std::uint32_t kCheckpointMajor = 1;
inline constexpr std::uint32_t kCheckpointMinor = 0;

struct CheckpointMeta {
  std::string label;  // e.g. "knowledge-s4"
  std::uint64_t seed = 0;
  std::size_t iteration = 0;
  double lambda = 0.0;
};

// Checkpoint file: "KGCK", u32 major, u32 minor, u64 header length, JSON
// header (model config, head config, meta, tensor index with shapes, byte
// offsets and a discardable flag for decoder/projector tensors, optimizer
// step), then the tensors as little-endian float64. Files with a newer major
// version are rejected; unknown header fields are ignored.
void save_checkpoint(const std::filesystem::path& path, Model& model, const CheckpointMeta& meta,
                     const Adam* optimizer = nullptr);

struct Checkpoint {
  ModelConfig config;
  std::optional<HeadConfig> head;
  CheckpointMeta meta;
  std::uint64_t model_seed = 0;
  std::map<std::string, Tensor> tensors;    // model parameters by name
  std::map<std::string, Tensor> optimizer;  // "m/<name>", "v/<name>"
  std::size_t optimizer_steps = 0;

  // Rebuilds the model (and head, when saved) with the stored values.
  Model restore() const;
  // Loads stored moments into an optimizer over the same parameters.
  void restore_optimizer(Adam& optimizer) const;
};

// Throws FormatError for a bad magic/header or unsupported version and
// IntegrityError for a truncated payload.
Checkpoint load_checkpoint(const std::filesystem::path& path);

// Copies named tensors into matching model parameters; ShapeError on a
// shape mismatch, FormatError when a model parameter is missing.
void load_parameters(Model& model, const std::map<std::string, Tensor>& tensors);

}  // namespace kgeeg
