#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <string>

#include "kgeeg/network.hpp"
#include "kgeeg/preprocess.hpp"
#include "kgeeg/split.hpp"
#include "kgeeg/synth.hpp"
#include "kgeeg/training.hpp"

namespace kgeeg {

struct SplitConfig {
  SplitScheme scheme = SplitScheme::kfold;
  std::size_t k = 5;
};

// Everything a CLI run needs. Every field has a default; a config file only
// lists what it changes. See README for the schema.
struct ExperimentConfig {
  std::uint64_t seed = 0;
  std::string model_preset = "desk";
  ModelConfig model = ModelConfig::desk();
  PreprocessConfig preprocess;
  TrainConfig train;
  SplitConfig split;
  CorpusSpec corpus;
  TaskSpec task;
};

// Model presets by name: full, desk, mini, tiny.
ModelConfig model_preset(const std::string& name);

// Parses and validates a JSON config. Unknown fields, wrong types and
// out-of-range values throw ConfigError carrying the field path.
ExperimentConfig parse_config(const std::string& json_text);
ExperimentConfig load_config(const std::filesystem::path& path);
// Full config (defaults included) as pretty-printed JSON; parse_config of
// the result reproduces the config.
std::string to_json(const ExperimentConfig& cfg);

}  // namespace kgeeg
