#pragma once

#include <optional>
#include <string>

#include "run.hpp"

namespace kgeeg::cli {

struct PreprocessArgs {
  std::string in_dir;
  bool keep_channels = false;
};

struct SynthArgs {
  std::string kind = "task";  // corpus | task
  bool shuffle_labels = false;
};

struct BandpowerArgs {
  std::string in_dir;
};

struct PretrainArgs {
  std::string data_dir;  // empty: synthetic corpus from the config
  std::optional<double> lambda;
  std::optional<std::size_t> iterations;
  std::optional<std::size_t> batch_size;
};

struct FinetuneArgs {
  std::string checkpoint;
  std::string data_dir;  // empty: synthetic task from the config
  std::optional<std::string> policy;
  std::optional<double> fraction;
  std::optional<std::size_t> n_fc;
};

struct SweepArgs {
  std::string axis = "finetune_fraction";
  std::string values = "1.0,0.5,0.3,0.1";
  std::string checkpoint;
  std::string data_dir;
  std::string corpus_dir;
  std::optional<std::string> policy;
  std::optional<std::size_t> iterations;
};

struct ReportArgs {
  std::string in_dir;
};

// Each returns the process exit code; library errors propagate.
int cmd_preprocess(const GlobalOptions& g, const PreprocessArgs& a);
int cmd_synth(const GlobalOptions& g, const SynthArgs& a);
int cmd_bandpower(const GlobalOptions& g, const BandpowerArgs& a);
int cmd_pretrain(const GlobalOptions& g, const PretrainArgs& a);
int cmd_finetune(const GlobalOptions& g, const FinetuneArgs& a);
int cmd_sweep(const GlobalOptions& g, const SweepArgs& a);
int cmd_report(const GlobalOptions& g, const ReportArgs& a);

}  // namespace kgeeg::cli
