#pragma once

#include <cstdint>
#include <exception>
#include <filesystem>
#include <optional>
#include <string>

#include "kgeeg/config.hpp"

namespace kgeeg::cli {

struct GlobalOptions {
  std::string config_path;
  std::optional<std::uint64_t> seed;
  std::string out;
  std::size_t workers = 1;
};

// Written to <out>/<experiment_id>.manifest.json before any compute and
// rewritten when the command finishes.
struct RunManifest {
  std::string experiment_id;
  std::string command;
  std::string config_path;
  std::string config_hash;
  std::string code_version;
  std::uint64_t seed = 0;
  std::filesystem::path out_dir;
  std::string started_at;
  std::string finished_at;
  std::string status = "running";
  std::string error;

  std::filesystem::path path() const { return out_dir / (experiment_id + ".manifest.json"); }
  void write() const;
};

// Config file (or defaults) with --seed applied.
ExperimentConfig resolve_config(const GlobalOptions& opts);

// 0 success, 1 usage or config, 2 data, 3 numerical divergence.
int exit_code_for(const std::exception& e);

std::string hex64(std::uint64_t v);
std::string utc_now();

class Run {
 public:
  // `identity` is anything besides the effective config that changes the
  // outputs (input paths, subcommand flags); it feeds the experiment id.
  Run(const std::string& command, const GlobalOptions& opts, const ExperimentConfig& cfg,
      const std::string& identity = {});

  const std::filesystem::path& out() const { return manifest_.out_dir; }
  const std::string& id() const { return manifest_.experiment_id; }
  void finish(int exit_code, const std::string& error = {});

  // Runs `body`, recording its outcome in the manifest; errors propagate.
  template <typename F>
  int guard(F&& body) {
    try {
      const int rc = body();
      finish(rc);
      return rc;
    } catch (const std::exception& e) {
      finish(exit_code_for(e), e.what());
      throw;
    }
  }

 private:
  RunManifest manifest_;
};

}  // namespace kgeeg::cli
