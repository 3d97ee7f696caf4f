#include "run.hpp"

#include <chrono>
#include <cstdio>
#include <cstdlib>
#include <ctime>
#include <fstream>
#include <sstream>

#include <json.hpp>

#include "kgeeg/dataset.hpp"
#include "kgeeg/error.hpp"
#include "kgeeg/version.hpp"

namespace kgeeg::cli {

namespace fs = std::filesystem;

int exit_code_for(const std::exception& e) {
  if (dynamic_cast<const DivergenceError*>(&e)) return 3;
  if (dynamic_cast<const ConfigError*>(&e) || dynamic_cast<const ParameterError*>(&e)) return 1;
  return 2;
}

std::string hex64(std::uint64_t v) {
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(v));
  return buf;
}

std::string utc_now() {
  const std::time_t now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  std::tm tm{};
  gmtime_r(&now, &tm);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

void RunManifest::write() const {
  nlohmann::ordered_json j;
  j["experiment_id"] = experiment_id;
  j["command"] = command;
  j["config_path"] = config_path;
  j["config_hash"] = config_hash;
  j["code_version"] = code_version;
  j["seed"] = seed;
  j["out_dir"] = out_dir.string();
  j["started_at"] = started_at;
  j["finished_at"] = finished_at.empty() ? nlohmann::ordered_json() : nlohmann::ordered_json(finished_at);
  j["status"] = status;
  if (!error.empty()) j["error"] = error;
  std::ofstream out(path());
  if (!out) throw DataError("cannot write " + path().string());
  out << j.dump(2) << '\n';
}

ExperimentConfig resolve_config(const GlobalOptions& opts) {
  ExperimentConfig cfg = opts.config_path.empty() ? ExperimentConfig{} : load_config(opts.config_path);
  if (opts.seed) {
    cfg.seed = *opts.seed;
    cfg.train.seed = *opts.seed;
  }
  return cfg;
}

Run::Run(const std::string& command, const GlobalOptions& opts, const ExperimentConfig& cfg,
         const std::string& identity) {
  const std::string config_text = to_json(cfg);
  std::string source = config_text;
  if (!opts.config_path.empty()) {
    std::ifstream in(opts.config_path);
    std::stringstream ss;
    ss << in.rdbuf();
    source = ss.str();
  }
  manifest_.command = command;
  manifest_.config_path = opts.config_path;
  manifest_.config_hash = hex64(fnv1a(source));
  manifest_.experiment_id =
      command + "-" + hex64(fnv1a(command + '\n' + config_text + '\n' + identity)).substr(0, 8);
  manifest_.code_version = code_version();
  manifest_.seed = cfg.seed;
  if (!opts.out.empty()) {
    manifest_.out_dir = opts.out;
  } else {
    const char* root = std::getenv("KGEEG_OUT_ROOT");
    manifest_.out_dir = fs::path(root && *root ? root : "runs") / manifest_.experiment_id;
  }
  manifest_.started_at = utc_now();
  fs::create_directories(manifest_.out_dir);
  manifest_.write();
  std::ofstream(manifest_.out_dir / "config.json") << config_text << '\n';
}

void Run::finish(int exit_code, const std::string& error) {
  manifest_.finished_at = utc_now();
  manifest_.status = exit_code == 0 ? "ok" : "failed";
  manifest_.error = error;
  manifest_.write();
}

}  // namespace kgeeg::cli
