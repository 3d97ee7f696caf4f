#include "kgeeg/error.hpp"

#include <utility>

namespace kgeeg {

namespace {

std::string join(const std::vector<std::string>& items) {
  std::string out;
  for (const auto& s : items) {
    if (!out.empty()) out += ", ";
    out += s;
  }
  return out;
}

}  // namespace

MissingChannelError::MissingChannelError(std::vector<std::string> missing)
    : Error("missing channels: " + join(missing)), missing_(std::move(missing)) {}

DegenerateChannelError::DegenerateChannelError(std::string channel)
    : Error("degenerate (zero-variance) channel: " + channel),
      channel_(std::move(channel)) {}

DivergenceError::DivergenceError(std::size_t iteration)
    : Error("non-finite loss at iteration " + std::to_string(iteration)),
      iteration_(iteration) {}

ConfigError::ConfigError(std::string path, const std::string& what)
    : Error(path + ": " + what), path_(std::move(path)) {}

}  // namespace kgeeg
