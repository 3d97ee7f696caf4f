#include "kgeeg/dataset.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <set>

#include "kgeeg/error.hpp"

namespace kgeeg {

std::vector<std::string> TrialSet::subjects() const {
  std::set<std::string> s;
  for (const auto& t : trials) s.insert(t.subject_id);
  return {s.begin(), s.end()};
}

std::vector<Chunk> chunk_recordings(const std::vector<Recording>& recs, std::size_t length) {
  std::vector<Chunk> out;
  for (const auto& rec : recs) {
    for (auto& block : chunk(rec, length, true)) {
      out.push_back({std::move(block), rec.subject_id});
    }
  }
  return out;
}

TrialSet extract_trials(const std::vector<Recording>& recs, std::size_t length) {
  TrialSet set;
  set.n_samples = length;
  std::set<std::string> labels;
  for (const auto& rec : recs) {
    for (const auto& a : rec.annotations) labels.insert(a.label);
  }
  set.class_names.assign(labels.begin(), labels.end());
  std::map<std::string, std::size_t> index;
  for (std::size_t i = 0; i < set.class_names.size(); ++i) index[set.class_names[i]] = i;

  for (const auto& rec : recs) {
    if (set.n_channels == 0) set.n_channels = rec.n_channels();
    if (rec.n_channels() != set.n_channels) {
      throw ShapeError("recording " + rec.subject_id + " has " +
                       std::to_string(rec.n_channels()) + " channels, expected " +
                       std::to_string(set.n_channels));
    }
    for (const auto& a : rec.annotations) {
      const auto onset = static_cast<std::size_t>(std::llround(std::max(0.0, a.onset_s) * rec.fs));
      Trial trial;
      trial.label = index.at(a.label);
      trial.subject_id = rec.subject_id;
      trial.data.assign(set.n_channels * length, 0.0f);
      if (onset < rec.n_samples) {
        const std::size_t take = std::min(length, rec.n_samples - onset);
        for (std::size_t c = 0; c < set.n_channels; ++c) {
          const auto row = rec.row(c);
          std::copy_n(row.begin() + static_cast<std::ptrdiff_t>(onset), take,
                      trial.data.begin() + static_cast<std::ptrdiff_t>(c * length));
        }
      }
      set.trials.push_back(std::move(trial));
    }
  }
  return set;
}

std::vector<std::filesystem::path> list_recordings(const std::filesystem::path& dir) {
  std::vector<std::filesystem::path> out;
  if (!std::filesystem::is_directory(dir)) {
    throw DataError(dir.string() + " is not a directory");
  }
  for (const auto& entry : std::filesystem::directory_iterator(dir)) {
    if (entry.is_regular_file() && entry.path().extension() == ".erf") {
      out.push_back(entry.path());
    }
  }
  std::sort(out.begin(), out.end());
  return out;
}

std::uint64_t fnv1a(const void* data, std::size_t bytes, std::uint64_t seed) {
  const auto* p = static_cast<const unsigned char*>(data);
  std::uint64_t h = seed;
  for (std::size_t i = 0; i < bytes; ++i) {
    h ^= p[i];
    h *= 0x100000001b3ULL;
  }
  return h;
}

std::uint64_t fnv1a(const std::string& text) { return fnv1a(text.data(), text.size()); }

}  // namespace kgeeg
