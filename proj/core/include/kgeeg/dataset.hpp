#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "kgeeg/recording.hpp"

namespace kgeeg {

// One model input window, channel-major [n_channels x n_samples].
struct Chunk {
  std::vector<float> data;
  std::string subject_id;
};

struct Trial {
  std::vector<float> data;  // [n_channels x n_samples]
  std::size_t label = 0;
  std::string subject_id;
};

struct TrialSet {
  std::size_t n_channels = 0;
  std::size_t n_samples = 0;
  std::vector<std::string> class_names;
  std::vector<Trial> trials;

  std::size_t n_classes() const { return class_names.size(); }
  std::vector<std::string> subjects() const;  // sorted, unique
};

// Chunks every recording (250 Hz, drop_last) into a flat list.
std::vector<Chunk> chunk_recordings(const std::vector<Recording>& recs,
                                    std::size_t length = kChunkSamples);

// One trial per annotation: the window [onset, onset + length) labeled with
// the annotation text, zero-padded past the end of the recording. Class
// indices follow the sorted set of labels.
TrialSet extract_trials(const std::vector<Recording>& recs,
                        std::size_t length = kChunkSamples);

// Every *.erf file directly under `dir`, sorted by file name.
std::vector<std::filesystem::path> list_recordings(const std::filesystem::path& dir);

// Deterministic 64-bit FNV-1a digest, used for cache keys and leakage checks.
std::uint64_t fnv1a(const void* data, std::size_t bytes,
                    std::uint64_t seed = 0xcbf29ce484222325ULL);
std::uint64_t fnv1a(const std::string& text);

}  // namespace kgeeg
