#pragma once

#include <cstddef>
#include <filesystem>
#include <span>
#include <string>
#include <vector>

namespace kgeeg {

inline constexpr double kModelFs = 250.0;
inline constexpr std::size_t kChunkSamples = 15360;  // 61.44 s at 250 Hz

struct Annotation {
  double onset_s = 0.0;
  double duration_s = 0.0;
  std::string label;

  bool operator==(const Annotation&) const = default;
};

// Multichannel EEG in microvolts, channel-major: data[ch * n_samples + t].
struct Recording {
  std::vector<std::string> channels;
  double fs = kModelFs;
  std::size_t n_samples = 0;
  std::vector<float> data;
  std::string subject_id;
  std::vector<Annotation> annotations;

  std::size_t n_channels() const { return channels.size(); }
  std::span<float> row(std::size_t ch) {
    return {data.data() + ch * n_samples, n_samples};
  }
  std::span<const float> row(std::size_t ch) const {
    return {data.data() + ch * n_samples, n_samples};
  }
  double duration_s() const { return static_cast<double>(n_samples) / fs; }

  // Throws IntegrityError / ParameterError when an invariant is broken.
  void validate() const;
};

// Canonical "ERF" file:
//   bytes 0..3   magic "ERF1"
//   bytes 4..7   u32 little-endian header length H
//   bytes 8..8+H UTF-8 JSON {channels, fs, subject_id, n_samples, annotations}
//   then n_channels * n_samples little-endian float32, channel-major.
void write_recording(const Recording& rec, const std::filesystem::path& path);
Recording load_recording(const std::filesystem::path& path);

// Non-overlapping consecutive windows of `length` samples, each returned as a
// channel-major [n_channels x length] block. A recording shorter than one
// window yields no chunks. Otherwise the trailing partial window is dropped
// when drop_last is set and zero-padded when it is not.
std::vector<std::vector<float>> chunk(const Recording& rec,
                                      std::size_t length = kChunkSamples,
                                      bool drop_last = true);

}  // namespace kgeeg
