#pragma once

#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "kgeeg/dataset.hpp"
#include "kgeeg/recording.hpp"

namespace kgeeg {

struct Tone {
  double freq_hz = 0.0;
  double amplitude = 0.0;
};

struct ChannelSpec {
  std::string channel;
  std::vector<Tone> tones;
};

// Each channel is the sum of its tones (phases drawn from `seed`) plus white
// noise of standard deviation noise_std. Throws ParameterError for a tone at
// or above Nyquist.
Recording synth_recording(const std::vector<ChannelSpec>& spec, double noise_std,
                          double duration_s, double fs, std::uint64_t seed);

// Band-dominant synthetic EEG: per channel a few tones inside the dominant
// band, one weaker tone elsewhere and white noise, standardized per channel.
struct BandChunkOptions {
  std::size_t n_channels = 19;
  std::size_t n_samples = kChunkSamples;
  double fs = kModelFs;
  std::size_t tones_per_channel = 3;
  double background_amplitude = 0.3;
  double noise_std = 0.5;
};

std::vector<float> synth_band_chunk(const std::string& dominant_band,
                                    const BandChunkOptions& options, std::uint64_t seed);

// Unlabeled pre-training corpus. Each subject has a preferred band; each
// chunk uses it with probability 1/2 and a uniformly drawn band otherwise.
struct CorpusSpec {
  std::size_t n_subjects = 10;
  std::size_t chunks_per_subject = 20;
  BandChunkOptions chunk;
  std::uint64_t seed = 0;
};

std::vector<Chunk> synth_pretraining_corpus(const CorpusSpec& spec);

// Labeled task: class i chunks are dominated by class_bands[i]. With
// shuffle_labels the labels are permuted after generation, destroying the
// signal-label relation while keeping class balance.
struct TaskSpec {
  std::size_t n_subjects = 10;
  std::size_t trials_per_subject = 20;
  std::vector<std::string> class_bands = {"alpha", "beta"};
  BandChunkOptions chunk;
  bool shuffle_labels = false;
  std::uint64_t seed = 0;
};

TrialSet synth_task(const TaskSpec& spec);

}  // namespace kgeeg
