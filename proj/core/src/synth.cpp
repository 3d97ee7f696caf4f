#include "kgeeg/synth.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <random>

#include "kgeeg/bandpower.hpp"
#include "kgeeg/error.hpp"

namespace kgeeg {

namespace {

void add_tone(std::vector<double>& x, double fs, double freq, double amp, double phase) {
  const double w = 2.0 * std::numbers::pi * freq / fs;
  for (std::size_t t = 0; t < x.size(); ++t) {
    x[t] += amp * std::sin(w * static_cast<double>(t) + phase);
  }
}

}  // namespace

Recording synth_recording(const std::vector<ChannelSpec>& spec, double noise_std,
                          double duration_s, double fs, std::uint64_t seed) {
  if (!(fs > 0.0)) throw ParameterError("fs must be positive");
  if (!(duration_s > 0.0)) throw ParameterError("duration must be positive");
  if (noise_std < 0.0) throw ParameterError("noise_std must be non-negative");
  for (const auto& ch : spec) {
    for (const auto& tone : ch.tones) {
      if (tone.freq_hz >= fs / 2.0 || tone.freq_hz < 0.0) {
        throw ParameterError("tone at " + std::to_string(tone.freq_hz) +
                             " Hz is outside [0, Nyquist) for fs " + std::to_string(fs));
      }
    }
  }

  Recording rec;
  rec.fs = fs;
  rec.n_samples = static_cast<std::size_t>(std::llround(duration_s * fs));
  rec.subject_id = "synthetic";
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> phase(0.0, 2.0 * std::numbers::pi);
  std::normal_distribution<double> noise(0.0, 1.0);
  std::vector<double> x(rec.n_samples);
  for (const auto& ch : spec) {
    rec.channels.push_back(ch.channel);
    std::fill(x.begin(), x.end(), 0.0);
    for (const auto& tone : ch.tones) add_tone(x, fs, tone.freq_hz, tone.amplitude, phase(rng));
    if (noise_std > 0.0) {
      for (auto& v : x) v += noise_std * noise(rng);
    }
    for (double v : x) rec.data.push_back(static_cast<float>(v));
  }
  rec.validate();
  return rec;
}

std::vector<float> synth_band_chunk(const std::string& dominant_band,
                                    const BandChunkOptions& options, std::uint64_t seed) {
  const auto& bands = BandDefinition::standard();
  const std::size_t dom = bands.index_of(dominant_band);
  if (bands[dom].high_hz >= options.fs / 2.0) {
    throw ParameterError("band " + dominant_band + " exceeds Nyquist");
  }
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  std::normal_distribution<double> noise(0.0, 1.0);
  auto draw_freq = [&](const Band& b) {
    const double lo = b.low_hz + 0.5, hi = b.high_hz - 0.5;
    return lo + (hi - lo) * unit(rng);
  };

  std::vector<float> out(options.n_channels * options.n_samples);
  std::vector<double> x(options.n_samples);
  for (std::size_t c = 0; c < options.n_channels; ++c) {
    std::fill(x.begin(), x.end(), 0.0);
    for (std::size_t k = 0; k < options.tones_per_channel; ++k) {
      add_tone(x, options.fs, draw_freq(bands[dom]), 0.5 + unit(rng),
               2.0 * std::numbers::pi * unit(rng));
    }
    std::size_t other = std::uniform_int_distribution<std::size_t>(0, bands.size() - 2)(rng);
    if (other >= dom) ++other;
    add_tone(x, options.fs, draw_freq(bands[other]), options.background_amplitude,
             2.0 * std::numbers::pi * unit(rng));
    for (auto& v : x) v += options.noise_std * noise(rng);

    double mean = 0.0;
    for (double v : x) mean += v;
    mean /= static_cast<double>(x.size());
    double var = 0.0;
    for (double v : x) var += (v - mean) * (v - mean);
    const double sd = std::sqrt(var / static_cast<double>(x.size()));
    for (std::size_t t = 0; t < x.size(); ++t) {
      out[c * options.n_samples + t] = static_cast<float>((x[t] - mean) / sd);
    }
  }
  return out;
}

std::vector<Chunk> synth_pretraining_corpus(const CorpusSpec& spec) {
  const auto& bands = BandDefinition::standard();
  std::mt19937_64 rng(spec.seed);
  std::uniform_int_distribution<std::size_t> pick(0, bands.size() - 1);
  std::bernoulli_distribution preferred(0.5);
  std::vector<Chunk> corpus;
  for (std::size_t s = 0; s < spec.n_subjects; ++s) {
    const std::size_t pref = pick(rng);
    const std::string subject = "sub-" + std::to_string(s + 1);
    for (std::size_t k = 0; k < spec.chunks_per_subject; ++k) {
      const std::size_t band = preferred(rng) ? pref : pick(rng);
      corpus.push_back({synth_band_chunk(bands[band].name, spec.chunk, rng()), subject});
    }
  }
  return corpus;
}

TrialSet synth_task(const TaskSpec& spec) {
  if (spec.class_bands.size() < 2) throw ParameterError("a task needs at least two classes");
  TrialSet set;
  set.n_channels = spec.chunk.n_channels;
  set.n_samples = spec.chunk.n_samples;
  set.class_names = spec.class_bands;
  std::mt19937_64 rng(spec.seed);
  const std::size_t n_classes = spec.class_bands.size();
  for (std::size_t s = 0; s < spec.n_subjects; ++s) {
    const std::string subject = "sub-" + std::to_string(s + 1);
    for (std::size_t k = 0; k < spec.trials_per_subject; ++k) {
      const std::size_t label = k % n_classes;
      set.trials.push_back({synth_band_chunk(spec.class_bands[label], spec.chunk, rng()),
                            label, subject});
    }
  }
  if (spec.shuffle_labels) {
    std::vector<std::size_t> labels;
    for (const auto& t : set.trials) labels.push_back(t.label);
    std::shuffle(labels.begin(), labels.end(), rng);
    for (std::size_t i = 0; i < labels.size(); ++i) set.trials[i].label = labels[i];
  }
  return set;
}

}  // namespace kgeeg
