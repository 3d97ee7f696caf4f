#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "kgeeg/recording.hpp"

namespace kgeeg {

struct PreprocessConfig {
  double notch_hz = 60.0;
  double notch_q = 30.0;
  double band_low_hz = 0.5;
  double band_high_hz = 50.0;
  double target_fs = 250.0;
  int highpass_order = 4;   // Butterworth, even
  int lowpass_order = 12;   // Butterworth, even

  // Checks 0 < low < high < target_fs / 2 and positive orders/Q.
  void validate() const;
};

// Second-order section: b0 b1 b2 / 1 a1 a2 (a0 normalized to 1).
struct Biquad {
  double b0 = 1.0, b1 = 0.0, b2 = 0.0;
  double a1 = 0.0, a2 = 0.0;
};
using Sos = std::vector<Biquad>;

Sos design_notch(double f0_hz, double q, double fs);
Sos design_butter_lowpass(int order, double cutoff_hz, double fs);
Sos design_butter_highpass(int order, double cutoff_hz, double fs);

// Single causal pass with zero initial state.
std::vector<double> sos_filter(const Sos& sos, std::span<const double> x);
// Forward-backward (zero-phase) filtering with odd-reflection padding long
// enough for the slowest pole to settle.
std::vector<double> sos_filtfilt(const Sos& sos, std::span<const double> x);
// |H(e^{jw})| of one pass at frequency f.
double sos_gain(const Sos& sos, double f_hz, double fs);

Recording notch(const Recording& rec, const PreprocessConfig& cfg);
Recording bandpass(const Recording& rec, const PreprocessConfig& cfg);
Recording detrend_linear(const Recording& rec);
Recording normalize_channels(const Recording& rec);
Recording resample(const Recording& rec, double target_fs = kModelFs);

// Polyphase rational resampling of one signal by up/down with a Kaiser
// windowed-sinc anti-aliasing filter. Output length round(n * up / down).
std::vector<double> resample_poly(std::span<const double> x, std::size_t up,
                                  std::size_t down);

// notch -> bandpass -> detrend_linear -> normalize_channels -> resample.
Recording preprocess_pipeline(const Recording& rec, const PreprocessConfig& cfg);

const std::array<std::string, 5>& pipeline_stage_names();
// FNV-1a of the '>'-joined stage names; pinned by tests.
std::uint64_t pipeline_signature();

}  // namespace kgeeg
