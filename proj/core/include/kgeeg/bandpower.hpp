#pragma once

#include <cstddef>
#include <span>
#include <string>
#include <vector>

#include "kgeeg/tensor.hpp"

namespace kgeeg {

inline constexpr std::size_t kPowerWindow = 1024;  // 4.096 s at 250 Hz
inline constexpr double kPowerEps = 1e-8;

struct Band {
  std::string name;
  double low_hz = 0.0;
  double high_hz = 0.0;
};

// Ordered, non-overlapping frequency bands. Bins are assigned half-open
// [low, high) by their center frequency; bins in gaps belong to no band.
class BandDefinition {
 public:
  // delta [0.5,4) theta [4,8) alpha [8,13) beta [14,30) gamma [30,50)
  static const BandDefinition& standard();

  explicit BandDefinition(std::vector<Band> bands);

  std::size_t size() const { return bands_.size(); }
  const Band& operator[](std::size_t i) const { return bands_[i]; }
  const std::vector<Band>& bands() const { return bands_; }
  // Index of the named band; throws ParameterError when unknown.
  std::size_t index_of(const std::string& name) const;

 private:
  std::vector<Band> bands_;
};

struct Spectrum {
  std::vector<double> freqs;
  std::vector<double> psd;  // one-sided density, units^2 / Hz
};

// One-sided Hann-windowed periodogram of a kPowerWindow-sample window.
// sum(psd) * df equals sum((w x)^2) / sum(w^2).
Spectrum periodogram(std::span<const double> window, double fs = 250.0);

// Log band power for one channel-major chunk [n_channels x n_samples], where
// n_samples is a multiple of kPowerWindow. Returns [n_channels x n_bands x
// n_windows]; each value is ln(eps + sum of psd * df over the band's bins),
// i.e. the integrated power of the band in that window.
Tensor band_power(std::span<const float> chunk, std::size_t n_channels,
                  const BandDefinition& bands = BandDefinition::standard(),
                  double fs = 250.0, double eps = kPowerEps);

}  // namespace kgeeg
