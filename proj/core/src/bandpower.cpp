#include "kgeeg/bandpower.hpp"

#include <cmath>
#include <complex>
#include <numbers>

#include "fft.hpp"
#include "kgeeg/error.hpp"

namespace kgeeg {

namespace {

const std::vector<double>& hann_window() {
  // periodic Hann
  static const std::vector<double> w = [] {
    std::vector<double> v(kPowerWindow);
    for (std::size_t i = 0; i < kPowerWindow; ++i) {
      v[i] = 0.5 - 0.5 * std::cos(2.0 * std::numbers::pi * static_cast<double>(i) /
                                  static_cast<double>(kPowerWindow));
    }
    return v;
  }();
  return w;
}

double window_energy() {
  static const double e = [] {
    double s = 0.0;
    for (double v : hann_window()) s += v * v;
    return s;
  }();
  return e;
}

}  // namespace

const BandDefinition& BandDefinition::standard() {
  static const BandDefinition def({{"delta", 0.5, 4.0},
                                   {"theta", 4.0, 8.0},
                                   {"alpha", 8.0, 13.0},
                                   {"beta", 14.0, 30.0},
                                   {"gamma", 30.0, 50.0}});
  return def;
}

BandDefinition::BandDefinition(std::vector<Band> bands) : bands_(std::move(bands)) {
  for (std::size_t i = 0; i < bands_.size(); ++i) {
    if (!(bands_[i].low_hz < bands_[i].high_hz) || bands_[i].low_hz < 0.0) {
      throw ParameterError("band " + bands_[i].name + " must satisfy 0 <= low < high");
    }
    if (i > 0 && bands_[i].low_hz < bands_[i - 1].high_hz) {
      throw ParameterError("bands must be ordered and non-overlapping");
    }
  }
}

std::size_t BandDefinition::index_of(const std::string& name) const {
  for (std::size_t i = 0; i < bands_.size(); ++i) {
    if (bands_[i].name == name) return i;
  }
  throw ParameterError("unknown band '" + name + "'");
}

Spectrum periodogram(std::span<const double> window, double fs) {
  if (window.size() != kPowerWindow) {
    throw ShapeError("periodogram expects " + std::to_string(kPowerWindow) +
                     " samples, got " + std::to_string(window.size()));
  }
  const auto& w = hann_window();
  std::vector<double> tapered(kPowerWindow);
  for (std::size_t i = 0; i < kPowerWindow; ++i) tapered[i] = window[i] * w[i];

  auto& fft = detail::RealFft::of_size(kPowerWindow);
  std::vector<std::complex<double>> spec(fft.bins());
  fft.forward(tapered, spec);

  Spectrum out;
  out.freqs.resize(fft.bins());
  out.psd.resize(fft.bins());
  const double scale = 1.0 / (fs * window_energy());
  for (std::size_t k = 0; k < fft.bins(); ++k) {
    out.freqs[k] = static_cast<double>(k) * fs / static_cast<double>(kPowerWindow);
    double p = std::norm(spec[k]) * scale;
    if (k != 0 && k != kPowerWindow / 2) p *= 2.0;
    out.psd[k] = p;
  }
  return out;
}

Tensor band_power(std::span<const float> chunk, std::size_t n_channels,
                  const BandDefinition& bands, double fs, double eps) {
  if (n_channels == 0 || chunk.size() % n_channels != 0) {
    throw ShapeError("chunk size is not a multiple of the channel count");
  }
  const std::size_t n_samples = chunk.size() / n_channels;
  if (n_samples == 0 || n_samples % kPowerWindow != 0) {
    throw ShapeError("chunk length " + std::to_string(n_samples) +
                     " is not a multiple of " + std::to_string(kPowerWindow));
  }
  const std::size_t n_windows = n_samples / kPowerWindow;
  const double df = fs / static_cast<double>(kPowerWindow);

  // Bin -> band lookup, -1 for bins outside every band.
  std::vector<int> bin_band(kPowerWindow / 2 + 1, -1);
  for (std::size_t k = 0; k < bin_band.size(); ++k) {
    const double f = static_cast<double>(k) * df;
    for (std::size_t b = 0; b < bands.size(); ++b) {
      if (f >= bands[b].low_hz && f < bands[b].high_hz) bin_band[k] = static_cast<int>(b);
    }
  }

  Tensor out({n_channels, bands.size(), n_windows});
  std::vector<double> window(kPowerWindow);
  std::vector<double> acc(bands.size());
  for (std::size_t c = 0; c < n_channels; ++c) {
    for (std::size_t wi = 0; wi < n_windows; ++wi) {
      const float* src = chunk.data() + c * n_samples + wi * kPowerWindow;
      for (std::size_t i = 0; i < kPowerWindow; ++i) window[i] = src[i];
      const Spectrum s = periodogram(window, fs);
      std::fill(acc.begin(), acc.end(), 0.0);
      for (std::size_t k = 0; k < s.psd.size(); ++k) {
        if (bin_band[k] >= 0) acc[static_cast<std::size_t>(bin_band[k])] += s.psd[k] * df;
      }
      for (std::size_t b = 0; b < bands.size(); ++b) {
        out.at({c, b, wi}) = std::log(eps + acc[b]);
      }
    }
  }
  return out;
}

}  // namespace kgeeg
