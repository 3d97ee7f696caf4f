#include "kgeeg/preprocess.hpp"

#include <algorithm>
#include <cmath>
#include <complex>
#include <numbers>
#include <numeric>

#include "kgeeg/dataset.hpp"
#include "kgeeg/error.hpp"

namespace kgeeg {

namespace {

constexpr double kPi = std::numbers::pi;

Biquad normalized(double b0, double b1, double b2, double a0, double a1, double a2) {
  return {b0 / a0, b1 / a0, b2 / a0, a1 / a0, a2 / a0};
}

void require_even_order(int order) {
  if (order < 2 || order % 2 != 0) {
    throw ParameterError("Butterworth order must be even and >= 2, got " +
                         std::to_string(order));
  }
}

void require_cutoff(double cutoff_hz, double fs) {
  if (!(cutoff_hz > 0.0) || cutoff_hz >= fs / 2.0) {
    throw ParameterError("cutoff " + std::to_string(cutoff_hz) +
                         " Hz must lie in (0, fs/2) for fs " + std::to_string(fs));
  }
}

// Damping terms q_k = -2 Re(p_k) of the analog Butterworth prototype, one per
// conjugate pole pair.
std::vector<double> butter_damping(int order) {
  std::vector<double> q;
  for (int k = 0; k < order / 2; ++k) {
    const double angle = kPi * static_cast<double>(2 * k + order + 1) / (2.0 * order);
    q.push_back(-2.0 * std::cos(angle));
  }
  return q;
}

double max_pole_radius(const Sos& sos) {
  double r = 0.0;
  for (const auto& s : sos) {
    const std::complex<double> disc = s.a1 * s.a1 - 4.0 * s.a2;
    const auto root = std::sqrt(disc);
    r = std::max({r, std::abs((-s.a1 + root) / 2.0), std::abs((-s.a1 - root) / 2.0)});
  }
  return r;
}

// Per-section DF2T state that makes the cascade output steady for a constant
// input of 1.
std::vector<std::array<double, 2>> step_steady_state(const Sos& sos) {
  std::vector<std::array<double, 2>> zi(sos.size());
  double u = 1.0;
  for (std::size_t k = 0; k < sos.size(); ++k) {
    const auto& s = sos[k];
    const double gain = (s.b0 + s.b1 + s.b2) / (1.0 + s.a1 + s.a2);
    const double y = gain * u;
    zi[k][1] = s.b2 * u - s.a2 * y;
    zi[k][0] = y - s.b0 * u;
    u = y;
  }
  return zi;
}

void filter_in_place(const Sos& sos, std::vector<double>& x,
                     std::vector<std::array<double, 2>> state) {
  for (std::size_t k = 0; k < sos.size(); ++k) {
    const auto& s = sos[k];
    double z1 = state[k][0], z2 = state[k][1];
    for (double& v : x) {
      const double in = v;
      const double out = s.b0 * in + z1;
      z1 = s.b1 * in - s.a1 * out + z2;
      z2 = s.b2 * in - s.a2 * out;
      v = out;
    }
  }
}

template <typename Fn>
Recording map_rows(const Recording& rec, Fn&& fn) {
  Recording out = rec;
  std::vector<double> x(rec.n_samples);
  for (std::size_t c = 0; c < rec.n_channels(); ++c) {
    const auto src = rec.row(c);
    std::copy(src.begin(), src.end(), x.begin());
    const std::vector<double> y = fn(x, c);
    auto dst = out.row(c);
    for (std::size_t t = 0; t < y.size(); ++t) dst[t] = static_cast<float>(y[t]);
  }
  return out;
}

std::pair<std::size_t, std::size_t> rational_ratio(double target, double source) {
  const double ra = std::round(target), rb = std::round(source);
  if (std::abs(ra - target) < 1e-9 && std::abs(rb - source) < 1e-9 && ra > 0 && rb > 0) {
    const auto a = static_cast<std::size_t>(ra), b = static_cast<std::size_t>(rb);
    const std::size_t g = std::gcd(a, b);
    return {a / g, b / g};
  }
  // Continued-fraction approximation of target / source.
  const double ratio = target / source;
  double x = ratio;
  long long h0 = 0, h1 = 1, k0 = 1, k1 = 0;
  for (int i = 0; i < 32; ++i) {
    const auto a = static_cast<long long>(std::floor(x));
    const long long h2 = a * h1 + h0, k2 = a * k1 + k0;
    h0 = h1; h1 = h2; k0 = k1; k1 = k2;
    if (k1 > 0 && std::abs(static_cast<double>(h1) / static_cast<double>(k1) - ratio) <
                      1e-9 * ratio) {
      break;
    }
    const double frac = x - static_cast<double>(a);
    if (frac < 1e-12 || k1 > 100000) break;
    x = 1.0 / frac;
  }
  if (h1 <= 0 || k1 <= 0) throw ParameterError("cannot form a resampling ratio");
  return {static_cast<std::size_t>(h1), static_cast<std::size_t>(k1)};
}

}  // namespace

void PreprocessConfig::validate() const {
  if (!(target_fs > 0.0)) throw ParameterError("target_fs must be positive");
  if (!(band_low_hz > 0.0 && band_low_hz < band_high_hz && band_high_hz < target_fs / 2.0)) {
    throw ParameterError("band must satisfy 0 < low < high < target_fs/2");
  }
  if (!(notch_hz > 0.0) || !(notch_q > 0.0)) {
    throw ParameterError("notch frequency and Q must be positive");
  }
  require_even_order(highpass_order);
  require_even_order(lowpass_order);
}

Sos design_notch(double f0_hz, double q, double fs) {
  require_cutoff(f0_hz, fs);
  if (!(q > 0.0)) throw ParameterError("notch Q must be positive");
  const double w0 = 2.0 * kPi * f0_hz / fs;
  const double alpha = std::sin(w0) / (2.0 * q);
  const double c = std::cos(w0);
  return {normalized(1.0, -2.0 * c, 1.0, 1.0 + alpha, -2.0 * c, 1.0 - alpha)};
}

Sos design_butter_lowpass(int order, double cutoff_hz, double fs) {
  require_even_order(order);
  require_cutoff(cutoff_hz, fs);
  const double k = 2.0 * fs;
  const double wc = k * std::tan(kPi * cutoff_hz / fs);
  Sos sos;
  for (double q : butter_damping(order)) {
    const double a0 = k * k + q * wc * k + wc * wc;
    const double a1 = 2.0 * (wc * wc - k * k);
    const double a2 = k * k - q * wc * k + wc * wc;
    sos.push_back(normalized(wc * wc, 2.0 * wc * wc, wc * wc, a0, a1, a2));
  }
  return sos;
}

Sos design_butter_highpass(int order, double cutoff_hz, double fs) {
  require_even_order(order);
  require_cutoff(cutoff_hz, fs);
  const double k = 2.0 * fs;
  const double wc = k * std::tan(kPi * cutoff_hz / fs);
  Sos sos;
  for (double q : butter_damping(order)) {
    const double a0 = k * k + q * wc * k + wc * wc;
    const double a1 = 2.0 * (wc * wc - k * k);
    const double a2 = k * k - q * wc * k + wc * wc;
    sos.push_back(normalized(k * k, -2.0 * k * k, k * k, a0, a1, a2));
  }
  return sos;
}

std::vector<double> sos_filter(const Sos& sos, std::span<const double> x) {
  std::vector<double> y(x.begin(), x.end());
  filter_in_place(sos, y, std::vector<std::array<double, 2>>(sos.size(), {0.0, 0.0}));
  return y;
}

std::vector<double> sos_filtfilt(const Sos& sos, std::span<const double> x) {
  const std::size_t n = x.size();
  if (n < 2 || sos.empty()) return {x.begin(), x.end()};

  const double r = max_pole_radius(sos);
  std::size_t settle = 6 * sos.size() + 3;
  if (r > 0.0 && r < 1.0) {
    settle = std::max(settle, static_cast<std::size_t>(std::ceil(std::log(1e-9) / std::log(r))));
  }
  const std::size_t pad = std::min(n - 1, settle);

  std::vector<double> ext;
  ext.reserve(n + 2 * pad);
  for (std::size_t i = pad; i >= 1; --i) ext.push_back(2.0 * x[0] - x[i]);
  ext.insert(ext.end(), x.begin(), x.end());
  for (std::size_t i = 1; i <= pad; ++i) ext.push_back(2.0 * x[n - 1] - x[n - 1 - i]);

  const auto zi = step_steady_state(sos);
  auto scaled = [&](double v) {
    auto s = zi;
    for (auto& z : s) {
      z[0] *= v;
      z[1] *= v;
    }
    return s;
  };
  filter_in_place(sos, ext, scaled(ext.front()));
  std::reverse(ext.begin(), ext.end());
  filter_in_place(sos, ext, scaled(ext.front()));
  std::reverse(ext.begin(), ext.end());
  return {ext.begin() + static_cast<std::ptrdiff_t>(pad),
          ext.begin() + static_cast<std::ptrdiff_t>(pad + n)};
}

double sos_gain(const Sos& sos, double f_hz, double fs) {
  const std::complex<double> z1 = std::polar(1.0, -2.0 * kPi * f_hz / fs);
  const std::complex<double> z2 = z1 * z1;
  std::complex<double> h = 1.0;
  for (const auto& s : sos) {
    h *= (s.b0 + s.b1 * z1 + s.b2 * z2) / (1.0 + s.a1 * z1 + s.a2 * z2);
  }
  return std::abs(h);
}

Recording notch(const Recording& rec, const PreprocessConfig& cfg) {
  if (!(rec.fs > 2.0 * cfg.notch_hz)) {
    throw ParameterError("notch at " + std::to_string(cfg.notch_hz) +
                         " Hz needs fs > " + std::to_string(2.0 * cfg.notch_hz) +
                         ", got " + std::to_string(rec.fs));
  }
  const Sos sos = design_notch(cfg.notch_hz, cfg.notch_q, rec.fs);
  return map_rows(rec, [&](const std::vector<double>& x, std::size_t) {
    return sos_filtfilt(sos, x);
  });
}

Recording bandpass(const Recording& rec, const PreprocessConfig& cfg) {
  cfg.validate();
  if (cfg.band_high_hz >= rec.fs / 2.0) {
    throw ParameterError("band edge " + std::to_string(cfg.band_high_hz) +
                         " Hz is at or above Nyquist for fs " + std::to_string(rec.fs));
  }
  Sos sos = design_butter_highpass(cfg.highpass_order, cfg.band_low_hz, rec.fs);
  const Sos lp = design_butter_lowpass(cfg.lowpass_order, cfg.band_high_hz, rec.fs);
  sos.insert(sos.end(), lp.begin(), lp.end());
  return map_rows(rec, [&](const std::vector<double>& x, std::size_t) {
    return sos_filtfilt(sos, x);
  });
}

Recording detrend_linear(const Recording& rec) {
  return map_rows(rec, [](const std::vector<double>& x, std::size_t) {
    const std::size_t n = x.size();
    std::vector<double> y(x);
    if (n == 0) return y;
    const double t_mean = static_cast<double>(n - 1) / 2.0;
    double x_mean = 0.0;
    for (double v : x) x_mean += v;
    x_mean /= static_cast<double>(n);
    double sxy = 0.0, sxx = 0.0;
    for (std::size_t t = 0; t < n; ++t) {
      const double dt = static_cast<double>(t) - t_mean;
      sxy += dt * (x[t] - x_mean);
      sxx += dt * dt;
    }
    const double slope = sxx > 0.0 ? sxy / sxx : 0.0;
    for (std::size_t t = 0; t < n; ++t) {
      y[t] = x[t] - x_mean - slope * (static_cast<double>(t) - t_mean);
    }
    return y;
  });
}

Recording normalize_channels(const Recording& rec) {
  return map_rows(rec, [&](const std::vector<double>& x, std::size_t c) {
    const auto n = static_cast<double>(x.size());
    double mean = 0.0;
    for (double v : x) mean += v;
    mean /= n;
    double var = 0.0;
    for (double v : x) var += (v - mean) * (v - mean);
    const double sd = std::sqrt(var / n);
    if (!(sd > 1e-10 * std::max(1.0, std::abs(mean)))) {
      throw DegenerateChannelError(rec.channels[c]);
    }
    std::vector<double> y(x.size());
    for (std::size_t t = 0; t < x.size(); ++t) y[t] = (x[t] - mean) / sd;
    return y;
  });
}

std::vector<double> resample_poly(std::span<const double> x, std::size_t up,
                                  std::size_t down) {
  if (up == 0 || down == 0) throw ParameterError("resampling factors must be positive");
  const std::size_t g = std::gcd(up, down);
  up /= g;
  down /= g;
  const std::size_t n_out = static_cast<std::size_t>(
      std::llround(static_cast<double>(x.size()) * static_cast<double>(up) /
                   static_cast<double>(down)));
  if (up == 1 && down == 1) return {x.begin(), x.end()};

  // Kaiser-windowed sinc, cutoff at the lower of the two Nyquist rates.
  const std::size_t max_rate = std::max(up, down);
  const std::size_t half = 10 * max_rate;
  const std::size_t taps = 2 * half + 1;
  const double cutoff = 1.0 / static_cast<double>(max_rate);
  const double beta = 5.0;
  const double i0_beta = std::cyl_bessel_i(0.0, beta);
  std::vector<double> h(taps);
  double sum = 0.0;
  for (std::size_t k = 0; k < taps; ++k) {
    const double m = static_cast<double>(k) - static_cast<double>(half);
    const double arg = cutoff * m;
    const double sinc = arg == 0.0 ? 1.0 : std::sin(kPi * arg) / (kPi * arg);
    const double ratio = 2.0 * static_cast<double>(k) / static_cast<double>(taps - 1) - 1.0;
    const double w = std::cyl_bessel_i(0.0, beta * std::sqrt(std::max(0.0, 1.0 - ratio * ratio))) /
                     i0_beta;
    h[k] = cutoff * sinc * w;
    sum += h[k];
  }
  for (auto& v : h) v *= static_cast<double>(up) / sum;

  std::vector<double> y(n_out, 0.0);
  const auto n_in = static_cast<long long>(x.size());
  const auto uup = static_cast<long long>(up);
  for (std::size_t m = 0; m < n_out; ++m) {
    // y[m] = sum_i x[i] h[m*down + half - i*up]
    const long long center = static_cast<long long>(m * down + half);
    long long i_lo = center - static_cast<long long>(taps - 1);
    i_lo = i_lo <= 0 ? 0 : (i_lo + uup - 1) / uup;
    const long long i_hi = std::min(n_in - 1, center / uup);
    double acc = 0.0;
    for (long long i = i_lo; i <= i_hi; ++i) {
      acc += x[static_cast<std::size_t>(i)] * h[static_cast<std::size_t>(center - i * uup)];
    }
    y[m] = acc;
  }
  return y;
}

Recording resample(const Recording& rec, double target_fs) {
  if (!(target_fs > 0.0)) throw ParameterError("target_fs must be positive");
  if (std::abs(rec.fs - target_fs) < 1e-9) return rec;
  const auto [up, down] = rational_ratio(target_fs, rec.fs);

  Recording out;
  out.channels = rec.channels;
  out.fs = target_fs;
  out.subject_id = rec.subject_id;
  out.annotations = rec.annotations;
  out.n_samples = static_cast<std::size_t>(
      std::llround(static_cast<double>(rec.n_samples) * static_cast<double>(up) /
                   static_cast<double>(down)));
  out.data.reserve(out.n_channels() * out.n_samples);
  std::vector<double> x(rec.n_samples);
  for (std::size_t c = 0; c < rec.n_channels(); ++c) {
    const auto src = rec.row(c);
    std::copy(src.begin(), src.end(), x.begin());
    const auto y = resample_poly(x, up, down);
    for (double v : y) out.data.push_back(static_cast<float>(v));
  }
  return out;
}

Recording preprocess_pipeline(const Recording& rec, const PreprocessConfig& cfg) {
  cfg.validate();
  rec.validate();
  Recording r = notch(rec, cfg);
  r = bandpass(r, cfg);
  r = detrend_linear(r);
  r = normalize_channels(r);
  return resample(r, cfg.target_fs);
}

const std::array<std::string, 5>& pipeline_stage_names() {
  static const std::array<std::string, 5> names = {
      "notch", "bandpass", "detrend_linear", "normalize_channels", "resample"};
  return names;
}

std::uint64_t pipeline_signature() {
  std::string joined;
  for (const auto& n : pipeline_stage_names()) {
    if (!joined.empty()) joined += '>';
    joined += n;
  }
  return fnv1a(joined);
}

}  // namespace kgeeg
