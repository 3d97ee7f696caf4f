#pragma once

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <functional>
#include <numbers>
#include <random>
#include <string>
#include <vector>

#include "kgeeg/layers.hpp"
#include "kgeeg/recording.hpp"
#include "kgeeg/tensor.hpp"

namespace testing {

inline std::vector<double> sine(double freq, double fs, std::size_t n, double amp = 1.0,
                                double phase = 0.0) {
  std::vector<double> x(n);
  for (std::size_t i = 0; i < n; ++i) {
    x[i] = amp * std::sin(2.0 * std::numbers::pi * freq * static_cast<double>(i) / fs + phase);
  }
  return x;
}

inline double rms(const std::vector<double>& x, std::size_t skip = 0) {
  double s = 0.0;
  for (std::size_t i = skip; i + skip < x.size(); ++i) s += x[i] * x[i];
  return std::sqrt(s / static_cast<double>(x.size() - 2 * skip));
}

inline double db(double ratio) { return 20.0 * std::log10(ratio); }

inline kgeeg::Recording recording(const std::vector<std::vector<double>>& rows,
                                  std::vector<std::string> channels, double fs) {
  kgeeg::Recording rec;
  rec.channels = std::move(channels);
  rec.fs = fs;
  rec.n_samples = rows.front().size();
  for (const auto& r : rows) rec.data.insert(rec.data.end(), r.begin(), r.end());
  return rec;
}

inline std::vector<double> row(const kgeeg::Recording& rec, std::size_t ch) {
  auto r = rec.row(ch);
  return {r.begin(), r.end()};
}

inline kgeeg::Tensor random_tensor(std::vector<std::size_t> shape, std::uint64_t seed,
                                   double scale = 1.0) {
  kgeeg::Tensor t(std::move(shape));
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> n(0.0, scale);
  for (auto& v : t.values()) v = n(rng);
  return t;
}

inline double dot(const kgeeg::Tensor& a, const kgeeg::Tensor& b) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
  return s;
}

inline double max_abs_diff(std::span<const double> a, std::span<const double> b) {
  double m = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) m = std::max(m, std::abs(a[i] - b[i]));
  return m;
}

inline double rel_error(double analytic, double numeric, double floor = 1e-7) {
  return std::abs(analytic - numeric) /
         std::max({std::abs(analytic), std::abs(numeric), floor});
}

// Central difference of f with respect to *x.
inline double central_difference(const std::function<double()>& f, double* x, double h = 1e-6) {
  const double old = *x;
  *x = old + h;
  const double up = f();
  *x = old - h;
  const double down = f();
  *x = old;
  return (up - down) / (2.0 * h);
}

// Largest relative error between backpropagated and central-difference
// gradients of loss = <forward(), probe>, sampled over at most `per_tensor`
// entries of the input and of each parameter.
template <class Forward, class Backward>
double max_gradient_error(Forward forward, Backward backward, kgeeg::Tensor* input,
                          const std::vector<kgeeg::Parameter*>& params,
                          std::size_t per_tensor = 24, double h = 1e-6) {
  const kgeeg::Tensor y = forward();
  const kgeeg::Tensor probe = random_tensor(y.shape(), 0x5eed);
  for (auto* p : params) p->zero_grad();
  const kgeeg::Tensor grad_x = backward(probe);
  auto loss = [&] { return dot(forward(), probe); };

  double worst = 0.0;
  auto sweep = [&](kgeeg::Tensor& values, const kgeeg::Tensor& grads) {
    const std::size_t step = std::max<std::size_t>(1, values.size() / per_tensor);
    for (std::size_t i = 0; i < values.size(); i += step) {
      const double numeric = central_difference(loss, &values[i], h);
      worst = std::max(worst, rel_error(grads[i], numeric, 1e-5));
    }
  };
  if (input != nullptr) sweep(*input, grad_x);
  for (auto* p : params) {
    const kgeeg::Tensor g = p->grad;
    sweep(p->value, g);
  }
  return worst;
}

class TempDir {
 public:
  explicit TempDir(const std::string& tag) {
    std::random_device rd;
    path_ = std::filesystem::temp_directory_path() /
            ("kgeeg-" + tag + "-" + std::to_string(rd()) + std::to_string(rd()));
    std::filesystem::create_directories(path_);
  }
  ~TempDir() {
    std::error_code ec;
    std::filesystem::remove_all(path_, ec);
  }
  TempDir(const TempDir&) = delete;
  TempDir& operator=(const TempDir&) = delete;
  const std::filesystem::path& path() const { return path_; }
  std::filesystem::path operator/(const std::string& name) const { return path_ / name; }

 private:
  std::filesystem::path path_;
};

}  // namespace testing
