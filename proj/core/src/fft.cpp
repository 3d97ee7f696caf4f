#include "fft.hpp"

#include <algorithm>
#include <map>
#include <memory>
#include <mutex>

#include <fftw3.h>

#include "kgeeg/error.hpp"

namespace kgeeg::detail {

namespace {

std::mutex& planner_mutex() {
  static std::mutex m;
  return m;
}

}  // namespace

RealFft& RealFft::of_size(std::size_t n) {
  thread_local std::map<std::size_t, std::unique_ptr<RealFft>> cache;
  auto it = cache.find(n);
  if (it == cache.end()) {
    it = cache.emplace(n, std::unique_ptr<RealFft>(new RealFft(n))).first;
  }
  return *it->second;
}

RealFft::RealFft(std::size_t n) : n_(n) {
  if (n == 0) throw ParameterError("FFT size must be positive");
  std::lock_guard lock(planner_mutex());
  real_ = fftw_alloc_real(n);
  auto* spec = fftw_alloc_complex(n / 2 + 1);
  spec_ = spec;
  // FFTW_ESTIMATE always picks the same plan, so results are reproducible
  // bit for bit across runs.
  plan_fwd_ = fftw_plan_dft_r2c_1d(static_cast<int>(n), real_, spec, FFTW_ESTIMATE);
  plan_inv_ = fftw_plan_dft_c2r_1d(static_cast<int>(n), spec, real_, FFTW_ESTIMATE);
}

RealFft::~RealFft() {
  std::lock_guard lock(planner_mutex());
  fftw_destroy_plan(static_cast<fftw_plan>(plan_fwd_));
  fftw_destroy_plan(static_cast<fftw_plan>(plan_inv_));
  fftw_free(real_);
  fftw_free(spec_);
}

void RealFft::forward(std::span<const double> in, std::span<std::complex<double>> out) {
  const std::size_t take = std::min(in.size(), n_);
  std::copy_n(in.begin(), take, real_);
  std::fill(real_ + take, real_ + n_, 0.0);
  fftw_execute(static_cast<fftw_plan>(plan_fwd_));
  const auto* spec = static_cast<const fftw_complex*>(spec_);
  for (std::size_t k = 0; k < bins(); ++k) out[k] = {spec[k][0], spec[k][1]};
}

void RealFft::inverse(std::span<const std::complex<double>> in, std::span<double> out) {
  auto* spec = static_cast<fftw_complex*>(spec_);
  for (std::size_t k = 0; k < bins(); ++k) {
    spec[k][0] = in[k].real();
    spec[k][1] = in[k].imag();
  }
  fftw_execute(static_cast<fftw_plan>(plan_inv_));
  std::copy_n(real_, std::min(out.size(), n_), out.begin());
}

}  // namespace kgeeg::detail
