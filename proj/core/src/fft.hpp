#pragma once

#include <complex>
#include <cstddef>
#include <span>

namespace kgeeg::detail {

// Real-to-complex transform of a fixed length backed by an FFTW plan.
// Instances are cached per thread; planning is serialized.
class RealFft {
 public:
  static RealFft& of_size(std::size_t n);

  RealFft(const RealFft&) = delete;
  RealFft& operator=(const RealFft&) = delete;
  ~RealFft();

  std::size_t size() const { return n_; }
  std::size_t bins() const { return n_ / 2 + 1; }

  // `in` shorter than size() is zero-padded. `out` must hold bins() values.
  void forward(std::span<const double> in, std::span<std::complex<double>> out);
  // Unnormalized inverse: out = n * x for out = inverse(forward(x)).
  // Only the first out.size() samples are written.
  void inverse(std::span<const std::complex<double>> in, std::span<double> out);

 private:
  explicit RealFft(std::size_t n);

  std::size_t n_;
  double* real_ = nullptr;
  void* spec_ = nullptr;  // fftw_complex*
  void* plan_fwd_ = nullptr;
  void* plan_inv_ = nullptr;
};

}  // namespace kgeeg::detail
