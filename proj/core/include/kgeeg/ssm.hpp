#pragma once

#include <complex>
#include <cstddef>
#include <cstdint>
#include <vector>

#include "kgeeg/tensor.hpp"

namespace kgeeg {

// Diagonal state-space parameters for d_model independent channels, each
// with n_modes complex modes. When conjugate_pairs is set every stored mode
// stands for itself and its conjugate, so the real state size is 2 * n_modes
// and each mode contributes 2 Re(...) to the kernel.
//
// Per channel d and mode n (row-major [d_model x n_modes]):
//   A = -exp(rho) + i * a_imag      (Re A < 0 for every rho)
//   delta = exp(log_dt[d])
//   B, C complex; skip D real.
struct SSMParams {
  std::size_t d_model = 0;
  std::size_t n_modes = 0;
  bool conjugate_pairs = true;
  std::vector<double> log_dt;  // [d_model]
  std::vector<double> rho;     // [d_model * n_modes]
  std::vector<double> a_imag;
  std::vector<std::complex<double>> b;
  std::vector<std::complex<double>> c;
  std::vector<double> skip;  // [d_model]

  std::size_t n_state() const { return conjugate_pairs ? 2 * n_modes : n_modes; }
  std::complex<double> a(std::size_t d, std::size_t n) const;
  double delta(std::size_t d) const;
  void validate() const;
};

// Same layout as SSMParams, holding dLoss/d(parameter). Complex entries store
// dL/dRe + i dL/dIm.
struct SSMGrads {
  std::vector<double> log_dt, rho, a_imag, skip;
  std::vector<std::complex<double>> b, c;

  explicit SSMGrads(const SSMParams& like);
  SSMGrads() = default;
};

// Diagonal-linear initialization: A_n = -1/2 + i*pi*n for n < n_state/2,
// log_dt ~ U[ln 1e-3, ln 1e-1], B = 1, C ~ complex normal with E|C|^2 = 1,
// D ~ N(0, 1). Throws ParameterError for odd n_state.
SSMParams init_ssm(std::size_t d_model, std::size_t n_state, std::uint64_t seed);

// Zero-order-hold kernel K[d][l] = s * Re(sum_n C B~ exp(delta A)^l) with
// B~ = (exp(delta A) - 1) / A * B and s = 2 for conjugate pairs.
// Returns [d_model x length].
Tensor ssm_kernel(const SSMParams& p, std::size_t length);

// Backpropagates dLoss/dK ([d_model x length]) into the kernel parameters,
// accumulating into `grads` (skip is untouched).
void ssm_kernel_backward(const SSMParams& p, const Tensor& grad_kernel, SSMGrads& grads);

// y = causal_conv(K, u) + D u for u of shape [batch x d_model x length],
// computed with FFTs on a zero-padded length of 2 * length.
Tensor ssm_apply(const SSMParams& p, const Tensor& u);

// Step-by-step recurrence x_{l+1} = exp(delta A) x_l + B~ u_l,
// y_l = s Re(C x_l) + D u_l (with x_l including the current input), the
// reference the FFT path is tested against.
Tensor ssm_recurrence(const SSMParams& p, const Tensor& u);

// Gradients of y = ssm_apply(p, u) given dLoss/dy. Returns dLoss/du and
// accumulates parameter gradients into `grads`. `kernel` must be
// ssm_kernel(p, length).
Tensor ssm_apply_backward(const SSMParams& p, const Tensor& kernel, const Tensor& u,
                          const Tensor& grad_y, SSMGrads& grads);

}  // namespace kgeeg
