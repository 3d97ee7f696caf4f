#include "kgeeg/ssm.hpp"

#include <cmath>
#include <numbers>
#include <random>

#include "fft.hpp"
#include "kgeeg/error.hpp"

namespace kgeeg {

namespace {

using cd = std::complex<double>;

struct ModeTerms {
  cd a;        // continuous pole
  cd z;        // exp(delta a)
  cd b_bar;    // ZOH input
  cd w;        // C * b_bar
};

ModeTerms mode_terms(const SSMParams& p, std::size_t d, std::size_t n) {
  const std::size_t i = d * p.n_modes + n;
  ModeTerms t;
  t.a = p.a(d, n);
  t.z = std::exp(p.delta(d) * t.a);
  t.b_bar = (t.z - 1.0) / t.a * p.b[i];
  t.w = p.c[i] * t.b_bar;
  return t;
}

void check_input(const SSMParams& p, const Tensor& u) {
  if (u.rank() != 3 || u.dim(1) != p.d_model) {
    throw ShapeError("ssm input must be [batch x " + std::to_string(p.d_model) +
                     " x length], got " + u.shape_string());
  }
}

}  // namespace

cd SSMParams::a(std::size_t d, std::size_t n) const {
  const std::size_t i = d * n_modes + n;
  return {-std::exp(rho[i]), a_imag[i]};
}

double SSMParams::delta(std::size_t d) const { return std::exp(log_dt[d]); }

void SSMParams::validate() const {
  const std::size_t m = d_model * n_modes;
  if (log_dt.size() != d_model || skip.size() != d_model || rho.size() != m ||
      a_imag.size() != m || b.size() != m || c.size() != m) {
    throw ShapeError("SSM parameter arrays do not match d_model x n_modes");
  }
}

SSMGrads::SSMGrads(const SSMParams& like)
    : log_dt(like.log_dt.size(), 0.0),
      rho(like.rho.size(), 0.0),
      a_imag(like.a_imag.size(), 0.0),
      skip(like.skip.size(), 0.0),
      b(like.b.size(), 0.0),
      c(like.c.size(), 0.0) {}

SSMParams init_ssm(std::size_t d_model, std::size_t n_state, std::uint64_t seed) {
  if (n_state == 0 || n_state % 2 != 0) {
    throw ParameterError("n_state must be even and positive, got " + std::to_string(n_state));
  }
  if (d_model == 0) throw ParameterError("d_model must be positive");
  SSMParams p;
  p.d_model = d_model;
  p.n_modes = n_state / 2;
  p.conjugate_pairs = true;
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> log_dt(std::log(1e-3), std::log(1e-1));
  std::normal_distribution<double> normal(0.0, 1.0);
  const double half = std::sqrt(0.5);
  for (std::size_t d = 0; d < d_model; ++d) {
    p.log_dt.push_back(log_dt(rng));
    for (std::size_t n = 0; n < p.n_modes; ++n) {
      p.rho.push_back(std::log(0.5));
      p.a_imag.push_back(std::numbers::pi * static_cast<double>(n));
      p.b.emplace_back(1.0, 0.0);
      const double re = normal(rng) * half;
      const double im = normal(rng) * half;
      p.c.emplace_back(re, im);
    }
    p.skip.push_back(normal(rng));
  }
  return p;
}

Tensor ssm_kernel(const SSMParams& p, std::size_t length) {
  p.validate();
  Tensor k({p.d_model, length});
  const double s = p.conjugate_pairs ? 2.0 : 1.0;
  for (std::size_t d = 0; d < p.d_model; ++d) {
    double* row = k.data() + d * length;
    for (std::size_t n = 0; n < p.n_modes; ++n) {
      const ModeTerms t = mode_terms(p, d, n);
      cd power = t.w * s;
      for (std::size_t l = 0; l < length; ++l) {
        row[l] += power.real();
        power *= t.z;
      }
    }
  }
  return k;
}

void ssm_kernel_backward(const SSMParams& p, const Tensor& grad_kernel, SSMGrads& grads) {
  p.validate();
  if (grad_kernel.rank() != 2 || grad_kernel.dim(0) != p.d_model) {
    throw ShapeError("kernel gradient must be [d_model x length]");
  }
  const std::size_t length = grad_kernel.dim(1);
  const double s = p.conjugate_pairs ? 2.0 : 1.0;
  for (std::size_t d = 0; d < p.d_model; ++d) {
    const double* g = grad_kernel.data() + d * length;
    const double delta = p.delta(d);
    double g_log_dt = 0.0;
    for (std::size_t n = 0; n < p.n_modes; ++n) {
      const std::size_t i = d * p.n_modes + n;
      const ModeTerms t = mode_terms(p, d, n);
      // K[l] = s Re(w z^l):  G_w = s sum g_l conj(z^l),
      //                       G_z = s sum g_l conj(l w z^(l-1)).
      cd g_w = 0.0, g_z = 0.0;
      cd zl = 1.0, zl_prev = 0.0;  // z^l, z^(l-1)
      for (std::size_t l = 0; l < length; ++l) {
        g_w += g[l] * std::conj(zl);
        if (l > 0) g_z += g[l] * static_cast<double>(l) * std::conj(t.w * zl_prev);
        zl_prev = zl;
        zl *= t.z;
      }
      g_w *= s;
      g_z *= s;

      // w = C b_bar
      grads.c[i] += std::conj(t.b_bar) * g_w;
      const cd g_bbar = std::conj(p.c[i]) * g_w;
      // b_bar = (z - 1) / A * B
      const cd bi = p.b[i];
      grads.b[i] += std::conj((t.z - 1.0) / t.a) * g_bbar;
      g_z += std::conj(bi / t.a) * g_bbar;
      cd g_a = std::conj(-(t.z - 1.0) * bi / (t.a * t.a)) * g_bbar;
      // z = exp(delta A)
      g_a += std::conj(delta * t.z) * g_z;
      g_log_dt += (std::conj(g_z) * (t.a * t.z * delta)).real();
      // A = -exp(rho) + i a_imag
      grads.rho[i] += (std::conj(g_a) * (-std::exp(p.rho[i]))).real();
      grads.a_imag[i] += g_a.imag();
    }
    grads.log_dt[d] += g_log_dt;
  }
}

Tensor ssm_apply(const SSMParams& p, const Tensor& u) {
  check_input(p, u);
  const std::size_t batch = u.dim(0), dm = u.dim(1), len = u.dim(2);
  const Tensor k = ssm_kernel(p, len);
  Tensor y(u.shape());
  if (len == 0) return y;
  auto& fft = detail::RealFft::of_size(2 * len);
  const double inv_n = 1.0 / static_cast<double>(fft.size());
  std::vector<cd> kf(fft.bins()), uf(fft.bins());
  std::vector<double> out(len);
  for (std::size_t d = 0; d < dm; ++d) {
    fft.forward(k.values().subspan(d * len, len), kf);
    for (std::size_t b = 0; b < batch; ++b) {
      const std::size_t off = (b * dm + d) * len;
      fft.forward(u.values().subspan(off, len), uf);
      for (std::size_t j = 0; j < uf.size(); ++j) uf[j] *= kf[j];
      fft.inverse(uf, out);
      for (std::size_t l = 0; l < len; ++l) {
        y[off + l] = out[l] * inv_n + p.skip[d] * u[off + l];
      }
    }
  }
  return y;
}

Tensor ssm_recurrence(const SSMParams& p, const Tensor& u) {
  check_input(p, u);
  p.validate();
  const std::size_t batch = u.dim(0), dm = u.dim(1), len = u.dim(2);
  const double s = p.conjugate_pairs ? 2.0 : 1.0;
  Tensor y(u.shape());
  std::vector<ModeTerms> terms(p.n_modes);
  std::vector<cd> state(p.n_modes);
  for (std::size_t d = 0; d < dm; ++d) {
    for (std::size_t n = 0; n < p.n_modes; ++n) terms[n] = mode_terms(p, d, n);
    for (std::size_t b = 0; b < batch; ++b) {
      const std::size_t off = (b * dm + d) * len;
      std::fill(state.begin(), state.end(), cd{0.0});
      for (std::size_t l = 0; l < len; ++l) {
        double acc = p.skip[d] * u[off + l];
        for (std::size_t n = 0; n < p.n_modes; ++n) {
          state[n] = terms[n].z * state[n] + terms[n].b_bar * u[off + l];
          acc += s * (p.c[d * p.n_modes + n] * state[n]).real();
        }
        y[off + l] = acc;
      }
    }
  }
  return y;
}

Tensor ssm_apply_backward(const SSMParams& p, const Tensor& kernel, const Tensor& u,
                          const Tensor& grad_y, SSMGrads& grads) {
  check_input(p, u);
  grad_y.require_shape(u.shape(), "ssm gradient");
  const std::size_t batch = u.dim(0), dm = u.dim(1), len = u.dim(2);
  Tensor grad_u(u.shape());
  Tensor grad_k({dm, len});
  if (len == 0) return grad_u;
  auto& fft = detail::RealFft::of_size(2 * len);
  const double inv_n = 1.0 / static_cast<double>(fft.size());
  std::vector<cd> kf(fft.bins()), uf(fft.bins()), gf(fft.bins()), tmp(fft.bins());
  std::vector<double> out(len);
  for (std::size_t d = 0; d < dm; ++d) {
    fft.forward(kernel.values().subspan(d * len, len), kf);
    double* gk = grad_k.data() + d * len;
    for (std::size_t b = 0; b < batch; ++b) {
      const std::size_t off = (b * dm + d) * len;
      fft.forward(grad_y.values().subspan(off, len), gf);
      fft.forward(u.values().subspan(off, len), uf);
      // du[t] = sum_l g[l] K[l - t]
      for (std::size_t j = 0; j < gf.size(); ++j) tmp[j] = gf[j] * std::conj(kf[j]);
      fft.inverse(tmp, out);
      double g_skip = 0.0;
      for (std::size_t l = 0; l < len; ++l) {
        grad_u[off + l] = out[l] * inv_n + p.skip[d] * grad_y[off + l];
        g_skip += grad_y[off + l] * u[off + l];
      }
      grads.skip[d] += g_skip;
      // dK[j] = sum_l g[l] u[l - j]
      for (std::size_t j = 0; j < gf.size(); ++j) tmp[j] = gf[j] * std::conj(uf[j]);
      fft.inverse(tmp, out);
      for (std::size_t l = 0; l < len; ++l) gk[l] += out[l] * inv_n;
    }
  }
  ssm_kernel_backward(p, grad_k, grads);
  return grad_u;
}

}  // namespace kgeeg
