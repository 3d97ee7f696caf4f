#include "kgeeg/layers.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include <Eigen/Dense>

#include "kgeeg/error.hpp"

namespace kgeeg {

namespace {

using RowMat = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
using MapMat = Eigen::Map<RowMat>;
using ConstMapMat = Eigen::Map<const RowMat>;

Tensor uniform_tensor(std::vector<std::size_t> shape, double bound, std::mt19937_64& rng) {
  Tensor t(std::move(shape));
  std::uniform_real_distribution<double> dist(-bound, bound);
  for (auto& v : t.values()) v = dist(rng);
  return t;
}

// Output positions t whose source index t*stride + j - pad lies in [0, len).
struct ValidRange {
  std::size_t begin, end;
};

ValidRange valid_range(std::size_t j, std::size_t stride, std::size_t pad, std::size_t len,
                       std::size_t cols_len) {
  const std::size_t begin = j >= pad ? 0 : (pad - j + stride - 1) / stride;
  // largest t with t*stride + j - pad <= len - 1
  const std::size_t limit = len + pad;
  const std::size_t end = limit > j ? std::min(cols_len, (limit - j - 1) / stride + 1) : 0;
  return {std::min(begin, end), end};
}

// cols[(c*k + j), t] = src[c, t*stride - pad + j] (zero outside).
void im2col(const double* src, std::size_t channels, std::size_t src_len, std::size_t k,
            std::size_t stride, std::size_t pad, std::size_t cols_len, double* cols) {
  for (std::size_t j = 0; j < k; ++j) {
    const auto [begin, end] = valid_range(j, stride, pad, src_len, cols_len);
    for (std::size_t c = 0; c < channels; ++c) {
      const double* row = src + c * src_len;
      double* dst = cols + (c * k + j) * cols_len;
      std::fill(dst, dst + begin, 0.0);
      if (begin < end) {
        const double* first = row + (begin * stride + j - pad);
        if (stride == 1) {
          std::copy(first, first + (end - begin), dst + begin);
        } else {
          for (std::size_t t = 0; t < end - begin; ++t) dst[begin + t] = first[t * stride];
        }
      }
      std::fill(dst + end, dst + cols_len, 0.0);
    }
  }
}

// Adjoint of im2col: dst[c, t*stride - pad + j] += cols[(c*k + j), t].
void col2im(const double* cols, std::size_t channels, std::size_t dst_len, std::size_t k,
            std::size_t stride, std::size_t pad, std::size_t cols_len, double* dst) {
  for (std::size_t j = 0; j < k; ++j) {
    const auto [begin, end] = valid_range(j, stride, pad, dst_len, cols_len);
    for (std::size_t c = 0; c < channels; ++c) {
      if (begin >= end) continue;
      double* first = dst + c * dst_len + (begin * stride + j - pad);
      const double* src = cols + (c * k + j) * cols_len + begin;
      for (std::size_t t = 0; t < end - begin; ++t) first[t * stride] += src[t];
    }
  }
}

void require_3d(const Tensor& x, std::size_t channels, const char* what) {
  if (x.rank() != 3 || x.dim(1) != channels) {
    throw ShapeError(std::string(what) + ": expected [batch x " + std::to_string(channels) +
                     " x time], got " + x.shape_string());
  }
}

double sigmoid(double v) { return 1.0 / (1.0 + std::exp(-v)); }

}  // namespace

// ---------------------------------------------------------------- Conv1d

Conv1d::Conv1d(const std::string& name, std::size_t in, std::size_t out, std::size_t kernel,
               std::size_t stride, std::size_t pad, std::mt19937_64& rng)
    : in_(in), out_(out), kernel_(kernel), stride_(stride), pad_(pad) {
  if (in == 0 || out == 0 || kernel == 0 || stride == 0) {
    throw ParameterError("conv dimensions must be positive");
  }
  const double bound = 1.0 / std::sqrt(static_cast<double>(in * kernel));
  weight_ = Parameter(name + ".weight", uniform_tensor({out, in, kernel}, bound, rng));
  bias_ = Parameter(name + ".bias", uniform_tensor({out}, bound, rng));
}

std::size_t Conv1d::output_length(std::size_t input_length) const {
  const std::size_t padded = input_length + 2 * pad_;
  if (padded < kernel_) throw ShapeError("conv input shorter than its kernel");
  return (padded - kernel_) / stride_ + 1;
}

Tensor Conv1d::forward(const Tensor& x, const Context&) {
  require_3d(x, in_, "conv1d");
  input_ = x;
  const std::size_t batch = x.dim(0), len = x.dim(2), out_len = output_length(len);
  Tensor y({batch, out_, out_len});
  const bool pointwise = kernel_ == 1 && stride_ == 1 && pad_ == 0;
  std::vector<double> cols(pointwise ? 0 : in_ * kernel_ * out_len);
  const ConstMapMat w(weight_.value.data(), static_cast<Eigen::Index>(out_),
                      static_cast<Eigen::Index>(in_ * kernel_));
  const Eigen::Map<const Eigen::VectorXd> bias(bias_.value.data(), static_cast<Eigen::Index>(out_));
  for (std::size_t b = 0; b < batch; ++b) {
    const double* src = x.data() + b * in_ * len;
    const double* col_ptr = src;
    if (!pointwise) {
      im2col(src, in_, len, kernel_, stride_, pad_, out_len, cols.data());
      col_ptr = cols.data();
    }
    const ConstMapMat c(col_ptr, static_cast<Eigen::Index>(in_ * kernel_),
                        static_cast<Eigen::Index>(out_len));
    MapMat out(y.data() + b * out_ * out_len, static_cast<Eigen::Index>(out_),
               static_cast<Eigen::Index>(out_len));
    out.noalias() = w * c;
    out.colwise() += bias;
  }
  return y;
}

Tensor Conv1d::backward(const Tensor& grad_y) {
  const std::size_t batch = input_.dim(0), len = input_.dim(2), out_len = output_length(len);
  grad_y.require_shape({batch, out_, out_len}, "conv1d gradient");
  Tensor grad_x(input_.shape());
  const bool pointwise = kernel_ == 1 && stride_ == 1 && pad_ == 0;
  const auto rows = static_cast<Eigen::Index>(in_ * kernel_);
  std::vector<double> cols(pointwise ? 0 : in_ * kernel_ * out_len);
  std::vector<double> dcols(in_ * kernel_ * out_len);
  const ConstMapMat w(weight_.value.data(), static_cast<Eigen::Index>(out_), rows);
  MapMat dw(weight_.grad.data(), static_cast<Eigen::Index>(out_), rows);
  Eigen::Map<Eigen::VectorXd> db(bias_.grad.data(), static_cast<Eigen::Index>(out_));
  for (std::size_t b = 0; b < batch; ++b) {
    const double* src = input_.data() + b * in_ * len;
    const double* col_ptr = src;
    if (!pointwise) {
      im2col(src, in_, len, kernel_, stride_, pad_, out_len, cols.data());
      col_ptr = cols.data();
    }
    const ConstMapMat c(col_ptr, rows, static_cast<Eigen::Index>(out_len));
    const ConstMapMat g(grad_y.data() + b * out_ * out_len, static_cast<Eigen::Index>(out_),
                        static_cast<Eigen::Index>(out_len));
    dw.noalias() += g * c.transpose();
    db += g.rowwise().sum();
    if (pointwise) {
      MapMat dx(grad_x.data() + b * in_ * len, rows, static_cast<Eigen::Index>(out_len));
      dx.noalias() = w.transpose() * g;
    } else {
      MapMat dc(dcols.data(), rows, static_cast<Eigen::Index>(out_len));
      dc.noalias() = w.transpose() * g;
      col2im(dcols.data(), in_, len, kernel_, stride_, pad_, out_len,
             grad_x.data() + b * in_ * len);
    }
  }
  return grad_x;
}

void Conv1d::collect(std::vector<Parameter*>& out) {
  out.push_back(&weight_);
  out.push_back(&bias_);
}

// ------------------------------------------------------- ConvTranspose1d

ConvTranspose1d::ConvTranspose1d(const std::string& name, std::size_t in, std::size_t out,
                                 std::size_t kernel, std::size_t stride, std::size_t pad,
                                 std::size_t output_pad, std::mt19937_64& rng)
    : in_(in), out_(out), kernel_(kernel), stride_(stride), pad_(pad), output_pad_(output_pad) {
  if (in == 0 || out == 0 || kernel == 0 || stride == 0) {
    throw ParameterError("transposed conv dimensions must be positive");
  }
  if (output_pad >= stride) throw ParameterError("output padding must be below the stride");
  const double bound = 1.0 / std::sqrt(static_cast<double>(out * kernel));
  weight_ = Parameter(name + ".weight", uniform_tensor({in, out, kernel}, bound, rng));
  bias_ = Parameter(name + ".bias", uniform_tensor({out}, bound, rng));
}

std::size_t ConvTranspose1d::output_length(std::size_t input_length) const {
  if (input_length == 0) throw ShapeError("transposed conv input is empty");
  const std::size_t full = (input_length - 1) * stride_ + kernel_ + output_pad_;
  if (full < 2 * pad_) throw ShapeError("transposed conv padding exceeds output");
  return full - 2 * pad_;
}

Tensor ConvTranspose1d::forward(const Tensor& x, const Context&) {
  require_3d(x, in_, "conv_transpose1d");
  input_ = x;
  const std::size_t batch = x.dim(0), len = x.dim(2), out_len = output_length(len);
  Tensor y({batch, out_, out_len});
  const auto cols_rows = static_cast<Eigen::Index>(out_ * kernel_);
  std::vector<double> cols(out_ * kernel_ * len);
  const ConstMapMat w(weight_.value.data(), static_cast<Eigen::Index>(in_), cols_rows);
  for (std::size_t b = 0; b < batch; ++b) {
    const ConstMapMat src(x.data() + b * in_ * len, static_cast<Eigen::Index>(in_),
                          static_cast<Eigen::Index>(len));
    MapMat c(cols.data(), cols_rows, static_cast<Eigen::Index>(len));
    c.noalias() = w.transpose() * src;
    double* dst = y.data() + b * out_ * out_len;
    col2im(cols.data(), out_, out_len, kernel_, stride_, pad_, len, dst);
    for (std::size_t o = 0; o < out_; ++o) {
      for (std::size_t t = 0; t < out_len; ++t) dst[o * out_len + t] += bias_.value[o];
    }
  }
  return y;
}

Tensor ConvTranspose1d::backward(const Tensor& grad_y) {
  const std::size_t batch = input_.dim(0), len = input_.dim(2), out_len = output_length(len);
  grad_y.require_shape({batch, out_, out_len}, "conv_transpose1d gradient");
  Tensor grad_x(input_.shape());
  const auto cols_rows = static_cast<Eigen::Index>(out_ * kernel_);
  std::vector<double> cols(out_ * kernel_ * len);
  const ConstMapMat w(weight_.value.data(), static_cast<Eigen::Index>(in_), cols_rows);
  MapMat dw(weight_.grad.data(), static_cast<Eigen::Index>(in_), cols_rows);
  for (std::size_t b = 0; b < batch; ++b) {
    const double* g = grad_y.data() + b * out_ * out_len;
    im2col(g, out_, out_len, kernel_, stride_, pad_, len, cols.data());
    const ConstMapMat c(cols.data(), cols_rows, static_cast<Eigen::Index>(len));
    const ConstMapMat src(input_.data() + b * in_ * len, static_cast<Eigen::Index>(in_),
                          static_cast<Eigen::Index>(len));
    MapMat dx(grad_x.data() + b * in_ * len, static_cast<Eigen::Index>(in_),
              static_cast<Eigen::Index>(len));
    dx.noalias() = w * c;
    dw.noalias() += src * c.transpose();
    for (std::size_t o = 0; o < out_; ++o) {
      double s = 0.0;
      for (std::size_t t = 0; t < out_len; ++t) s += g[o * out_len + t];
      bias_.grad[o] += s;
    }
  }
  return grad_x;
}

void ConvTranspose1d::collect(std::vector<Parameter*>& out) {
  out.push_back(&weight_);
  out.push_back(&bias_);
}

// ------------------------------------------------------------- LayerNorm

LayerNorm::LayerNorm(const std::string& name, std::size_t channels, double eps)
    : channels_(channels), eps_(eps) {
  gain_ = Parameter(name + ".gain", Tensor({channels}, 1.0));
  bias_ = Parameter(name + ".bias", Tensor({channels}, 0.0));
}

Tensor LayerNorm::forward(const Tensor& x, const Context&) {
  require_3d(x, channels_, "layer_norm");
  const std::size_t batch = x.dim(0), len = x.dim(2);
  normalized_ = Tensor(x.shape());
  inv_std_.assign(batch * len, 0.0);
  Tensor y(x.shape());
  std::vector<double> mean(len), var(len);
  const double inv_c = 1.0 / static_cast<double>(channels_);
  for (std::size_t b = 0; b < batch; ++b) {
    const double* src = x.data() + b * channels_ * len;
    std::fill(mean.begin(), mean.end(), 0.0);
    std::fill(var.begin(), var.end(), 0.0);
    for (std::size_t c = 0; c < channels_; ++c) {
      for (std::size_t t = 0; t < len; ++t) mean[t] += src[c * len + t];
    }
    for (auto& m : mean) m *= inv_c;
    for (std::size_t c = 0; c < channels_; ++c) {
      for (std::size_t t = 0; t < len; ++t) {
        const double d = src[c * len + t] - mean[t];
        var[t] += d * d;
      }
    }
    double* inv = inv_std_.data() + b * len;
    for (std::size_t t = 0; t < len; ++t) inv[t] = 1.0 / std::sqrt(var[t] * inv_c + eps_);
    double* xhat = normalized_.data() + b * channels_ * len;
    double* dst = y.data() + b * channels_ * len;
    for (std::size_t c = 0; c < channels_; ++c) {
      const double g = gain_.value[c], be = bias_.value[c];
      for (std::size_t t = 0; t < len; ++t) {
        const double v = (src[c * len + t] - mean[t]) * inv[t];
        xhat[c * len + t] = v;
        dst[c * len + t] = g * v + be;
      }
    }
  }
  return y;
}

Tensor LayerNorm::backward(const Tensor& grad_y) {
  grad_y.require_shape(normalized_.shape(), "layer_norm gradient");
  const std::size_t batch = grad_y.dim(0), len = grad_y.dim(2);
  Tensor grad_x(grad_y.shape());
  std::vector<double> sum_g(len), sum_gx(len);
  const double inv_c = 1.0 / static_cast<double>(channels_);
  for (std::size_t b = 0; b < batch; ++b) {
    const double* g = grad_y.data() + b * channels_ * len;
    const double* xhat = normalized_.data() + b * channels_ * len;
    std::fill(sum_g.begin(), sum_g.end(), 0.0);
    std::fill(sum_gx.begin(), sum_gx.end(), 0.0);
    for (std::size_t c = 0; c < channels_; ++c) {
      const double gain = gain_.value[c];
      double dg = 0.0, db = 0.0;
      for (std::size_t t = 0; t < len; ++t) {
        const double gy = g[c * len + t];
        const double dxhat = gy * gain;
        sum_g[t] += dxhat;
        sum_gx[t] += dxhat * xhat[c * len + t];
        dg += gy * xhat[c * len + t];
        db += gy;
      }
      gain_.grad[c] += dg;
      bias_.grad[c] += db;
    }
    const double* inv = inv_std_.data() + b * len;
    double* dst = grad_x.data() + b * channels_ * len;
    for (std::size_t c = 0; c < channels_; ++c) {
      const double gain = gain_.value[c];
      for (std::size_t t = 0; t < len; ++t) {
        const double dxhat = g[c * len + t] * gain;
        dst[c * len + t] =
            inv[t] * (dxhat - sum_g[t] * inv_c - xhat[c * len + t] * sum_gx[t] * inv_c);
      }
    }
  }
  return grad_x;
}

void LayerNorm::collect(std::vector<Parameter*>& out) {
  out.push_back(&gain_);
  out.push_back(&bias_);
}

// ------------------------------------------------------------------ Gelu

Tensor Gelu::forward(const Tensor& x, const Context&) {
  input_ = x;
  Tensor y(x.shape());
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double v = x[i];
    y[i] = 0.5 * v * (1.0 + std::erf(v * std::numbers::sqrt2 / 2.0));
  }
  return y;
}

Tensor Gelu::backward(const Tensor& grad_y) {
  grad_y.require_shape(input_.shape(), "gelu gradient");
  Tensor grad_x(grad_y.shape());
  const double inv_sqrt_2pi = 1.0 / std::sqrt(2.0 * std::numbers::pi);
  for (std::size_t i = 0; i < grad_y.size(); ++i) {
    const double v = input_[i];
    const double cdf = 0.5 * (1.0 + std::erf(v * std::numbers::sqrt2 / 2.0));
    const double pdf = inv_sqrt_2pi * std::exp(-0.5 * v * v);
    grad_x[i] = grad_y[i] * (cdf + v * pdf);
  }
  return grad_x;
}

// --------------------------------------------------------------- Dropout

Tensor Dropout::forward(const Tensor& x, const Context& ctx) {
  if (!ctx.training() || p_ <= 0.0) {
    mask_.clear();
    return x;
  }
  if (ctx.rng == nullptr) throw ParameterError("train-mode dropout needs a generator");
  // one 53-bit uniform per element
  const double keep = 1.0 - p_;
  const double scale = 1.0 / keep;
  mask_.resize(x.size());
  Tensor y(x.shape());
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double u = static_cast<double>((*ctx.rng)() >> 11) * 0x1.0p-53;
    mask_[i] = u < keep ? scale : 0.0;
    y[i] = x[i] * mask_[i];
  }
  return y;
}

Tensor Dropout::backward(const Tensor& grad_y) {
  if (mask_.empty()) return grad_y;
  Tensor grad_x(grad_y.shape());
  for (std::size_t i = 0; i < grad_y.size(); ++i) grad_x[i] = grad_y[i] * mask_[i];
  return grad_x;
}

// ------------------------------------------------------------------- Glu

Tensor Glu::forward(const Tensor& x, const Context&) {
  if (x.rank() != 3 || x.dim(1) % 2 != 0) throw ShapeError("glu needs an even channel count");
  input_ = x;
  const std::size_t batch = x.dim(0), half = x.dim(1) / 2, len = x.dim(2);
  Tensor y({batch, half, len});
  for (std::size_t b = 0; b < batch; ++b) {
    const double* a = x.data() + b * 2 * half * len;
    const double* g = a + half * len;
    double* dst = y.data() + b * half * len;
    for (std::size_t i = 0; i < half * len; ++i) dst[i] = a[i] * sigmoid(g[i]);
  }
  return y;
}

Tensor Glu::backward(const Tensor& grad_y) {
  const std::size_t batch = input_.dim(0), half = input_.dim(1) / 2, len = input_.dim(2);
  grad_y.require_shape({batch, half, len}, "glu gradient");
  Tensor grad_x(input_.shape());
  for (std::size_t b = 0; b < batch; ++b) {
    const double* a = input_.data() + b * 2 * half * len;
    const double* g = a + half * len;
    const double* gy = grad_y.data() + b * half * len;
    double* da = grad_x.data() + b * 2 * half * len;
    double* dg = da + half * len;
    for (std::size_t i = 0; i < half * len; ++i) {
      const double s = sigmoid(g[i]);
      da[i] = gy[i] * s;
      dg[i] = gy[i] * a[i] * s * (1.0 - s);
    }
  }
  return grad_x;
}

// ----------------------------------------------------------------- Dense

Dense::Dense(const std::string& name, std::size_t in, std::size_t out, std::mt19937_64& rng)
    : in_(in), out_(out) {
  if (in == 0 || out == 0) throw ParameterError("dense dimensions must be positive");
  const double bound = 1.0 / std::sqrt(static_cast<double>(in));
  weight_ = Parameter(name + ".weight", uniform_tensor({out, in}, bound, rng));
  bias_ = Parameter(name + ".bias", uniform_tensor({out}, bound, rng));
}

Tensor Dense::forward(const Tensor& x, const Context&) {
  if (x.rank() != 2 || x.dim(1) != in_) {
    throw ShapeError("dense: expected [batch x " + std::to_string(in_) + "], got " +
                     x.shape_string());
  }
  input_ = x;
  const auto batch = static_cast<Eigen::Index>(x.dim(0));
  Tensor y({x.dim(0), out_});
  const ConstMapMat xin(x.data(), batch, static_cast<Eigen::Index>(in_));
  const ConstMapMat w(weight_.value.data(), static_cast<Eigen::Index>(out_),
                      static_cast<Eigen::Index>(in_));
  MapMat out(y.data(), batch, static_cast<Eigen::Index>(out_));
  out.noalias() = xin * w.transpose();
  const Eigen::Map<const Eigen::RowVectorXd> bias(bias_.value.data(),
                                                  static_cast<Eigen::Index>(out_));
  out.rowwise() += bias;
  return y;
}

Tensor Dense::backward(const Tensor& grad_y) {
  const auto batch = static_cast<Eigen::Index>(input_.dim(0));
  grad_y.require_shape({input_.dim(0), out_}, "dense gradient");
  Tensor grad_x(input_.shape());
  const ConstMapMat xin(input_.data(), batch, static_cast<Eigen::Index>(in_));
  const ConstMapMat g(grad_y.data(), batch, static_cast<Eigen::Index>(out_));
  const ConstMapMat w(weight_.value.data(), static_cast<Eigen::Index>(out_),
                      static_cast<Eigen::Index>(in_));
  MapMat dw(weight_.grad.data(), static_cast<Eigen::Index>(out_), static_cast<Eigen::Index>(in_));
  dw.noalias() += g.transpose() * xin;
  Eigen::Map<Eigen::RowVectorXd> db(bias_.grad.data(), static_cast<Eigen::Index>(out_));
  db += g.colwise().sum();
  MapMat dx(grad_x.data(), batch, static_cast<Eigen::Index>(in_));
  dx.noalias() = g * w;
  return grad_x;
}

void Dense::zero_init() {
  weight_.value.fill(0.0);
  bias_.value.fill(0.0);
}

void Dense::collect(std::vector<Parameter*>& out) {
  out.push_back(&weight_);
  out.push_back(&bias_);
}

// -------------------------------------------------------------- SSMLayer

SSMLayer::SSMLayer(const std::string& name, std::size_t d_model, std::size_t n_state,
                   std::uint64_t seed)
    : d_model_(d_model), n_modes_(n_state / 2) {
  const SSMParams p = init_ssm(d_model, n_state, seed);
  const std::vector<std::size_t> per_mode = {d_model, n_modes_};
  log_dt_ = Parameter(name + ".log_dt", Tensor({d_model}));
  rho_ = Parameter(name + ".rho", Tensor(per_mode));
  a_imag_ = Parameter(name + ".a_imag", Tensor(per_mode));
  b_re_ = Parameter(name + ".b_re", Tensor(per_mode));
  b_im_ = Parameter(name + ".b_im", Tensor(per_mode));
  c_re_ = Parameter(name + ".c_re", Tensor(per_mode));
  c_im_ = Parameter(name + ".c_im", Tensor(per_mode));
  skip_ = Parameter(name + ".skip", Tensor({d_model}));
  set_params(p);
}

SSMParams SSMLayer::params() const {
  SSMParams p;
  p.d_model = d_model_;
  p.n_modes = n_modes_;
  p.conjugate_pairs = true;
  const auto& ld = log_dt_.value.values();
  p.log_dt.assign(ld.begin(), ld.end());
  const auto& sk = skip_.value.values();
  p.skip.assign(sk.begin(), sk.end());
  const auto& r = rho_.value.values();
  p.rho.assign(r.begin(), r.end());
  const auto& ai = a_imag_.value.values();
  p.a_imag.assign(ai.begin(), ai.end());
  const std::size_t m = d_model_ * n_modes_;
  p.b.resize(m);
  p.c.resize(m);
  for (std::size_t i = 0; i < m; ++i) {
    p.b[i] = {b_re_.value[i], b_im_.value[i]};
    p.c[i] = {c_re_.value[i], c_im_.value[i]};
  }
  return p;
}

void SSMLayer::set_params(const SSMParams& p) {
  p.validate();
  if (p.d_model != d_model_ || p.n_modes != n_modes_ || !p.conjugate_pairs) {
    throw ShapeError("SSM parameters do not match the layer geometry");
  }
  for (std::size_t d = 0; d < d_model_; ++d) {
    log_dt_.value[d] = p.log_dt[d];
    skip_.value[d] = p.skip[d];
  }
  for (std::size_t i = 0; i < d_model_ * n_modes_; ++i) {
    rho_.value[i] = p.rho[i];
    a_imag_.value[i] = p.a_imag[i];
    b_re_.value[i] = p.b[i].real();
    b_im_.value[i] = p.b[i].imag();
    c_re_.value[i] = p.c[i].real();
    c_im_.value[i] = p.c[i].imag();
  }
}

Tensor SSMLayer::forward(const Tensor& x, const Context&) {
  require_3d(x, d_model_, "ssm");
  input_ = x;
  const SSMParams p = params();
  kernel_ = ssm_kernel(p, x.dim(2));
  return ssm_apply(p, x);
}

Tensor SSMLayer::backward(const Tensor& grad_y) {
  const SSMParams p = params();
  SSMGrads g(p);
  Tensor grad_x = ssm_apply_backward(p, kernel_, input_, grad_y, g);
  for (std::size_t d = 0; d < d_model_; ++d) {
    log_dt_.grad[d] += g.log_dt[d];
    skip_.grad[d] += g.skip[d];
  }
  for (std::size_t i = 0; i < d_model_ * n_modes_; ++i) {
    rho_.grad[i] += g.rho[i];
    a_imag_.grad[i] += g.a_imag[i];
    b_re_.grad[i] += g.b[i].real();
    b_im_.grad[i] += g.b[i].imag();
    c_re_.grad[i] += g.c[i].real();
    c_im_.grad[i] += g.c[i].imag();
  }
  return grad_x;
}

void SSMLayer::collect(std::vector<Parameter*>& out) {
  for (Parameter* p : {&log_dt_, &rho_, &a_imag_, &b_re_, &b_im_, &c_re_, &c_im_, &skip_}) {
    out.push_back(p);
  }
}

}  // namespace kgeeg
