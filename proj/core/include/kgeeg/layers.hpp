#pragma once

#include <cstddef>
#include <cstdint>
#include <random>
#include <string>
#include <vector>

#include "kgeeg/ssm.hpp"
#include "kgeeg/tensor.hpp"

namespace kgeeg {

struct Parameter {
  std::string name;
  Tensor value;
  Tensor grad;
  bool trainable = true;

  Parameter() = default;
  Parameter(std::string n, Tensor v)
      : name(std::move(n)), value(std::move(v)), grad(Tensor::like(value)) {}
  void zero_grad() { grad.fill(0.0); }
  std::size_t size() const { return value.size(); }
};

enum class Mode { train, eval };

// Forward-pass settings. Dropout draws from `rng` in train mode; eval mode is
// deterministic and never touches the generator.
struct Context {
  Mode mode = Mode::eval;
  std::mt19937_64* rng = nullptr;

  bool training() const { return mode == Mode::train; }
};

// Layers cache what their backward pass needs during forward, so each
// forward must be followed by at most one matching backward.

class Conv1d {
 public:
  Conv1d() = default;
  Conv1d(const std::string& name, std::size_t in, std::size_t out, std::size_t kernel,
         std::size_t stride, std::size_t pad, std::mt19937_64& rng);

  std::size_t output_length(std::size_t input_length) const;
  Tensor forward(const Tensor& x, const Context& ctx);
  Tensor backward(const Tensor& grad_y);
  void collect(std::vector<Parameter*>& out);

  std::size_t in_channels() const { return in_; }
  std::size_t out_channels() const { return out_; }

 private:
  std::size_t in_ = 0, out_ = 0, kernel_ = 1, stride_ = 1, pad_ = 0;
  Parameter weight_;  // [out x in x kernel]
  Parameter bias_;    // [out]
  Tensor input_;
};

class ConvTranspose1d {
 public:
  ConvTranspose1d() = default;
  ConvTranspose1d(const std::string& name, std::size_t in, std::size_t out,
                  std::size_t kernel, std::size_t stride, std::size_t pad,
                  std::size_t output_pad, std::mt19937_64& rng);

  std::size_t output_length(std::size_t input_length) const;
  Tensor forward(const Tensor& x, const Context& ctx);
  Tensor backward(const Tensor& grad_y);
  void collect(std::vector<Parameter*>& out);

 private:
  std::size_t in_ = 0, out_ = 0, kernel_ = 1, stride_ = 1, pad_ = 0, output_pad_ = 0;
  Parameter weight_;  // [in x out x kernel]
  Parameter bias_;    // [out]
  Tensor input_;
};

// Normalizes over the channel axis of [batch x channels x time] at every
// (batch, time) position, with per-channel gain and bias.
class LayerNorm {
 public:
  LayerNorm() = default;
  LayerNorm(const std::string& name, std::size_t channels, double eps = 1e-5);

  Tensor forward(const Tensor& x, const Context& ctx);
  Tensor backward(const Tensor& grad_y);
  void collect(std::vector<Parameter*>& out);

 private:
  std::size_t channels_ = 0;
  double eps_ = 1e-5;
  Parameter gain_, bias_;
  Tensor normalized_;
  std::vector<double> inv_std_;  // [batch x time]
};

// Exact GELU, x * Phi(x).
class Gelu {
 public:
  Tensor forward(const Tensor& x, const Context& ctx);
  Tensor backward(const Tensor& grad_y);

 private:
  Tensor input_;
};

// Inverted dropout; identity in eval mode or when p == 0.
class Dropout {
 public:
  explicit Dropout(double p = 0.0) : p_(p) {}

  Tensor forward(const Tensor& x, const Context& ctx);
  Tensor backward(const Tensor& grad_y);

 private:
  double p_;
  std::vector<double> mask_;  // empty when the last forward was an identity
};

// [batch x 2C x time] -> [batch x C x time]: first half gated by the sigmoid
// of the second half.
class Glu {
 public:
  Tensor forward(const Tensor& x, const Context& ctx);
  Tensor backward(const Tensor& grad_y);

 private:
  Tensor input_;
};

// [batch x in] -> [batch x out]
class Dense {
 public:
  Dense() = default;
  Dense(const std::string& name, std::size_t in, std::size_t out, std::mt19937_64& rng);

  Tensor forward(const Tensor& x, const Context& ctx);
  Tensor backward(const Tensor& grad_y);
  void collect(std::vector<Parameter*>& out);
  void zero_init();

  std::size_t in_features() const { return in_; }
  std::size_t out_features() const { return out_; }

 private:
  std::size_t in_ = 0, out_ = 0;
  Parameter weight_;  // [out x in]
  Parameter bias_;    // [out]
  Tensor input_;
};

// Diagonal state-space convolution over [batch x d_model x time], with its
// parameters exposed as named tensors.
class SSMLayer {
 public:
  SSMLayer() = default;
  SSMLayer(const std::string& name, std::size_t d_model, std::size_t n_state,
           std::uint64_t seed);

  Tensor forward(const Tensor& x, const Context& ctx);
  Tensor backward(const Tensor& grad_y);
  void collect(std::vector<Parameter*>& out);

  SSMParams params() const;
  void set_params(const SSMParams& p);

 private:
  std::size_t d_model_ = 0, n_modes_ = 0;
  Parameter log_dt_, rho_, a_imag_, b_re_, b_im_, c_re_, c_im_, skip_;
  Tensor input_;
  Tensor kernel_;
};

}  // namespace kgeeg
