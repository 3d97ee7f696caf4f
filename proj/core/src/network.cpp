#include "kgeeg/network.hpp"

#include <algorithm>

#include "kgeeg/error.hpp"

namespace kgeeg {

namespace {

std::vector<ConvSpec> stack(const std::vector<std::size_t>& widths,
                            const std::vector<std::size_t>& kernels) {
  std::vector<ConvSpec> specs;
  for (std::size_t i = 0; i < widths.size(); ++i) specs.push_back({widths[i], kernels[i], 2});
  return specs;
}

void require_input(const Tensor& x, std::size_t channels, std::size_t length, const char* what) {
  if (x.rank() != 3 || x.dim(1) != channels || x.dim(2) != length) {
    throw ShapeError(std::string(what) + ": expected [batch x " + std::to_string(channels) +
                     " x " + std::to_string(length) + "], got " + x.shape_string());
  }
}

}  // namespace

void HeadConfig::validate() const {
  if (n_fc != 1 && n_fc != 2) throw ParameterError("head n_fc must be 1 or 2");
  if (n_classes < 2) throw ParameterError("head needs at least 2 classes");
  if (n_fc == 2 && hidden == 0) throw ParameterError("head hidden width must be positive");
}

ModelConfig ModelConfig::full() {
  ModelConfig c;
  c.encoder = stack({64, 128, 256, 512, 512, 512}, {7, 5, 5, 5, 5, 5});
  return c;
}

ModelConfig ModelConfig::desk() {
  ModelConfig c;
  c.encoder = stack({16, 16, 32, 32, 32, 32}, {7, 5, 5, 5, 5, 5});
  c.n_s4_layers = 2;
  c.n_state = 16;
  c.dropout = 0.1;
  return c;
}

ModelConfig ModelConfig::mini() {
  ModelConfig c = desk();
  c.n_time_steps = 4096;
  return c;
}

ModelConfig ModelConfig::tiny() {
  ModelConfig c;
  c.n_channels = 2;
  c.n_time_steps = 256;
  c.encoder = stack({4, 6, 8, 8}, {5, 3, 3, 3});
  c.n_s4_layers = 2;
  c.n_state = 4;
  c.dropout = 0.0;
  c.pool_group = 4;
  return c;
}

std::size_t ModelConfig::total_stride() const {
  std::size_t s = 1;
  for (const auto& e : encoder) s *= e.stride;
  return s;
}

void ModelConfig::validate() const {
  if (n_channels == 0 || n_time_steps == 0) throw ParameterError("empty model input");
  if (encoder.empty()) throw ParameterError("encoder needs at least one module");
  if (n_s4_layers == 0) throw ParameterError("temporal block needs at least one S4 module");
  if (n_state == 0 || n_state % 2 != 0) throw ParameterError("n_state must be even");
  if (dropout < 0.0 || dropout >= 1.0) throw ParameterError("dropout must be in [0, 1)");
  if (n_bands == 0 || pool_group == 0) throw ParameterError("projector sizes must be positive");
  std::size_t length = n_time_steps;
  for (const auto& e : encoder) {
    if (e.out_channels == 0 || e.kernel % 2 == 0 || e.stride != 2) {
      throw ParameterError("encoder modules need odd kernels and stride 2");
    }
    if (length % 2 != 0) {
      throw ParameterError("input length " + std::to_string(n_time_steps) +
                           " is not divisible by the encoder stride");
    }
    length /= 2;
  }
  if (length % pool_group != 0) {
    throw ParameterError("embedding count " + std::to_string(length) +
                         " is not divisible by the pool group");
  }
}

// ------------------------------------------------------------ ConvModule

ConvModule::ConvModule(const std::string& name, std::size_t in, const ConvSpec& spec,
                       double dropout, std::mt19937_64& rng)
    : conv_(name + ".conv", in, spec.out_channels, spec.kernel, spec.stride,
            (spec.kernel - 1) / 2, rng),
      dropout_(dropout),
      norm_(name + ".norm", spec.out_channels) {}

Tensor ConvModule::forward(const Tensor& x, const Context& ctx) {
  return gelu_.forward(norm_.forward(dropout_.forward(conv_.forward(x, ctx), ctx), ctx), ctx);
}

Tensor ConvModule::backward(const Tensor& grad) {
  return conv_.backward(dropout_.backward(norm_.backward(gelu_.backward(grad))));
}

void ConvModule::collect(std::vector<Parameter*>& out) {
  conv_.collect(out);
  norm_.collect(out);
}

// ---------------------------------------------------------- DeconvModule

DeconvModule::DeconvModule(const std::string& name, std::size_t in, std::size_t out,
                           std::size_t kernel, std::size_t stride, double dropout, bool plain,
                           std::mt19937_64& rng)
    : plain_(plain),
      conv_(name + ".conv", in, out, kernel, stride, (kernel - 1) / 2, stride - 1, rng),
      dropout_(dropout) {
  if (!plain_) norm_ = LayerNorm(name + ".norm", out);
}

Tensor DeconvModule::forward(const Tensor& x, const Context& ctx) {
  Tensor y = conv_.forward(x, ctx);
  if (plain_) return y;
  return gelu_.forward(norm_.forward(dropout_.forward(y, ctx), ctx), ctx);
}

Tensor DeconvModule::backward(const Tensor& grad) {
  if (plain_) return conv_.backward(grad);
  return conv_.backward(dropout_.backward(norm_.backward(gelu_.backward(grad))));
}

void DeconvModule::collect(std::vector<Parameter*>& out) {
  conv_.collect(out);
  if (!plain_) norm_.collect(out);
}

// -------------------------------------------------------------- S4Module

S4Module::S4Module(const std::string& name, std::size_t d_model, std::size_t n_state,
                   double dropout, std::mt19937_64& rng)
    : ssm_(name + ".ssm", d_model, n_state, rng()),
      pointwise_(name + ".pointwise", d_model, 2 * d_model, 1, 1, 0, rng),
      dropout_(dropout),
      norm_(name + ".norm", d_model) {}

Tensor S4Module::forward(const Tensor& x, const Context& ctx) {
  Tensor h = dropout_.forward(glu_.forward(pointwise_.forward(ssm_.forward(x, ctx), ctx), ctx),
                              ctx);
  h.add(x);
  return norm_.forward(h, ctx);
}

Tensor S4Module::backward(const Tensor& grad) {
  Tensor g_sum = norm_.backward(grad);
  Tensor g_x = ssm_.backward(pointwise_.backward(glu_.backward(dropout_.backward(g_sum))));
  g_x.add(g_sum);
  return g_x;
}

void S4Module::collect(std::vector<Parameter*>& out) {
  ssm_.collect(out);
  pointwise_.collect(out);
  norm_.collect(out);
}

// ------------------------------------------------------------- Projector

Projector::Projector(const std::string& name, std::size_t d_model, std::size_t n_channels,
                     std::size_t n_bands, std::size_t pool_group, std::mt19937_64& rng)
    : d_model_(d_model),
      n_channels_(n_channels),
      n_bands_(n_bands),
      group_(pool_group),
      linear_(name + ".linear", d_model, n_channels * n_bands, rng) {}

Tensor Projector::forward(const Tensor& e, const Context& ctx) {
  if (e.rank() != 3 || e.dim(1) != d_model_ || e.dim(2) % group_ != 0 || e.dim(2) == 0) {
    throw ShapeError("projector: expected [batch x " + std::to_string(d_model_) +
                     " x multiple of " + std::to_string(group_) + "], got " + e.shape_string());
  }
  batch_ = e.dim(0);
  length_ = e.dim(2);
  const std::size_t windows = length_ / group_;
  // Rows are (batch, window) pairs.
  Tensor pooled({batch_ * windows, d_model_});
  const double inv = 1.0 / static_cast<double>(group_);
  for (std::size_t b = 0; b < batch_; ++b) {
    for (std::size_t d = 0; d < d_model_; ++d) {
      const double* row = e.data() + (b * d_model_ + d) * length_;
      for (std::size_t w = 0; w < windows; ++w) {
        double s = 0.0;
        for (std::size_t t = 0; t < group_; ++t) s += row[w * group_ + t];
        pooled[(b * windows + w) * d_model_ + d] = s * inv;
      }
    }
  }
  const Tensor flat = linear_.forward(pooled, ctx);
  Tensor p({batch_, n_channels_, n_bands_, windows});
  const std::size_t outs = n_channels_ * n_bands_;
  for (std::size_t b = 0; b < batch_; ++b) {
    for (std::size_t w = 0; w < windows; ++w) {
      for (std::size_t k = 0; k < outs; ++k) {
        p[(b * outs + k) * windows + w] = flat[(b * windows + w) * outs + k];
      }
    }
  }
  return p;
}

Tensor Projector::backward(const Tensor& grad) {
  const std::size_t windows = length_ / group_;
  grad.require_shape({batch_, n_channels_, n_bands_, windows}, "projector gradient");
  const std::size_t outs = n_channels_ * n_bands_;
  Tensor g_flat({batch_ * windows, outs});
  for (std::size_t b = 0; b < batch_; ++b) {
    for (std::size_t w = 0; w < windows; ++w) {
      for (std::size_t k = 0; k < outs; ++k) {
        g_flat[(b * windows + w) * outs + k] = grad[(b * outs + k) * windows + w];
      }
    }
  }
  const Tensor g_pooled = linear_.backward(g_flat);
  Tensor g_e({batch_, d_model_, length_});
  const double inv = 1.0 / static_cast<double>(group_);
  for (std::size_t b = 0; b < batch_; ++b) {
    for (std::size_t d = 0; d < d_model_; ++d) {
      double* row = g_e.data() + (b * d_model_ + d) * length_;
      for (std::size_t w = 0; w < windows; ++w) {
        const double g = g_pooled[(b * windows + w) * d_model_ + d] * inv;
        for (std::size_t t = 0; t < group_; ++t) row[w * group_ + t] = g;
      }
    }
  }
  return g_e;
}

void Projector::collect(std::vector<Parameter*>& out) { linear_.collect(out); }

// -------------------------------------------------------- ClassifierHead

ClassifierHead::ClassifierHead(const std::string& name, std::size_t d_model,
                               const HeadConfig& cfg, std::mt19937_64& rng)
    : cfg_(cfg) {
  cfg.validate();
  // The output layer starts at zero: every class equally likely.
  if (cfg.n_fc == 1) {
    first_ = Dense(name + ".fc0", d_model, cfg.n_classes, rng);
    first_.zero_init();
  } else {
    first_ = Dense(name + ".fc0", d_model, cfg.hidden, rng);
    second_ = Dense(name + ".fc1", cfg.hidden, cfg.n_classes, rng);
    second_.zero_init();
  }
}

Tensor ClassifierHead::mean_over_time(const Tensor& e) {
  if (e.rank() != 3 || e.dim(2) == 0) throw ShapeError("expected [batch x d x time] embeddings");
  const std::size_t batch = e.dim(0), d = e.dim(1), len = e.dim(2);
  Tensor pooled({batch, d});
  for (std::size_t i = 0; i < batch * d; ++i) {
    double s = 0.0;
    for (std::size_t t = 0; t < len; ++t) s += e[i * len + t];
    pooled[i] = s / static_cast<double>(len);
  }
  return pooled;
}

Tensor ClassifierHead::forward(const Tensor& e, const Context& ctx) {
  if (e.rank() != 3 || e.dim(1) != first_.in_features()) {
    throw ShapeError("head: expected [batch x " + std::to_string(first_.in_features()) +
                     " x time], got " + e.shape_string());
  }
  length_ = e.dim(2);
  return forward_pooled(mean_over_time(e), ctx);
}

Tensor ClassifierHead::backward(const Tensor& grad) {
  const Tensor g_pooled = backward_pooled(grad);
  const std::size_t batch = g_pooled.dim(0), d = g_pooled.dim(1);
  Tensor g_e({batch, d, length_});
  const double inv = 1.0 / static_cast<double>(length_);
  for (std::size_t i = 0; i < batch * d; ++i) {
    for (std::size_t t = 0; t < length_; ++t) g_e[i * length_ + t] = g_pooled[i] * inv;
  }
  return g_e;
}

Tensor ClassifierHead::forward_pooled(const Tensor& pooled, const Context& ctx) {
  Tensor h = first_.forward(pooled, ctx);
  if (cfg_.n_fc == 1) return h;
  return second_.forward(gelu_.forward(h, ctx), ctx);
}

Tensor ClassifierHead::backward_pooled(const Tensor& grad) {
  if (cfg_.n_fc == 1) return first_.backward(grad);
  return first_.backward(gelu_.backward(second_.backward(grad)));
}

void ClassifierHead::collect(std::vector<Parameter*>& out) {
  first_.collect(out);
  if (cfg_.n_fc == 2) second_.collect(out);
}

// ----------------------------------------------------------------- Model

Model::Model(const ModelConfig& cfg, std::uint64_t seed) : cfg_(cfg), seed_(seed) {
  cfg_.validate();
  std::mt19937_64 rng(seed);
  std::size_t in = cfg_.n_channels;
  for (std::size_t i = 0; i < cfg_.encoder.size(); ++i) {
    encoder_.emplace_back("encoder." + std::to_string(i), in, cfg_.encoder[i], cfg_.dropout, rng);
    in = cfg_.encoder[i].out_channels;
  }
  const std::size_t d = cfg_.d_model();
  linear_in_ = Conv1d("temporal.linear_in", d, d, 1, 1, 0, rng);
  for (std::size_t i = 0; i < cfg_.n_s4_layers; ++i) {
    s4_.emplace_back("temporal.s4." + std::to_string(i), d, cfg_.n_state, cfg_.dropout, rng);
  }
  const std::size_t n = cfg_.encoder.size();
  for (std::size_t i = 0; i < n; ++i) {
    const ConvSpec& mirror = cfg_.encoder[n - 1 - i];
    const std::size_t out = i + 1 < n ? cfg_.encoder[n - 2 - i].out_channels : cfg_.n_channels;
    decoder_.emplace_back("decoder." + std::to_string(i), mirror.out_channels, out, mirror.kernel,
                          mirror.stride, cfg_.dropout, i + 1 == n, rng);
  }
  projector_ = Projector("projector", d, cfg_.n_channels, cfg_.n_bands, cfg_.pool_group, rng);
}

Tensor Model::encode(const Tensor& x, const Context& ctx) {
  require_input(x, cfg_.n_channels, cfg_.n_time_steps, "encode");
  Tensor h = x;
  for (auto& m : encoder_) h = m.forward(h, ctx);
  return h;
}

Tensor Model::encode_backward(const Tensor& grad_c) {
  Tensor g = grad_c;
  for (auto it = encoder_.rbegin(); it != encoder_.rend(); ++it) g = it->backward(g);
  return g;
}

Tensor Model::temporal_block(const Tensor& c, const Context& ctx, std::size_t first,
                             std::size_t end) {
  end = std::min(end, n_temporal_stages());
  if (first > end) throw ParameterError("temporal stage range is empty or reversed");
  require_input(c, cfg_.d_model(), cfg_.n_embeddings(), "temporal_block");
  temporal_first_ = first;
  temporal_end_ = end;
  Tensor h = c;
  for (std::size_t stage = first; stage < end; ++stage) {
    h = stage == 0 ? linear_in_.forward(h, ctx) : s4_[stage - 1].forward(h, ctx);
  }
  return h;
}

Tensor Model::temporal_block_backward(const Tensor& grad_e) {
  Tensor g = grad_e;
  for (std::size_t stage = temporal_end_; stage-- > temporal_first_;) {
    g = stage == 0 ? linear_in_.backward(g) : s4_[stage - 1].backward(g);
  }
  return g;
}

Tensor Model::decode(const Tensor& e, const Context& ctx) {
  require_input(e, cfg_.d_model(), cfg_.n_embeddings(), "decode");
  Tensor h = e;
  for (auto& m : decoder_) h = m.forward(h, ctx);
  return h;
}

Tensor Model::decode_backward(const Tensor& grad_x) {
  Tensor g = grad_x;
  for (auto it = decoder_.rbegin(); it != decoder_.rend(); ++it) g = it->backward(g);
  return g;
}

Tensor Model::project_bandpower(const Tensor& e, const Context& ctx) {
  require_input(e, cfg_.d_model(), cfg_.n_embeddings(), "project_bandpower");
  return projector_.forward(e, ctx);
}

Tensor Model::project_bandpower_backward(const Tensor& grad_p) {
  return projector_.backward(grad_p);
}

void Model::attach_head(const HeadConfig& head, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  head_.emplace("head", cfg_.d_model(), head, rng);
}

ClassifierHead& Model::head() {
  if (!head_) throw ParameterError("model has no classification head");
  return *head_;
}

Tensor Model::classify(const Tensor& e, const Context& ctx) {
  require_input(e, cfg_.d_model(), cfg_.n_embeddings(), "classify");
  return head().forward(e, ctx);
}

Tensor Model::classify_backward(const Tensor& grad_logits) { return head().backward(grad_logits); }

std::vector<ParameterGroup> Model::groups() {
  std::vector<ParameterGroup> out;
  ParameterGroup enc{Part::encoder, 0, {}};
  for (auto& m : encoder_) m.collect(enc.params);
  out.push_back(std::move(enc));
  ParameterGroup lin{Part::temporal_in, 0, {}};
  linear_in_.collect(lin.params);
  out.push_back(std::move(lin));
  for (std::size_t i = 0; i < s4_.size(); ++i) {
    ParameterGroup g{Part::s4, i, {}};
    s4_[i].collect(g.params);
    out.push_back(std::move(g));
  }
  ParameterGroup dec{Part::decoder, 0, {}};
  for (auto& m : decoder_) m.collect(dec.params);
  out.push_back(std::move(dec));
  ParameterGroup proj{Part::projector, 0, {}};
  projector_.collect(proj.params);
  out.push_back(std::move(proj));
  if (head_) {
    ParameterGroup h{Part::head, 0, {}};
    head_->collect(h.params);
    out.push_back(std::move(h));
  }
  return out;
}

std::vector<Parameter*> Model::parameters() {
  std::vector<Parameter*> all;
  for (auto& g : groups()) all.insert(all.end(), g.params.begin(), g.params.end());
  return all;
}

void Model::zero_grad() {
  for (Parameter* p : parameters()) p->zero_grad();
}

std::string to_string(Part part) {
  switch (part) {
    case Part::encoder: return "encoder";
    case Part::temporal_in: return "temporal_in";
    case Part::s4: return "s4";
    case Part::decoder: return "decoder";
    case Part::projector: return "projector";
    case Part::head: return "head";
  }
  return "unknown";
}

ParameterCount count_parameters(Model& model) {
  ParameterCount count;
  for (auto& g : model.groups()) {
    for (const Parameter* p : g.params) {
      count.total += p->size();
      if (p->trainable) count.trainable += p->size();
      count.by_part[to_string(g.part)] += p->size();
    }
  }
  return count;
}

std::size_t backbone_parameters(const ParameterCount& count) {
  std::size_t n = 0;
  for (const auto& [part, size] : count.by_part) {
    if (part != "head") n += size;
  }
  return n;
}

}  // namespace kgeeg
