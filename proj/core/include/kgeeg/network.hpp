#pragma once

#include <cstddef>
#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "kgeeg/layers.hpp"
#include "kgeeg/tensor.hpp"

namespace kgeeg {

struct ConvSpec {
  std::size_t out_channels = 0;
  std::size_t kernel = 1;
  std::size_t stride = 2;
};

struct HeadConfig {
  std::size_t n_fc = 1;  // 1: linear; 2: hidden layer with GELU
  std::size_t hidden = 256;
  std::size_t n_classes = 2;

  void validate() const;
};

struct ModelConfig {
  std::size_t n_channels = 19;
  std::size_t n_time_steps = 15360;
  std::vector<ConvSpec> encoder;
  std::size_t n_s4_layers = 8;
  std::size_t n_state = 64;
  double dropout = 0.3;
  std::size_t n_bands = 5;
  std::size_t pool_group = 16;

  // Full-size backbone: 19 x 15360 input, 512 x 240 embeddings, 8 S4 modules.
  static ModelConfig full();
  // Narrow backbone on full-length chunks, for end-to-end runs on one core.
  static ModelConfig desk();
  // Narrow backbone on 4096-sample inputs (4 power windows).
  static ModelConfig mini();
  // 2 channels, 4 stride-2 modules, d_model 8, 2 S4 modules, length 256.
  static ModelConfig tiny();

  std::size_t d_model() const { return encoder.empty() ? 0 : encoder.back().out_channels; }
  std::size_t total_stride() const;
  std::size_t n_embeddings() const { return n_time_steps / total_stride(); }
  std::size_t n_windows() const { return n_embeddings() / pool_group; }
  // Input samples covered by one pooled window.
  std::size_t window_samples() const { return pool_group * total_stride(); }

  // Throws ParameterError unless every stage length divides exactly.
  void validate() const;
};

// Conv -> dropout -> layer norm -> GELU. With `plain`, only the conv.
class ConvModule {
 public:
  ConvModule() = default;
  ConvModule(const std::string& name, std::size_t in, const ConvSpec& spec, double dropout,
             std::mt19937_64& rng);

  Tensor forward(const Tensor& x, const Context& ctx);
  Tensor backward(const Tensor& grad);
  void collect(std::vector<Parameter*>& out);

 private:
  Conv1d conv_;
  Dropout dropout_;
  LayerNorm norm_;
  Gelu gelu_;
};

class DeconvModule {
 public:
  DeconvModule() = default;
  DeconvModule(const std::string& name, std::size_t in, std::size_t out, std::size_t kernel,
               std::size_t stride, double dropout, bool plain, std::mt19937_64& rng);

  Tensor forward(const Tensor& x, const Context& ctx);
  Tensor backward(const Tensor& grad);
  void collect(std::vector<Parameter*>& out);

 private:
  bool plain_ = false;
  ConvTranspose1d conv_;
  Dropout dropout_;
  LayerNorm norm_;
  Gelu gelu_;
};

// out = layer_norm(x + dropout(GLU(pointwise(ssm(x))))).
class S4Module {
 public:
  S4Module() = default;
  S4Module(const std::string& name, std::size_t d_model, std::size_t n_state, double dropout,
           std::mt19937_64& rng);

  Tensor forward(const Tensor& x, const Context& ctx);
  Tensor backward(const Tensor& grad);
  void collect(std::vector<Parameter*>& out);

  SSMLayer& ssm() { return ssm_; }

 private:
  SSMLayer ssm_;
  Conv1d pointwise_;
  Glu glu_;
  Dropout dropout_;
  LayerNorm norm_;
};

// Mean-pools groups of embeddings and maps each pooled vector to
// n_channels x n_bands values: [B x d x T] -> [B x channels x bands x T/group].
class Projector {
 public:
  Projector() = default;
  Projector(const std::string& name, std::size_t d_model, std::size_t n_channels,
            std::size_t n_bands, std::size_t pool_group, std::mt19937_64& rng);

  Tensor forward(const Tensor& e, const Context& ctx);
  Tensor backward(const Tensor& grad);
  void collect(std::vector<Parameter*>& out);

 private:
  std::size_t d_model_ = 0, n_channels_ = 0, n_bands_ = 0, group_ = 1;
  std::size_t batch_ = 0, length_ = 0;
  Dense linear_;
};

// Mean over time, then one or two fully connected layers.
class ClassifierHead {
 public:
  ClassifierHead() = default;
  ClassifierHead(const std::string& name, std::size_t d_model, const HeadConfig& cfg,
                 std::mt19937_64& rng);

  // [B x d x T] -> [B x n_classes]
  Tensor forward(const Tensor& e, const Context& ctx);
  Tensor backward(const Tensor& grad);
  // Pooled features [B x d] -> logits; skips the time average.
  Tensor forward_pooled(const Tensor& pooled, const Context& ctx);
  Tensor backward_pooled(const Tensor& grad);
  void collect(std::vector<Parameter*>& out);

  const HeadConfig& config() const { return cfg_; }
  static Tensor mean_over_time(const Tensor& e);

 private:
  HeadConfig cfg_;
  std::size_t length_ = 0;
  Dense first_;
  Gelu gelu_;
  Dense second_;
};

// Parameter groups used for freezing and accounting.
enum class Part { encoder, temporal_in, s4, decoder, projector, head };

struct ParameterGroup {
  Part part;
  std::size_t index = 0;  // S4 module index for Part::s4
  std::vector<Parameter*> params;
};

// Encoder -> temporal block (linear-in + S4 modules) -> decoder, plus the
// band-power projector and an optional classification head.
class Model {
 public:
  Model(const ModelConfig& cfg, std::uint64_t seed);

  const ModelConfig& config() const { return cfg_; }
  std::uint64_t seed() const { return seed_; }

  // [B x channels x time] -> C [B x d x T]
  Tensor encode(const Tensor& x, const Context& ctx);
  Tensor encode_backward(const Tensor& grad_c);

  // Temporal stages are numbered 0 (linear-in) and 1..n (S4 modules).
  // Runs stages [first, end); the matching backward returns the gradient
  // with respect to the input of stage `first`.
  Tensor temporal_block(const Tensor& c, const Context& ctx, std::size_t first = 0,
                        std::size_t end = static_cast<std::size_t>(-1));
  Tensor temporal_block_backward(const Tensor& grad_e);
  std::size_t n_temporal_stages() const { return s4_.size() + 1; }

  Tensor decode(const Tensor& e, const Context& ctx);
  Tensor decode_backward(const Tensor& grad_x);

  Tensor project_bandpower(const Tensor& e, const Context& ctx);
  Tensor project_bandpower_backward(const Tensor& grad_p);

  void attach_head(const HeadConfig& head, std::uint64_t seed);
  bool has_head() const { return head_.has_value(); }
  ClassifierHead& head();
  Tensor classify(const Tensor& e, const Context& ctx);
  Tensor classify_backward(const Tensor& grad_logits);

  std::vector<ParameterGroup> groups();
  std::vector<Parameter*> parameters();
  void zero_grad();
  // Decoder and projector are only used by the pre-training objective.
  static bool discardable(Part part) { return part == Part::decoder || part == Part::projector; }

  S4Module& s4_module(std::size_t i) { return s4_.at(i); }

 private:
  ModelConfig cfg_;
  std::uint64_t seed_;
  std::vector<ConvModule> encoder_;
  Conv1d linear_in_;
  std::vector<S4Module> s4_;
  std::vector<DeconvModule> decoder_;
  Projector projector_;
  std::optional<ClassifierHead> head_;
  std::size_t temporal_first_ = 0, temporal_end_ = 0;
};

struct ParameterCount {
  std::size_t total = 0;
  std::size_t trainable = 0;
  std::map<std::string, std::size_t> by_part;  // encoder, temporal_in, s4, decoder, ...
};

std::string to_string(Part part);
ParameterCount count_parameters(Model& model);
// Backbone only: encoder + temporal block + decoder + projector.
std::size_t backbone_parameters(const ParameterCount& count);

}  // namespace kgeeg
