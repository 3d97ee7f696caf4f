#include "kgeeg/objectives.hpp"

#include <algorithm>
#include <cmath>

#include "kgeeg/error.hpp"

namespace kgeeg {

double cosine_reconstruction_loss(const Tensor& input, const Tensor& recon, Tensor* grad_recon) {
  if (input.rank() != 3) throw ShapeError("reconstruction loss expects [batch x channels x time]");
  recon.require_shape(input.shape(), "reconstruction");
  const std::size_t batch = input.dim(0), channels = input.dim(1), len = input.dim(2);
  const std::size_t rows = batch * channels;
  if (rows == 0 || len == 0) throw ShapeError("reconstruction loss on an empty tensor");
  if (grad_recon) *grad_recon = Tensor(input.shape());
  const double inv_rows = 1.0 / static_cast<double>(rows);
  double total = 0.0;
  for (std::size_t r = 0; r < rows; ++r) {
    const double* x = input.data() + r * len;
    const double* y = recon.data() + r * len;
    double xy = 0.0, xx = 0.0, yy = 0.0;
    for (std::size_t t = 0; t < len; ++t) {
      xy += x[t] * y[t];
      xx += x[t] * x[t];
      yy += y[t] * y[t];
    }
    if (xx == 0.0) {
      throw DegenerateChannelError("batch item " + std::to_string(r / channels) + ", channel " +
                                   std::to_string(r % channels));
    }
    const double nx = std::sqrt(xx);
    const double ny = std::max(std::sqrt(yy), 1e-300);
    const double cos = xy / (nx * ny);
    total += cos;
    if (grad_recon) {
      double* g = grad_recon->data() + r * len;
      const double a = -inv_rows / (nx * ny);
      const double b = inv_rows * cos / (ny * ny);
      for (std::size_t t = 0; t < len; ++t) g[t] = a * x[t] + b * y[t];
    }
  }
  return 1.0 - total * inv_rows;
}

double knowledge_loss(const Tensor& target, const Tensor& estimate, Tensor* grad_estimate) {
  estimate.require_shape(target.shape(), "band-power estimate");
  if (target.rank() < 1 || target.dim(0) == 0) throw ShapeError("knowledge loss on an empty batch");
  const double inv_batch = 1.0 / static_cast<double>(target.dim(0));
  if (grad_estimate) *grad_estimate = Tensor(target.shape());
  double total = 0.0;
  for (std::size_t i = 0; i < target.size(); ++i) {
    const double d = estimate[i] - target[i];
    total += std::abs(d);
    if (grad_estimate) (*grad_estimate)[i] = d > 0.0 ? inv_batch : (d < 0.0 ? -inv_batch : 0.0);
  }
  return total * inv_batch;
}

LossReport combined_loss(const Tensor& input, const Tensor& recon, const Tensor& target,
                         const Tensor& estimate, double lambda, LossGrads* grads,
                         const KnowledgeLossFn& knowledge) {
  if (!(lambda >= 0.0)) throw ParameterError("knowledge weight must be non-negative");
  LossReport r;
  r.lambda = lambda;
  r.cos_sim_loss = cosine_reconstruction_loss(input, recon, grads ? &grads->recon : nullptr);
  r.knowledge_loss = knowledge(target, estimate, grads ? &grads->estimate : nullptr);
  r.combined = r.cos_sim_loss + lambda * r.knowledge_loss;
  if (grads) grads->estimate.scale(lambda);
  return r;
}

double cross_entropy(const Tensor& logits, const std::vector<std::size_t>& labels,
                     Tensor* grad_logits) {
  if (logits.rank() != 2 || logits.dim(0) != labels.size() || labels.empty()) {
    throw ShapeError("cross entropy expects [batch x classes] logits and one label per row");
  }
  const std::size_t batch = logits.dim(0), classes = logits.dim(1);
  if (grad_logits) *grad_logits = Tensor(logits.shape());
  const double inv_batch = 1.0 / static_cast<double>(batch);
  double total = 0.0;
  for (std::size_t b = 0; b < batch; ++b) {
    if (labels[b] >= classes) throw ParameterError("label out of range");
    const double* z = logits.data() + b * classes;
    const double m = *std::max_element(z, z + classes);
    double s = 0.0;
    for (std::size_t c = 0; c < classes; ++c) s += std::exp(z[c] - m);
    const double log_s = std::log(s) + m;
    total += log_s - z[labels[b]];
    if (grad_logits) {
      double* g = grad_logits->data() + b * classes;
      for (std::size_t c = 0; c < classes; ++c) {
        g[c] = (std::exp(z[c] - log_s) - (c == labels[b] ? 1.0 : 0.0)) * inv_batch;
      }
    }
  }
  return total * inv_batch;
}

}  // namespace kgeeg
