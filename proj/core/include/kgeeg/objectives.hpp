#pragma once

#include <functional>

#include "kgeeg/tensor.hpp"

namespace kgeeg {

inline constexpr double kDefaultKnowledgeWeight = 5.0;

struct LossReport {
  double cos_sim_loss = 0.0;
  double knowledge_loss = 0.0;
  double combined = 0.0;
  double lambda = kDefaultKnowledgeWeight;
};

// 1 - mean over (batch, channel) of the cosine similarity between the
// per-channel series of `input` and `recon` ([batch x channels x time]).
// When `grad_recon` is given it receives dLoss/d(recon). Throws
// DegenerateChannelError for an all-zero input channel.
double cosine_reconstruction_loss(const Tensor& input, const Tensor& recon,
                                  Tensor* grad_recon = nullptr);

// Sum of |target - estimate| over all non-batch axes, averaged over the batch
// (axis 0). `grad_estimate` receives dLoss/d(estimate).
double knowledge_loss(const Tensor& target, const Tensor& estimate,
                      Tensor* grad_estimate = nullptr);

// Any knowledge-matching loss g(target, estimate) with the same gradient
// contract as knowledge_loss.
using KnowledgeLossFn =
    std::function<double(const Tensor& target, const Tensor& estimate, Tensor* grad_estimate)>;

struct LossGrads {
  Tensor recon;     // dL/d(recon)
  Tensor estimate;  // dL/d(estimate), already scaled by lambda
};

// combined = cos + lambda * knowledge. With lambda = 0 the knowledge term is
// still reported but contributes an all-zero gradient.
LossReport combined_loss(const Tensor& input, const Tensor& recon, const Tensor& target,
                         const Tensor& estimate, double lambda = kDefaultKnowledgeWeight,
                         LossGrads* grads = nullptr,
                         const KnowledgeLossFn& knowledge = knowledge_loss);

// Mean softmax cross-entropy of logits [batch x classes] against labels.
double cross_entropy(const Tensor& logits, const std::vector<std::size_t>& labels,
                     Tensor* grad_logits = nullptr);

}  // namespace kgeeg
