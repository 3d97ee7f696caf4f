#pragma once

#include <cstddef>
#include <vector>

#include "kgeeg/layers.hpp"

namespace kgeeg {

struct AdamConfig {
  double lr = 1e-3;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;
};

// Adam with bias correction. Only parameters flagged trainable at
// construction are ever written; the rest are left bitwise untouched.
class Adam {
 public:
  Adam(std::vector<Parameter*> params, AdamConfig cfg = {});

  void step();
  void zero_grad();

  std::size_t steps() const { return t_; }
  const AdamConfig& config() const { return cfg_; }
  const std::vector<Parameter*>& parameters() const { return params_; }

  // Moment buffers, one per trainable parameter in order.
  std::vector<Tensor>& first_moments() { return m_; }
  std::vector<Tensor>& second_moments() { return v_; }
  const std::vector<Tensor>& first_moments() const { return m_; }
  const std::vector<Tensor>& second_moments() const { return v_; }
  void set_steps(std::size_t t) { t_ = t; }

 private:
  AdamConfig cfg_;
  std::vector<Parameter*> params_;
  std::vector<Tensor> m_, v_;
  std::size_t t_ = 0;
};

}  // namespace kgeeg
