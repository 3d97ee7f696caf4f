#include "kgeeg/optimizer.hpp"

#include <cmath>

#include "kgeeg/error.hpp"

namespace kgeeg {

Adam::Adam(std::vector<Parameter*> params, AdamConfig cfg) : cfg_(cfg) {
  if (!(cfg.lr > 0.0)) throw ParameterError("learning rate must be positive");
  for (Parameter* p : params) {
    if (!p->trainable) continue;
    params_.push_back(p);
    m_.push_back(Tensor::like(p->value));
    v_.push_back(Tensor::like(p->value));
  }
}

void Adam::step() {
  ++t_;
  const double c1 = 1.0 - std::pow(cfg_.beta1, static_cast<double>(t_));
  const double c2 = 1.0 - std::pow(cfg_.beta2, static_cast<double>(t_));
  const double step = cfg_.lr / c1;
  const double inv_c2 = 1.0 / c2;
  for (std::size_t k = 0; k < params_.size(); ++k) {
    Parameter& p = *params_[k];
    double* m = m_[k].data();
    double* v = v_[k].data();
    double* w = p.value.data();
    const double* g = p.grad.data();
    for (std::size_t i = 0; i < p.size(); ++i) {
      m[i] = cfg_.beta1 * m[i] + (1.0 - cfg_.beta1) * g[i];
      v[i] = cfg_.beta2 * v[i] + (1.0 - cfg_.beta2) * g[i] * g[i];
      w[i] -= step * m[i] / (std::sqrt(v[i] * inv_c2) + cfg_.eps);
    }
  }
}

void Adam::zero_grad() {
  for (Parameter* p : params_) p->zero_grad();
}

}  // namespace kgeeg
