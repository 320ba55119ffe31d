// Copyright 2026 The STS Authors
// License: Apache 2.0 (http://www.apache.org/licenses/LICENSE-2.0)

#pragma once

#include <cmath>
#include <vector>

#include "sts/error.hpp"
#include "sts/tensor/tensor.hpp"

namespace sts {

struct AdamConfig {
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;
};

// Adam with bias correction. Parameter tensors are held by reference
// semantics, so stepping here updates the owning model in place. Moment
// state is kept in double regardless of the parameter scalar type.
template <typename S>
class Adam {
 public:
  explicit Adam(std::vector<Tensor<S>> params, AdamConfig cfg = {})
      : params_(std::move(params)), cfg_(cfg) {
    if (cfg_.beta1 < 0 || cfg_.beta1 >= 1 || cfg_.beta2 < 0 || cfg_.beta2 >= 1)
      throw ParamError("Adam: betas must lie in [0, 1)");
    if (cfg_.eps <= 0) throw ParamError("Adam: eps must be positive");
    m_.reserve(params_.size());
    v_.reserve(params_.size());
    for (const auto& p : params_) {
      if (!p.defined()) throw ContractError("Adam: undefined parameter");
      m_.emplace_back(p.size(), 0.0);
      v_.emplace_back(p.size(), 0.0);
    }
  }

  // One update from the gradients currently stored on the parameters. A
  // parameter whose gradient was never allocated is treated as zero-grad.
  void step(double lr) {
    ++t_;
    const double c1 = 1.0 - std::pow(cfg_.beta1, static_cast<double>(t_));
    const double c2 = 1.0 - std::pow(cfg_.beta2, static_cast<double>(t_));
    for (std::size_t i = 0; i < params_.size(); ++i) {
      auto& p = params_[i];
      const auto& g = p.grad();
      auto& m = m_[i];
      auto& v = v_[i];
      for (std::size_t j = 0; j < m.size(); ++j) {
        const double gj = g.empty() ? 0.0 : static_cast<double>(g[j]);
        m[j] = cfg_.beta1 * m[j] + (1.0 - cfg_.beta1) * gj;
        v[j] = cfg_.beta2 * v[j] + (1.0 - cfg_.beta2) * gj * gj;
        const double update =
            lr * (m[j] / c1) / (std::sqrt(v[j] / c2) + cfg_.eps);
        p.data()[j] -= static_cast<S>(update);
      }
    }
  }

  void zero_grads() {
    for (auto& p : params_) p.zero_grad();
  }

  long step_count() const { return t_; }

 private:
  std::vector<Tensor<S>> params_;
  AdamConfig cfg_;
  std::vector<std::vector<double>> m_, v_;
  long t_ = 0;
};

}  // namespace sts
