/*
 * Copyright 2026 The unlead authors
 *
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *    http://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

#ifndef UNLEAD_OPTIM_HPP
#define UNLEAD_OPTIM_HPP

#include <cmath>
#include <cstddef>
#include <vector>

#include "unlead/errors.hpp"
#include "unlead/tensor.hpp"

namespace unlead {

/// Inverse-square-root schedule with linear warm-up, normalized so the rate
/// peaks at exactly base_lr when step == warmup_steps.
struct WarmupSchedule {
  double base_lr = 2e-3;
  std::size_t warmup_steps = 200;

  double lr_at(std::size_t step) const {
    if (step < 1) throw Error("schedule: step index starts at 1");
    const double s = static_cast<double>(step);
    const double w = static_cast<double>(warmup_steps);
    return base_lr * std::sqrt(w) * std::min(1.0 / std::sqrt(s), s * std::pow(w, -1.5));
  }
};

/// Adam with bias correction. Moment buffers are kept in the order the
/// parameter tensors are first passed in; callers must present the same
/// tensor list on every step.
class Adam {
 public:
  explicit Adam(WarmupSchedule schedule, double beta1 = 0.9, double beta2 = 0.999,
                double eps = 1e-8)
      : schedule_(schedule), beta1_(beta1), beta2_(beta2), eps_(eps) {}

  void step(const std::vector<Tensor*>& params) {
    if (m_.empty()) {
      for (Tensor* p : params) {
        m_.push_back(Tensor::zeros(p->shape));
        v_.push_back(Tensor::zeros(p->shape));
      }
    }
    if (m_.size() != params.size()) throw Error("adam: parameter list changed size");
    ++step_;
    const double lr = schedule_.lr_at(step_);
    const double bc1 = 1.0 - std::pow(beta1_, static_cast<double>(step_));
    const double bc2 = 1.0 - std::pow(beta2_, static_cast<double>(step_));
    for (std::size_t i = 0; i < params.size(); ++i) {
      Tensor& p = *params[i];
      p.ensure_grad();
      for (std::size_t j = 0; j < p.values.size(); ++j) {
        const double g = p.grad[j];
        m_[i].values[j] = beta1_ * m_[i].values[j] + (1.0 - beta1_) * g;
        v_[i].values[j] = beta2_ * v_[i].values[j] + (1.0 - beta2_) * g * g;
        const double mhat = m_[i].values[j] / bc1;
        const double vhat = v_[i].values[j] / bc2;
        p.values[j] -= lr * mhat / (std::sqrt(vhat) + eps_);
      }
    }
  }

  std::size_t step_count() const { return step_; }
  const std::vector<Tensor>& moments_m() const { return m_; }
  const std::vector<Tensor>& moments_v() const { return v_; }
  const WarmupSchedule& schedule() const { return schedule_; }

  /// Restores optimizer state from a checkpoint.
  void restore(std::vector<Tensor> m, std::vector<Tensor> v, std::size_t step) {
    m_ = std::move(m);
    v_ = std::move(v);
    step_ = step;
  }

 private:
  WarmupSchedule schedule_;
  double beta1_, beta2_, eps_;
  std::vector<Tensor> m_, v_;
  std::size_t step_ = 0;
};

}  // namespace unlead

#endif  // UNLEAD_OPTIM_HPP
