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

#ifndef UNLEAD_LOSSES_HPP
#define UNLEAD_LOSSES_HPP

#include <algorithm>
#include <cmath>
#include <vector>

#include "unlead/errors.hpp"
#include "unlead/model.hpp"

namespace unlead {

/// All losses are non-negative and minimized. The adversarial loss uses the
/// uniform distribution as the target: driving the frozen adversary's output
/// toward U_M is the surrogate for maximizing its position-prediction loss.

/// Mean binary cross-entropy of sentence scores against 0/1 labels.
inline double loss_summarization(const std::vector<double>& alpha,
                                 const std::vector<int>& labels,
                                 double clamp_eps = 1e-9) {
  if (alpha.size() != labels.size())
    throw Error("loss_summarization: score/label length mismatch");
  if (alpha.empty()) throw Error("loss_summarization: empty input");
  double loss = 0.0;
  for (std::size_t i = 0; i < alpha.size(); ++i) {
    const double a = std::clamp(alpha[i], clamp_eps, 1.0 - clamp_eps);
    loss -= labels[i] ? std::log(a) : std::log(1.0 - a);
  }
  return loss / static_cast<double>(alpha.size());
}

/// Mean cross-entropy of predicted position distributions against the true
/// bucket indices.
inline double loss_position(const std::vector<PositionDistribution>& preds,
                            const std::vector<std::size_t>& buckets,
                            double clamp_eps = 1e-9) {
  if (preds.size() != buckets.size())
    throw Error("loss_position: prediction/bucket length mismatch");
  if (preds.empty()) throw Error("loss_position: empty input");
  double loss = 0.0;
  for (std::size_t i = 0; i < preds.size(); ++i) {
    if (buckets[i] >= preds[i].probs.size())
      throw Error("loss_position: bucket index out of range");
    loss -= std::log(std::max(preds[i].probs[buckets[i]], clamp_eps));
  }
  return loss / static_cast<double>(preds.size());
}

/// Mean cross-entropy of predicted position distributions against U_M.
/// Attains its minimum ln(M) exactly when every prediction is uniform.
inline double loss_adversarial(const std::vector<PositionDistribution>& preds,
                               double clamp_eps = 1e-9) {
  if (preds.empty()) throw Error("loss_adversarial: empty input");
  double loss = 0.0;
  for (const auto& p : preds) {
    const double m = static_cast<double>(p.probs.size());
    double s = 0.0;
    for (double q : p.probs) s -= std::log(std::max(q, clamp_eps));
    loss += s / m;
  }
  return loss / static_cast<double>(preds.size());
}

/// L3 = beta * L1 + (1 - beta) * L_adv.
inline double loss_combined(double l1, double l_adv, double beta) {
  if (beta < 0.0 || beta > 1.0) throw Error("loss_combined: beta outside [0,1]");
  return beta * l1 + (1.0 - beta) * l_adv;
}

}  // namespace unlead

#endif  // UNLEAD_LOSSES_HPP
