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

#ifndef UNLEAD_ROUGE_HPP
#define UNLEAD_ROUGE_HPP

#include <algorithm>
#include <map>
#include <string>
#include <vector>

namespace unlead {

struct RougeScore {
  double r1 = 0.0;
  double r2 = 0.0;
  double rl = 0.0;

  double mean() const { return (r1 + r2 + rl) / 3.0; }
};

namespace detail {

inline double f1(double overlap, double cand_total, double ref_total) {
  if (cand_total <= 0.0 || ref_total <= 0.0) return 0.0;
  const double p = overlap / cand_total;
  const double r = overlap / ref_total;
  if (p + r <= 0.0) return 0.0;
  return 2.0 * p * r / (p + r);
}

inline std::map<std::vector<std::string>, std::size_t> ngram_counts(
    const std::vector<std::string>& tokens, std::size_t n) {
  std::map<std::vector<std::string>, std::size_t> counts;
  if (tokens.size() < n) return counts;
  for (std::size_t i = 0; i + n <= tokens.size(); ++i) {
    std::vector<std::string> gram(tokens.begin() + static_cast<std::ptrdiff_t>(i),
                                  tokens.begin() + static_cast<std::ptrdiff_t>(i + n));
    ++counts[std::move(gram)];
  }
  return counts;
}

}  // namespace detail

/// ROUGE-N F1 with clipped n-gram counts; no stemming or stopword removal.
inline double rouge_n(const std::vector<std::string>& candidate,
                      const std::vector<std::string>& reference, std::size_t n) {
  const auto cand = detail::ngram_counts(candidate, n);
  const auto ref = detail::ngram_counts(reference, n);
  double overlap = 0.0, cand_total = 0.0, ref_total = 0.0;
  for (const auto& [g, c] : cand) cand_total += static_cast<double>(c);
  for (const auto& [g, c] : ref) ref_total += static_cast<double>(c);
  for (const auto& [g, c] : cand) {
    auto it = ref.find(g);
    if (it != ref.end()) overlap += static_cast<double>(std::min(c, it->second));
  }
  return detail::f1(overlap, cand_total, ref_total);
}

/// ROUGE-L F1 from the token-level longest common subsequence.
inline double rouge_l(const std::vector<std::string>& candidate,
                      const std::vector<std::string>& reference) {
  const std::size_t nc = candidate.size(), nr = reference.size();
  if (nc == 0 || nr == 0) return 0.0;
  std::vector<std::size_t> prev(nr + 1, 0), cur(nr + 1, 0);
  for (std::size_t i = 1; i <= nc; ++i) {
    for (std::size_t j = 1; j <= nr; ++j) {
      if (candidate[i - 1] == reference[j - 1])
        cur[j] = prev[j - 1] + 1;
      else
        cur[j] = std::max(prev[j], cur[j - 1]);
    }
    std::swap(prev, cur);
  }
  const double lcs = static_cast<double>(prev[nr]);
  return detail::f1(lcs, static_cast<double>(nc), static_cast<double>(nr));
}

inline RougeScore rouge_all(const std::vector<std::string>& candidate,
                            const std::vector<std::string>& reference) {
  RougeScore s;
  s.r1 = rouge_n(candidate, reference, 1);
  s.r2 = rouge_n(candidate, reference, 2);
  s.rl = rouge_l(candidate, reference);
  return s;
}

}  // namespace unlead

#endif  // UNLEAD_ROUGE_HPP
