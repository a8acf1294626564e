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

#ifndef UNLEAD_SELECTION_HPP
#define UNLEAD_SELECTION_HPP

#include <algorithm>
#include <cstddef>
#include <numeric>
#include <vector>

#include "unlead/corpus.hpp"
#include "unlead/errors.hpp"

namespace unlead {

/// Indices of the min(k_select, k) largest scores, ties toward the smaller
/// index, returned in document order.
inline std::vector<std::size_t> select_summary(const std::vector<double>& alpha,
                                               std::size_t k_select) {
  if (k_select == 0) throw Error("select_summary: k_select must be positive");
  const std::size_t k = alpha.size();
  std::vector<std::size_t> order(k);
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t b) { return alpha[a] > alpha[b]; });
  order.resize(std::min(k_select, k));
  std::sort(order.begin(), order.end());
  return order;
}

inline std::vector<std::size_t> lead_baseline(const Document& doc, std::size_t k_select) {
  std::vector<std::size_t> out(std::min(k_select, doc.k()));
  std::iota(out.begin(), out.end(), 0);
  return out;
}

/// Concatenates the selected sentences in document order.
inline Sentence assemble_summary(const Document& doc, const std::vector<std::size_t>& indices) {
  std::vector<std::size_t> ordered = indices;
  std::sort(ordered.begin(), ordered.end());
  Sentence out;
  for (std::size_t i : ordered) {
    if (i >= doc.k()) throw Error("assemble_summary: index out of range");
    out.insert(out.end(), doc.sentences[i].begin(), doc.sentences[i].end());
  }
  return out;
}

}  // namespace unlead

#endif  // UNLEAD_SELECTION_HPP
