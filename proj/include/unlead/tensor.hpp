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

#ifndef UNLEAD_TENSOR_HPP
#define UNLEAD_TENSOR_HPP

#include <Eigen/Core>
#include <cmath>
#include <cstddef>
#include <initializer_list>
#include <vector>

#include "unlead/errors.hpp"

namespace unlead {

using Mat = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
using MatMap = Eigen::Map<Mat>;
using CMatMap = Eigen::Map<const Mat>;

/// Dense float64 tensor in row-major order with an optional gradient buffer
/// of the same size. The library only ever uses ranks 1 and 2; a rank-1
/// tensor behaves as a column of length shape[0].
struct Tensor {
  std::vector<std::size_t> shape;
  std::vector<double> values;
  std::vector<double> grad;  // empty until a gradient is requested

  Tensor() = default;

  static Tensor zeros(std::vector<std::size_t> shp) {
    Tensor t;
    t.shape = std::move(shp);
    t.values.assign(t.numel(), 0.0);
    return t;
  }

  static Tensor from(std::vector<std::size_t> shp, std::vector<double> vals) {
    Tensor t;
    t.shape = std::move(shp);
    t.values = std::move(vals);
    if (t.values.size() != t.numel()) throw Error("tensor: values do not match shape");
    return t;
  }

  std::size_t numel() const {
    std::size_t n = 1;
    for (std::size_t d : shape) n *= d;
    return shape.empty() ? 0 : n;
  }

  std::size_t rows() const { return shape.empty() ? 0 : shape[0]; }
  std::size_t cols() const { return shape.size() > 1 ? shape[1] : 1; }

  double& at(std::size_t r, std::size_t c) { return values[r * cols() + c]; }
  double at(std::size_t r, std::size_t c) const { return values[r * cols() + c]; }

  MatMap mat() {
    return MatMap(values.data(), static_cast<Eigen::Index>(rows()),
                  static_cast<Eigen::Index>(cols()));
  }
  CMatMap mat() const {
    return CMatMap(values.data(), static_cast<Eigen::Index>(rows()),
                   static_cast<Eigen::Index>(cols()));
  }

  void ensure_grad() {
    if (grad.size() != values.size()) grad.assign(values.size(), 0.0);
  }
  void zero_grad() {
    if (!grad.empty()) grad.assign(values.size(), 0.0);
  }
  MatMap gmat() {
    ensure_grad();
    return MatMap(grad.data(), static_cast<Eigen::Index>(rows()),
                  static_cast<Eigen::Index>(cols()));
  }

  bool finite() const {
    for (double v : values)
      if (!std::isfinite(v)) return false;
    return true;
  }

  bool same_shape(const Tensor& o) const { return shape == o.shape; }
};

}  // namespace unlead

#endif  // UNLEAD_TENSOR_HPP
