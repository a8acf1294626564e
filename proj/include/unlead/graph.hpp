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

#ifndef UNLEAD_GRAPH_HPP
#define UNLEAD_GRAPH_HPP

#include <cmath>
#include <cstddef>
#include <functional>
#include <memory>
#include <utility>
#include <vector>

#include "unlead/errors.hpp"
#include "unlead/tensor.hpp"

namespace unlead {

/// Reverse-mode gradient tape over 2-D float64 tensors.
///
/// A Graph records one forward computation; backward() replays it in reverse
/// and accumulates gradients. Nodes bound with param() push their gradient
/// into the external tensor's grad buffer, so parameters can be shared by
/// many subgraphs (e.g. every document in a batch) and receive the summed
/// gradient. A graph supports a single backward pass.
class Graph {
 public:
  using NodeId = std::size_t;

  /// Constant leaf. No gradient is propagated out of it.
  NodeId input(Tensor v) {
    nodes_.push_back(Node{std::move(v), nullptr, nullptr});
    return nodes_.size() - 1;
  }

  /// Trainable leaf bound to an external tensor. backward() accumulates the
  /// node gradient into p.grad.
  NodeId param(Tensor& p) {
    Tensor copy = p;
    copy.grad.clear();
    nodes_.push_back(Node{std::move(copy), &p, nullptr});
    NodeId id = nodes_.size() - 1;
    nodes_[id].back = [id](Graph& g) {
      Node& n = g.nodes_[id];
      n.bound->ensure_grad();
      for (std::size_t i = 0; i < n.t.grad.size(); ++i) n.bound->grad[i] += n.t.grad[i];
    };
    return id;
  }

  const Tensor& value(NodeId id) const { return nodes_[id].t; }

  double scalar(NodeId id) const {
    const Tensor& t = nodes_[id].t;
    if (t.numel() != 1) throw Error("graph: node is not a scalar");
    return t.values[0];
  }

  /// C = A * B
  NodeId matmul(NodeId a, NodeId b) {
    const Tensor& ta = nodes_[a].t;
    const Tensor& tb = nodes_[b].t;
    if (ta.cols() != tb.rows()) throw Error("graph: matmul shape mismatch");
    Tensor out = Tensor::zeros({ta.rows(), tb.cols()});
    out.mat().noalias() = ta.mat() * tb.mat();
    return emit(std::move(out), [a, b](Graph& g, NodeId self) {
      Node& na = g.nodes_[a];
      Node& nb = g.nodes_[b];
      Node& no = g.nodes_[self];
      na.t.gmat().noalias() += no.t.gmat() * nb.t.mat().transpose();
      nb.t.gmat().noalias() += na.t.mat().transpose() * no.t.gmat();
    });
  }

  NodeId transpose(NodeId a) {
    const Tensor& ta = nodes_[a].t;
    Tensor out = Tensor::zeros({ta.cols(), ta.rows()});
    out.mat() = ta.mat().transpose();
    return emit(std::move(out), [a](Graph& g, NodeId self) {
      g.nodes_[a].t.gmat() += g.nodes_[self].t.gmat().transpose();
    });
  }

  NodeId add(NodeId a, NodeId b) {
    const Tensor& ta = nodes_[a].t;
    const Tensor& tb = nodes_[b].t;
    if (!ta.same_shape(tb)) throw Error("graph: add shape mismatch");
    Tensor out = ta;
    out.grad.clear();
    out.mat() += tb.mat();
    return emit(std::move(out), [a, b](Graph& g, NodeId self) {
      g.nodes_[a].t.gmat() += g.nodes_[self].t.gmat();
      g.nodes_[b].t.gmat() += g.nodes_[self].t.gmat();
    });
  }

  /// A (r x c) plus a 1 x c row vector broadcast over rows.
  NodeId add_row(NodeId a, NodeId row) {
    const Tensor& ta = nodes_[a].t;
    const Tensor& tr = nodes_[row].t;
    if (tr.rows() != 1 || tr.cols() != ta.cols()) throw Error("graph: add_row shape mismatch");
    Tensor out = ta;
    out.grad.clear();
    out.mat().rowwise() += tr.mat().row(0);
    return emit(std::move(out), [a, row](Graph& g, NodeId self) {
      g.nodes_[a].t.gmat() += g.nodes_[self].t.gmat();
      g.nodes_[row].t.gmat().row(0) += g.nodes_[self].t.gmat().colwise().sum();
    });
  }

  NodeId scale(NodeId a, double c) {
    Tensor out = nodes_[a].t;
    out.grad.clear();
    out.mat() *= c;
    return emit(std::move(out), [a, c](Graph& g, NodeId self) {
      g.nodes_[a].t.gmat() += c * g.nodes_[self].t.gmat();
    });
  }

  NodeId relu(NodeId a) {
    Tensor out = nodes_[a].t;
    out.grad.clear();
    for (double& v : out.values) v = v > 0.0 ? v : 0.0;
    return emit(std::move(out), [a](Graph& g, NodeId self) {
      Node& na = g.nodes_[a];
      Node& no = g.nodes_[self];
      na.t.ensure_grad();
      for (std::size_t i = 0; i < na.t.values.size(); ++i)
        if (na.t.values[i] > 0.0) na.t.grad[i] += no.t.grad[i];
    });
  }

  NodeId sigmoid(NodeId a) {
    Tensor out = nodes_[a].t;
    out.grad.clear();
    for (double& v : out.values) v = 1.0 / (1.0 + std::exp(-v));
    return emit(std::move(out), [a](Graph& g, NodeId self) {
      Node& na = g.nodes_[a];
      Node& no = g.nodes_[self];
      na.t.ensure_grad();
      for (std::size_t i = 0; i < na.t.values.size(); ++i) {
        const double y = no.t.values[i];
        na.t.grad[i] += no.t.grad[i] * y * (1.0 - y);
      }
    });
  }

  /// Row-wise softmax with max subtraction.
  NodeId softmax_rows(NodeId a) {
    Tensor out = nodes_[a].t;
    out.grad.clear();
    const std::size_t r = out.rows(), c = out.cols();
    for (std::size_t i = 0; i < r; ++i) {
      double mx = out.values[i * c];
      for (std::size_t j = 1; j < c; ++j) mx = std::max(mx, out.values[i * c + j]);
      double sum = 0.0;
      for (std::size_t j = 0; j < c; ++j) {
        double e = std::exp(out.values[i * c + j] - mx);
        out.values[i * c + j] = e;
        sum += e;
      }
      for (std::size_t j = 0; j < c; ++j) out.values[i * c + j] /= sum;
    }
    return emit(std::move(out), [a](Graph& g, NodeId self) {
      Node& na = g.nodes_[a];
      Node& no = g.nodes_[self];
      na.t.ensure_grad();
      const std::size_t r = no.t.rows(), c = no.t.cols();
      for (std::size_t i = 0; i < r; ++i) {
        double dot = 0.0;
        for (std::size_t j = 0; j < c; ++j)
          dot += no.t.grad[i * c + j] * no.t.values[i * c + j];
        for (std::size_t j = 0; j < c; ++j)
          na.t.grad[i * c + j] +=
              (no.t.grad[i * c + j] - dot) * no.t.values[i * c + j];
      }
    });
  }

  /// Row-wise layer normalization with learnable gain and bias (1 x c each).
  NodeId layer_norm_rows(NodeId a, NodeId gain, NodeId bias, double eps = 1e-5) {
    const Tensor& ta = nodes_[a].t;
    const Tensor& tg = nodes_[gain].t;
    const Tensor& tb = nodes_[bias].t;
    const std::size_t r = ta.rows(), c = ta.cols();
    if (tg.numel() != c || tb.numel() != c) throw Error("graph: layer_norm shape mismatch");
    auto xhat = std::make_shared<Tensor>(Tensor::zeros({r, c}));
    auto inv_std = std::make_shared<std::vector<double>>(r);
    Tensor out = Tensor::zeros({r, c});
    for (std::size_t i = 0; i < r; ++i) {
      double mean = 0.0;
      for (std::size_t j = 0; j < c; ++j) mean += ta.values[i * c + j];
      mean /= static_cast<double>(c);
      double var = 0.0;
      for (std::size_t j = 0; j < c; ++j) {
        const double d = ta.values[i * c + j] - mean;
        var += d * d;
      }
      var /= static_cast<double>(c);
      const double is = 1.0 / std::sqrt(var + eps);
      (*inv_std)[i] = is;
      for (std::size_t j = 0; j < c; ++j) {
        const double xh = (ta.values[i * c + j] - mean) * is;
        xhat->values[i * c + j] = xh;
        out.values[i * c + j] = tg.values[j] * xh + tb.values[j];
      }
    }
    return emit(std::move(out), [a, gain, bias, xhat, inv_std](Graph& g, NodeId self) {
      Node& na = g.nodes_[a];
      Node& ng = g.nodes_[gain];
      Node& nb = g.nodes_[bias];
      Node& no = g.nodes_[self];
      na.t.ensure_grad();
      ng.t.ensure_grad();
      nb.t.ensure_grad();
      const std::size_t r = no.t.rows(), c = no.t.cols();
      for (std::size_t i = 0; i < r; ++i) {
        double mean_dxh = 0.0, mean_dxh_xh = 0.0;
        for (std::size_t j = 0; j < c; ++j) {
          const double dy = no.t.grad[i * c + j];
          const double xh = xhat->values[i * c + j];
          ng.t.grad[j] += dy * xh;
          nb.t.grad[j] += dy;
          const double dxh = dy * ng.t.values[j];
          mean_dxh += dxh;
          mean_dxh_xh += dxh * xh;
        }
        mean_dxh /= static_cast<double>(c);
        mean_dxh_xh /= static_cast<double>(c);
        const double is = (*inv_std)[i];
        for (std::size_t j = 0; j < c; ++j) {
          const double dxh = no.t.grad[i * c + j] * ng.t.values[j];
          const double xh = xhat->values[i * c + j];
          na.t.grad[i * c + j] += is * (dxh - mean_dxh - xh * mean_dxh_xh);
        }
      }
    });
  }

  NodeId slice_cols(NodeId a, std::size_t c0, std::size_t w) {
    const Tensor& ta = nodes_[a].t;
    if (c0 + w > ta.cols()) throw Error("graph: slice_cols out of range");
    Tensor out = Tensor::zeros({ta.rows(), w});
    out.mat() = ta.mat().middleCols(static_cast<Eigen::Index>(c0), static_cast<Eigen::Index>(w));
    return emit(std::move(out), [a, c0, w](Graph& g, NodeId self) {
      g.nodes_[a].t.gmat().middleCols(static_cast<Eigen::Index>(c0),
                                      static_cast<Eigen::Index>(w)) +=
          g.nodes_[self].t.gmat();
    });
  }

  NodeId concat_cols(const std::vector<NodeId>& parts) {
    if (parts.empty()) throw Error("graph: concat_cols with no inputs");
    const std::size_t r = nodes_[parts[0]].t.rows();
    std::size_t total = 0;
    for (NodeId p : parts) {
      if (nodes_[p].t.rows() != r) throw Error("graph: concat_cols row mismatch");
      total += nodes_[p].t.cols();
    }
    Tensor out = Tensor::zeros({r, total});
    std::size_t off = 0;
    for (NodeId p : parts) {
      const std::size_t w = nodes_[p].t.cols();
      out.mat().middleCols(static_cast<Eigen::Index>(off), static_cast<Eigen::Index>(w)) =
          nodes_[p].t.mat();
      off += w;
    }
    auto parts_copy = parts;
    return emit(std::move(out), [parts_copy](Graph& g, NodeId self) {
      std::size_t off = 0;
      for (NodeId p : parts_copy) {
        const std::size_t w = g.nodes_[p].t.cols();
        g.nodes_[p].t.gmat() += g.nodes_[self].t.gmat().middleCols(
            static_cast<Eigen::Index>(off), static_cast<Eigen::Index>(w));
        off += w;
      }
    });
  }

  /// Sum of all elements, as a 1x1 scalar.
  NodeId sum(NodeId a) {
    Tensor out = Tensor::zeros({1, 1});
    out.values[0] = nodes_[a].t.mat().sum();
    return emit(std::move(out), [a](Graph& g, NodeId self) {
      Node& na = g.nodes_[a];
      na.t.ensure_grad();
      const double gv = g.nodes_[self].t.grad[0];
      for (double& d : na.t.grad) d += gv;
    });
  }

  /// Mean binary cross-entropy of a k x 1 score column against 0/1 labels,
  /// with scores clamped to [eps, 1-eps] inside the logs. Clamped entries
  /// receive zero gradient.
  NodeId mean_bce(NodeId alpha, const std::vector<int>& labels, double eps) {
    const Tensor& ta = nodes_[alpha].t;
    const std::size_t k = ta.rows();
    if (ta.cols() != 1) throw Error("graph: mean_bce expects a column");
    if (labels.size() != k) throw Error("mean_bce: label count does not match scores");
    double loss = 0.0;
    for (std::size_t i = 0; i < k; ++i) {
      const double a = std::min(std::max(ta.values[i], eps), 1.0 - eps);
      loss -= labels[i] ? std::log(a) : std::log(1.0 - a);
    }
    Tensor out = Tensor::zeros({1, 1});
    out.values[0] = loss / static_cast<double>(k);
    auto y = labels;
    return emit(std::move(out), [alpha, y, eps](Graph& g, NodeId self) {
      Node& na = g.nodes_[alpha];
      na.t.ensure_grad();
      const std::size_t k = na.t.rows();
      const double gv = g.nodes_[self].t.grad[0] / static_cast<double>(k);
      for (std::size_t i = 0; i < k; ++i) {
        const double a = na.t.values[i];
        if (a <= eps || a >= 1.0 - eps) continue;
        na.t.grad[i] += gv * (y[i] ? -1.0 / a : 1.0 / (1.0 - a));
      }
    });
  }

  /// Mean over rows of -log(probs[i, pick[i]]), probabilities clamped from
  /// below by eps inside the log.
  NodeId mean_pick_nll(NodeId probs, const std::vector<std::size_t>& pick, double eps) {
    const Tensor& tp = nodes_[probs].t;
    const std::size_t k = tp.rows(), m = tp.cols();
    if (pick.size() != k) throw Error("mean_pick_nll: index count does not match rows");
    double loss = 0.0;
    for (std::size_t i = 0; i < k; ++i) {
      if (pick[i] >= m) throw Error("mean_pick_nll: index out of range");
      loss -= std::log(std::max(tp.values[i * m + pick[i]], eps));
    }
    Tensor out = Tensor::zeros({1, 1});
    out.values[0] = loss / static_cast<double>(k);
    auto idx = pick;
    return emit(std::move(out), [probs, idx, eps](Graph& g, NodeId self) {
      Node& np = g.nodes_[probs];
      np.t.ensure_grad();
      const std::size_t k = np.t.rows(), m = np.t.cols();
      const double gv = g.nodes_[self].t.grad[0] / static_cast<double>(k);
      for (std::size_t i = 0; i < k; ++i) {
        const double p = np.t.values[i * m + idx[i]];
        if (p <= eps) continue;
        np.t.grad[i * m + idx[i]] -= gv / p;
      }
    });
  }

  /// Mean over rows of the cross-entropy against the uniform distribution:
  /// (1/k) sum_i (1/M) sum_j -log(probs[i,j]), clamped from below by eps.
  NodeId mean_uniform_nll(NodeId probs, double eps) {
    const Tensor& tp = nodes_[probs].t;
    const std::size_t k = tp.rows(), m = tp.cols();
    double loss = 0.0;
    for (std::size_t i = 0; i < k * m; ++i) loss -= std::log(std::max(tp.values[i], eps));
    Tensor out = Tensor::zeros({1, 1});
    out.values[0] = loss / static_cast<double>(k * m);
    return emit(std::move(out), [probs, eps](Graph& g, NodeId self) {
      Node& np = g.nodes_[probs];
      np.t.ensure_grad();
      const std::size_t n = np.t.values.size();
      const double gv = g.nodes_[self].t.grad[0] / static_cast<double>(n);
      for (std::size_t i = 0; i < n; ++i) {
        const double p = np.t.values[i];
        if (p <= eps) continue;
        np.t.grad[i] -= gv / p;
      }
    });
  }

  /// ca * a + cb * b for scalar nodes.
  NodeId combine2(double ca, NodeId a, double cb, NodeId b) {
    Tensor out = Tensor::zeros({1, 1});
    out.values[0] = ca * scalar(a) + cb * scalar(b);
    return emit(std::move(out), [ca, a, cb, b](Graph& g, NodeId self) {
      const double gv = g.nodes_[self].t.grad[0];
      g.nodes_[a].t.ensure_grad();
      g.nodes_[b].t.ensure_grad();
      g.nodes_[a].t.grad[0] += ca * gv;
      g.nodes_[b].t.grad[0] += cb * gv;
    });
  }

  /// Arithmetic mean of scalar nodes.
  NodeId mean_scalars(const std::vector<NodeId>& xs) {
    if (xs.empty()) throw Error("graph: mean_scalars with no inputs");
    Tensor out = Tensor::zeros({1, 1});
    for (NodeId x : xs) out.values[0] += scalar(x);
    out.values[0] /= static_cast<double>(xs.size());
    auto ids = xs;
    return emit(std::move(out), [ids](Graph& g, NodeId self) {
      const double gv = g.nodes_[self].t.grad[0] / static_cast<double>(ids.size());
      for (NodeId x : ids) {
        g.nodes_[x].t.ensure_grad();
        g.nodes_[x].t.grad[0] += gv;
      }
    });
  }

  /// Runs reverse-mode accumulation from a scalar loss node. Gradients of
  /// param-bound leaves are added to their external grad buffers; parameters
  /// that did not participate are left untouched.
  void backward(NodeId loss) {
    if (nodes_[loss].t.numel() != 1) throw Error("graph: backward requires a scalar loss");
    if (!std::isfinite(nodes_[loss].t.values[0]))
      throw Error("graph: loss is not finite");
    for (std::size_t i = 0; i <= loss; ++i) nodes_[i].t.ensure_grad();
    nodes_[loss].t.grad[0] = 1.0;
    for (std::size_t i = loss + 1; i-- > 0;) {
      if (nodes_[i].back) nodes_[i].back(*this);
    }
  }

  std::size_t size() const { return nodes_.size(); }

 private:
  struct Node {
    Tensor t;
    Tensor* bound;
    std::function<void(Graph&)> back;
  };

  template <typename F>
  NodeId emit(Tensor out, F&& fn) {
    nodes_.push_back(Node{std::move(out), nullptr, nullptr});
    NodeId id = nodes_.size() - 1;
    nodes_[id].back = [id, f = std::forward<F>(fn)](Graph& g) { f(g, id); };
    return id;
  }

  std::vector<Node> nodes_;
};

}  // namespace unlead

#endif  // UNLEAD_GRAPH_HPP
