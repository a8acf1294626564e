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

#ifndef UNLEAD_MODEL_HPP
#define UNLEAD_MODEL_HPP

#include <cmath>
#include <cstdint>
#include <string>
#include <vector>

#include "unlead/errors.hpp"
#include "unlead/graph.hpp"
#include "unlead/rng.hpp"
#include "unlead/tensor.hpp"

namespace unlead {

/// What the encoder consumes: projected sentence embeddings plus positional
/// encodings, embeddings alone, or positional encodings alone.
enum class InputMode { SemPlusPos, SemOnly, PosOnly };

inline std::string to_string(InputMode m) {
  switch (m) {
    case InputMode::SemPlusPos: return "sem_plus_pos";
    case InputMode::SemOnly: return "sem_only";
    case InputMode::PosOnly: return "pos_only";
  }
  return "?";
}

inline InputMode input_mode_from_string(const std::string& s) {
  if (s == "sem_plus_pos") return InputMode::SemPlusPos;
  if (s == "sem_only") return InputMode::SemOnly;
  if (s == "pos_only") return InputMode::PosOnly;
  throw UsageError("unknown input_mode '" + s + "'");
}

struct EncoderConfig {
  std::size_t n_layers = 2;
  std::size_t n_heads = 2;
  std::size_t d_model = 64;
  std::size_t d_ff = 128;
  InputMode input_mode = InputMode::SemPlusPos;
  std::size_t max_len = 64;

  void validate() const {
    if (n_layers < 1 || n_heads < 1 || d_model < 1 || d_ff < 1 || max_len < 1)
      throw UsageError("encoder: all dimensions must be positive");
    if (d_model % n_heads != 0)
      throw UsageError("encoder: d_model must be divisible by n_heads");
  }
};

/// Contextualized sentence representations H (k x d_model).
struct EncodedDocument {
  Tensor h;
  std::size_t size() const { return h.rows(); }
};

/// An M-dimensional multinomial over position buckets.
struct PositionDistribution {
  std::vector<double> probs;

  static PositionDistribution uniform(std::size_t m) {
    PositionDistribution d;
    d.probs.assign(m, 1.0 / static_cast<double>(m));
    return d;
  }
};

/// Sinusoidal positional encoding: PE[i,2j] = sin(i / 10000^(2j/d)),
/// PE[i,2j+1] = cos of the same argument.
inline Tensor positional_encoding(std::size_t k, std::size_t d_model) {
  Tensor pe = Tensor::zeros({k, d_model});
  for (std::size_t i = 0; i < k; ++i) {
    for (std::size_t j = 0; 2 * j < d_model; ++j) {
      const double angle = static_cast<double>(i) /
                           std::pow(10000.0, (2.0 * static_cast<double>(j)) /
                                                 static_cast<double>(d_model));
      pe.at(i, 2 * j) = std::sin(angle);
      if (2 * j + 1 < d_model) pe.at(i, 2 * j + 1) = std::cos(angle);
    }
  }
  return pe;
}

struct EncoderLayerParams {
  Tensor ln1_g, ln1_b;
  Tensor wq, bq, wk, bk, wv, bv, wo, bo;
  Tensor ln2_g, ln2_b;
  Tensor ff_w1, ff_b1, ff_w2, ff_b2;

  template <typename F>
  void visit(const std::string& prefix, F&& f) {
    f(prefix + ".ln1.g", ln1_g);
    f(prefix + ".ln1.b", ln1_b);
    f(prefix + ".wq", wq);
    f(prefix + ".bq", bq);
    f(prefix + ".wk", wk);
    f(prefix + ".bk", bk);
    f(prefix + ".wv", wv);
    f(prefix + ".bv", bv);
    f(prefix + ".wo", wo);
    f(prefix + ".bo", bo);
    f(prefix + ".ln2.g", ln2_g);
    f(prefix + ".ln2.b", ln2_b);
    f(prefix + ".ff.w1", ff_w1);
    f(prefix + ".ff.b1", ff_b1);
    f(prefix + ".ff.w2", ff_w2);
    f(prefix + ".ff.b2", ff_b2);
  }
};

/// Encoder weights, the embedding-to-d_model projection and the scorer MLP.
struct SummarizerParams {
  Tensor proj_w, proj_b;
  std::vector<EncoderLayerParams> layers;
  Tensor lnf_g, lnf_b;
  Tensor sc_w1, sc_b1, sc_w2, sc_b2;

  template <typename F>
  void visit(F&& f) {
    f(std::string("proj.w"), proj_w);
    f(std::string("proj.b"), proj_b);
    for (std::size_t l = 0; l < layers.size(); ++l)
      layers[l].visit("enc." + std::to_string(l), f);
    f(std::string("enc.final_ln.g"), lnf_g);
    f(std::string("enc.final_ln.b"), lnf_b);
    f(std::string("scorer.w1"), sc_w1);
    f(std::string("scorer.b1"), sc_b1);
    f(std::string("scorer.w2"), sc_w2);
    f(std::string("scorer.b2"), sc_b2);
  }

  std::vector<Tensor*> tensors() {
    std::vector<Tensor*> out;
    visit([&](const std::string&, Tensor& t) { out.push_back(&t); });
    return out;
  }

  void zero_grad() {
    visit([](const std::string&, Tensor& t) { t.zero_grad(); });
  }

  bool finite() {
    bool ok = true;
    visit([&](const std::string&, Tensor& t) { ok = ok && t.finite(); });
    return ok;
  }
};

/// Position-prediction MLP: d_model -> hidden (ReLU) -> M (softmax).
struct AdversaryParams {
  Tensor w1, b1, w2, b2;

  template <typename F>
  void visit(F&& f) {
    f(std::string("adv.w1"), w1);
    f(std::string("adv.b1"), b1);
    f(std::string("adv.w2"), w2);
    f(std::string("adv.b2"), b2);
  }

  std::vector<Tensor*> tensors() {
    return {&w1, &b1, &w2, &b2};
  }

  void zero_grad() {
    visit([](const std::string&, Tensor& t) { t.zero_grad(); });
  }

  std::size_t bucket_count() const { return w2.cols(); }
};

namespace detail {

inline Tensor xavier(std::size_t fan_in, std::size_t fan_out, Rng& rng) {
  Tensor t = Tensor::zeros({fan_in, fan_out});
  const double limit = std::sqrt(6.0 / static_cast<double>(fan_in + fan_out));
  for (double& v : t.values) v = rng.uniform(-limit, limit);
  return t;
}

inline Tensor ones_row(std::size_t n) {
  Tensor t = Tensor::zeros({1, n});
  for (double& v : t.values) v = 1.0;
  return t;
}

}  // namespace detail

inline SummarizerParams init_summarizer(const EncoderConfig& cfg, std::size_t embed_dim,
                                        std::uint64_t seed) {
  cfg.validate();
  Rng rng(seed);
  SummarizerParams p;
  const std::size_t d = cfg.d_model;
  p.proj_w = detail::xavier(embed_dim, d, rng);
  p.proj_b = Tensor::zeros({1, d});
  p.layers.resize(cfg.n_layers);
  for (auto& l : p.layers) {
    l.ln1_g = detail::ones_row(d);
    l.ln1_b = Tensor::zeros({1, d});
    l.wq = detail::xavier(d, d, rng);
    l.bq = Tensor::zeros({1, d});
    l.wk = detail::xavier(d, d, rng);
    l.bk = Tensor::zeros({1, d});
    l.wv = detail::xavier(d, d, rng);
    l.bv = Tensor::zeros({1, d});
    l.wo = detail::xavier(d, d, rng);
    l.bo = Tensor::zeros({1, d});
    l.ln2_g = detail::ones_row(d);
    l.ln2_b = Tensor::zeros({1, d});
    l.ff_w1 = detail::xavier(d, cfg.d_ff, rng);
    l.ff_b1 = Tensor::zeros({1, cfg.d_ff});
    l.ff_w2 = detail::xavier(cfg.d_ff, d, rng);
    l.ff_b2 = Tensor::zeros({1, d});
  }
  p.lnf_g = detail::ones_row(d);
  p.lnf_b = Tensor::zeros({1, d});
  p.sc_w1 = detail::xavier(d, d, rng);
  p.sc_b1 = Tensor::zeros({1, d});
  p.sc_w2 = detail::xavier(d, 1, rng);
  p.sc_b2 = Tensor::zeros({1, 1});
  return p;
}

inline AdversaryParams init_adversary(std::size_t d_model, std::size_t hidden,
                                      std::size_t m_buckets, std::uint64_t seed) {
  if (m_buckets < 2) throw UsageError("adversary: bucket count must be at least 2");
  Rng rng(seed);
  AdversaryParams p;
  p.w1 = detail::xavier(d_model, hidden, rng);
  p.b1 = Tensor::zeros({1, hidden});
  p.w2 = detail::xavier(hidden, m_buckets, rng);
  p.b2 = Tensor::zeros({1, m_buckets});
  return p;
}

namespace detail {

/// Binds model tensors into a graph; trainable tensors become param leaves.
struct Binder {
  Graph& g;
  bool trainable;
  Graph::NodeId operator()(Tensor& t) const { return trainable ? g.param(t) : g.input(t); }
};

}  // namespace detail

/// Builds the encoder forward pass on the tape and returns the node holding
/// H (k x d_model). Pre-norm blocks, bidirectional attention, final norm.
inline Graph::NodeId encode_node(Graph& g, SummarizerParams& p, const EncoderConfig& cfg,
                                 const Tensor& x, bool trainable) {
  const std::size_t k = x.rows();
  if (k > cfg.max_len) throw DataError("encode: document has more sentences than max_len");
  if (k == 0) throw DataError("encode: empty document");
  detail::Binder bind{g, trainable};

  Graph::NodeId h;
  const Tensor pe = positional_encoding(k, cfg.d_model);
  if (cfg.input_mode == InputMode::PosOnly) {
    h = g.input(pe);
  } else {
    Graph::NodeId xi = g.input(x);
    Graph::NodeId proj = g.add_row(g.matmul(xi, bind(p.proj_w)), bind(p.proj_b));
    h = cfg.input_mode == InputMode::SemOnly ? proj : g.add(proj, g.input(pe));
  }

  const std::size_t d = cfg.d_model;
  const std::size_t dh = d / cfg.n_heads;
  const double att_scale = 1.0 / std::sqrt(static_cast<double>(dh));

  for (auto& l : p.layers) {
    Graph::NodeId u = g.layer_norm_rows(h, bind(l.ln1_g), bind(l.ln1_b));
    Graph::NodeId q = g.add_row(g.matmul(u, bind(l.wq)), bind(l.bq));
    Graph::NodeId kk = g.add_row(g.matmul(u, bind(l.wk)), bind(l.bk));
    Graph::NodeId v = g.add_row(g.matmul(u, bind(l.wv)), bind(l.bv));
    std::vector<Graph::NodeId> heads;
    heads.reserve(cfg.n_heads);
    for (std::size_t hd = 0; hd < cfg.n_heads; ++hd) {
      Graph::NodeId qh = g.slice_cols(q, hd * dh, dh);
      Graph::NodeId kh = g.slice_cols(kk, hd * dh, dh);
      Graph::NodeId vh = g.slice_cols(v, hd * dh, dh);
      Graph::NodeId att = g.softmax_rows(g.scale(g.matmul(qh, g.transpose(kh)), att_scale));
      heads.push_back(g.matmul(att, vh));
    }
    Graph::NodeId merged = cfg.n_heads == 1 ? heads[0] : g.concat_cols(heads);
    Graph::NodeId att_out = g.add_row(g.matmul(merged, bind(l.wo)), bind(l.bo));
    h = g.add(h, att_out);

    Graph::NodeId u2 = g.layer_norm_rows(h, bind(l.ln2_g), bind(l.ln2_b));
    Graph::NodeId f1 = g.relu(g.add_row(g.matmul(u2, bind(l.ff_w1)), bind(l.ff_b1)));
    Graph::NodeId f2 = g.add_row(g.matmul(f1, bind(l.ff_w2)), bind(l.ff_b2));
    h = g.add(h, f2);
  }
  return g.layer_norm_rows(h, bind(p.lnf_g), bind(p.lnf_b));
}

/// Scorer head on top of H: sentence scores alpha as a k x 1 column in (0,1).
inline Graph::NodeId score_node(Graph& g, SummarizerParams& p, Graph::NodeId h,
                                bool trainable) {
  detail::Binder bind{g, trainable};
  Graph::NodeId hid = g.relu(g.add_row(g.matmul(h, bind(p.sc_w1)), bind(p.sc_b1)));
  return g.sigmoid(g.add_row(g.matmul(hid, bind(p.sc_w2)), bind(p.sc_b2)));
}

/// Adversary head on top of H: per-sentence position distributions (k x M).
inline Graph::NodeId adversary_node(Graph& g, AdversaryParams& p, Graph::NodeId h,
                                    bool trainable) {
  detail::Binder bind{g, trainable};
  Graph::NodeId hid = g.relu(g.add_row(g.matmul(h, bind(p.w1)), bind(p.b1)));
  return g.softmax_rows(g.add_row(g.matmul(hid, bind(p.w2)), bind(p.b2)));
}

/// Forward-only encoder run.
inline EncodedDocument encode(const SummarizerParams& params, const EncoderConfig& cfg,
                              const Tensor& x) {
  Graph g;
  auto& p = const_cast<SummarizerParams&>(params);  // bound read-only via input leaves
  Graph::NodeId h = encode_node(g, p, cfg, x, /*trainable=*/false);
  return EncodedDocument{g.value(h)};
}

/// Forward-only scorer run.
inline std::vector<double> score(const SummarizerParams& params, const EncodedDocument& doc) {
  Graph g;
  auto& p = const_cast<SummarizerParams&>(params);
  Graph::NodeId h = g.input(doc.h);
  Graph::NodeId a = score_node(g, p, h, /*trainable=*/false);
  const Tensor& t = g.value(a);
  return std::vector<double>(t.values.begin(), t.values.end());
}

/// Splits a k x M tensor into per-row distributions.
inline std::vector<PositionDistribution> distributions_from_tensor(const Tensor& t) {
  std::vector<PositionDistribution> dists(t.rows());
  for (std::size_t i = 0; i < t.rows(); ++i)
    dists[i].probs.assign(t.values.begin() + static_cast<std::ptrdiff_t>(i * t.cols()),
                          t.values.begin() + static_cast<std::ptrdiff_t>((i + 1) * t.cols()));
  return dists;
}

/// Forward-only adversary run.
inline std::vector<PositionDistribution> adversary_forward(const AdversaryParams& adv,
                                                           const EncodedDocument& doc) {
  Graph g;
  auto& p = const_cast<AdversaryParams&>(adv);
  Graph::NodeId h = g.input(doc.h);
  Graph::NodeId out = adversary_node(g, p, h, /*trainable=*/false);
  return distributions_from_tensor(g.value(out));
}

}  // namespace unlead

#endif  // UNLEAD_MODEL_HPP
