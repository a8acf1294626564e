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

#ifndef UNLEAD_TRAINING_HPP
#define UNLEAD_TRAINING_HPP

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <optional>
#include <string>
#include <vector>

#include "json.hpp"
#include "unlead/corpus.hpp"
#include "unlead/embeddings.hpp"
#include "unlead/errors.hpp"
#include "unlead/graph.hpp"
#include "unlead/losses.hpp"
#include "unlead/model.hpp"
#include "unlead/optim.hpp"
#include "unlead/rng.hpp"
#include "unlead/rouge.hpp"
#include "unlead/selection.hpp"

namespace unlead {

struct TrainingConfig {
  double beta = 0.9;
  std::size_t m_buckets = 10;
  std::size_t n_adversaries = 5;
  std::size_t pretrain_epochs = 6;
  std::size_t adv_epochs = 5;
  std::size_t debias_epochs = 1;
  std::size_t batch_size = 32;
  double base_lr = 2e-3;
  std::size_t warmup_steps = 50;
  std::uint64_t seed = 0;
  std::size_t k_select = 3;
  double prob_clamp = 1e-9;

  void validate() const {
    if (beta < 0.0 || beta > 1.0) throw DataError("training config: beta must be in [0,1]");
    if (m_buckets < 2) throw DataError("training config: M must be at least 2");
    if (n_adversaries < 1) throw DataError("training config: n_adversaries must be at least 1");
    if (batch_size == 0) throw DataError("training config: batch_size must be positive");
    if (base_lr <= 0.0) throw DataError("training config: base_lr must be positive");
    if (warmup_steps == 0) throw DataError("training config: warmup_steps must be positive");
    if (k_select == 0) throw DataError("training config: k_select must be positive");
    if (prob_clamp <= 0.0 || prob_clamp > 1e-3)
      throw DataError("training config: prob_clamp must be in (0, 1e-3]");
  }

  WarmupSchedule schedule() const { return WarmupSchedule{base_lr, warmup_steps}; }
};

struct LossReport {
  std::string phase;
  std::size_t epoch = 0;
  std::optional<double> l1, l2, l3, l_adv;
  std::optional<double> probe_acc;
  std::optional<double> val_rouge_mean;
};

inline nlohmann::json loss_report_json(const LossReport& r) {
  auto opt = [](const std::optional<double>& v) {
    return v ? nlohmann::json(*v) : nlohmann::json(nullptr);
  };
  return nlohmann::json{{"phase", r.phase},         {"epoch", r.epoch},
                        {"L1", opt(r.l1)},          {"L2", opt(r.l2)},
                        {"L3", opt(r.l3)},          {"L_adv", opt(r.l_adv)},
                        {"probe_acc", opt(r.probe_acc)},
                        {"val_rouge_mean", opt(r.val_rouge_mean)}};
}

inline void write_train_log(const std::vector<LossReport>& history,
                            const std::filesystem::path& path) {
  std::ofstream os(path);
  if (!os) throw DataError("train log: cannot write " + path.string());
  for (const auto& r : history) os << loss_report_json(r).dump() << '\n';
}

struct PreparedDoc {
  Tensor x;                          // k x embed_dim sentence embeddings
  std::vector<int> labels;           // k binary oracle labels
  std::vector<std::size_t> buckets;  // k true position buckets
};

struct TrainData {
  Corpus corpus;
  std::vector<PreparedDoc> docs;

  std::size_t size() const { return docs.size(); }
};

inline PreparedDoc prepare_document(const Document& doc, const VectorTable& table,
                                    std::size_t m_buckets) {
  if (!doc.has_labels()) throw DataError("prepare: document " + doc.id + " has no labels");
  PreparedDoc out;
  out.x = embed_document(table, doc);
  out.labels = doc.labels;
  out.buckets.resize(doc.k());
  for (std::size_t i = 0; i < doc.k(); ++i)
    out.buckets[i] = position_bucket(i, doc.k(), m_buckets);
  return out;
}

inline TrainData prepare_data(Corpus corpus, const VectorTable& table, std::size_t m_buckets) {
  TrainData data;
  data.docs.reserve(corpus.size());
  for (const auto& doc : corpus.documents)
    data.docs.push_back(prepare_document(doc, table, m_buckets));
  data.corpus = std::move(corpus);
  return data;
}

/// Forward-only sentence scores for one document.
inline std::vector<double> score_document(const SummarizerParams& params,
                                          const EncoderConfig& enc, const Tensor& x) {
  return score(params, encode(params, enc, x));
}

inline RougeScore document_rouge(const SummarizerParams& params, const EncoderConfig& enc,
                                 const Document& doc, const Tensor& x, std::size_t k_select) {
  const auto alpha = score_document(params, enc, x);
  const auto sel = select_summary(alpha, k_select);
  return rouge_all(assemble_summary(doc, sel), doc.summary_tokens());
}

/// Mean ROUGE-mean over a subset of documents (all documents when the subset
/// list is empty).
inline double validation_rouge_mean(const SummarizerParams& params, const EncoderConfig& enc,
                                    const TrainData& data, std::size_t k_select,
                                    const std::vector<std::size_t>* subset = nullptr) {
  std::vector<std::size_t> all;
  if (subset == nullptr || subset->empty()) {
    all.resize(data.size());
    std::iota(all.begin(), all.end(), 0);
    subset = &all;
  }
  double total = 0.0;
  for (std::size_t idx : *subset)
    total += document_rouge(params, enc, data.corpus.documents[idx], data.docs[idx].x, k_select)
                 .mean();
  return total / static_cast<double>(subset->size());
}

/// Validation documents resampled so the oracle-sentence bucket histogram is
/// close to uniform: walk a seeded permutation and accept a document only if
/// every bucket stays within a per-bucket cap set by the scarcest bucket's
/// total availability. Falls back to the full set when some bucket has no
/// oracle sentences anywhere.
inline std::vector<std::size_t> balanced_validation(const Corpus& corpus,
                                                    std::size_t m_buckets, std::uint64_t seed) {
  const std::size_t n = corpus.size();
  std::vector<std::vector<std::size_t>> doc_buckets(n);
  std::vector<std::size_t> avail(m_buckets, 0);
  for (std::size_t d = 0; d < n; ++d) {
    const Document& doc = corpus.documents[d];
    if (!doc.has_labels()) throw DataError("balanced_validation: unlabeled document " + doc.id);
    for (std::size_t i = 0; i < doc.k(); ++i)
      if (doc.labels[i] == 1) {
        const std::size_t b = position_bucket(i, doc.k(), m_buckets);
        doc_buckets[d].push_back(b);
        ++avail[b];
      }
  }
  const std::size_t cap = *std::min_element(avail.begin(), avail.end());
  std::vector<std::size_t> accepted;
  if (cap == 0) {
    accepted.resize(n);
    std::iota(accepted.begin(), accepted.end(), 0);
    return accepted;
  }
  Rng rng(derive_seed(seed, "balanced_validation"));
  std::vector<std::size_t> count(m_buckets, 0);
  for (std::size_t d : rng.permutation(n)) {
    std::vector<std::size_t> inc(m_buckets, 0);
    for (std::size_t b : doc_buckets[d]) ++inc[b];
    bool fits = true;
    for (std::size_t b = 0; b < m_buckets; ++b)
      if (count[b] + inc[b] > cap) {
        fits = false;
        break;
      }
    if (!fits) continue;
    for (std::size_t b = 0; b < m_buckets; ++b) count[b] += inc[b];
    accepted.push_back(d);
  }
  std::sort(accepted.begin(), accepted.end());
  return accepted;
}

struct EpochStats {
  double l1 = 0.0;
  double l2 = 0.0;
  double l3 = 0.0;
  double l_adv = 0.0;
  bool has_adv = false;
};

namespace detail {

/// One optimization epoch over shuffled mini-batches. Each batch builds one
/// tape holding a subgraph per document; the batch loss is the mean of the
/// per-document losses (equivalent to padding to the batch max with masked
/// positions). When an adversary is supplied the objective is
/// beta*L1 + (1-beta)*L_adv through the frozen adversary, otherwise pure L1.
inline EpochStats summarizer_epoch(SummarizerParams& params, const EncoderConfig& enc,
                                   const std::vector<PreparedDoc>& docs,
                                   const TrainingConfig& cfg, Adam& opt, Rng& order_rng,
                                   AdversaryParams* adversary, double beta) {
  const std::size_t n = docs.size();
  if (n == 0) throw DataError("train: empty corpus");
  EpochStats stats;
  stats.has_adv = adversary != nullptr;
  std::size_t batches = 0;
  double sum_l2 = 0.0;
  std::size_t l2_count = 0;
  const auto order = order_rng.permutation(n);
  const auto tensors = params.tensors();
  for (std::size_t start = 0; start < n; start += cfg.batch_size) {
    const std::size_t stop = std::min(n, start + cfg.batch_size);
    Graph g;
    std::vector<Graph::NodeId> l1s, ladvs;
    for (std::size_t pos = start; pos < stop; ++pos) {
      const PreparedDoc& doc = docs[order[pos]];
      Graph::NodeId h = encode_node(g, params, enc, doc.x, /*trainable=*/true);
      Graph::NodeId alpha = score_node(g, params, h, /*trainable=*/true);
      l1s.push_back(g.mean_bce(alpha, doc.labels, cfg.prob_clamp));
      if (adversary != nullptr) {
        Graph::NodeId preds = adversary_node(g, *adversary, h, /*trainable=*/false);
        ladvs.push_back(g.mean_uniform_nll(preds, cfg.prob_clamp));
        sum_l2 += loss_position(distributions_from_tensor(g.value(preds)), doc.buckets,
                                cfg.prob_clamp);
        ++l2_count;
      }
    }
    Graph::NodeId l1 = g.mean_scalars(l1s);
    Graph::NodeId loss = l1;
    Graph::NodeId ladv = l1;
    if (adversary != nullptr) {
      ladv = g.mean_scalars(ladvs);
      loss = g.combine2(beta, l1, 1.0 - beta, ladv);
    }
    params.zero_grad();
    g.backward(loss);
    opt.step(tensors);
    stats.l1 += g.value(l1).values[0];
    if (adversary != nullptr) stats.l_adv += g.value(ladv).values[0];
    ++batches;
  }
  stats.l1 /= static_cast<double>(batches);
  if (adversary != nullptr) {
    stats.l_adv /= static_cast<double>(batches);
    stats.l2 = sum_l2 / static_cast<double>(l2_count);
    stats.l3 = beta * stats.l1 + (1.0 - beta) * stats.l_adv;
  }
  return stats;
}

}  // namespace detail

struct PretrainResult {
  SummarizerParams best;
  double best_val_rouge = 0.0;
  std::size_t best_epoch = 0;  // 1-based; 0 when no epochs ran
  std::vector<LossReport> history;
};

/// Minimizes L1 over shuffled mini-batches; validation ROUGE-mean is recorded
/// each epoch (on the balanced subset) and the best epoch's parameters are
/// returned.
inline PretrainResult pretrain_summarizer(const SummarizerParams& params,
                                          const EncoderConfig& enc, const TrainData& train,
                                          const TrainData& valid, const TrainingConfig& cfg) {
  cfg.validate();
  PretrainResult out;
  out.best = params;
  if (cfg.pretrain_epochs == 0) return out;
  const auto balanced = balanced_validation(valid.corpus, cfg.m_buckets, cfg.seed);
  SummarizerParams work = params;
  Adam opt(cfg.schedule());
  Rng order(derive_seed(cfg.seed, "pretrain.order"));
  double best = -1.0;
  for (std::size_t epoch = 1; epoch <= cfg.pretrain_epochs; ++epoch) {
    const EpochStats s =
        detail::summarizer_epoch(work, enc, train.docs, cfg, opt, order, nullptr, 1.0);
    const double val = validation_rouge_mean(work, enc, valid, cfg.k_select, &balanced);
    LossReport r;
    r.phase = "pretrain";
    r.epoch = epoch;
    r.l1 = s.l1;
    r.val_rouge_mean = val;
    out.history.push_back(r);
    if (val > best) {
      best = val;
      out.best = work;
      out.best_epoch = epoch;
      out.best_val_rouge = val;
    }
  }
  return out;
}

struct AdversaryResult {
  AdversaryParams params;
  double train_accuracy = 0.0;
  std::vector<LossReport> history;
};

/// Bucket accuracy of argmax predictions over a set of encoded documents.
inline double adversary_accuracy(const AdversaryParams& adv,
                                 const std::vector<Tensor>& hs,
                                 const std::vector<PreparedDoc>& docs,
                                 const std::vector<std::size_t>& indices) {
  std::size_t hits = 0, total = 0;
  for (std::size_t idx : indices) {
    const auto dists = adversary_forward(adv, EncodedDocument{hs[idx]});
    for (std::size_t i = 0; i < dists.size(); ++i) {
      const auto& p = dists[i].probs;
      const std::size_t arg =
          static_cast<std::size_t>(std::max_element(p.begin(), p.end()) - p.begin());
      hits += arg == docs[idx].buckets[i] ? 1 : 0;
      ++total;
    }
  }
  return total == 0 ? 0.0 : static_cast<double>(hits) / static_cast<double>(total);
}

inline std::vector<Tensor> encode_all(const SummarizerParams& frozen, const EncoderConfig& enc,
                                      const std::vector<PreparedDoc>& docs) {
  std::vector<Tensor> hs;
  hs.reserve(docs.size());
  for (const auto& d : docs) hs.push_back(encode(frozen, enc, d.x).h);
  return hs;
}

/// Trains a fresh position predictor on detached encoder outputs. The
/// summarizer is only read, never bound as a parameter, so its bytes cannot
/// change. Early stopping watches a 10% held-out slice with patience 2 and
/// the best held-out epoch's parameters are returned.
inline AdversaryResult train_adversary(const SummarizerParams& frozen, const EncoderConfig& enc,
                                       const TrainData& train, const TrainingConfig& cfg,
                                       std::uint64_t seed_n, const std::string& phase_tag = "adversary") {
  cfg.validate();
  const std::vector<Tensor> hs = encode_all(frozen, enc, train.docs);
  const std::size_t n = train.docs.size();
  if (n == 0) throw DataError("train_adversary: empty corpus");

  AdversaryResult out;
  out.params = init_adversary(enc.d_model, enc.d_model, cfg.m_buckets,
                              derive_seed(seed_n, "adv.init"));
  Rng split_rng(derive_seed(seed_n, "adv.split"));
  auto perm = split_rng.permutation(n);
  const std::size_t held = n >= 10 ? n / 10 : 0;
  std::vector<std::size_t> fit_idx(perm.begin(), perm.end() - static_cast<std::ptrdiff_t>(held));
  std::vector<std::size_t> held_idx(perm.end() - static_cast<std::ptrdiff_t>(held), perm.end());
  std::vector<std::size_t> all_idx(n);
  std::iota(all_idx.begin(), all_idx.end(), 0);

  Adam opt(cfg.schedule());
  Rng order(derive_seed(seed_n, "adv.order"));
  AdversaryParams best = out.params;
  double best_held = std::numeric_limits<double>::infinity();
  std::size_t since_best = 0;
  const auto tensors = out.params.tensors();

  auto held_loss = [&]() {
    if (held_idx.empty()) return 0.0;
    double total = 0.0;
    std::size_t count = 0;
    for (std::size_t idx : held_idx) {
      const auto dists = adversary_forward(out.params, EncodedDocument{hs[idx]});
      total += loss_position(dists, train.docs[idx].buckets, cfg.prob_clamp);
      ++count;
    }
    return total / static_cast<double>(count);
  };

  for (std::size_t epoch = 1; epoch <= cfg.adv_epochs; ++epoch) {
    std::vector<std::size_t> shuffled = fit_idx;
    order.shuffle(shuffled);
    double sum_l2 = 0.0;
    std::size_t batches = 0;
    for (std::size_t start = 0; start < shuffled.size(); start += cfg.batch_size) {
      const std::size_t stop = std::min(shuffled.size(), start + cfg.batch_size);
      Graph g;
      std::vector<Graph::NodeId> l2s;
      for (std::size_t pos = start; pos < stop; ++pos) {
        const std::size_t idx = shuffled[pos];
        Graph::NodeId h = g.input(hs[idx]);
        Graph::NodeId preds = adversary_node(g, out.params, h, /*trainable=*/true);
        l2s.push_back(g.mean_pick_nll(preds, train.docs[idx].buckets, cfg.prob_clamp));
      }
      Graph::NodeId loss = g.mean_scalars(l2s);
      out.params.zero_grad();
      g.backward(loss);
      opt.step(tensors);
      sum_l2 += g.value(loss).values[0];
      ++batches;
    }
    LossReport r;
    r.phase = phase_tag;
    r.epoch = epoch;
    r.l2 = sum_l2 / static_cast<double>(batches);
    out.history.push_back(r);

    if (!held_idx.empty()) {
      const double hl = held_loss();
      if (hl < best_held) {
        best_held = hl;
        best = out.params;
        since_best = 0;
      } else if (++since_best >= 2) {
        break;
      }
    }
  }
  if (!held_idx.empty() && cfg.adv_epochs > 0) out.params = best;
  out.train_accuracy = adversary_accuracy(out.params, hs, train.docs, all_idx);
  return out;
}

/// One debiasing phase: updates the summarizer against a frozen adversary by
/// minimizing beta*L1 + (1-beta)*L_adv for debias_epochs epochs. The
/// adversary enters the tape as constant inputs, so its bytes cannot change.
inline std::vector<LossReport> debias_step(SummarizerParams& params, const EncoderConfig& enc,
                                           AdversaryParams& frozen_adv, const TrainData& train,
                                           const TrainingConfig& cfg, std::uint64_t phase_seed,
                                           const std::string& phase_tag = "debias") {
  cfg.validate();
  std::vector<LossReport> history;
  Adam opt(cfg.schedule());
  Rng order(derive_seed(phase_seed, "debias.order"));
  for (std::size_t epoch = 1; epoch <= cfg.debias_epochs; ++epoch) {
    const EpochStats s = detail::summarizer_epoch(params, enc, train.docs, cfg, opt, order,
                                                  &frozen_adv, cfg.beta);
    LossReport r;
    r.phase = phase_tag;
    r.epoch = epoch;
    r.l1 = s.l1;
    r.l2 = s.l2;
    r.l3 = s.l3;
    r.l_adv = s.l_adv;
    history.push_back(r);
  }
  return history;
}

/// Pure-L1 epochs with the same batching and seeding as debias_step; the
/// beta=1 degeneracy of the combined objective reduces to this exactly.
inline std::vector<EpochStats> train_pure_l1(SummarizerParams& params, const EncoderConfig& enc,
                                             const TrainData& train, const TrainingConfig& cfg,
                                             std::uint64_t phase_seed, std::size_t epochs) {
  cfg.validate();
  Adam opt(cfg.schedule());
  Rng order(derive_seed(phase_seed, "debias.order"));
  std::vector<EpochStats> stats;
  for (std::size_t epoch = 1; epoch <= epochs; ++epoch)
    stats.push_back(
        detail::summarizer_epoch(params, enc, train.docs, cfg, opt, order, nullptr, 1.0));
  return stats;
}

struct AlternatingResult {
  SummarizerParams final_params;
  SummarizerParams best_params;
  std::size_t best_iteration = 0;  // 1-based index into the outer loop
  double best_val_rouge = 0.0;
  std::vector<AdversaryParams> pool;
  std::vector<LossReport> history;
};

/// Alternating loop: for n = 1..n_adversaries train a fresh adversary on the
/// frozen summarizer, then debias against it. Model selection picks the
/// post-iteration checkpoint with the best ROUGE-mean on the balanced
/// validation subset; ties go to the later iteration, whose encoder has seen
/// more debiasing pressure at equal validation quality.
inline AlternatingResult alternating_train(const SummarizerParams& pretrained,
                                           const EncoderConfig& enc, const TrainData& train,
                                           const TrainData& valid, const TrainingConfig& cfg) {
  cfg.validate();
  AlternatingResult out;
  out.final_params = pretrained;
  out.best_params = pretrained;
  const auto balanced = balanced_validation(valid.corpus, cfg.m_buckets, cfg.seed);
  double best = -1.0;
  for (std::size_t n = 1; n <= cfg.n_adversaries; ++n) {
    AdversaryResult adv =
        train_adversary(out.final_params, enc, train, cfg, derive_seed(cfg.seed, "adv", n));
    for (auto& r : adv.history) {
      r.phase = "adversary." + std::to_string(n);
      out.history.push_back(r);
    }

    auto debias_hist = debias_step(out.final_params, enc, adv.params, train, cfg,
                                   derive_seed(cfg.seed, "debias", n));
    const double val = validation_rouge_mean(out.final_params, enc, valid, cfg.k_select,
                                             &balanced);
    for (std::size_t e = 0; e < debias_hist.size(); ++e) {
      debias_hist[e].phase = "debias." + std::to_string(n);
      if (e + 1 == debias_hist.size()) debias_hist[e].val_rouge_mean = val;
      out.history.push_back(debias_hist[e]);
    }

    out.pool.push_back(std::move(adv.params));
    if (val >= best) {
      best = val;
      out.best_params = out.final_params;
      out.best_iteration = n;
      out.best_val_rouge = val;
    }
  }
  return out;
}

}  // namespace unlead

#endif  // UNLEAD_TRAINING_HPP
