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

#ifndef UNLEAD_EVAL_HPP
#define UNLEAD_EVAL_HPP

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <numeric>
#include <optional>
#include <string>
#include <vector>

#include "json.hpp"
#include "unlead/corpus.hpp"
#include "unlead/errors.hpp"
#include "unlead/model.hpp"
#include "unlead/rouge.hpp"
#include "unlead/selection.hpp"
#include "unlead/training.hpp"

namespace unlead {

inline RougeScore oracle_score(const Document& doc) {
  if (!doc.has_labels()) throw Error("oracle_score: document has no labels");
  std::vector<std::size_t> picked;
  for (std::size_t i = 0; i < doc.k(); ++i)
    if (doc.labels[i] == 1) picked.push_back(i);
  return rouge_all(assemble_summary(doc, picked), doc.summary_tokens());
}

inline std::vector<std::size_t> oracle_indices(const Document& doc) {
  if (!doc.has_labels()) throw Error("oracle_indices: document has no labels");
  std::vector<std::size_t> picked;
  for (std::size_t i = 0; i < doc.k(); ++i)
    if (doc.labels[i] == 1) picked.push_back(i);
  return picked;
}

/// Normalized relative-position masses: a selected sentence i in a document
/// of k sentences falls in bin floor(i*n_bins/k), clipped to n_bins-1.
inline std::vector<double> position_histogram(
    const std::vector<std::vector<std::size_t>>& selections,
    const std::vector<Document>& docs, std::size_t n_bins) {
  if (n_bins == 0) throw Error("position_histogram: n_bins must be positive");
  if (selections.size() != docs.size())
    throw Error("position_histogram: selections/documents length mismatch");
  std::vector<double> mass(n_bins, 0.0);
  double total = 0.0;
  for (std::size_t d = 0; d < docs.size(); ++d) {
    const std::size_t k = docs[d].k();
    for (std::size_t i : selections[d]) {
      if (i >= k) throw Error("position_histogram: index out of range");
      mass[std::min(i * n_bins / k, n_bins - 1)] += 1.0;
      total += 1.0;
    }
  }
  if (total == 0.0) throw Error("position_histogram: no selected sentences");
  for (auto& m : mass) m /= total;
  return mass;
}

/// Trains a fresh probe on frozen encoder outputs of an 80% split and reports
/// argmax bucket accuracy on the held-out 20%.
inline double probe_bias(const SummarizerParams& frozen, const EncoderConfig& enc,
                         const TrainData& data, const TrainingConfig& cfg,
                         std::uint64_t probe_seed) {
  const std::size_t n = data.size();
  if (n < 2) throw DataError("probe_bias: need at least 2 documents");
  Rng split_rng(derive_seed(probe_seed, "probe.split"));
  const auto perm = split_rng.permutation(n);
  const std::size_t held = std::max<std::size_t>(1, n / 5);
  TrainData fit;
  fit.corpus.split_tag = data.corpus.split_tag;
  std::vector<std::size_t> held_idx;
  for (std::size_t pos = 0; pos < n; ++pos) {
    if (pos < n - held) {
      fit.corpus.documents.push_back(data.corpus.documents[perm[pos]]);
      fit.docs.push_back(data.docs[perm[pos]]);
    } else {
      held_idx.push_back(perm[pos]);
    }
  }
  const AdversaryResult probe =
      train_adversary(frozen, enc, fit, cfg, derive_seed(probe_seed, "probe.train"), "probe");
  const std::vector<Tensor> hs = encode_all(frozen, enc, data.docs);
  return adversary_accuracy(probe.params, hs, data.docs, held_idx);
}

struct Subsets {
  std::vector<std::size_t> early, middle, late;  // document indices
  std::size_t subset_size = 0;
  std::size_t qualifying = 0;
};

/// Documents with exactly 3 oracle sentences, ranked by mean oracle index
/// ascending: the first subset_size are D_early, a window centered on the
/// median rank is D_middle, the last subset_size are D_late.
inline Subsets build_subsets(const Corpus& corpus, std::size_t subset_size) {
  std::vector<std::pair<double, std::size_t>> ranked;
  for (std::size_t d = 0; d < corpus.size(); ++d) {
    const Document& doc = corpus.documents[d];
    if (!doc.has_labels()) throw DataError("build_subsets: unlabeled document " + doc.id);
    const auto picked = oracle_indices(doc);
    if (picked.size() != 3) continue;
    const double mean_idx =
        static_cast<double>(std::accumulate(picked.begin(), picked.end(), std::size_t{0})) / 3.0;
    ranked.emplace_back(mean_idx, d);
  }
  std::stable_sort(ranked.begin(), ranked.end(),
                   [](const auto& a, const auto& b) { return a.first < b.first; });
  const std::size_t q = ranked.size();
  Subsets out;
  out.qualifying = q;
  out.subset_size =
      subset_size > 0 ? subset_size : std::max<std::size_t>(1, std::min<std::size_t>(100, q / 10));
  const std::size_t s = out.subset_size;
  if (q < 3 * s)
    throw DataError("build_subsets: only " + std::to_string(q) +
                    " documents have a 3-sentence oracle; need " + std::to_string(3 * s));
  const std::size_t mid_start = (q - s) / 2;
  for (std::size_t r = 0; r < s; ++r) {
    out.early.push_back(ranked[r].second);
    out.middle.push_back(ranked[mid_start + r].second);
    out.late.push_back(ranked[q - s + r].second);
  }
  return out;
}

/// One-sided paired bootstrap testing a > b: p is the fraction of resamples
/// where mean(a) <= mean(b); ties count toward p, so identical inputs give 1.
inline double bootstrap_significance(const std::vector<double>& scores_a,
                                     const std::vector<double>& scores_b,
                                     std::size_t n_resamples, std::uint64_t seed) {
  if (scores_a.size() != scores_b.size())
    throw Error("bootstrap_significance: paired score lists differ in length");
  const std::size_t n = scores_a.size();
  if (n < 2) throw Error("bootstrap_significance: need at least 2 paired scores");
  if (n_resamples == 0) throw Error("bootstrap_significance: n_resamples must be positive");
  Rng rng(derive_seed(seed, "bootstrap"));
  std::size_t hits = 0;
  for (std::size_t r = 0; r < n_resamples; ++r) {
    double sum_a = 0.0, sum_b = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      const std::size_t j = rng.index(n);
      sum_a += scores_a[j];
      sum_b += scores_b[j];
    }
    if (sum_a <= sum_b) ++hits;
  }
  return static_cast<double>(hits) / static_cast<double>(n_resamples);
}

struct EvalSettings {
  std::size_t k_select = 3;
  std::size_t n_bins = 10;
  std::size_t subset_size = 0;  // 0 = 10% of qualifying documents, capped at 100
  std::size_t n_resamples = 1000;
  std::uint64_t seed = 0;
};

struct PerDocScore {
  std::string id;
  RougeScore rouge;
};

struct SignificanceRecord {
  std::string baseline;
  std::string metric;
  double p = 1.0;
};

struct EvalReport {
  std::string corpus;
  std::string model;
  RougeScore rouge;
  std::vector<PerDocScore> per_doc;
  std::size_t n_bins = 10;
  std::vector<double> hist_selected;
  std::vector<double> hist_oracle;
  std::optional<double> probe_accuracy;
  std::optional<RougeScore> subset_early, subset_middle, subset_late;
  std::vector<SignificanceRecord> significance;
  RougeScore lead_rouge;
  RougeScore oracle_rouge;
};

namespace detail {

inline nlohmann::json rouge_json(const RougeScore& r) {
  return nlohmann::json{{"r1", r.r1}, {"r2", r.r2}, {"rl", r.rl}, {"mean", r.mean()}};
}

inline RougeScore rouge_from_json(const nlohmann::json& j) {
  RougeScore r;
  r.r1 = j.at("r1").get<double>();
  r.r2 = j.at("r2").get<double>();
  r.rl = j.at("rl").get<double>();
  return r;
}

inline RougeScore mean_rouge(const std::vector<RougeScore>& scores,
                             const std::vector<std::size_t>* subset = nullptr) {
  RougeScore total;
  std::size_t count = 0;
  auto add = [&](const RougeScore& s) {
    total.r1 += s.r1;
    total.r2 += s.r2;
    total.rl += s.rl;
    ++count;
  };
  if (subset == nullptr)
    for (const auto& s : scores) add(s);
  else
    for (std::size_t i : *subset) add(scores[i]);
  if (count == 0) return RougeScore{};
  total.r1 /= static_cast<double>(count);
  total.r2 /= static_cast<double>(count);
  total.rl /= static_cast<double>(count);
  return total;
}

}  // namespace detail

inline nlohmann::json eval_report_json(const EvalReport& rep) {
  nlohmann::json per_doc = nlohmann::json::array();
  for (const auto& pd : rep.per_doc) {
    nlohmann::json j = detail::rouge_json(pd.rouge);
    j["id"] = pd.id;
    per_doc.push_back(std::move(j));
  }
  nlohmann::json significance = nlohmann::json::array();
  for (const auto& s : rep.significance)
    significance.push_back({{"baseline", s.baseline}, {"metric", s.metric}, {"p", s.p}});
  auto subset = [](const std::optional<RougeScore>& s) {
    return s ? detail::rouge_json(*s) : nlohmann::json(nullptr);
  };
  return nlohmann::json{
      {"corpus", rep.corpus},
      {"model", rep.model},
      {"rouge", detail::rouge_json(rep.rouge)},
      {"per_doc", std::move(per_doc)},
      {"histogram",
       {{"bins", rep.n_bins}, {"selected", rep.hist_selected}, {"oracle", rep.hist_oracle}}},
      {"probe_accuracy",
       rep.probe_accuracy ? nlohmann::json(*rep.probe_accuracy) : nlohmann::json(nullptr)},
      {"subsets",
       {{"early", subset(rep.subset_early)},
        {"middle", subset(rep.subset_middle)},
        {"late", subset(rep.subset_late)}}},
      {"significance", std::move(significance)},
      {"baselines",
       {{"lead", {{"rouge", detail::rouge_json(rep.lead_rouge)}}},
        {"oracle", {{"rouge", detail::rouge_json(rep.oracle_rouge)}}}}}};
}

inline void save_eval_report(const EvalReport& rep, const std::filesystem::path& path) {
  std::ofstream os(path);
  if (!os) throw DataError("report: cannot write " + path.string());
  os << eval_report_json(rep).dump(2) << '\n';
  if (!os) throw DataError("report: write failed for " + path.string());
}

/// Scores the model on a labeled corpus and fills every report section except
/// probe_accuracy: per-document ROUGE, position histograms of selected vs
/// oracle sentences, subset scores, Lead/Oracle baselines, and paired
/// bootstrap significance of the model against each baseline.
inline EvalReport evaluate_model(const SummarizerParams& params, const EncoderConfig& enc,
                                 const TrainData& data, const EvalSettings& es,
                                 const std::string& corpus_tag, const std::string& model_tag) {
  const std::size_t n = data.size();
  if (n == 0) throw DataError("evaluate_model: empty corpus");
  EvalReport rep;
  rep.corpus = corpus_tag;
  rep.model = model_tag;
  rep.n_bins = es.n_bins;

  std::vector<std::vector<std::size_t>> selections(n), oracle_sel(n);
  std::vector<RougeScore> model_scores(n), lead_scores(n), oracle_scores(n);
  for (std::size_t d = 0; d < n; ++d) {
    const Document& doc = data.corpus.documents[d];
    const auto ref = doc.summary_tokens();
    const auto alpha = score_document(params, enc, data.docs[d].x);
    selections[d] = select_summary(alpha, es.k_select);
    oracle_sel[d] = oracle_indices(doc);
    model_scores[d] = rouge_all(assemble_summary(doc, selections[d]), ref);
    lead_scores[d] = rouge_all(assemble_summary(doc, lead_baseline(doc, es.k_select)), ref);
    oracle_scores[d] = oracle_score(doc);
    rep.per_doc.push_back(PerDocScore{doc.id, model_scores[d]});
  }

  rep.rouge = detail::mean_rouge(model_scores);
  rep.lead_rouge = detail::mean_rouge(lead_scores);
  rep.oracle_rouge = detail::mean_rouge(oracle_scores);
  rep.hist_selected = position_histogram(selections, data.corpus.documents, es.n_bins);
  rep.hist_oracle = position_histogram(oracle_sel, data.corpus.documents, es.n_bins);

  try {
    const Subsets subsets = build_subsets(data.corpus, es.subset_size);
    rep.subset_early = detail::mean_rouge(model_scores, &subsets.early);
    rep.subset_middle = detail::mean_rouge(model_scores, &subsets.middle);
    rep.subset_late = detail::mean_rouge(model_scores, &subsets.late);
  } catch (const DataError&) {
    // too few qualifying documents; subsets stay null in the report
  }

  auto metric_values = [](const std::vector<RougeScore>& scores, const std::string& metric) {
    std::vector<double> out(scores.size());
    for (std::size_t i = 0; i < scores.size(); ++i) {
      if (metric == "r1") out[i] = scores[i].r1;
      else if (metric == "r2") out[i] = scores[i].r2;
      else if (metric == "rl") out[i] = scores[i].rl;
      else out[i] = scores[i].mean();
    }
    return out;
  };
  if (n >= 2) {
    const std::pair<std::string, const std::vector<RougeScore>*> baselines[] = {
        {"lead", &lead_scores}, {"oracle", &oracle_scores}};
    for (const auto& [name, scores] : baselines) {
      for (const std::string metric : {"r1", "r2", "rl", "mean"}) {
        SignificanceRecord rec;
        rec.baseline = name;
        rec.metric = metric;
        rec.p = bootstrap_significance(metric_values(model_scores, metric),
                                       metric_values(*scores, metric), es.n_resamples,
                                       derive_seed(es.seed, "sig." + name + "." + metric));
        rep.significance.push_back(rec);
      }
    }
  }
  return rep;
}

}  // namespace unlead

#endif  // UNLEAD_EVAL_HPP
