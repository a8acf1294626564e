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

#ifndef UNLEAD_CORPUS_HPP
#define UNLEAD_CORPUS_HPP

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "json.hpp"
#include "unlead/errors.hpp"
#include "unlead/rng.hpp"
#include "unlead/rouge.hpp"

namespace unlead {

using Sentence = std::vector<std::string>;

struct Document {
  std::string id;
  std::vector<Sentence> sentences;
  std::vector<Sentence> summary;
  std::vector<int> labels;  // empty when unlabeled

  std::size_t k() const { return sentences.size(); }
  bool has_labels() const { return !labels.empty(); }

  Sentence summary_tokens() const {
    Sentence out;
    for (const auto& s : summary) out.insert(out.end(), s.begin(), s.end());
    return out;
  }
};

struct Corpus {
  std::vector<Document> documents;
  std::string split_tag;  // train | valid | test

  std::size_t size() const { return documents.size(); }
};

inline void validate_document(const Document& doc, const std::string& where) {
  if (doc.sentences.empty()) throw DataError(where + ": document has no sentences");
  for (const auto& s : doc.sentences)
    if (s.empty()) throw DataError(where + ": empty sentence");
  if (doc.has_labels()) {
    if (doc.labels.size() != doc.k())
      throw DataError(where + ": labels length " + std::to_string(doc.labels.size()) +
                      " does not match sentence count " + std::to_string(doc.k()));
    bool any_one = false;
    for (int y : doc.labels) {
      if (y != 0 && y != 1) throw DataError(where + ": labels must be 0 or 1");
      any_one = any_one || y == 1;
    }
    if (!any_one) throw DataError(where + ": labels contain no positive sentence");
  }
}

namespace detail {

inline std::vector<Sentence> parse_sentence_list(const nlohmann::json& j,
                                                 const std::string& where,
                                                 const char* key) {
  if (!j.contains(key) || !j.at(key).is_array())
    throw DataError(where + ": missing or non-array \"" + key + "\"");
  std::vector<Sentence> out;
  for (const auto& sj : j.at(key)) {
    if (!sj.is_array()) throw DataError(where + ": \"" + key + "\" entries must be arrays");
    Sentence s;
    for (const auto& tj : sj) {
      if (!tj.is_string()) throw DataError(where + ": tokens must be strings");
      s.push_back(tj.get<std::string>());
    }
    out.push_back(std::move(s));
  }
  return out;
}

}  // namespace detail

inline Document document_from_json(const nlohmann::json& j, const std::string& where) {
  Document doc;
  if (!j.is_object()) throw DataError(where + ": record is not a JSON object");
  if (!j.contains("id") || !j.at("id").is_string())
    throw DataError(where + ": missing or non-string \"id\"");
  doc.id = j.at("id").get<std::string>();
  doc.sentences = detail::parse_sentence_list(j, where, "sentences");
  doc.summary = detail::parse_sentence_list(j, where, "summary");
  if (j.contains("labels")) {
    if (!j.at("labels").is_array()) throw DataError(where + ": \"labels\" must be an array");
    for (const auto& lj : j.at("labels")) {
      if (!lj.is_number_integer()) throw DataError(where + ": labels must be integers");
      doc.labels.push_back(lj.get<int>());
    }
  }
  validate_document(doc, where);
  return doc;
}

inline nlohmann::json document_to_json(const Document& doc) {
  nlohmann::json j{{"id", doc.id}, {"sentences", doc.sentences}, {"summary", doc.summary}};
  if (doc.has_labels()) j["labels"] = doc.labels;
  return j;
}

inline Corpus load_corpus(const std::filesystem::path& path, std::string split_tag = "") {
  std::ifstream is(path);
  if (!is) throw DataError("corpus: cannot open " + path.string());
  Corpus corpus;
  corpus.split_tag = std::move(split_tag);
  std::set<std::string> seen_ids;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(is, line)) {
    ++line_no;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    const std::string where = path.filename().string() + ":" + std::to_string(line_no);
    nlohmann::json j = nlohmann::json::parse(line, nullptr, false);
    if (j.is_discarded()) throw DataError(where + ": malformed JSON");
    Document doc = document_from_json(j, where);
    if (!seen_ids.insert(doc.id).second)
      throw DataError(where + ": duplicate document id \"" + doc.id + "\"");
    corpus.documents.push_back(std::move(doc));
  }
  if (corpus.documents.empty()) throw DataError("corpus: " + path.string() + " has no records");
  return corpus;
}

inline void save_corpus(const Corpus& corpus, const std::filesystem::path& path) {
  std::ofstream os(path);
  if (!os) throw DataError("corpus: cannot write " + path.string());
  for (const auto& doc : corpus.documents) os << document_to_json(doc).dump() << '\n';
  if (!os) throw DataError("corpus: write failed for " + path.string());
}

inline std::size_t position_bucket(std::size_t i, std::size_t k, std::size_t m_buckets) {
  if (k == 0 || i >= k) throw Error("position_bucket: index out of range");
  if (m_buckets < 2) throw Error("position_bucket: need at least 2 buckets");
  return std::min(i * m_buckets / k, m_buckets - 1);
}

/// Greedy oracle: repeatedly add the sentence that most increases the mean of
/// ROUGE-1 and ROUGE-2 F1 against the concatenated reference; candidates are
/// concatenated in document order. Guarantees at least one positive label.
inline std::vector<int> greedy_oracle_labels(const Document& doc, std::size_t max_select) {
  if (doc.summary.empty()) throw Error("greedy_oracle_labels: document has no summary");
  if (max_select == 0) throw Error("greedy_oracle_labels: max_select must be positive");
  const Sentence ref = doc.summary_tokens();
  const std::size_t k = doc.k();

  auto score_of = [&](const std::set<std::size_t>& picked) {
    Sentence cand;
    for (std::size_t i : picked)
      cand.insert(cand.end(), doc.sentences[i].begin(), doc.sentences[i].end());
    return 0.5 * (rouge_n(cand, ref, 1) + rouge_n(cand, ref, 2));
  };

  std::set<std::size_t> picked;
  double current = 0.0;
  while (picked.size() < std::min(max_select, k)) {
    double best = current;
    std::size_t best_i = k;
    for (std::size_t i = 0; i < k; ++i) {
      if (picked.count(i)) continue;
      auto trial = picked;
      trial.insert(i);
      const double s = score_of(trial);
      if (s > best) {
        best = s;
        best_i = i;
      }
    }
    if (best_i == k) break;
    picked.insert(best_i);
    current = best;
  }

  if (picked.empty()) {
    double best = -1.0;
    std::size_t best_i = 0;
    for (std::size_t i = 0; i < k; ++i) {
      const double s = score_of({i});
      if (s > best) {
        best = s;
        best_i = i;
      }
    }
    picked.insert(best_i);
  }

  std::vector<int> labels(k, 0);
  for (std::size_t i : picked) labels[i] = 1;
  return labels;
}

struct BiasSpec {
  double lambda_bias = 1.0;
  double lead_fraction = 0.2;
  std::size_t key_fact_count = 3;
  std::size_t k_min = 12;
  std::size_t k_max = 24;
  std::size_t vocab_size = 600;
  std::size_t topic_count = 12;
  std::uint64_t seed = 0;
  std::size_t keywords_per_fact = 3;
  double summary_keep_prob = 0.8;
  double distractor_prob = 0.1;

  std::size_t lead_slots(std::size_t k) const {
    return static_cast<std::size_t>(std::ceil(lead_fraction * static_cast<double>(k)));
  }

  void validate() const {
    if (lambda_bias < 0.0 || lambda_bias > 1.0)
      throw DataError("bias spec: lambda_bias must be in [0,1]");
    if (lead_fraction <= 0.0 || lead_fraction >= 1.0)
      throw DataError("bias spec: lead_fraction must be in (0,1)");
    if (key_fact_count == 0) throw DataError("bias spec: key_fact_count must be positive");
    if (k_min == 0 || k_max < k_min) throw DataError("bias spec: invalid k_range");
    if (key_fact_count > k_min)
      throw DataError("bias spec: key_fact_count exceeds minimum document length");
    if (lambda_bias > 0.0 && key_fact_count > lead_slots(k_min))
      throw DataError("bias spec: lead region of shortest documents cannot hold " +
                      std::to_string(key_fact_count) + " key facts");
    if (vocab_size == 0 || topic_count == 0 || keywords_per_fact == 0)
      throw DataError("bias spec: vocab_size, topic_count, keywords_per_fact must be positive");
    if (summary_keep_prob <= 0.0 || summary_keep_prob > 1.0)
      throw DataError("bias spec: summary_keep_prob must be in (0,1]");
    if (distractor_prob < 0.0 || distractor_prob > 1.0)
      throw DataError("bias spec: distractor_prob must be in [0,1]");
  }
};

namespace detail {

inline std::string keyword_token(std::size_t topic, std::size_t j) {
  return "k" + std::to_string(topic) + "_" + std::to_string(j);
}

inline std::string filler_token(std::size_t i) { return "w" + std::to_string(i); }

inline Sentence make_filler_sentence(const BiasSpec& spec, std::size_t topic, Rng& rng) {
  const std::size_t len = rng.range(6, 10);
  Sentence s;
  for (std::size_t t = 0; t < len; ++t) s.push_back(filler_token(rng.index(spec.vocab_size)));
  if (spec.topic_count > 1 && rng.bernoulli(spec.distractor_prob)) {
    std::size_t other = rng.index(spec.topic_count - 1);
    if (other >= topic) ++other;
    s[rng.index(s.size())] =
        keyword_token(other, rng.index(spec.key_fact_count * spec.keywords_per_fact));
  }
  return s;
}

}  // namespace detail

/// Every token the generator can emit; used to build a frozen vector table.
inline std::vector<std::string> synthetic_vocabulary(const BiasSpec& spec) {
  std::vector<std::string> vocab;
  for (std::size_t i = 0; i < spec.vocab_size; ++i) vocab.push_back(detail::filler_token(i));
  for (std::size_t t = 0; t < spec.topic_count; ++t)
    for (std::size_t j = 0; j < spec.key_fact_count * spec.keywords_per_fact; ++j)
      vocab.push_back(detail::keyword_token(t, j));
  return vocab;
}

/// Builds a corpus with a controllable lead bias. Each document gets a topic
/// and key_fact_count keyword-bearing sentences; each key fact lands in the
/// lead region with probability lambda_bias and otherwise uniformly among all
/// still-free positions, so the expected lead mass is
/// lambda + (1 - lambda) * lead_fraction.
inline Corpus generate_synthetic(const BiasSpec& spec, std::size_t n_docs,
                                 const std::string& tag = "syn") {
  spec.validate();
  if (n_docs == 0) throw DataError("generate_synthetic: n_docs must be positive");
  Corpus corpus;
  corpus.split_tag = tag;
  for (std::size_t d = 0; d < n_docs; ++d) {
    Rng rng(derive_seed(spec.seed, tag + ".doc", d));
    Document doc;
    {
      std::ostringstream id;
      id << tag << "-" << std::setw(6) << std::setfill('0') << d;
      doc.id = id.str();
    }
    const std::size_t k = rng.range(spec.k_min, spec.k_max);
    const std::size_t topic = rng.index(spec.topic_count);
    const std::size_t lead = spec.lead_slots(k);

    std::vector<std::size_t> fact_pos;
    std::vector<bool> taken(k, false);
    for (std::size_t f = 0; f < spec.key_fact_count; ++f) {
      std::vector<std::size_t> free_slots;
      if (rng.bernoulli(spec.lambda_bias)) {
        for (std::size_t i = 0; i < lead; ++i)
          if (!taken[i]) free_slots.push_back(i);
      } else {
        for (std::size_t i = 0; i < k; ++i)
          if (!taken[i]) free_slots.push_back(i);
      }
      const std::size_t pos = free_slots[rng.index(free_slots.size())];
      taken[pos] = true;
      fact_pos.push_back(pos);
    }
    std::sort(fact_pos.begin(), fact_pos.end());

    doc.sentences.resize(k);
    doc.labels.assign(k, 0);
    for (std::size_t f = 0; f < fact_pos.size(); ++f) {
      Sentence s;
      for (std::size_t j = 0; j < spec.keywords_per_fact; ++j)
        s.push_back(detail::keyword_token(topic, f * spec.keywords_per_fact + j));
      const std::size_t extra = rng.range(3, 5);
      for (std::size_t t = 0; t < extra; ++t)
        s.push_back(detail::filler_token(rng.index(spec.vocab_size)));
      rng.shuffle(s);
      doc.sentences[fact_pos[f]] = std::move(s);
      doc.labels[fact_pos[f]] = 1;
    }
    for (std::size_t i = 0; i < k; ++i)
      if (doc.sentences[i].empty())
        doc.sentences[i] = detail::make_filler_sentence(spec, topic, rng);

    for (std::size_t pos : fact_pos) {
      Sentence ref;
      for (const auto& tok : doc.sentences[pos])
        if (rng.bernoulli(spec.summary_keep_prob)) ref.push_back(tok);
      if (ref.empty()) ref.push_back(doc.sentences[pos].front());
      doc.summary.push_back(std::move(ref));
    }

    validate_document(doc, doc.id);
    corpus.documents.push_back(std::move(doc));
  }
  return corpus;
}

/// Permutes sentences (and labels) by a seeded uniform permutation; the
/// reference summary is left untouched.
inline Document shuffle_document(const Document& doc, std::uint64_t seed) {
  if (!doc.has_labels()) throw Error("shuffle_document: document has no labels");
  const std::size_t k = doc.k();
  Rng rng(seed);
  const std::vector<std::size_t> perm = rng.permutation(k);
  Document out;
  out.id = doc.id;
  out.summary = doc.summary;
  out.sentences.resize(k);
  out.labels.resize(k);
  for (std::size_t i = 0; i < k; ++i) {
    out.sentences[perm[i]] = doc.sentences[i];
    out.labels[perm[i]] = doc.labels[i];
  }
  return out;
}

inline Corpus shuffle_corpus(const Corpus& corpus, std::uint64_t seed) {
  Corpus out;
  out.split_tag = corpus.split_tag;
  for (std::size_t d = 0; d < corpus.documents.size(); ++d)
    out.documents.push_back(
        shuffle_document(corpus.documents[d], derive_seed(seed, "shuffle", d)));
  return out;
}

}  // namespace unlead

#endif  // UNLEAD_CORPUS_HPP
