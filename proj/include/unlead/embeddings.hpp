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

#ifndef UNLEAD_EMBEDDINGS_HPP
#define UNLEAD_EMBEDDINGS_HPP

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <unordered_map>
#include <vector>

#include "unlead/corpus.hpp"
#include "unlead/errors.hpp"
#include "unlead/rng.hpp"
#include "unlead/tensor.hpp"

namespace unlead {

struct VectorTable {
  std::size_t dim = 0;
  std::unordered_map<std::string, std::vector<double>> entries;

  const std::vector<double>* lookup(const std::string& token) const {
    auto it = entries.find(token);
    return it == entries.end() ? nullptr : &it->second;
  }
};

inline VectorTable load_vectors(const std::filesystem::path& path) {
  std::ifstream is(path);
  if (!is) throw DataError("vectors: cannot open " + path.string());
  VectorTable table;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(is, line)) {
    ++line_no;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    std::istringstream ss(line);
    std::string token;
    ss >> token;
    std::vector<double> vec;
    double v;
    while (ss >> v) vec.push_back(v);
    if (!ss.eof())
      throw DataError("vectors: " + path.filename().string() + ":" +
                      std::to_string(line_no) + ": non-numeric value");
    if (token.empty() || vec.empty())
      throw DataError("vectors: " + path.filename().string() + ":" +
                      std::to_string(line_no) + ": malformed row");
    if (table.dim == 0) table.dim = vec.size();
    if (vec.size() != table.dim)
      throw DataError("vectors: " + path.filename().string() + ":" +
                      std::to_string(line_no) + ": dimensionality " +
                      std::to_string(vec.size()) + " differs from " +
                      std::to_string(table.dim));
    table.entries[token] = std::move(vec);
  }
  if (table.entries.empty()) throw DataError("vectors: " + path.string() + " has no rows");
  return table;
}

inline void save_vectors(const VectorTable& table, const std::filesystem::path& path) {
  std::ofstream os(path);
  if (!os) throw DataError("vectors: cannot write " + path.string());
  std::vector<std::string> tokens;
  tokens.reserve(table.entries.size());
  for (const auto& [tok, vec] : table.entries) tokens.push_back(tok);
  std::sort(tokens.begin(), tokens.end());
  char buf[64];
  for (const auto& tok : tokens) {
    os << tok;
    for (double v : table.entries.at(tok)) {
      std::snprintf(buf, sizeof(buf), " %.17g", v);
      os << buf;
    }
    os << '\n';
  }
  if (!os) throw DataError("vectors: write failed for " + path.string());
}

/// Frozen random table: seeded Gaussian rows scaled to unit norm. Sentences
/// only need to be distinguishable; no pretrained semantics required.
inline VectorTable random_table(const std::vector<std::string>& tokens, std::size_t dim,
                                std::uint64_t seed) {
  if (dim == 0) throw Error("random_table: dim must be positive");
  VectorTable table;
  table.dim = dim;
  for (std::size_t t = 0; t < tokens.size(); ++t) {
    Rng rng(derive_seed(seed, "vec." + tokens[t]));
    std::vector<double> vec(dim);
    double norm2 = 0.0;
    for (auto& v : vec) {
      v = rng.normal();
      norm2 += v * v;
    }
    const double norm = std::sqrt(norm2);
    if (norm > 0.0)
      for (auto& v : vec) v /= norm;
    table.entries[tokens[t]] = std::move(vec);
  }
  return table;
}

/// Mean of per-token vectors; unknown tokens contribute a zero vector and
/// still count in the denominator.
inline std::vector<double> embed_sentence(const VectorTable& table, const Sentence& sentence) {
  if (sentence.empty()) throw Error("embed_sentence: empty sentence");
  std::vector<double> mean(table.dim, 0.0);
  for (const auto& tok : sentence) {
    if (const auto* vec = table.lookup(tok))
      for (std::size_t j = 0; j < table.dim; ++j) mean[j] += (*vec)[j];
  }
  const double inv = 1.0 / static_cast<double>(sentence.size());
  for (auto& v : mean) v *= inv;
  return mean;
}

inline Tensor embed_document(const VectorTable& table, const Document& doc) {
  Tensor x = Tensor::zeros({doc.k(), table.dim});
  for (std::size_t i = 0; i < doc.k(); ++i) {
    const auto row = embed_sentence(table, doc.sentences[i]);
    for (std::size_t j = 0; j < table.dim; ++j) x.at(i, j) = row[j];
  }
  return x;
}

}  // namespace unlead

#endif  // UNLEAD_EMBEDDINGS_HPP
