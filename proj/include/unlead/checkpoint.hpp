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

#ifndef UNLEAD_CHECKPOINT_HPP
#define UNLEAD_CHECKPOINT_HPP

#include <cstdint>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include "json.hpp"
#include "unlead/errors.hpp"
#include "unlead/model.hpp"
#include "unlead/optim.hpp"

namespace unlead {

/// Binary model container. Layout (little-endian):
///   magic "UNLDCKP1", u64 header length, header JSON (kind + architecture),
///   u64 tensor count, then per tensor: u32 name length, name bytes, u32 rank,
///   u64 dims, raw float64 data. An optional optimizer section follows:
///   u8 flag, u64 step, then m and v buffers per tensor in the same order.
/// Values round-trip bitwise.
namespace ckpt {

constexpr char kMagic[8] = {'U', 'N', 'L', 'D', 'C', 'K', 'P', '1'};

template <typename T>
void write_pod(std::ostream& os, const T& v) {
  os.write(reinterpret_cast<const char*>(&v), sizeof(T));
}

template <typename T>
T read_pod(std::istream& is) {
  T v{};
  is.read(reinterpret_cast<char*>(&v), sizeof(T));
  if (!is) throw DataError("checkpoint: truncated file");
  return v;
}

inline void write_doubles(std::ostream& os, const std::vector<double>& xs) {
  os.write(reinterpret_cast<const char*>(xs.data()),
           static_cast<std::streamsize>(xs.size() * sizeof(double)));
}

inline void read_doubles(std::istream& is, std::vector<double>& xs) {
  is.read(reinterpret_cast<char*>(xs.data()),
          static_cast<std::streamsize>(xs.size() * sizeof(double)));
  if (!is) throw DataError("checkpoint: truncated tensor data");
}

inline void write_tensor(std::ostream& os, const std::string& name, const Tensor& t) {
  write_pod<std::uint32_t>(os, static_cast<std::uint32_t>(name.size()));
  os.write(name.data(), static_cast<std::streamsize>(name.size()));
  write_pod<std::uint32_t>(os, static_cast<std::uint32_t>(t.shape.size()));
  for (std::size_t d : t.shape) write_pod<std::uint64_t>(os, d);
  write_doubles(os, t.values);
}

inline std::pair<std::string, Tensor> read_tensor(std::istream& is) {
  const auto name_len = read_pod<std::uint32_t>(is);
  std::string name(name_len, '\0');
  is.read(name.data(), name_len);
  const auto rank = read_pod<std::uint32_t>(is);
  std::vector<std::size_t> shape(rank);
  for (auto& d : shape) d = static_cast<std::size_t>(read_pod<std::uint64_t>(is));
  Tensor t = Tensor::zeros(shape);
  read_doubles(is, t.values);
  return {std::move(name), std::move(t)};
}

struct OptState {
  bool present = false;
  std::size_t step = 0;
  std::vector<Tensor> m, v;
};

template <typename Params>
void save(std::ostream& os, const nlohmann::json& meta, Params& params, const Adam* opt) {
  os.write(kMagic, sizeof(kMagic));
  const std::string header = meta.dump();
  write_pod<std::uint64_t>(os, header.size());
  os.write(header.data(), static_cast<std::streamsize>(header.size()));

  std::vector<std::pair<std::string, Tensor*>> named;
  params.visit([&](const std::string& n, Tensor& t) { named.emplace_back(n, &t); });
  write_pod<std::uint64_t>(os, named.size());
  for (auto& [n, t] : named) write_tensor(os, n, *t);

  const bool has_opt = opt != nullptr && !opt->moments_m().empty();
  write_pod<std::uint8_t>(os, has_opt ? 1 : 0);
  if (has_opt) {
    if (opt->moments_m().size() != named.size())
      throw Error("checkpoint: optimizer moment count does not match parameters");
    write_pod<std::uint64_t>(os, opt->step_count());
    for (std::size_t i = 0; i < named.size(); ++i) {
      write_doubles(os, opt->moments_m()[i].values);
      write_doubles(os, opt->moments_v()[i].values);
    }
  }
}

inline nlohmann::json read_header(std::istream& is) {
  char magic[8];
  is.read(magic, sizeof(magic));
  if (!is || std::memcmp(magic, kMagic, sizeof(kMagic)) != 0)
    throw DataError("checkpoint: bad magic (not an unlead checkpoint)");
  const auto header_len = read_pod<std::uint64_t>(is);
  std::string header(header_len, '\0');
  is.read(header.data(), static_cast<std::streamsize>(header_len));
  if (!is) throw DataError("checkpoint: truncated header");
  nlohmann::json meta = nlohmann::json::parse(header, nullptr, false);
  if (meta.is_discarded()) throw DataError("checkpoint: header is not valid JSON");
  return meta;
}

template <typename Params>
OptState load_into(std::istream& is, Params& params) {
  const auto n_tensors = read_pod<std::uint64_t>(is);
  std::vector<std::pair<std::string, Tensor*>> named;
  params.visit([&](const std::string& n, Tensor& t) { named.emplace_back(n, &t); });
  if (n_tensors != named.size()) throw DataError("checkpoint: tensor count mismatch");
  for (std::size_t i = 0; i < n_tensors; ++i) {
    auto [name, t] = read_tensor(is);
    if (name != named[i].first)
      throw DataError("checkpoint: unexpected tensor '" + name + "' (wanted '" +
                      named[i].first + "')");
    if (t.shape != named[i].second->shape)
      throw DataError("checkpoint: shape mismatch for tensor '" + name + "'");
    *named[i].second = std::move(t);
  }
  OptState opt;
  const auto flag = read_pod<std::uint8_t>(is);
  if (flag) {
    opt.present = true;
    opt.step = static_cast<std::size_t>(read_pod<std::uint64_t>(is));
    for (auto& [n, t] : named) {
      Tensor m = Tensor::zeros(t->shape), v = Tensor::zeros(t->shape);
      read_doubles(is, m.values);
      read_doubles(is, v.values);
      opt.m.push_back(std::move(m));
      opt.v.push_back(std::move(v));
    }
  }
  return opt;
}

}  // namespace ckpt

struct SummarizerCheckpoint {
  EncoderConfig enc;
  std::size_t embed_dim = 0;
  SummarizerParams params;
  ckpt::OptState opt;
};

struct AdversaryCheckpoint {
  std::size_t d_model = 0, hidden = 0, m_buckets = 0;
  AdversaryParams params;
  ckpt::OptState opt;
};

inline void save_summarizer_checkpoint(const std::filesystem::path& path,
                                       const EncoderConfig& enc, std::size_t embed_dim,
                                       SummarizerParams& params, const Adam* opt = nullptr) {
  nlohmann::json meta{{"kind", "summarizer"},
                      {"n_layers", enc.n_layers},
                      {"n_heads", enc.n_heads},
                      {"d_model", enc.d_model},
                      {"d_ff", enc.d_ff},
                      {"input_mode", to_string(enc.input_mode)},
                      {"max_len", enc.max_len},
                      {"embed_dim", embed_dim}};
  std::ofstream os(path, std::ios::binary);
  if (!os) throw DataError("checkpoint: cannot write " + path.string());
  ckpt::save(os, meta, params, opt);
  if (!os) throw DataError("checkpoint: write failed for " + path.string());
}

inline SummarizerCheckpoint load_summarizer_checkpoint(const std::filesystem::path& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw DataError("checkpoint: cannot open " + path.string());
  nlohmann::json meta = ckpt::read_header(is);
  if (meta.value("kind", "") != "summarizer")
    throw DataError("checkpoint: kind is '" + meta.value("kind", std::string("?")) +
                    "', expected 'summarizer'");
  SummarizerCheckpoint out;
  out.enc.n_layers = meta.at("n_layers").get<std::size_t>();
  out.enc.n_heads = meta.at("n_heads").get<std::size_t>();
  out.enc.d_model = meta.at("d_model").get<std::size_t>();
  out.enc.d_ff = meta.at("d_ff").get<std::size_t>();
  out.enc.input_mode = input_mode_from_string(meta.at("input_mode").get<std::string>());
  out.enc.max_len = meta.at("max_len").get<std::size_t>();
  out.embed_dim = meta.at("embed_dim").get<std::size_t>();
  out.params = init_summarizer(out.enc, out.embed_dim, /*seed=*/0);
  out.opt = ckpt::load_into(is, out.params);
  return out;
}

inline void save_adversary_checkpoint(const std::filesystem::path& path, std::size_t d_model,
                                      std::size_t hidden, std::size_t m_buckets,
                                      AdversaryParams& params, const Adam* opt = nullptr) {
  nlohmann::json meta{{"kind", "adversary"},
                      {"d_model", d_model},
                      {"hidden", hidden},
                      {"m_buckets", m_buckets}};
  std::ofstream os(path, std::ios::binary);
  if (!os) throw DataError("checkpoint: cannot write " + path.string());
  ckpt::save(os, meta, params, opt);
  if (!os) throw DataError("checkpoint: write failed for " + path.string());
}

inline AdversaryCheckpoint load_adversary_checkpoint(const std::filesystem::path& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw DataError("checkpoint: cannot open " + path.string());
  nlohmann::json meta = ckpt::read_header(is);
  if (meta.value("kind", "") != "adversary")
    throw DataError("checkpoint: kind is '" + meta.value("kind", std::string("?")) +
                    "', expected 'adversary'");
  AdversaryCheckpoint out;
  out.d_model = meta.at("d_model").get<std::size_t>();
  out.hidden = meta.at("hidden").get<std::size_t>();
  out.m_buckets = meta.at("m_buckets").get<std::size_t>();
  out.params = init_adversary(out.d_model, out.hidden, out.m_buckets, /*seed=*/0);
  out.opt = ckpt::load_into(is, out.params);
  return out;
}

/// Serializes parameter values to a byte string; used to assert freeze
/// contracts (bytes identical before and after a phase).
template <typename Params>
std::string serialize_param_bytes(Params& params) {
  std::ostringstream os(std::ios::binary);
  params.visit([&](const std::string& n, Tensor& t) { ckpt::write_tensor(os, n, t); });
  return os.str();
}

}  // namespace unlead

#endif  // UNLEAD_CHECKPOINT_HPP
