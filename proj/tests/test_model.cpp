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

#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <vector>

#include "unlead/model.hpp"
#include "unlead/rng.hpp"

using namespace unlead;

namespace {

EncoderConfig tiny_config(InputMode mode = InputMode::SemPlusPos) {
  EncoderConfig cfg;
  cfg.n_layers = 1;
  cfg.n_heads = 2;
  cfg.d_model = 8;
  cfg.d_ff = 12;
  cfg.input_mode = mode;
  cfg.max_len = 16;
  return cfg;
}

Tensor random_embeddings(std::size_t k, std::size_t dim, std::uint64_t seed) {
  Rng rng(seed);
  Tensor x = Tensor::zeros({k, dim});
  for (double& v : x.values) v = rng.normal();
  return x;
}

}  // namespace

TEST_CASE("positional encoding matches the sinusoid formula", "[model]") {
  const Tensor pe = positional_encoding(4, 6);
  REQUIRE(pe.shape == std::vector<std::size_t>{4, 6});
  for (std::size_t j = 0; j < 3; ++j) {
    REQUIRE(pe.at(0, 2 * j) == 0.0);
    REQUIRE(pe.at(0, 2 * j + 1) == 1.0);
  }
  REQUIRE_THAT(pe.at(1, 0), Catch::Matchers::WithinAbs(0.8414709848078965, 1e-15));
  REQUIRE_THAT(pe.at(1, 1), Catch::Matchers::WithinAbs(std::cos(1.0), 1e-15));
  const double arg = 3.0 / std::pow(10000.0, 2.0 / 6.0);
  REQUIRE_THAT(pe.at(3, 2), Catch::Matchers::WithinAbs(std::sin(arg), 1e-15));
  REQUIRE_THAT(pe.at(3, 3), Catch::Matchers::WithinAbs(std::cos(arg), 1e-15));
}

TEST_CASE("input mode names round trip", "[model]") {
  for (InputMode m : {InputMode::SemPlusPos, InputMode::SemOnly, InputMode::PosOnly})
    REQUIRE(input_mode_from_string(to_string(m)) == m);
  REQUIRE_THROWS_AS(input_mode_from_string("semantic"), UsageError);
}

TEST_CASE("encoder config validation", "[model]") {
  EncoderConfig cfg = tiny_config();
  REQUIRE_NOTHROW(cfg.validate());
  cfg.d_model = 9;  // not divisible by 2 heads
  REQUIRE_THROWS_AS(cfg.validate(), UsageError);
  cfg = tiny_config();
  cfg.n_layers = 0;
  REQUIRE_THROWS_AS(cfg.validate(), UsageError);
}

TEST_CASE("initialization is deterministic in the seed", "[model]") {
  const EncoderConfig cfg = tiny_config();
  SummarizerParams a = init_summarizer(cfg, 5, 42);
  SummarizerParams b = init_summarizer(cfg, 5, 42);
  SummarizerParams c = init_summarizer(cfg, 5, 43);
  bool identical = true, differs = false;
  a.visit([&](const std::string& name, Tensor& t) {
    Tensor* tb = nullptr;
    b.visit([&](const std::string& n2, Tensor& t2) {
      if (n2 == name) tb = &t2;
    });
    REQUIRE(tb != nullptr);
    identical = identical && t.values == tb->values;
  });
  c.visit([&](const std::string& name, Tensor& t) {
    Tensor* ta = nullptr;
    a.visit([&](const std::string& n2, Tensor& t2) {
      if (n2 == name) ta = &t2;
    });
    differs = differs || t.values != ta->values;
  });
  REQUIRE(identical);
  REQUIRE(differs);
}

TEST_CASE("pos_only encoding ignores sentence content", "[model]") {
  const EncoderConfig cfg = tiny_config(InputMode::PosOnly);
  const SummarizerParams p = init_summarizer(cfg, 5, 1);
  const Tensor x1 = random_embeddings(4, 5, 10);
  const Tensor x2 = random_embeddings(4, 5, 20);
  const EncodedDocument h1 = encode(p, cfg, x1);
  const EncodedDocument h2 = encode(p, cfg, x2);
  REQUIRE(h1.h.values == h2.h.values);  // bitwise: content never enters
}

TEST_CASE("sem_only encoding is equivariant under sentence permutation", "[model]") {
  const EncoderConfig cfg = tiny_config(InputMode::SemOnly);
  const SummarizerParams p = init_summarizer(cfg, 5, 2);
  const Tensor x = random_embeddings(5, 5, 30);
  const std::vector<std::size_t> perm{3, 0, 4, 1, 2};
  Tensor xp = Tensor::zeros({5, 5});
  for (std::size_t i = 0; i < 5; ++i)
    for (std::size_t c = 0; c < 5; ++c) xp.at(perm[i], c) = x.at(i, c);
  const EncodedDocument h = encode(p, cfg, x);
  const EncodedDocument hp = encode(p, cfg, xp);
  for (std::size_t i = 0; i < 5; ++i)
    for (std::size_t c = 0; c < 8; ++c)
      REQUIRE_THAT(hp.h.at(perm[i], c), Catch::Matchers::WithinAbs(h.h.at(i, c), 1e-9));
}

TEST_CASE("sem_plus_pos encoding is position sensitive", "[model]") {
  const EncoderConfig cfg = tiny_config(InputMode::SemPlusPos);
  const SummarizerParams p = init_summarizer(cfg, 5, 3);
  const Tensor x = random_embeddings(4, 5, 40);
  Tensor swapped = x;
  for (std::size_t c = 0; c < 5; ++c) std::swap(swapped.at(0, c), swapped.at(3, c));
  const EncodedDocument h = encode(p, cfg, x);
  const EncodedDocument hs = encode(p, cfg, swapped);
  double diff = 0.0;
  for (std::size_t c = 0; c < 8; ++c) diff += std::abs(h.h.at(0, c) - hs.h.at(3, c));
  REQUIRE(diff > 1e-6);  // the moved sentence picks up a different position signal
}

TEST_CASE("scores are probabilities, one per sentence", "[model]") {
  const EncoderConfig cfg = tiny_config();
  const SummarizerParams p = init_summarizer(cfg, 5, 4);
  const EncodedDocument h = encode(p, cfg, random_embeddings(6, 5, 50));
  const std::vector<double> alpha = score(p, h);
  REQUIRE(alpha.size() == 6);
  for (double a : alpha) {
    REQUIRE(a > 0.0);
    REQUIRE(a < 1.0);
  }
}

TEST_CASE("adversary emits one distribution per sentence", "[model]") {
  const EncoderConfig cfg = tiny_config();
  const SummarizerParams p = init_summarizer(cfg, 5, 5);
  const AdversaryParams adv = init_adversary(8, 8, 10, 6);
  const EncodedDocument h = encode(p, cfg, random_embeddings(4, 5, 60));
  const auto preds = adversary_forward(adv, h);
  REQUIRE(preds.size() == 4);
  for (const auto& d : preds) {
    REQUIRE(d.probs.size() == 10);
    double sum = 0.0;
    for (double q : d.probs) {
      REQUIRE(q > 0.0);
      sum += q;
    }
    REQUIRE_THAT(sum, Catch::Matchers::WithinAbs(1.0, 1e-12));
  }
}

TEST_CASE("encode rejects oversized and empty documents", "[model]") {
  const EncoderConfig cfg = tiny_config();
  const SummarizerParams p = init_summarizer(cfg, 5, 7);
  REQUIRE_THROWS_AS(encode(p, cfg, random_embeddings(17, 5, 70)), DataError);
  REQUIRE_THROWS_AS(encode(p, cfg, Tensor::zeros({0, 5})), DataError);
}

TEST_CASE("encode is deterministic", "[model]") {
  const EncoderConfig cfg = tiny_config();
  const SummarizerParams p = init_summarizer(cfg, 5, 8);
  const Tensor x = random_embeddings(5, 5, 80);
  REQUIRE(encode(p, cfg, x).h.values == encode(p, cfg, x).h.values);
}
