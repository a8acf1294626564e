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

#include <algorithm>
#include <cmath>
#include <string>
#include <vector>

#include "unlead/checkpoint.hpp"
#include "unlead/training.hpp"

using namespace unlead;

namespace {

struct Setup {
  EncoderConfig enc;
  VectorTable table;
  TrainData train, valid;
  TrainingConfig cfg;
};

Setup make_setup(double lambda, std::size_t n_train = 24, std::size_t n_valid = 12,
                 InputMode mode = InputMode::SemPlusPos) {
  Setup s;
  s.enc.n_layers = 1;
  s.enc.n_heads = 2;
  s.enc.d_model = 16;
  s.enc.d_ff = 24;
  s.enc.input_mode = mode;
  s.enc.max_len = 32;

  BiasSpec spec;
  spec.seed = 1234;
  spec.lambda_bias = lambda;
  spec.vocab_size = 60;
  spec.topic_count = 4;
  s.table = random_table(synthetic_vocabulary(spec), 8, 55);

  s.cfg.m_buckets = 10;
  s.cfg.n_adversaries = 2;
  s.cfg.pretrain_epochs = 2;
  s.cfg.adv_epochs = 3;
  s.cfg.debias_epochs = 1;
  s.cfg.batch_size = 8;
  s.cfg.warmup_steps = 20;
  s.cfg.seed = 77;

  s.train = prepare_data(generate_synthetic(spec, n_train, "tr"), s.table, s.cfg.m_buckets);
  spec.seed = 4321;
  s.valid = prepare_data(generate_synthetic(spec, n_valid, "va"), s.table, s.cfg.m_buckets);
  return s;
}

}  // namespace

TEST_CASE("training config validation", "[training]") {
  TrainingConfig cfg;
  REQUIRE_NOTHROW(cfg.validate());
  SECTION("beta range") {
    cfg.beta = 1.2;
    REQUIRE_THROWS_AS(cfg.validate(), DataError);
    cfg.beta = -0.1;
    REQUIRE_THROWS_AS(cfg.validate(), DataError);
  }
  SECTION("bucket count") {
    cfg.m_buckets = 1;
    REQUIRE_THROWS_AS(cfg.validate(), DataError);
  }
  SECTION("adversary pool size") {
    cfg.n_adversaries = 0;
    REQUIRE_THROWS_AS(cfg.validate(), DataError);
  }
  SECTION("clamp range") {
    cfg.prob_clamp = 0.0;
    REQUIRE_THROWS_AS(cfg.validate(), DataError);
    cfg.prob_clamp = 0.5;
    REQUIRE_THROWS_AS(cfg.validate(), DataError);
  }
}

TEST_CASE("loss report json uses null for undefined fields", "[training]") {
  LossReport r;
  r.phase = "pretrain";
  r.epoch = 3;
  r.l1 = 0.5;
  const auto j = loss_report_json(r);
  REQUIRE(j.at("phase") == "pretrain");
  REQUIRE(j.at("epoch") == 3);
  REQUIRE(j.at("L1") == 0.5);
  REQUIRE(j.at("L2").is_null());
  REQUIRE(j.at("L3").is_null());
  REQUIRE(j.at("L_adv").is_null());
  REQUIRE(j.at("probe_acc").is_null());
  REQUIRE(j.at("val_rouge_mean").is_null());
}

TEST_CASE("prepare_document requires labels and fills buckets", "[training]") {
  const VectorTable table = random_table({"a", "b"}, 4, 1);
  Document doc;
  doc.id = "d";
  doc.sentences = {{"a"}, {"b"}, {"a", "b"}};
  doc.summary = {{"a"}};
  REQUIRE_THROWS_AS(prepare_document(doc, table, 10), DataError);
  doc.labels = {1, 0, 0};
  const PreparedDoc pd = prepare_document(doc, table, 10);
  REQUIRE(pd.x.shape == std::vector<std::size_t>{3, 4});
  REQUIRE(pd.buckets == std::vector<std::size_t>{0, 3, 6});
}

TEST_CASE("pretraining with zero epochs is a no-op", "[training]") {
  Setup s = make_setup(0.9, 8, 6);
  s.cfg.pretrain_epochs = 0;
  SummarizerParams init = init_summarizer(s.enc, s.table.dim, 5);
  const std::string before = serialize_param_bytes(init);
  PretrainResult r = pretrain_summarizer(init, s.enc, s.train, s.valid, s.cfg);
  REQUIRE(serialize_param_bytes(r.best) == before);
  REQUIRE(r.history.empty());
  REQUIRE(r.best_epoch == 0);
}

TEST_CASE("pretraining reduces L1 and returns the best validation epoch", "[training]") {
  Setup s = make_setup(0.9);
  s.cfg.pretrain_epochs = 4;
  SummarizerParams init = init_summarizer(s.enc, s.table.dim, 5);
  PretrainResult r = pretrain_summarizer(init, s.enc, s.train, s.valid, s.cfg);

  REQUIRE(r.history.size() == 4);
  REQUIRE(*r.history.back().l1 < *r.history.front().l1);

  REQUIRE(r.best_epoch >= 1);
  REQUIRE(r.best_epoch <= 4);
  double best_seen = -1.0;
  std::size_t first_arg = 0;
  for (std::size_t e = 0; e < r.history.size(); ++e) {
    const double v = *r.history[e].val_rouge_mean;
    if (v > best_seen) {
      best_seen = v;
      first_arg = e + 1;
    }
  }
  REQUIRE(r.best_epoch == first_arg);  // strict improvement keeps the earliest
  REQUIRE(r.best_val_rouge == best_seen);
}

TEST_CASE("pretraining is deterministic", "[training]") {
  Setup s = make_setup(0.9, 12, 6);
  SummarizerParams init = init_summarizer(s.enc, s.table.dim, 5);
  PretrainResult a = pretrain_summarizer(init, s.enc, s.train, s.valid, s.cfg);
  PretrainResult b = pretrain_summarizer(init, s.enc, s.train, s.valid, s.cfg);
  REQUIRE(serialize_param_bytes(a.best) == serialize_param_bytes(b.best));
  REQUIRE(a.history.size() == b.history.size());
  for (std::size_t i = 0; i < a.history.size(); ++i)
    REQUIRE(*a.history[i].l1 == *b.history[i].l1);
}

TEST_CASE("training the adversary never touches the summarizer", "[training][freeze]") {
  Setup s = make_setup(0.9, 16, 6);
  SummarizerParams frozen = init_summarizer(s.enc, s.table.dim, 6);
  const std::string before = serialize_param_bytes(frozen);
  AdversaryResult adv = train_adversary(frozen, s.enc, s.train, s.cfg, 42);
  REQUIRE(serialize_param_bytes(frozen) == before);
  REQUIRE(adv.train_accuracy >= 0.0);
  REQUIRE(adv.train_accuracy <= 1.0);
  REQUIRE_FALSE(adv.history.empty());
  for (const auto& r : adv.history) {
    REQUIRE(r.l2.has_value());
    REQUIRE_FALSE(r.l1.has_value());
  }
}

TEST_CASE("debiasing never touches the frozen adversary", "[training][freeze]") {
  Setup s = make_setup(0.9, 16, 6);
  SummarizerParams params = init_summarizer(s.enc, s.table.dim, 7);
  AdversaryParams adv = init_adversary(s.enc.d_model, s.enc.d_model, s.cfg.m_buckets, 9);
  const std::string adv_before = serialize_param_bytes(adv);
  const std::string sum_before = serialize_param_bytes(params);
  const auto hist = debias_step(params, s.enc, adv, s.train, s.cfg, 11);
  REQUIRE(serialize_param_bytes(adv) == adv_before);
  REQUIRE(serialize_param_bytes(params) != sum_before);
  REQUIRE(hist.size() == s.cfg.debias_epochs);
}

TEST_CASE("debias history satisfies the L3 identity", "[training]") {
  Setup s = make_setup(0.9, 16, 6);
  s.cfg.debias_epochs = 2;
  s.cfg.beta = 0.7;
  SummarizerParams params = init_summarizer(s.enc, s.table.dim, 8);
  AdversaryParams adv = init_adversary(s.enc.d_model, s.enc.d_model, s.cfg.m_buckets, 10);
  const auto hist = debias_step(params, s.enc, adv, s.train, s.cfg, 13);
  for (const auto& r : hist) {
    REQUIRE(r.l1.has_value());
    REQUIRE(r.l2.has_value());
    REQUIRE(r.l3.has_value());
    REQUIRE(r.l_adv.has_value());
    REQUIRE(std::abs(*r.l3 - (0.7 * *r.l1 + 0.3 * *r.l_adv)) <= 1e-12);
    REQUIRE(*r.l_adv >= std::log(10.0) - 1e-9);  // lower bound ln M
  }
}

TEST_CASE("beta one reduces the debias step to pure L1 training", "[training]") {
  Setup s = make_setup(0.9, 16, 6);
  s.cfg.beta = 1.0;
  s.cfg.debias_epochs = 2;
  SummarizerParams via_debias = init_summarizer(s.enc, s.table.dim, 14);
  SummarizerParams via_pure = via_debias;
  AdversaryParams adv = init_adversary(s.enc.d_model, s.enc.d_model, s.cfg.m_buckets, 15);

  debias_step(via_debias, s.enc, adv, s.train, s.cfg, 99);
  train_pure_l1(via_pure, s.enc, s.train, s.cfg, 99, 2);

  std::vector<Tensor*> a = via_debias.tensors(), b = via_pure.tensors();
  REQUIRE(a.size() == b.size());
  for (std::size_t i = 0; i < a.size(); ++i) {
    REQUIRE(a[i]->values.size() == b[i]->values.size());
    for (std::size_t j = 0; j < a[i]->values.size(); ++j)
      REQUIRE(std::abs(a[i]->values[j] - b[i]->values[j]) <= 1e-12);
  }
}

TEST_CASE("position-only encodings make the adversary nearly perfect", "[training]") {
  // With fixed-length documents and position-only inputs, H is a pure
  // function of position, so bucket prediction is exactly learnable.
  Setup s = make_setup(0.0, 30, 6, InputMode::PosOnly);
  BiasSpec spec;
  spec.seed = 88;
  spec.lambda_bias = 0.0;
  spec.k_min = 20;
  spec.k_max = 20;
  spec.vocab_size = 60;
  spec.topic_count = 4;
  s.train = prepare_data(generate_synthetic(spec, 30, "fx"), s.table, s.cfg.m_buckets);
  s.cfg.adv_epochs = 25;
  s.cfg.warmup_steps = 30;
  s.cfg.base_lr = 5e-3;

  SummarizerParams frozen = init_summarizer(s.enc, s.table.dim, 21);
  AdversaryResult adv = train_adversary(frozen, s.enc, s.train, s.cfg, 7);
  REQUIRE(adv.train_accuracy > 0.95);

  // An untrained adversary sits near chance on the same encodings.
  const AdversaryParams fresh =
      init_adversary(s.enc.d_model, s.enc.d_model, s.cfg.m_buckets, 1717);
  const auto hs = encode_all(frozen, s.enc, s.train.docs);
  std::vector<std::size_t> all(s.train.docs.size());
  std::iota(all.begin(), all.end(), 0);
  REQUIRE(adversary_accuracy(fresh, hs, s.train.docs, all) < 0.35);
}

TEST_CASE("balanced validation respects the scarcest bucket cap", "[training]") {
  BiasSpec spec;
  spec.seed = 61;
  spec.lambda_bias = 0.0;
  spec.key_fact_count = 1;
  spec.k_min = 20;
  spec.k_max = 20;
  const Corpus corpus = generate_synthetic(spec, 100, "bal");

  std::vector<std::size_t> avail(10, 0);
  for (const auto& doc : corpus.documents)
    for (std::size_t i = 0; i < doc.k(); ++i)
      if (doc.labels[i]) ++avail[position_bucket(i, doc.k(), 10)];
  const std::size_t cap = *std::min_element(avail.begin(), avail.end());
  REQUIRE(cap > 0);  // otherwise this fixture tests nothing

  const auto subset = balanced_validation(corpus, 10, 3);
  REQUIRE_FALSE(subset.empty());
  REQUIRE(std::is_sorted(subset.begin(), subset.end()));
  std::vector<std::size_t> got(10, 0);
  for (std::size_t d : subset)
    for (std::size_t i = 0; i < corpus.documents[d].k(); ++i)
      if (corpus.documents[d].labels[i]) ++got[position_bucket(i, 20, 10)];
  for (std::size_t b = 0; b < 10; ++b) REQUIRE(got[b] <= cap);

  REQUIRE(balanced_validation(corpus, 10, 3) == subset);  // deterministic
}

TEST_CASE("balanced validation falls back to the full set", "[training]") {
  // Lead-only labels never reach the later buckets, so the cap is zero.
  BiasSpec spec;
  spec.seed = 62;
  spec.lambda_bias = 1.0;
  const Corpus corpus = generate_synthetic(spec, 20, "fb");
  const auto subset = balanced_validation(corpus, 10, 4);
  REQUIRE(subset.size() == corpus.size());
}

TEST_CASE("alternating training selects the best post-iteration checkpoint", "[training]") {
  Setup s = make_setup(0.9, 20, 10);
  SummarizerParams pre = init_summarizer(s.enc, s.table.dim, 23);
  AlternatingResult alt = alternating_train(pre, s.enc, s.train, s.valid, s.cfg);

  REQUIRE(alt.pool.size() == s.cfg.n_adversaries);
  REQUIRE(alt.best_iteration >= 1);
  REQUIRE(alt.best_iteration <= s.cfg.n_adversaries);

  double best_logged = -1.0;
  for (const auto& r : alt.history) {
    if (r.phase.rfind("debias.", 0) == 0 && r.val_rouge_mean)
      best_logged = std::max(best_logged, *r.val_rouge_mean);
    REQUIRE((r.phase.rfind("adversary.", 0) == 0 || r.phase.rfind("debias.", 0) == 0));
  }
  REQUIRE(alt.best_val_rouge == best_logged);

  AlternatingResult again = alternating_train(pre, s.enc, s.train, s.valid, s.cfg);
  REQUIRE(serialize_param_bytes(again.final_params) ==
          serialize_param_bytes(alt.final_params));
  REQUIRE(serialize_param_bytes(again.best_params) == serialize_param_bytes(alt.best_params));
  REQUIRE(again.best_iteration == alt.best_iteration);
}

TEST_CASE("zero-epoch alternating phases leave the summarizer unchanged", "[training]") {
  Setup s = make_setup(0.9, 10, 6);
  s.cfg.adv_epochs = 0;
  s.cfg.debias_epochs = 0;
  SummarizerParams pre = init_summarizer(s.enc, s.table.dim, 29);
  const std::string before = serialize_param_bytes(pre);
  AlternatingResult alt = alternating_train(pre, s.enc, s.train, s.valid, s.cfg);
  REQUIRE(serialize_param_bytes(alt.final_params) == before);
}

TEST_CASE("alternating training requires at least one adversary", "[training]") {
  Setup s = make_setup(0.9, 8, 6);
  s.cfg.n_adversaries = 0;
  SummarizerParams pre = init_summarizer(s.enc, s.table.dim, 31);
  REQUIRE_THROWS_AS(alternating_train(pre, s.enc, s.train, s.valid, s.cfg), DataError);
}
