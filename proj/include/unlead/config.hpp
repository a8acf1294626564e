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

#ifndef UNLEAD_CONFIG_HPP
#define UNLEAD_CONFIG_HPP

#include <cstdint>
#include <filesystem>
#include <fstream>
#include <string>

#include "json.hpp"
#include "unlead/corpus.hpp"
#include "unlead/errors.hpp"
#include "unlead/eval.hpp"
#include "unlead/model.hpp"
#include "unlead/training.hpp"

namespace unlead {

/// One JSON config file drives every command; relative paths are resolved
/// against the config file's directory, and unset corpus/vector paths default
/// to the generator's fixed file names inside out_dir.
struct RunConfig {
  std::uint64_t seed = 0;
  std::filesystem::path out_dir = "out";
  std::string mode = "biased";

  // generator
  double lambda_bias = 0.9;
  double lambda_ood = 0.0;
  double lead_fraction = 0.2;
  std::size_t key_fact_count = 3;
  std::size_t k_min = 12;
  std::size_t k_max = 24;
  std::size_t vocab_size = 600;
  std::size_t topic_count = 12;
  std::size_t keywords_per_fact = 3;
  double summary_keep_prob = 0.8;
  double distractor_prob = 0.1;
  std::size_t n_train = 2000;
  std::size_t n_valid = 200;
  std::size_t n_test = 500;
  std::size_t embed_dim = 100;

  // data paths (empty = out_dir defaults)
  std::filesystem::path train_corpus, valid_corpus, test_corpus, vectors;

  // encoder
  std::size_t n_layers = 2;
  std::size_t n_heads = 2;
  std::size_t d_model = 64;
  std::size_t d_ff = 128;
  std::string input_mode = "sem_plus_pos";
  std::size_t max_len = 64;

  // training
  double beta = 0.9;
  std::size_t m_buckets = 10;
  std::size_t n_adversaries = 5;
  std::size_t pretrain_epochs = 6;
  std::size_t adv_epochs = 5;
  std::size_t debias_epochs = 1;
  std::size_t batch_size = 32;
  double base_lr = 2e-3;
  std::size_t warmup_steps = 50;
  std::size_t k_select = 3;
  double prob_clamp = 1e-9;
  bool shuffle_finetune = true;

  // evaluation
  std::size_t n_bins = 10;
  std::size_t subset_size = 0;
  std::size_t n_resamples = 1000;
  std::size_t max_select = 3;

  std::filesystem::path config_dir = ".";

  BiasSpec bias_spec(double lambda) const {
    BiasSpec spec;
    spec.lambda_bias = lambda;
    spec.lead_fraction = lead_fraction;
    spec.key_fact_count = key_fact_count;
    spec.k_min = k_min;
    spec.k_max = k_max;
    spec.vocab_size = vocab_size;
    spec.topic_count = topic_count;
    spec.seed = seed;
    spec.keywords_per_fact = keywords_per_fact;
    spec.summary_keep_prob = summary_keep_prob;
    spec.distractor_prob = distractor_prob;
    return spec;
  }

  EncoderConfig encoder() const {
    EncoderConfig enc;
    enc.n_layers = n_layers;
    enc.n_heads = n_heads;
    enc.d_model = d_model;
    enc.d_ff = d_ff;
    enc.input_mode = input_mode_from_string(input_mode);
    enc.max_len = max_len;
    return enc;
  }

  TrainingConfig training() const {
    TrainingConfig cfg;
    cfg.beta = beta;
    cfg.m_buckets = m_buckets;
    cfg.n_adversaries = n_adversaries;
    cfg.pretrain_epochs = pretrain_epochs;
    cfg.adv_epochs = adv_epochs;
    cfg.debias_epochs = debias_epochs;
    cfg.batch_size = batch_size;
    cfg.base_lr = base_lr;
    cfg.warmup_steps = warmup_steps;
    cfg.seed = seed;
    cfg.k_select = k_select;
    cfg.prob_clamp = prob_clamp;
    return cfg;
  }

  EvalSettings eval_settings() const {
    EvalSettings es;
    es.k_select = k_select;
    es.n_bins = n_bins;
    es.subset_size = subset_size;
    es.n_resamples = n_resamples;
    es.seed = seed;
    return es;
  }

  std::filesystem::path resolve(const std::filesystem::path& p) const {
    return p.is_absolute() ? p : config_dir / p;
  }

  std::filesystem::path resolved_out_dir() const { return resolve(out_dir); }

  std::filesystem::path corpus_path(const std::filesystem::path& configured,
                                    const std::string& default_name) const {
    return configured.empty() ? resolved_out_dir() / default_name : resolve(configured);
  }

  std::filesystem::path train_corpus_path() const {
    return corpus_path(train_corpus, "train.jsonl");
  }
  std::filesystem::path valid_corpus_path() const {
    return corpus_path(valid_corpus, "valid.jsonl");
  }
  std::filesystem::path test_corpus_path() const {
    return corpus_path(test_corpus, "test_id.jsonl");
  }
  std::filesystem::path vectors_path() const { return corpus_path(vectors, "vectors.txt"); }

  /// Materialize defaulted data paths against the current out_dir so that a
  /// later out_dir override redirects outputs without losing the inputs.
  void pin_data_paths() {
    train_corpus = train_corpus_path();
    valid_corpus = valid_corpus_path();
    test_corpus = test_corpus_path();
    vectors = vectors_path();
  }

  nlohmann::json to_json() const {
    return nlohmann::json{{"seed", seed},
                          {"out_dir", out_dir.generic_string()},
                          {"mode", mode},
                          {"lambda_bias", lambda_bias},
                          {"lambda_ood", lambda_ood},
                          {"lead_fraction", lead_fraction},
                          {"key_fact_count", key_fact_count},
                          {"k_min", k_min},
                          {"k_max", k_max},
                          {"vocab_size", vocab_size},
                          {"topic_count", topic_count},
                          {"keywords_per_fact", keywords_per_fact},
                          {"summary_keep_prob", summary_keep_prob},
                          {"distractor_prob", distractor_prob},
                          {"n_train", n_train},
                          {"n_valid", n_valid},
                          {"n_test", n_test},
                          {"embed_dim", embed_dim},
                          {"train_corpus", train_corpus.generic_string()},
                          {"valid_corpus", valid_corpus.generic_string()},
                          {"test_corpus", test_corpus.generic_string()},
                          {"vectors", vectors.generic_string()},
                          {"n_layers", n_layers},
                          {"n_heads", n_heads},
                          {"d_model", d_model},
                          {"d_ff", d_ff},
                          {"input_mode", input_mode},
                          {"max_len", max_len},
                          {"beta", beta},
                          {"m_buckets", m_buckets},
                          {"n_adversaries", n_adversaries},
                          {"pretrain_epochs", pretrain_epochs},
                          {"adv_epochs", adv_epochs},
                          {"debias_epochs", debias_epochs},
                          {"batch_size", batch_size},
                          {"base_lr", base_lr},
                          {"warmup_steps", warmup_steps},
                          {"k_select", k_select},
                          {"prob_clamp", prob_clamp},
                          {"shuffle_finetune", shuffle_finetune},
                          {"n_bins", n_bins},
                          {"subset_size", subset_size},
                          {"n_resamples", n_resamples},
                          {"max_select", max_select}};
  }
};

inline RunConfig run_config_from_json(const nlohmann::json& j,
                                      const std::filesystem::path& config_dir) {
  RunConfig rc;
  rc.config_dir = config_dir;
  if (!j.is_object()) throw UsageError("config: top level must be a JSON object");

  auto get_path = [&](const char* key, std::filesystem::path& field) {
    field = std::filesystem::path(j.at(key).get<std::string>());
  };
  for (const auto& [key, value] : j.items()) {
    try {
      if (key == "seed") rc.seed = value.get<std::uint64_t>();
      else if (key == "out_dir") get_path("out_dir", rc.out_dir);
      else if (key == "mode") rc.mode = value.get<std::string>();
      else if (key == "lambda_bias") rc.lambda_bias = value.get<double>();
      else if (key == "lambda_ood") rc.lambda_ood = value.get<double>();
      else if (key == "lead_fraction") rc.lead_fraction = value.get<double>();
      else if (key == "key_fact_count") rc.key_fact_count = value.get<std::size_t>();
      else if (key == "k_min") rc.k_min = value.get<std::size_t>();
      else if (key == "k_max") rc.k_max = value.get<std::size_t>();
      else if (key == "vocab_size") rc.vocab_size = value.get<std::size_t>();
      else if (key == "topic_count") rc.topic_count = value.get<std::size_t>();
      else if (key == "keywords_per_fact") rc.keywords_per_fact = value.get<std::size_t>();
      else if (key == "summary_keep_prob") rc.summary_keep_prob = value.get<double>();
      else if (key == "distractor_prob") rc.distractor_prob = value.get<double>();
      else if (key == "n_train") rc.n_train = value.get<std::size_t>();
      else if (key == "n_valid") rc.n_valid = value.get<std::size_t>();
      else if (key == "n_test") rc.n_test = value.get<std::size_t>();
      else if (key == "embed_dim") rc.embed_dim = value.get<std::size_t>();
      else if (key == "train_corpus") get_path("train_corpus", rc.train_corpus);
      else if (key == "valid_corpus") get_path("valid_corpus", rc.valid_corpus);
      else if (key == "test_corpus") get_path("test_corpus", rc.test_corpus);
      else if (key == "vectors") get_path("vectors", rc.vectors);
      else if (key == "n_layers") rc.n_layers = value.get<std::size_t>();
      else if (key == "n_heads") rc.n_heads = value.get<std::size_t>();
      else if (key == "d_model") rc.d_model = value.get<std::size_t>();
      else if (key == "d_ff") rc.d_ff = value.get<std::size_t>();
      else if (key == "input_mode") rc.input_mode = value.get<std::string>();
      else if (key == "max_len") rc.max_len = value.get<std::size_t>();
      else if (key == "beta") rc.beta = value.get<double>();
      else if (key == "m_buckets") rc.m_buckets = value.get<std::size_t>();
      else if (key == "n_adversaries") rc.n_adversaries = value.get<std::size_t>();
      else if (key == "pretrain_epochs") rc.pretrain_epochs = value.get<std::size_t>();
      else if (key == "adv_epochs") rc.adv_epochs = value.get<std::size_t>();
      else if (key == "debias_epochs") rc.debias_epochs = value.get<std::size_t>();
      else if (key == "batch_size") rc.batch_size = value.get<std::size_t>();
      else if (key == "base_lr") rc.base_lr = value.get<double>();
      else if (key == "warmup_steps") rc.warmup_steps = value.get<std::size_t>();
      else if (key == "k_select") rc.k_select = value.get<std::size_t>();
      else if (key == "prob_clamp") rc.prob_clamp = value.get<double>();
      else if (key == "shuffle_finetune") rc.shuffle_finetune = value.get<bool>();
      else if (key == "n_bins") rc.n_bins = value.get<std::size_t>();
      else if (key == "subset_size") rc.subset_size = value.get<std::size_t>();
      else if (key == "n_resamples") rc.n_resamples = value.get<std::size_t>();
      else if (key == "max_select") rc.max_select = value.get<std::size_t>();
      else throw UsageError("config: unknown key \"" + key + "\"");
    } catch (const nlohmann::json::exception&) {
      throw UsageError("config: bad value type for key \"" + key + "\"");
    }
  }
  return rc;
}

inline RunConfig load_run_config(const std::filesystem::path& path) {
  std::ifstream is(path);
  if (!is) throw UsageError("config: cannot open " + path.string());
  nlohmann::json j = nlohmann::json::parse(is, nullptr, false);
  if (j.is_discarded()) throw UsageError("config: " + path.string() + " is not valid JSON");
  auto dir = path.parent_path();
  if (dir.empty()) dir = ".";
  return run_config_from_json(j, dir);
}

inline void echo_config(const RunConfig& rc, const std::filesystem::path& out_dir) {
  std::ofstream os(out_dir / "config.echo.json");
  if (!os) throw DataError("config: cannot write echo into " + out_dir.string());
  os << rc.to_json().dump(2) << '\n';
}

}  // namespace unlead

#endif  // UNLEAD_CONFIG_HPP
