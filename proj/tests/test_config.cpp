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

#include <fstream>
#include <string>

#include "temp_dir.hpp"
#include "unlead/config.hpp"

using namespace unlead;
using unlead_tests::TempDir;

TEST_CASE("defaults survive an empty config", "[config]") {
  const RunConfig rc = run_config_from_json(nlohmann::json::object(), ".");
  REQUIRE(rc.seed == 0);
  REQUIRE(rc.mode == "biased");
  REQUIRE(rc.lambda_bias == 0.9);
  REQUIRE(rc.lambda_ood == 0.0);
  REQUIRE(rc.n_train == 2000);
  REQUIRE(rc.d_model == 64);
  REQUIRE(rc.beta == 0.9);
  REQUIRE(rc.m_buckets == 10);
  REQUIRE(rc.n_adversaries == 5);
  REQUIRE(rc.k_select == 3);
  REQUIRE(rc.shuffle_finetune);
}

TEST_CASE("explicit keys override defaults", "[config]") {
  const auto j = nlohmann::json::parse(
      R"({"seed": 9, "beta": 0.5, "mode": "debias", "n_layers": 3, "base_lr": 0.01})");
  const RunConfig rc = run_config_from_json(j, ".");
  REQUIRE(rc.seed == 9);
  REQUIRE(rc.beta == 0.5);
  REQUIRE(rc.mode == "debias");
  REQUIRE(rc.n_layers == 3);
  REQUIRE(rc.base_lr == 0.01);
  REQUIRE(rc.d_model == 64);  // untouched default
}

TEST_CASE("unknown keys and bad types are usage errors", "[config]") {
  REQUIRE_THROWS_AS(run_config_from_json(nlohmann::json::parse(R"({"betaa": 0.5})"), "."),
                    UsageError);
  REQUIRE_THROWS_AS(run_config_from_json(nlohmann::json::parse(R"({"beta": "high"})"), "."),
                    UsageError);
  REQUIRE_THROWS_AS(run_config_from_json(nlohmann::json::parse("[1,2]"), "."), UsageError);
}

TEST_CASE("load_run_config reports unreadable or invalid files", "[config]") {
  TempDir dir;
  REQUIRE_THROWS_AS(load_run_config(dir.path / "missing.json"), UsageError);
  const auto bad = dir.write("bad.json", "{nope");
  REQUIRE_THROWS_AS(load_run_config(bad), UsageError);
}

TEST_CASE("paths resolve relative to the config file", "[config]") {
  TempDir dir;
  const auto p = dir.write("run.json", R"({"out_dir": "results", "vectors": "vec/table.txt"})");
  const RunConfig rc = load_run_config(p);
  REQUIRE(rc.resolved_out_dir() == dir.path / "results");
  REQUIRE(rc.vectors_path() == dir.path / "vec/table.txt");
  // Defaulted data paths live inside out_dir.
  REQUIRE(rc.train_corpus_path() == dir.path / "results" / "train.jsonl");
  REQUIRE(rc.test_corpus_path() == dir.path / "results" / "test_id.jsonl");
}

TEST_CASE("absolute paths are kept as-is", "[config]") {
  const auto j = nlohmann::json::parse(R"({"train_corpus": "/data/train.jsonl"})");
  const RunConfig rc = run_config_from_json(j, "/somewhere/else");
  REQUIRE(rc.train_corpus_path() == "/data/train.jsonl");
}

TEST_CASE("pinning data paths keeps inputs when out_dir moves", "[config]") {
  TempDir dir;
  const auto p = dir.write("run.json", R"({"out_dir": "original"})");
  RunConfig rc = load_run_config(p);
  rc.pin_data_paths();
  rc.out_dir = "elsewhere";
  REQUIRE(rc.train_corpus_path() == dir.path / "original" / "train.jsonl");
  REQUIRE(rc.resolved_out_dir() == dir.path / "elsewhere");
}

TEST_CASE("derived sub-configs mirror the top-level fields", "[config]") {
  const auto j = nlohmann::json::parse(
      R"({"lambda_bias": 0.7, "k_min": 14, "beta": 0.8, "m_buckets": 5,
          "n_heads": 4, "d_model": 32, "input_mode": "sem_only",
          "k_select": 1, "n_bins": 20, "n_resamples": 123})");
  const RunConfig rc = run_config_from_json(j, ".");
  const BiasSpec spec = rc.bias_spec(rc.lambda_bias);
  REQUIRE(spec.lambda_bias == 0.7);
  REQUIRE(spec.k_min == 14);
  const TrainingConfig cfg = rc.training();
  REQUIRE(cfg.beta == 0.8);
  REQUIRE(cfg.m_buckets == 5);
  REQUIRE(cfg.k_select == 1);
  const EncoderConfig enc = rc.encoder();
  REQUIRE(enc.n_heads == 4);
  REQUIRE(enc.d_model == 32);
  REQUIRE(enc.input_mode == InputMode::SemOnly);
  const EvalSettings es = rc.eval_settings();
  REQUIRE(es.n_bins == 20);
  REQUIRE(es.n_resamples == 123);
}

TEST_CASE("echo writes the effective config", "[config]") {
  TempDir dir;
  RunConfig rc = run_config_from_json(nlohmann::json::parse(R"({"seed": 11})"), ".");
  rc.mode = "shuffle";  // as a CLI override would
  echo_config(rc, dir.path);
  std::ifstream is(dir.path / "config.echo.json");
  REQUIRE(is.good());
  const auto j = nlohmann::json::parse(is);
  REQUIRE(j.at("seed") == 11);
  REQUIRE(j.at("mode") == "shuffle");
  REQUIRE(j.at("beta") == 0.9);
  // The echo parses back as a valid config.
  REQUIRE_NOTHROW(run_config_from_json(j, "."));
}

TEST_CASE("json round trip is lossless", "[config]") {
  const auto j = nlohmann::json::parse(
      R"({"seed": 3, "lambda_bias": 0.55, "mode": "pos_only", "subset_size": 7})");
  const RunConfig rc = run_config_from_json(j, ".");
  const RunConfig back = run_config_from_json(rc.to_json(), ".");
  REQUIRE(back.seed == 3);
  REQUIRE(back.lambda_bias == 0.55);
  REQUIRE(back.mode == "pos_only");
  REQUIRE(back.subset_size == 7);
  REQUIRE(back.to_json() == rc.to_json());
}
