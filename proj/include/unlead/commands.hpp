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

#ifndef UNLEAD_COMMANDS_HPP
#define UNLEAD_COMMANDS_HPP

#include <filesystem>
#include <iostream>
#include <map>
#include <string>
#include <vector>

#include "unlead/checkpoint.hpp"
#include "unlead/config.hpp"
#include "unlead/corpus.hpp"
#include "unlead/embeddings.hpp"
#include "unlead/errors.hpp"
#include "unlead/eval.hpp"
#include "unlead/training.hpp"

namespace unlead {

namespace detail {

inline std::filesystem::path ensure_out_dir(const RunConfig& rc) {
  const auto out = rc.resolved_out_dir();
  std::error_code ec;
  std::filesystem::create_directories(out, ec);
  if (ec || !std::filesystem::is_directory(out))
    throw DataError("out dir: cannot create " + out.string());
  return out;
}

inline std::string file_tag(const std::filesystem::path& p) {
  std::string s = p.stem().string();
  const std::string prefix = "checkpoint.";
  if (s.rfind(prefix, 0) == 0) s = s.substr(prefix.size());
  return s;
}

inline EncoderConfig effective_encoder(const RunConfig& rc, const std::string& mode) {
  EncoderConfig enc = rc.encoder();
  if (mode == "sem_only") enc.input_mode = InputMode::SemOnly;
  else if (mode == "pos_only") enc.input_mode = InputMode::PosOnly;
  return enc;
}

/// Upfront config-value validation at the command layer surfaces as a usage
/// error (exit 2) rather than the library's data error.
template <typename F>
inline void validate_config(F&& body) {
  try {
    body();
  } catch (const DataError& e) {
    throw UsageError(e.what());
  }
}

inline void check_architecture(const SummarizerCheckpoint& ckpt, const EncoderConfig& enc,
                               std::size_t embed_dim) {
  auto mismatch = [](const std::string& field) {
    throw DataError("checkpoint/config mismatch: " + field);
  };
  if (ckpt.enc.n_layers != enc.n_layers) mismatch("n_layers");
  if (ckpt.enc.n_heads != enc.n_heads) mismatch("n_heads");
  if (ckpt.enc.d_model != enc.d_model) mismatch("d_model");
  if (ckpt.enc.d_ff != enc.d_ff) mismatch("d_ff");
  if (ckpt.enc.input_mode != enc.input_mode) mismatch("input_mode");
  if (ckpt.enc.max_len != enc.max_len) mismatch("max_len");
  if (ckpt.embed_dim != embed_dim) mismatch("embed_dim");
}

}  // namespace detail

/// Emits train/valid/test corpora (test twice: in-distribution at the
/// training lambda and out-of-distribution at lambda_ood) plus a frozen
/// random vector table covering the generator vocabulary.
inline void cmd_gen(const RunConfig& rc) {
  const auto out = detail::ensure_out_dir(rc);
  echo_config(rc, out);

  const BiasSpec spec_id = rc.bias_spec(rc.lambda_bias);
  const BiasSpec spec_ood = rc.bias_spec(rc.lambda_ood);
  detail::validate_config([&] { spec_id.validate(); });
  detail::validate_config([&] { spec_ood.validate(); });

  save_corpus(generate_synthetic(spec_id, rc.n_train, "train"), out / "train.jsonl");
  save_corpus(generate_synthetic(spec_id, rc.n_valid, "valid"), out / "valid.jsonl");
  save_corpus(generate_synthetic(spec_id, rc.n_test, "test-id"), out / "test_id.jsonl");
  save_corpus(generate_synthetic(spec_ood, rc.n_test, "test-ood"), out / "test_ood.jsonl");

  const VectorTable table =
      random_table(synthetic_vocabulary(spec_id), rc.embed_dim, derive_seed(rc.seed, "vectors"));
  save_vectors(table, out / "vectors.txt");
  std::cout << "gen: wrote 4 corpora and vectors.txt to " << out.string() << "\n";
}

/// Labels every unlabeled document of --corpus with the greedy oracle and
/// writes the result to out_dir/oracle.jsonl.
inline void cmd_oracle(const RunConfig& rc, const std::filesystem::path& corpus_path) {
  const auto out = detail::ensure_out_dir(rc);
  echo_config(rc, out);
  Corpus corpus = load_corpus(rc.resolve(corpus_path));
  std::size_t labeled = 0;
  for (auto& doc : corpus.documents) {
    if (doc.has_labels()) continue;
    doc.labels = greedy_oracle_labels(doc, rc.max_select);
    ++labeled;
  }
  save_corpus(corpus, out / "oracle.jsonl");
  std::cout << "oracle: labeled " << labeled << " of " << corpus.size() << " documents\n";
}

/// Trains one of the five model variants and writes checkpoints plus the
/// training log. Modes: biased (pretrain only), debias (pretrain followed by
/// the alternating loop), shuffle (pretrain on shuffled sentence order, then
/// an optional one-epoch fine-tune on the original order), sem_only and
/// pos_only (pretrain with the ablated input mode).
inline void cmd_train(const RunConfig& rc, const std::string& mode) {
  static const std::vector<std::string> kModes{"biased", "debias", "shuffle", "sem_only",
                                               "pos_only"};
  if (std::find(kModes.begin(), kModes.end(), mode) == kModes.end())
    throw UsageError("train: unknown mode \"" + mode + "\"");
  const auto out = detail::ensure_out_dir(rc);
  echo_config(rc, out);

  const EncoderConfig enc = detail::effective_encoder(rc, mode);
  const TrainingConfig cfg = rc.training();
  detail::validate_config([&] { enc.validate(); });
  detail::validate_config([&] { cfg.validate(); });

  const VectorTable table = load_vectors(rc.vectors_path());
  TrainData train = prepare_data(load_corpus(rc.train_corpus_path(), "train"), table,
                                 cfg.m_buckets);
  TrainData valid = prepare_data(load_corpus(rc.valid_corpus_path(), "valid"), table,
                                 cfg.m_buckets);

  SummarizerParams params = init_summarizer(enc, table.dim, derive_seed(rc.seed, "init"));
  std::vector<LossReport> history;

  if (mode == "shuffle") {
    TrainData shuffled;
    shuffled.corpus = shuffle_corpus(train.corpus, derive_seed(rc.seed, "shuffle"));
    for (const auto& doc : shuffled.corpus.documents)
      shuffled.docs.push_back(prepare_document(doc, table, cfg.m_buckets));
    PretrainResult pre = pretrain_summarizer(params, enc, shuffled, valid, cfg);
    history = pre.history;
    params = pre.best;
    if (rc.shuffle_finetune) {
      const auto stats =
          train_pure_l1(params, enc, train, cfg, derive_seed(rc.seed, "shuffle.finetune"), 1);
      LossReport r;
      r.phase = "finetune";
      r.epoch = 1;
      r.l1 = stats.back().l1;
      r.val_rouge_mean = validation_rouge_mean(params, enc, valid, cfg.k_select);
      history.push_back(r);
    }
  } else {
    PretrainResult pre = pretrain_summarizer(params, enc, train, valid, cfg);
    history = pre.history;
    params = pre.best;
  }

  if (mode == "debias") {
    save_summarizer_checkpoint(out / "checkpoint.pretrain.bin", enc, table.dim, params);
    AlternatingResult alt = alternating_train(params, enc, train, valid, cfg);
    for (const auto& r : alt.history) history.push_back(r);
    for (std::size_t n = 1; n <= alt.pool.size(); ++n) {
      std::filesystem::path p = out / ("checkpoint.adv." + std::to_string(n) + ".bin");
      save_adversary_checkpoint(p, enc.d_model, enc.d_model, cfg.m_buckets, alt.pool[n - 1]);
    }
    save_summarizer_checkpoint(out / "checkpoint.final.bin", enc, table.dim,
                               alt.final_params);
    save_summarizer_checkpoint(out / "checkpoint.best.bin", enc, table.dim, alt.best_params);
    std::cout << "train: debias done; best iteration " << alt.best_iteration
              << " (val rouge-mean " << alt.best_val_rouge << ")\n";
  } else {
    save_summarizer_checkpoint(out / "checkpoint.best.bin", enc, table.dim, params);
    std::cout << "train: " << mode << " done\n";
  }
  write_train_log(history, out / "train.log.jsonl");
}

/// Evaluates a checkpoint on a labeled corpus and writes
/// report.eval.<checkpoint>.<corpus>.json with Lead and Oracle baselines.
inline EvalReport cmd_eval(const RunConfig& rc, const std::filesystem::path& checkpoint,
                           const std::filesystem::path& corpus_file, const std::string& mode) {
  const auto out = detail::ensure_out_dir(rc);
  echo_config(rc, out);
  SummarizerCheckpoint ckpt = load_summarizer_checkpoint(rc.resolve(checkpoint));
  const EncoderConfig enc = detail::effective_encoder(rc, mode);
  const VectorTable table = load_vectors(rc.vectors_path());
  detail::check_architecture(ckpt, enc, table.dim);

  const auto corpus_path = rc.resolve(corpus_file);
  TrainData data = prepare_data(load_corpus(corpus_path, "test"), table, rc.m_buckets);
  EvalReport rep = evaluate_model(ckpt.params, enc, data, rc.eval_settings(),
                                  corpus_path.stem().string(),
                                  detail::file_tag(rc.resolve(checkpoint)));
  const auto report_path =
      out / ("report.eval." + rep.model + "." + rep.corpus + ".json");
  save_eval_report(rep, report_path);
  std::cout << "eval: " << rep.model << " on " << rep.corpus << ": rouge-mean "
            << rep.rouge.mean() << " (lead " << rep.lead_rouge.mean() << ", oracle "
            << rep.oracle_rouge.mean() << ") -> " << report_path.string() << "\n";
  return rep;
}

/// Trains a fresh probe on the frozen checkpoint encoder and records held-out
/// bucket accuracy, updating the matching eval report when one exists.
inline double cmd_probe(const RunConfig& rc, const std::filesystem::path& checkpoint,
                        const std::filesystem::path& corpus_file, const std::string& mode) {
  const auto out = detail::ensure_out_dir(rc);
  echo_config(rc, out);
  SummarizerCheckpoint ckpt = load_summarizer_checkpoint(rc.resolve(checkpoint));
  const EncoderConfig enc = detail::effective_encoder(rc, mode);
  const VectorTable table = load_vectors(rc.vectors_path());
  detail::check_architecture(ckpt, enc, table.dim);

  const auto corpus_path = rc.resolve(corpus_file);
  TrainData data = prepare_data(load_corpus(corpus_path, "probe"), table, rc.m_buckets);
  const double acc =
      probe_bias(ckpt.params, enc, data, rc.training(), derive_seed(rc.seed, "probe"));

  const std::string model_tag = detail::file_tag(rc.resolve(checkpoint));
  const std::string corpus_tag = corpus_path.stem().string();
  const auto eval_path = out / ("report.eval." + model_tag + "." + corpus_tag + ".json");
  if (std::filesystem::exists(eval_path)) {
    std::ifstream is(eval_path);
    nlohmann::json j = nlohmann::json::parse(is);
    j["probe_accuracy"] = acc;
    std::ofstream os(eval_path);
    os << j.dump(2) << '\n';
  }
  const auto probe_path = out / ("report.probe." + model_tag + "." + corpus_tag + ".json");
  std::ofstream os(probe_path);
  if (!os) throw DataError("report: cannot write " + probe_path.string());
  os << nlohmann::json{{"model", model_tag},
                       {"corpus", corpus_tag},
                       {"probe_accuracy", acc}}
            .dump(2)
     << '\n';
  std::cout << "probe: " << model_tag << " on " << corpus_tag << ": bucket accuracy " << acc
            << "\n";
  return acc;
}

/// Paired bootstrap of report A against report B per metric; small p means A
/// is significantly better.
inline nlohmann::json cmd_compare(const RunConfig& rc, const std::filesystem::path& report_a,
                                  const std::filesystem::path& report_b) {
  const auto out = detail::ensure_out_dir(rc);
  echo_config(rc, out);
  auto load_report = [&](const std::filesystem::path& p) {
    std::ifstream is(rc.resolve(p));
    if (!is) throw DataError("compare: cannot open " + p.string());
    nlohmann::json j = nlohmann::json::parse(is, nullptr, false);
    if (j.is_discarded()) throw DataError("compare: " + p.string() + " is not valid JSON");
    return j;
  };
  const nlohmann::json ja = load_report(report_a);
  const nlohmann::json jb = load_report(report_b);

  std::map<std::string, std::map<std::string, double>> b_scores;
  for (const auto& pd : jb.at("per_doc"))
    b_scores[pd.at("id").get<std::string>()] = {{"r1", pd.at("r1").get<double>()},
                                                {"r2", pd.at("r2").get<double>()},
                                                {"rl", pd.at("rl").get<double>()},
                                                {"mean", pd.at("mean").get<double>()}};
  if (ja.at("per_doc").size() != b_scores.size())
    throw DataError("compare: reports cover different document sets");

  nlohmann::json result{{"report_a", ja.at("model")},
                        {"report_b", jb.at("model")},
                        {"corpus", ja.at("corpus")},
                        {"p", nlohmann::json::object()}};
  std::cout << "compare: " << ja.at("model").get<std::string>() << " vs "
            << jb.at("model").get<std::string>() << "\n";
  for (const std::string metric : {"r1", "r2", "rl", "mean"}) {
    std::vector<double> a_vals, b_vals;
    for (const auto& pd : ja.at("per_doc")) {
      const std::string id = pd.at("id").get<std::string>();
      auto it = b_scores.find(id);
      if (it == b_scores.end())
        throw DataError("compare: document " + id + " missing from second report");
      a_vals.push_back(pd.at(metric).get<double>());
      b_vals.push_back(it->second.at(metric));
    }
    const double p = bootstrap_significance(a_vals, b_vals, rc.n_resamples,
                                            derive_seed(rc.seed, "compare." + metric));
    result["p"][metric] = p;
    std::cout << "  " << metric << ": p = " << p << "\n";
  }
  std::ofstream os(out / "report.compare.json");
  if (!os) throw DataError("report: cannot write report.compare.json");
  os << result.dump(2) << '\n';
  return result;
}

}  // namespace unlead

#endif  // UNLEAD_COMMANDS_HPP
