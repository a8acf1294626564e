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

#include <cstdint>
#include <iostream>
#include <string>

#include "CLI11.hpp"
#include "unlead/commands.hpp"
#include "unlead/config.hpp"
#include "unlead/errors.hpp"

namespace {

struct CliArgs {
  std::string config;
  std::string mode;
  std::string checkpoint;
  std::string corpus;
  std::string out;
  std::uint64_t seed = 0;
  std::vector<std::string> reports;
};

void add_common(CLI::App* sub, CliArgs& args, bool& has_mode, bool& has_seed, bool& has_out) {
  sub->add_option("--config", args.config, "JSON config file")->required();
  sub->add_option("--mode", args.mode, "mode override")->each([&](const std::string&) {
    has_mode = true;
  });
  sub->add_option("--seed", args.seed, "seed override")->each([&](const std::string&) {
    has_seed = true;
  });
  sub->add_option("--out", args.out, "output directory override")->each(
      [&](const std::string&) { has_out = true; });
  sub->add_option("--checkpoint", args.checkpoint, "model checkpoint path");
  sub->add_option("--corpus", args.corpus, "corpus file path");
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"lead-bias aware extractive summarization workbench"};
  app.require_subcommand(1);

  CliArgs args;
  bool has_mode = false, has_seed = false, has_out = false;

  CLI::App* gen = app.add_subcommand("gen", "generate synthetic corpora and vectors");
  CLI::App* oracle = app.add_subcommand("oracle", "add greedy oracle labels to a corpus");
  CLI::App* train = app.add_subcommand("train", "train a model variant");
  CLI::App* eval = app.add_subcommand("eval", "evaluate a checkpoint on a corpus");
  CLI::App* probe = app.add_subcommand("probe", "measure positional leakage of a checkpoint");
  CLI::App* compare = app.add_subcommand("compare", "paired bootstrap between two reports");
  for (CLI::App* sub : {gen, oracle, train, eval, probe, compare})
    add_common(sub, args, has_mode, has_seed, has_out);
  compare->add_option("reports", args.reports, "two eval report files")->expected(2);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }

  try {
    unlead::RunConfig rc = unlead::load_run_config(args.config);
    if (has_seed) rc.seed = args.seed;
    if (has_out && !gen->parsed()) rc.pin_data_paths();
    if (has_out) rc.out_dir = args.out;
    if (has_mode) rc.mode = args.mode;

    if (gen->parsed()) {
      unlead::cmd_gen(rc);
    } else if (oracle->parsed()) {
      if (args.corpus.empty()) throw unlead::UsageError("oracle: --corpus is required");
      unlead::cmd_oracle(rc, args.corpus);
    } else if (train->parsed()) {
      unlead::cmd_train(rc, rc.mode);
    } else if (eval->parsed()) {
      if (args.checkpoint.empty()) throw unlead::UsageError("eval: --checkpoint is required");
      if (args.corpus.empty()) throw unlead::UsageError("eval: --corpus is required");
      unlead::cmd_eval(rc, args.checkpoint, args.corpus, rc.mode);
    } else if (probe->parsed()) {
      if (args.checkpoint.empty()) throw unlead::UsageError("probe: --checkpoint is required");
      if (args.corpus.empty()) throw unlead::UsageError("probe: --corpus is required");
      unlead::cmd_probe(rc, args.checkpoint, args.corpus, rc.mode);
    } else if (compare->parsed()) {
      unlead::cmd_compare(rc, args.reports[0], args.reports[1]);
    }
    return 0;
  } catch (const unlead::UsageError& e) {
    std::cerr << "usage error: " << e.what() << "\n";
    return 2;
  } catch (const unlead::DataError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
}
