// Copyright 2026 The latn Authors. All Rights Reserved.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

// latn: generate synthetic data, train, evaluate and analyze local/global
// gated self-attention video classifiers.
//
//   latn gendata --config exp.json [--seed N] [--out-dir DIR]
//   latn train   --config exp.json [--seed N] [--variant V] [--mask SPEC] [--out-dir DIR]
//   latn eval    --checkpoint CKPT --data SPLIT_DIR --out-dir DIR
//   latn analyze --checkpoint CKPT --data SPLIT_DIR --out-dir DIR [--videos N] [--window W] [--modality M]

#include <iostream>
#include <optional>
#include <string>

#include "CLI11.hpp"

#include "latn/error.hpp"
#include "latn/experiment.hpp"

namespace {

struct CommonFlags {
  std::string config;
  std::optional<std::uint64_t> seed;
  std::optional<std::string> variant;
  std::optional<std::string> mask;
  std::optional<std::string> out_dir;
};

latn::ExperimentConfig load_config(const CommonFlags& flags, bool for_gendata) {
  latn::ExperimentConfig config = latn::ExperimentConfig::load(flags.config);
  latn::Overrides overrides;
  overrides.seed = flags.seed;
  overrides.variant = flags.variant;
  overrides.mask = flags.mask;
  if (flags.out_dir) overrides.out_dir = *flags.out_dir;
  latn::apply_overrides(config, overrides, for_gendata);
  return config;
}

void print_report(const latn::EvalReport& r) {
  std::cout << "GAP " << r.gap << "  MAP " << r.map << "  PERR " << r.perr << "  Hit@1 " << r.hit1 << '\n';
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Local/global gated self-attention for video classification"};
  app.require_subcommand(1);

  CommonFlags gen_flags, train_flags;
  auto* gendata = app.add_subcommand("gendata", "Generate the synthetic motif dataset");
  gendata->add_option("--config", gen_flags.config, "Experiment config (JSON)")->required();
  gendata->add_option("--seed", gen_flags.seed, "Override data.seed");
  gendata->add_option("--out-dir", gen_flags.out_dir, "Override data.dir");

  auto* train = app.add_subcommand("train", "Train a classifier");
  train->add_option("--config", train_flags.config, "Experiment config (JSON)")->required();
  train->add_option("--seed", train_flags.seed, "Override train.seed");
  train->add_option("--variant", train_flags.variant, "baseline|shareatt|gateatt|gateop|local");
  train->add_option("--mask", train_flags.mask, "bd:W | tp:W | td:W:L (comma list for shareatt)");
  train->add_option("--out-dir", train_flags.out_dir, "Override out_dir");

  std::string checkpoint, data, out_dir;
  auto* eval = app.add_subcommand("eval", "Evaluate a checkpoint on one dataset split");
  eval->add_option("--checkpoint", checkpoint)->required();
  eval->add_option("--data", data, "Split directory holding manifest.jsonl")->required();
  eval->add_option("--out-dir", out_dir)->required();

  latn::AnalysisOptions analysis;
  auto* analyze = app.add_subcommand("analyze", "Attention profiles, gradient locality and similarity maps");
  analyze->add_option("--checkpoint", checkpoint)->required();
  analyze->add_option("--data", data, "Split directory holding manifest.jsonl")->required();
  analyze->add_option("--out-dir", out_dir)->required();
  analyze->add_option("--videos", analysis.num_videos, "Number of videos to analyze");
  analyze->add_option("--window", analysis.window, "Half-width of N_i (0: model default)");
  analyze->add_option("--modality", analysis.modality, "visual|audio");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? latn::kExitOk : latn::kExitUsage;
  }

  try {
    if (gendata->parsed()) {
      const latn::ExperimentConfig config = load_config(gen_flags, true);
      latn::run_gendata(config);
      std::cout << "wrote " << config.synth.num_videos << " videos to " << config.data_dir.string() << '\n';
    } else if (train->parsed()) {
      const latn::ExperimentConfig config = load_config(train_flags, false);
      const latn::TrainResult result = latn::run_train(config, &std::cout);
      std::cout << "best val GAP " << result.best_val_gap << " at iteration " << result.best_iteration
                << "; checkpoint in " << config.out_dir.string() << '\n';
    } else if (eval->parsed()) {
      print_report(latn::run_eval(checkpoint, data, out_dir));
    } else if (analyze->parsed()) {
      const latn::AnalysisSummary s = latn::run_analyze(checkpoint, data, out_dir, analysis);
      std::cout << "analyzed " << s.videos << " videos; mean S_i " << s.mean_locality << " (window " << s.window
                << ")\n";
    }
  } catch (const latn::Error& e) {
    std::cerr << "latn: " << e.what() << '\n';
    return latn::exit_code_for(e);
  } catch (const std::exception& e) {
    std::cerr << "latn: " << e.what() << '\n';
    return latn::kExitRuntime;
  }
  return latn::kExitOk;
}
