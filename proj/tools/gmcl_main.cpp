// Copyright 2026 The gmcl Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     https://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include <cstdint>
#include <filesystem>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "gmcl/commands.hpp"

namespace {

struct CommonFlags {
  std::string config;
  std::optional<std::uint64_t> seed;
  std::string out = "out";
};

void add_common(CLI::App* cmd, CommonFlags& flags) {
  cmd->add_option("--config", flags.config, "Experiment config (JSON); defaults apply when omitted");
  cmd->add_option("--seed", flags.seed, "Override the training seed");
  cmd->add_option("--out", flags.out, "Output directory")->capture_default_str();
}

gmcl::ExperimentConfig resolve(const CommonFlags& flags) {
  gmcl::ExperimentConfig cfg =
      flags.config.empty() ? gmcl::default_experiment_config() : gmcl::load_config(flags.config);
  if (flags.seed) cfg.seed = *flags.seed;
  return cfg;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Gaussian-mixture contrastive pretraining and multi-label linear probing"};
  app.require_subcommand(1);

  CommonFlags flags;
  std::string checkpoint;
  std::string param;
  std::vector<std::string> values;
  std::string split = "test";
  std::string dataset;

  auto* contrastive = app.add_subcommand("train-contrastive", "Train encoder and mixture head");
  add_common(contrastive, flags);

  auto* classifier = app.add_subcommand("train-classifier", "Train a linear head on the frozen encoder");
  add_common(classifier, flags);
  classifier->add_option("--checkpoint", checkpoint, "Contrastive-stage checkpoint")->required();

  auto* evaluate = app.add_subcommand("evaluate", "Score a classifier checkpoint");
  add_common(evaluate, flags);
  evaluate->add_option("--checkpoint", checkpoint, "Classifier checkpoint")->required();
  evaluate->add_option("--split", split, "train, test or all")->capture_default_str();
  evaluate->add_option("--dataset", dataset, "Score every record of an exported dataset file");

  auto* ablate = app.add_subcommand("ablate", "Sweep one loss hyperparameter over both stages");
  add_common(ablate, flags);
  ablate->add_option("--param", param, "tau, alpha, lambda or measure")->required();
  ablate->add_option("--values", values, "Values to sweep (at least two)")->required()->delimiter(',');

  auto* export_data = app.add_subcommand("export-dataset", "Write the configured synthetic dataset");
  add_common(export_data, flags);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? gmcl::kExitOk : gmcl::kExitConfig;
  }

  return gmcl::run_guarded(std::cerr, [&]() -> int {
    const gmcl::ExperimentConfig cfg = resolve(flags);
    const std::filesystem::path out = flags.out;
    if (*contrastive) return gmcl::cmd_train_contrastive(cfg, out, std::cerr);
    if (*classifier) return gmcl::cmd_train_classifier(cfg, checkpoint, out, std::cerr);
    if (*evaluate) {
      std::optional<std::filesystem::path> file;
      if (!dataset.empty()) file = dataset;
      return gmcl::cmd_evaluate(cfg, checkpoint, out, split, file, std::cerr);
    }
    if (*ablate) return gmcl::cmd_ablate(cfg, param, values, out, std::cerr);
    return gmcl::cmd_export_dataset(cfg, out / "dataset.txt", std::cerr);
  });
}
