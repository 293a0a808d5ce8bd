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

#pragma once

#include <filesystem>
#include <functional>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "gmcl/experiment.hpp"

namespace gmcl {

// Process exit codes of the command-line tool.
enum ExitCode : int {
  kExitOk = 0,
  kExitConfig = 2,   // invalid flags or configuration
  kExitIo = 3,       // unreadable/unwritable files, malformed checkpoints
  kExitNumeric = 4,  // non-finite loss or gradient
  kExitSweep = 5,    // at least one ablation row failed
};

// Runs fn, translating InputError / IoError / NumericError into exit codes
// and printing the diagnostic to log.
int run_guarded(std::ostream& log, const std::function<int()>& fn);

// Output files. Every CSV and report starts with a
// "# config_hash=<hex> seed=<n>" comment line.
inline constexpr const char* kConfigEcho = "config_echo.json";
inline constexpr const char* kContrastiveCheckpoint = "contrastive.ckpt";
inline constexpr const char* kContrastiveCurve = "contrastive_loss.csv";
inline constexpr const char* kClassifierCheckpoint = "classifier.ckpt";
inline constexpr const char* kClassifierCurve = "classifier_loss.csv";
inline constexpr const char* kMetricsReport = "metrics.txt";
inline constexpr const char* kPerClassTable = "per_class.csv";

std::string provenance_line(const ExperimentConfig& cfg);

// Stage one: writes contrastive.ckpt, contrastive_loss.csv, config_echo.json.
int cmd_train_contrastive(const ExperimentConfig& cfg, const std::filesystem::path& out,
                          std::ostream& log);

// Stage two on a stage-one checkpoint: writes classifier.ckpt,
// classifier_loss.csv, metrics.txt and per_class.csv for the held-out split.
int cmd_train_classifier(const ExperimentConfig& cfg, const std::filesystem::path& checkpoint,
                         const std::filesystem::path& out, std::ostream& log);

// Scores a classifier checkpoint. split is "train", "test" or "all" over the
// configured synthetic dataset; a dataset file, when given, is scored whole.
// Writes evaluation_<split>.txt and per_class_<split>.csv.
int cmd_evaluate(const ExperimentConfig& cfg, const std::filesystem::path& checkpoint,
                 const std::filesystem::path& out, const std::string& split,
                 const std::optional<std::filesystem::path>& dataset, std::ostream& log);

// Runs both stages once per value of param (tau, alpha, lambda or measure)
// with shared seeds; writes ablation_<param>.csv.
int cmd_ablate(const ExperimentConfig& cfg, const std::string& param,
               const std::vector<std::string>& values, const std::filesystem::path& out,
               std::ostream& log);

// Writes the configured synthetic dataset in the line format of export_dataset.
int cmd_export_dataset(const ExperimentConfig& cfg, const std::filesystem::path& out,
                       std::ostream& log);

// Applies one sweep value to a copy of cfg; throws InputError for unknown
// parameters or unparsable values.
ExperimentConfig with_sweep_value(const ExperimentConfig& cfg, const std::string& param,
                                  const std::string& value);

}  // namespace gmcl
