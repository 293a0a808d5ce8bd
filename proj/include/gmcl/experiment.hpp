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

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "gmcl/data.hpp"
#include "gmcl/losses.hpp"
#include "gmcl/metrics.hpp"
#include "gmcl/model.hpp"
#include "gmcl/optim.hpp"

namespace gmcl {

struct StageSchedule {
  int epochs = 20;
  int batch_size = 128;  // contrastive stage: views (2N); classifier stage: samples
  double peak_lr = 1e-3;
  OneCycleShape shape;
};

// Everything needed to reproduce one two-stage run.
struct ExperimentConfig {
  SyntheticDatasetConfig dataset;
  double test_fraction = 0.2;
  ModelConfig model;
  ContrastiveLossConfig contrastive;
  AslConfig asl;
  AugmentConfig augment;
  StageSchedule contrastive_stage{20, 128, 1e-2, {}};
  StageSchedule classifier_stage{30, 128, 5e-2, {}};
  double threshold = 0.5;
  std::uint64_t seed = 0;  // initialization, shuffling and augmentation

  void validate() const;
};

ExperimentConfig default_experiment_config();

// Canonical JSON; materializes the co-occurrence matrix.
std::string config_to_json(const ExperimentConfig& cfg);
// Missing keys keep their defaults; unknown keys are rejected. Throws
// InputError on malformed content.
ExperimentConfig config_from_json(const std::string& text);
ExperimentConfig load_config(const std::filesystem::path& path);
std::uint64_t experiment_hash(const ExperimentConfig& cfg);
std::string hex64(std::uint64_t v);

struct ContrastiveEpoch {
  int epoch = 0;
  double total = 0.0;
  double nll = 0.0;
  double pcl = 0.0;
  double lr = 0.0;  // at the epoch's last step
  double mean_positive_set = 0.0;
};

struct ContrastiveRun {
  ModelParams params;
  std::vector<ContrastiveEpoch> curve;
  double mean_positive_set = 0.0;  // over every anchor of every step
};

// Trains encoder and mixture head on nll + lambda * pcl. Classifier tensors
// are left at their initial values.
ContrastiveRun train_contrastive(const ExperimentConfig& cfg, const Dataset& data,
                                 std::span<const std::size_t> train);

struct ClassifierEpoch {
  int epoch = 0;
  double asl = 0.0;
  double lr = 0.0;
};

struct ClassifierRun {
  ModelParams params;  // encoder + classifier; the mixture head is dropped
  std::vector<ClassifierEpoch> curve;
  std::uint64_t encoder_hash_before = 0;
  std::uint64_t encoder_hash_after = 0;
};

// Trains only the classifier on frozen encoder features with the asymmetric
// loss.
ClassifierRun train_classifier(const ExperimentConfig& cfg, const ModelParams& pretrained,
                               const Dataset& data, std::span<const std::size_t> train);

PredictionSet predict(const ModelParams& params, const Dataset& data,
                      std::span<const std::size_t> indices);
MetricsReport evaluate(const ModelParams& params, const Dataset& data,
                       std::span<const std::size_t> indices, double threshold);

}  // namespace gmcl
