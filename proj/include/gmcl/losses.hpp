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
#include <span>
#include <string_view>
#include <vector>

#include "gmcl/gmm.hpp"
#include "gmcl/overlap.hpp"
#include "gmcl/tape.hpp"

namespace gmcl {

enum class SimilarityBackend {
  kCorrelation,     // closed form, differentiable
  kBhattacharyyaMc  // Monte-Carlo estimate, value only
};

std::string_view to_string(SimilarityBackend s);
SimilarityBackend parse_similarity_backend(std::string_view name);

struct ContrastiveLossConfig {
  double tau = 0.2;
  double alpha = 0.6;
  double lambda = 0.3;
  OverlapMeasure measure = OverlapMeasure::kJaccard;
  SimilarityBackend sim = SimilarityBackend::kCorrelation;
  // Only used by kBhattacharyyaMc.
  std::int64_t mc_samples = 4096;
  std::uint64_t mc_seed = 0;

  void validate() const;
};

struct AslConfig {
  double gamma_pos = 0.0;
  double gamma_neg = 4.0;
  double margin = 0.05;

  void validate() const;
};

struct NllResult {
  double value = 0.0;
  std::vector<MixtureGradient> mixture_grads;
  std::vector<std::vector<double>> target_grads;
};

// sum_i -log p_i(z_i), with gradients w.r.t. every mixture parameter and
// every target coordinate.
NllResult nll_loss(std::span<const IsoGaussianMixture> mixtures,
                   std::span<const std::vector<double>> targets);

struct PclResult {
  double value = 0.0;
  std::vector<MixtureGradient> mixture_grads;  // empty unless requested
  std::vector<PositiveSet> positives;
  Matrix similarity;                           // B x B, diagonal unused
};

// Overlap-weighted contrastive loss over mixture similarities. Anchors whose
// positive set is empty contribute nothing; the softmax denominator runs over
// every other view in the batch.
PclResult pcl_loss(std::span<const IsoGaussianMixture> mixtures, std::span<const LabelVector> labels,
                   const ContrastiveLossConfig& cfg, bool with_gradients = true);

double total_loss(double nll, double pcl, double lambda);

struct AslResult {
  double value = 0.0;
  Matrix prob_grads;  // same shape as the probabilities
};

// Asymmetric loss summed over classes and samples. probabilities is
// samples x classes.
AslResult asl_loss(const Matrix& probabilities, std::span<const LabelVector> labels,
                   const AslConfig& cfg);

// Row i of pi/mu/var holds mixture i's component parameters.
std::vector<IsoGaussianMixture> mixtures_from_rows(const Matrix& pi, const Matrix& mu,
                                                   const Matrix& var, int dim);

// Tape adapters. pi, mu, var are B x C; z is B x n.
Var nll_loss(Tape& t, Var pi, Var mu, Var var, Var z);
Var pcl_loss(Tape& t, Var pi, Var mu, Var var, int dim, std::span<const LabelVector> labels,
             const ContrastiveLossConfig& cfg);
Var total_loss(Tape& t, Var nll, Var pcl, double lambda);
Var asl_loss(Tape& t, Var probabilities, std::span<const LabelVector> labels, const AslConfig& cfg);

}  // namespace gmcl
