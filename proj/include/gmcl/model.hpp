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
#include <string>
#include <vector>

#include "gmcl/gmm.hpp"
#include "gmcl/params.hpp"

namespace gmcl {

struct ModelConfig {
  int input_dim = 32;
  std::vector<int> encoder_hidden = {64};
  int embedding_dim = 32;  // H
  int mixture_dim = 8;     // n, dimensionality of the mixture space
  int num_classes = 6;     // C, also the number of mixture components
  std::vector<int> mdn_hidden = {128, 64};

  void validate() const;
  friend bool operator==(const ModelConfig&, const ModelConfig&) = default;
};

// Trainable tensors of encoder, mixture head and classifier:
//   encoder.layer<i>.{weight,bias}
//   mdn.hidden<i>.{weight,bias}, mdn.{pi,mu,var}.{weight,bias}, mdn.z.{weight,bias}
//   classifier.{weight,bias}
// Weights are (fan_in x fan_out); biases are (1 x fan_out).
struct ModelParams {
  ModelConfig config;
  std::uint64_t seed = 0;
  ParameterSet tensors;
};

inline constexpr const char* kEncoderPrefix = "encoder.";
inline constexpr const char* kMdnPrefix = "mdn.";
inline constexpr const char* kClassifierPrefix = "classifier.";

// Every tensor is uniform in [-1/sqrt(fan_in), 1/sqrt(fan_in)] except the
// variance pathway, whose weights are all 1 and whose bias is 0.
ModelParams init_params(const ModelConfig& config, std::uint64_t seed);

// Parameter count implied by the layer shapes.
std::size_t analytic_parameter_count(const ModelConfig& config);

// FNV-1a over names, shapes and raw bytes of the tensors under prefix.
std::uint64_t fingerprint(const ParameterSet& params, std::string_view prefix);

struct MdnOutput {
  Var pi;   // B x C, rows sum to one
  Var mu;   // B x C
  Var var;  // B x C, every entry >= 1
  Var z;    // B x n
};

// vars must come from bind() over params.tensors. Inputs are batched as rows.
Var encoder_forward(Tape& t, const ModelParams& params, const std::vector<Var>& vars, Var x);
MdnOutput mdn_forward(Tape& t, const ModelParams& params, const std::vector<Var>& vars, Var h);
Var classifier_forward(Tape& t, const ModelParams& params, const std::vector<Var>& vars, Var h);

// Inference helpers that run the same graph on constants.
Matrix encode(const ModelParams& params, const Matrix& x);
struct MdnValues {
  std::vector<IsoGaussianMixture> mixtures;
  Matrix z;
};
MdnValues mdn_values(const ModelParams& params, const Matrix& h);
Matrix classify(const ModelParams& params, const Matrix& h);

}  // namespace gmcl
