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


// Small end-to-end instances of the stage-one objective for gradient checks.

#pragma once

#include <cstdint>
#include <random>
#include <vector>

#include "gmcl/losses.hpp"
#include "gmcl/model.hpp"
#include "gmcl/params.hpp"
#include "support/oracles.hpp"

namespace gmcl::testing {

struct ToyInstance {
  ModelParams params;
  Matrix inputs;                    // 2N x input_dim
  std::vector<LabelVector> labels;  // views 2k and 2k+1 share labels
  ContrastiveLossConfig loss;
  std::vector<std::size_t> trainable;  // encoder and mixture head
  std::size_t trainable_scalars = 0;

  LossBuilder builder() const {
    return [this](Tape& t, const std::vector<Var>& vars) {
      const Var x = t.constant(inputs, "x");
      const Var h = encoder_forward(t, params, vars, x);
      const MdnOutput m = mdn_forward(t, params, vars, h);
      const Var nll = nll_loss(t, m.pi, m.mu, m.var, m.z);
      const Var pcl = pcl_loss(t, m.pi, m.mu, m.var, params.config.mixture_dim, labels, loss);
      return total_loss(t, nll, pcl, loss.lambda);
    };
  }
};

// 2N in {4, 6, 8}, C in {2, 3}, n in {2, 3}; lambda 0.3, tau 0.2, alpha 0.6.
inline ToyInstance make_toy_instance(std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  ToyInstance inst;
  ModelConfig cfg;
  cfg.input_dim = 3;
  cfg.encoder_hidden = {4};
  cfg.embedding_dim = 3;
  cfg.num_classes = 2 + static_cast<int>(seed % 2);
  cfg.mixture_dim = 2 + static_cast<int>((seed / 2) % 2);
  cfg.mdn_hidden = {5, 4};
  inst.params = init_params(cfg, seed);
  // Spread the mixture means so similarities are not all close to one.
  std::normal_distribution<double> spread(0.0, 1.0);
  Matrix& mu_w = inst.params.tensors.at("mdn.mu.weight");
  for (Eigen::Index i = 0; i < mu_w.size(); ++i) mu_w(i) += spread(rng);

  const std::size_t views = 4 + 2 * (seed % 3);
  std::normal_distribution<double> nx(0.0, 1.0);
  inst.inputs = Matrix(static_cast<Eigen::Index>(views), cfg.input_dim);
  for (Eigen::Index i = 0; i < inst.inputs.size(); ++i) inst.inputs(i) = nx(rng);
  for (std::size_t k = 0; k < views / 2; ++k) {
    const LabelVector y = random_labels(rng, static_cast<std::size_t>(cfg.num_classes), 0.6);
    inst.labels.push_back(y);
    inst.labels.push_back(y);
  }
  inst.loss.lambda = 0.3;
  inst.loss.tau = 0.2;
  inst.loss.alpha = 0.6;
  inst.trainable = inst.params.tensors.select(kEncoderPrefix);
  for (std::size_t i : inst.params.tensors.select(kMdnPrefix)) inst.trainable.push_back(i);
  for (std::size_t i : inst.trainable) inst.trainable_scalars += static_cast<std::size_t>(inst.params.tensors[i].value.size());
  return inst;
}

}  // namespace gmcl::testing
