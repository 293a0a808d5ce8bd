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
#include <vector>

#include "gmcl/params.hpp"

namespace gmcl {

struct AdamConfig {
  double beta1 = 0.9;
  double beta2 = 0.999;
  double epsilon = 1e-8;
};

struct OptimizerState {
  AdamConfig adam;
  std::vector<std::size_t> tensor_indices;  // which tensors this optimizer owns
  std::vector<Matrix> first_moment;
  std::vector<Matrix> second_moment;
  std::int64_t step = 0;
};

OptimizerState make_optimizer(const ParameterSet& params, std::vector<std::size_t> indices,
                              AdamConfig adam = {});

// One bias-corrected Adam update of the owned tensors. gradients are aligned
// with state.tensor_indices.
void adam_step(OptimizerState& state, ParameterSet& params, std::span<const Matrix> gradients,
               double lr);

struct OneCycleShape {
  double warmup_fraction = 0.3;
  double initial_div = 25.0;  // starting lr = peak / initial_div
  double final_div = 1e4;     // terminal lr = peak / final_div
};

// Cosine warmup from peak/initial_div to peak over the first warmup_fraction
// of the steps, then cosine decay to peak/final_div at step == total_steps.
double one_cycle_lr(std::int64_t step, std::int64_t total_steps, double peak_lr,
                    const OneCycleShape& shape = {});

}  // namespace gmcl
