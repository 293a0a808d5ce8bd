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

#include "gmcl/optim.hpp"

#include <cmath>
#include <numbers>

#include "gmcl/errors.hpp"

namespace gmcl {

OptimizerState make_optimizer(const ParameterSet& params, std::vector<std::size_t> indices,
                              AdamConfig adam) {
  OptimizerState state;
  state.adam = adam;
  for (std::size_t i : indices) {
    require(i < params.size(), "optimizer tensor index out of range");
    const Matrix& p = params[i].value;
    state.first_moment.push_back(Matrix::Zero(p.rows(), p.cols()));
    state.second_moment.push_back(Matrix::Zero(p.rows(), p.cols()));
  }
  state.tensor_indices = std::move(indices);
  return state;
}

void adam_step(OptimizerState& state, ParameterSet& params, std::span<const Matrix> gradients,
               double lr) {
  require(gradients.size() == state.tensor_indices.size(), "adam_step: gradient count mismatch");
  require(lr > 0.0 && std::isfinite(lr), "adam_step: learning rate must be positive");
  const AdamConfig& c = state.adam;
  ++state.step;
  const double t = static_cast<double>(state.step);
  const double correction1 = 1.0 - std::pow(c.beta1, t);
  const double correction2 = 1.0 - std::pow(c.beta2, t);
  for (std::size_t k = 0; k < gradients.size(); ++k) {
    Matrix& p = params[state.tensor_indices[k]].value;
    const Matrix& g = gradients[k];
    require(g.rows() == p.rows() && g.cols() == p.cols(),
            "adam_step: gradient shape mismatch for " + params[state.tensor_indices[k]].name);
    Matrix& m = state.first_moment[k];
    Matrix& v = state.second_moment[k];
    m = c.beta1 * m + (1.0 - c.beta1) * g;
    v = c.beta2 * v + (1.0 - c.beta2) * g.cwiseProduct(g);
    p.array() -= lr * (m.array() / correction1) /
                 ((v.array() / correction2).sqrt() + c.epsilon);
  }
}

namespace {

double cosine_anneal(double start, double end, double fraction) {
  return end + (start - end) * 0.5 * (1.0 + std::cos(std::numbers::pi * fraction));
}

}  // namespace

double one_cycle_lr(std::int64_t step, std::int64_t total_steps, double peak_lr,
                    const OneCycleShape& shape) {
  require(total_steps >= 1, "one_cycle_lr: total_steps must be positive");
  require(step >= 0 && step <= total_steps, "one_cycle_lr: step out of range");
  require(peak_lr > 0.0, "one_cycle_lr: peak learning rate must be positive");
  require(shape.warmup_fraction > 0.0 && shape.warmup_fraction < 1.0,
          "one_cycle_lr: warmup fraction must lie in (0, 1)");
  const double initial = peak_lr / shape.initial_div;
  const double terminal = peak_lr / shape.final_div;
  const double warm = shape.warmup_fraction * static_cast<double>(total_steps);
  const double s = static_cast<double>(step);
  if (s <= warm) return cosine_anneal(initial, peak_lr, s / warm);
  return cosine_anneal(peak_lr, terminal, (s - warm) / (static_cast<double>(total_steps) - warm));
}

}  // namespace gmcl
