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

#include <string>

#include "gmcl/params.hpp"

namespace gmcl {

struct GradCheckReport {
  double max_relative_error = 0.0;
  std::string worst_tensor;
  Eigen::Index worst_row = 0;
  Eigen::Index worst_col = 0;
  double analytic = 0.0;
  double numeric = 0.0;
  std::size_t checked = 0;
};

// Compares backward() against central differences with the given step on
// every scalar of the selected tensors. Relative error per entry is
// |a - n| / max(|a|, |n|, 1e-8).
GradCheckReport finite_diff_check(const ParameterSet& params, std::span<const std::size_t> indices,
                                  const LossBuilder& loss, double step = 1e-5);

}  // namespace gmcl
