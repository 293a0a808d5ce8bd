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

#include "gmcl/gradcheck.hpp"

#include <algorithm>
#include <cmath>

#include "gmcl/errors.hpp"

namespace gmcl {

GradCheckReport finite_diff_check(const ParameterSet& params, std::span<const std::size_t> indices,
                                  const LossBuilder& loss, double step) {
  require(step > 0.0, "finite_diff_check: step must be positive");
  const LossAndGradients analytic = backward(params, indices, loss);
  ParameterSet probe = params;
  GradCheckReport report;
  for (std::size_t k = 0; k < indices.size(); ++k) {
    Matrix& p = probe[indices[k]].value;
    for (Eigen::Index c = 0; c < p.cols(); ++c) {
      for (Eigen::Index r = 0; r < p.rows(); ++r) {
        const double original = p(r, c);
        p(r, c) = original + step;
        const double up = loss_value(probe, indices, loss);
        p(r, c) = original - step;
        const double down = loss_value(probe, indices, loss);
        p(r, c) = original;
        const double numeric = (up - down) / (2.0 * step);
        const double a = analytic.gradients[k](r, c);
        const double denom = std::max({std::abs(a), std::abs(numeric), 1e-8});
        const double err = std::abs(a - numeric) / denom;
        ++report.checked;
        if (err > report.max_relative_error || report.checked == 1) {
          report.max_relative_error = err;
          report.worst_tensor = probe[indices[k]].name;
          report.worst_row = r;
          report.worst_col = c;
          report.analytic = a;
          report.numeric = numeric;
        }
      }
    }
  }
  return report;
}

}  // namespace gmcl
