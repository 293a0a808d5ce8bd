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

#include "gmcl/errors.hpp"

#include <cmath>

namespace gmcl {

void require(bool condition, const std::string& message) {
  if (!condition) throw InputError(message);
}

void require_finite(double value, const std::string& context) {
  if (!std::isfinite(value)) throw NumericError("non-finite value in " + context);
}

}  // namespace gmcl
