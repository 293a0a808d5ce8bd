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

#include "gmcl/params.hpp"

#include <bit>
#include <cstdint>
#include <string>
#include <utility>

#include "gmcl/errors.hpp"

namespace gmcl {

Matrix& ParameterSet::add(std::string name, Matrix value) {
  require(!contains(name), "duplicate parameter name: " + name);
  tensors_.push_back(NamedTensor{std::move(name), std::move(value)});
  return tensors_.back().value;
}

std::size_t ParameterSet::index_of(std::string_view name) const {
  for (std::size_t i = 0; i < tensors_.size(); ++i)
    if (tensors_[i].name == name) return i;
  throw InputError("unknown parameter: " + std::string(name));
}

bool ParameterSet::contains(std::string_view name) const {
  for (const auto& t : tensors_)
    if (t.name == name) return true;
  return false;
}

std::vector<std::size_t> ParameterSet::select(std::string_view prefix) const {
  std::vector<std::size_t> out;
  for (std::size_t i = 0; i < tensors_.size(); ++i)
    if (std::string_view(tensors_[i].name).starts_with(prefix)) out.push_back(i);
  return out;
}

std::size_t ParameterSet::scalar_count() const {
  std::size_t n = 0;
  for (const auto& t : tensors_) n += static_cast<std::size_t>(t.value.size());
  return n;
}

bool operator==(const ParameterSet& a, const ParameterSet& b) {
  if (a.size() != b.size()) return false;
  for (std::size_t i = 0; i < a.size(); ++i) {
    const auto& x = a.tensors_[i];
    const auto& y = b.tensors_[i];
    if (x.name != y.name || x.value.rows() != y.value.rows() || x.value.cols() != y.value.cols())
      return false;
    // Bitwise comparison is what determinism checks need.
    for (Eigen::Index k = 0; k < x.value.size(); ++k)
      if (std::bit_cast<std::uint64_t>(x.value.data()[k]) != std::bit_cast<std::uint64_t>(y.value.data()[k]))
        return false;
  }
  return true;
}

std::vector<Var> bind(Tape& tape, const ParameterSet& params, std::span<const std::size_t> trainable) {
  std::vector<bool> is_trainable(params.size(), false);
  for (std::size_t i : trainable) {
    require(i < params.size(), "trainable index out of range");
    is_trainable[i] = true;
  }
  std::vector<Var> vars;
  vars.reserve(params.size());
  for (std::size_t i = 0; i < params.size(); ++i) {
    vars.push_back(is_trainable[i] ? tape.variable(params[i].value, params[i].name)
                                   : tape.constant(params[i].value, params[i].name));
  }
  return vars;
}

LossAndGradients backward(const ParameterSet& params, std::span<const std::size_t> trainable,
                          const LossBuilder& loss) {
  Tape tape;
  const std::vector<Var> vars = bind(tape, params, trainable);
  const Var out = loss(tape, vars);
  tape.backward(out);
  LossAndGradients result;
  result.value = tape.scalar(out);
  result.gradients.reserve(trainable.size());
  for (std::size_t i : trainable) result.gradients.push_back(tape.grad(vars[i]));
  return result;
}

double loss_value(const ParameterSet& params, std::span<const std::size_t> trainable,
                  const LossBuilder& loss) {
  Tape tape;
  const std::vector<Var> vars = bind(tape, params, trainable);
  return tape.scalar(loss(tape, vars));
}

}  // namespace gmcl
