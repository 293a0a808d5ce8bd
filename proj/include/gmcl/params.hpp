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

#include <functional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "gmcl/tape.hpp"

namespace gmcl {

struct NamedTensor {
  std::string name;
  Matrix value;
};

// Ordered collection of named trainable tensors.
class ParameterSet {
 public:
  Matrix& add(std::string name, Matrix value);

  std::size_t size() const { return tensors_.size(); }
  std::size_t index_of(std::string_view name) const;
  bool contains(std::string_view name) const;
  Matrix& at(std::string_view name) { return tensors_[index_of(name)].value; }
  const Matrix& at(std::string_view name) const { return tensors_[index_of(name)].value; }

  NamedTensor& operator[](std::size_t i) { return tensors_[i]; }
  const NamedTensor& operator[](std::size_t i) const { return tensors_[i]; }

  auto begin() { return tensors_.begin(); }
  auto end() { return tensors_.end(); }
  auto begin() const { return tensors_.begin(); }
  auto end() const { return tensors_.end(); }

  // Indices of tensors whose name starts with prefix, in order.
  std::vector<std::size_t> select(std::string_view prefix) const;
  std::size_t scalar_count() const;

  friend bool operator==(const ParameterSet& a, const ParameterSet& b);

 private:
  std::vector<NamedTensor> tensors_;
};

// Puts every tensor on the tape, aligned with the set's order. Tensors listed
// in trainable become variables; the rest are recorded as constants.
std::vector<Var> bind(Tape& tape, const ParameterSet& params, std::span<const std::size_t> trainable);

// Builds a scalar loss on the tape from the bound tensors (one Var per tensor
// in the parameter set).
using LossBuilder = std::function<Var(Tape&, const std::vector<Var>&)>;

struct LossAndGradients {
  double value = 0.0;
  std::vector<Matrix> gradients;  // aligned with the trainable indices
};

// Records the loss, runs the reverse pass and collects one gradient per
// trainable tensor, each shaped like its parameter.
LossAndGradients backward(const ParameterSet& params, std::span<const std::size_t> trainable,
                          const LossBuilder& loss);

double loss_value(const ParameterSet& params, std::span<const std::size_t> trainable,
                  const LossBuilder& loss);

}  // namespace gmcl
