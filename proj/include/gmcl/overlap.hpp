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
#include <initializer_list>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace gmcl {

// Multi-hot class membership vector.
struct LabelVector {
  std::vector<std::uint8_t> bits;

  LabelVector() = default;
  explicit LabelVector(std::size_t num_classes) : bits(num_classes, 0) {}
  LabelVector(std::initializer_list<int> values);

  std::size_t size() const { return bits.size(); }
  std::size_t count() const;
  bool operator[](std::size_t c) const { return bits[c] != 0; }
  friend bool operator==(const LabelVector&, const LabelVector&) = default;
};

enum class OverlapMeasure { kJaccard, kCosine };

std::string_view to_string(OverlapMeasure m);
OverlapMeasure parse_overlap_measure(std::string_view name);

// a.b / (|a|^2 + |b|^2 - a.b); 0 when both vectors are empty.
double jaccard(const LabelVector& a, const LabelVector& b);
// a.b / (|a| |b|); 0 when either vector is empty.
double cosine(const LabelVector& a, const LabelVector& b);
double overlap(const LabelVector& a, const LabelVector& b, OverlapMeasure measure);

struct PositiveMember {
  std::size_t index = 0;
  double weight = 0.0;
  friend bool operator==(const PositiveMember&, const PositiveMember&) = default;
};

struct PositiveSet {
  std::size_t anchor = 0;
  std::vector<PositiveMember> members;  // ascending index
};

// For each anchor i, every j != i whose overlap with i is >= alpha, weighted
// by that overlap.
std::vector<PositiveSet> positive_sets(std::span<const LabelVector> labels, double alpha,
                                       OverlapMeasure measure);

}  // namespace gmcl
