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

#include "gmcl/overlap.hpp"

#include <algorithm>
#include <cmath>

#include "gmcl/errors.hpp"

namespace gmcl {
namespace {

struct Counts {
  double dot = 0.0;
  double a = 0.0;
  double b = 0.0;
};

Counts count_pair(const LabelVector& a, const LabelVector& b) {
  require(a.size() == b.size(), "label vectors differ in length");
  Counts c;
  for (std::size_t k = 0; k < a.size(); ++k) {
    const bool x = a[k];
    const bool y = b[k];
    c.dot += (x && y) ? 1.0 : 0.0;
    c.a += x ? 1.0 : 0.0;
    c.b += y ? 1.0 : 0.0;
  }
  return c;
}

}  // namespace

LabelVector::LabelVector(std::initializer_list<int> values) {
  bits.reserve(values.size());
  for (int v : values) bits.push_back(v != 0 ? 1 : 0);
}

std::size_t LabelVector::count() const {
  std::size_t n = 0;
  for (auto b : bits) n += b != 0;
  return n;
}

std::string_view to_string(OverlapMeasure m) {
  return m == OverlapMeasure::kJaccard ? "jaccard" : "cosine";
}

OverlapMeasure parse_overlap_measure(std::string_view name) {
  if (name == "jaccard") return OverlapMeasure::kJaccard;
  if (name == "cosine") return OverlapMeasure::kCosine;
  throw InputError("unknown overlap measure: " + std::string(name));
}

double jaccard(const LabelVector& a, const LabelVector& b) {
  const Counts c = count_pair(a, b);
  const double denom = c.a + c.b - c.dot;
  return denom > 0.0 ? c.dot / denom : 0.0;
}

double cosine(const LabelVector& a, const LabelVector& b) {
  const Counts c = count_pair(a, b);
  if (c.a == 0.0 || c.b == 0.0) return 0.0;
  return c.dot / std::sqrt(c.a * c.b);
}

double overlap(const LabelVector& a, const LabelVector& b, OverlapMeasure measure) {
  return measure == OverlapMeasure::kJaccard ? jaccard(a, b) : cosine(a, b);
}

std::vector<PositiveSet> positive_sets(std::span<const LabelVector> labels, double alpha,
                                       OverlapMeasure measure) {
  require(!labels.empty(), "positive sets need a nonempty batch");
  require(alpha >= 0.0 && alpha <= 1.0, "alpha must lie in [0, 1]");
  const std::size_t n = labels.size();
  std::vector<PositiveSet> sets(n);
  for (std::size_t i = 0; i < n; ++i) sets[i].anchor = i;
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = i + 1; j < n; ++j) {
      const double d = overlap(labels[i], labels[j], measure);
      // An empty label vector never becomes a positive, even at alpha = 0.
      if (d >= alpha && labels[i].count() > 0 && labels[j].count() > 0) {
        sets[i].members.push_back({j, d});
        sets[j].members.push_back({i, d});
      }
    }
  }
  for (auto& s : sets) {
    std::sort(s.members.begin(), s.members.end(),
              [](const PositiveMember& x, const PositiveMember& y) { return x.index < y.index; });
  }
  return sets;
}

}  // namespace gmcl
