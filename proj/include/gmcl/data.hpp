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
#include <filesystem>
#include <span>
#include <string>
#include <vector>

#include "gmcl/overlap.hpp"
#include "gmcl/tape.hpp"

namespace gmcl {

struct SyntheticDatasetConfig {
  std::int64_t num_samples = 2000;
  int num_classes = 6;
  int input_dim = 32;
  // C x C symmetric; diagonal = marginal class frequencies, off-diagonal =
  // pairwise co-occurrence probabilities. Empty means grouped_cooccurrence().
  Matrix cooccurrence;
  // C x input_dim; empty means random_prototypes() drawn from the seed.
  Matrix prototypes;
  double noise_scale = 0.5;
  std::uint64_t seed = 0;

  void validate() const;
};

// Classes are grouped into consecutive pairs that co-occur strongly; pairs
// are independent of each other.
Matrix grouped_cooccurrence(int num_classes, double marginal, double within_pair);
// Independent classes with the given marginal.
Matrix independent_cooccurrence(int num_classes, double marginal);
// Unit-norm Gaussian prototype per class.
Matrix random_prototypes(int num_classes, int input_dim, std::uint64_t seed);

struct Dataset {
  Matrix features;                  // N x input_dim
  std::vector<LabelVector> labels;  // N label vectors
  std::uint64_t config_hash = 0;

  std::size_t size() const { return labels.size(); }
  int num_classes() const { return labels.empty() ? 0 : static_cast<int>(labels[0].size()); }
  friend bool operator==(const Dataset&, const Dataset&);
};

std::string canonical_text(const SyntheticDatasetConfig& cfg);
std::uint64_t config_hash(const SyntheticDatasetConfig& cfg);

// Label sets are drawn class by class in a random order; each class's
// inclusion odds are its marginal odds times the pairwise likelihood ratios of
// the classes already decided. Independent matrices are reproduced exactly.
// An empty draw gets one class picked in proportion to the marginals, which
// leaves every pairwise frequency unchanged.
Dataset generate_synthetic(const SyntheticDatasetConfig& cfg);

struct AugmentConfig {
  double jitter = 0.05;       // std-dev of additive Gaussian noise
  double dropout = 0.1;       // per-coordinate zeroing probability
  double scale_range = 0.1;   // global scale drawn from [1 - r, 1 + r]

  void validate() const;
};

// x' = mask * (s * x) + jitter * eps. Labels are never seen here.
std::vector<double> augment(std::span<const double> x, std::uint64_t seed, const AugmentConfig& cfg);

struct ContrastiveBatch {
  Matrix views;                     // 2N x input_dim
  std::vector<LabelVector> labels;  // 2N, rows 2k and 2k+1 share labels
  std::vector<std::size_t> origin;  // dataset index of each view
};

ContrastiveBatch make_contrastive_batch(const Dataset& data, std::span<const std::size_t> indices,
                                        std::uint64_t seed, const AugmentConfig& cfg);

struct Split {
  std::vector<std::size_t> train;
  std::vector<std::size_t> test;
};
Split split_dataset(std::size_t n, double test_fraction, std::uint64_t seed);

// Line format: a header
//   # gmcl-dataset v1 config_hash=<16 hex> samples=<N> classes=<C> input_dim=<D>
// then one line per sample: the label bits as a 0/1 string followed by the
// features, space separated, in shortest round-trip decimal form.
std::string export_dataset(const Dataset& data);
Dataset import_dataset(const std::string& text);
void write_dataset(const std::filesystem::path& path, const Dataset& data);
Dataset read_dataset(const std::filesystem::path& path);

std::string format_double(double v);

}  // namespace gmcl
