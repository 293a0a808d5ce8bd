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


#include <gtest/gtest.h>

#include <cmath>
#include <random>
#include <vector>

#include "gmcl/errors.hpp"
#include "gmcl/overlap.hpp"
#include "support/oracles.hpp"

namespace gmcl {
namespace {

TEST(Jaccard, HandValues) {
  EXPECT_DOUBLE_EQ(jaccard({1, 1, 0}, {1, 0, 1}), 1.0 / 3.0);
  EXPECT_DOUBLE_EQ(jaccard({1, 0, 1, 1}, {1, 0, 1, 1}), 1.0);
  EXPECT_DOUBLE_EQ(jaccard({1, 0, 0}, {0, 1, 0}), 0.0);
  EXPECT_DOUBLE_EQ(jaccard({0, 0, 0}, {0, 0, 0}), 0.0);
  EXPECT_DOUBLE_EQ(jaccard({0, 0, 0}, {1, 0, 0}), 0.0);
}

TEST(Cosine, HandValues) {
  EXPECT_DOUBLE_EQ(cosine({1, 1, 0}, {1, 0, 1}), 0.5);
  EXPECT_NEAR(cosine({1, 0, 0}, {1, 1, 0}), 1.0 / std::sqrt(2.0), 1e-15);
  EXPECT_DOUBLE_EQ(cosine({1, 1}, {1, 1}), 1.0);
  EXPECT_DOUBLE_EQ(cosine({0, 0}, {1, 1}), 0.0);
}

TEST(Overlap, MeasuresAgreeWithSetCounting) {
  for (std::size_t c = 1; c <= 4; ++c) {
    const auto all = testing::all_label_vectors(c);
    for (const auto& a : all) {
      for (const auto& b : all) {
        EXPECT_NEAR(jaccard(a, b), testing::count_jaccard(a, b), 1e-15);
        EXPECT_NEAR(cosine(a, b), testing::count_cosine(a, b), 1e-15);
        EXPECT_LE(jaccard(a, b), cosine(a, b) + 1e-15);
        EXPECT_EQ(jaccard(a, b), jaccard(b, a));
        EXPECT_EQ(cosine(a, b), cosine(b, a));
        EXPECT_GE(jaccard(a, b), 0.0);
        EXPECT_LE(cosine(a, b), 1.0);
      }
    }
  }
}

TEST(Overlap, LengthMismatchIsInputError) {
  EXPECT_THROW(jaccard({1, 0}, {1, 0, 0}), InputError);
  EXPECT_THROW(cosine({1, 0}, {1}), InputError);
}

TEST(Overlap, ParsesMeasureNames) {
  EXPECT_EQ(parse_overlap_measure("jaccard"), OverlapMeasure::kJaccard);
  EXPECT_EQ(parse_overlap_measure("cosine"), OverlapMeasure::kCosine);
  EXPECT_EQ(to_string(OverlapMeasure::kCosine), "cosine");
  EXPECT_THROW(parse_overlap_measure("dice"), InputError);
}

TEST(PositiveSets, ThresholdIsInclusive) {
  const std::vector<LabelVector> y{{1, 1, 0}, {1, 0, 0}, {0, 0, 1}, {1, 1, 0}};
  const auto sets = positive_sets(y, 0.5, OverlapMeasure::kJaccard);
  ASSERT_EQ(sets.size(), 4u);
  ASSERT_EQ(sets[0].members.size(), 2u);
  EXPECT_EQ(sets[0].members[0], (PositiveMember{1, 0.5}));
  EXPECT_EQ(sets[0].members[1], (PositiveMember{3, 1.0}));
  EXPECT_TRUE(sets[2].members.empty());
  for (std::size_t i = 0; i < sets.size(); ++i) EXPECT_EQ(sets[i].anchor, i);
}

TEST(PositiveSets, AlphaZeroAdmitsDisjointPairsWithZeroWeight) {
  const std::vector<LabelVector> y{{1, 0}, {0, 1}, {0, 0}};
  const auto sets = positive_sets(y, 0.0, OverlapMeasure::kJaccard);
  ASSERT_EQ(sets[0].members.size(), 1u);
  EXPECT_EQ(sets[0].members[0].index, 1u);
  EXPECT_EQ(sets[0].members[0].weight, 0.0);
  EXPECT_TRUE(sets[2].members.empty());
}

TEST(PositiveSets, RejectsBadInput) {
  const std::vector<LabelVector> y{{1, 0}, {0, 1}};
  EXPECT_THROW(positive_sets(y, 1.5, OverlapMeasure::kJaccard), InputError);
  EXPECT_THROW(positive_sets(y, -0.1, OverlapMeasure::kJaccard), InputError);
  EXPECT_THROW(positive_sets({}, 0.5, OverlapMeasure::kJaccard), InputError);
}

TEST(PositiveSets, MembershipWeightIsSymmetric) {
  std::mt19937_64 rng(31);
  for (int trial = 0; trial < 50; ++trial) {
    std::vector<LabelVector> y;
    for (int i = 0; i < 10; ++i) y.push_back(testing::random_labels(rng, 5, 0.4));
    for (auto m : {OverlapMeasure::kJaccard, OverlapMeasure::kCosine}) {
      const auto sets = positive_sets(y, 0.3, m);
      for (const auto& s : sets) {
        for (const auto& member : s.members) {
          bool found = false;
          for (const auto& back : sets[member.index].members) {
            if (back.index == s.anchor) {
              found = true;
              EXPECT_EQ(back.weight, member.weight);
            }
          }
          EXPECT_TRUE(found);
        }
      }
    }
  }
}

TEST(PositiveSets, NestedInAlpha) {
  std::mt19937_64 rng(37);
  for (int trial = 0; trial < 100; ++trial) {
    std::vector<LabelVector> y;
    for (int i = 0; i < 8; ++i) y.push_back(testing::random_labels(rng, 4, 0.5));
    const auto loose = positive_sets(y, 0.1, OverlapMeasure::kJaccard);
    const auto mid = positive_sets(y, 0.5, OverlapMeasure::kJaccard);
    const auto tight = positive_sets(y, 0.9, OverlapMeasure::kJaccard);
    for (std::size_t i = 0; i < y.size(); ++i) {
      for (const auto& m : tight[i].members)
        EXPECT_TRUE(std::find(mid[i].members.begin(), mid[i].members.end(), m) != mid[i].members.end());
      for (const auto& m : mid[i].members)
        EXPECT_TRUE(std::find(loose[i].members.begin(), loose[i].members.end(), m) != loose[i].members.end());
    }
  }
}

TEST(PositiveSets, TwoViewsOfOneSampleAreAlwaysPositive) {
  const std::vector<LabelVector> y{{1, 0, 1}, {1, 0, 1}, {0, 1, 0}, {0, 1, 0}};
  const auto sets = positive_sets(y, 1.0, OverlapMeasure::kCosine);
  ASSERT_EQ(sets[0].members.size(), 1u);
  EXPECT_EQ(sets[0].members[0].index, 1u);
  ASSERT_EQ(sets[3].members.size(), 1u);
  EXPECT_EQ(sets[3].members[0].index, 2u);
}

}  // namespace
}  // namespace gmcl
