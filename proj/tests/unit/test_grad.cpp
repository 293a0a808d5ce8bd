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
#include <string>
#include <vector>

#include "gmcl/errors.hpp"
#include "gmcl/gradcheck.hpp"
#include "gmcl/losses.hpp"
#include "gmcl/optim.hpp"
#include "gmcl/params.hpp"
#include "gmcl/tape.hpp"
#include "support/fixtures.hpp"

namespace gmcl {
namespace {

Matrix random_matrix(std::mt19937_64& rng, Eigen::Index r, Eigen::Index c, double scale = 1.0) {
  std::normal_distribution<double> n(0.0, scale);
  Matrix m(r, c);
  for (Eigen::Index i = 0; i < m.size(); ++i) m(i) = n(rng);
  return m;
}

std::vector<std::size_t> all_indices(const ParameterSet& p) {
  std::vector<std::size_t> out(p.size());
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = i;
  return out;
}

TEST(Tape, HalfSquaredNormHasIdentityGradient) {
  std::mt19937_64 rng(1);
  ParameterSet p;
  p.add("theta", random_matrix(rng, 3, 4));
  const auto idx = all_indices(p);
  const auto lg = backward(p, idx, [](Tape& t, const std::vector<Var>& v) {
    return scale(t, sum_squares(t, v[0]), 0.5);
  });
  EXPECT_EQ(lg.gradients[0], p.at("theta"));
}

TEST(Tape, ConstantLossHasZeroGradient) {
  ParameterSet p;
  p.add("theta", Matrix::Ones(2, 2));
  const auto idx = all_indices(p);
  const auto lg = backward(p, idx, [](Tape& t, const std::vector<Var>&) {
    return t.constant(Matrix::Constant(1, 1, 3.0));
  });
  EXPECT_EQ(lg.value, 3.0);
  EXPECT_TRUE(lg.gradients[0].isZero(0.0));
}

TEST(Tape, GradientShapesMirrorParameters) {
  std::mt19937_64 rng(2);
  ParameterSet p;
  p.add("w", random_matrix(rng, 3, 5));
  p.add("b", random_matrix(rng, 1, 5));
  p.add("unused", random_matrix(rng, 7, 2));
  const auto idx = all_indices(p);
  const Matrix x = random_matrix(rng, 4, 3);
  const auto lg = backward(p, idx, [&](Tape& t, const std::vector<Var>& v) {
    return sum(t, relu(t, affine(t, t.constant(x), v[0], v[1])));
  });
  for (std::size_t k = 0; k < p.size(); ++k) {
    EXPECT_EQ(lg.gradients[k].rows(), p[k].value.rows());
    EXPECT_EQ(lg.gradients[k].cols(), p[k].value.cols());
  }
  EXPECT_TRUE(lg.gradients[2].isZero(0.0));
}

TEST(Tape, BackwardIsLinearInTheLoss) {
  std::mt19937_64 rng(3);
  ParameterSet p;
  p.add("w", random_matrix(rng, 3, 3));
  const auto idx = all_indices(p);
  const Matrix x = random_matrix(rng, 5, 3);
  auto l1 = [&](Tape& t, const std::vector<Var>& v) {
    return sum(t, sigmoid(t, matmul(t, t.constant(x), v[0])));
  };
  auto l2 = [&](Tape& t, const std::vector<Var>& v) {
    return sum_squares(t, softmax_rows(t, matmul(t, t.constant(x), v[0])));
  };
  const double a = 0.7, b = -1.3;
  const auto g1 = backward(p, idx, l1);
  const auto g2 = backward(p, idx, l2);
  const auto g = backward(p, idx, [&](Tape& t, const std::vector<Var>& v) {
    return add(t, scale(t, l1(t, v), a), scale(t, l2(t, v), b));
  });
  EXPECT_TRUE(g.gradients[0].isApprox(a * g1.gradients[0] + b * g2.gradients[0], 1e-12));
  EXPECT_LT((g.gradients[0] - (a * g1.gradients[0] + b * g2.gradients[0])).cwiseAbs().maxCoeff(), 1e-12);
}

TEST(Tape, EveryOpMatchesFiniteDifferences) {
  std::mt19937_64 rng(4);
  ParameterSet p;
  p.add("x", random_matrix(rng, 4, 5));
  p.add("w", random_matrix(rng, 5, 3));
  p.add("b", random_matrix(rng, 1, 3));
  const auto idx = all_indices(p);
  const LossBuilder loss = [](Tape& t, const std::vector<Var>& v) {
    const Var a = affine(t, v[0], v[1], v[2]);
    const Var e = elu(t, a);
    const Var s = sigmoid(t, add_scalar(t, slice_cols(t, e, 1, 2), 0.3));
    const Var n = l2_normalize_rows(t, e);
    const Var sm = softmax_rows(t, matmul(t, n, t.constant(Matrix::Identity(3, 3) * 2.0)));
    return add(t, add(t, sum(t, s), sum_squares(t, sm)), scale(t, sum(t, relu(t, a)), 0.5));
  };
  const auto report = finite_diff_check(p, idx, loss);
  EXPECT_LT(report.max_relative_error, 1e-6) << report.worst_tensor;
  EXPECT_EQ(report.checked, 20u + 15u + 3u);
}

TEST(Tape, NonFiniteValueNamesTheOperation) {
  Tape t;
  const Var x = t.variable(Matrix::Zero(2, 3), "x");
  try {
    l2_normalize_rows(t, x);
    FAIL() << "expected a numeric error";
  } catch (const NumericError& e) {
    EXPECT_NE(std::string(e.what()).find("l2_normalize"), std::string::npos);
  }
  Tape t2;
  const Var big = t2.variable(Matrix::Constant(1, 1, 1e200), "big");
  try {
    sum_squares(t2, big);
    FAIL() << "expected a numeric error";
  } catch (const NumericError& e) {
    EXPECT_NE(std::string(e.what()).find("sum_squares"), std::string::npos);
  }
  EXPECT_THROW(t2.variable(Matrix::Constant(1, 1, std::nan("")), "nan"), NumericError);
}

TEST(Tape, ValueHelpersAgreeWithRecordedOps) {
  std::mt19937_64 rng(5);
  const Matrix x = random_matrix(rng, 3, 4);
  Tape t;
  const Var v = t.constant(x);
  EXPECT_EQ(t.value(elu(t, v)), elu_value(x));
  EXPECT_EQ(t.value(sigmoid(t, v)), sigmoid_value(x));
  EXPECT_EQ(t.value(softmax_rows(t, v)), softmax_rows_value(x));
  EXPECT_EQ(t.value(l2_normalize_rows(t, v)), l2_normalize_rows_value(x));
}

TEST(FiniteDiff, LinearLossIsExact) {
  std::mt19937_64 rng(6);
  ParameterSet p;
  p.add("w", random_matrix(rng, 4, 4));
  const Matrix c = random_matrix(rng, 4, 4);
  const auto idx = all_indices(p);
  for (double step : {1e-3, 1e-5, 0.1}) {
    const auto r = finite_diff_check(p, idx, [&](Tape& t, const std::vector<Var>& v) {
      return sum(t, matmul(t, t.constant(c.row(0)), v[0]));
    }, step);
    EXPECT_LT(r.max_relative_error, 1e-10);
  }
}

TEST(FiniteDiff, QuadraticLossIsSecondOrderAccurate) {
  std::mt19937_64 rng(7);
  ParameterSet p;
  p.add("w", random_matrix(rng, 3, 3));
  const auto idx = all_indices(p);
  const auto r = finite_diff_check(p, idx, [](Tape& t, const std::vector<Var>& v) {
    return scale(t, sum_squares(t, v[0]), 1.5);
  }, 1e-5);
  EXPECT_LT(r.max_relative_error, 1e-8);
  EXPECT_EQ(r.checked, 9u);
}

TEST(FiniteDiff, ReportsTheWorstEntry) {
  ParameterSet p;
  p.add("w", Matrix::Constant(1, 2, 1.0));
  const auto idx = all_indices(p);
  // Gradient with a wrong pullback on purpose: reports 2x the true slope.
  const LossBuilder broken = [](Tape& t, const std::vector<Var>& v) {
    const Var s = sum(t, v[0]);
    Matrix value = t.value(s);
    return t.record("broken", {s}, value, [s](Tape& tp, const Matrix& g) { tp.accumulate(s, 2.0 * g); });
  };
  const auto r = finite_diff_check(p, idx, broken);
  EXPECT_NEAR(r.max_relative_error, 0.5, 1e-8);
  EXPECT_EQ(r.worst_tensor, "w");
  EXPECT_THROW(finite_diff_check(p, idx, broken, 0.0), InputError);
}

TEST(FiniteDiff, ToyTotalLossMatches) {
  for (std::uint64_t seed = 0; seed < 6; ++seed) {
    const auto inst = testing::make_toy_instance(seed);
    EXPECT_LE(inst.trainable_scalars, 500u);
    const auto r = finite_diff_check(inst.params.tensors, inst.trainable, inst.builder());
    EXPECT_LT(r.max_relative_error, 1e-4) << "seed " << seed << " worst " << r.worst_tensor;
  }
}

TEST(Adam, ZeroGradientLeavesParametersAndDecaysMoments) {
  ParameterSet p;
  p.add("w", Matrix::Constant(2, 2, 1.5));
  auto state = make_optimizer(p, {0});
  state.first_moment[0].setConstant(0.2);
  state.second_moment[0].setConstant(0.4);
  const std::vector<Matrix> g{Matrix::Zero(2, 2)};
  const ParameterSet before = p;
  adam_step(state, p, g, 0.1);
  // stale moments still move the parameters, by the bias-corrected ratio
  const double shift = -0.1 * (0.18 / 0.1) / (std::sqrt(0.999 * 0.4 / 0.001) + 1e-8);
  EXPECT_NEAR(p.at("w")(1, 1), before.at("w")(1, 1) + shift, 1e-14);
  EXPECT_DOUBLE_EQ(state.first_moment[0](0, 0), 0.18);
  EXPECT_DOUBLE_EQ(state.second_moment[0](0, 0), 0.999 * 0.4);
}

TEST(Adam, FreshZeroGradientIsANoOp) {
  ParameterSet p;
  p.add("w", Matrix::Constant(2, 3, -0.25));
  auto state = make_optimizer(p, {0});
  const ParameterSet before = p;
  adam_step(state, p, std::vector<Matrix>{Matrix::Zero(2, 3)}, 0.01);
  EXPECT_TRUE(p == before);
  EXPECT_EQ(state.step, 1);
}

TEST(Adam, FirstStepIsNormalizedGradient) {
  ParameterSet p;
  Matrix w(1, 3);
  w << 0.0, 1.0, -2.0;
  p.add("w", w);
  auto state = make_optimizer(p, {0});
  Matrix g(1, 3);
  g << 4.0, -0.5, 1e-3;
  const double lr = 0.01;
  adam_step(state, p, std::vector<Matrix>{g}, lr);
  for (int i = 0; i < 3; ++i) {
    // bias-corrected m/sqrt(v) is g/|g| on step one
    const double expected = w(0, i) - lr * g(0, i) / (std::abs(g(0, i)) + 1e-8);
    EXPECT_NEAR(p.at("w")(0, i), expected, 1e-15);
  }
}

TEST(Adam, RejectsBadInput) {
  ParameterSet p;
  p.add("w", Matrix::Zero(2, 2));
  auto state = make_optimizer(p, {0});
  EXPECT_THROW(adam_step(state, p, std::vector<Matrix>{Matrix::Zero(3, 2)}, 0.1), InputError);
  EXPECT_THROW(adam_step(state, p, std::vector<Matrix>{}, 0.1), InputError);
  EXPECT_THROW(adam_step(state, p, std::vector<Matrix>{Matrix::Zero(2, 2)}, 0.0), InputError);
}

TEST(Adam, IdenticalRunsAreBitIdentical) {
  auto run = [] {
    std::mt19937_64 rng(9);
    ParameterSet p;
    p.add("w", random_matrix(rng, 3, 3));
    const auto idx = all_indices(p);
    auto state = make_optimizer(p, idx);
    const Matrix x = random_matrix(rng, 6, 3);
    for (int s = 0; s < 25; ++s) {
      const auto lg = backward(p, idx, [&](Tape& t, const std::vector<Var>& v) {
        return sum_squares(t, sigmoid(t, matmul(t, t.constant(x), v[0])));
      });
      adam_step(state, p, lg.gradients, one_cycle_lr(s, 25, 0.05));
    }
    return p;
  };
  EXPECT_TRUE(run() == run());
}

TEST(Adam, ReducesPclOnIdenticalBatchFixture) {
  // Four views start as the same mixture; labels split them into two pairs.
  ParameterSet p;
  Matrix mu(4, 2);
  mu << 0.0, 0.1, 0.01, 0.1, -0.01, 0.1, 0.02, 0.1;
  p.add("mu", mu);
  p.add("logit", Matrix::Zero(4, 2));
  p.add("raw_var", Matrix::Zero(4, 2));
  p.add("z", Matrix::Zero(4, 2));
  const auto idx = all_indices(p);
  const std::vector<LabelVector> y{{1, 0}, {1, 0}, {0, 1}, {0, 1}};
  const ContrastiveLossConfig cfg;
  const LossBuilder loss = [&](Tape& t, const std::vector<Var>& v) {
    const Var pi = softmax_rows(t, v[1]);
    const Var var = add_scalar(t, elu(t, v[2]), 2.0);
    const Var nll = nll_loss(t, pi, v[0], var, v[3]);
    const Var pcl = pcl_loss(t, pi, v[0], var, 2, y, cfg);
    return total_loss(t, nll, pcl, cfg.lambda);
  };
  auto state = make_optimizer(p, idx);
  const double initial = loss_value(p, idx, loss);
  for (int s = 0; s < 50; ++s) {
    const auto lg = backward(p, idx, loss);
    adam_step(state, p, lg.gradients, 0.05);
  }
  const double final_value = loss_value(p, idx, loss);
  EXPECT_LE(final_value, 0.9 * initial) << initial << " -> " << final_value;
}

TEST(OneCycle, ShapeAndEndpoints) {
  const double peak = 1e-3;
  const std::int64_t total = 100;
  EXPECT_DOUBLE_EQ(one_cycle_lr(30, total, peak), peak);
  EXPECT_DOUBLE_EQ(one_cycle_lr(total, total, peak), peak * 1e-4);
  EXPECT_DOUBLE_EQ(one_cycle_lr(0, total, peak), peak / 25.0);
  double prev = 0.0;
  for (std::int64_t s = 0; s <= 30; ++s) {
    const double lr = one_cycle_lr(s, total, peak);
    EXPECT_GE(lr, prev);
    prev = lr;
  }
  for (std::int64_t s = 31; s <= total; ++s) {
    const double lr = one_cycle_lr(s, total, peak);
    EXPECT_LE(lr, prev);
    prev = lr;
  }
}

TEST(OneCycle, ContinuousAcrossThePeak) {
  const double peak = 0.5;
  const std::int64_t total = 100000;
  const double before = one_cycle_lr(29999, total, peak);
  const double after = one_cycle_lr(30001, total, peak);
  EXPECT_NEAR(before, peak, 1e-6);
  EXPECT_NEAR(after, peak, 1e-6);
}

TEST(OneCycle, RejectsOutOfRangeSteps) {
  EXPECT_THROW(one_cycle_lr(-1, 10, 0.1), InputError);
  EXPECT_THROW(one_cycle_lr(11, 10, 0.1), InputError);
  EXPECT_THROW(one_cycle_lr(0, 0, 0.1), InputError);
}

TEST(Params, SelectAndCount) {
  ParameterSet p;
  p.add("encoder.a", Matrix::Zero(2, 3));
  p.add("mdn.b", Matrix::Zero(4, 1));
  p.add("encoder.c", Matrix::Zero(1, 1));
  EXPECT_EQ(p.select("encoder."), (std::vector<std::size_t>{0, 2}));
  EXPECT_EQ(p.scalar_count(), 11u);
  EXPECT_TRUE(p.contains("mdn.b"));
  EXPECT_FALSE(p.contains("mdn.c"));
  EXPECT_THROW(p.index_of("missing"), InputError);
  EXPECT_THROW(p.add("mdn.b", Matrix::Zero(1, 1)), InputError);
}

}  // namespace
}  // namespace gmcl
