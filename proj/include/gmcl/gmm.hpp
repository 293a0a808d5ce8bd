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
#include <span>
#include <vector>

#include "gmcl/rng.hpp"

namespace gmcl {

// Mixture of isotropic Gaussians in R^dim whose k-th component has mean
// means[k] * (1, ..., 1) and covariance variances[k] * I.
struct IsoGaussianMixture {
  std::vector<double> weights;
  std::vector<double> means;
  std::vector<double> variances;
  int dim = 1;

  std::size_t components() const { return weights.size(); }

  // Throws InputError unless weights form a probability vector (tolerance
  // 1e-9), every variance is >= variance_floor, and all lengths agree.
  void validate(double variance_floor = 1.0) const;
};

IsoGaussianMixture single_gaussian(double mean, double variance, int dim);

// Gradient buffers shaped like an IsoGaussianMixture.
struct MixtureGradient {
  std::vector<double> weights;
  std::vector<double> means;
  std::vector<double> variances;

  explicit MixtureGradient(std::size_t components = 0)
      : weights(components, 0.0), means(components, 0.0), variances(components, 0.0) {}
};

double density(const IsoGaussianMixture& gmm, std::span<const double> z);
double log_density(const IsoGaussianMixture& gmm, std::span<const double> z);

// Integral over R^n of N(z; mean_a*1, var_a*I) N(z; mean_b*1, var_b*I).
double gaussian_cross_integral(double mean_a, double var_a, double mean_b, double var_b, int n);
double log_gaussian_cross_integral(double mean_a, double var_a, double mean_b, double var_b, int n);

// Integral of p(z) q(z). Terms are summed in a canonical order, so the result
// is bit-identical under argument swap.
double mixture_cross_integral(const IsoGaussianMixture& p, const IsoGaussianMixture& q);
double log_mixture_cross_integral(const IsoGaussianMixture& p, const IsoGaussianMixture& q);

// Returns log of the cross integral and adds upstream * d(log integral)/d(theta)
// into grad_p / grad_q (either may be null). Passing the same buffer twice for a
// self-integral accumulates both sides, which is the correct total derivative.
double log_mixture_cross_integral_grad(const IsoGaussianMixture& p, const IsoGaussianMixture& q,
                                       double upstream, MixtureGradient* grad_p,
                                       MixtureGradient* grad_q);

// Per-pair intermediate of the cross integral: the log integral plus the
// normalized contribution of every component pair (row-major, p x q). Lets a
// caller evaluate many pairs first and differentiate them later without
// recomputing the Gaussian terms.
struct CrossTerms {
  double log_integral = 0.0;
  std::vector<double> pair_weights;
};

// Unchecked fast path: inputs must already satisfy validate()'s structural
// checks and share a dimension.
CrossTerms cross_terms(const IsoGaussianMixture& p, const IsoGaussianMixture& q);
void accumulate_cross_gradient(const IsoGaussianMixture& p, const IsoGaussianMixture& q,
                               const CrossTerms& terms, double upstream, MixtureGradient* grad_p,
                               MixtureGradient* grad_q);

// Normalized L2 inner product of two densities; lies in (0, 1].
double correlation_coefficient(const IsoGaussianMixture& p, const IsoGaussianMixture& q);

struct McEstimate {
  double estimate = 0.0;
  // +infinity when fewer than two samples were drawn.
  double std_error = 0.0;
};

std::vector<double> sample(const IsoGaussianMixture& gmm, Rng& rng);

// Importance-sampling estimate of the cross integral: z ~ p, average q(z).
McEstimate mc_cross_integral(const IsoGaussianMixture& p, const IsoGaussianMixture& q,
                             std::int64_t samples, std::uint64_t seed);

// Bhattacharyya coefficient, integral of sqrt(p q), estimated with z ~ p and
// the ratio sqrt(q(z) / p(z)). Mixtures have no closed form for it.
McEstimate bhattacharyya_coefficient_mc(const IsoGaussianMixture& p, const IsoGaussianMixture& q,
                                        std::int64_t samples, std::uint64_t seed);

}  // namespace gmcl
