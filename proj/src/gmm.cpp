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

#include "gmcl/gmm.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <string>

#include "gmcl/errors.hpp"

namespace gmcl {
namespace {

constexpr double kLog2Pi = 1.8378770664093454835606594728112;
constexpr double kNegInf = -std::numeric_limits<double>::infinity();

void check_structure(const IsoGaussianMixture& g) {
  require(g.dim >= 1, "mixture dimension must be positive");
  require(!g.weights.empty(), "mixture needs at least one component");
  require(g.means.size() == g.weights.size() && g.variances.size() == g.weights.size(),
          "mixture parameter lengths disagree");
  for (std::size_t k = 0; k < g.components(); ++k) {
    if (!std::isfinite(g.weights[k]) || !std::isfinite(g.means[k]) ||
        !std::isfinite(g.variances[k])) {
      throw NumericError("non-finite mixture parameter at component " + std::to_string(k));
    }
    require(g.variances[k] > 0.0, "mixture variance must be positive");
  }
}

double safe_log(double x) { return x > 0.0 ? std::log(x) : kNegInf; }

// log(sum(exp(v))) over values sorted ascending first, so the result does not
// depend on the order the caller produced the terms in.
double log_sum_exp_canonical(std::vector<double>& terms) {
  std::sort(terms.begin(), terms.end());
  const double m = terms.back();
  if (m == kNegInf) return kNegInf;
  double acc = 0.0;
  for (double t : terms) acc += std::exp(t - m);
  return m + std::log(acc);
}

double log_sum_exp(std::span<const double> terms) {
  double m = kNegInf;
  for (double t : terms) m = std::max(m, t);
  if (m == kNegInf) return kNegInf;
  double acc = 0.0;
  for (double t : terms) acc += std::exp(t - m);
  return m + std::log(acc);
}

}  // namespace

void IsoGaussianMixture::validate(double variance_floor) const {
  check_structure(*this);
  double total = 0.0;
  for (std::size_t k = 0; k < components(); ++k) {
    require(weights[k] >= 0.0, "mixture weight must be nonnegative");
    require(variances[k] >= variance_floor, "mixture variance below floor");
    total += weights[k];
  }
  require(std::abs(total - 1.0) <= 1e-9, "mixture weights must sum to one");
}

IsoGaussianMixture single_gaussian(double mean, double variance, int dim) {
  return IsoGaussianMixture{{1.0}, {mean}, {variance}, dim};
}

double log_density(const IsoGaussianMixture& gmm, std::span<const double> z) {
  check_structure(gmm);
  if (static_cast<int>(z.size()) != gmm.dim) throw InputError("point dimension does not match mixture");
  const double n = gmm.dim;
  std::vector<double> terms(gmm.components());
  for (std::size_t k = 0; k < gmm.components(); ++k) {
    const double v = gmm.variances[k];
    double sq = 0.0;
    for (double zd : z) {
      const double d = zd - gmm.means[k];
      sq += d * d;
    }
    terms[k] = safe_log(gmm.weights[k]) - 0.5 * n * (kLog2Pi + std::log(v)) - 0.5 * sq / v;
  }
  return log_sum_exp(terms);
}

double density(const IsoGaussianMixture& gmm, std::span<const double> z) {
  check_structure(gmm);
  if (static_cast<int>(z.size()) != gmm.dim) throw InputError("point dimension does not match mixture");
  const double n = gmm.dim;
  double total = 0.0;
  for (std::size_t k = 0; k < gmm.components(); ++k) {
    const double v = gmm.variances[k];
    double sq = 0.0;
    for (double zd : z) {
      const double d = zd - gmm.means[k];
      sq += d * d;
    }
    total += gmm.weights[k] * std::pow(2.0 * std::numbers::pi * v, -0.5 * n) * std::exp(-0.5 * sq / v);
  }
  return total;
}

double log_gaussian_cross_integral(double mean_a, double var_a, double mean_b, double var_b, int n) {
  require(var_a > 0.0 && var_b > 0.0, "variances must be positive");
  require(n >= 1, "dimension must be positive");
  const double s = var_a + var_b;
  const double d = mean_a - mean_b;
  return -0.5 * n * (kLog2Pi + std::log(s)) - 0.5 * n * d * d / s;
}

double gaussian_cross_integral(double mean_a, double var_a, double mean_b, double var_b, int n) {
  return std::exp(log_gaussian_cross_integral(mean_a, var_a, mean_b, var_b, n));
}

double log_mixture_cross_integral(const IsoGaussianMixture& p, const IsoGaussianMixture& q) {
  check_structure(p);
  check_structure(q);
  if (p.dim != q.dim) throw InputError("mixture dimensions differ");
  std::vector<double> terms;
  terms.reserve(p.components() * q.components());
  for (std::size_t k = 0; k < p.components(); ++k) {
    for (std::size_t l = 0; l < q.components(); ++l) {
      terms.push_back(safe_log(p.weights[k] * q.weights[l]) +
                      log_gaussian_cross_integral(p.means[k], p.variances[k], q.means[l],
                                                  q.variances[l], p.dim));
    }
  }
  return log_sum_exp_canonical(terms);
}

double mixture_cross_integral(const IsoGaussianMixture& p, const IsoGaussianMixture& q) {
  return std::exp(log_mixture_cross_integral(p, q));
}

CrossTerms cross_terms(const IsoGaussianMixture& p, const IsoGaussianMixture& q) {
  const std::size_t kp = p.components();
  const std::size_t kq = q.components();
  const double n = p.dim;
  CrossTerms out;
  out.pair_weights.resize(kp * kq);
  double m = kNegInf;
  for (std::size_t k = 0; k < kp; ++k) {
    const double log_wk = safe_log(p.weights[k]);
    for (std::size_t l = 0; l < kq; ++l) {
      const double s = p.variances[k] + q.variances[l];
      const double d = p.means[k] - q.means[l];
      const double t = log_wk + safe_log(q.weights[l]) - 0.5 * n * (kLog2Pi + std::log(s)) - 0.5 * n * d * d / s;
      out.pair_weights[k * kq + l] = t;
      m = std::max(m, t);
    }
  }
  if (m == kNegInf) {
    out.log_integral = kNegInf;
    std::fill(out.pair_weights.begin(), out.pair_weights.end(), 0.0);
    return out;
  }
  double acc = 0.0;
  for (double& t : out.pair_weights) {
    t = std::exp(t - m);
    acc += t;
  }
  for (double& t : out.pair_weights) t /= acc;
  out.log_integral = m + std::log(acc);
  return out;
}

void accumulate_cross_gradient(const IsoGaussianMixture& p, const IsoGaussianMixture& q,
                               const CrossTerms& terms, double upstream, MixtureGradient* grad_p,
                               MixtureGradient* grad_q) {
  if (terms.log_integral == kNegInf) throw NumericError("cross integral underflowed in gradient evaluation");
  const std::size_t kp = p.components();
  const std::size_t kq = q.components();
  const double n = p.dim;
  for (std::size_t k = 0; k < kp; ++k) {
    for (std::size_t l = 0; l < kq; ++l) {
      const double w = terms.pair_weights[k * kq + l];
      if (w == 0.0) continue;
      const double s = p.variances[k] + q.variances[l];
      const double d = p.means[k] - q.means[l];
      const double d_mean = -n * d / s;
      const double d_var = -0.5 * n / s + 0.5 * n * d * d / (s * s);
      if (grad_p != nullptr) {
        grad_p->means[k] += upstream * w * d_mean;
        grad_p->variances[k] += upstream * w * d_var;
      }
      if (grad_q != nullptr) {
        grad_q->means[l] -= upstream * w * d_mean;
        grad_q->variances[l] += upstream * w * d_var;
      }
    }
  }
  // d log S / d pi_k = sum_l q.pi_l G_kl / S, which is sum_l w_kl / pi_k when
  // pi_k > 0; a zero weight needs the direct form.
  auto weight_grad = [&](bool p_side, std::size_t k) {
    const IsoGaussianMixture& self = p_side ? p : q;
    const IsoGaussianMixture& other = p_side ? q : p;
    const std::size_t count = other.components();
    if (self.weights[k] > 1e-300) {
      double sum = 0.0;
      for (std::size_t l = 0; l < count; ++l)
        sum += p_side ? terms.pair_weights[k * kq + l] : terms.pair_weights[l * kq + k];
      return sum / self.weights[k];
    }
    double sum = 0.0;
    for (std::size_t l = 0; l < count; ++l) {
      sum += std::exp(safe_log(other.weights[l]) +
                      log_gaussian_cross_integral(self.means[k], self.variances[k], other.means[l],
                                                  other.variances[l], p.dim) -
                      terms.log_integral);
    }
    return sum;
  };
  if (grad_p != nullptr)
    for (std::size_t k = 0; k < kp; ++k) grad_p->weights[k] += upstream * weight_grad(true, k);
  if (grad_q != nullptr)
    for (std::size_t l = 0; l < kq; ++l) grad_q->weights[l] += upstream * weight_grad(false, l);
}

double log_mixture_cross_integral_grad(const IsoGaussianMixture& p, const IsoGaussianMixture& q,
                                       double upstream, MixtureGradient* grad_p,
                                       MixtureGradient* grad_q) {
  check_structure(p);
  check_structure(q);
  if (p.dim != q.dim) throw InputError("mixture dimensions differ");
  const CrossTerms terms = cross_terms(p, q);
  accumulate_cross_gradient(p, q, terms, upstream, grad_p, grad_q);
  return terms.log_integral;
}

double correlation_coefficient(const IsoGaussianMixture& p, const IsoGaussianMixture& q) {
  const double cross = log_mixture_cross_integral(p, q);
  const double self_p = log_mixture_cross_integral(p, p);
  const double self_q = log_mixture_cross_integral(q, q);
  return std::exp(cross - 0.5 * (self_p + self_q));
}

std::vector<double> sample(const IsoGaussianMixture& gmm, Rng& rng) {
  std::discrete_distribution<std::size_t> pick(gmm.weights.begin(), gmm.weights.end());
  std::normal_distribution<double> normal(0.0, 1.0);
  const std::size_t k = pick(rng);
  const double sd = std::sqrt(gmm.variances[k]);
  std::vector<double> z(gmm.dim);
  for (double& zd : z) zd = gmm.means[k] + sd * normal(rng);
  return z;
}

namespace {

template <typename Fn>
McEstimate mc_average(const IsoGaussianMixture& p, std::int64_t samples, std::uint64_t seed,
                      Fn&& value_at) {
  require(samples >= 1, "sample count must be positive");
  Rng rng(seed);
  // Welford accumulation.
  double mean = 0.0;
  double m2 = 0.0;
  for (std::int64_t i = 0; i < samples; ++i) {
    const std::vector<double> z = sample(p, rng);
    const double v = value_at(z);
    const double delta = v - mean;
    mean += delta / static_cast<double>(i + 1);
    m2 += delta * (v - mean);
  }
  McEstimate out{mean, std::numeric_limits<double>::infinity()};
  if (samples >= 2) {
    const double var = m2 / static_cast<double>(samples - 1);
    out.std_error = std::sqrt(var / static_cast<double>(samples));
  }
  return out;
}

}  // namespace

McEstimate mc_cross_integral(const IsoGaussianMixture& p, const IsoGaussianMixture& q,
                             std::int64_t samples, std::uint64_t seed) {
  check_structure(p);
  check_structure(q);
  if (p.dim != q.dim) throw InputError("mixture dimensions differ");
  return mc_average(p, samples, seed, [&](const std::vector<double>& z) { return density(q, z); });
}

McEstimate bhattacharyya_coefficient_mc(const IsoGaussianMixture& p, const IsoGaussianMixture& q,
                                        std::int64_t samples, std::uint64_t seed) {
  check_structure(p);
  check_structure(q);
  if (p.dim != q.dim) throw InputError("mixture dimensions differ");
  return mc_average(p, samples, seed, [&](const std::vector<double>& z) {
    return std::exp(0.5 * (log_density(q, z) - log_density(p, z)));
  });
}

}  // namespace gmcl
