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


// Reference implementations used only by the tests. They are written
// against the mathematical definitions directly and share no code paths
// with the library beyond its data types.

#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <numbers>
#include <random>
#include <utility>
#include <vector>

#include <boost/math/quadrature/gauss_kronrod.hpp>

#include "gmcl/gmm.hpp"
#include "gmcl/losses.hpp"
#include "gmcl/metrics.hpp"
#include "gmcl/overlap.hpp"

namespace gmcl::testing {

inline double normal_pdf_1d(double x, double mean, double var) {
  const double d = x - mean;
  return std::exp(-d * d / (2.0 * var)) / std::sqrt(2.0 * std::numbers::pi * var);
}

inline double mixture_pdf_1d(const IsoGaussianMixture& g, double x) {
  double s = 0.0;
  for (std::size_t k = 0; k < g.components(); ++k) s += g.weights[k] * normal_pdf_1d(x, g.means[k], g.variances[k]);
  return s;
}

// Adaptive Gauss-Kronrod over the real line, n = 1 only.
inline double quadrature_cross_integral_1d(const IsoGaussianMixture& p, const IsoGaussianMixture& q) {
  auto f = [&](double x) { return mixture_pdf_1d(p, x) * mixture_pdf_1d(q, x); };
  const double inf = std::numeric_limits<double>::infinity();
  return boost::math::quadrature::gauss_kronrod<double, 61>::integrate(f, -inf, inf, 15, 1e-12);
}

// Nested 2-D quadrature of the product of two isotropic mixtures in the
// plane, each mean broadcast to (mu, mu).
inline double quadrature_cross_integral_2d(const IsoGaussianMixture& p, const IsoGaussianMixture& q) {
  auto pdf2 = [](const IsoGaussianMixture& g, double x, double y) {
    double s = 0.0;
    for (std::size_t k = 0; k < g.components(); ++k)
      s += g.weights[k] * normal_pdf_1d(x, g.means[k], g.variances[k]) *
           normal_pdf_1d(y, g.means[k], g.variances[k]);
    return s;
  };
  using GK = boost::math::quadrature::gauss_kronrod<double, 31>;
  const double lo = -40.0;
  const double hi = 40.0;
  auto inner = [&](double x) {
    return GK::integrate([&](double y) { return pdf2(p, x, y) * pdf2(q, x, y); }, lo, hi, 10, 1e-11);
  };
  return GK::integrate(inner, lo, hi, 10, 1e-11);
}

// Plain-space closed form, summed directly.
inline double direct_cross_integral(const IsoGaussianMixture& p, const IsoGaussianMixture& q) {
  const double n = p.dim;
  double s = 0.0;
  for (std::size_t k = 0; k < p.components(); ++k) {
    for (std::size_t l = 0; l < q.components(); ++l) {
      const double v = p.variances[k] + q.variances[l];
      const double d = p.means[k] - q.means[l];
      s += p.weights[k] * q.weights[l] * std::pow(2.0 * std::numbers::pi * v, -0.5 * n) *
           std::exp(-n * d * d / (2.0 * v));
    }
  }
  return s;
}

inline double direct_similarity(const IsoGaussianMixture& p, const IsoGaussianMixture& q) {
  return direct_cross_integral(p, q) /
         std::sqrt(direct_cross_integral(p, p) * direct_cross_integral(q, q));
}

// Set-counting forms of the overlap measures.
inline double count_jaccard(const LabelVector& a, const LabelVector& b) {
  int inter = 0;
  int uni = 0;
  for (std::size_t c = 0; c < a.size(); ++c) {
    inter += a[c] && b[c];
    uni += a[c] || b[c];
  }
  return uni == 0 ? 0.0 : static_cast<double>(inter) / uni;
}

inline double count_cosine(const LabelVector& a, const LabelVector& b) {
  int inter = 0;
  int na = 0;
  int nb = 0;
  for (std::size_t c = 0; c < a.size(); ++c) {
    inter += a[c] && b[c];
    na += a[c];
    nb += b[c];
  }
  return na == 0 || nb == 0 ? 0.0 : inter / std::sqrt(static_cast<double>(na) * nb);
}

// Straight transcription of the weighted contrastive sum: outer loop over
// anchors, inner loops over positives and over the full denominator.
inline double brute_force_pcl(const std::vector<IsoGaussianMixture>& mixtures,
                              const std::vector<LabelVector>& labels, double tau, double alpha,
                              OverlapMeasure measure) {
  const std::size_t b = mixtures.size();
  auto d = [&](std::size_t i, std::size_t j) {
    return measure == OverlapMeasure::kJaccard ? count_jaccard(labels[i], labels[j])
                                               : count_cosine(labels[i], labels[j]);
  };
  double loss = 0.0;
  for (std::size_t i = 0; i < b; ++i) {
    std::vector<std::size_t> positives;
    for (std::size_t j = 0; j < b; ++j)
      if (j != i && d(i, j) >= alpha) positives.push_back(j);
    if (positives.empty()) continue;
    double denominator = 0.0;
    for (std::size_t l = 0; l < b; ++l)
      if (l != i) denominator += std::exp(direct_similarity(mixtures[i], mixtures[l]) / tau);
    double anchor = 0.0;
    for (std::size_t j : positives) {
      const double numerator = std::exp(direct_similarity(mixtures[i], mixtures[j]) / tau);
      anchor += d(i, j) * std::log(numerator / denominator);
    }
    loss += -anchor / static_cast<double>(positives.size());
  }
  return loss;
}

// Quadratic-time metric reference. Rank of sample i is one plus the number
// of samples that sort strictly before it (higher score, or equal score and
// smaller index).
struct NaiveMetrics {
  double map = 0.0;
  double cp = 0.0;
  double cr = 0.0;
  double cf1 = 0.0;
  double op = 0.0;
  double or_ = 0.0;
  double of1 = 0.0;
};

inline double naive_average_precision(const std::vector<double>& s, const std::vector<int>& t) {
  const std::size_t n = s.size();
  auto before = [&](std::size_t j, std::size_t i) { return s[j] > s[i] || (s[j] == s[i] && j < i); };
  // (rank, precision at rank) per positive; summed in rank order.
  std::vector<std::pair<int, double>> terms;
  for (std::size_t i = 0; i < n; ++i) {
    if (!t[i]) continue;
    int rank = 1;
    int hits = 1;
    for (std::size_t j = 0; j < n; ++j) {
      if (j == i || !before(j, i)) continue;
      ++rank;
      hits += t[j];
    }
    terms.emplace_back(rank, static_cast<double>(hits) / rank);
  }
  if (terms.empty()) return -1.0;
  std::sort(terms.begin(), terms.end());
  double total = 0.0;
  for (const auto& [rank, precision] : terms) total += precision;
  return total / static_cast<double>(terms.size());
}

inline double naive_f1(double p, double r) { return p + r == 0.0 ? 0.0 : 2.0 * p * r / (p + r); }

inline NaiveMetrics naive_metrics(const Matrix& scores, const std::vector<LabelVector>& truths,
                                  double threshold) {
  const auto n = static_cast<std::size_t>(scores.rows());
  const auto c = static_cast<std::size_t>(scores.cols());
  NaiveMetrics m;
  double ap_sum = 0.0;
  int ap_count = 0;
  long long tp_all = 0;
  long long pred_all = 0;
  long long pos_all = 0;
  for (std::size_t k = 0; k < c; ++k) {
    std::vector<double> s(n);
    std::vector<int> t(n);
    long long tp = 0;
    long long pred = 0;
    long long pos = 0;
    for (std::size_t i = 0; i < n; ++i) {
      s[i] = scores(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(k));
      t[i] = truths[i][k] ? 1 : 0;
      const bool predicted = s[i] > threshold;
      pred += predicted;
      pos += t[i];
      tp += predicted && t[i];
    }
    const double ap = naive_average_precision(s, t);
    if (ap >= 0.0) {
      ap_sum += ap;
      ++ap_count;
    }
    m.cp += pred == 0 ? 1.0 : static_cast<double>(tp) / pred;
    m.cr += pos == 0 ? 1.0 : static_cast<double>(tp) / pos;
    tp_all += tp;
    pred_all += pred;
    pos_all += pos;
  }
  m.map = ap_count == 0 ? 0.0 : ap_sum / ap_count;
  m.cp /= static_cast<double>(c);
  m.cr /= static_cast<double>(c);
  m.cf1 = naive_f1(m.cp, m.cr);
  m.op = pred_all == 0 ? 1.0 : static_cast<double>(tp_all) / pred_all;
  m.or_ = pos_all == 0 ? 1.0 : static_cast<double>(tp_all) / pos_all;
  m.of1 = naive_f1(m.op, m.or_);
  return m;
}

inline double naive_bce(const Matrix& p, const std::vector<LabelVector>& y) {
  double s = 0.0;
  for (Eigen::Index r = 0; r < p.rows(); ++r)
    for (Eigen::Index c = 0; c < p.cols(); ++c)
      s -= y[r][c] ? std::log(p(r, c)) : std::log(1.0 - p(r, c));
  return s;
}

// Seeded generators for property tests.
inline IsoGaussianMixture random_mixture(std::mt19937_64& rng, std::size_t components, int dim,
                                         double mean_lo, double mean_hi, double var_lo,
                                         double var_hi) {
  std::uniform_real_distribution<double> w(0.05, 1.0);
  std::uniform_real_distribution<double> mu(mean_lo, mean_hi);
  std::uniform_real_distribution<double> var(var_lo, var_hi);
  IsoGaussianMixture g;
  g.dim = dim;
  double total = 0.0;
  for (std::size_t k = 0; k < components; ++k) {
    g.weights.push_back(w(rng));
    total += g.weights.back();
    g.means.push_back(mu(rng));
    g.variances.push_back(var(rng));
  }
  for (double& x : g.weights) x /= total;
  return g;
}

inline LabelVector random_labels(std::mt19937_64& rng, std::size_t classes, double density,
                                 bool nonempty = true) {
  std::bernoulli_distribution on(density);
  std::uniform_int_distribution<std::size_t> pick(0, classes - 1);
  LabelVector y(classes);
  for (std::size_t c = 0; c < classes; ++c) y.bits[c] = on(rng) ? 1 : 0;
  if (nonempty && y.count() == 0) y.bits[pick(rng)] = 1;
  return y;
}

// Every non-empty label vector of length c, in binary order.
inline std::vector<LabelVector> all_label_vectors(std::size_t c) {
  std::vector<LabelVector> out;
  for (unsigned mask = 1; mask < (1u << c); ++mask) {
    LabelVector y(c);
    for (std::size_t k = 0; k < c; ++k) y.bits[k] = (mask >> k) & 1u;
    out.push_back(y);
  }
  return out;
}

}  // namespace gmcl::testing
