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

#include "gmcl/losses.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include "gmcl/errors.hpp"
#include "gmcl/rng.hpp"

namespace gmcl {
namespace {

constexpr double kLog2Pi = 1.8378770664093454835606594728112;
constexpr double kNegInf = -std::numeric_limits<double>::infinity();
// Floor applied inside log() by the asymmetric loss.
constexpr double kAslLogFloor = 1e-8;

}  // namespace

std::string_view to_string(SimilarityBackend s) {
  return s == SimilarityBackend::kCorrelation ? "correlation" : "bhattacharyya_mc";
}

SimilarityBackend parse_similarity_backend(std::string_view name) {
  if (name == "correlation") return SimilarityBackend::kCorrelation;
  if (name == "bhattacharyya_mc") return SimilarityBackend::kBhattacharyyaMc;
  throw InputError("unknown similarity backend: " + std::string(name));
}

void ContrastiveLossConfig::validate() const {
  require(tau > 0.0 && std::isfinite(tau), "tau must be positive");
  require(alpha >= 0.0 && alpha <= 1.0, "alpha must lie in [0, 1]");
  require(lambda >= 0.0 && std::isfinite(lambda), "lambda must be nonnegative");
  require(mc_samples >= 2, "mc_samples must be at least 2");
}

void AslConfig::validate() const {
  require(gamma_pos >= 0.0 && gamma_neg >= 0.0, "ASL focusing exponents must be nonnegative");
  require(margin >= 0.0 && margin < 1.0, "ASL margin must lie in [0, 1)");
}

NllResult nll_loss(std::span<const IsoGaussianMixture> mixtures,
                   std::span<const std::vector<double>> targets) {
  require(mixtures.size() == targets.size(), "nll_loss needs one target per mixture");
  NllResult out;
  out.mixture_grads.reserve(mixtures.size());
  out.target_grads.reserve(mixtures.size());
  std::vector<double> terms;
  std::vector<double> sq;
  for (std::size_t i = 0; i < mixtures.size(); ++i) {
    const IsoGaussianMixture& g = mixtures[i];
    const std::vector<double>& z = targets[i];
    const double log_p = log_density(g, z);  // validates shapes
    if (!std::isfinite(log_p)) throw NumericError("nll_loss: non-finite log density at sample " + std::to_string(i));
    const std::size_t kc = g.components();
    const double n = g.dim;
    terms.assign(kc, 0.0);
    sq.assign(kc, 0.0);
    for (std::size_t k = 0; k < kc; ++k) {
      for (double zd : z) {
        const double d = zd - g.means[k];
        sq[k] += d * d;
      }
      // log of the k-th component density, without its weight.
      terms[k] = -0.5 * n * (kLog2Pi + std::log(g.variances[k])) - 0.5 * sq[k] / g.variances[k];
    }
    MixtureGradient mg(kc);
    std::vector<double> zg(z.size(), 0.0);
    for (std::size_t k = 0; k < kc; ++k) {
      const double v = g.variances[k];
      const double component_over_p = std::exp(terms[k] - log_p);
      const double resp = g.weights[k] * component_over_p;
      mg.weights[k] = -component_over_p;
      double diff_sum = 0.0;
      for (std::size_t d = 0; d < z.size(); ++d) {
        const double diff = z[d] - g.means[k];
        diff_sum += diff;
        zg[d] += resp * diff / v;
      }
      mg.means[k] = -resp * diff_sum / v;
      mg.variances[k] = -resp * (-0.5 * n / v + 0.5 * sq[k] / (v * v));
    }
    out.value -= log_p;
    out.mixture_grads.push_back(std::move(mg));
    out.target_grads.push_back(std::move(zg));
  }
  require_finite(out.value, "nll_loss");
  return out;
}

PclResult pcl_loss(std::span<const IsoGaussianMixture> mixtures, std::span<const LabelVector> labels,
                   const ContrastiveLossConfig& cfg, bool with_gradients) {
  cfg.validate();
  const std::size_t b = mixtures.size();
  require(b >= 2, "contrastive loss needs at least two views");
  require(labels.size() == b, "contrastive loss needs one label vector per view");
  if (with_gradients && cfg.sim != SimilarityBackend::kCorrelation) {
    throw InputError("similarity backend " + std::string(to_string(cfg.sim)) +
                     " provides no gradients");
  }

  PclResult out;
  out.positives = positive_sets(labels, cfg.alpha, cfg.measure);
  out.similarity = Matrix::Zero(b, b);

  const bool correlation = cfg.sim == SimilarityBackend::kCorrelation;
  std::vector<CrossTerms> self_terms;
  std::vector<CrossTerms> pair_terms;
  if (correlation) {
    self_terms.reserve(b);
    for (std::size_t i = 0; i < b; ++i) {
      log_mixture_cross_integral(mixtures[i], mixtures[i]);  // structural checks
      require(mixtures[i].dim == mixtures[0].dim, "contrastive loss needs a shared mixture dimension");
      self_terms.push_back(cross_terms(mixtures[i], mixtures[i]));
    }
    if (with_gradients) pair_terms.reserve(b * (b - 1) / 2);
  }
  for (std::size_t i = 0; i < b; ++i) {
    for (std::size_t j = i + 1; j < b; ++j) {
      double s = 0.0;
      if (correlation) {
        CrossTerms terms = cross_terms(mixtures[i], mixtures[j]);
        s = std::exp(terms.log_integral - 0.5 * self_terms[i].log_integral -
                     0.5 * self_terms[j].log_integral);
        if (with_gradients) pair_terms.push_back(std::move(terms));
      } else {
        s = bhattacharyya_coefficient_mc(mixtures[i], mixtures[j], cfg.mc_samples,
                                         derive_seed(cfg.mc_seed, i * b + j))
                .estimate;
      }
      out.similarity(i, j) = s;
      out.similarity(j, i) = s;
    }
  }

  // d loss / d Sim(i, l), before symmetrization.
  Matrix d_sim = Matrix::Zero(b, b);
  std::vector<double> logits(b);
  for (std::size_t i = 0; i < b; ++i) {
    const auto& members = out.positives[i].members;
    if (members.empty()) continue;
    double m = kNegInf;
    for (std::size_t l = 0; l < b; ++l) {
      if (l == i) continue;
      logits[l] = out.similarity(i, l) / cfg.tau;
      m = std::max(m, logits[l]);
    }
    double acc = 0.0;
    for (std::size_t l = 0; l < b; ++l)
      if (l != i) acc += std::exp(logits[l] - m);
    const double log_denominator = m + std::log(acc);

    const double inv_size = 1.0 / static_cast<double>(members.size());
    double anchor = 0.0;
    double weight_sum = 0.0;
    for (const PositiveMember& pm : members) {
      anchor += pm.weight * (logits[pm.index] - log_denominator);
      weight_sum += pm.weight;
      d_sim(i, pm.index) -= inv_size * pm.weight / cfg.tau;
    }
    out.value -= inv_size * anchor;
    for (std::size_t l = 0; l < b; ++l) {
      if (l == i) continue;
      d_sim(i, l) += inv_size * weight_sum * std::exp(logits[l] - log_denominator) / cfg.tau;
    }
  }
  require_finite(out.value, "pcl_loss");
  if (!with_gradients) return out;

  out.mixture_grads.reserve(b);
  for (const auto& g : mixtures) out.mixture_grads.emplace_back(g.components());
  // Sim = exp(log S_ij - log S_ii / 2 - log S_jj / 2).
  std::vector<double> self_upstream(b, 0.0);
  std::size_t pair = 0;
  for (std::size_t i = 0; i < b; ++i) {
    for (std::size_t j = i + 1; j < b; ++j, ++pair) {
      const double g = d_sim(i, j) + d_sim(j, i);
      if (g == 0.0) continue;
      const double upstream = g * out.similarity(i, j);
      accumulate_cross_gradient(mixtures[i], mixtures[j], pair_terms[pair], upstream,
                                &out.mixture_grads[i], &out.mixture_grads[j]);
      self_upstream[i] -= 0.5 * upstream;
      self_upstream[j] -= 0.5 * upstream;
    }
  }
  for (std::size_t i = 0; i < b; ++i) {
    if (self_upstream[i] == 0.0) continue;
    accumulate_cross_gradient(mixtures[i], mixtures[i], self_terms[i], self_upstream[i],
                              &out.mixture_grads[i], &out.mixture_grads[i]);
  }
  return out;
}

double total_loss(double nll, double pcl, double lambda) {
  require(lambda >= 0.0, "lambda must be nonnegative");
  return nll + lambda * pcl;
}

AslResult asl_loss(const Matrix& probabilities, std::span<const LabelVector> labels,
                   const AslConfig& cfg) {
  cfg.validate();
  require(static_cast<std::size_t>(probabilities.rows()) == labels.size(),
          "asl_loss needs one label vector per row");
  AslResult out;
  out.prob_grads = Matrix::Zero(probabilities.rows(), probabilities.cols());
  for (Eigen::Index r = 0; r < probabilities.rows(); ++r) {
    require(labels[r].size() == static_cast<std::size_t>(probabilities.cols()),
            "asl_loss: label length does not match class count");
    for (Eigen::Index c = 0; c < probabilities.cols(); ++c) {
      const double p = probabilities(r, c);
      if (!(p >= 0.0 && p <= 1.0)) throw InputError("asl_loss: probability outside [0, 1]");
      if (labels[r][c]) {
        const double log_p = std::log(std::max(p, kAslLogFloor));
        const double focus = cfg.gamma_pos == 0.0 ? 1.0 : std::pow(1.0 - p, cfg.gamma_pos);
        out.value -= focus * log_p;
        double g = 0.0;
        if (p > kAslLogFloor) g -= focus / p;
        if (cfg.gamma_pos > 0.0 && p < 1.0) g += cfg.gamma_pos * std::pow(1.0 - p, cfg.gamma_pos - 1.0) * log_p;
        out.prob_grads(r, c) = g;
      } else {
        const double shifted = std::max(p - cfg.margin, 0.0);
        // Clipped region: value and gradient are both zero.
        if (cfg.margin > 0.0 && shifted <= 0.0) continue;
        const double q = 1.0 - shifted;
        const double log_q = std::log(std::max(q, kAslLogFloor));
        const double focus = cfg.gamma_neg == 0.0 ? 1.0 : std::pow(shifted, cfg.gamma_neg);
        out.value -= focus * log_q;
        double g = 0.0;
        if (q > kAslLogFloor) g += focus / q;
        if (cfg.gamma_neg > 0.0 && shifted > 0.0) g -= cfg.gamma_neg * std::pow(shifted, cfg.gamma_neg - 1.0) * log_q;
        out.prob_grads(r, c) = g;
      }
    }
  }
  require_finite(out.value, "asl_loss");
  return out;
}

std::vector<IsoGaussianMixture> mixtures_from_rows(const Matrix& pi, const Matrix& mu,
                                                   const Matrix& var, int dim) {
  require(pi.rows() == mu.rows() && pi.rows() == var.rows() && pi.cols() == mu.cols() &&
              pi.cols() == var.cols(),
          "mixture parameter matrices disagree in shape");
  std::vector<IsoGaussianMixture> out(pi.rows());
  for (Eigen::Index r = 0; r < pi.rows(); ++r) {
    auto& g = out[r];
    g.dim = dim;
    g.weights.resize(pi.cols());
    g.means.resize(pi.cols());
    g.variances.resize(pi.cols());
    for (Eigen::Index c = 0; c < pi.cols(); ++c) {
      g.weights[c] = pi(r, c);
      g.means[c] = mu(r, c);
      g.variances[c] = var(r, c);
    }
  }
  return out;
}

namespace {

void scatter(const std::vector<MixtureGradient>& grads, Matrix& d_pi, Matrix& d_mu, Matrix& d_var) {
  for (std::size_t r = 0; r < grads.size(); ++r) {
    for (std::size_t c = 0; c < grads[r].weights.size(); ++c) {
      d_pi(r, c) = grads[r].weights[c];
      d_mu(r, c) = grads[r].means[c];
      d_var(r, c) = grads[r].variances[c];
    }
  }
}

}  // namespace

Var nll_loss(Tape& t, Var pi, Var mu, Var var, Var z) {
  const Matrix& zv = t.value(z);
  require(zv.rows() == t.value(pi).rows(), "nll_loss: target rows do not match mixtures");
  const auto mixtures = mixtures_from_rows(t.value(pi), t.value(mu), t.value(var),
                                           static_cast<int>(zv.cols()));
  std::vector<std::vector<double>> targets(zv.rows());
  for (Eigen::Index r = 0; r < zv.rows(); ++r) {
    targets[r].resize(zv.cols());
    for (Eigen::Index c = 0; c < zv.cols(); ++c) targets[r][c] = zv(r, c);
  }
  NllResult res = nll_loss(mixtures, targets);
  const Eigen::Index rows = zv.rows();
  const Eigen::Index comps = t.value(pi).cols();
  Matrix d_pi(rows, comps), d_mu(rows, comps), d_var(rows, comps), d_z(rows, zv.cols());
  scatter(res.mixture_grads, d_pi, d_mu, d_var);
  for (Eigen::Index r = 0; r < rows; ++r)
    for (Eigen::Index c = 0; c < zv.cols(); ++c) d_z(r, c) = res.target_grads[r][c];
  Matrix value(1, 1);
  value(0, 0) = res.value;
  return t.record("nll_loss", {pi, mu, var, z}, std::move(value),
                  [=](Tape& tp, const Matrix& g) {
                    const double s = g(0, 0);
                    tp.accumulate(pi, s * d_pi);
                    tp.accumulate(mu, s * d_mu);
                    tp.accumulate(var, s * d_var);
                    tp.accumulate(z, s * d_z);
                  });
}

Var pcl_loss(Tape& t, Var pi, Var mu, Var var, int dim, std::span<const LabelVector> labels,
             const ContrastiveLossConfig& cfg) {
  const auto mixtures = mixtures_from_rows(t.value(pi), t.value(mu), t.value(var), dim);
  PclResult res = pcl_loss(mixtures, labels, cfg, /*with_gradients=*/true);
  const Eigen::Index rows = t.value(pi).rows();
  const Eigen::Index comps = t.value(pi).cols();
  Matrix d_pi(rows, comps), d_mu(rows, comps), d_var(rows, comps);
  scatter(res.mixture_grads, d_pi, d_mu, d_var);
  Matrix value(1, 1);
  value(0, 0) = res.value;
  return t.record("pcl_loss", {pi, mu, var}, std::move(value), [=](Tape& tp, const Matrix& g) {
    const double s = g(0, 0);
    tp.accumulate(pi, s * d_pi);
    tp.accumulate(mu, s * d_mu);
    tp.accumulate(var, s * d_var);
  });
}

Var total_loss(Tape& t, Var nll, Var pcl, double lambda) {
  require(lambda >= 0.0, "lambda must be nonnegative");
  return add(t, nll, scale(t, pcl, lambda));
}

Var asl_loss(Tape& t, Var probabilities, std::span<const LabelVector> labels, const AslConfig& cfg) {
  AslResult res = asl_loss(t.value(probabilities), labels, cfg);
  Matrix value(1, 1);
  value(0, 0) = res.value;
  Matrix d_p = std::move(res.prob_grads);
  return t.record("asl_loss", {probabilities}, std::move(value),
                  [probabilities, d_p](Tape& tp, const Matrix& g) {
                    tp.accumulate(probabilities, g(0, 0) * d_p);
                  });
}

}  // namespace gmcl
