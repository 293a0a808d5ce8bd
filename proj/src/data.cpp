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

#include "gmcl/data.hpp"

#include <algorithm>
#include <bit>
#include <charconv>
#include <cstdio>
#include <cmath>
#include <fstream>
#include <numeric>
#include <sstream>

#include "gmcl/errors.hpp"
#include "gmcl/rng.hpp"

namespace gmcl {
namespace {

constexpr double kRatioClamp = 1e12;

double clamp_ratio(double num, double den) {
  if (den <= 0.0) return num > 0.0 ? kRatioClamp : 1.0;
  return std::clamp(num / den, 1.0 / kRatioClamp, kRatioClamp);
}

const Matrix& effective_cooccurrence(const SyntheticDatasetConfig& cfg, Matrix& storage) {
  if (cfg.cooccurrence.size() > 0) return cfg.cooccurrence;
  storage = grouped_cooccurrence(cfg.num_classes, 0.3, 0.8);
  return storage;
}

}  // namespace

std::string format_double(double v) {
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, res.ptr);
}

Matrix grouped_cooccurrence(int num_classes, double marginal, double within_pair) {
  require(num_classes >= 1, "num_classes must be positive");
  Matrix m = Matrix::Constant(num_classes, num_classes, marginal * marginal);
  for (int a = 0; a + 1 < num_classes; a += 2) {
    // P(b | a) = within_pair inside a group.
    m(a, a + 1) = m(a + 1, a) = marginal * within_pair;
  }
  for (int a = 0; a < num_classes; ++a) m(a, a) = marginal;
  return m;
}

Matrix independent_cooccurrence(int num_classes, double marginal) {
  Matrix m = Matrix::Constant(num_classes, num_classes, marginal * marginal);
  for (int a = 0; a < num_classes; ++a) m(a, a) = marginal;
  return m;
}

Matrix random_prototypes(int num_classes, int input_dim, std::uint64_t seed) {
  Rng rng(derive_seed(seed, 0x70726f746fULL));
  std::normal_distribution<double> normal(0.0, 1.0);
  Matrix p(num_classes, input_dim);
  for (int c = 0; c < num_classes; ++c) {
    for (int d = 0; d < input_dim; ++d) p(c, d) = normal(rng);
    p.row(c).normalize();
  }
  return p;
}

void SyntheticDatasetConfig::validate() const {
  require(num_samples >= 1, "num_samples must be positive");
  require(num_classes >= 1, "num_classes must be positive");
  require(input_dim >= 1, "input_dim must be positive");
  require(noise_scale >= 0.0 && std::isfinite(noise_scale), "noise_scale must be nonnegative");
  if (prototypes.size() > 0) {
    require(prototypes.rows() == num_classes && prototypes.cols() == input_dim,
            "prototypes must be num_classes x input_dim");
  }
  Matrix storage;
  const Matrix& m = effective_cooccurrence(*this, storage);
  require(m.rows() == num_classes && m.cols() == num_classes, "cooccurrence must be C x C");
  double marginal_total = 0.0;
  for (int a = 0; a < num_classes; ++a) {
    marginal_total += m(a, a);
    for (int b = 0; b < num_classes; ++b) {
      const double v = m(a, b);
      require(v >= 0.0 && v <= 1.0, "cooccurrence entries must lie in [0, 1]");
      require(v == m(b, a), "cooccurrence must be symmetric");
      if (a == b) continue;
      require(v <= std::min(m(a, a), m(b, b)) + 1e-12,
              "infeasible cooccurrence: pair probability exceeds a marginal");
      require(v >= m(a, a) + m(b, b) - 1.0 - 1e-12,
              "infeasible cooccurrence: pair probability below the Frechet lower bound");
    }
  }
  require(marginal_total > 0.0, "at least one class needs a positive marginal");
}

std::string canonical_text(const SyntheticDatasetConfig& cfg) {
  Matrix storage;
  const Matrix& m = effective_cooccurrence(cfg, storage);
  const Matrix protos = cfg.prototypes.size() > 0
                            ? cfg.prototypes
                            : random_prototypes(cfg.num_classes, cfg.input_dim, cfg.seed);
  std::ostringstream out;
  out << "samples=" << cfg.num_samples << ";classes=" << cfg.num_classes
      << ";input_dim=" << cfg.input_dim << ";noise=" << format_double(cfg.noise_scale)
      << ";seed=" << cfg.seed << ";cooccurrence=";
  for (Eigen::Index i = 0; i < m.size(); ++i) out << format_double(m.data()[i]) << ',';
  out << ";prototypes=";
  for (Eigen::Index i = 0; i < protos.size(); ++i) out << format_double(protos.data()[i]) << ',';
  return out.str();
}

std::uint64_t config_hash(const SyntheticDatasetConfig& cfg) { return fnv1a(canonical_text(cfg)); }

Dataset generate_synthetic(const SyntheticDatasetConfig& cfg) {
  cfg.validate();
  Matrix storage;
  const Matrix& m = effective_cooccurrence(cfg, storage);
  const Matrix protos = cfg.prototypes.size() > 0
                            ? cfg.prototypes
                            : random_prototypes(cfg.num_classes, cfg.input_dim, cfg.seed);
  const int c = cfg.num_classes;

  Dataset out;
  out.config_hash = config_hash(cfg);
  out.features = Matrix::Zero(cfg.num_samples, cfg.input_dim);
  out.labels.reserve(cfg.num_samples);

  Rng rng(derive_seed(cfg.seed, 0x6c6162656cULL));
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  std::normal_distribution<double> normal(0.0, 1.0);
  std::vector<double> marginals(c);
  for (int a = 0; a < c; ++a) marginals[a] = m(a, a);
  std::discrete_distribution<int> fallback(marginals.begin(), marginals.end());

  std::vector<int> order(c);
  std::vector<int> decided;
  decided.reserve(c);
  for (std::int64_t i = 0; i < cfg.num_samples; ++i) {
    LabelVector y(c);
    std::iota(order.begin(), order.end(), 0);
    std::shuffle(order.begin(), order.end(), rng);
    decided.clear();
    for (int b : order) {
      const double pb = m(b, b);
      double prob = pb;
      if (pb > 0.0 && pb < 1.0) {
        double odds = pb / (1.0 - pb);
        for (int a : decided) {
          const double pa_given_b = m(a, b) / pb;
          const double pa_given_not_b = (m(a, a) - m(a, b)) / (1.0 - pb);
          odds *= y[a] ? clamp_ratio(pa_given_b, pa_given_not_b)
                       : clamp_ratio(1.0 - pa_given_b, 1.0 - pa_given_not_b);
        }
        prob = odds / (1.0 + odds);
      }
      y.bits[b] = unit(rng) < prob ? 1 : 0;
      decided.push_back(b);
    }
    if (y.count() == 0) y.bits[fallback(rng)] = 1;

    for (int a = 0; a < c; ++a)
      if (y[a]) out.features.row(i) += protos.row(a);
    for (int d = 0; d < cfg.input_dim; ++d) {
      const double e = normal(rng);
      out.features(i, d) += cfg.noise_scale * e;
    }
    out.labels.push_back(std::move(y));
  }

  if (cfg.num_samples >= 100) {
    std::uniform_int_distribution<std::int64_t> pick(0, cfg.num_samples - 1);
    for (int a = 0; a < c; ++a) {
      if (marginals[a] <= 0.0) continue;
      const bool present = std::any_of(out.labels.begin(), out.labels.end(),
                                        [a](const LabelVector& y) { return y[a]; });
      if (present) continue;
      const std::int64_t i = pick(rng);
      out.labels[i].bits[a] = 1;
      out.features.row(i) += protos.row(a);
    }
  }
  return out;
}

bool operator==(const Dataset& a, const Dataset& b) {
  if (a.config_hash != b.config_hash || a.labels != b.labels) return false;
  if (a.features.rows() != b.features.rows() || a.features.cols() != b.features.cols()) return false;
  for (Eigen::Index i = 0; i < a.features.size(); ++i)
    if (std::bit_cast<std::uint64_t>(a.features.data()[i]) !=
        std::bit_cast<std::uint64_t>(b.features.data()[i]))
      return false;
  return true;
}

void AugmentConfig::validate() const {
  require(jitter >= 0.0, "jitter must be nonnegative");
  require(dropout >= 0.0 && dropout < 1.0, "dropout must lie in [0, 1)");
  require(scale_range >= 0.0 && scale_range < 1.0, "scale_range must lie in [0, 1)");
}

std::vector<double> augment(std::span<const double> x, std::uint64_t seed, const AugmentConfig& cfg) {
  cfg.validate();
  Rng rng(seed);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  std::normal_distribution<double> normal(0.0, 1.0);
  const double s = cfg.scale_range > 0.0 ? 1.0 - cfg.scale_range + 2.0 * cfg.scale_range * unit(rng) : 1.0;
  std::vector<double> out(x.begin(), x.end());
  for (double& v : out) {
    v *= s;
    if (cfg.dropout > 0.0 && unit(rng) < cfg.dropout) v = 0.0;
    if (cfg.jitter > 0.0) v += cfg.jitter * normal(rng);
  }
  return out;
}

ContrastiveBatch make_contrastive_batch(const Dataset& data, std::span<const std::size_t> indices,
                                        std::uint64_t seed, const AugmentConfig& cfg) {
  require(!indices.empty(), "contrastive batch needs at least one sample");
  const Eigen::Index d = data.features.cols();
  ContrastiveBatch batch;
  batch.views.resize(2 * static_cast<Eigen::Index>(indices.size()), d);
  batch.labels.reserve(2 * indices.size());
  batch.origin.reserve(2 * indices.size());
  std::vector<double> x(d);
  for (std::size_t k = 0; k < indices.size(); ++k) {
    const std::size_t src = indices[k];
    require(src < data.size(), "batch index out of range");
    for (Eigen::Index j = 0; j < d; ++j) x[j] = data.features(src, j);
    for (std::size_t v = 0; v < 2; ++v) {
      const std::size_t row = 2 * k + v;
      const auto aug = augment(x, derive_seed(seed, row), cfg);
      for (Eigen::Index j = 0; j < d; ++j) batch.views(row, j) = aug[j];
      batch.labels.push_back(data.labels[src]);
      batch.origin.push_back(src);
    }
  }
  return batch;
}

Split split_dataset(std::size_t n, double test_fraction, std::uint64_t seed) {
  require(test_fraction > 0.0 && test_fraction < 1.0, "test_fraction must lie in (0, 1)");
  std::vector<std::size_t> idx(n);
  std::iota(idx.begin(), idx.end(), 0);
  Rng rng(derive_seed(seed, 0x73706c6974ULL));
  std::shuffle(idx.begin(), idx.end(), rng);
  const auto n_test = static_cast<std::size_t>(std::llround(test_fraction * static_cast<double>(n)));
  Split s;
  s.test.assign(idx.begin(), idx.begin() + n_test);
  s.train.assign(idx.begin() + n_test, idx.end());
  std::sort(s.test.begin(), s.test.end());
  std::sort(s.train.begin(), s.train.end());
  return s;
}

std::string export_dataset(const Dataset& data) {
  std::ostringstream out;
  char hash[17];
  std::snprintf(hash, sizeof(hash), "%016llx", static_cast<unsigned long long>(data.config_hash));
  out << "# gmcl-dataset v1 config_hash=" << hash << " samples=" << data.size()
      << " classes=" << data.num_classes() << " input_dim=" << data.features.cols() << '\n';
  for (std::size_t i = 0; i < data.size(); ++i) {
    for (auto b : data.labels[i].bits) out << (b ? '1' : '0');
    for (Eigen::Index j = 0; j < data.features.cols(); ++j)
      out << ' ' << format_double(data.features(static_cast<Eigen::Index>(i), j));
    out << '\n';
  }
  return out.str();
}

Dataset import_dataset(const std::string& text) {
  std::istringstream in(text);
  std::string line;
  if (!std::getline(in, line)) throw IoError("empty dataset file");
  unsigned long long hash = 0;
  long long samples = 0;
  int classes = 0;
  long long dim = 0;
  if (std::sscanf(line.c_str(), "# gmcl-dataset v1 config_hash=%llx samples=%lld classes=%d input_dim=%lld",
                  &hash, &samples, &classes, &dim) != 4 ||
      samples < 0 || classes < 0 || dim < 0) {
    throw IoError("malformed dataset header");
  }
  Dataset data;
  data.config_hash = hash;
  data.features.resize(samples, dim);
  data.labels.reserve(samples);
  for (long long i = 0; i < samples; ++i) {
    if (!std::getline(in, line)) throw IoError("dataset truncated at record " + std::to_string(i));
    const char* p = line.data();
    const char* end = line.data() + line.size();
    LabelVector y(classes);
    for (int c = 0; c < classes; ++c, ++p) {
      if (p >= end || (*p != '0' && *p != '1')) throw IoError("malformed label bits in record " + std::to_string(i));
      y.bits[c] = *p == '1';
    }
    for (long long j = 0; j < dim; ++j) {
      if (p >= end || *p != ' ') throw IoError("malformed feature list in record " + std::to_string(i));
      ++p;
      double v = 0.0;
      const auto res = std::from_chars(p, end, v);
      if (res.ec != std::errc()) throw IoError("malformed feature value in record " + std::to_string(i));
      data.features(i, j) = v;
      p = res.ptr;
    }
    if (p != end) throw IoError("trailing characters in record " + std::to_string(i));
    data.labels.push_back(std::move(y));
  }
  return data;
}

void write_dataset(const std::filesystem::path& path, const Dataset& data) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot open " + path.string() + " for writing");
  out << export_dataset(data);
  if (!out) throw IoError("failed writing " + path.string());
}

Dataset read_dataset(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open dataset " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return import_dataset(ss.str());
}

}  // namespace gmcl
