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

#include "gmcl/model.hpp"

#include <bit>
#include <cmath>
#include <string>

#include "gmcl/errors.hpp"
#include "gmcl/losses.hpp"
#include "gmcl/rng.hpp"

namespace gmcl {
namespace {

Matrix uniform_matrix(Eigen::Index rows, Eigen::Index cols, double bound, Rng& rng) {
  std::uniform_real_distribution<double> u(-bound, bound);
  Matrix m(rows, cols);
  // Column-major fill, matching Eigen's storage order.
  for (Eigen::Index i = 0; i < m.size(); ++i) m.data()[i] = u(rng);
  return m;
}

void add_uniform_layer(ParameterSet& set, const std::string& name, int fan_in, int fan_out,
                       std::uint64_t seed) {
  Rng rng(derive_seed(seed, fnv1a(name)));
  const double bound = 1.0 / std::sqrt(static_cast<double>(fan_in));
  set.add(name + ".weight", uniform_matrix(fan_in, fan_out, bound, rng));
  set.add(name + ".bias", uniform_matrix(1, fan_out, bound, rng));
}

std::size_t layer_count(int in, int out) {
  return static_cast<std::size_t>(in) * out + static_cast<std::size_t>(out);
}

Var dense(Tape& t, const ModelParams& p, const std::vector<Var>& vars, const std::string& name, Var x) {
  return affine(t, x, vars[p.tensors.index_of(name + ".weight")],
                vars[p.tensors.index_of(name + ".bias")]);
}

std::vector<Var> bind_constants(Tape& t, const ModelParams& params) {
  return bind(t, params.tensors, {});
}

}  // namespace

void ModelConfig::validate() const {
  require(input_dim >= 1, "input_dim must be positive");
  require(embedding_dim >= 1, "embedding_dim must be positive");
  require(mixture_dim >= 1, "mixture_dim must be positive");
  require(num_classes >= 1, "num_classes must be positive");
  for (int h : encoder_hidden) require(h >= 1, "encoder hidden sizes must be positive");
  for (int h : mdn_hidden) require(h >= 1, "mdn hidden sizes must be positive");
}

ModelParams init_params(const ModelConfig& config, std::uint64_t seed) {
  config.validate();
  ModelParams out;
  out.config = config;
  out.seed = seed;
  ParameterSet& set = out.tensors;

  int in = config.input_dim;
  std::size_t layer = 0;
  for (int h : config.encoder_hidden) {
    add_uniform_layer(set, "encoder.layer" + std::to_string(layer++), in, h, seed);
    in = h;
  }
  add_uniform_layer(set, "encoder.layer" + std::to_string(layer), in, config.embedding_dim, seed);

  in = config.embedding_dim;
  layer = 0;
  for (int h : config.mdn_hidden) {
    add_uniform_layer(set, "mdn.hidden" + std::to_string(layer++), in, h, seed);
    in = h;
  }
  const int c = config.num_classes;
  add_uniform_layer(set, "mdn.pi", in, c, seed);
  add_uniform_layer(set, "mdn.mu", in, c, seed);
  set.add("mdn.var.weight", Matrix::Ones(in, c));
  set.add("mdn.var.bias", Matrix::Zero(1, c));
  add_uniform_layer(set, "mdn.z", config.embedding_dim, config.mixture_dim, seed);

  add_uniform_layer(set, "classifier", config.embedding_dim, c, seed);
  return out;
}

std::size_t analytic_parameter_count(const ModelConfig& config) {
  std::size_t n = 0;
  int in = config.input_dim;
  for (int h : config.encoder_hidden) {
    n += layer_count(in, h);
    in = h;
  }
  n += layer_count(in, config.embedding_dim);
  in = config.embedding_dim;
  for (int h : config.mdn_hidden) {
    n += layer_count(in, h);
    in = h;
  }
  n += 3 * layer_count(in, config.num_classes);
  n += layer_count(config.embedding_dim, config.mixture_dim);
  n += layer_count(config.embedding_dim, config.num_classes);
  return n;
}

std::uint64_t fingerprint(const ParameterSet& params, std::string_view prefix) {
  std::uint64_t h = fnv1a("");
  for (const NamedTensor& t : params) {
    if (!std::string_view(t.name).starts_with(prefix)) continue;
    h = fnv1a(t.name, h);
    const std::int64_t shape[2] = {t.value.rows(), t.value.cols()};
    h = fnv1a({reinterpret_cast<const char*>(shape), sizeof(shape)}, h);
    h = fnv1a({reinterpret_cast<const char*>(t.value.data()),
               static_cast<std::size_t>(t.value.size()) * sizeof(double)},
              h);
  }
  return h;
}

Var encoder_forward(Tape& t, const ModelParams& params, const std::vector<Var>& vars, Var x) {
  const ModelConfig& c = params.config;
  require(t.value(x).cols() == c.input_dim, "encoder input width does not match input_dim");
  Var h = x;
  const std::size_t layers = c.encoder_hidden.size();
  for (std::size_t i = 0; i < layers; ++i) {
    h = relu(t, dense(t, params, vars, "encoder.layer" + std::to_string(i), h));
  }
  h = dense(t, params, vars, "encoder.layer" + std::to_string(layers), h);
  return l2_normalize_rows(t, h);
}

MdnOutput mdn_forward(Tape& t, const ModelParams& params, const std::vector<Var>& vars, Var h) {
  const ModelConfig& c = params.config;
  require(t.value(h).cols() == c.embedding_dim, "mdn input width does not match embedding_dim");
  Var a = h;
  for (std::size_t i = 0; i < c.mdn_hidden.size(); ++i) {
    a = elu(t, dense(t, params, vars, "mdn.hidden" + std::to_string(i), a));
  }
  MdnOutput out;
  out.pi = softmax_rows(t, dense(t, params, vars, "mdn.pi", a));
  out.mu = dense(t, params, vars, "mdn.mu", a);
  // ELU(a) + 2 has infimum 1, the variance floor.
  out.var = add_scalar(t, elu(t, dense(t, params, vars, "mdn.var", a)), 2.0);
  out.z = dense(t, params, vars, "mdn.z", h);
  return out;
}

Var classifier_forward(Tape& t, const ModelParams& params, const std::vector<Var>& vars, Var h) {
  require(t.value(h).cols() == params.config.embedding_dim,
          "classifier input width does not match embedding_dim");
  return sigmoid(t, dense(t, params, vars, "classifier", h));
}

Matrix encode(const ModelParams& params, const Matrix& x) {
  Tape t;
  const auto vars = bind_constants(t, params);
  return t.value(encoder_forward(t, params, vars, t.constant(x, "x")));
}

MdnValues mdn_values(const ModelParams& params, const Matrix& h) {
  Tape t;
  const auto vars = bind_constants(t, params);
  const MdnOutput o = mdn_forward(t, params, vars, t.constant(h, "h"));
  MdnValues out;
  out.mixtures = mixtures_from_rows(t.value(o.pi), t.value(o.mu), t.value(o.var),
                                    params.config.mixture_dim);
  out.z = t.value(o.z);
  return out;
}

Matrix classify(const ModelParams& params, const Matrix& h) {
  Tape t;
  const auto vars = bind_constants(t, params);
  return t.value(classifier_forward(t, params, vars, t.constant(h, "h")));
}

}  // namespace gmcl
