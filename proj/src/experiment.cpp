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

#include "gmcl/experiment.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <numeric>
#include <set>
#include <sstream>

#include "gmcl/checkpoint.hpp"
#include "gmcl/errors.hpp"
#include "gmcl/rng.hpp"
#include "json.hpp"

namespace gmcl {
namespace {

using Json = nlohmann::ordered_json;

// Stream tags for derive_seed.
constexpr std::uint64_t kInitStream = 1;
constexpr std::uint64_t kShuffleStream = 2;
constexpr std::uint64_t kAugmentStream = 3;
constexpr std::uint64_t kClassifierShuffleStream = 4;
constexpr std::uint64_t kClassifierAugmentStream = 5;
constexpr std::uint64_t kSplitStream = 6;

Json matrix_to_json(const Matrix& m) {
  Json rows = Json::array();
  for (Eigen::Index r = 0; r < m.rows(); ++r) {
    Json row = Json::array();
    for (Eigen::Index c = 0; c < m.cols(); ++c) row.push_back(m(r, c));
    rows.push_back(std::move(row));
  }
  return rows;
}

Matrix matrix_from_json(const Json& j, const char* what) {
  if (!j.is_array()) throw InputError(std::string(what) + " must be an array of rows");
  const auto rows = static_cast<Eigen::Index>(j.size());
  const auto cols = rows > 0 ? static_cast<Eigen::Index>(j[0].size()) : 0;
  Matrix m(rows, cols);
  for (Eigen::Index r = 0; r < rows; ++r) {
    if (!j[r].is_array() || static_cast<Eigen::Index>(j[r].size()) != cols)
      throw InputError(std::string(what) + " rows must have equal length");
    for (Eigen::Index c = 0; c < cols; ++c) m(r, c) = j[r][c].get<double>();
  }
  return m;
}

Json schedule_to_json(const StageSchedule& s) {
  Json j;
  j["epochs"] = s.epochs;
  j["batch_size"] = s.batch_size;
  j["peak_lr"] = s.peak_lr;
  j["warmup_fraction"] = s.shape.warmup_fraction;
  j["initial_div"] = s.shape.initial_div;
  j["final_div"] = s.shape.final_div;
  return j;
}

// Visits every key of an object, rejecting ones the handler does not know.
template <typename Handler>
void for_each_key(const Json& obj, const std::string& section, Handler&& handler) {
  if (!obj.is_object()) throw InputError("config section '" + section + "' must be an object");
  for (auto it = obj.begin(); it != obj.end(); ++it) {
    if (!handler(it.key(), it.value()))
      throw InputError("unknown config key '" + section + "." + it.key() + "'");
  }
}

StageSchedule schedule_from_json(const Json& j, StageSchedule s, const std::string& section) {
  for_each_key(j, section, [&](const std::string& k, const Json& v) {
    if (k == "epochs") s.epochs = v.get<int>();
    else if (k == "batch_size") s.batch_size = v.get<int>();
    else if (k == "peak_lr") s.peak_lr = v.get<double>();
    else if (k == "warmup_fraction") s.shape.warmup_fraction = v.get<double>();
    else if (k == "initial_div") s.shape.initial_div = v.get<double>();
    else if (k == "final_div") s.shape.final_div = v.get<double>();
    else return false;
    return true;
  });
  return s;
}

void validate_schedule(const StageSchedule& s, const char* name, bool even_batch) {
  const std::string n(name);
  require(s.epochs >= 1, n + ".epochs must be positive");
  require(s.batch_size >= (even_batch ? 2 : 1), n + ".batch_size too small");
  if (even_batch) require(s.batch_size % 2 == 0, n + ".batch_size must be even (two views per sample)");
  require(s.peak_lr > 0.0, n + ".peak_lr must be positive");
  require(s.shape.warmup_fraction > 0.0 && s.shape.warmup_fraction < 1.0,
          n + ".warmup_fraction must lie in (0, 1)");
  require(s.shape.initial_div >= 1.0 && s.shape.final_div >= 1.0, n + " lr divisors must be >= 1");
}

std::vector<std::vector<std::size_t>> make_batches(std::span<const std::size_t> pool,
                                                   std::size_t batch, std::uint64_t seed) {
  std::vector<std::size_t> order(pool.begin(), pool.end());
  Rng rng(seed);
  std::shuffle(order.begin(), order.end(), rng);
  std::vector<std::vector<std::size_t>> out;
  for (std::size_t i = 0; i < order.size(); i += batch) {
    out.emplace_back(order.begin() + static_cast<std::ptrdiff_t>(i),
                     order.begin() + static_cast<std::ptrdiff_t>(std::min(order.size(), i + batch)));
  }
  return out;
}

std::int64_t steps_per_epoch(std::size_t pool, std::size_t batch) {
  return static_cast<std::int64_t>((pool + batch - 1) / batch);
}

}  // namespace

void ExperimentConfig::validate() const {
  dataset.validate();
  model.validate();
  contrastive.validate();
  asl.validate();
  augment.validate();
  validate_schedule(contrastive_stage, "contrastive_stage", true);
  validate_schedule(classifier_stage, "classifier_stage", false);
  require(test_fraction > 0.0 && test_fraction < 1.0, "test_fraction must lie in (0, 1)");
  require(threshold > 0.0 && threshold < 1.0, "threshold must lie in (0, 1)");
  require(model.num_classes == dataset.num_classes, "model.num_classes must equal dataset.num_classes");
  require(model.input_dim == dataset.input_dim, "model.input_dim must equal dataset.input_dim");
}

ExperimentConfig default_experiment_config() {
  ExperimentConfig cfg;
  cfg.dataset.cooccurrence = grouped_cooccurrence(cfg.dataset.num_classes, 0.3, 0.8);
  return cfg;
}

std::string hex64(std::uint64_t v) {
  char buf[17];
  std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(v));
  return buf;
}

std::string config_to_json(const ExperimentConfig& cfg) {
  Json j;
  j["seed"] = cfg.seed;
  j["threshold"] = cfg.threshold;
  j["test_fraction"] = cfg.test_fraction;

  Json d;
  d["num_samples"] = cfg.dataset.num_samples;
  d["num_classes"] = cfg.dataset.num_classes;
  d["input_dim"] = cfg.dataset.input_dim;
  d["noise_scale"] = cfg.dataset.noise_scale;
  d["seed"] = cfg.dataset.seed;
  d["cooccurrence"] = matrix_to_json(cfg.dataset.cooccurrence.size() > 0
                                         ? cfg.dataset.cooccurrence
                                         : grouped_cooccurrence(cfg.dataset.num_classes, 0.3, 0.8));
  if (cfg.dataset.prototypes.size() > 0) d["prototypes"] = matrix_to_json(cfg.dataset.prototypes);
  j["dataset"] = d;

  j["model"] = Json::parse(model_config_to_json(cfg.model));

  Json c;
  c["tau"] = cfg.contrastive.tau;
  c["alpha"] = cfg.contrastive.alpha;
  c["lambda"] = cfg.contrastive.lambda;
  c["measure"] = std::string(to_string(cfg.contrastive.measure));
  c["similarity"] = std::string(to_string(cfg.contrastive.sim));
  c["mc_samples"] = cfg.contrastive.mc_samples;
  c["mc_seed"] = cfg.contrastive.mc_seed;
  j["contrastive"] = c;

  Json a;
  a["gamma_pos"] = cfg.asl.gamma_pos;
  a["gamma_neg"] = cfg.asl.gamma_neg;
  a["margin"] = cfg.asl.margin;
  j["asl"] = a;

  Json g;
  g["jitter"] = cfg.augment.jitter;
  g["dropout"] = cfg.augment.dropout;
  g["scale_range"] = cfg.augment.scale_range;
  j["augment"] = g;

  j["contrastive_stage"] = schedule_to_json(cfg.contrastive_stage);
  j["classifier_stage"] = schedule_to_json(cfg.classifier_stage);
  return j.dump(2) + "\n";
}

ExperimentConfig config_from_json(const std::string& text) {
  ExperimentConfig cfg;
  // Either an explicit matrix or a generator spec materialized once
  // num_classes is known.
  bool explicit_cooccurrence = false;
  bool co_independent = false;
  double co_marginal = 0.3;
  double co_within = 0.8;
  try {
    const Json j = Json::parse(text);
    for_each_key(j, "root", [&](const std::string& k, const Json& v) {
      if (k == "seed") cfg.seed = v.get<std::uint64_t>();
      else if (k == "threshold") cfg.threshold = v.get<double>();
      else if (k == "test_fraction") cfg.test_fraction = v.get<double>();
      else if (k == "dataset") {
        for_each_key(v, "dataset", [&](const std::string& dk, const Json& dv) {
          if (dk == "num_samples") cfg.dataset.num_samples = dv.get<std::int64_t>();
          else if (dk == "num_classes") cfg.dataset.num_classes = dv.get<int>();
          else if (dk == "input_dim") cfg.dataset.input_dim = dv.get<int>();
          else if (dk == "noise_scale") cfg.dataset.noise_scale = dv.get<double>();
          else if (dk == "seed") cfg.dataset.seed = dv.get<std::uint64_t>();
          else if (dk == "cooccurrence") {
            if (dv.is_object()) {
              std::string kind = "grouped";
              for_each_key(dv, "dataset.cooccurrence", [&](const std::string& ck, const Json& cv) {
                if (ck == "kind") kind = cv.get<std::string>();
                else if (ck == "marginal") co_marginal = cv.get<double>();
                else if (ck == "within_pair") co_within = cv.get<double>();
                else return false;
                return true;
              });
              if (kind == "independent") co_independent = true;
              else if (kind != "grouped") throw InputError("unknown cooccurrence kind: " + kind);
              explicit_cooccurrence = false;
            } else {
              cfg.dataset.cooccurrence = matrix_from_json(dv, "dataset.cooccurrence");
              explicit_cooccurrence = true;
            }
          } else if (dk == "prototypes") cfg.dataset.prototypes = matrix_from_json(dv, "dataset.prototypes");
          else return false;
          return true;
        });
      } else if (k == "model") {
        for_each_key(v, "model", [&](const std::string& mk, const Json& mv) {
          if (mk == "input_dim") cfg.model.input_dim = mv.get<int>();
          else if (mk == "encoder_hidden") cfg.model.encoder_hidden = mv.get<std::vector<int>>();
          else if (mk == "embedding_dim") cfg.model.embedding_dim = mv.get<int>();
          else if (mk == "mixture_dim") cfg.model.mixture_dim = mv.get<int>();
          else if (mk == "num_classes") cfg.model.num_classes = mv.get<int>();
          else if (mk == "mdn_hidden") cfg.model.mdn_hidden = mv.get<std::vector<int>>();
          else return false;
          return true;
        });
      } else if (k == "contrastive") {
        for_each_key(v, "contrastive", [&](const std::string& ck, const Json& cv) {
          if (ck == "tau") cfg.contrastive.tau = cv.get<double>();
          else if (ck == "alpha") cfg.contrastive.alpha = cv.get<double>();
          else if (ck == "lambda") cfg.contrastive.lambda = cv.get<double>();
          else if (ck == "measure") cfg.contrastive.measure = parse_overlap_measure(cv.get<std::string>());
          else if (ck == "similarity") cfg.contrastive.sim = parse_similarity_backend(cv.get<std::string>());
          else if (ck == "mc_samples") cfg.contrastive.mc_samples = cv.get<std::int64_t>();
          else if (ck == "mc_seed") cfg.contrastive.mc_seed = cv.get<std::uint64_t>();
          else return false;
          return true;
        });
      } else if (k == "asl") {
        for_each_key(v, "asl", [&](const std::string& ak, const Json& av) {
          if (ak == "gamma_pos") cfg.asl.gamma_pos = av.get<double>();
          else if (ak == "gamma_neg") cfg.asl.gamma_neg = av.get<double>();
          else if (ak == "margin") cfg.asl.margin = av.get<double>();
          else return false;
          return true;
        });
      } else if (k == "augment") {
        for_each_key(v, "augment", [&](const std::string& gk, const Json& gv) {
          if (gk == "jitter") cfg.augment.jitter = gv.get<double>();
          else if (gk == "dropout") cfg.augment.dropout = gv.get<double>();
          else if (gk == "scale_range") cfg.augment.scale_range = gv.get<double>();
          else return false;
          return true;
        });
      } else if (k == "contrastive_stage") {
        cfg.contrastive_stage = schedule_from_json(v, cfg.contrastive_stage, "contrastive_stage");
      } else if (k == "classifier_stage") {
        cfg.classifier_stage = schedule_from_json(v, cfg.classifier_stage, "classifier_stage");
      } else {
        return false;
      }
      return true;
    });
  } catch (const nlohmann::json::exception& e) {
    throw InputError(std::string("malformed config: ") + e.what());
  }
  const int c = cfg.dataset.num_classes;
  require(c >= 1, "dataset.num_classes must be positive");
  if (!explicit_cooccurrence) {
    cfg.dataset.cooccurrence = co_independent ? independent_cooccurrence(c, co_marginal)
                                              : grouped_cooccurrence(c, co_marginal, co_within);
  }
  return cfg;
}

ExperimentConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open config " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return config_from_json(ss.str());
}

std::uint64_t experiment_hash(const ExperimentConfig& cfg) { return fnv1a(config_to_json(cfg)); }

ContrastiveRun train_contrastive(const ExperimentConfig& cfg, const Dataset& data,
                                 std::span<const std::size_t> train) {
  cfg.validate();
  require(!train.empty(), "training split is empty");
  ContrastiveRun run;
  run.params = init_params(cfg.model, derive_seed(cfg.seed, kInitStream));
  ModelParams& params = run.params;

  std::vector<std::size_t> trainable = params.tensors.select(kEncoderPrefix);
  for (std::size_t i : params.tensors.select(kMdnPrefix)) trainable.push_back(i);
  OptimizerState opt = make_optimizer(params.tensors, trainable);

  const StageSchedule& sched = cfg.contrastive_stage;
  const auto samples_per_batch = static_cast<std::size_t>(sched.batch_size / 2);
  const std::int64_t per_epoch = steps_per_epoch(train.size(), samples_per_batch);
  const std::int64_t total_steps = per_epoch * sched.epochs;
  std::int64_t step = 0;
  double positive_total = 0.0;
  std::int64_t anchor_total = 0;

  for (int epoch = 0; epoch < sched.epochs; ++epoch) {
    ContrastiveEpoch rec;
    rec.epoch = epoch + 1;
    double epoch_positive = 0.0;
    std::int64_t epoch_anchors = 0;
    const auto batches = make_batches(train, samples_per_batch,
                                      derive_seed(cfg.seed, kShuffleStream ^ (static_cast<std::uint64_t>(epoch) << 8)));
    for (const auto& batch_idx : batches) {
      const ContrastiveBatch batch = make_contrastive_batch(
          data, batch_idx, derive_seed(derive_seed(cfg.seed, kAugmentStream), static_cast<std::uint64_t>(step)),
          cfg.augment);
      double nll_value = 0.0;
      double pcl_value = 0.0;
      const LossBuilder loss = [&](Tape& t, const std::vector<Var>& vars) {
        const Var x = t.constant(batch.views, "views");
        const Var h = encoder_forward(t, params, vars, x);
        const MdnOutput m = mdn_forward(t, params, vars, h);
        const Var nll = nll_loss(t, m.pi, m.mu, m.var, m.z);
        const Var pcl = pcl_loss(t, m.pi, m.mu, m.var, params.config.mixture_dim, batch.labels, cfg.contrastive);
        nll_value = t.scalar(nll);
        pcl_value = t.scalar(pcl);
        return total_loss(t, nll, pcl, cfg.contrastive.lambda);
      };
      LossAndGradients lg;
      try {
        lg = backward(params.tensors, trainable, loss);
      } catch (const NumericError& e) {
        throw NumericError(std::string(e.what()) + " at contrastive step " + std::to_string(step));
      }
      const double lr = one_cycle_lr(step, total_steps, sched.peak_lr, sched.shape);
      adam_step(opt, params.tensors, lg.gradients, lr);

      for (const auto& s : positive_sets(batch.labels, cfg.contrastive.alpha, cfg.contrastive.measure)) {
        epoch_positive += static_cast<double>(s.members.size());
        ++epoch_anchors;
      }
      rec.total += lg.value;
      rec.nll += nll_value;
      rec.pcl += pcl_value;
      rec.lr = lr;
      ++step;
    }
    const auto nb = static_cast<double>(batches.size());
    rec.total /= nb;
    rec.nll /= nb;
    rec.pcl /= nb;
    rec.mean_positive_set = epoch_positive / static_cast<double>(epoch_anchors);
    positive_total += epoch_positive;
    anchor_total += epoch_anchors;
    run.curve.push_back(rec);
  }
  run.mean_positive_set = positive_total / static_cast<double>(anchor_total);
  return run;
}

ClassifierRun train_classifier(const ExperimentConfig& cfg, const ModelParams& pretrained,
                               const Dataset& data, std::span<const std::size_t> train) {
  cfg.validate();
  require(pretrained.config == cfg.model, "checkpoint model config does not match experiment config");
  require(!train.empty(), "training split is empty");
  ClassifierRun run;
  // The mixture head is discarded; only encoder and classifier survive.
  for (const NamedTensor& t : pretrained.tensors) {
    if (std::string_view(t.name).starts_with(kMdnPrefix)) continue;
    run.params.tensors.add(t.name, t.value);
  }
  run.params.config = pretrained.config;
  run.params.seed = pretrained.seed;
  ModelParams& params = run.params;
  run.encoder_hash_before = fingerprint(params.tensors, kEncoderPrefix);

  const std::vector<std::size_t> trainable = params.tensors.select(kClassifierPrefix);
  require(!trainable.empty(), "checkpoint has no classifier tensors");
  OptimizerState opt = make_optimizer(params.tensors, trainable);

  const StageSchedule& sched = cfg.classifier_stage;
  const auto batch_size = static_cast<std::size_t>(sched.batch_size);
  const std::int64_t total_steps = steps_per_epoch(train.size(), batch_size) * sched.epochs;
  const Eigen::Index d = data.features.cols();
  std::int64_t step = 0;
  std::vector<double> x(d);

  for (int epoch = 0; epoch < sched.epochs; ++epoch) {
    ClassifierEpoch rec;
    rec.epoch = epoch + 1;
    const auto batches = make_batches(
        train, batch_size, derive_seed(cfg.seed, kClassifierShuffleStream ^ (static_cast<std::uint64_t>(epoch) << 8)));
    for (const auto& batch_idx : batches) {
      Matrix views(static_cast<Eigen::Index>(batch_idx.size()), d);
      std::vector<LabelVector> labels;
      labels.reserve(batch_idx.size());
      const std::uint64_t aug_seed =
          derive_seed(derive_seed(cfg.seed, kClassifierAugmentStream), static_cast<std::uint64_t>(step));
      for (std::size_t k = 0; k < batch_idx.size(); ++k) {
        for (Eigen::Index j = 0; j < d; ++j) x[j] = data.features(static_cast<Eigen::Index>(batch_idx[k]), j);
        const auto aug = augment(x, derive_seed(aug_seed, k), cfg.augment);
        for (Eigen::Index j = 0; j < d; ++j) views(static_cast<Eigen::Index>(k), j) = aug[j];
        labels.push_back(data.labels[batch_idx[k]]);
      }
      const LossBuilder loss = [&](Tape& t, const std::vector<Var>& vars) {
        const Var h = encoder_forward(t, params, vars, t.constant(views, "views"));
        return asl_loss(t, classifier_forward(t, params, vars, h), labels, cfg.asl);
      };
      LossAndGradients lg;
      try {
        lg = backward(params.tensors, trainable, loss);
      } catch (const NumericError& e) {
        throw NumericError(std::string(e.what()) + " at classifier step " + std::to_string(step));
      }
      const double lr = one_cycle_lr(step, total_steps, sched.peak_lr, sched.shape);
      adam_step(opt, params.tensors, lg.gradients, lr);
      rec.asl += lg.value;
      rec.lr = lr;
      ++step;
    }
    rec.asl /= static_cast<double>(batches.size());
    run.curve.push_back(rec);
  }
  run.encoder_hash_after = fingerprint(params.tensors, kEncoderPrefix);
  if (run.encoder_hash_after != run.encoder_hash_before)
    throw NumericError("encoder tensors changed during classifier training");
  return run;
}

PredictionSet predict(const ModelParams& params, const Dataset& data,
                      std::span<const std::size_t> indices) {
  Matrix x(static_cast<Eigen::Index>(indices.size()), data.features.cols());
  PredictionSet preds;
  preds.truths.reserve(indices.size());
  for (std::size_t k = 0; k < indices.size(); ++k) {
    require(indices[k] < data.size(), "evaluation index out of range");
    x.row(static_cast<Eigen::Index>(k)) = data.features.row(static_cast<Eigen::Index>(indices[k]));
    preds.truths.push_back(data.labels[indices[k]]);
  }
  preds.scores = classify(params, encode(params, x));
  return preds;
}

MetricsReport evaluate(const ModelParams& params, const Dataset& data,
                       std::span<const std::size_t> indices, double threshold) {
  return pr_f1_report(predict(params, data, indices), threshold);
}

}  // namespace gmcl
