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

#include "gmcl/commands.hpp"

#include <charconv>
#include <fstream>
#include <ostream>
#include <sstream>

#include "gmcl/checkpoint.hpp"
#include "gmcl/errors.hpp"
#include "json.hpp"

namespace gmcl {
namespace {

void write_text(const std::filesystem::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot open " + path.string() + " for writing");
  out << text;
  if (!out) throw IoError("failed writing " + path.string());
}

void ensure_dir(const std::filesystem::path& dir) {
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  if (ec) throw IoError("cannot create " + dir.string() + ": " + ec.message());
}

std::string metadata_for(const ExperimentConfig& cfg) {
  return provenance_line(cfg) + "\n" + config_to_json(cfg);
}

std::string config_echo(const ExperimentConfig& cfg) {
  nlohmann::ordered_json j;
  j["config_hash"] = hex64(experiment_hash(cfg));
  j["seed"] = cfg.seed;
  j["config"] = nlohmann::ordered_json::parse(config_to_json(cfg));
  return j.dump(2) + "\n";
}

std::string contrastive_csv(const ExperimentConfig& cfg, const ContrastiveRun& run) {
  std::ostringstream out;
  out << "# " << provenance_line(cfg) << '\n';
  out << "epoch,total,nll,pcl,lambda,lr,mean_positive_set\n";
  for (const auto& r : run.curve) {
    out << r.epoch << ',' << format_double(r.total) << ',' << format_double(r.nll) << ','
        << format_double(r.pcl) << ',' << format_double(cfg.contrastive.lambda) << ','
        << format_double(r.lr) << ',' << format_double(r.mean_positive_set) << '\n';
  }
  return out.str();
}

std::string classifier_csv(const ExperimentConfig& cfg, const ClassifierRun& run) {
  std::ostringstream out;
  out << "# " << provenance_line(cfg) << '\n';
  out << "epoch,asl,lr\n";
  for (const auto& r : run.curve)
    out << r.epoch << ',' << format_double(r.asl) << ',' << format_double(r.lr) << '\n';
  return out.str();
}

std::string with_provenance(const ExperimentConfig& cfg, const std::string& body) {
  return "# " + provenance_line(cfg) + "\n" + body;
}

double parse_number(const std::string& s, const std::string& param) {
  double v = 0.0;
  const auto res = std::from_chars(s.data(), s.data() + s.size(), v);
  if (res.ec != std::errc() || res.ptr != s.data() + s.size())
    throw InputError("value '" + s + "' for " + param + " is not a number");
  return v;
}

}  // namespace

int run_guarded(std::ostream& log, const std::function<int()>& fn) {
  try {
    return fn();
  } catch (const InputError& e) {
    log << "error: " << e.what() << '\n';
    return kExitConfig;
  } catch (const IoError& e) {
    log << "I/O error: " << e.what() << '\n';
    return kExitIo;
  } catch (const NumericError& e) {
    log << "numeric error: " << e.what() << '\n';
    return kExitNumeric;
  }
}

std::string provenance_line(const ExperimentConfig& cfg) {
  return "config_hash=" + hex64(experiment_hash(cfg)) + " seed=" + std::to_string(cfg.seed);
}

int cmd_train_contrastive(const ExperimentConfig& cfg, const std::filesystem::path& out,
                          std::ostream& log) {
  cfg.validate();
  ensure_dir(out);
  const Dataset data = generate_synthetic(cfg.dataset);
  const Split split = split_dataset(data.size(), cfg.test_fraction, cfg.dataset.seed);
  log << "contrastive stage: " << split.train.size() << " training samples, "
      << cfg.contrastive_stage.epochs << " epochs\n";
  const ContrastiveRun run = train_contrastive(cfg, data, split.train);
  write_checkpoint(out / kContrastiveCheckpoint, Checkpoint{run.params, metadata_for(cfg)});
  write_text(out / kContrastiveCurve, contrastive_csv(cfg, run));
  write_text(out / kConfigEcho, config_echo(cfg));
  log << "final total loss " << format_double(run.curve.back().total) << '\n';
  return kExitOk;
}

int cmd_train_classifier(const ExperimentConfig& cfg, const std::filesystem::path& checkpoint,
                         const std::filesystem::path& out, std::ostream& log) {
  cfg.validate();
  const Checkpoint ckpt = read_checkpoint(checkpoint);
  if (!(ckpt.params.config == cfg.model))
    throw InputError("checkpoint model config does not match the experiment config");
  ensure_dir(out);
  const Dataset data = generate_synthetic(cfg.dataset);
  const Split split = split_dataset(data.size(), cfg.test_fraction, cfg.dataset.seed);
  const ClassifierRun run = train_classifier(cfg, ckpt.params, data, split.train);
  log << "encoder fingerprint " << hex64(run.encoder_hash_before) << " unchanged\n";
  const MetricsReport report = evaluate(run.params, data, split.test, cfg.threshold);
  write_checkpoint(out / kClassifierCheckpoint, Checkpoint{run.params, metadata_for(cfg)});
  write_text(out / kClassifierCurve, classifier_csv(cfg, run));
  write_text(out / kMetricsReport, report_to_text(report, provenance_line(cfg) + "\nsplit=test"));
  write_text(out / kPerClassTable, with_provenance(cfg, per_class_csv(report)));
  write_text(out / kConfigEcho, config_echo(cfg));
  log << "held-out mAP " << format_double(report.map) << '\n';
  return kExitOk;
}

int cmd_evaluate(const ExperimentConfig& cfg, const std::filesystem::path& checkpoint,
                 const std::filesystem::path& out, const std::string& split_name,
                 const std::optional<std::filesystem::path>& dataset, std::ostream& log) {
  cfg.validate();
  const Checkpoint ckpt = read_checkpoint(checkpoint);
  if (ckpt.params.tensors.select(kClassifierPrefix).empty())
    throw InputError("checkpoint has no classifier tensors");
  ensure_dir(out);
  Dataset data;
  std::vector<std::size_t> indices;
  std::string label = split_name;
  if (dataset) {
    data = read_dataset(*dataset);
    indices.resize(data.size());
    for (std::size_t i = 0; i < indices.size(); ++i) indices[i] = i;
    label = "file";
  } else {
    data = generate_synthetic(cfg.dataset);
    const Split split = split_dataset(data.size(), cfg.test_fraction, cfg.dataset.seed);
    if (split_name == "train") {
      indices = split.train;
    } else if (split_name == "test") {
      indices = split.test;
    } else if (split_name == "all") {
      indices.resize(data.size());
      for (std::size_t i = 0; i < indices.size(); ++i) indices[i] = i;
    } else {
      throw InputError("unknown split '" + split_name + "' (expected train, test or all)");
    }
  }
  const MetricsReport report = evaluate(ckpt.params, data, indices, cfg.threshold);
  write_text(out / ("evaluation_" + label + ".txt"),
             report_to_text(report, provenance_line(cfg) + "\nsplit=" + label));
  write_text(out / ("per_class_" + label + ".csv"), with_provenance(cfg, per_class_csv(report)));
  log << label << " mAP " << format_double(report.map) << '\n';
  return kExitOk;
}

ExperimentConfig with_sweep_value(const ExperimentConfig& cfg, const std::string& param,
                                  const std::string& value) {
  ExperimentConfig c = cfg;
  if (param == "tau") c.contrastive.tau = parse_number(value, param);
  else if (param == "alpha") c.contrastive.alpha = parse_number(value, param);
  else if (param == "lambda") c.contrastive.lambda = parse_number(value, param);
  else if (param == "measure") c.contrastive.measure = parse_overlap_measure(value);
  else throw InputError("unknown sweep parameter '" + param + "' (expected tau, alpha, lambda or measure)");
  c.contrastive.validate();
  return c;
}

int cmd_ablate(const ExperimentConfig& cfg, const std::string& param,
               const std::vector<std::string>& values, const std::filesystem::path& out,
               std::ostream& log) {
  cfg.validate();
  require(values.size() >= 2, "a sweep needs at least two values");
  // Reject bad values before spending time on any run.
  std::vector<ExperimentConfig> configs;
  for (const auto& v : values) configs.push_back(with_sweep_value(cfg, param, v));
  ensure_dir(out);

  const Dataset data = generate_synthetic(cfg.dataset);
  const Split split = split_dataset(data.size(), cfg.test_fraction, cfg.dataset.seed);
  std::ostringstream csv;
  csv << "# " << provenance_line(cfg) << " param=" << param << '\n';
  csv << "param,value,status,mean_positive_set,final_total_loss,map,cp,cr,cf1,op,or,of1\n";
  bool failed = false;
  for (std::size_t i = 0; i < values.size(); ++i) {
    csv << param << ',' << values[i] << ',';
    std::ostringstream row_log;
    std::string row;
    const int code = run_guarded(row_log, [&] {
      const ContrastiveRun stage1 = train_contrastive(configs[i], data, split.train);
      const ClassifierRun stage2 = train_classifier(configs[i], stage1.params, data, split.train);
      const MetricsReport r = evaluate(stage2.params, data, split.test, configs[i].threshold);
      std::ostringstream s;
      s << "ok," << format_double(stage1.mean_positive_set) << ','
        << format_double(stage1.curve.back().total) << ',' << format_double(r.map) << ','
        << format_double(r.cp) << ',' << format_double(r.cr) << ',' << format_double(r.cf1) << ','
        << format_double(r.op) << ',' << format_double(r.or_) << ',' << format_double(r.of1);
      row = s.str();
      return kExitOk;
    });
    if (code != kExitOk) {
      failed = true;
      row = "failed,,,,,,,,,";
      log << param << '=' << values[i] << " failed: " << row_log.str();
    } else {
      log << param << '=' << values[i] << " done\n";
    }
    csv << row << '\n';
  }
  write_text(out / ("ablation_" + param + ".csv"), csv.str());
  return failed ? kExitSweep : kExitOk;
}

int cmd_export_dataset(const ExperimentConfig& cfg, const std::filesystem::path& out,
                       std::ostream& log) {
  cfg.dataset.validate();
  if (out.has_parent_path()) ensure_dir(out.parent_path());
  const Dataset data = generate_synthetic(cfg.dataset);
  write_dataset(out, data);
  log << "wrote " << data.size() << " samples to " << out.string() << '\n';
  return kExitOk;
}

}  // namespace gmcl
