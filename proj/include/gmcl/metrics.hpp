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
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "gmcl/overlap.hpp"
#include "gmcl/tape.hpp"

namespace gmcl {

struct PredictionSet {
  Matrix scores;                    // N_eval x C confidences in [0, 1]
  std::vector<LabelVector> truths;  // N_eval

  void validate() const;
};

// Samples ranked by descending score, ties kept in original order; AP is the
// mean over positive ranks of (positives so far / rank). std::nullopt when
// there are no positives.
std::optional<double> average_precision(std::span<const double> scores,
                                        std::span<const std::uint8_t> truths);

// Mean AP over classes that have at least one positive. Throws InputError if
// no class does.
double map_score(const PredictionSet& preds);

struct ClassMetrics {
  std::optional<double> ap;
  double precision = 0.0;
  double recall = 0.0;
  double f1 = 0.0;
  std::int64_t tp = 0;
  std::int64_t fp = 0;
  std::int64_t fn = 0;
};

struct MetricsReport {
  double map = 0.0;
  double cp = 0.0;
  double cr = 0.0;
  double cf1 = 0.0;
  double op = 0.0;
  double or_ = 0.0;
  double of1 = 0.0;
  std::vector<ClassMetrics> per_class;
};

// A label is predicted positive when its score is strictly greater than the
// threshold. Empty denominators: precision (per class or pooled) is 1 when
// nothing was predicted, recall is 1 when there was nothing to find, and F1
// is 0 when P + R = 0. CF1 and OF1 are harmonic means of (CP, CR) and
// (OP, OR). map is 0 if no class has a positive.
MetricsReport pr_f1_report(const PredictionSet& preds, double threshold = 0.5);

double f1_score(double precision, double recall);

// One "key: value" line per metric, keys map, cp, cr, cf1, op, or, of1 in
// that order. Each line of header is emitted first as a "# " comment.
std::string report_to_text(const MetricsReport& report, std::string_view header = {});
// Inverse of report_to_text for the seven keys; comments are skipped.
// Throws IoError on unknown, missing or duplicate keys.
MetricsReport report_from_text(const std::string& text);
// class,ap,precision,recall,f1,tp,fp,fn
std::string per_class_csv(const MetricsReport& report);

}  // namespace gmcl
