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

#include "gmcl/metrics.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <numeric>
#include <sstream>

#include "gmcl/data.hpp"
#include "gmcl/errors.hpp"

namespace gmcl {

void PredictionSet::validate() const {
  require(static_cast<std::size_t>(scores.rows()) == truths.size(),
          "prediction rows do not match truth count");
  for (const auto& t : truths)
    require(t.size() == static_cast<std::size_t>(scores.cols()), "truth length does not match class count");
  if (!scores.allFinite()) throw NumericError("prediction scores are not finite");
}

std::optional<double> average_precision(std::span<const double> scores,
                                        std::span<const std::uint8_t> truths) {
  require(scores.size() == truths.size(), "average_precision: length mismatch");
  std::vector<std::size_t> order(scores.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t b) { return scores[a] > scores[b]; });
  double hits = 0.0;
  double total = 0.0;
  for (std::size_t rank = 0; rank < order.size(); ++rank) {
    if (truths[order[rank]] != 0) {
      hits += 1.0;
      total += hits / static_cast<double>(rank + 1);
    }
  }
  if (hits == 0.0) return std::nullopt;
  return total / hits;
}

namespace {

std::vector<std::optional<double>> per_class_ap(const PredictionSet& preds) {
  const auto n = static_cast<std::size_t>(preds.scores.rows());
  std::vector<std::optional<double>> out;
  std::vector<double> s(n);
  std::vector<std::uint8_t> t(n);
  for (Eigen::Index c = 0; c < preds.scores.cols(); ++c) {
    for (std::size_t i = 0; i < n; ++i) {
      s[i] = preds.scores(static_cast<Eigen::Index>(i), c);
      t[i] = preds.truths[i].bits[c];
    }
    out.push_back(average_precision(s, t));
  }
  return out;
}

double mean_of_present(const std::vector<std::optional<double>>& aps, bool& any) {
  double total = 0.0;
  int count = 0;
  for (const auto& ap : aps) {
    if (!ap) continue;
    total += *ap;
    ++count;
  }
  any = count > 0;
  return any ? total / count : 0.0;
}

}  // namespace

double map_score(const PredictionSet& preds) {
  preds.validate();
  bool any = false;
  const double m = mean_of_present(per_class_ap(preds), any);
  if (!any) throw InputError("map_score: no class has a positive example");
  return m;
}

double f1_score(double precision, double recall) {
  const double s = precision + recall;
  return s > 0.0 ? 2.0 * precision * recall / s : 0.0;
}

MetricsReport pr_f1_report(const PredictionSet& preds, double threshold) {
  preds.validate();
  require(threshold > 0.0 && threshold < 1.0, "threshold must lie in (0, 1)");
  const Eigen::Index n = preds.scores.rows();
  const Eigen::Index classes = preds.scores.cols();
  MetricsReport r;
  const auto aps = per_class_ap(preds);
  bool any = false;
  r.map = mean_of_present(aps, any);

  std::int64_t tp_all = 0, fp_all = 0, fn_all = 0;
  double p_sum = 0.0, r_sum = 0.0;
  for (Eigen::Index c = 0; c < classes; ++c) {
    ClassMetrics m;
    m.ap = aps[c];
    for (Eigen::Index i = 0; i < n; ++i) {
      const bool predicted = preds.scores(i, c) > threshold;
      const bool actual = preds.truths[i].bits[c] != 0;
      m.tp += predicted && actual;
      m.fp += predicted && !actual;
      m.fn += !predicted && actual;
    }
    m.precision = (m.tp + m.fp) > 0 ? static_cast<double>(m.tp) / static_cast<double>(m.tp + m.fp) : 1.0;
    m.recall = (m.tp + m.fn) > 0 ? static_cast<double>(m.tp) / static_cast<double>(m.tp + m.fn) : 1.0;
    m.f1 = f1_score(m.precision, m.recall);
    p_sum += m.precision;
    r_sum += m.recall;
    tp_all += m.tp;
    fp_all += m.fp;
    fn_all += m.fn;
    r.per_class.push_back(m);
  }
  r.cp = classes > 0 ? p_sum / static_cast<double>(classes) : 0.0;
  r.cr = classes > 0 ? r_sum / static_cast<double>(classes) : 0.0;
  r.cf1 = f1_score(r.cp, r.cr);
  r.op = (tp_all + fp_all) > 0 ? static_cast<double>(tp_all) / static_cast<double>(tp_all + fp_all) : 1.0;
  r.or_ = (tp_all + fn_all) > 0 ? static_cast<double>(tp_all) / static_cast<double>(tp_all + fn_all) : 1.0;
  r.of1 = f1_score(r.op, r.or_);
  return r;
}

namespace {

constexpr std::string_view kReportKeys[] = {"map", "cp", "cr", "cf1", "op", "or", "of1"};

double* report_field(MetricsReport& r, std::string_view key) {
  if (key == "map") return &r.map;
  if (key == "cp") return &r.cp;
  if (key == "cr") return &r.cr;
  if (key == "cf1") return &r.cf1;
  if (key == "op") return &r.op;
  if (key == "or") return &r.or_;
  if (key == "of1") return &r.of1;
  return nullptr;
}

}  // namespace

std::string report_to_text(const MetricsReport& report, std::string_view header) {
  std::ostringstream out;
  std::istringstream lines{std::string(header)};
  std::string line;
  while (std::getline(lines, line)) out << "# " << line << '\n';
  MetricsReport copy = report;
  for (std::string_view key : kReportKeys) out << key << ": " << format_double(*report_field(copy, key)) << '\n';
  return out.str();
}

MetricsReport report_from_text(const std::string& text) {
  MetricsReport r;
  std::istringstream in(text);
  std::string line;
  std::vector<std::string> seen;
  while (std::getline(in, line)) {
    if (line.empty() || line[0] == '#') continue;
    const auto colon = line.find(": ");
    if (colon == std::string::npos) throw IoError("malformed report line: " + line);
    const std::string key = line.substr(0, colon);
    double* field = report_field(r, key);
    if (field == nullptr) throw IoError("unknown report key: " + key);
    if (std::find(seen.begin(), seen.end(), key) != seen.end()) throw IoError("duplicate report key: " + key);
    seen.push_back(key);
    const std::string value = line.substr(colon + 2);
    const auto res = std::from_chars(value.data(), value.data() + value.size(), *field);
    if (res.ec != std::errc() || res.ptr != value.data() + value.size())
      throw IoError("malformed report value for " + key);
  }
  if (seen.size() != std::size(kReportKeys)) throw IoError("report is missing keys");
  return r;
}

std::string per_class_csv(const MetricsReport& report) {
  std::ostringstream out;
  out << "class,ap,precision,recall,f1,tp,fp,fn\n";
  for (std::size_t c = 0; c < report.per_class.size(); ++c) {
    const ClassMetrics& m = report.per_class[c];
    out << c << ',' << (m.ap ? format_double(*m.ap) : std::string("")) << ','
        << format_double(m.precision) << ',' << format_double(m.recall) << ','
        << format_double(m.f1) << ',' << m.tp << ',' << m.fp << ',' << m.fn << '\n';
  }
  return out.str();
}

}  // namespace gmcl
