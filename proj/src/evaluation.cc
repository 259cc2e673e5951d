/*
 * Copyright 2026 The seqfactor Authors.
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *     https://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

#include "seqfactor/evaluation.h"

#include <algorithm>
#include <cmath>
#include <numeric>

#include <boost/math/distributions/students_t.hpp>

namespace seqfactor {
namespace {

void check_same_length(size_t a, size_t b, const char* what) {
  if (a != b) {
    throw InputError(std::string(what) + ": length mismatch (" +
                     std::to_string(a) + " vs " + std::to_string(b) + ")");
  }
}

struct GroupRates {
  std::optional<double> rate1;
  std::optional<double> rate0;
};

std::optional<double> ratio(const GroupRates& r) {
  if (!r.rate1 || !r.rate0 || *r.rate0 == 0.0) return std::nullopt;
  return *r.rate1 / *r.rate0;
}

std::optional<double> balance(const GroupRates& r) {
  if (!r.rate1 || !r.rate0) return std::nullopt;
  const double hi = std::max(*r.rate1, *r.rate0);
  if (hi == 0.0) return std::nullopt;
  return std::min(*r.rate1, *r.rate0) / hi;
}

// Rate of pred == service within each attribute group, restricted to rows
// whose label equals `service` when `conditional` is set.
GroupRates group_rates(std::span<const int> predictions,
                       std::span<const int> labels,
                       std::span<const int> attribute, int service,
                       bool conditional) {
  int hits[2] = {0, 0};
  int totals[2] = {0, 0};
  for (size_t i = 0; i < predictions.size(); ++i) {
    if (conditional && labels[i] != service) continue;
    const int g = attribute[i] != 0 ? 1 : 0;
    ++totals[g];
    if (predictions[i] == service) ++hits[g];
  }
  GroupRates r;
  if (totals[1] > 0) r.rate1 = static_cast<double>(hits[1]) / totals[1];
  if (totals[0] > 0) r.rate0 = static_cast<double>(hits[0]) / totals[0];
  return r;
}

bool outside_fair_band(const std::optional<double>& v) {
  return !v || *v < kFairLow || *v > kFairHigh;
}

}  // namespace

MetricsReport classification_metrics(std::span<const int> predictions,
                                     std::span<const int> labels,
                                     int num_classes, Averaging averaging) {
  check_same_length(predictions.size(), labels.size(),
                    "classification_metrics");
  MetricsReport report;
  report.confusion.assign(num_classes, std::vector<int>(num_classes, 0));
  for (size_t i = 0; i < labels.size(); ++i) {
    const int y = labels[i];
    const int p = predictions[i];
    if (y < 0 || y >= num_classes || p < 0 || p >= num_classes) {
      throw InputError("class index outside [0, num_classes)");
    }
    ++report.confusion[y][p];
  }
  int correct = 0;
  report.per_class.resize(num_classes);
  for (int c = 0; c < num_classes; ++c) {
    correct += report.confusion[c][c];
    ClassStats& s = report.per_class[c];
    for (int j = 0; j < num_classes; ++j) {
      s.support += report.confusion[c][j];
      s.predicted += report.confusion[j][c];
    }
    const double tp = report.confusion[c][c];
    s.precision = s.predicted > 0 ? tp / s.predicted : 0.0;
    s.recall = s.support > 0 ? tp / s.support : 0.0;
    s.f1 = s.precision + s.recall > 0.0
               ? 2.0 * s.precision * s.recall / (s.precision + s.recall)
               : 0.0;
  }
  const double n = static_cast<double>(labels.size());
  report.accuracy = n > 0 ? correct / n : 0.0;
  if (averaging == Averaging::kMicro) {
    // Single-label multiclass: micro precision = recall = F1 = accuracy.
    report.precision = report.recall = report.f1 = report.accuracy;
    return report;
  }
  int present = 0;
  for (const ClassStats& s : report.per_class) {
    if (s.support == 0) continue;
    ++present;
    report.precision += s.precision;
    report.recall += s.recall;
    report.f1 += s.f1;
  }
  if (present > 0) {
    report.precision /= present;
    report.recall /= present;
    report.f1 /= present;
  }
  return report;
}

std::optional<double> demographic_parity(std::span<const int> predictions,
                                         std::span<const int> attribute,
                                         int service) {
  check_same_length(predictions.size(), attribute.size(),
                    "demographic_parity");
  return ratio(group_rates(predictions, predictions, attribute, service,
                           /*conditional=*/false));
}

std::optional<double> equal_opportunity(std::span<const int> predictions,
                                        std::span<const int> labels,
                                        std::span<const int> attribute,
                                        int service) {
  check_same_length(predictions.size(), labels.size(), "equal_opportunity");
  check_same_length(predictions.size(), attribute.size(),
                    "equal_opportunity");
  return ratio(
      group_rates(predictions, labels, attribute, service, true));
}

BiasReport bias_audit(std::span<const int> predictions,
                      std::span<const int> labels,
                      const std::vector<NamedAttribute>& attributes,
                      int num_classes) {
  check_same_length(predictions.size(), labels.size(), "bias_audit");
  BiasReport report;
  for (const NamedAttribute& attr : attributes) {
    check_same_length(predictions.size(), attr.values.size(), "bias_audit");
    for (int s = 0; s < num_classes; ++s) {
      const GroupRates dp =
          group_rates(predictions, labels, attr.values, s, false);
      const GroupRates eo =
          group_rates(predictions, labels, attr.values, s, true);
      BiasEntry e;
      e.attribute = attr.name;
      e.service = s;
      e.demographic_parity = ratio(dp);
      e.equal_opportunity = ratio(eo);
      e.demographic_parity_balance = balance(dp);
      e.equal_opportunity_balance = balance(eo);
      e.demographic_parity_flag = outside_fair_band(e.demographic_parity);
      e.equal_opportunity_flag = outside_fair_band(e.equal_opportunity);
      report.entries.push_back(std::move(e));
    }
  }
  return report;
}

TTestResult paired_t_test(std::span<const double> a,
                          std::span<const double> b) {
  check_same_length(a.size(), b.size(), "paired_t_test");
  const size_t n = a.size();
  if (n < 2) throw InputError("paired t-test needs at least two pairs");
  std::vector<double> d(n);
  for (size_t i = 0; i < n; ++i) d[i] = a[i] - b[i];
  const double mean = std::accumulate(d.begin(), d.end(), 0.0) / n;
  double ss = 0.0;
  for (double x : d) ss += (x - mean) * (x - mean);
  const double sd = std::sqrt(ss / static_cast<double>(n - 1));

  TTestResult r;
  r.dof = static_cast<int>(n - 1);
  if (sd == 0.0) {
    if (mean == 0.0) return r;
    r.t = std::copysign(kTCap, mean);
    r.p = 0.0;
    r.capped = true;
    return r;
  }
  r.t = mean / (sd / std::sqrt(static_cast<double>(n)));
  const boost::math::students_t dist(static_cast<double>(r.dof));
  r.p = 2.0 * boost::math::cdf(boost::math::complement(dist, std::abs(r.t)));
  r.p = std::min(r.p, 1.0);
  return r;
}

std::vector<int> markov_baseline(const Matrix& T,
                                 const std::vector<Window>& windows,
                                 uint64_t seed) {
  const int n_services = static_cast<int>(T.rows());
  Rng rng(seed);
  std::vector<int> out;
  out.reserve(windows.size());
  for (const Window& w : windows) {
    int last = kPad;
    for (auto it = w.history.rbegin(); it != w.history.rend(); ++it) {
      if (*it != kPad) {
        last = *it;
        break;
      }
    }
    if (last == kPad || T.row(last).sum() == 0.0) {
      out.push_back(uniform_index(rng, n_services));
      continue;
    }
    int best = 0;
    for (int j = 1; j < n_services; ++j) {
      if (T(last, j) > T(last, best)) best = j;
    }
    out.push_back(best);
  }
  return out;
}

Matrix one_hot_history(const std::vector<Window>& windows, int num_services) {
  const int N = windows.empty() ? 0
                                : static_cast<int>(windows.front().history.size());
  Matrix Z = Matrix::Zero(static_cast<Eigen::Index>(windows.size()),
                          static_cast<Eigen::Index>(N) * num_services);
  for (size_t i = 0; i < windows.size(); ++i) {
    for (int slot = 0; slot < N; ++slot) {
      const int s = windows[i].history[slot];
      if (s == kPad) continue;
      if (s < 0 || s >= num_services) throw IndexError("service out of range");
      Z(static_cast<Eigen::Index>(i), slot * num_services + s) = 1.0;
    }
  }
  return Z;
}

}  // namespace seqfactor
