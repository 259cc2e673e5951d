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

#ifndef SEQFACTOR_EVALUATION_H_
#define SEQFACTOR_EVALUATION_H_

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "seqfactor/common.h"
#include "seqfactor/context.h"

namespace seqfactor {

enum class Averaging { kMacro, kMicro };

struct ClassStats {
  int support = 0;  // true count
  int predicted = 0;
  double precision = 0.0;
  double recall = 0.0;
  double f1 = 0.0;
};

struct MetricsReport {
  double accuracy = 0.0;
  double precision = 0.0;
  double recall = 0.0;
  double f1 = 0.0;
  std::vector<ClassStats> per_class;
  std::vector<std::vector<int>> confusion;  // [true][predicted]
};

// Macro aggregates average over classes with support > 0 in `labels`.
// Throws InputError on a length mismatch or out-of-range class.
MetricsReport classification_metrics(std::span<const int> predictions,
                                     std::span<const int> labels,
                                     int num_classes,
                                     Averaging averaging = Averaging::kMacro);

// P(pred = s | attr = 1) / P(pred = s | attr = 0); nullopt when the
// denominator is zero or the attr = 0 group is empty.
std::optional<double> demographic_parity(std::span<const int> predictions,
                                         std::span<const int> attribute,
                                         int service);

// Ratio of true-positive rates for `service` between attr = 1 and attr = 0.
std::optional<double> equal_opportunity(std::span<const int> predictions,
                                        std::span<const int> labels,
                                        std::span<const int> attribute,
                                        int service);

// Values inside [kFairLow, kFairHigh] pass the four-fifths rule.
inline constexpr double kFairLow = 0.8;
inline constexpr double kFairHigh = 1.25;

struct BiasEntry {
  std::string attribute;
  int service = 0;
  std::optional<double> demographic_parity;
  std::optional<double> equal_opportunity;
  // min(rate1, rate0) / max(rate1, rate0).
  std::optional<double> demographic_parity_balance;
  std::optional<double> equal_opportunity_balance;
  bool demographic_parity_flag = false;
  bool equal_opportunity_flag = false;
};

struct BiasReport {
  std::vector<BiasEntry> entries;
};

struct NamedAttribute {
  std::string name;
  std::vector<int> values;  // 0/1 per evaluated window
};

BiasReport bias_audit(std::span<const int> predictions,
                      std::span<const int> labels,
                      const std::vector<NamedAttribute>& attributes,
                      int num_classes);

struct TTestResult {
  double t = 0.0;
  double p = 1.0;
  int dof = 0;
  // Zero-variance differences with a non-zero mean: |t| is capped at
  // kTCap and p reported as 0.
  bool capped = false;
};

inline constexpr double kTCap = 1e12;

// Two-sided paired t-test on a - b. Needs n >= 2 equal-length samples.
TTestResult paired_t_test(std::span<const double> a, std::span<const double> b);

// Argmax of the transition row of the last real service in each window;
// a seeded uniform draw when that row is empty or the window is all padding.
std::vector<int> markov_baseline(const Matrix& T,
                                 const std::vector<Window>& windows,
                                 uint64_t seed);

// N * |services| indicator columns; padded slots stay zero.
Matrix one_hot_history(const std::vector<Window>& windows, int num_services);

}  // namespace seqfactor

#endif  // SEQFACTOR_EVALUATION_H_
