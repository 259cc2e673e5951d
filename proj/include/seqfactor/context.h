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

#ifndef SEQFACTOR_CONTEXT_H_
#define SEQFACTOR_CONTEXT_H_

#include <cstdint>
#include <span>
#include <string>
#include <unordered_map>
#include <vector>

#include "seqfactor/common.h"

namespace seqfactor {

// One row of the raw event log, before service labels are resolved.
struct RawEvent {
  std::string individual_id;
  std::string service;
  int64_t day = 0;
};

// A resolved event: `individual` and `service` are dense indices.
struct EventRecord {
  int individual = 0;
  int service = 0;
  int64_t day = 0;
};

class ServiceCatalog {
 public:
  ServiceCatalog() = default;
  explicit ServiceCatalog(std::vector<std::string> names);

  int size() const { return static_cast<int>(names_.size()); }
  const std::vector<std::string>& names() const { return names_; }
  const std::string& name(int index) const;
  // Throws IndexError for labels outside the catalog.
  int index_of(const std::string& label) const;

 private:
  std::vector<std::string> names_;
  std::unordered_map<std::string, int> index_;
};

struct FeatureMatrix {
  Matrix values;  // |U| x |F|, entries >= 0
  std::vector<std::string> feature_names;
};

// Per-individual service sequences ordered by (day, service).
using Sequences = std::vector<std::vector<int>>;

struct ContextMatrices {
  Matrix D;      // services x time units, counts
  Matrix T;      // services x services, row-stochastic or zero rows
  Matrix H;      // services x individuals, counts
  Matrix Gamma;  // individuals x individuals, cosine similarity
  Matrix Diff;   // (units - 1) x units forward difference
};

enum class TimeMapping { kClamp, kCyclic };

struct TimeBinning {
  int unit_days = 7;
  int num_units = 52;
  int64_t origin_day = 0;
  TimeMapping mapping = TimeMapping::kCyclic;
};

enum class SimilarityBasis { kFeaturesAndHistory, kFeaturesOnly };

struct Window {
  int individual = 0;
  std::vector<int> history;  // N slots, kPad for missing
  int label = 0;
};

struct WindowedDataset {
  int length = 0;  // N
  std::vector<Window> windows;
};

enum class SplitMode { kWindow, kIndividual };

// First-appearance order over the time-sorted log (ties broken by label).
// Throws EmptyLogError on empty input.
ServiceCatalog build_catalog(std::span<const RawEvent> events);

// Resolves labels and individual ids into dense indices. Individuals are
// looked up in `individual_ids`; unknown ids raise InputError.
std::vector<EventRecord> resolve_events(
    std::span<const RawEvent> events, const ServiceCatalog& catalog,
    const std::vector<std::string>& individual_ids);

Sequences to_sequences(std::span<const EventRecord> records,
                       int num_individuals);

int time_unit(int64_t day, const TimeBinning& binning);

Matrix build_time_frequency(std::span<const EventRecord> records,
                            int num_services, const TimeBinning& binning);
Matrix build_transitions(const Sequences& sequences, int num_services);
Matrix build_usage(const Sequences& sequences, int num_services);
Matrix build_similarity(const Matrix& X, const Matrix& H,
                        SimilarityBasis basis =
                            SimilarityBasis::kFeaturesAndHistory);
Matrix build_difference_operator(int num_units);

// Sliding windows of length N; windows without a successor are dropped.
WindowedDataset window_sequences(const Sequences& sequences, int N);

// Returns a train flag per window. `train_fraction` of windows (or of
// individuals, in kIndividual mode) land in the training split.
std::vector<bool> split_windows(const WindowedDataset& data,
                                double train_fraction, uint64_t seed,
                                SplitMode mode = SplitMode::kWindow);

ContextMatrices build_contexts(std::span<const EventRecord> records,
                               const Matrix& X, int num_services,
                               const TimeBinning& binning,
                               SimilarityBasis basis);

}  // namespace seqfactor

#endif  // SEQFACTOR_CONTEXT_H_
