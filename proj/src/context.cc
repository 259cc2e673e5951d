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

#include "seqfactor/context.h"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <unordered_set>

namespace seqfactor {

bool all_finite(const Matrix& m) { return m.allFinite(); }

ServiceCatalog::ServiceCatalog(std::vector<std::string> names)
    : names_(std::move(names)) {
  for (int i = 0; i < size(); ++i) {
    if (!index_.emplace(names_[i], i).second) {
      throw InputError("duplicate service label '" + names_[i] + "'");
    }
  }
}

const std::string& ServiceCatalog::name(int index) const {
  if (index < 0 || index >= size()) {
    throw IndexError("service index " + std::to_string(index) +
                     " out of range");
  }
  return names_[index];
}

int ServiceCatalog::index_of(const std::string& label) const {
  const auto it = index_.find(label);
  if (it == index_.end()) {
    throw IndexError("unknown service '" + label + "'");
  }
  return it->second;
}

ServiceCatalog build_catalog(std::span<const RawEvent> events) {
  if (events.empty()) throw EmptyLogError("event log is empty");
  std::vector<const RawEvent*> order;
  order.reserve(events.size());
  for (const auto& e : events) order.push_back(&e);
  std::stable_sort(order.begin(), order.end(),
                   [](const RawEvent* a, const RawEvent* b) {
                     if (a->day != b->day) return a->day < b->day;
                     return a->service < b->service;
                   });
  std::vector<std::string> names;
  std::unordered_set<std::string> seen;
  for (const RawEvent* e : order) {
    if (seen.insert(e->service).second) names.push_back(e->service);
  }
  return ServiceCatalog(std::move(names));
}

std::vector<EventRecord> resolve_events(
    std::span<const RawEvent> events, const ServiceCatalog& catalog,
    const std::vector<std::string>& individual_ids) {
  std::unordered_map<std::string, int> individual_index;
  for (int i = 0; i < static_cast<int>(individual_ids.size()); ++i) {
    individual_index.emplace(individual_ids[i], i);
  }
  std::vector<EventRecord> out;
  out.reserve(events.size());
  for (const auto& e : events) {
    const auto it = individual_index.find(e.individual_id);
    if (it == individual_index.end()) {
      throw InputError("individual '" + e.individual_id +
                       "' has events but no feature row");
    }
    if (e.day < 0) {
      throw InputError("negative timestamp for individual '" +
                       e.individual_id + "'");
    }
    out.push_back({it->second, catalog.index_of(e.service), e.day});
  }
  return out;
}

Sequences to_sequences(std::span<const EventRecord> records,
                       int num_individuals) {
  std::vector<std::vector<const EventRecord*>> grouped(num_individuals);
  for (const auto& r : records) {
    if (r.individual < 0 || r.individual >= num_individuals) {
      throw IndexError("individual index out of range");
    }
    grouped[r.individual].push_back(&r);
  }
  Sequences sequences(num_individuals);
  for (int u = 0; u < num_individuals; ++u) {
    auto& g = grouped[u];
    std::stable_sort(g.begin(), g.end(),
                     [](const EventRecord* a, const EventRecord* b) {
                       if (a->day != b->day) return a->day < b->day;
                       return a->service < b->service;
                     });
    sequences[u].reserve(g.size());
    for (const EventRecord* r : g) sequences[u].push_back(r->service);
  }
  return sequences;
}

int time_unit(int64_t day, const TimeBinning& binning) {
  const int64_t rel = day - binning.origin_day;
  int64_t unit = rel / binning.unit_days;
  if (rel < 0 && rel % binning.unit_days != 0) --unit;
  const int64_t n = binning.num_units;
  if (binning.mapping == TimeMapping::kCyclic) {
    return static_cast<int>(((unit % n) + n) % n);
  }
  return static_cast<int>(std::clamp<int64_t>(unit, 0, n - 1));
}

Matrix build_time_frequency(std::span<const EventRecord> records,
                            int num_services, const TimeBinning& binning) {
  if (binning.unit_days < 1) throw ConfigError("unit length must be >= 1");
  if (binning.num_units < 2) throw ConfigError("need at least 2 time units");
  Matrix D = Matrix::Zero(num_services, binning.num_units);
  for (const auto& r : records) {
    if (r.service < 0 || r.service >= num_services) {
      throw IndexError("service index out of range");
    }
    D(r.service, time_unit(r.day, binning)) += 1.0;
  }
  return D;
}

Matrix build_transitions(const Sequences& sequences, int num_services) {
  Matrix T = Matrix::Zero(num_services, num_services);
  for (const auto& seq : sequences) {
    for (size_t t = 1; t < seq.size(); ++t) T(seq[t - 1], seq[t]) += 1.0;
  }
  for (int i = 0; i < num_services; ++i) {
    const double total = T.row(i).sum();
    if (total > 0.0) T.row(i) /= total;
  }
  return T;
}

Matrix build_usage(const Sequences& sequences, int num_services) {
  Matrix H = Matrix::Zero(num_services, static_cast<Eigen::Index>(
                                            sequences.size()));
  for (size_t u = 0; u < sequences.size(); ++u) {
    for (int s : sequences[u]) {
      if (s < 0 || s >= num_services) {
        throw IndexError("service index out of range");
      }
      H(s, static_cast<Eigen::Index>(u)) += 1.0;
    }
  }
  return H;
}

Matrix build_similarity(const Matrix& X, const Matrix& H,
                        SimilarityBasis basis) {
  if (X.rows() != H.cols()) {
    throw ShapeError("feature rows (" + std::to_string(X.rows()) +
                     ") != usage columns (" + std::to_string(H.cols()) + ")");
  }
  const Eigen::Index n = X.rows();
  Matrix basis_rows;
  if (basis == SimilarityBasis::kFeaturesAndHistory) {
    basis_rows.resize(n, X.cols() + H.rows());
    basis_rows << X, H.transpose();
  } else {
    basis_rows = X;
  }
  Vector norms = basis_rows.rowwise().norm();
  Matrix G = basis_rows * basis_rows.transpose();
  G = (0.5 * (G + G.transpose())).eval();
  for (Eigen::Index i = 0; i < n; ++i) {
    for (Eigen::Index j = 0; j < n; ++j) {
      if (i == j) {
        G(i, j) = 1.0;
      } else if (norms(i) == 0.0 || norms(j) == 0.0) {
        G(i, j) = 0.0;
      } else {
        G(i, j) = std::clamp(G(i, j) / (norms(i) * norms(j)), -1.0, 1.0);
      }
    }
  }
  return G;
}

Matrix build_difference_operator(int num_units) {
  if (num_units < 2) throw ConfigError("need at least 2 time units");
  Matrix diff = Matrix::Zero(num_units - 1, num_units);
  for (int r = 0; r + 1 < num_units; ++r) {
    diff(r, r) = -1.0;
    diff(r, r + 1) = 1.0;
  }
  return diff;
}

WindowedDataset window_sequences(const Sequences& sequences, int N) {
  if (N < 1) throw ConfigError("window length must be >= 1");
  WindowedDataset data;
  data.length = N;
  for (size_t u = 0; u < sequences.size(); ++u) {
    const auto& seq = sequences[u];
    const int L = static_cast<int>(seq.size());
    // Short histories (L <= N) pad to a window whose successor does not
    // exist, so they never produce a labeled example.
    for (int t = 0; t + N < L; ++t) {
      Window w;
      w.individual = static_cast<int>(u);
      w.history.assign(seq.begin() + t, seq.begin() + t + N);
      w.label = seq[t + N];
      data.windows.push_back(std::move(w));
    }
  }
  return data;
}

std::vector<bool> split_windows(const WindowedDataset& data,
                                double train_fraction, uint64_t seed,
                                SplitMode mode) {
  if (!(train_fraction > 0.0 && train_fraction < 1.0)) {
    throw ConfigError("train fraction must lie in (0, 1)");
  }
  Rng rng(seed);
  const size_t n = data.windows.size();
  std::vector<bool> is_train(n, false);
  if (mode == SplitMode::kWindow) {
    std::vector<size_t> order(n);
    std::iota(order.begin(), order.end(), 0);
    shuffle(order, rng);
    const auto n_train = static_cast<size_t>(std::llround(train_fraction * n));
    for (size_t i = 0; i < n_train; ++i) is_train[order[i]] = true;
    return is_train;
  }
  std::vector<int> people;
  for (const auto& w : data.windows) people.push_back(w.individual);
  std::sort(people.begin(), people.end());
  people.erase(std::unique(people.begin(), people.end()), people.end());
  shuffle(people, rng);
  const auto n_train =
      static_cast<size_t>(std::llround(train_fraction * people.size()));
  std::unordered_set<int> train_people(people.begin(),
                                       people.begin() + n_train);
  for (size_t i = 0; i < n; ++i) {
    is_train[i] = train_people.contains(data.windows[i].individual);
  }
  return is_train;
}

ContextMatrices build_contexts(std::span<const EventRecord> records,
                               const Matrix& X, int num_services,
                               const TimeBinning& binning,
                               SimilarityBasis basis) {
  const Sequences sequences =
      to_sequences(records, static_cast<int>(X.rows()));
  ContextMatrices ctx;
  ctx.D = build_time_frequency(records, num_services, binning);
  ctx.T = build_transitions(sequences, num_services);
  ctx.H = build_usage(sequences, num_services);
  ctx.Gamma = build_similarity(X, ctx.H, basis);
  ctx.Diff = build_difference_operator(binning.num_units);
  return ctx;
}

}  // namespace seqfactor
