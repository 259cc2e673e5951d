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

#include "seqfactor/synth.h"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>

namespace seqfactor {
namespace {

constexpr int kMaxKernelRetries = 10;

int sample_categorical(const Vector& weights, Rng& rng) {
  const double total = weights.sum();
  double r = uniform01(rng) * total;
  for (Eigen::Index i = 0; i < weights.size(); ++i) {
    r -= weights(i);
    if (r < 0.0) return static_cast<int>(i);
  }
  // Rounding left r marginally non-negative: take the last positive weight.
  for (Eigen::Index i = weights.size() - 1; i >= 0; --i) {
    if (weights(i) > 0.0) return static_cast<int>(i);
  }
  return 0;
}

Matrix service_loadings(int num_services, int k, Rng& rng) {
  Matrix A = Matrix::Zero(num_services, k);
  for (int a = 0; a < num_services; ++a) {
    if (a < k) {
      A(a, a) = 1.0;  // anchor service for factor a
      continue;
    }
    const int first = a % k;
    A(a, first) = uniform(rng, 0.4, 1.0);
    if (k > 1) {
      const int second = (first + 1 + (a / k) % (k - 1)) % k;
      A(a, second) = uniform(rng, 0.4, 1.0);
    }
  }
  return A;
}

// One seasonal bump per latent factor, evenly spaced around the cycle.
Matrix seasonal_profiles(int num_units, int k) {
  const double sigma = std::max(1.0, num_units / (4.0 * k));
  Matrix S(num_units, k);
  for (int w = 0; w < num_units; ++w) {
    for (int l = 0; l < k; ++l) {
      const double center = num_units * (l + 0.5) / k;
      double d = std::abs(w + 0.5 - center);
      d = std::min(d, num_units - d);
      S(w, l) = std::exp(-d * d / (2.0 * sigma * sigma));
    }
  }
  return S;
}

Matrix row_normalized(const Matrix& m) {
  Matrix out = m;
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    const double total = m.row(i).sum();
    if (total > 0.0) out.row(i) /= total;
  }
  return out;
}

}  // namespace

void SynthConfig::validate() const {
  if (num_individuals < 1 || num_services < 2 || num_units < 2 ||
      unit_days < 1 || k < 1 || num_features < 1) {
    throw ConfigError("synthetic sizes must be positive (>= 2 services and "
                      "time units)");
  }
  if (!(noise >= 0.0 && noise < 1.0)) {
    throw ConfigError("noise must lie in [0, 1)");
  }
  if (min_events < 1 || max_events < min_events) {
    throw ConfigError("need 1 <= min_events <= max_events");
  }
  if (!(affinity >= 0.0)) throw ConfigError("affinity must be >= 0");
}

SynthDataset generate(const SynthConfig& cfg) {
  cfg.validate();
  Rng rng(cfg.seed);
  const int n_services = cfg.num_services;
  const int k = cfg.k;
  const int n_users = cfg.num_individuals;

  const Matrix A_raw = service_loadings(n_services, k, rng);
  const Matrix S = seasonal_profiles(cfg.num_units, k);

  Matrix V(cfg.num_features, k);
  for (int f = 0; f < cfg.num_features; ++f) {
    for (int l = 0; l < k; ++l) {
      V(f, l) = l == f % k ? uniform(rng, 0.5, 1.0) : uniform(rng, 0.0, 0.2);
    }
  }

  Matrix C(n_users, k);
  std::vector<int> dominant(n_users);
  for (int u = 0; u < n_users; ++u) {
    dominant[u] = uniform_index(rng, k);
    RowVector rest(k);
    for (int l = 0; l < k; ++l) rest(l) = uniform01(rng);
    rest /= rest.sum();
    C.row(u) = 0.4 * rest;
    C(u, dominant[u]) += 0.6;
  }

  Matrix Rp, Rs, kernel;
  for (int attempt = 0;; ++attempt) {
    if (attempt == kMaxKernelRetries) {
      throw GenerationError("could not draw a transition kernel without "
                            "empty rows");
    }
    const double jitter = 0.3 + 0.1 * attempt;
    Rp = Matrix::Identity(k, k);
    Rs = Matrix::Zero(k, k);
    for (int l = 0; l < k; ++l) Rs(l, (l + 1) % k) = 1.0;
    for (int i = 0; i < k; ++i) {
      for (int j = 0; j < k; ++j) {
        Rp(i, j) += uniform(rng, 0.0, jitter);
        Rs(i, j) += uniform(rng, 0.0, jitter);
      }
    }
    const Matrix raw = A_raw * Rp.transpose() * Rs * A_raw.transpose();
    if ((raw.rowwise().sum().array() > 0.0).all()) {
      kernel = row_normalized(raw);
      break;
    }
  }

  SynthDataset out;
  out.features.values = C * V.transpose();
  if (cfg.noise > 0.0) {
    for (Eigen::Index i = 0; i < out.features.values.rows(); ++i) {
      for (Eigen::Index j = 0; j < out.features.values.cols(); ++j) {
        out.features.values(i, j) += cfg.noise * std::abs(standard_normal(rng));
      }
    }
  }
  for (int f = 0; f < cfg.num_features; ++f) {
    out.features.feature_names.push_back("f" + std::to_string(f));
  }

  NamedAttribute group_a{"group_a", std::vector<int>(n_users)};
  NamedAttribute group_b{"group_b", std::vector<int>(n_users)};
  for (int u = 0; u < n_users; ++u) {
    const double p = dominant[u] % 2 == 0 ? 0.7 : 0.3;
    group_a.values[u] = uniform01(rng) < p ? 1 : 0;
    group_b.values[u] = uniform01(rng) < 0.5 ? 1 : 0;
  }
  out.attributes = {std::move(group_a), std::move(group_b)};

  for (int a = 0; a < n_services; ++a) {
    out.service_names.push_back("s" + std::to_string(a));
  }
  char id[32];
  for (int u = 0; u < n_users; ++u) {
    std::snprintf(id, sizeof(id), "u%05d", u);
    out.individual_ids.emplace_back(id);
  }

  const Matrix seasonal = A_raw * S.transpose();  // services x units
  const int64_t cycle = static_cast<int64_t>(cfg.num_units) * cfg.unit_days;
  std::vector<int> counts(n_services, 0);
  for (int u = 0; u < n_users; ++u) {
    Vector preference = A_raw * C.row(u).transpose();
    preference /= preference.sum();
    const Vector tilt = preference.array().pow(cfg.affinity).matrix();
    const int length =
        cfg.min_events + uniform_index(rng, cfg.max_events - cfg.min_events + 1);
    int service = sample_categorical(preference, rng);
    int64_t previous_day = -1;
    for (int t = 0; t < length; ++t) {
      if (t > 0) {
        const Vector weights =
            kernel.row(service).transpose().cwiseProduct(tilt);
        service = sample_categorical(weights, rng);
      }
      const int unit = sample_categorical(seasonal.row(service).transpose(),
                                          rng);
      const int64_t offset = static_cast<int64_t>(unit) * cfg.unit_days +
                             uniform_index(rng, cfg.unit_days);
      int64_t year = previous_day < 0 ? 0 : previous_day / cycle;
      int64_t day = year * cycle + offset;
      if (day <= previous_day) day += cycle;
      previous_day = day;
      ++counts[service];
      out.records.push_back({u, service, day});
      out.events.push_back(
          {out.individual_ids[u], out.service_names[service], day});
    }
  }

  GroundTruth& truth = out.truth;
  truth.A = A_raw;
  const Vector seasonal_mass = seasonal.rowwise().sum();
  for (int a = 0; a < n_services; ++a) {
    truth.A.row(a) *= counts[a] / seasonal_mass(a);
  }
  truth.S = S;
  truth.C = C;
  truth.V = V;
  truth.Rp = Rp;
  truth.Rs = Rs;
  truth.kernel = kernel;
  truth.dominant_cluster = std::move(dominant);
  truth.noise = cfg.noise;
  truth.seed = cfg.seed;
  return out;
}

std::vector<int> best_assignment(const Matrix& score) {
  if (score.rows() != score.cols()) {
    throw ShapeError("assignment needs a square score matrix");
  }
  // Hungarian algorithm (potentials form) on cost = -score, 1-based.
  const int n = static_cast<int>(score.rows());
  const double inf = std::numeric_limits<double>::infinity();
  std::vector<double> u(n + 1, 0.0), v(n + 1, 0.0), minv(n + 1);
  std::vector<int> p(n + 1, 0), way(n + 1, 0);
  std::vector<bool> used(n + 1);
  for (int i = 1; i <= n; ++i) {
    p[0] = i;
    int j0 = 0;
    std::fill(minv.begin(), minv.end(), inf);
    std::fill(used.begin(), used.end(), false);
    do {
      used[j0] = true;
      const int i0 = p[j0];
      double delta = inf;
      int j1 = 0;
      for (int j = 1; j <= n; ++j) {
        if (used[j]) continue;
        const double cur = -score(i0 - 1, j - 1) - u[i0] - v[j];
        if (cur < minv[j]) {
          minv[j] = cur;
          way[j] = j0;
        }
        if (minv[j] < delta) {
          delta = minv[j];
          j1 = j;
        }
      }
      for (int j = 0; j <= n; ++j) {
        if (used[j]) {
          u[p[j]] += delta;
          v[j] -= delta;
        } else {
          minv[j] -= delta;
        }
      }
      j0 = j1;
    } while (p[j0] != 0);
    do {
      const int j1 = way[j0];
      p[j0] = p[j1];
      j0 = j1;
    } while (j0 != 0);
  }
  std::vector<int> assignment(n);
  for (int j = 1; j <= n; ++j) assignment[p[j] - 1] = j - 1;
  return assignment;
}

double aligned_error(const Matrix& learned, const Matrix& truth) {
  if (learned.rows() != truth.rows() || learned.cols() != truth.cols()) {
    throw ShapeError("learned and true factors differ in shape");
  }
  const Eigen::Index k = truth.cols();
  Matrix cosine = Matrix::Zero(k, k);
  for (Eigen::Index i = 0; i < k; ++i) {
    for (Eigen::Index j = 0; j < k; ++j) {
      const double denom = learned.col(i).norm() * truth.col(j).norm();
      if (denom > 0.0) {
        cosine(i, j) = learned.col(i).dot(truth.col(j)) / denom;
      }
    }
  }
  const std::vector<int> match = best_assignment(cosine);
  Matrix aligned = Matrix::Zero(truth.rows(), k);
  for (Eigen::Index i = 0; i < k; ++i) {
    const auto j = match[static_cast<size_t>(i)];
    const double self = learned.col(i).squaredNorm();
    if (self == 0.0) continue;
    const double scale = std::max(0.0, learned.col(i).dot(truth.col(j)) / self);
    aligned.col(j) = scale * learned.col(i);
  }
  const double norm = truth.norm();
  if (norm == 0.0) return aligned.norm();
  return (aligned - truth).norm() / norm;
}

RecoveryError recovery_error(const FactorSet& learned,
                             const GroundTruth& truth) {
  RecoveryError e;
  e.A = aligned_error(learned.A, truth.A);
  e.S = aligned_error(learned.S, truth.S);
  e.C = aligned_error(learned.C, truth.C);
  e.V = aligned_error(learned.V, truth.V);
  e.Rp = aligned_error(learned.Rp, truth.Rp);
  e.Rs = aligned_error(learned.Rs, truth.Rs);
  return e;
}

}  // namespace seqfactor
