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

#include "seqfactor/features.h"

#include <stdexcept>

namespace seqfactor {

std::vector<std::pair<int, int>> slot_pairs(int window_length, PairMode mode) {
  std::vector<std::pair<int, int>> pairs;
  for (int i = 0; i < window_length; ++i) {
    for (int j = 0; j < window_length; ++j) {
      if (i == j) continue;
      switch (mode) {
        case PairMode::kAll:
          if (i < j) pairs.emplace_back(i, j);
          break;
        case PairMode::kConsecutive:
          if (j == i + 1) pairs.emplace_back(i, j);
          break;
        case PairMode::kOrdered:
          pairs.emplace_back(i, j);
          break;
      }
    }
  }
  return pairs;
}

FeatureLayout::FeatureLayout(int k, int window_length, PairMode mode)
    : k_(k), window_length_(window_length), mode_(mode) {
  if (k < 1 || window_length < 1) {
    throw ConfigError("layout needs k >= 1 and window length >= 1");
  }
  pairs_ = slot_pairs(window_length, mode);
  const int n_pairs = static_cast<int>(pairs_.size());
  auto add = [this](const char* name, int width) {
    blocks_.push_back({name, width_, width});
    width_ += width;
  };
  add(kClusterBlock, k);
  add(kFeatureReprBlock, k);
  add(kServiceReprBlock, window_length * k);
  add(kTemporalBlock, n_pairs);
  add(kFunctionalBlock, n_pairs);
}

const FeatureBlock& FeatureLayout::block(const std::string& name) const {
  for (const auto& b : blocks_) {
    if (b.name == name) return b;
  }
  throw IndexError("no feature block named '" + name + "'");
}

Matrix normalize_clusters(const Matrix& C) {
  Matrix out = C;
  for (Eigen::Index i = 0; i < C.rows(); ++i) {
    const double total = C.row(i).sum();
    if (total > 0.0) {
      out.row(i) /= total;
    } else {
      out.row(i).setConstant(1.0 / static_cast<double>(C.cols()));
    }
  }
  return out;
}

Vector service_repr(const Matrix& A, int service) {
  if (service == kPad) return Vector::Zero(A.cols());
  if (service < 0 || service >= A.rows()) {
    throw IndexError("service " + std::to_string(service) +
                     " outside representation table");
  }
  return A.row(service).transpose();
}

Vector feature_repr(const RowVector& x_row, const Matrix& V) {
  if (x_row.size() != V.rows()) {
    throw ShapeError("feature row length does not match V");
  }
  return (x_row * V).transpose();
}

namespace {

double bilinear(const Matrix& A, const Matrix& middle, int i, int j) {
  if (i == kPad || j == kPad) return 0.0;
  if (i < 0 || j < 0 || i >= A.rows() || j >= A.rows()) {
    throw IndexError("service index outside representation table");
  }
  return A.row(i).dot(middle * A.row(j).transpose());
}

}  // namespace

double temporal_interaction(const Matrix& A, const Matrix& S, int i, int j) {
  return bilinear(A, S.transpose() * S, i, j);
}

double functional_interaction(const Matrix& A, const Matrix& Rp,
                              const Matrix& Rs, int i, int j) {
  return bilinear(A, Rp.transpose() * Rs, i, j);
}

FeatureDeriver::FeatureDeriver(const FactorSet& factors, const Matrix& X,
                               int window_length, PairMode mode)
    : factors_(factors),
      layout_(static_cast<int>(factors.A.cols()), window_length, mode),
      clusters_(normalize_clusters(factors.C)),
      feature_repr_(X * factors.V),
      temporal_mid_(factors.S.transpose() * factors.S),
      functional_mid_(factors.Rp.transpose() * factors.Rs) {
  if (X.rows() != factors.C.rows()) {
    throw ShapeError("feature matrix rows do not match C");
  }
}

RowVector FeatureDeriver::assemble(const Window& window) const {
  const int k = layout_.k();
  const int N = layout_.window_length();
  if (static_cast<int>(window.history.size()) != N) {
    throw ShapeError("window length does not match layout");
  }
  if (window.individual < 0 || window.individual >= clusters_.rows()) {
    throw IndexError("window individual out of range");
  }
  RowVector z(layout_.width());
  int col = 0;
  z.segment(col, k) = clusters_.row(window.individual);
  col += k;
  z.segment(col, k) = feature_repr_.row(window.individual);
  col += k;
  for (int slot = 0; slot < N; ++slot) {
    z.segment(col, k) = service_repr(factors_.A, window.history[slot]);
    col += k;
  }
  for (const auto& [a, b] : layout_.pairs()) {
    z(col++) = bilinear(factors_.A, temporal_mid_, window.history[a],
                        window.history[b]);
  }
  for (const auto& [a, b] : layout_.pairs()) {
    z(col++) = bilinear(factors_.A, functional_mid_, window.history[a],
                        window.history[b]);
  }
  if (col != layout_.width()) {
    throw std::logic_error("assembled row does not match its layout");
  }
  return z;
}

Matrix FeatureDeriver::assemble_all(const std::vector<Window>& windows) const {
  Matrix Z(static_cast<Eigen::Index>(windows.size()), layout_.width());
  for (size_t i = 0; i < windows.size(); ++i) {
    Z.row(static_cast<Eigen::Index>(i)) = assemble(windows[i]);
  }
  return Z;
}

}  // namespace seqfactor
