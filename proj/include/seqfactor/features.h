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

#ifndef SEQFACTOR_FEATURES_H_
#define SEQFACTOR_FEATURES_H_

#include <string>
#include <utility>
#include <vector>

#include "seqfactor/common.h"
#include "seqfactor/context.h"
#include "seqfactor/solver.h"

namespace seqfactor {

// kAll: unordered slot pairs i < j. kConsecutive: (i, i + 1) only.
// kOrdered: every i != j, which doubles the kAll block.
enum class PairMode { kAll, kConsecutive, kOrdered };

struct FeatureBlock {
  std::string name;
  int offset = 0;
  int width = 0;
};

// Column layout of a derived feature row.
class FeatureLayout {
 public:
  FeatureLayout(int k, int window_length, PairMode mode);

  int width() const { return width_; }
  int k() const { return k_; }
  int window_length() const { return window_length_; }
  PairMode pair_mode() const { return mode_; }
  const std::vector<FeatureBlock>& blocks() const { return blocks_; }
  const std::vector<std::pair<int, int>>& pairs() const { return pairs_; }
  // Throws IndexError for unknown names.
  const FeatureBlock& block(const std::string& name) const;

 private:
  int k_;
  int window_length_;
  PairMode mode_;
  int width_ = 0;
  std::vector<std::pair<int, int>> pairs_;
  std::vector<FeatureBlock> blocks_;
};

inline constexpr const char* kClusterBlock = "cluster";
inline constexpr const char* kFeatureReprBlock = "feature_repr";
inline constexpr const char* kServiceReprBlock = "service_repr";
inline constexpr const char* kTemporalBlock = "temporal_pairs";
inline constexpr const char* kFunctionalBlock = "functional_pairs";

std::vector<std::pair<int, int>> slot_pairs(int window_length, PairMode mode);

// Rows scaled to sum to one; all-zero rows become uniform 1/k.
Matrix normalize_clusters(const Matrix& C);

// Row of A for a real service, zero vector for kPad. Throws IndexError.
Vector service_repr(const Matrix& A, int service);

// X_row * V, as a k-vector.
Vector feature_repr(const RowVector& x_row, const Matrix& V);

double temporal_interaction(const Matrix& A, const Matrix& S, int i, int j);
double functional_interaction(const Matrix& A, const Matrix& Rp,
                              const Matrix& Rs, int i, int j);

// Precomputes the per-fit quantities and assembles Z rows.
class FeatureDeriver {
 public:
  FeatureDeriver(const FactorSet& factors, const Matrix& X, int window_length,
                 PairMode mode = PairMode::kAll);

  const FeatureLayout& layout() const { return layout_; }
  RowVector assemble(const Window& window) const;
  Matrix assemble_all(const std::vector<Window>& windows) const;

 private:
  const FactorSet& factors_;
  FeatureLayout layout_;
  Matrix clusters_;      // normalized C
  Matrix feature_repr_;  // X V
  Matrix temporal_mid_;  // S^T S
  Matrix functional_mid_;  // Rp^T Rs
};

}  // namespace seqfactor

#endif  // SEQFACTOR_FEATURES_H_
