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

#ifndef SEQFACTOR_SYNTH_H_
#define SEQFACTOR_SYNTH_H_

#include <cstdint>
#include <string>
#include <vector>

#include "seqfactor/common.h"
#include "seqfactor/context.h"
#include "seqfactor/evaluation.h"
#include "seqfactor/solver.h"

namespace seqfactor {

struct SynthConfig {
  uint64_t seed = 0;
  int num_individuals = 500;
  int num_services = 9;
  int num_units = 52;
  int unit_days = 7;
  int k = 5;
  int num_features = 12;
  double noise = 0.0;  // scale of |gaussian| added to X, in [0, 1)
  int min_events = 20;
  int max_events = 60;
  // Exponent on an individual's service preference applied to every
  // transition. 0 gives a plain Markov chain on the kernel.
  double affinity = 1.0;

  void validate() const;
};

struct GroundTruth {
  // A is scaled per service so that E[D | service counts] = A S^T holds
  // exactly for the generated log under cyclic week binning.
  Matrix A;
  Matrix S;
  Matrix C;  // rows sum to one
  Matrix V;
  Matrix Rp;
  Matrix Rs;
  Matrix kernel;  // row-normalized A Rp^T Rs A^T
  std::vector<int> dominant_cluster;
  double noise = 0.0;
  uint64_t seed = 0;
};

struct SynthDataset {
  std::vector<std::string> individual_ids;
  std::vector<std::string> service_names;  // index order
  std::vector<RawEvent> events;
  std::vector<EventRecord> records;  // same events, true service indices
  FeatureMatrix features;
  std::vector<NamedAttribute> attributes;  // per individual, 0/1
  GroundTruth truth;
};

// Deterministic per seed. Throws GenerationError when a usable transition
// kernel cannot be drawn.
SynthDataset generate(const SynthConfig& cfg);

// Relative Frobenius error of `learned` against `truth` after matching
// columns by cosine similarity (optimal assignment) and rescaling each
// matched column by its least-squares non-negative factor.
double aligned_error(const Matrix& learned, const Matrix& truth);

// Column permutation maximizing total score; result[i] is the column of the
// second side assigned to row i. Square scores only.
std::vector<int> best_assignment(const Matrix& score);

struct RecoveryError {
  double A = 0.0;
  double S = 0.0;
  double C = 0.0;
  double V = 0.0;
  double Rp = 0.0;
  double Rs = 0.0;
};

RecoveryError recovery_error(const FactorSet& learned,
                             const GroundTruth& truth);

}  // namespace seqfactor

#endif  // SEQFACTOR_SYNTH_H_
