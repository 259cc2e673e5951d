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

#ifndef SEQFACTOR_SOLVER_H_
#define SEQFACTOR_SOLVER_H_

#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "seqfactor/common.h"
#include "seqfactor/context.h"

namespace seqfactor {

// Which matrix regularizes the cluster factor C in the term
// beta * tr(C^T R C). kLaplacian uses R = diag(Gamma 1) - Gamma; kRaw uses
// Gamma itself.
enum class GammaMode { kLaplacian, kRaw };

struct Hyperparams {
  double alpha = 0.3;    // temporal smoothness
  double beta = 0.7;     // cluster regularization
  double lambda = 0.01;  // Frobenius penalty on the six factors
  double mu = 1.0;       // ADMM penalty
  int k = 10;
  int m = 0;  // relation count; 0 means "same as k"
  int max_iters = 500;
  double tol = 1e-6;
  double eps = 1e-12;
  GammaMode gamma_mode = GammaMode::kLaplacian;

  // Context terms. A disabled term drops out of the objective, its
  // exclusively owned factors stay at their initial values and its
  // contributions to the shared A update vanish.
  bool use_temporal = true;
  bool use_functional = true;
  bool use_individual = true;

  int relations() const { return m > 0 ? m : k; }
  void validate() const;
};

struct FactorSet {
  Matrix A;      // services x k
  Matrix S;      // units x k
  Matrix V;      // features x k
  Matrix C;      // individuals x k
  Matrix Rp;     // m x k
  Matrix Rs;     // m x k
  Matrix P;      // services x individuals
  Matrix Q;      // individuals x features
  Matrix Lag_L;  // multiplier for X - C V^T - Q
  Matrix Lag_K;  // multiplier for H - A C^T - P
  Matrix Lag_N;  // multiplier for C^T C - I
};

struct ObjectiveBreakdown {
  double temporal = 0.0;    // ||D - A S^T||^2 + alpha ||Diff S||^2
  double functional = 0.0;  // ||T - A Rp^T Rs A^T||^2
  double individual = 0.0;  // l2,1 terms + beta tr(C^T R C)
  double sparsity = 0.0;    // lambda * sum of squared factor norms
  double augmented = 0.0;   // multiplier inner products + mu/2 penalties
  std::string regularizer;  // "laplacian" or "raw-gamma"

  double total() const {
    return temporal + functional + individual + sparsity + augmented;
  }
};

struct SolveTrace {
  std::vector<double> objective;
  std::vector<ObjectiveBreakdown> terms;
  bool converged = false;
  int iterations_run = 0;
};

struct FitResult {
  FactorSet factors;
  SolveTrace trace;
};

// The data side of the factorization plus quantities derived once per fit.
class Problem {
 public:
  Problem(const ContextMatrices& ctx, const Matrix& X, const Hyperparams& h);
  // Problem keeps references to ctx and X; temporaries would dangle.
  Problem(ContextMatrices&&, const Matrix&, const Hyperparams&) = delete;
  Problem(const ContextMatrices&, Matrix&&, const Hyperparams&) = delete;

  const Matrix& D() const { return ctx_.D; }
  const Matrix& T() const { return ctx_.T; }
  const Matrix& H() const { return ctx_.H; }
  const Matrix& X() const { return X_; }
  const Matrix& Gamma() const { return ctx_.Gamma; }
  const Matrix& Diff() const { return ctx_.Diff; }
  const Hyperparams& params() const { return h_; }
  // Gamma or its Laplacian, per gamma_mode.
  const Matrix& reg() const { return reg_; }
  // Diff^T Diff.
  const Matrix& diff_gram() const { return diff_gram_; }

  int num_services() const { return static_cast<int>(ctx_.D.rows()); }
  int num_units() const { return static_cast<int>(ctx_.D.cols()); }
  int num_individuals() const { return static_cast<int>(ctx_.H.cols()); }
  int num_features() const { return static_cast<int>(X_.cols()); }

 private:
  const ContextMatrices& ctx_;
  const Matrix& X_;
  Hyperparams h_;
  Matrix reg_;
  Matrix diff_gram_;
};

Matrix laplacian(const Matrix& gamma);

// Throws ShapeError when factor shapes disagree with the problem.
void check_shapes(const Problem& p, const FactorSet& f);

// Row-wise l2,1 norm: sum of Euclidean row norms.
double l21_norm(const Matrix& m);

// The joint objective with the l2,1 residual terms evaluated directly.
ObjectiveBreakdown objective(const Problem& p, const FactorSet& f);
// The augmented Lagrangian of the split problem (auxiliaries P, Q and
// multipliers included). This is what fit() monitors.
ObjectiveBreakdown augmented_objective(const Problem& p, const FactorSet& f);

// argmin_W 1/2 ||W - E||_F^2 + threshold ||W||_{2,1}, solved row by row.
Matrix prox_l21(const Matrix& E, double threshold);

Matrix update_P(const Problem& p, const FactorSet& f);
Matrix update_Q(const Problem& p, const FactorSet& f);
Matrix update_S(const Problem& p, const FactorSet& f);
Matrix update_Rp(const Problem& p, const FactorSet& f);
Matrix update_Rs(const Problem& p, const FactorSet& f);
Matrix update_V(const Problem& p, const FactorSet& f);
Matrix update_C(const Problem& p, const FactorSet& f);
Matrix update_A(const Problem& p, const FactorSet& f);
// Dual ascent on Lag_L, Lag_K and Lag_N, in place.
void update_multipliers(const Problem& p, FactorSet& f);

FactorSet initialize_factors(const Problem& p, uint64_t seed);

// Runs one pass of every enabled update in the order P, Q, S, Rp, Rs, V,
// C, A, multipliers.
void run_cycle(const Problem& p, FactorSet& f);

using IterationObserver = std::function<void(int, const FactorSet&)>;

// Throws NonFiniteObjective when the monitored objective stops being finite.
FitResult fit(const ContextMatrices& ctx, const Matrix& X,
              const Hyperparams& h, uint64_t seed,
              const IterationObserver& observer = {});

}  // namespace seqfactor

#endif  // SEQFACTOR_SOLVER_H_
