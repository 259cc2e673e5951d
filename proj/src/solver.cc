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

#include "seqfactor/solver.h"

#include <cmath>
#include <limits>

namespace seqfactor {
namespace {

double weight(bool enabled) { return enabled ? 1.0 : 0.0; }

void expect_shape(const Matrix& m, Eigen::Index rows, Eigen::Index cols,
                  const char* name) {
  if (m.rows() != rows || m.cols() != cols) {
    throw ShapeError(std::string(name) + " is " + std::to_string(m.rows()) +
                     "x" + std::to_string(m.cols()) + ", expected " +
                     std::to_string(rows) + "x" + std::to_string(cols));
  }
}

void check_nonnegative(const FactorSet& f) {
  const std::pair<const Matrix*, const char*> factors[] = {
      {&f.A, "A"}, {&f.S, "S"}, {&f.V, "V"},
      {&f.C, "C"}, {&f.Rp, "Rp"}, {&f.Rs, "Rs"}};
  for (const auto& [m, name] : factors) {
    if (m->size() > 0 && !(m->minCoeff() >= 0.0)) {
      throw std::logic_error(std::string("factor ") + name +
                             " lost non-negativity");
    }
  }
}

Matrix fill_uniform(Eigen::Index rows, Eigen::Index cols, Rng& rng) {
  Matrix m(rows, cols);
  for (Eigen::Index i = 0; i < rows; ++i) {
    for (Eigen::Index j = 0; j < cols; ++j) m(i, j) = uniform(rng, 0.1, 1.1);
  }
  return m;
}

// Elementwise x * numer / (denom + eps).
Matrix multiplicative(const Matrix& x, const Matrix& numer,
                      const Matrix& denom, double eps) {
  return (x.array() * numer.array() / (denom.array() + eps)).matrix();
}

}  // namespace

void Hyperparams::validate() const {
  if (!(alpha >= 0.0 && beta >= 0.0 && lambda >= 0.0)) {
    throw ConfigError("alpha, beta and lambda must be non-negative");
  }
  if (!(mu > 0.0)) throw ConfigError("mu must be positive");
  if (k < 1) throw ConfigError("k must be >= 1");
  if (m < 0) throw ConfigError("m must be >= 1 (or 0 for m = k)");
  if (max_iters < 1) throw ConfigError("max_iters must be >= 1");
  if (!(tol >= 0.0)) throw ConfigError("tol must be non-negative");
  if (!(eps > 0.0)) throw ConfigError("eps must be positive");
}

Matrix laplacian(const Matrix& gamma) {
  Matrix L = -gamma;
  L.diagonal() += gamma.rowwise().sum();
  return L;
}

Problem::Problem(const ContextMatrices& ctx, const Matrix& X,
                 const Hyperparams& h)
    : ctx_(ctx), X_(X), h_(h) {
  h_.validate();
  const auto n_users = ctx.H.cols();
  expect_shape(ctx.T, ctx.D.rows(), ctx.D.rows(), "T");
  expect_shape(ctx.H, ctx.D.rows(), n_users, "H");
  expect_shape(ctx.Gamma, n_users, n_users, "Gamma");
  expect_shape(X, n_users, X.cols(), "X");
  if (ctx.Diff.cols() != ctx.D.cols()) {
    throw ShapeError("Diff columns must equal the number of time units");
  }
  reg_ = h_.gamma_mode == GammaMode::kLaplacian ? laplacian(ctx.Gamma)
                                                : ctx.Gamma;
  diff_gram_ = ctx.Diff.transpose() * ctx.Diff;
}

void check_shapes(const Problem& p, const FactorSet& f) {
  const int k = p.params().k;
  const int m = p.params().relations();
  expect_shape(f.A, p.num_services(), k, "A");
  expect_shape(f.S, p.num_units(), k, "S");
  expect_shape(f.V, p.num_features(), k, "V");
  expect_shape(f.C, p.num_individuals(), k, "C");
  expect_shape(f.Rp, m, k, "Rp");
  expect_shape(f.Rs, m, k, "Rs");
  expect_shape(f.P, p.num_services(), p.num_individuals(), "P");
  expect_shape(f.Q, p.num_individuals(), p.num_features(), "Q");
  expect_shape(f.Lag_L, p.num_individuals(), p.num_features(), "Lag_L");
  expect_shape(f.Lag_K, p.num_services(), p.num_individuals(), "Lag_K");
  expect_shape(f.Lag_N, k, k, "Lag_N");
}

double l21_norm(const Matrix& m) { return m.rowwise().norm().sum(); }

namespace {

ObjectiveBreakdown shared_terms(const Problem& p, const FactorSet& f) {
  const Hyperparams& h = p.params();
  ObjectiveBreakdown out;
  out.regularizer =
      h.gamma_mode == GammaMode::kLaplacian ? "laplacian" : "raw-gamma";
  if (h.use_temporal) {
    out.temporal = (p.D() - f.A * f.S.transpose()).squaredNorm() +
                   h.alpha * (p.Diff() * f.S).squaredNorm();
  }
  if (h.use_functional) {
    const Matrix Y = f.A * f.Rp.transpose() * f.Rs * f.A.transpose();
    out.functional = (p.T() - Y).squaredNorm();
  }
  out.sparsity = h.lambda * (f.A.squaredNorm() + f.S.squaredNorm() +
                             f.V.squaredNorm() + f.C.squaredNorm() +
                             f.Rp.squaredNorm() + f.Rs.squaredNorm());
  return out;
}

double cluster_term(const Problem& p, const FactorSet& f) {
  return p.params().beta * f.C.cwiseProduct(p.reg() * f.C).sum();
}

}  // namespace

ObjectiveBreakdown objective(const Problem& p, const FactorSet& f) {
  check_shapes(p, f);
  ObjectiveBreakdown out = shared_terms(p, f);
  if (p.params().use_individual) {
    out.individual = l21_norm(p.H() - f.A * f.C.transpose()) +
                     l21_norm(p.X() - f.C * f.V.transpose()) +
                     cluster_term(p, f);
  }
  return out;
}

ObjectiveBreakdown augmented_objective(const Problem& p, const FactorSet& f) {
  check_shapes(p, f);
  ObjectiveBreakdown out = shared_terms(p, f);
  if (p.params().use_individual) {
    const double mu = p.params().mu;
    const Matrix h_gap = p.H() - f.A * f.C.transpose() - f.P;
    const Matrix x_gap = p.X() - f.C * f.V.transpose() - f.Q;
    Matrix ortho_gap = f.C.transpose() * f.C;
    ortho_gap.diagonal().array() -= 1.0;
    out.individual = l21_norm(f.P) + l21_norm(f.Q) + cluster_term(p, f);
    out.augmented = f.Lag_L.cwiseProduct(x_gap).sum() +
                    f.Lag_K.cwiseProduct(h_gap).sum() +
                    f.Lag_N.cwiseProduct(ortho_gap).sum() +
                    0.5 * mu * h_gap.squaredNorm() +
                    0.5 * mu * x_gap.squaredNorm();
  }
  return out;
}

Matrix prox_l21(const Matrix& E, double threshold) {
  if (!(threshold > 0.0)) throw ConfigError("prox threshold must be > 0");
  Matrix W = Matrix::Zero(E.rows(), E.cols());
  for (Eigen::Index i = 0; i < E.rows(); ++i) {
    const double norm = E.row(i).norm();
    if (norm > threshold) W.row(i) = (1.0 - threshold / norm) * E.row(i);
  }
  return W;
}

Matrix update_P(const Problem& p, const FactorSet& f) {
  const double mu = p.params().mu;
  return prox_l21(p.H() - f.A * f.C.transpose() + f.Lag_K / mu, 1.0 / mu);
}

Matrix update_Q(const Problem& p, const FactorSet& f) {
  const double mu = p.params().mu;
  return prox_l21(p.X() - f.C * f.V.transpose() + f.Lag_L / mu, 1.0 / mu);
}

Matrix update_S(const Problem& p, const FactorSet& f) {
  const Hyperparams& h = p.params();
  const Matrix smooth = h.alpha * (p.diff_gram() * f.S);
  const Matrix AtA = f.A.transpose() * f.A;
  const Matrix numer = p.D().transpose() * f.A + negative_part(smooth);
  const Matrix denom = f.S * AtA + h.lambda * f.S + positive_part(smooth);
  return multiplicative(f.S, numer, denom, h.eps);
}

// Gradient of ||T - A Rp^T Rs A^T||^2 with respect to Rp is
// -2 Rs A^T (T - Y)^T A, and with respect to Rs is -2 Rp A^T (T - Y) A,
// where Y = A Rp^T Rs A^T. Every factor is non-negative, so the split into
// numerator and denominator needs no positive/negative parts.
Matrix update_Rp(const Problem& p, const FactorSet& f) {
  const Hyperparams& h = p.params();
  const Matrix Y = f.A * f.Rp.transpose() * f.Rs * f.A.transpose();
  const Matrix numer = f.Rs * (f.A.transpose() * p.T().transpose() * f.A);
  const Matrix denom =
      f.Rs * (f.A.transpose() * Y.transpose() * f.A) + h.lambda * f.Rp;
  return multiplicative(f.Rp, numer, denom, h.eps);
}

Matrix update_Rs(const Problem& p, const FactorSet& f) {
  const Hyperparams& h = p.params();
  const Matrix Y = f.A * f.Rp.transpose() * f.Rs * f.A.transpose();
  const Matrix numer = f.Rp * (f.A.transpose() * p.T() * f.A);
  const Matrix denom = f.Rp * (f.A.transpose() * Y * f.A) + h.lambda * f.Rs;
  return multiplicative(f.Rs, numer, denom, h.eps);
}

// Signed products (anything involving P, Q or a multiplier) are split into
// positive and negative parts so both sides of the ratio stay non-negative.
Matrix update_V(const Problem& p, const FactorSet& f) {
  const Hyperparams& h = p.params();
  const double mu = h.mu;
  const Matrix LtC = f.Lag_L.transpose() * f.C;
  const Matrix QtC = mu * (f.Q.transpose() * f.C);
  const Matrix numer = mu * (p.X().transpose() * f.C) + positive_part(LtC) +
                       negative_part(QtC);
  const Matrix denom = mu * (f.V * (f.C.transpose() * f.C)) +
                       positive_part(QtC) + negative_part(LtC) +
                       2.0 * h.lambda * f.V;
  return multiplicative(f.V, numer, denom, h.eps);
}

Matrix update_C(const Problem& p, const FactorSet& f) {
  const Hyperparams& h = p.params();
  const double mu = h.mu;
  const Matrix LV = f.Lag_L * f.V;
  const Matrix KtA = f.Lag_K.transpose() * f.A;
  const Matrix CN = f.C * f.Lag_N;
  // The regularizer is split by sign as a matrix (for a Laplacian: degree
  // versus similarity), which keeps the clustering term monotone under the
  // update. For a non-negative similarity this equals splitting reg * C.
  const Matrix reg_pos = h.beta * (p.reg().cwiseMax(0.0) * f.C);
  const Matrix reg_neg = h.beta * ((-p.reg()).cwiseMax(0.0) * f.C);
  const Matrix PtA = mu * (f.P.transpose() * f.A);
  const Matrix QV = mu * (f.Q * f.V);
  const Matrix numer = mu * (p.H().transpose() * f.A) + mu * (p.X() * f.V) +
                       positive_part(LV) + positive_part(KtA) +
                       2.0 * negative_part(CN) + 2.0 * reg_neg +
                       negative_part(PtA) + negative_part(QV);
  const Matrix denom = mu * (f.C * (f.A.transpose() * f.A)) +
                       positive_part(PtA) +
                       mu * (f.C * (f.V.transpose() * f.V)) +
                       positive_part(QV) + negative_part(LV) +
                       negative_part(KtA) + 2.0 * positive_part(CN) +
                       2.0 * reg_pos + 2.0 * h.lambda * f.C;
  return multiplicative(f.C, numer, denom, h.eps);
}

// The 2x and 4x coefficients take the functional term's gradient as
// 4 (T - Y) A Rp^T Rs, i.e. as if T were symmetric. Not a majorizer of the
// quartic term, so a single A step can raise the objective.
Matrix update_A(const Problem& p, const FactorSet& f) {
  const Hyperparams& h = p.params();
  const double w_temp = weight(h.use_temporal);
  const double w_func = weight(h.use_functional);
  const double w_ind = weight(h.use_individual);
  const double mu = h.mu;
  const Eigen::Index n = f.A.rows();
  const Eigen::Index k = f.A.cols();

  Matrix numer = Matrix::Zero(n, k);
  Matrix denom = 2.0 * h.lambda * f.A;
  if (w_temp > 0.0) {
    numer += 2.0 * (p.D() * f.S);
    denom += 2.0 * (f.A * (f.S.transpose() * f.S));
  }
  if (w_func > 0.0) {
    const Matrix M = f.Rp.transpose() * f.Rs;
    const Matrix AM = f.A * M;
    const Matrix YAM = f.A * (M * (f.A.transpose() * AM));
    numer += 4.0 * (p.T() * AM) + 4.0 * negative_part(YAM);
    denom += 4.0 * positive_part(YAM);
  }
  if (w_ind > 0.0) {
    const Matrix KC = f.Lag_K * f.C;
    const Matrix PC = mu * (f.P * f.C);
    numer += mu * (p.H() * f.C) + positive_part(KC) + negative_part(PC);
    denom += mu * (f.A * (f.C.transpose() * f.C)) + positive_part(PC) +
             negative_part(KC);
  }
  return multiplicative(f.A, numer, denom, h.eps);
}

void update_multipliers(const Problem& p, FactorSet& f) {
  const double mu = p.params().mu;
  f.Lag_L += mu * (p.X() - f.C * f.V.transpose() - f.Q);
  f.Lag_K += mu * (p.H() - f.A * f.C.transpose() - f.P);
  Matrix ortho_gap = f.C.transpose() * f.C;
  ortho_gap.diagonal().array() -= 1.0;
  f.Lag_N += mu * ortho_gap;
}

FactorSet initialize_factors(const Problem& p, uint64_t seed) {
  const int k = p.params().k;
  const int m = p.params().relations();
  Rng rng(seed);
  FactorSet f;
  f.A = fill_uniform(p.num_services(), k, rng);
  f.S = fill_uniform(p.num_units(), k, rng);
  f.V = fill_uniform(p.num_features(), k, rng);
  f.C = fill_uniform(p.num_individuals(), k, rng);
  f.Rp = fill_uniform(m, k, rng);
  f.Rs = fill_uniform(m, k, rng);
  f.P = Matrix::Zero(p.num_services(), p.num_individuals());
  f.Q = Matrix::Zero(p.num_individuals(), p.num_features());
  f.Lag_L = Matrix::Zero(p.num_individuals(), p.num_features());
  f.Lag_K = Matrix::Zero(p.num_services(), p.num_individuals());
  f.Lag_N = Matrix::Zero(k, k);
  return f;
}

void run_cycle(const Problem& p, FactorSet& f) {
  const Hyperparams& h = p.params();
  if (h.use_individual) {
    f.P = update_P(p, f);
    f.Q = update_Q(p, f);
  }
  if (h.use_temporal) f.S = update_S(p, f);
  if (h.use_functional) {
    f.Rp = update_Rp(p, f);
    f.Rs = update_Rs(p, f);
  }
  if (h.use_individual) {
    f.V = update_V(p, f);
    f.C = update_C(p, f);
  }
  f.A = update_A(p, f);
  if (h.use_individual) update_multipliers(p, f);
}

FitResult fit(const ContextMatrices& ctx, const Matrix& X,
              const Hyperparams& h, uint64_t seed,
              const IterationObserver& observer) {
  const Problem problem(ctx, X, h);
  FitResult result;
  FactorSet& f = result.factors;
  f = initialize_factors(problem, seed);
  SolveTrace& trace = result.trace;

  double previous = augmented_objective(problem, f).total();
  for (int it = 1; it <= h.max_iters; ++it) {
    run_cycle(problem, f);
    for (const Matrix* m : {&f.A, &f.S, &f.V, &f.C, &f.Rp, &f.Rs}) {
      if (!m->allFinite()) {
        throw NonFiniteObjective("factors became non-finite at iteration " +
                                 std::to_string(it) +
                                 "; lower mu or raise eps");
      }
    }
    check_nonnegative(f);
    if (observer) observer(it, f);
    ObjectiveBreakdown terms = augmented_objective(problem, f);
    const double value = terms.total();
    if (!std::isfinite(value)) {
      throw NonFiniteObjective("objective became non-finite at iteration " +
                               std::to_string(it) +
                               "; lower mu or raise eps");
    }
    trace.objective.push_back(value);
    trace.terms.push_back(std::move(terms));
    trace.iterations_run = it;
    const double scale =
        std::max(std::abs(previous), std::numeric_limits<double>::min());
    if (std::abs(value - previous) / scale < h.tol) {
      trace.converged = true;
      break;
    }
    previous = value;
  }
  return result;
}

}  // namespace seqfactor
