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

#include <gtest/gtest.h>

#include <numeric>

#include "oracles.h"

namespace seqfactor {
namespace {

using oracle::random_matrix;

FactorSet random_factors(uint64_t seed, int services = 6, int units = 8,
                         int features = 4, int people = 5, int k = 3) {
  Rng rng(seed);
  FactorSet f;
  f.A = random_matrix(services, k, rng, 0.0, 1.0);
  f.S = random_matrix(units, k, rng, 0.0, 1.0);
  f.V = random_matrix(features, k, rng, 0.0, 1.0);
  f.C = random_matrix(people, k, rng, 0.0, 1.0);
  f.Rp = random_matrix(k, k, rng, 0.0, 1.0);
  f.Rs = random_matrix(k, k, rng, 0.0, 1.0);
  return f;
}

TEST(Layout, WidthFormula) {
  FeatureLayout L(10, 3, PairMode::kAll);
  EXPECT_EQ(L.width(), 56);  // 10 + 10 + 30 + 3 + 3
  for (int N = 1; N <= 6; ++N)
    for (int k = 1; k <= 4; ++k)
      EXPECT_EQ(FeatureLayout(k, N, PairMode::kAll).width(),
                2 * k + N * k + N * (N - 1));
}

TEST(Layout, BlocksPartitionWidth) {
  for (PairMode mode : {PairMode::kAll, PairMode::kConsecutive, PairMode::kOrdered}) {
    FeatureLayout L(4, 4, mode);
    int next = 0;
    for (const auto& b : L.blocks()) {
      EXPECT_EQ(b.offset, next);
      next += b.width;
    }
    EXPECT_EQ(next, L.width());
  }
  FeatureLayout L(2, 3, PairMode::kAll);
  EXPECT_EQ(L.blocks()[0].name, "cluster");
  EXPECT_EQ(L.blocks()[4].name, "functional_pairs");
  EXPECT_THROW(L.block("nope"), IndexError);
}

TEST(Layout, PairOrders) {
  using P = std::vector<std::pair<int, int>>;
  EXPECT_EQ(slot_pairs(3, PairMode::kAll), (P{{0, 1}, {0, 2}, {1, 2}}));
  EXPECT_EQ(slot_pairs(3, PairMode::kConsecutive), (P{{0, 1}, {1, 2}}));
  EXPECT_EQ(slot_pairs(3, PairMode::kOrdered).size(), 6u);
}

TEST(Normalize, Examples) {
  Matrix C(3, 2);
  C << 1, 3, 0, 0, 2, 2;
  Matrix N = normalize_clusters(C);
  EXPECT_DOUBLE_EQ(N(0, 0), 0.25);
  EXPECT_DOUBLE_EQ(N(0, 1), 0.75);
  EXPECT_EQ(N(1, 0), 0.5);
  EXPECT_EQ(N(1, 1), 0.5);
  Rng rng(1);
  Matrix R = normalize_clusters(random_matrix(50, 7, rng, 0.0, 5.0));
  for (int i = 0; i < 50; ++i) EXPECT_NEAR(R.row(i).sum(), 1.0, 1e-12);
}

TEST(ServiceRepr, LookupPadAndRange) {
  FactorSet f = random_factors(2);
  EXPECT_EQ(service_repr(f.A, 0), f.A.row(0).transpose());
  EXPECT_TRUE(service_repr(f.A, kPad).isZero(0.0));
  EXPECT_EQ(service_repr(f.A, kPad).size(), 3);
  EXPECT_THROW(service_repr(f.A, 6), IndexError);
  EXPECT_THROW(service_repr(f.A, -5), IndexError);
}

TEST(FeatureRepr, LinearityAndOracle) {
  FactorSet f = random_factors(3);
  EXPECT_TRUE(feature_repr(RowVector::Zero(4), f.V).isZero(0.0));
  RowVector e = RowVector::Zero(4);
  e(2) = 1.0;
  EXPECT_EQ(feature_repr(e, f.V), f.V.row(2).transpose());
  Rng rng(4);
  RowVector x = random_matrix(1, 4, rng, 0, 3);
  Vector got = feature_repr(x, f.V);
  for (int c = 0; c < 3; ++c) {
    double s = 0.0;
    for (int i = 0; i < 4; ++i) s += x(i) * f.V(i, c);
    EXPECT_NEAR(got(c), s, 1e-12);
  }
}

double triple(const Matrix& A, const Matrix& L, const Matrix& R, int i, int j) {
  // A_i . (L^T R) . A_j^T with explicit loops.
  double total = 0.0;
  for (int a = 0; a < A.cols(); ++a)
    for (int b = 0; b < A.cols(); ++b) {
      double mid = 0.0;
      for (int r = 0; r < L.rows(); ++r) mid += L(r, a) * R(r, b);
      total += A(i, a) * mid * A(j, b);
    }
  return total;
}

TEST(Interactions, PadOrthonormalAndOracle) {
  FactorSet f = random_factors(5);
  EXPECT_EQ(temporal_interaction(f.A, f.S, kPad, 1), 0.0);
  EXPECT_EQ(functional_interaction(f.A, f.Rp, f.Rs, 2, kPad), 0.0);
  Matrix I = Matrix::Identity(3, 3);
  EXPECT_NEAR(temporal_interaction(f.A, I, 1, 4), f.A.row(1).dot(f.A.row(4)), 1e-14);
  EXPECT_NEAR(functional_interaction(f.A, I, I, 1, 4), f.A.row(1).dot(f.A.row(4)), 1e-14);
  for (int i = 0; i < 6; ++i)
    for (int j = 0; j < 6; ++j) {
      EXPECT_NEAR(temporal_interaction(f.A, f.S, i, j), triple(f.A, f.S, f.S, i, j), 1e-10);
      EXPECT_NEAR(functional_interaction(f.A, f.Rp, f.Rs, i, j),
                  triple(f.A, f.Rp, f.Rs, i, j), 1e-10);
    }
}

TEST(Interactions, LatentPermutationInvariance) {
  FactorSet f = random_factors(6);
  Eigen::PermutationMatrix<Eigen::Dynamic> perm(3);
  perm.indices() << 2, 0, 1;
  FactorSet g = f;
  g.A = f.A * perm;
  g.S = f.S * perm;
  g.Rp = f.Rp * perm;
  g.Rs = f.Rs * perm;
  for (int i = 0; i < 6; ++i)
    for (int j = 0; j < 6; ++j) {
      EXPECT_NEAR(temporal_interaction(g.A, g.S, i, j),
                  temporal_interaction(f.A, f.S, i, j), 1e-12);
      EXPECT_NEAR(functional_interaction(g.A, g.Rp, g.Rs, i, j),
                  functional_interaction(f.A, f.Rp, f.Rs, i, j), 1e-12);
    }
}

TEST(Assemble, ConcatenationOrder) {
  FactorSet f = random_factors(7);
  Rng rng(8);
  Matrix X = random_matrix(5, 4, rng, 0, 2);
  FeatureDeriver d(f, X, 3);
  Window w{2, {1, kPad, 4}, 0};
  RowVector z = d.assemble(w);
  ASSERT_EQ(z.size(), 3 + 3 + 9 + 3 + 3);
  const Matrix C = normalize_clusters(f.C);
  EXPECT_TRUE(z.segment(0, 3).isApprox(C.row(2)));
  EXPECT_NEAR(z.segment(0, 3).sum(), 1.0, 1e-9);
  EXPECT_TRUE(z.segment(3, 3).isApprox(X.row(2) * f.V));
  EXPECT_EQ(z.segment(6, 3), f.A.row(1));
  EXPECT_TRUE(z.segment(9, 3).isZero(0.0));
  EXPECT_EQ(z.segment(12, 3), f.A.row(4));
  // Pairs (0,1), (0,2), (1,2): only (0,2) avoids the pad.
  EXPECT_EQ(z(15), 0.0);
  EXPECT_NEAR(z(16), temporal_interaction(f.A, f.S, 1, 4), 1e-12);
  EXPECT_EQ(z(17), 0.0);
  EXPECT_EQ(z(18), 0.0);
  EXPECT_NEAR(z(19), functional_interaction(f.A, f.Rp, f.Rs, 1, 4), 1e-12);
  EXPECT_EQ(z(20), 0.0);
}

TEST(Assemble, AllPadWindow) {
  FactorSet f = random_factors(9);
  Rng rng(10);
  Matrix X = random_matrix(5, 4, rng, 0, 2);
  FeatureDeriver d(f, X, 3);
  RowVector full = d.assemble({1, {0, 1, 2}, 0});
  RowVector pad = d.assemble({1, {kPad, kPad, kPad}, 0});
  EXPECT_EQ(pad.segment(0, 6), full.segment(0, 6));
  EXPECT_TRUE(pad.segment(6, pad.size() - 6).isZero(0.0));
}

TEST(Assemble, DeterministicAndOrderIndependent) {
  FactorSet f = random_factors(11);
  Rng rng(12);
  Matrix X = random_matrix(5, 4, rng, 0, 2);
  FeatureDeriver d(f, X, 3);
  std::vector<Window> ws = {{0, {0, 1, 2}, 3}, {3, {5, 5, 1}, 0},
                            {0, {0, 1, 2}, 3}, {4, {kPad, 2, 3}, 1}};
  Matrix Z = d.assemble_all(ws);
  EXPECT_EQ(Z.row(0), Z.row(2));
  std::vector<Window> rev(ws.rbegin(), ws.rend());
  Matrix Zr = d.assemble_all(rev);
  for (int i = 0; i < 4; ++i) EXPECT_EQ(Z.row(i), Zr.row(3 - i));
}

TEST(Assemble, WrongHistoryLengthThrows) {
  FactorSet f = random_factors(13);
  Matrix X = Matrix::Ones(5, 4);
  FeatureDeriver d(f, X, 3);
  EXPECT_THROW(d.assemble({0, {1, 2}, 0}), ShapeError);
}

TEST(Assemble, OrderedPairsDoubleBlocks) {
  FactorSet f = random_factors(14);
  Matrix X = Matrix::Ones(5, 4);
  FeatureDeriver all(f, X, 3, PairMode::kAll);
  FeatureDeriver ordered(f, X, 3, PairMode::kOrdered);
  EXPECT_EQ(ordered.layout().width() - all.layout().width(), 6);
}

}  // namespace
}  // namespace seqfactor
