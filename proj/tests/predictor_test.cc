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

#include "seqfactor/predictor.h"

#include <gtest/gtest.h>

#include <cmath>
#include <limits>

#include "oracles.h"

namespace seqfactor {
namespace {

using oracle::random_matrix;

Network random_net(int in, int hidden, int classes, uint64_t seed) {
  Rng rng(seed);
  Network n;
  n.W1 = random_matrix(in, hidden, rng, -1, 1);
  n.b1 = random_matrix(hidden, 1, rng, -0.5, 0.5);
  n.W2 = random_matrix(hidden, classes, rng, -1, 1);
  n.b2 = random_matrix(classes, 1, rng, -0.5, 0.5);
  return n;
}

TEST(Forward, ZeroNetIsUniform) {
  Network n = init_network(4, 5, 9, 0);
  n.W1.setZero();
  n.W2.setZero();
  ForwardPass f = forward(n, Matrix::Ones(3, 4));
  EXPECT_LT((f.probabilities.array() - 1.0 / 9).abs().maxCoeff(), 1e-15);
}

TEST(Forward, ReluClampGivesBias) {
  Network n = random_net(3, 4, 2, 1);
  n.W1 = -n.W1.cwiseAbs();
  n.b1 = -n.b1.cwiseAbs();
  ForwardPass f = forward(n, Matrix::Ones(2, 3));
  EXPECT_TRUE(f.hidden.isZero(0.0));
  EXPECT_EQ(f.logits.row(0), n.b2.transpose());
}

TEST(Forward, MatchesNaive) {
  Network n = random_net(6, 7, 5, 2);
  Rng rng(3);
  Matrix Z = random_matrix(10, 6, rng, -2, 2);
  ForwardPass f = forward(n, Z);
  EXPECT_LT((f.probabilities - oracle::naive_probabilities(n, Z)).cwiseAbs().maxCoeff(), 1e-10);
  for (int i = 0; i < 10; ++i) {
    EXPECT_NEAR(f.probabilities.row(i).sum(), 1.0, 1e-9);
    EXPECT_GT(f.probabilities.row(i).minCoeff(), 0.0);
  }
}

TEST(Forward, RejectsBadInput) {
  Network n = random_net(3, 2, 2, 4);
  EXPECT_THROW(forward(n, Matrix::Ones(1, 4)), InputError);
  Matrix Z = Matrix::Ones(1, 3);
  Z(0, 1) = std::numeric_limits<double>::quiet_NaN();
  EXPECT_THROW(forward(n, Z), InputError);
}

TEST(Loss, Examples) {
  Matrix onehot = Matrix::Zero(2, 3);
  onehot(0, 1) = 1;
  onehot(1, 2) = 1;
  std::vector<int> labels = {1, 2};
  EXPECT_EQ(cross_entropy(onehot, labels), 0.0);
  Matrix uniform = Matrix::Constant(4, 9, 1.0 / 9);
  std::vector<int> l4 = {0, 3, 8, 5};
  EXPECT_NEAR(cross_entropy(uniform, l4), std::log(9.0), 1e-12);
  EXPECT_NEAR(std::log(9.0), 2.1972, 1e-4);
  // A zero probability is floored.
  EXPECT_NEAR(cross_entropy(onehot, std::vector<int>{0, 2}), -std::log(1e-12) / 2, 1e-9);
}

TEST(Loss, MatchesNaive) {
  Network n = random_net(4, 6, 3, 5);
  Rng rng(6);
  Matrix Z = random_matrix(8, 4, rng, -1, 1);
  std::vector<int> labels = {0, 1, 2, 0, 1, 2, 2, 1};
  EXPECT_NEAR(cross_entropy(forward(n, Z).probabilities, labels),
              oracle::naive_loss(n, Z, labels), 1e-12);
}

TEST(Backward, FiniteDifferences) {
  for (uint64_t seed = 0; seed < 5; ++seed) {
    Network n = random_net(4, 5, 3, seed);
    Rng rng(seed + 100);
    Matrix Z = random_matrix(5, 4, rng, -1, 1);
    std::vector<int> labels = {0, 2, 1, 1, 0};
    EXPECT_LT(oracle::gradient_check(n, Z, labels, 1e-5), 1e-4) << seed;
  }
}

TEST(Backward, SaturatedIsNearZero) {
  Network n = random_net(2, 3, 2, 7);
  n.W2.setZero();
  n.b2 << 40, -40;
  std::vector<int> labels = {0, 0};
  Gradients g = backward(n, Matrix::Ones(2, 2), labels);
  EXPECT_LT(g.b2.cwiseAbs().maxCoeff(), 1e-30);
  EXPECT_LT(g.W2.cwiseAbs().maxCoeff(), 1e-30);
}

TEST(Backward, DuplicationInvariance) {
  Network n = random_net(3, 4, 3, 8);
  Rng rng(9);
  Matrix Z = random_matrix(4, 3, rng, -1, 1);
  std::vector<int> labels = {0, 1, 2, 1};
  Matrix ZZ(8, 3);
  ZZ << Z, Z;
  std::vector<int> ll = labels;
  ll.insert(ll.end(), labels.begin(), labels.end());
  Gradients a = backward(n, Z, labels), b = backward(n, ZZ, ll);
  EXPECT_LT((a.W1 - b.W1).cwiseAbs().maxCoeff(), 1e-14);
  EXPECT_LT((a.b1 - b.b1).cwiseAbs().maxCoeff(), 1e-14);
  EXPECT_LT((a.W2 - b.W2).cwiseAbs().maxCoeff(), 1e-14);
  EXPECT_LT((a.b2 - b.b2).cwiseAbs().maxCoeff(), 1e-14);
}

TEST(Init, RangeAndDeterminism) {
  Network a = init_network(16, 8, 3, 5), b = init_network(16, 8, 3, 5);
  EXPECT_EQ(a.W1, b.W1);
  EXPECT_LE(a.W1.cwiseAbs().maxCoeff(), 0.25);
  EXPECT_LE(a.W2.cwiseAbs().maxCoeff(), 1.0 / std::sqrt(8.0));
  EXPECT_TRUE(a.b1.isZero(0.0));
  EXPECT_NE(a.W1, init_network(16, 8, 3, 6).W1);
}

TEST(TrainConfig, DefaultsAndValidation) {
  TrainConfig c;
  EXPECT_EQ(c.folds, 5);
  EXPECT_EQ(c.hidden, 64);
  EXPECT_EQ(c.learning_rate, 1e-3);
  EXPECT_EQ(c.batch_size, 32);
  EXPECT_EQ(c.epochs, 20);
  c.folds = 1;
  EXPECT_THROW(c.validate(), ConfigError);
  c = TrainConfig();
  c.learning_rate = 0;
  EXPECT_THROW(c.validate(), ConfigError);
}

// Two well separated clusters in 2-D.
void separable(Matrix& Z, std::vector<int>& labels, uint64_t seed) {
  Rng rng(seed);
  Z.resize(100, 2);
  labels.clear();
  for (int i = 0; i < 100; ++i) {
    const int y = i % 2;
    Z(i, 0) = (y ? 2.0 : -2.0) + uniform(rng, -0.5, 0.5);
    Z(i, 1) = uniform(rng, -1, 1);
    labels.push_back(y);
  }
}

TEST(Train, SeparableReachesPerfectFolds) {
  Matrix Z;
  std::vector<int> labels;
  separable(Z, labels, 1);
  TrainConfig c;
  c.learning_rate = 0.05;
  c.epochs = 200;
  c.hidden = 8;
  TrainResult r = train(Z, labels, 2, c);
  ASSERT_EQ(r.folds.size(), 5u);
  for (const auto& f : r.folds) EXPECT_EQ(f.accuracy, 1.0);
  EXPECT_EQ(r.epoch_loss.size(), 200u);
}

TEST(Train, DeterministicFolds) {
  Matrix Z;
  std::vector<int> labels;
  separable(Z, labels, 2);
  TrainConfig c;
  c.epochs = 5;
  TrainResult a = train(Z, labels, 2, c), b = train(Z, labels, 2, c);
  ASSERT_EQ(a.folds.size(), b.folds.size());
  for (size_t i = 0; i < a.folds.size(); ++i) {
    EXPECT_EQ(a.folds[i].accuracy, b.folds[i].accuracy);
    EXPECT_EQ(a.folds[i].loss, b.folds[i].loss);
  }
  EXPECT_EQ(a.network.W1, b.network.W1);
}

TEST(Train, RefitEqualsDirectFit) {
  Matrix Z;
  std::vector<int> labels;
  separable(Z, labels, 3);
  TrainConfig c;
  c.epochs = 3;
  TrainResult r = train(Z, labels, 2, c);
  EXPECT_EQ(r.network.W1, fit_network(Z, labels, 2, c).W1);
}

TEST(Train, SingleClassThrows) {
  std::vector<int> labels(20, 1);
  EXPECT_THROW(train(Matrix::Ones(20, 2), labels, 3, TrainConfig()),
               DegenerateLabels);
}

TEST(Train, LossNonIncreasingAtSmallRate) {
  Matrix Z;
  std::vector<int> labels;
  separable(Z, labels, 4);
  std::vector<double> loss;
  TrainConfig c;
  fit_network(Z, labels, 2, c, &loss);
  for (size_t i = 1; i < loss.size(); ++i) EXPECT_LE(loss[i], loss[i - 1] + 1e-12);
}

TEST(Predict, TieBreakDominanceAndBatch) {
  Network n = random_net(3, 4, 4, 10);
  n.W2.setZero();
  n.b2.setConstant(1.0);
  EXPECT_EQ(predict(n, RowVector::Ones(3)).service, 0);
  n.b2(2) = 5.0;
  Prediction p = predict(n, RowVector::Ones(3));
  EXPECT_EQ(p.service, 2);
  EXPECT_NEAR(p.probabilities.sum(), 1.0, 1e-12);

  Network m = random_net(3, 6, 4, 11);
  Rng rng(12);
  Matrix Z = random_matrix(20, 3, rng, -2, 2);
  std::vector<int> batch = predict_batch(m, Z);
  for (int i = 0; i < 20; ++i) EXPECT_EQ(batch[i], predict(m, Z.row(i)).service);
  // Shifting every logit by a constant keeps the argmax.
  Network shifted = m;
  shifted.b2.array() += 3.7;
  EXPECT_EQ(predict_batch(shifted, Z), batch);
}

}  // namespace
}  // namespace seqfactor
