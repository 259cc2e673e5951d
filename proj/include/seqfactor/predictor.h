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

#ifndef SEQFACTOR_PREDICTOR_H_
#define SEQFACTOR_PREDICTOR_H_

#include <cstdint>
#include <span>
#include <vector>

#include "seqfactor/common.h"

namespace seqfactor {

// logits = relu(Z W1 + b1) W2 + b2, probabilities = softmax(logits).
struct Network {
  Matrix W1;  // inputs x hidden
  Vector b1;
  Matrix W2;  // hidden x classes
  Vector b2;

  int inputs() const { return static_cast<int>(W1.rows()); }
  int hidden() const { return static_cast<int>(W1.cols()); }
  int classes() const { return static_cast<int>(W2.cols()); }
};

struct TrainConfig {
  double learning_rate = 1e-3;
  int epochs = 20;
  int batch_size = 32;
  int hidden = 64;
  uint64_t seed = 0;
  int folds = 5;

  void validate() const;
};

struct ForwardPass {
  Matrix pre_activation;  // Z W1 + b1
  Matrix hidden;          // relu(pre_activation)
  Matrix logits;
  Matrix probabilities;
};

struct Gradients {
  Matrix W1;
  Vector b1;
  Matrix W2;
  Vector b2;
};

struct FoldMetrics {
  int fold = 0;
  int train_size = 0;
  int test_size = 0;
  double accuracy = 0.0;
  double macro_f1 = 0.0;
  double loss = 0.0;
};

struct TrainResult {
  Network network;
  std::vector<FoldMetrics> folds;
  std::vector<double> epoch_loss;  // of the final refit
};

struct Prediction {
  int service = 0;
  Vector probabilities;
};

// Weights uniform in +-1/sqrt(fan_in), biases zero.
Network init_network(int inputs, int hidden, int classes, uint64_t seed);

Matrix softmax_rows(const Matrix& logits);

// Throws InputError on non-finite input or a width mismatch.
ForwardPass forward(const Network& net, const Matrix& Z);

// Mean negative log-likelihood of the true class, probabilities floored at
// 1e-12.
double cross_entropy(const Matrix& probabilities, std::span<const int> labels);

// Exact gradients of the mean cross-entropy.
Gradients backward(const Network& net, const Matrix& Z,
                   std::span<const int> labels);

// Mini-batch gradient descent on every row of Z.
Network fit_network(const Matrix& Z, std::span<const int> labels,
                    int num_classes, const TrainConfig& cfg,
                    std::vector<double>* epoch_loss = nullptr);

// Seeded k-fold cross validation followed by a refit on all rows. Throws
// DegenerateLabels when fewer than two classes are present.
TrainResult train(const Matrix& Z, std::span<const int> labels,
                  int num_classes, const TrainConfig& cfg);

// Lowest index wins ties.
int argmax(const Eigen::Ref<const RowVector>& row);
Prediction predict(const Network& net, const RowVector& z);
std::vector<int> predict_batch(const Network& net, const Matrix& Z);

}  // namespace seqfactor

#endif  // SEQFACTOR_PREDICTOR_H_
