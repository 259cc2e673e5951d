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

#include <algorithm>
#include <cmath>
#include <numeric>

#include "seqfactor/evaluation.h"

namespace seqfactor {
namespace {

Matrix gather_rows(const Matrix& Z, std::span<const int> rows) {
  Matrix out(static_cast<Eigen::Index>(rows.size()), Z.cols());
  for (size_t i = 0; i < rows.size(); ++i) {
    out.row(static_cast<Eigen::Index>(i)) = Z.row(rows[i]);
  }
  return out;
}

std::vector<int> gather(std::span<const int> values, std::span<const int> idx) {
  std::vector<int> out;
  out.reserve(idx.size());
  for (int i : idx) out.push_back(values[i]);
  return out;
}

void check_labels(std::span<const int> labels, int num_classes) {
  for (int y : labels) {
    if (y < 0 || y >= num_classes) {
      throw InputError("label " + std::to_string(y) + " outside [0, " +
                       std::to_string(num_classes) + ")");
    }
  }
}

}  // namespace

void TrainConfig::validate() const {
  if (!(learning_rate > 0.0) || epochs < 1 || batch_size < 1 || hidden < 1) {
    throw ConfigError("learning rate, epochs, batch size and hidden width "
                      "must be positive");
  }
  if (folds < 2) throw ConfigError("cross validation needs >= 2 folds");
}

Network init_network(int inputs, int hidden, int classes, uint64_t seed) {
  Rng rng(seed);
  Network net;
  auto fill = [&rng](Matrix& m, int fan_in) {
    const double bound = 1.0 / std::sqrt(static_cast<double>(fan_in));
    for (Eigen::Index i = 0; i < m.rows(); ++i) {
      for (Eigen::Index j = 0; j < m.cols(); ++j) {
        m(i, j) = uniform(rng, -bound, bound);
      }
    }
  };
  net.W1.resize(inputs, hidden);
  net.W2.resize(hidden, classes);
  fill(net.W1, std::max(inputs, 1));
  fill(net.W2, hidden);
  net.b1 = Vector::Zero(hidden);
  net.b2 = Vector::Zero(classes);
  return net;
}

Matrix softmax_rows(const Matrix& logits) {
  Matrix p = logits;
  for (Eigen::Index i = 0; i < p.rows(); ++i) {
    const double top = p.row(i).maxCoeff();
    p.row(i) = (p.row(i).array() - top).exp().matrix();
    p.row(i) /= p.row(i).sum();
  }
  return p;
}

ForwardPass forward(const Network& net, const Matrix& Z) {
  if (Z.cols() != net.inputs()) {
    throw InputError("input width " + std::to_string(Z.cols()) +
                     " does not match network (" +
                     std::to_string(net.inputs()) + ")");
  }
  if (!Z.allFinite()) throw InputError("non-finite network input");
  ForwardPass pass;
  pass.pre_activation = (Z * net.W1).rowwise() + net.b1.transpose();
  pass.hidden = pass.pre_activation.cwiseMax(0.0);
  pass.logits = (pass.hidden * net.W2).rowwise() + net.b2.transpose();
  pass.probabilities = softmax_rows(pass.logits);
  return pass;
}

double cross_entropy(const Matrix& probabilities,
                     std::span<const int> labels) {
  if (static_cast<size_t>(probabilities.rows()) != labels.size()) {
    throw InputError("probability rows and labels differ in length");
  }
  if (labels.empty()) return 0.0;
  double total = 0.0;
  for (size_t i = 0; i < labels.size(); ++i) {
    total -= std::log(std::max(
        probabilities(static_cast<Eigen::Index>(i), labels[i]), 1e-12));
  }
  return total / static_cast<double>(labels.size());
}

Gradients backward(const Network& net, const Matrix& Z,
                   std::span<const int> labels) {
  if (static_cast<size_t>(Z.rows()) != labels.size() || labels.empty()) {
    throw InputError("batch rows and labels differ in length");
  }
  check_labels(labels, net.classes());
  const ForwardPass pass = forward(net, Z);
  const double n = static_cast<double>(labels.size());
  Matrix d_logits = pass.probabilities;
  for (size_t i = 0; i < labels.size(); ++i) {
    d_logits(static_cast<Eigen::Index>(i), labels[i]) -= 1.0;
  }
  d_logits /= n;
  Gradients g;
  g.W2 = pass.hidden.transpose() * d_logits;
  g.b2 = d_logits.colwise().sum().transpose();
  Matrix d_hidden = d_logits * net.W2.transpose();
  d_hidden = d_hidden.cwiseProduct(
      (pass.pre_activation.array() > 0.0).cast<double>().matrix());
  g.W1 = Z.transpose() * d_hidden;
  g.b1 = d_hidden.colwise().sum().transpose();
  return g;
}

Network fit_network(const Matrix& Z, std::span<const int> labels,
                    int num_classes, const TrainConfig& cfg,
                    std::vector<double>* epoch_loss) {
  cfg.validate();
  if (static_cast<size_t>(Z.rows()) != labels.size()) {
    throw InputError("feature rows and labels differ in length");
  }
  check_labels(labels, num_classes);
  Network net = init_network(static_cast<int>(Z.cols()), cfg.hidden,
                             num_classes, cfg.seed);
  Rng rng(cfg.seed ^ 0x9e3779b97f4a7c15ULL);
  std::vector<int> order(labels.size());
  std::iota(order.begin(), order.end(), 0);
  for (int epoch = 0; epoch < cfg.epochs; ++epoch) {
    shuffle(order, rng);
    for (size_t start = 0; start < order.size(); start += cfg.batch_size) {
      const size_t stop = std::min(order.size(), start + cfg.batch_size);
      const std::span<const int> batch(order.data() + start, stop - start);
      const Matrix Zb = gather_rows(Z, batch);
      const std::vector<int> yb = gather(labels, batch);
      const Gradients g = backward(net, Zb, yb);
      net.W1 -= cfg.learning_rate * g.W1;
      net.b1 -= cfg.learning_rate * g.b1;
      net.W2 -= cfg.learning_rate * g.W2;
      net.b2 -= cfg.learning_rate * g.b2;
    }
    if (epoch_loss != nullptr) {
      epoch_loss->push_back(
          cross_entropy(forward(net, Z).probabilities, labels));
    }
  }
  return net;
}

TrainResult train(const Matrix& Z, std::span<const int> labels,
                  int num_classes, const TrainConfig& cfg) {
  cfg.validate();
  if (static_cast<size_t>(Z.rows()) != labels.size()) {
    throw InputError("feature rows and labels differ in length");
  }
  check_labels(labels, num_classes);
  std::vector<int> distinct(labels.begin(), labels.end());
  std::sort(distinct.begin(), distinct.end());
  distinct.erase(std::unique(distinct.begin(), distinct.end()),
                 distinct.end());
  if (distinct.size() < 2) {
    throw DegenerateLabels("training labels contain a single class");
  }
  const int n = static_cast<int>(labels.size());
  if (n < cfg.folds) throw ConfigError("fewer rows than folds");

  TrainResult result;
  Rng rng(cfg.seed);
  std::vector<int> order(n);
  std::iota(order.begin(), order.end(), 0);
  shuffle(order, rng);
  for (int fold = 0; fold < cfg.folds; ++fold) {
    const int lo = static_cast<int>(static_cast<int64_t>(fold) * n / cfg.folds);
    const int hi =
        static_cast<int>(static_cast<int64_t>(fold + 1) * n / cfg.folds);
    std::vector<int> held(order.begin() + lo, order.begin() + hi);
    std::vector<int> kept(order.begin(), order.begin() + lo);
    kept.insert(kept.end(), order.begin() + hi, order.end());

    TrainConfig fold_cfg = cfg;
    fold_cfg.seed = cfg.seed + static_cast<uint64_t>(fold) + 1;
    const std::vector<int> kept_labels = gather(labels, kept);
    const Network net = fit_network(gather_rows(Z, kept), kept_labels,
                                    num_classes, fold_cfg);
    const Matrix held_rows = gather_rows(Z, held);
    const std::vector<int> held_labels = gather(labels, held);
    const ForwardPass pass = forward(net, held_rows);
    std::vector<int> preds(held.size());
    for (size_t i = 0; i < held.size(); ++i) {
      preds[i] = argmax(pass.probabilities.row(static_cast<Eigen::Index>(i)));
    }
    const MetricsReport report =
        classification_metrics(preds, held_labels, num_classes);
    result.folds.push_back({fold, static_cast<int>(kept.size()),
                            static_cast<int>(held.size()), report.accuracy,
                            report.f1,
                            cross_entropy(pass.probabilities, held_labels)});
  }
  result.network =
      fit_network(Z, labels, num_classes, cfg, &result.epoch_loss);
  return result;
}

int argmax(const Eigen::Ref<const RowVector>& row) {
  int best = 0;
  for (Eigen::Index j = 1; j < row.size(); ++j) {
    if (row(j) > row(best)) best = static_cast<int>(j);
  }
  return best;
}

Prediction predict(const Network& net, const RowVector& z) {
  const ForwardPass pass = forward(net, Matrix(z));
  return {argmax(pass.probabilities.row(0)),
          pass.probabilities.row(0).transpose()};
}

std::vector<int> predict_batch(const Network& net, const Matrix& Z) {
  const ForwardPass pass = forward(net, Z);
  std::vector<int> out(static_cast<size_t>(Z.rows()));
  for (Eigen::Index i = 0; i < Z.rows(); ++i) {
    out[static_cast<size_t>(i)] = argmax(pass.probabilities.row(i));
  }
  return out;
}

}  // namespace seqfactor
