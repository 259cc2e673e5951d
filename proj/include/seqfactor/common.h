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

#ifndef SEQFACTOR_COMMON_H_
#define SEQFACTOR_COMMON_H_

#include <cmath>
#include <cstdint>
#include <random>
#include <stdexcept>
#include <string>
#include <vector>

#include <Eigen/Dense>

namespace seqfactor {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;
using RowVector = Eigen::RowVectorXd;

// Service slot value used for padded (missing) history positions.
inline constexpr int kPad = -1;

class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class EmptyLogError : public Error {
 public:
  using Error::Error;
};
class ConfigError : public Error {
 public:
  using Error::Error;
};
class ShapeError : public Error {
 public:
  using Error::Error;
};
class IndexError : public Error {
 public:
  using Error::Error;
};
class InputError : public Error {
 public:
  using Error::Error;
};
class NonFiniteObjective : public Error {
 public:
  using Error::Error;
};
class DegenerateLabels : public Error {
 public:
  using Error::Error;
};
class GenerationError : public Error {
 public:
  using Error::Error;
};
// A stage was invoked before the stage that produces its inputs.
class PipelineOrderError : public Error {
 public:
  using Error::Error;
};

using Rng = std::mt19937_64;

// Uniform double in [0, 1) from the top 53 bits; independent of the
// standard library's distribution implementation.
inline double uniform01(Rng& rng) {
  return static_cast<double>(rng() >> 11) * 0x1.0p-53;
}

inline double uniform(Rng& rng, double lo, double hi) {
  return lo + (hi - lo) * uniform01(rng);
}

// Uniform integer in [0, n).
inline int uniform_index(Rng& rng, int n) {
  return static_cast<int>(uniform01(rng) * n);
}

// Standard normal via Box-Muller.
inline double standard_normal(Rng& rng) {
  double u1 = uniform01(rng);
  while (u1 <= 0.0) u1 = uniform01(rng);
  const double u2 = uniform01(rng);
  return std::sqrt(-2.0 * std::log(u1)) * std::cos(6.283185307179586 * u2);
}

template <typename T>
void shuffle(std::vector<T>& v, Rng& rng) {
  for (int i = static_cast<int>(v.size()) - 1; i > 0; --i) {
    std::swap(v[i], v[uniform_index(rng, i + 1)]);
  }
}

inline Matrix positive_part(const Matrix& m) { return m.cwiseMax(0.0); }
inline Matrix negative_part(const Matrix& m) { return (-m).cwiseMax(0.0); }

bool all_finite(const Matrix& m);

}  // namespace seqfactor

#endif  // SEQFACTOR_COMMON_H_
