// digitvec/linalg.h

// Copyright 2026 The digitvec Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//       http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#ifndef DIGITVEC_LINALG_H_
#define DIGITVEC_LINALG_H_

#include <Eigen/Dense>

#include <cstdint>
#include <random>
#include <span>
#include <string_view>

namespace digitvec {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;
using RowVector = Eigen::RowVectorXd;

/// log(sum(exp(x))) over a span; -inf for an empty or all -inf input.
double LogSumExp(std::span<const double> x);

/// Returns (M + M^T) / 2.
Matrix Symmetrized(const Matrix &m);

/// Lower Cholesky factor of a symmetric matrix.  If the matrix is not
/// positive definite, a ridge of `ridge_scale * tr(M) / dim` is added (and a
/// warning logged naming `what`); if that still fails NumericalError is
/// thrown.
Matrix LowerCholesky(const Matrix &m, double ridge_scale, std::string_view what);

/// Inverse of a symmetric positive definite matrix via Cholesky.
Matrix SpdInverse(const Matrix &m);

/// Deterministic pseudo-random source.  Normals use Box-Muller on top of
/// mt19937_64 so that streams are identical across standard libraries.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}

  /// Uniform in [0, 1).
  double Uniform();
  double Normal();
  /// Uniform integer in [lo, hi].
  int UniformInt(int lo, int hi);
  Vector NormalVector(Eigen::Index dim);

 private:
  std::mt19937_64 engine_;
  bool have_spare_ = false;
  double spare_ = 0.0;
};

/// Mixes a base seed with a stream index (splitmix64), giving independent
/// per-item RNG streams whose values do not depend on evaluation order.
std::uint64_t DeriveSeed(std::uint64_t seed, std::uint64_t stream);

}  // namespace digitvec

#endif  // DIGITVEC_LINALG_H_
