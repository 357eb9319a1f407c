// digitvec/linalg.cc

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

#include "digitvec/linalg.h"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <string>

#include "digitvec/error.h"
#include "digitvec/log.h"

namespace digitvec {

double LogSumExp(std::span<const double> x) {
  double max = -std::numeric_limits<double>::infinity();
  for (double v : x) max = std::max(max, v);
  if (!std::isfinite(max)) return max;
  double sum = 0.0;
  for (double v : x) sum += std::exp(v - max);
  return max + std::log(sum);
}

Matrix Symmetrized(const Matrix &m) { return 0.5 * (m + m.transpose()); }

Matrix LowerCholesky(const Matrix &m, double ridge_scale, std::string_view what) {
  Matrix sym = Symmetrized(m);
  Eigen::LLT<Matrix> llt(sym);
  if (llt.info() == Eigen::Success) return llt.matrixL();
  double ridge = ridge_scale * std::max(sym.trace(), 0.0) /
                 std::max<Eigen::Index>(sym.rows(), 1);
  if (ridge <= 0.0) ridge = ridge_scale;
  DV_WARN << std::string(what) << " is not positive definite; adding ridge "
          << ridge;
  sym.diagonal().array() += ridge;
  llt.compute(sym);
  if (llt.info() != Eigen::Success)
    throw NumericalError(std::string(what) +
                         " is not positive definite even after flooring");
  return llt.matrixL();
}

Matrix SpdInverse(const Matrix &m) {
  Eigen::LLT<Matrix> llt(Symmetrized(m));
  if (llt.info() != Eigen::Success)
    throw NumericalError("matrix is not positive definite");
  return llt.solve(Matrix::Identity(m.rows(), m.cols()));
}

double Rng::Uniform() {
  // 53 random bits -> [0, 1).
  return static_cast<double>(engine_() >> 11) * 0x1.0p-53;
}

double Rng::Normal() {
  if (have_spare_) {
    have_spare_ = false;
    return spare_;
  }
  double u1;
  do {
    u1 = Uniform();
  } while (u1 <= 0.0);
  double u2 = Uniform();
  double radius = std::sqrt(-2.0 * std::log(u1));
  double angle = 2.0 * std::numbers::pi * u2;
  spare_ = radius * std::sin(angle);
  have_spare_ = true;
  return radius * std::cos(angle);
}

int Rng::UniformInt(int lo, int hi) {
  auto span = static_cast<std::uint64_t>(hi - lo) + 1;
  return lo + static_cast<int>(engine_() % span);
}

Vector Rng::NormalVector(Eigen::Index dim) {
  Vector v(dim);
  for (Eigen::Index i = 0; i < dim; ++i) v(i) = Normal();
  return v;
}

std::uint64_t DeriveSeed(std::uint64_t seed, std::uint64_t stream) {
  std::uint64_t z = seed + 0x9e3779b97f4a7c15ULL * (stream + 1);
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

}  // namespace digitvec
