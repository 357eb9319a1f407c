// digitvec/compensation.cc

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

#include "digitvec/compensation.h"

#include <cmath>

#include "digitvec/error.h"
#include "digitvec/log.h"

namespace digitvec {
namespace {

constexpr double kRidgeScale = 1e-8;

// Makes the largest-magnitude entry of each column positive.
void FixSigns(Matrix *w) {
  for (Eigen::Index j = 0; j < w->cols(); ++j) {
    Eigen::Index i;
    w->col(j).cwiseAbs().maxCoeff(&i);
    if ((*w)(i, j) < 0.0) w->col(j) *= -1.0;
  }
}

// Generalized symmetric eigenproblem A v = lambda B v; returns eigenvectors
// with descending eigenvalues and V^T B V = I.
Matrix GeneralizedEigenvectors(const Matrix &a, const Matrix &b, std::string_view what) {
  Matrix b_floored = Symmetrized(b);
  {
    Eigen::LLT<Matrix> llt(b_floored);
    if (llt.info() != Eigen::Success) {
      Matrix l = LowerCholesky(b_floored, kRidgeScale, what);
      b_floored = l * l.transpose();
    }
  }
  Eigen::GeneralizedSelfAdjointEigenSolver<Matrix> solver(Symmetrized(a), b_floored);
  if (solver.info() != Eigen::Success)
    throw NumericalError(std::string(what) + ": generalized eigensolver failed");
  Matrix v = solver.eigenvectors().rowwise().reverse();
  FixSigns(&v);
  return v;
}

}  // namespace

std::string_view TransformKindName(TransformKind kind) {
  switch (kind) {
    case TransformKind::kUncertainLda: return "uncertain_lda";
    case TransformKind::kUncertainWccn: return "uncertain_wccn";
    case TransformKind::kUncertaintyNorm: return "uncertainty_norm";
    case TransformKind::kRegularizedLda: return "regularized_lda";
    case TransformKind::kLengthNorm: return "length_norm";
  }
  return "unknown";
}

TransformKind ParseTransformKind(std::string_view name) {
  for (auto kind : {TransformKind::kUncertainLda, TransformKind::kUncertainWccn,
                    TransformKind::kUncertaintyNorm, TransformKind::kRegularizedLda,
                    TransformKind::kLengthNorm})
    if (TransformKindName(kind) == name) return kind;
  throw ConfigError("unknown transform kind '" + std::string(name) + "'");
}

Vector Transform::Apply(const Vector &y) const {
  if (kind == TransformKind::kLengthNorm) return LengthNormalize(y);
  if (y.size() != projection.rows())
    throw ShapeError("transform expects dimension " + std::to_string(projection.rows()) +
                     ", got " + std::to_string(y.size()));
  return projection.transpose() * y;
}

Vector TransformChain::Apply(const Vector &y) const {
  Vector out = y;
  for (const Transform &t : steps) out = t.Apply(out);
  return out;
}

ScatterSet ComputeScatter(const std::vector<std::vector<Vector>> &by_speaker, int digit) {
  if (by_speaker.size() < 2)
    throw DegenerateScatter("scatter needs at least two speakers, got " +
                            std::to_string(by_speaker.size()));
  Eigen::Index dim = -1;
  ScatterSet sc;
  sc.digit = digit;
  for (const auto &cls : by_speaker) {
    if (cls.empty()) throw EmptyInput("speaker with no i-vectors in scatter");
    for (const Vector &y : cls) {
      if (dim < 0) dim = y.size();
      if (y.size() != dim) throw ShapeError("i-vector dimensions differ");
    }
    sc.class_counts.push_back(static_cast<int>(cls.size()));
    sc.num_vectors += static_cast<int>(cls.size());
  }
  const auto num_classes = static_cast<Eigen::Index>(by_speaker.size());
  sc.global_mean = Vector::Zero(dim);
  sc.class_means.resize(num_classes, dim);
  for (Eigen::Index s = 0; s < num_classes; ++s) {
    Vector m = Vector::Zero(dim);
    for (const Vector &y : by_speaker[s]) m += y;
    sc.global_mean += m;
    sc.class_means.row(s) = (m / static_cast<double>(by_speaker[s].size())).transpose();
  }
  sc.global_mean /= sc.num_vectors;

  sc.between = Matrix::Zero(dim, dim);
  sc.within = Matrix::Zero(dim, dim);
  sc.total = Matrix::Zero(dim, dim);
  for (Eigen::Index s = 0; s < num_classes; ++s) {
    Vector ms = sc.class_means.row(s).transpose();
    Vector db = ms - sc.global_mean;
    sc.between += db * db.transpose();
    Matrix ws = Matrix::Zero(dim, dim);
    for (const Vector &y : by_speaker[s]) {
      Vector dw = y - ms, dt = y - sc.global_mean;
      ws += dw * dw.transpose();
      sc.total += dt * dt.transpose();
    }
    sc.within += ws / static_cast<double>(by_speaker[s].size());
  }
  sc.between /= static_cast<double>(num_classes);
  sc.within /= static_cast<double>(num_classes);
  sc.total /= sc.num_vectors;
  sc.uncertainty = Matrix::Zero(dim, dim);
  return sc;
}

Transform FitUncertainLda(const ScatterSet &scatter, int out_dim) {
  const Eigen::Index dim = scatter.Dim();
  if (scatter.between.cols() != dim || scatter.within.rows() != dim ||
      scatter.within.cols() != dim || scatter.uncertainty.rows() != dim ||
      scatter.uncertainty.cols() != dim)
    throw ShapeError("S_b, S_w and S_u must be square matrices of the same size");
  if (out_dim < 1 || out_dim > dim)
    throw ConfigError("LDA output dimension " + std::to_string(out_dim) +
                      " must be in [1, " + std::to_string(dim) + "]");
  Matrix v = GeneralizedEigenvectors(scatter.between, scatter.within + scatter.uncertainty,
                                     "S_w + S_u");
  Transform t;
  t.kind = TransformKind::kUncertainLda;
  t.digit = scatter.digit;
  t.projection = v.leftCols(out_dim);
  return t;
}

Transform FitUncertainWccn(const ScatterSet &scatter) {
  const Eigen::Index dim = scatter.within.rows();
  if (scatter.within.cols() != dim || scatter.uncertainty.rows() != dim ||
      scatter.uncertainty.cols() != dim)
    throw ShapeError("S_w and S_u must be square matrices of the same size");
  Matrix l = LowerCholesky(scatter.within + scatter.uncertainty, kRidgeScale, "S_w + S_u");
  Transform t;
  t.kind = TransformKind::kUncertainWccn;
  t.digit = scatter.digit;
  // W = L^-T, so W W^T = (L L^T)^-1.
  t.projection = l.transpose().triangularView<Eigen::Upper>().solve(
      Matrix::Identity(dim, dim));
  return t;
}

Transform FitUncertaintyNorm(const Matrix &uncertainty, int digit) {
  const Eigen::Index dim = uncertainty.rows();
  Matrix l = LowerCholesky(uncertainty, kRidgeScale, "S_u");
  Transform t;
  t.kind = TransformKind::kUncertaintyNorm;
  t.digit = digit;
  t.projection = l.transpose().triangularView<Eigen::Upper>().solve(
      Matrix::Identity(dim, dim));
  return t;
}

Transform FitRegularizedLda(const ScatterSet &scatter, double reg_coeff) {
  if (reg_coeff < 0.0) throw ConfigError("reg_coeff must be >= 0");
  const Eigen::Index dim = scatter.Dim();
  if (scatter.between.cols() != dim || scatter.within.rows() != dim ||
      scatter.within.cols() != dim)
    throw ShapeError("S_b and S_w must be square matrices of the same size");
  const double beta = reg_coeff * scatter.between.trace() / static_cast<double>(dim);
  Matrix v = GeneralizedEigenvectors(
      scatter.between + beta * Matrix::Identity(dim, dim), scatter.within, "S_w");
  Transform t;
  t.kind = TransformKind::kRegularizedLda;
  t.digit = scatter.digit;
  t.regularization = beta;
  t.projection = v;
  return t;
}

Vector LengthNormalize(const Vector &v) {
  const double norm = v.norm();
  if (!(norm > 0.0)) throw ZeroVector("cannot length-normalize a zero vector");
  return v / norm;
}

std::string_view CompensationMethodName(CompensationMethod method) {
  switch (method) {
    case CompensationMethod::kNone: return "none";
    case CompensationMethod::kUncertaintyNorm: return "uncertainty_norm";
    case CompensationMethod::kUncertainWccn: return "uncertain_wccn";
    case CompensationMethod::kUncertainLda: return "uncertain_lda";
  }
  return "unknown";
}

CompensationMethod ParseCompensationMethod(std::string_view name) {
  for (auto m : {CompensationMethod::kNone, CompensationMethod::kUncertaintyNorm,
                 CompensationMethod::kUncertainWccn, CompensationMethod::kUncertainLda})
    if (CompensationMethodName(m) == name) return m;
  throw ConfigError("unknown compensation method '" + std::string(name) + "'");
}

namespace {

std::vector<std::vector<Vector>> ApplyToAll(const std::vector<Transform> &steps,
                                            const std::vector<std::vector<Vector>> &in) {
  std::vector<std::vector<Vector>> out = in;
  for (auto &cls : out)
    for (Vector &y : cls)
      for (const Transform &t : steps) y = t.Apply(y);
  return out;
}

Transform LengthNormStep(int digit) {
  Transform t;
  t.kind = TransformKind::kLengthNorm;
  t.digit = digit;
  return t;
}

}  // namespace

TransformChain BuildChain(const CompensationConfig &cfg, const CompensationData &data,
                          int digit) {
  TransformChain chain;
  chain.digit = digit;
  if (cfg.method == CompensationMethod::kNone) return chain;

  ScatterSet scatter = ComputeScatter(data.by_speaker, digit);
  if (data.uncertainty.rows() != scatter.Dim() || data.uncertainty.cols() != scatter.Dim())
    throw ShapeError("uncertainty matrix does not match i-vector dimension");
  scatter.uncertainty = data.uncertainty;

  switch (cfg.method) {
    case CompensationMethod::kUncertainLda: {
      const int out_dim = cfg.lda_dim > 0 ? cfg.lda_dim : static_cast<int>(scatter.Dim());
      chain.steps.push_back(FitUncertainLda(scatter, out_dim));
      return chain;
    }
    case CompensationMethod::kUncertaintyNorm: {
      Matrix target = cfg.uncertainty_source == UncertaintySource::kAverage
                          ? scatter.uncertainty
                          : Matrix(scatter.total + scatter.uncertainty);
      chain.steps.push_back(FitUncertaintyNorm(target, digit));
      break;
    }
    case CompensationMethod::kUncertainWccn:
      chain.steps.push_back(FitUncertainWccn(scatter));
      break;
    case CompensationMethod::kNone:
      break;
  }
  chain.steps.push_back(LengthNormStep(digit));
  ScatterSet projected = ComputeScatter(ApplyToAll(chain.steps, data.by_speaker), digit);
  chain.steps.push_back(FitRegularizedLda(projected, cfg.reg_coeff));
  return chain;
}

}  // namespace digitvec
