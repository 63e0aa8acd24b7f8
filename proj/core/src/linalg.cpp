// Copyright 2026 The rctc Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "rctc/linalg.hpp"

#include <Eigen/Eigenvalues>
#include <algorithm>
#include <cmath>

#include "rctc/error.hpp"

namespace rctc {

CovarianceMatrix::CovarianceMatrix(Matrix entries) : entries_(std::move(entries)) {
  if (entries_.rows() == 0 || entries_.rows() != entries_.cols()) {
    throw DomainError("covariance must be a non-empty square matrix");
  }
  if (!entries_.allFinite()) throw DomainError("covariance has non-finite entries");
  if (!is_symmetric(entries_, 1e-12)) throw DomainError("covariance is not symmetric");
  const Vector eig = Eigen::SelfAdjointEigenSolver<Matrix>(entries_, Eigen::EigenvaluesOnly).eigenvalues();
  const double largest = std::max(eig.maxCoeff(), 0.0);
  if (eig.minCoeff() < -1e-10 * largest) {
    throw DomainError("covariance is not positive semi-definite");
  }
}

UnitLdl unit_ldl(const Matrix& k) {
  if (k.rows() != k.cols()) throw DomainError("unit_ldl: matrix is not square");
  Eigen::LLT<Matrix> llt(k);
  if (llt.info() != Eigen::Success) {
    throw FactorizationError("unit_ldl: matrix is not positive definite");
  }
  const Matrix l = llt.matrixL();
  const Vector scale = l.diagonal();
  UnitLdl out;
  out.unit_lower = l * scale.cwiseInverse().asDiagonal();
  out.unit_lower.diagonal().setOnes();
  out.diagonal = scale.cwiseAbs2();
  return out;
}

Matrix reverse_cholesky(const Matrix& w) {
  const Eigen::Index n = w.rows();
  if (n != w.cols()) throw DomainError("reverse_cholesky: matrix is not square");
  // Reversing rows and columns turns w = Z'Z (Z lower) into an ordinary
  // upper Cholesky problem J w J = U'U with U = J Z J.
  const Matrix flipped = w.reverse();
  Eigen::LLT<Matrix> llt(flipped);
  if (llt.info() != Eigen::Success) {
    throw FactorizationError("reverse_cholesky: matrix is not positive definite");
  }
  const Matrix upper = llt.matrixU();
  return upper.reverse();
}

Matrix block_diagonal(const Matrix& block, Eigen::Index count) {
  const Eigen::Index r = block.rows();
  const Eigen::Index c = block.cols();
  Matrix out = Matrix::Zero(r * count, c * count);
  for (Eigen::Index i = 0; i < count; ++i) out.block(i * r, i * c, r, c) = block;
  return out;
}

bool is_symmetric(const Matrix& m, double relative_tolerance) {
  if (m.rows() != m.cols()) return false;
  const double scale = std::max(m.cwiseAbs().maxCoeff(), 1e-300);
  return (m - m.transpose()).cwiseAbs().maxCoeff() <= relative_tolerance * scale;
}

double spectral_radius(const Matrix& m) {
  if (m.size() == 0) return 0.0;
  return Eigen::EigenSolver<Matrix>(m, false).eigenvalues().cwiseAbs().maxCoeff();
}

bool is_controllable(const Matrix& f, const Matrix& g) {
  const Eigen::Index d = f.rows();
  Matrix ctrb(d, d * g.cols());
  Matrix power = g;
  for (Eigen::Index k = 0; k < d; ++k) {
    ctrb.middleCols(k * g.cols(), g.cols()) = power;
    power = f * power;
  }
  Eigen::FullPivLU<Matrix> lu(ctrb);
  lu.setThreshold(1e-10);
  return lu.rank() == d;
}

}  // namespace rctc
