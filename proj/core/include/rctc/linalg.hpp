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

#pragma once

#include <Eigen/Dense>

namespace rctc {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;

/// Symmetric positive semi-definite matrix. The invariants are checked on
/// construction: symmetry to 1e-12 relative and no eigenvalue below
/// -1e-10 times the largest one.
class CovarianceMatrix {
 public:
  CovarianceMatrix() = default;
  explicit CovarianceMatrix(Matrix entries);

  Eigen::Index dim() const { return entries_.rows(); }
  const Matrix& matrix() const { return entries_; }
  double operator()(Eigen::Index i, Eigen::Index j) const { return entries_(i, j); }

 private:
  Matrix entries_;
};

/// K = L * diag(D) * L' with L unit lower triangular.
struct UnitLdl {
  Matrix unit_lower;
  Vector diagonal;
};

/// Throws FactorizationError unless `k` is positive definite.
UnitLdl unit_ldl(const Matrix& k);

/// Lower-triangular Z with w = Z' * Z. This is the Cholesky factorization
/// run from the bottom-right corner. Throws FactorizationError unless `w`
/// is positive definite.
Matrix reverse_cholesky(const Matrix& w);

Matrix block_diagonal(const Matrix& block, Eigen::Index count);

bool is_symmetric(const Matrix& m, double relative_tolerance);

double spectral_radius(const Matrix& m);

/// Controllability matrix [G, FG, ..., F^{d-1}G] has full row rank.
bool is_controllable(const Matrix& f, const Matrix& g);

}  // namespace rctc
