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

#include "rctc/source_model.hpp"

#include <cmath>

#include "rctc/error.hpp"
#include "rctc/random.hpp"

namespace rctc {
namespace {

Matrix companion(const std::vector<double>& a) {
  const auto p = static_cast<Eigen::Index>(a.size());
  Matrix c = Matrix::Zero(p, p);
  for (Eigen::Index k = 0; k < p; ++k) c(0, k) = a[static_cast<std::size_t>(k)];
  for (Eigen::Index k = 1; k < p; ++k) c(k, k - 1) = 1.0;
  return c;
}

// Solves S = C S C' + q e1 e1' for the companion state covariance.
Matrix state_covariance(const std::vector<double>& a, double q) {
  const Matrix c = companion(a);
  const Eigen::Index p = c.rows();
  Matrix kron(p * p, p * p);
  for (Eigen::Index i = 0; i < p; ++i) {
    for (Eigen::Index j = 0; j < p; ++j) kron.block(i * p, j * p, p, p) = c(i, j) * c;
  }
  Vector rhs = Vector::Zero(p * p);
  rhs(0) = q;
  const Vector vec = (Matrix::Identity(p * p, p * p) - kron).partialPivLu().solve(rhs);
  Matrix s = Eigen::Map<const Matrix>(vec.data(), p, p);
  return 0.5 * (s + s.transpose());
}

}  // namespace

GaussMarkovModel::GaussMarkovModel(std::vector<double> coefficients, double noise_variance)
    : coefficients_(std::move(coefficients)), noise_variance_(noise_variance) {
  if (coefficients_.empty()) throw DomainError("GaussMarkovModel: order must be positive");
  if (!(noise_variance_ > 0.0) || !std::isfinite(noise_variance_)) {
    throw DomainError("GaussMarkovModel: noise variance must be positive");
  }
  for (double a : coefficients_) {
    if (!std::isfinite(a)) throw DomainError("GaussMarkovModel: non-finite coefficient");
  }
  if (spectral_radius(companion(coefficients_)) >= 1.0) {
    throw StationarityError("GaussMarkovModel: characteristic roots must lie inside the unit circle");
  }
}

GaussMarkovModel GaussMarkovModel::ar1(double rho, double stationary_variance) {
  if (!(std::abs(rho) < 1.0)) throw StationarityError("ar1: |rho| must be < 1");
  if (!(stationary_variance > 0.0)) throw DomainError("ar1: variance must be positive");
  return GaussMarkovModel({rho}, stationary_variance * (1.0 - rho * rho));
}

std::vector<double> GaussMarkovModel::autocovariance(std::size_t lags) const {
  const std::size_t p = order();
  std::vector<double> gamma(std::max(lags, p));
  if (p == 1) {
    const double rho = coefficients_[0];
    gamma[0] = noise_variance_ / (1.0 - rho * rho);
  } else {
    const Matrix s = state_covariance(coefficients_, noise_variance_);
    for (std::size_t k = 0; k < p; ++k) gamma[k] = s(0, static_cast<Eigen::Index>(k));
  }
  for (std::size_t k = (p == 1 ? 1 : p); k < gamma.size(); ++k) {
    double acc = 0.0;
    for (std::size_t j = 0; j < p; ++j) {
      const std::size_t lag = k >= j + 1 ? k - j - 1 : j + 1 - k;
      acc += coefficients_[j] * gamma[lag];
    }
    gamma[k] = acc;
  }
  gamma.resize(lags);
  return gamma;
}

CovarianceMatrix ar1_covariance(double rho, double variance, int n) {
  if (!(std::abs(rho) < 1.0)) throw StationarityError("ar1_covariance: |rho| must be < 1");
  if (!(variance > 0.0)) throw DomainError("ar1_covariance: variance must be positive");
  if (n < 1) throw DomainError("ar1_covariance: n must be positive");
  Matrix k(n, n);
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < n; ++j) k(i, j) = variance * std::pow(rho, std::abs(i - j));
  }
  return CovarianceMatrix(std::move(k));
}

CovarianceMatrix stationary_covariance(const GaussMarkovModel& model, int n) {
  if (n < 1) throw DomainError("stationary_covariance: n must be positive");
  const std::vector<double> gamma = model.autocovariance(static_cast<std::size_t>(n));
  Matrix k(n, n);
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < n; ++j) k(i, j) = gamma[static_cast<std::size_t>(std::abs(i - j))];
  }
  return CovarianceMatrix(std::move(k));
}

std::vector<double> sample_path(const GaussMarkovModel& model, std::size_t length, std::uint64_t seed) {
  std::vector<double> out;
  if (length == 0) return out;
  out.reserve(length);
  Rng rng(seed);
  std::normal_distribution<double> normal(0.0, 1.0);

  const std::size_t p = model.order();
  const auto& a = model.coefficients();
  // Stationary draw of (x_{p-1}, ..., x_0) followed by the recursion.
  const Matrix initial = stationary_covariance(model, static_cast<int>(p)).matrix();
  const Matrix chol = initial.llt().matrixL();
  Vector z(static_cast<Eigen::Index>(p));
  for (Eigen::Index i = 0; i < z.size(); ++i) z(i) = normal(rng);
  const Vector x0 = chol * z;
  for (std::size_t i = 0; i < std::min(p, length); ++i) out.push_back(x0(static_cast<Eigen::Index>(i)));

  const double sigma = std::sqrt(model.noise_variance());
  for (std::size_t t = p; t < length; ++t) {
    double x = sigma * normal(rng);
    for (std::size_t j = 0; j < p; ++j) x += a[j] * out[t - j - 1];
    out.push_back(x);
  }
  return out;
}

}  // namespace rctc
