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

#include <cstdint>
#include <vector>

#include "rctc/linalg.hpp"

namespace rctc {

/// Zero-mean Gauss-Markov (autoregressive) source
///   x_t = a_1 x_{t-1} + ... + a_p x_{t-p} + w_t,   w_t ~ N(0, noise_variance).
/// Construction rejects non-stationary coefficient sets.
class GaussMarkovModel {
 public:
  GaussMarkovModel(std::vector<double> coefficients, double noise_variance);

  /// First-order model with the given stationary (not innovation) variance.
  static GaussMarkovModel ar1(double rho, double stationary_variance);

  std::size_t order() const { return coefficients_.size(); }
  const std::vector<double>& coefficients() const { return coefficients_; }
  double noise_variance() const { return noise_variance_; }
  double mean() const { return 0.0; }

  /// gamma(0), ..., gamma(lags - 1).
  std::vector<double> autocovariance(std::size_t lags) const;
  double stationary_variance() const { return autocovariance(1).front(); }

 private:
  std::vector<double> coefficients_;
  double noise_variance_;
};

/// K[i][j] = variance * rho^|i-j|.
CovarianceMatrix ar1_covariance(double rho, double variance, int n);

/// n x n Toeplitz covariance of `model` in stationarity.
CovarianceMatrix stationary_covariance(const GaussMarkovModel& model, int n);

/// A stationary realization: the first `order` samples are drawn jointly
/// from the stationary distribution, so no burn-in is needed.
std::vector<double> sample_path(const GaussMarkovModel& model, std::size_t length, std::uint64_t seed);

}  // namespace rctc
