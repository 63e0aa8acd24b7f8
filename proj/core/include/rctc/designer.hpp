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

#include <functional>
#include <iosfwd>
#include <optional>
#include <span>
#include <vector>

#include "rctc/channel.hpp"
#include "rctc/codec.hpp"
#include "rctc/linalg.hpp"
#include "rctc/quantizer.hpp"

namespace rctc {

struct SearchConfig {
  double initial_step = 0.1;
  double shrink_factor = 0.5;
  double step_tolerance = 1e-6;
  std::size_t max_evaluations = 100000;

  void validate() const;
};

struct SearchResult {
  std::vector<double> x;
  double value = 0.0;
  /// Objective at the start and after every accepted move; non-increasing.
  std::vector<double> history;
  std::size_t evaluations = 0;
  bool budget_exhausted = false;
};

using Objective = std::function<double(std::span<const double>)>;

/// Hooke-Jeeves pattern search: coordinate-wise exploratory moves of
/// +-step, pattern moves along every successful direction, and step
/// shrinking when exploration fails. Stops once the step falls below
/// step_tolerance or the evaluation budget is spent. The objective must be
/// deterministic.
SearchResult hooke_jeeves(const Objective& objective, std::vector<double> x0, const SearchConfig& config);

/// Effective quantizer variances for rate allocation. E_B[W] with
/// W = (H A^{-1})' M (H A^{-1}) is factored as Z'Z (Z lower triangular)
/// and sigma_i^2 = det(Z_ii Cov(d_i) Z_ii')^{1/m}, where Cov(d_i) is the
/// i-th diagonal block of A^{-1} K_x A^{-T}. For m = 1 this is
/// Z_ii^2 Var(d_i). E_B[W] is nudged by 1e-12 tr/dim on the diagonal when it
/// is close to singular.
std::vector<double> effective_variances(const CausalTransform& transform, const AvailabilityMoments& moments,
                                        const Matrix& k_x, const Matrix& weight);

struct DesignProblem {
  CovarianceMatrix k_x;
  /// Frozen realizations used by every objective evaluation.
  AvailabilityStats stats;
  Matrix weight;
  double average_rate = 5.0;
  int frame_length = 1;
  int block_dim = 1;
  /// Full and Toeplitz are searched; Identity and PLT are evaluated as is.
  TransformKind structure = TransformKind::Full;
  double noise_constant = 1.0;
  double min_rate = 0.0;
  /// Extra starting points; the search starts from whichever of PLT and
  /// these has the lowest objective. Must fit `structure`.
  std::vector<CausalTransform> warm_starts;
  /// tr(P K_w) when `weight` is the LQG weight; enables predicted_lqg_cost.
  std::optional<double> lqg_base_cost;
};

struct DesignResult {
  CausalTransform transform;
  RateAllocation rates;
  /// Fine-quantization quantizer input variances, mN entries.
  std::vector<double> input_variances;
  /// Modeled K_q for the allocated rates.
  Matrix k_q;
  double predicted_am_wmse = 0.0;
  std::optional<double> predicted_lqg_cost;
  /// Search objective (uniform rates) at the returned transform.
  double search_objective = 0.0;
  std::size_t iterations = 0;
  std::vector<double> objective_history;
  bool budget_exhausted = false;
};

/// Objective used in the transform search: am_wmse with every quantizer at
/// the average rate and K_q from the fine-quantization input variances.
double uniform_rate_objective(const CausalTransform& transform, const AvailabilityMoments& moments,
                              const Matrix& k_x, const Matrix& weight, double average_rate, double noise_constant);

/// Two-step design: search the transform pair under uniform rates starting
/// from PLT, then allocate rates from the effective variances and
/// re-evaluate with the allocated K_q.
DesignResult design_code(const DesignProblem& problem, const SearchConfig& config);

void write_design(std::ostream& os, const DesignResult& result);
DesignResult read_design(std::istream& is);

}  // namespace rctc
