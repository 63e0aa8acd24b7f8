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
#include <span>
#include <string>
#include <vector>

#include "rctc/linalg.hpp"
#include "rctc/random.hpp"

namespace rctc {

/// Random-delay channel. Every transmitted index suffers an independent
/// exponential delay with rate `lambda`; element i of a frame is
/// reconstructed at its deadline, by which time index j <= i has had
/// deadline + (i - j) * sample_period seconds to arrive.
struct ChannelModel {
  double lambda = 1.0;
  double deadline = 1.0;
  double sample_period = 1.0;
  int frame_length = 1;

  /// Checks the fields; throws DomainError.
  void validate() const;
  /// p = exp(-lambda * deadline), the chance an index misses its own deadline.
  double violation_probability() const;
  /// Channel with the given p at fixed deadline.
  static ChannelModel from_violation_probability(double p, double deadline, double sample_period,
                                                 int frame_length);
};

/// Lower-triangular 0/1 matrix: bit (i, j) says whether index j had arrived
/// when element i was reconstructed.
class AvailabilityMatrix {
 public:
  AvailabilityMatrix() = default;
  explicit AvailabilityMatrix(int dim, bool fill = false);

  int dim() const { return dim_; }
  bool operator()(int i, int j) const { return j <= i && bits_[index(i, j)] != 0; }
  void set(int i, int j, bool value);

  /// Every bit in the lower triangle is set.
  bool full() const;
  /// Column-wise monotone: once an index has arrived it stays arrived.
  bool monotone() const;

  /// The mN x mN 0/1 matrix with each bit replicated over an m x m identity.
  Matrix expanded(int block_dim) const;

  bool operator==(const AvailabilityMatrix&) const = default;

 private:
  std::size_t index(int i, int j) const {
    return static_cast<std::size_t>(i) * static_cast<std::size_t>(i + 1) / 2 + static_cast<std::size_t>(j);
  }
  int dim_ = 0;
  std::vector<std::uint8_t> bits_;
};

enum class DelayCorrelation {
  MonteCarlo,         // one delay per index; bits in a column are coupled
  IndependentApprox,  // every bit an independent Bernoulli draw
};

const char* to_string(DelayCorrelation mode);
DelayCorrelation delay_correlation_from_string(const std::string& text);

/// b_ij = 1 iff delays[j] <= deadline + (i - j) * sample_period.
AvailabilityMatrix availability_from_delays(const ChannelModel& model, std::span<const double> delays);

/// One exponential delay per index, deterministic given `seed`.
AvailabilityMatrix sample_availability(const ChannelModel& model, std::uint64_t seed);

/// Draws from `rng`; used by the simulators that stream frames.
AvailabilityMatrix sample_availability(const ChannelModel& model, DelayCorrelation mode, Rng& rng);

/// Entry (i, j) = exp(-lambda (deadline + (i - j) sample_period)) for j <= i, 0 above.
Matrix loss_probabilities(const ChannelModel& model);

/// Weighted set of B realizations plus the closed-form marginals. All
/// expectations over B are taken as weighted averages over `realizations`.
struct AvailabilityStats {
  Matrix marginals;
  std::vector<AvailabilityMatrix> realizations;
  std::vector<double> weights;  // sum to one
  DelayCorrelation mode = DelayCorrelation::MonteCarlo;

  int dim() const { return static_cast<int>(marginals.rows()); }
  /// Weighted average of the stored realizations.
  Matrix empirical_marginals() const;
};

/// `sample_count` equally weighted realizations.
AvailabilityStats availability_stats(const ChannelModel& model, std::size_t sample_count, std::uint64_t seed,
                                     DelayCorrelation mode);

/// Stats from explicit realizations; weights are normalized to sum to one.
AvailabilityStats availability_stats_from(const ChannelModel& model, std::vector<AvailabilityMatrix> realizations,
                                          std::vector<double> weights, DelayCorrelation mode);

/// First and same-row second moments of B, which is all a quadratic cost in
/// (A_hat o B) needs when the weight is block diagonal:
///   mean(i, j)        = E[b_ij]
///   row_product(t, i, j) = E[b_ti b_tj].
class AvailabilityMoments {
 public:
  AvailabilityMoments() = default;
  explicit AvailabilityMoments(const AvailabilityStats& stats);

  /// Exact moments of the delay law. Bits in one row refer to distinct
  /// indices, so off-diagonal row products factor in either mode.
  static AvailabilityMoments exact(const ChannelModel& model);

  int dim() const { return dim_; }
  double mean(int i, int j) const { return mean_(i, j); }
  double row_product(int t, int i, int j) const {
    return row_products_[static_cast<std::size_t>(t)](i, j);
  }
  const Matrix& mean_matrix() const { return mean_; }

 private:
  int dim_ = 0;
  Matrix mean_;
  std::vector<Matrix> row_products_;
};

}  // namespace rctc
