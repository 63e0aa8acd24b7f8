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
#include <iosfwd>
#include <span>
#include <vector>

#include "rctc/linalg.hpp"
#include "rctc/random.hpp"

namespace rctc {

/// Per-quantizer rates r_i with the variances they were derived from.
/// sum(rates) / N == average.
struct RateAllocation {
  std::vector<double> rates;
  std::vector<double> effective_variances;
  double average = 0.0;
};

/// Fine-quantization optimal allocation
///   r_i = r + 1/2 log2(var_i / geometric_mean(var)).
/// Rates may come out negative; see clamp_rates.
RateAllocation allocate_rates(std::span<const double> effective_variances, double average_rate);

/// Raises every rate below `min_rate` to it and takes the deficit from the
/// remaining rates in proportion to their excess over `min_rate`. The mean
/// is preserved. Throws InfeasibleError when average < min_rate.
RateAllocation clamp_rates(const RateAllocation& allocation, double min_rate);

/// Modeled distortion constant of the Gaussian Lloyd-Max quantizer in the
/// high-rate limit (pi * sqrt(3) / 2).
inline constexpr double kGaussianHighRateConstant = 2.7206990463513265;

/// Scalar codebook for a unit-variance input. `boundaries[k]` is the upper
/// edge of cell k; the last one is +inf.
struct ScalarCodebook {
  std::vector<double> levels;
  std::vector<double> boundaries;

  std::size_t size() const { return levels.size(); }
  std::size_t nearest(double value) const;
};

/// Lloyd-Max codebook for N(0, 1) with `levels` cells, trained by Lloyd
/// iteration on exact Gaussian cell integrals.
ScalarCodebook lloyd_max_gaussian(std::size_t levels);

/// Mean squared error of `codebook` against a N(0, 1) input.
double gaussian_distortion(const ScalarCodebook& codebook);

void write_codebook(std::ostream& os, const ScalarCodebook& codebook);
ScalarCodebook read_codebook(std::istream& is);

enum class QuantizerMode {
  Exact,         // infinite rate, no noise
  ModeledNoise,  // additive N(0, c 2^{-2 r_i} sigma_i^2)
  Codebook,      // Lloyd-Max codebooks scaled by sigma_i
};

/// N quantizers, each acting on an m-vector as m scalar quantizers that
/// share the rate r_i. Input variances are stored per scalar component
/// (m*N entries, quantizer-major).
class QuantizerBank {
 public:
  static QuantizerBank exact(std::size_t count, std::size_t block_dim);
  static QuantizerBank modeled(std::vector<double> rates, std::vector<double> input_variances,
                               std::size_t block_dim, double noise_constant);
  /// Codebooks get 2^round(r_i) levels (at least one). The noise constant
  /// is the one measured on the codebook at the average rate.
  static QuantizerBank realized(std::vector<double> rates, std::vector<double> input_variances,
                                std::size_t block_dim);

  QuantizerMode mode() const { return mode_; }
  std::size_t count() const { return rates_.size(); }
  std::size_t block_dim() const { return block_dim_; }
  std::size_t scalar_count() const { return input_variances_.size(); }
  const std::vector<double>& rates() const { return rates_; }
  const std::vector<double>& input_variances() const { return input_variances_; }
  double noise_constant() const { return noise_constant_; }
  double average_rate() const;
  /// Mean of log2(levels) actually used by the codebooks.
  double realized_average_rate() const;
  const ScalarCodebook& codebook(std::size_t quantizer_index) const;

  /// Modeled noise variance of scalar component `scalar_index`.
  double noise_variance(std::size_t scalar_index) const;

  struct Output {
    std::int64_t index;  // codeword index, -1 when no codebook is in use
    double reconstruction;
  };
  /// Quantizes component `scalar_index` (quantizer scalar_index / m).
  Output apply(std::size_t scalar_index, double value, Rng& rng) const;

 private:
  QuantizerMode mode_ = QuantizerMode::Exact;
  std::vector<double> rates_;
  std::vector<double> input_variances_;
  std::size_t block_dim_ = 1;
  double noise_constant_ = 0.0;
  std::vector<ScalarCodebook> codebooks_;
};

/// Diagonal K_q with entry k = c 2^{-2 r_{k/m}} sigma_k^2.
CovarianceMatrix modeled_noise_covariance(const QuantizerBank& bank);

struct QuantizedValue {
  std::int64_t index;
  double reconstruction;
};

/// Nearest-codeword quantization of `value` by quantizer `quantizer_index`
/// (component `component`). Requires a Codebook-mode bank.
QuantizedValue quantize(double value, std::size_t quantizer_index, const QuantizerBank& bank,
                        std::size_t component = 0);

}  // namespace rctc
