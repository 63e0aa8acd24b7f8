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

#include "rctc/quantizer.hpp"

#include <algorithm>
#include <cmath>
#include <istream>
#include <limits>
#include <numeric>
#include <ostream>
#include <string>

#include "rctc/error.hpp"
#include "rctc/format.hpp"

namespace rctc {
namespace {

constexpr double kInvSqrt2Pi = 0.39894228040143267794;

double pdf(double x) { return std::isinf(x) ? 0.0 : kInvSqrt2Pi * std::exp(-0.5 * x * x); }

// P(a < X <= b) for X ~ N(0,1), accurate in both tails.
double mass(double a, double b) {
  if (a >= 0.0) return 0.5 * (std::erfc(a / std::sqrt(2.0)) - std::erfc(b / std::sqrt(2.0)));
  if (b <= 0.0) return 0.5 * (std::erfc(-b / std::sqrt(2.0)) - std::erfc(-a / std::sqrt(2.0)));
  return 1.0 - 0.5 * std::erfc(-a / std::sqrt(2.0)) - 0.5 * std::erfc(b / std::sqrt(2.0));
}

double x_pdf(double x) { return std::isinf(x) ? 0.0 : x * pdf(x); }

double mean_of(std::span<const double> v) {
  return std::accumulate(v.begin(), v.end(), 0.0) / static_cast<double>(v.size());
}

std::size_t levels_for_rate(double rate) {
  const double bits = std::clamp(std::round(rate), 0.0, 16.0);
  return std::size_t{1} << static_cast<unsigned>(bits);
}

}  // namespace

RateAllocation allocate_rates(std::span<const double> effective_variances, double average_rate) {
  if (effective_variances.empty()) throw DomainError("allocate_rates: no quantizers");
  if (!std::isfinite(average_rate)) throw DomainError("allocate_rates: non-finite average rate");
  double log_sum = 0.0;
  for (double v : effective_variances) {
    if (!(v > 0.0) || !std::isfinite(v)) throw DomainError("allocate_rates: variances must be positive");
    log_sum += std::log2(v);
  }
  const double log_gm = log_sum / static_cast<double>(effective_variances.size());
  RateAllocation out;
  out.average = average_rate;
  out.effective_variances.assign(effective_variances.begin(), effective_variances.end());
  out.rates.reserve(effective_variances.size());
  for (double v : effective_variances) out.rates.push_back(average_rate + 0.5 * (std::log2(v) - log_gm));
  return out;
}

RateAllocation clamp_rates(const RateAllocation& allocation, double min_rate) {
  if (allocation.rates.empty()) throw DomainError("clamp_rates: empty allocation");
  if (!(min_rate >= 0.0)) throw DomainError("clamp_rates: min_rate must be non-negative");
  if (allocation.average < min_rate) {
    throw InfeasibleError("clamp_rates: average rate is below the rate floor");
  }
  RateAllocation out = allocation;
  double deficit = 0.0;
  double excess = 0.0;
  for (double r : out.rates) {
    if (r < min_rate) deficit += min_rate - r;
    else excess += r - min_rate;
  }
  if (deficit == 0.0) return out;
  // excess >= deficit because the mean is at least min_rate, so one pass
  // leaves every formerly unclamped rate at or above the floor.
  const double keep = excess > 0.0 ? 1.0 - deficit / excess : 0.0;
  for (double& r : out.rates) {
    r = r < min_rate ? min_rate : min_rate + (r - min_rate) * std::max(keep, 0.0);
  }
  return out;
}

std::size_t ScalarCodebook::nearest(double value) const {
  if (std::isnan(value)) throw DomainError("quantize: NaN input");
  const auto it = std::lower_bound(boundaries.begin(), boundaries.end(), value);
  return std::min(static_cast<std::size_t>(it - boundaries.begin()), levels.size() - 1);
}

ScalarCodebook lloyd_max_gaussian(std::size_t levels) {
  if (levels == 0) throw DomainError("lloyd_max_gaussian: need at least one level");
  ScalarCodebook cb;
  cb.levels.resize(levels);
  cb.boundaries.resize(levels);
  const auto n = static_cast<double>(levels);
  // Start from a uniform grid over +-3 sigma-ish, widened with the size.
  const double span = 2.0 + std::log2(n);
  for (std::size_t k = 0; k < levels; ++k) {
    cb.levels[k] = levels == 1 ? 0.0 : -span + 2.0 * span * static_cast<double>(k) / (n - 1.0);
  }
  const double inf = std::numeric_limits<double>::infinity();
  for (int iter = 0; iter < 500000; ++iter) {
    for (std::size_t k = 0; k + 1 < levels; ++k) cb.boundaries[k] = 0.5 * (cb.levels[k] + cb.levels[k + 1]);
    cb.boundaries[levels - 1] = inf;
    double moved = 0.0;
    for (std::size_t k = 0; k < levels; ++k) {
      const double lo = k == 0 ? -inf : cb.boundaries[k - 1];
      const double hi = cb.boundaries[k];
      const double p = mass(lo, hi);
      const double centroid = p > 0.0 ? (pdf(lo) - pdf(hi)) / p : 0.5 * (lo + hi);
      moved = std::max(moved, std::abs(centroid - cb.levels[k]));
      cb.levels[k] = centroid;
    }
    if (moved < 1e-13) break;
  }
  for (std::size_t k = 0; k + 1 < levels; ++k) cb.boundaries[k] = 0.5 * (cb.levels[k] + cb.levels[k + 1]);
  cb.boundaries[levels - 1] = inf;
  return cb;
}

double gaussian_distortion(const ScalarCodebook& codebook) {
  const double inf = std::numeric_limits<double>::infinity();
  double total = 0.0;
  for (std::size_t k = 0; k < codebook.size(); ++k) {
    const double lo = k == 0 ? -inf : codebook.boundaries[k - 1];
    const double hi = codebook.boundaries[k];
    const double y = codebook.levels[k];
    const double p = mass(lo, hi);
    const double first = pdf(lo) - pdf(hi);              // int x phi
    const double second = p - (x_pdf(hi) - x_pdf(lo));   // int x^2 phi
    total += second - 2.0 * y * first + y * y * p;
  }
  return total;
}

void write_codebook(std::ostream& os, const ScalarCodebook& codebook) {
  os << "# level upper_boundary\n";
  for (std::size_t k = 0; k < codebook.size(); ++k) {
    os << format_double(codebook.levels[k]) << ' ' << format_double(codebook.boundaries[k]) << '\n';
  }
}

ScalarCodebook read_codebook(std::istream& is) {
  ScalarCodebook cb;
  std::string line;
  while (std::getline(is, line)) {
    if (line.empty() || line.front() == '#') continue;
    const auto space = line.find(' ');
    if (space == std::string::npos) throw DomainError("read_codebook: malformed line '" + line + "'");
    cb.levels.push_back(parse_double(std::string_view(line).substr(0, space)));
    cb.boundaries.push_back(parse_double(std::string_view(line).substr(space + 1)));
  }
  if (cb.levels.empty()) throw DomainError("read_codebook: no levels");
  if (!std::isinf(cb.boundaries.back()) || cb.boundaries.back() < 0) {
    throw DomainError("read_codebook: last boundary must be +inf");
  }
  for (std::size_t k = 0; k < cb.levels.size(); ++k) {
    if (cb.levels[k] > cb.boundaries[k]) throw DomainError("read_codebook: level above its upper boundary");
    if (k > 0 && !(cb.levels[k] > cb.levels[k - 1] && cb.levels[k] > cb.boundaries[k - 1])) {
      throw DomainError("read_codebook: levels out of order");
    }
  }
  return cb;
}

QuantizerBank QuantizerBank::exact(std::size_t count, std::size_t block_dim) {
  if (count == 0 || block_dim == 0) throw DomainError("QuantizerBank: empty bank");
  QuantizerBank bank;
  bank.mode_ = QuantizerMode::Exact;
  bank.rates_.assign(count, std::numeric_limits<double>::infinity());
  bank.input_variances_.assign(count * block_dim, 1.0);
  bank.block_dim_ = block_dim;
  return bank;
}

QuantizerBank QuantizerBank::modeled(std::vector<double> rates, std::vector<double> input_variances,
                                     std::size_t block_dim, double noise_constant) {
  if (rates.empty() || block_dim == 0) throw DomainError("QuantizerBank: empty bank");
  if (input_variances.size() != rates.size() * block_dim) {
    throw DomainError("QuantizerBank: need one input variance per scalar component");
  }
  for (double v : input_variances) {
    if (!(v > 0.0) || !std::isfinite(v)) throw DomainError("QuantizerBank: input variances must be positive");
  }
  for (double r : rates) {
    if (std::isnan(r)) throw DomainError("QuantizerBank: NaN rate");
  }
  if (!(noise_constant > 0.0)) throw DomainError("QuantizerBank: noise constant must be positive");
  QuantizerBank bank;
  bank.mode_ = QuantizerMode::ModeledNoise;
  bank.rates_ = std::move(rates);
  bank.input_variances_ = std::move(input_variances);
  bank.block_dim_ = block_dim;
  bank.noise_constant_ = noise_constant;
  return bank;
}

QuantizerBank QuantizerBank::realized(std::vector<double> rates, std::vector<double> input_variances,
                                      std::size_t block_dim) {
  QuantizerBank bank = modeled(std::move(rates), std::move(input_variances), block_dim, 1.0);
  bank.mode_ = QuantizerMode::Codebook;
  bank.codebooks_.reserve(bank.rates_.size());
  for (double r : bank.rates_) bank.codebooks_.push_back(lloyd_max_gaussian(levels_for_rate(r)));
  const std::size_t ref_levels = levels_for_rate(bank.average_rate());
  const double bits = std::log2(static_cast<double>(ref_levels));
  bank.noise_constant_ = gaussian_distortion(lloyd_max_gaussian(ref_levels)) * std::exp2(2.0 * bits);
  return bank;
}

double QuantizerBank::average_rate() const { return mean_of(rates_); }

double QuantizerBank::realized_average_rate() const {
  if (mode_ != QuantizerMode::Codebook) return average_rate();
  double total = 0.0;
  for (const auto& cb : codebooks_) total += std::log2(static_cast<double>(cb.size()));
  return total / static_cast<double>(codebooks_.size());
}

const ScalarCodebook& QuantizerBank::codebook(std::size_t quantizer_index) const {
  if (mode_ != QuantizerMode::Codebook) throw DomainError("QuantizerBank: no codebooks in this mode");
  if (quantizer_index >= codebooks_.size()) throw DomainError("QuantizerBank: quantizer index out of range");
  return codebooks_[quantizer_index];
}

double QuantizerBank::noise_variance(std::size_t scalar_index) const {
  if (scalar_index >= input_variances_.size()) throw DomainError("QuantizerBank: component index out of range");
  if (mode_ == QuantizerMode::Exact) return 0.0;
  const double r = rates_[scalar_index / block_dim_];
  return noise_constant_ * std::exp2(-2.0 * r) * input_variances_[scalar_index];
}

QuantizerBank::Output QuantizerBank::apply(std::size_t scalar_index, double value, Rng& rng) const {
  if (scalar_index >= input_variances_.size()) throw DomainError("QuantizerBank: component index out of range");
  switch (mode_) {
    case QuantizerMode::Exact:
      return {-1, value};
    case QuantizerMode::ModeledNoise: {
      std::normal_distribution<double> normal(0.0, std::sqrt(noise_variance(scalar_index)));
      return {-1, value + normal(rng)};
    }
    case QuantizerMode::Codebook: {
      const auto q = quantize(value, scalar_index / block_dim_, *this, scalar_index % block_dim_);
      return {q.index, q.reconstruction};
    }
  }
  return {-1, value};
}

CovarianceMatrix modeled_noise_covariance(const QuantizerBank& bank) {
  const auto n = static_cast<Eigen::Index>(bank.scalar_count());
  Matrix k = Matrix::Zero(n, n);
  for (Eigen::Index i = 0; i < n; ++i) k(i, i) = bank.noise_variance(static_cast<std::size_t>(i));
  return CovarianceMatrix(std::move(k));
}

QuantizedValue quantize(double value, std::size_t quantizer_index, const QuantizerBank& bank,
                        std::size_t component) {
  const ScalarCodebook& cb = bank.codebook(quantizer_index);
  if (component >= bank.block_dim()) throw DomainError("quantize: component out of range");
  const double sigma = std::sqrt(bank.input_variances()[quantizer_index * bank.block_dim() + component]);
  const std::size_t k = cb.nearest(value / sigma);
  return {static_cast<std::int64_t>(k), sigma * cb.levels[k]};
}

}  // namespace rctc
