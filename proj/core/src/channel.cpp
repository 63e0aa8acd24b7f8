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

#include "rctc/channel.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>

#include "rctc/error.hpp"

namespace rctc {

void ChannelModel::validate() const {
  if (!(lambda > 0.0) || std::isnan(lambda)) throw DomainError("channel: lambda must be positive");
  if (!(deadline > 0.0) || !std::isfinite(deadline)) throw DomainError("channel: deadline must be positive");
  if (!(sample_period > 0.0) || !std::isfinite(sample_period)) {
    throw DomainError("channel: sample period must be positive");
  }
  if (frame_length < 1) throw DomainError("channel: frame length must be positive");
}

double ChannelModel::violation_probability() const { return std::exp(-lambda * deadline); }

ChannelModel ChannelModel::from_violation_probability(double p, double deadline, double sample_period,
                                                      int frame_length) {
  if (!(p > 0.0 && p < 1.0)) throw DomainError("channel: violation probability must lie in (0, 1)");
  ChannelModel m{-std::log(p) / deadline, deadline, sample_period, frame_length};
  m.validate();
  return m;
}

AvailabilityMatrix::AvailabilityMatrix(int dim, bool fill)
    : dim_(dim), bits_(static_cast<std::size_t>(dim) * static_cast<std::size_t>(dim + 1) / 2, fill ? 1 : 0) {
  if (dim < 1) throw DomainError("AvailabilityMatrix: dimension must be positive");
}

void AvailabilityMatrix::set(int i, int j, bool value) {
  if (i < 0 || i >= dim_ || j < 0 || j >= dim_) throw DomainError("AvailabilityMatrix: index out of range");
  if (j > i) {
    if (value) throw DomainError("AvailabilityMatrix: strict upper triangle is fixed at zero");
    return;
  }
  bits_[index(i, j)] = value ? 1 : 0;
}

bool AvailabilityMatrix::full() const {
  return std::all_of(bits_.begin(), bits_.end(), [](std::uint8_t b) { return b != 0; });
}

bool AvailabilityMatrix::monotone() const {
  for (int j = 0; j < dim_; ++j) {
    for (int i = j + 1; i < dim_; ++i) {
      if ((*this)(i - 1, j) && !(*this)(i, j)) return false;
    }
  }
  return true;
}

Matrix AvailabilityMatrix::expanded(int block_dim) const {
  const int n = dim_ * block_dim;
  Matrix out = Matrix::Zero(n, n);
  for (int i = 0; i < dim_; ++i) {
    for (int j = 0; j <= i; ++j) {
      if (!(*this)(i, j)) continue;
      for (int k = 0; k < block_dim; ++k) out(i * block_dim + k, j * block_dim + k) = 1.0;
    }
  }
  return out;
}

const char* to_string(DelayCorrelation mode) {
  return mode == DelayCorrelation::MonteCarlo ? "montecarlo" : "independent";
}

DelayCorrelation delay_correlation_from_string(const std::string& text) {
  if (text == "montecarlo") return DelayCorrelation::MonteCarlo;
  if (text == "independent") return DelayCorrelation::IndependentApprox;
  throw DomainError("unknown delay correlation mode '" + text + "'");
}

AvailabilityMatrix availability_from_delays(const ChannelModel& model, std::span<const double> delays) {
  model.validate();
  if (delays.size() != static_cast<std::size_t>(model.frame_length)) {
    throw DomainError("availability_from_delays: need one delay per frame element");
  }
  AvailabilityMatrix b(model.frame_length);
  for (int i = 0; i < model.frame_length; ++i) {
    for (int j = 0; j <= i; ++j) {
      b.set(i, j, delays[static_cast<std::size_t>(j)] <= model.deadline + (i - j) * model.sample_period);
    }
  }
  return b;
}

AvailabilityMatrix sample_availability(const ChannelModel& model, DelayCorrelation mode, Rng& rng) {
  const int n = model.frame_length;
  if (mode == DelayCorrelation::MonteCarlo) {
    std::exponential_distribution<double> delay(model.lambda);
    std::vector<double> delays(static_cast<std::size_t>(n));
    for (double& d : delays) d = delay(rng);
    return availability_from_delays(model, delays);
  }
  model.validate();
  std::uniform_real_distribution<double> uniform(0.0, 1.0);
  AvailabilityMatrix b(n);
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j <= i; ++j) {
      const double loss = std::exp(-model.lambda * (model.deadline + (i - j) * model.sample_period));
      b.set(i, j, uniform(rng) >= loss);
    }
  }
  return b;
}

AvailabilityMatrix sample_availability(const ChannelModel& model, std::uint64_t seed) {
  Rng rng(seed);
  return sample_availability(model, DelayCorrelation::MonteCarlo, rng);
}

Matrix loss_probabilities(const ChannelModel& model) {
  model.validate();
  const int n = model.frame_length;
  Matrix out = Matrix::Zero(n, n);
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j <= i; ++j) out(i, j) = std::exp(-model.lambda * (model.deadline + (i - j) * model.sample_period));
  }
  return out;
}

Matrix AvailabilityStats::empirical_marginals() const {
  Matrix out = Matrix::Zero(marginals.rows(), marginals.cols());
  for (std::size_t s = 0; s < realizations.size(); ++s) {
    const auto& b = realizations[s];
    for (int i = 0; i < b.dim(); ++i) {
      for (int j = 0; j <= i; ++j) {
        if (b(i, j)) out(i, j) += weights[s];
      }
    }
  }
  return out;
}

namespace {

Matrix closed_form_marginals(const ChannelModel& model) {
  Matrix out = loss_probabilities(model);
  for (int i = 0; i < model.frame_length; ++i) {
    for (int j = 0; j <= i; ++j) out(i, j) = 1.0 - out(i, j);
  }
  return out;
}

}  // namespace

AvailabilityStats availability_stats(const ChannelModel& model, std::size_t sample_count, std::uint64_t seed,
                                     DelayCorrelation mode) {
  model.validate();
  if (sample_count == 0) throw DomainError("availability_stats: sample_count must be at least 1");
  AvailabilityStats stats;
  stats.mode = mode;
  stats.marginals = closed_form_marginals(model);
  stats.realizations.reserve(sample_count);
  Rng rng(seed);
  for (std::size_t s = 0; s < sample_count; ++s) stats.realizations.push_back(sample_availability(model, mode, rng));
  stats.weights.assign(sample_count, 1.0 / static_cast<double>(sample_count));
  return stats;
}

AvailabilityStats availability_stats_from(const ChannelModel& model, std::vector<AvailabilityMatrix> realizations,
                                          std::vector<double> weights, DelayCorrelation mode) {
  model.validate();
  if (realizations.empty() || realizations.size() != weights.size()) {
    throw DomainError("availability_stats_from: need one weight per realization");
  }
  double total = 0.0;
  for (std::size_t s = 0; s < realizations.size(); ++s) {
    if (realizations[s].dim() != model.frame_length) throw DomainError("availability_stats_from: dimension mismatch");
    if (!(weights[s] >= 0.0)) throw DomainError("availability_stats_from: negative weight");
    total += weights[s];
  }
  if (!(total > 0.0)) throw DomainError("availability_stats_from: weights sum to zero");
  for (double& w : weights) w /= total;
  AvailabilityStats stats;
  stats.mode = mode;
  stats.marginals = closed_form_marginals(model);
  stats.realizations = std::move(realizations);
  stats.weights = std::move(weights);
  return stats;
}

AvailabilityMoments::AvailabilityMoments(const AvailabilityStats& stats) : dim_(stats.dim()) {
  mean_ = Matrix::Zero(dim_, dim_);
  row_products_.assign(static_cast<std::size_t>(dim_), Matrix::Zero(dim_, dim_));
  for (std::size_t s = 0; s < stats.realizations.size(); ++s) {
    const auto& b = stats.realizations[s];
    const double w = stats.weights[s];
    for (int t = 0; t < dim_; ++t) {
      Matrix& rp = row_products_[static_cast<std::size_t>(t)];
      for (int i = 0; i <= t; ++i) {
        if (!b(t, i)) continue;
        mean_(t, i) += w;
        for (int j = 0; j <= t; ++j) {
          if (b(t, j)) rp(i, j) += w;
        }
      }
    }
  }
}

AvailabilityMoments AvailabilityMoments::exact(const ChannelModel& model) {
  AvailabilityMoments m;
  m.dim_ = model.frame_length;
  m.mean_ = closed_form_marginals(model);
  m.row_products_.assign(static_cast<std::size_t>(m.dim_), Matrix::Zero(m.dim_, m.dim_));
  for (int t = 0; t < m.dim_; ++t) {
    Matrix& rp = m.row_products_[static_cast<std::size_t>(t)];
    for (int i = 0; i <= t; ++i) {
      for (int j = 0; j <= t; ++j) rp(i, j) = i == j ? m.mean_(t, i) : m.mean_(t, i) * m.mean_(t, j);
    }
  }
  return m;
}

}  // namespace rctc
