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
#include <optional>
#include <string>
#include <vector>

#include "rctc/channel.hpp"
#include "rctc/config.hpp"
#include "rctc/designer.hpp"
#include "rctc/lqg.hpp"
#include "rctc/quantizer.hpp"

namespace rctc {

enum class ExperimentKind { SourceCoding, ClosedLoopLqg };

/// no_coding: identity transform at equal rates. plt: prediction-based
/// transform (A_hat = A). rtc_tc / rc_tc: channel-optimized Toeplitz / full
/// transform pairs.
enum class Scheme { NoCoding, Plt, RtcTc, RcTc };

const char* to_string(Scheme scheme);
Scheme scheme_from_string(const std::string& text);

/// Which frame covariance the analytic LQG cost is evaluated with.
enum class AnalyticCovariance {
  DesignModel,  // the AR(1) design model
  Pilot,        // empirical frame covariance of a pilot closed-loop run per row
};

/// Plant and weights from keys F, G, C, K_w, K_v, R, S. Missing keys fall
/// back to the scalar plant x' = 1.49 x + 0.05 u + w with K_w = 0.01,
/// K_v = 0.001, R = 1, S = 0.01.
PlantModel plant_from_config(const KeyValueConfig& cfg);
LqgWeights weights_from_config(const KeyValueConfig& cfg);

struct ExperimentConfig {
  ExperimentKind kind = ExperimentKind::SourceCoding;

  // Source experiment.
  double source_rho = 0.9;
  double source_variance = 1.0;

  // Closed-loop experiment.
  PlantModel plant;
  LqgWeights weights;
  double design_coefficient = 0.8677;
  std::size_t pilot_horizon = 200000;
  AnalyticCovariance analytic_covariance = AnalyticCovariance::Pilot;
  std::size_t horizon = 1000000;
  std::size_t burn_in = 1000;

  int frame_length = 6;
  int block_dim = 1;
  double rate = 5.0;
  double deadline = 0.05;
  double sample_period = 0.0125;
  std::vector<double> p_grid{0.05, 0.1, 0.2, 0.3};
  std::vector<Scheme> schemes{Scheme::NoCoding, Scheme::Plt, Scheme::RtcTc, Scheme::RcTc};
  DelayCorrelation correlation = DelayCorrelation::MonteCarlo;
  QuantizerMode quantizer = QuantizerMode::ModeledNoise;
  double noise_constant = 1.0;
  double min_rate = 0.0;
  std::uint64_t seed = 1;
  std::size_t design_samples = 2000;
  std::size_t frames = 100000;
  std::size_t batch_count = 200;
  SearchConfig search;
  std::string output;

  /// Reads and validates every recognized key; unknown keys are an error.
  static ExperimentConfig from_config(const KeyValueConfig& cfg);
  /// Throws ConfigError naming the offending field.
  void validate() const;

  ChannelModel channel_for(double p) const;
};

struct ResultRow {
  Scheme scheme = Scheme::NoCoding;
  double p = 0.0;
  double lambda = 0.0;
  double analytic = 0.0;
  double simulated = 0.0;
  double standard_error = 0.0;
  /// Predicted value on the frozen design set.
  double design_predicted = 0.0;
  std::uint64_t seed = 0;
  std::string mode;
  double noise_constant = 0.0;
  int frame_length = 0;
  double rate = 0.0;
  std::size_t design_samples = 0;
  std::size_t sim_samples = 0;
  std::string status = "ok";
};

/// Design (or construct) one scheme for one channel. Shared by the
/// experiments and the `design` subcommand.
struct SchemeDesign {
  DesignResult design;
  CovarianceMatrix k_x;
  Matrix weight;
};

SchemeDesign design_scheme(const ExperimentConfig& config, Scheme scheme, double p,
                           const std::optional<CausalTransform>& warm_start = std::nullopt);

/// Quantizer bank for a design in the configured quantizer mode.
QuantizerBank bank_for(const ExperimentConfig& config, const DesignResult& design);

std::vector<ResultRow> run_source_experiment(const ExperimentConfig& config);
std::vector<ResultRow> run_lqg_experiment(const ExperimentConfig& config);
std::vector<ResultRow> run_experiment(const ExperimentConfig& config);

/// Versioned CSV: a `# rctc-results v1` line, the header
/// scheme,p,lambda,analytic,simulated,stderr,seed,mode,c,N,r,design_predicted,design_samples,sim_samples,status
/// and one line per row, sorted by (p, scheme).
void write_results_csv(std::ostream& os, std::vector<ResultRow> rows);

}  // namespace rctc
