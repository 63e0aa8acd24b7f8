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
#include <string>
#include <vector>

#include "rctc/channel.hpp"
#include "rctc/codec.hpp"
#include "rctc/linalg.hpp"
#include "rctc/quantizer.hpp"

namespace rctc {

/// x_{t+1} = F x_t + G u_t + w_t,  y_t = C x_t + v_t.
struct PlantModel {
  Matrix f;
  Matrix g;
  Matrix c;
  Matrix k_w;
  Matrix k_v;

  int state_dim() const { return static_cast<int>(f.rows()); }
  int input_dim() const { return static_cast<int>(g.cols()); }
  /// Shapes, (F, G) controllable, noise covariances PSD. Throws DomainError.
  void validate() const;
};

/// Stage cost x'Rx + u'Su.
struct LqgWeights {
  Matrix r;
  Matrix s;

  /// Both positive definite with plant-compatible shapes.
  void validate(const PlantModel& plant) const;
};

struct RiccatiOptions {
  double relative_tolerance = 1e-12;
  std::size_t max_iterations = 1'000'000;
};

/// Stabilizing solution of P = F'(P - PG(G'PG + S)^{-1}G'P)F + R by
/// fixed-point iteration from P = R. Throws ConvergenceError.
Matrix solve_riccati(const PlantModel& plant, const LqgWeights& weights, const RiccatiOptions& options = {});

/// Frobenius norm of P minus the right-hand side of the Riccati equation.
double riccati_residual(const Matrix& p, const PlantModel& plant, const LqgWeights& weights);

/// L = -(G'PG + S)^{-1} G'PF.
Matrix ce_gain(const Matrix& p, const PlantModel& plant, const LqgWeights& weights);

/// R_eq = F'PF - P + R, the weight that estimation error carries in the
/// closed-loop cost.
Matrix weight_req(const Matrix& p, const PlantModel& plant, const LqgWeights& weights);

struct ControllerSolution {
  Matrix p;
  Matrix l;
  Matrix r_eq;

  /// N copies of R_eq on the diagonal.
  Matrix weight_block(int frame_length) const { return block_diagonal(r_eq, frame_length); }
};

/// Riccati + gain + R_eq, with the closed-loop stability check.
ControllerSolution solve_controller(const PlantModel& plant, const LqgWeights& weights,
                                    const RiccatiOptions& options = {});

/// E_B[H' M H] for H = A_hat o B, from the same-row moments of B. M must
/// be block diagonal with m x m blocks.
Matrix expected_weighted_gram(const CausalTransform& transform, const AvailabilityMoments& moments,
                              const Matrix& weight);

/// Arithmetic mean weighted MSE of the frame, 1/(mN) E||x - x_hat||_M^2,
/// under fine quantization (noise independent of the source):
///   1/(mN) [ tr(E[(I-He)'M(I-He)] K_x) + tr(E[He'M He] K_q) ],  He = (A_hat o B) A^{-1}.
/// M must be block diagonal with m x m blocks.
double am_wmse(const CausalTransform& transform, const AvailabilityMoments& moments, const Matrix& k_x,
               const Matrix& k_q, const Matrix& weight);
double am_wmse(const CausalTransform& transform, const AvailabilityStats& stats, const Matrix& k_x,
               const Matrix& k_q, const Matrix& weight);

/// Per-sample LQG cost with the coded channel in the loop:
///   tr(P K_w) + (1/N) [ tr(E[(I-He)'M(I-He)] K_x) + tr(E[He'M He] K_q) ]
/// with M = blockdiag(R_eq). Equals tr(P K_w) + m * am_wmse(..., M).
double analytic_lqg_cost(const ControllerSolution& solution, const PlantModel& plant,
                         const AvailabilityMoments& moments, const CausalTransform& transform, const Matrix& k_x,
                         const Matrix& k_q);
double analytic_lqg_cost(const ControllerSolution& solution, const PlantModel& plant, const AvailabilityStats& stats,
                         const CausalTransform& transform, const Matrix& k_x, const Matrix& k_q);

struct ClosedLoopOptions {
  std::size_t horizon = 100000;
  std::size_t burn_in = 1000;
  DelayCorrelation correlation = DelayCorrelation::MonteCarlo;
  /// false: the controller sees the true state (no coding, no channel).
  bool channel_enabled = true;
  /// Reuse the previous estimate when an element's own index is missing.
  bool hold_last_estimate = false;
  double divergence_bound = 1e8;
  std::size_t batch_count = 200;
  bool record_trace = false;
};

struct TraceRecord {
  std::size_t step = 0;
  Vector state;
  Vector quantizer_input;
  Vector codevalue;
  std::string availability;  // row of B for this element, j = 0..i
  Vector reconstruction;
  Vector control;
  double cost = 0.0;
};

struct ClosedLoopResult {
  /// Horizon average of x'Rx + u'Su.
  double empirical_cost = 0.0;
  /// Batch-means standard error of empirical_cost.
  double standard_error = 0.0;
  /// Horizon average of x_hat'R x_hat + u'Su + e'Re.
  double decomposed_cost = 0.0;
  /// Horizon average of e' R_eq e.
  double weighted_error = 0.0;
  bool diverged = false;
  std::size_t steps = 0;
  /// Empirical second moment of the state over complete frames (mN x mN).
  Matrix frame_covariance;
  std::vector<TraceRecord> trace;
};

/// Runs the plant under u_t = L x_hat_t where x_hat_t is element t mod N
/// of the decoded frame. The encoder sees the true state; every frame's
/// availability matrix is drawn from `channel`. Deterministic in `seed`.
ClosedLoopResult simulate_closed_loop(const PlantModel& plant, const LqgWeights& weights,
                                      const ControllerSolution& solution, const CausalTransform& transform,
                                      const QuantizerBank& bank, const ChannelModel& channel,
                                      const ClosedLoopOptions& options, std::uint64_t seed);

/// CSV with columns step,state,quantizer_input,codevalue,availability,
/// reconstruction,control,cost. Vector cells are ';'-joined.
void write_trace_csv(std::ostream& os, const std::vector<TraceRecord>& trace);

}  // namespace rctc
