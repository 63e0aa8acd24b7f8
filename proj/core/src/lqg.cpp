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

#include "rctc/lqg.hpp"

#include <Eigen/Eigenvalues>
#include <algorithm>
#include <cmath>
#include <ostream>
#include <sstream>

#include "rctc/error.hpp"
#include "rctc/format.hpp"
#include "rctc/random.hpp"

namespace rctc {
namespace {

bool is_psd(const Matrix& m) {
  if (!is_symmetric(m, 1e-12)) return false;
  const Vector eig = Eigen::SelfAdjointEigenSolver<Matrix>(m, Eigen::EigenvaluesOnly).eigenvalues();
  return eig.minCoeff() >= -1e-10 * std::max(eig.maxCoeff(), 0.0);
}

bool is_pd(const Matrix& m) { return is_symmetric(m, 1e-12) && m.llt().info() == Eigen::Success; }

Matrix riccati_rhs(const Matrix& p, const PlantModel& plant, const LqgWeights& weights) {
  const Matrix& f = plant.f;
  const Matrix& g = plant.g;
  const Matrix gp = g.transpose() * p;
  const Matrix inner = (gp * g + weights.s).ldlt().solve(gp);
  const Matrix out = f.transpose() * (p - gp.transpose() * inner) * f + weights.r;
  return 0.5 * (out + out.transpose());
}

// Square root of a PSD covariance (V sqrt(D) with clipped eigenvalues).
Matrix covariance_root(const Matrix& k) {
  Eigen::SelfAdjointEigenSolver<Matrix> es(k);
  return es.eigenvectors() * es.eigenvalues().cwiseMax(0.0).cwiseSqrt().asDiagonal();
}

void check_square(const Matrix& m, Eigen::Index n, const char* what) {
  if (m.rows() != n || m.cols() != n) throw DomainError(std::string(what) + " has the wrong dimensions");
}

std::string join(const Vector& v) {
  std::string out;
  for (Eigen::Index i = 0; i < v.size(); ++i) {
    if (i) out += ';';
    out += format_double(v(i));
  }
  return out;
}

}  // namespace

void PlantModel::validate() const {
  const Eigen::Index d = f.rows();
  if (d == 0 || f.cols() != d) throw DomainError("plant: F must be square and non-empty");
  if (g.rows() != d || g.cols() == 0) throw DomainError("plant: G must have as many rows as F");
  if (c.size() != 0 && c.cols() != d) throw DomainError("plant: C must have as many columns as F");
  check_square(k_w, d, "plant: K_w");
  if (k_v.size() != 0) check_square(k_v, c.rows(), "plant: K_v");
  if (!f.allFinite() || !g.allFinite() || !k_w.allFinite()) throw DomainError("plant: non-finite entries");
  if (!is_psd(k_w)) throw DomainError("plant: K_w must be symmetric positive semi-definite");
  if (k_v.size() != 0 && !is_psd(k_v)) throw DomainError("plant: K_v must be symmetric positive semi-definite");
  if (!is_controllable(f, g)) throw DomainError("plant: (F, G) is not controllable");
}

void LqgWeights::validate(const PlantModel& plant) const {
  check_square(r, plant.state_dim(), "weights: R");
  check_square(s, plant.input_dim(), "weights: S");
  if (!is_pd(r)) throw DomainError("weights: R must be symmetric positive definite");
  if (!is_pd(s)) throw DomainError("weights: S must be symmetric positive definite");
}

Matrix solve_riccati(const PlantModel& plant, const LqgWeights& weights, const RiccatiOptions& options) {
  plant.validate();
  weights.validate(plant);
  Matrix p = weights.r;
  double residual = 0.0;
  for (std::size_t it = 0; it < options.max_iterations; ++it) {
    Matrix next = riccati_rhs(p, plant, weights);
    if (!next.allFinite()) throw ConvergenceError("solve_riccati: iteration diverged", residual);
    residual = (next - p).norm();
    p = std::move(next);
    if (residual <= options.relative_tolerance * p.norm()) return p;
  }
  throw ConvergenceError("solve_riccati: no convergence within " + std::to_string(options.max_iterations) +
                             " iterations (last residual " + format_double(residual) + ")",
                         residual);
}

double riccati_residual(const Matrix& p, const PlantModel& plant, const LqgWeights& weights) {
  return (p - riccati_rhs(p, plant, weights)).norm();
}

Matrix ce_gain(const Matrix& p, const PlantModel& plant, const LqgWeights& weights) {
  check_square(p, plant.state_dim(), "ce_gain: P");
  const Matrix gp = plant.g.transpose() * p;
  const Matrix lhs = gp * plant.g + weights.s;
  Eigen::LDLT<Matrix> ldlt(lhs);
  if (ldlt.info() != Eigen::Success || !ldlt.isPositive()) {
    throw FactorizationError("ce_gain: G'PG + S is not positive definite");
  }
  return -ldlt.solve(gp * plant.f);
}

Matrix weight_req(const Matrix& p, const PlantModel& plant, const LqgWeights& weights) {
  check_square(p, plant.state_dim(), "weight_req: P");
  const Matrix out = plant.f.transpose() * p * plant.f - p + weights.r;
  return 0.5 * (out + out.transpose());
}

ControllerSolution solve_controller(const PlantModel& plant, const LqgWeights& weights,
                                    const RiccatiOptions& options) {
  ControllerSolution sol;
  sol.p = solve_riccati(plant, weights, options);
  sol.l = ce_gain(sol.p, plant, weights);
  sol.r_eq = weight_req(sol.p, plant, weights);
  if (spectral_radius(plant.f + plant.g * sol.l) >= 1.0) {
    throw ConvergenceError("solve_controller: Riccati solution is not stabilizing", 0.0);
  }
  return sol;
}

Matrix expected_weighted_gram(const CausalTransform& transform, const AvailabilityMoments& moments,
                              const Matrix& weight) {
  const int n = transform.frame_length();
  const int m = transform.block_dim();
  const int dim = n * m;
  check_square(weight, dim, "weight");
  if (moments.dim() != n) throw DomainError("availability dimension mismatch");
  for (int r = 0; r < dim; ++r) {
    for (int c = 0; c < dim; ++c) {
      if (r / m != c / m && weight(r, c) != 0.0) throw DomainError("weight must be block diagonal");
    }
  }
  // H only has same-component entries, so (H'MH)_ab collects one term per
  // block row t >= max(t_a, t_b).
  const Matrix& ah = transform.decoder();
  Matrix out = Matrix::Zero(dim, dim);
  for (int a = 0; a < dim; ++a) {
    const int ta = a / m;
    const int ca = a % m;
    for (int b = 0; b < dim; ++b) {
      const int tb = b / m;
      const int cb = b % m;
      double acc = 0.0;
      for (int t = std::max(ta, tb); t < n; ++t) {
        const int row_a = t * m + ca;
        const int row_b = t * m + cb;
        acc += ah(row_a, a) * weight(row_a, row_b) * ah(row_b, b) * moments.row_product(t, ta, tb);
      }
      out(a, b) = acc;
    }
  }
  return out;
}

double am_wmse(const CausalTransform& transform, const AvailabilityMoments& moments, const Matrix& k_x,
               const Matrix& k_q, const Matrix& weight) {
  const int n = transform.frame_length();
  const int m = transform.block_dim();
  const int dim = n * m;
  check_square(k_x, dim, "am_wmse: K_x");
  check_square(k_q, dim, "am_wmse: K_q");
  const Matrix second = expected_weighted_gram(transform, moments, weight);

  const Matrix& ah = transform.decoder();
  const Matrix& g = transform.encoder_inverse();
  Matrix mean_h = Matrix::Zero(dim, dim);
  for (int t = 0; t < n; ++t) {
    for (int i = 0; i <= t; ++i) {
      const double p = moments.mean(t, i);
      for (int k = 0; k < m; ++k) mean_h(t * m + k, i * m + k) = ah(t * m + k, i * m + k) * p;
    }
  }
  // tr(E[(I-HG)'M(I-HG)]K_x) = tr(M K_x) - 2 tr(M E[H] G K_x) + tr(E[H'MH] G K_x G').
  const double signal = weight.cwiseProduct(k_x).sum() - 2.0 * (weight * mean_h * g * k_x).trace();
  const double shaped = second.cwiseProduct(g * (k_x + k_q) * g.transpose()).sum();
  return (signal + shaped) / static_cast<double>(dim);
}

double am_wmse(const CausalTransform& transform, const AvailabilityStats& stats, const Matrix& k_x,
               const Matrix& k_q, const Matrix& weight) {
  return am_wmse(transform, AvailabilityMoments(stats), k_x, k_q, weight);
}

double analytic_lqg_cost(const ControllerSolution& solution, const PlantModel& plant,
                         const AvailabilityMoments& moments, const CausalTransform& transform, const Matrix& k_x,
                         const Matrix& k_q) {
  if (transform.block_dim() != plant.state_dim()) {
    throw DomainError("analytic_lqg_cost: block dim must equal the state dimension");
  }
  const Matrix weight = solution.weight_block(transform.frame_length());
  const double base = (solution.p * plant.k_w).trace();
  return base + transform.block_dim() * am_wmse(transform, moments, k_x, k_q, weight);
}

double analytic_lqg_cost(const ControllerSolution& solution, const PlantModel& plant, const AvailabilityStats& stats,
                         const CausalTransform& transform, const Matrix& k_x, const Matrix& k_q) {
  return analytic_lqg_cost(solution, plant, AvailabilityMoments(stats), transform, k_x, k_q);
}

ClosedLoopResult simulate_closed_loop(const PlantModel& plant, const LqgWeights& weights,
                                      const ControllerSolution& solution, const CausalTransform& transform,
                                      const QuantizerBank& bank, const ChannelModel& channel,
                                      const ClosedLoopOptions& options, std::uint64_t seed) {
  plant.validate();
  const int d = plant.state_dim();
  const int n = transform.frame_length();
  const int m = transform.block_dim();
  if (m != d) throw DomainError("simulate_closed_loop: block dim must equal the state dimension");
  if (channel.frame_length != n) throw DomainError("simulate_closed_loop: channel frame length mismatch");
  if (options.horizon < static_cast<std::size_t>(n)) throw DomainError("simulate_closed_loop: horizon below one frame");
  if (bank.count() != static_cast<std::size_t>(n) || bank.block_dim() != static_cast<std::size_t>(m)) {
    throw DomainError("simulate_closed_loop: quantizer bank does not match the transform");
  }
  channel.validate();

  // Separate streams keep plant noise identical across schemes and channels.
  Rng plant_rng(derive_seed(seed, {1}));
  Rng channel_rng(derive_seed(seed, {2}));
  Rng quant_rng(derive_seed(seed, {3}));
  std::normal_distribution<double> normal(0.0, 1.0);
  const Matrix w_root = covariance_root(plant.k_w);

  const Matrix& a = transform.encoder();
  const Matrix& ah = transform.decoder();
  const Matrix& r_eq = solution.r_eq;

  ClosedLoopResult out;
  out.frame_covariance = Matrix::Zero(n * m, n * m);
  std::size_t frames_counted = 0;

  const std::size_t total = options.burn_in + options.horizon;
  const std::size_t batches = std::max<std::size_t>(1, std::min(options.batch_count, options.horizon));
  const std::size_t batch_len = options.horizon / batches;
  std::vector<double> batch_sums(batches, 0.0);

  Vector x = Vector::Zero(d);
  Vector xhat_prev = Vector::Zero(d);
  Vector codevalues = Vector::Zero(n * m);
  Vector frame_state = Vector::Zero(n * m);
  AvailabilityMatrix b(n, true);
  double cost_sum = 0.0;
  double decomposed_sum = 0.0;
  double weighted_sum = 0.0;
  bool frame_clean = true;

  for (std::size_t step = 0; step < total; ++step) {
    const int pos = static_cast<int>(step % static_cast<std::size_t>(n));
    if (pos == 0) {
      if (options.channel_enabled) b = sample_availability(channel, options.correlation, channel_rng);
      frame_clean = step >= options.burn_in;
    }
    frame_state.segment(pos * m, m) = x;

    Vector xhat(d);
    Vector dvec = Vector::Zero(m);
    if (!options.channel_enabled) {
      xhat = x;
      codevalues.segment(pos * m, m) = x;
    } else {
      for (int k = 0; k < m; ++k) {
        const int s = pos * m + k;
        double di = x(k);
        for (int j = 0; j < pos; ++j) di -= a(s, j * m + k) * codevalues(j * m + k);
        dvec(k) = di;
        codevalues(s) = bank.apply(static_cast<std::size_t>(s), di, quant_rng).reconstruction;
      }
      for (int k = 0; k < m; ++k) {
        const int s = pos * m + k;
        double acc = 0.0;
        for (int j = 0; j <= pos; ++j) {
          if (b(pos, j)) acc += ah(s, j * m + k) * codevalues(j * m + k);
        }
        xhat(k) = acc;
      }
      if (options.hold_last_estimate && !b(pos, pos)) xhat = xhat_prev;
    }
    xhat_prev = xhat;

    const Vector u = solution.l * xhat;
    const Vector e = x - xhat;
    const double cost = x.dot(weights.r * x) + u.dot(weights.s * u);

    if (step >= options.burn_in) {
      const std::size_t k = step - options.burn_in;
      cost_sum += cost;
      decomposed_sum += xhat.dot(weights.r * xhat) + u.dot(weights.s * u) + e.dot(weights.r * e);
      weighted_sum += e.dot(r_eq * e);
      const std::size_t bi = std::min(k / std::max<std::size_t>(batch_len, 1), batches - 1);
      batch_sums[bi] += cost;
      ++out.steps;
      if (options.record_trace) {
        TraceRecord rec;
        rec.step = k;
        rec.state = x;
        rec.quantizer_input = options.channel_enabled ? dvec : x;
        rec.codevalue = codevalues.segment(pos * m, m);
        for (int j = 0; j <= pos; ++j) rec.availability += b(pos, j) ? '1' : '0';
        rec.reconstruction = xhat;
        rec.control = u;
        rec.cost = cost;
        out.trace.push_back(std::move(rec));
      }
    }
    if (pos == n - 1 && frame_clean) {
      out.frame_covariance.noalias() += frame_state * frame_state.transpose();
      ++frames_counted;
    }

    Vector noise(d);
    for (int i = 0; i < d; ++i) noise(i) = normal(plant_rng);
    x = plant.f * x + plant.g * u + w_root * noise;
    if (!x.allFinite() || x.cwiseAbs().maxCoeff() > options.divergence_bound) {
      out.diverged = true;
      break;
    }
  }

  const double steps = static_cast<double>(std::max<std::size_t>(out.steps, 1));
  out.empirical_cost = cost_sum / steps;
  out.decomposed_cost = decomposed_sum / steps;
  out.weighted_error = weighted_sum / steps;
  if (frames_counted > 0) out.frame_covariance /= static_cast<double>(frames_counted);

  if (!out.diverged && batches > 1 && batch_len > 0) {
    // The last batch absorbs the remainder; weight means by their lengths.
    double mean = 0.0;
    std::vector<double> means(batches);
    for (std::size_t i = 0; i < batches; ++i) {
      const std::size_t len = i + 1 < batches ? batch_len : options.horizon - batch_len * (batches - 1);
      means[i] = batch_sums[i] / static_cast<double>(len);
      mean += means[i];
    }
    mean /= static_cast<double>(batches);
    double var = 0.0;
    for (double v : means) var += (v - mean) * (v - mean);
    var /= static_cast<double>(batches - 1);
    out.standard_error = std::sqrt(var / static_cast<double>(batches));
  }
  return out;
}

void write_trace_csv(std::ostream& os, const std::vector<TraceRecord>& trace) {
  os << "step,state,quantizer_input,codevalue,availability,reconstruction,control,cost\n";
  for (const auto& r : trace) {
    os << r.step << ',' << join(r.state) << ',' << join(r.quantizer_input) << ',' << join(r.codevalue) << ','
       << r.availability << ',' << join(r.reconstruction) << ',' << join(r.control) << ',' << format_double(r.cost)
       << '\n';
  }
}

}  // namespace rctc
