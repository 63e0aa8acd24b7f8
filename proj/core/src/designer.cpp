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

#include "rctc/designer.hpp"

#include <Eigen/Eigenvalues>
#include <algorithm>
#include <cmath>
#include <istream>
#include <ostream>
#include <sstream>
#include <string>

#include "rctc/error.hpp"
#include "rctc/format.hpp"
#include "rctc/lqg.hpp"

namespace rctc {
namespace {

Matrix uniform_noise(const std::vector<double>& input_variances, double average_rate, double noise_constant) {
  const auto n = static_cast<Eigen::Index>(input_variances.size());
  Matrix k_q = Matrix::Zero(n, n);
  const double scale = noise_constant * std::exp2(-2.0 * average_rate);
  for (Eigen::Index i = 0; i < n; ++i) k_q(i, i) = scale * input_variances[static_cast<std::size_t>(i)];
  return k_q;
}

Matrix allocated_noise(const std::vector<double>& input_variances, const std::vector<double>& rates, int block_dim,
                       double noise_constant) {
  const auto n = static_cast<Eigen::Index>(input_variances.size());
  Matrix k_q = Matrix::Zero(n, n);
  for (Eigen::Index i = 0; i < n; ++i) {
    const double r = rates[static_cast<std::size_t>(i / block_dim)];
    k_q(i, i) = noise_constant * std::exp2(-2.0 * r) * input_variances[static_cast<std::size_t>(i)];
  }
  return k_q;
}

// Best Toeplitz approximation of an arbitrary causal transform: the lag
// coefficients of its last block row.
std::vector<double> toeplitz_from(const Matrix& a, int n, int m) {
  std::vector<double> out;
  for (int lag = 1; lag < n; ++lag) {
    for (int k = 0; k < m; ++k) out.push_back(a((n - 1) * m + k, (n - 1 - lag) * m + k));
  }
  return out;
}

std::vector<double> full_from(const Matrix& a, int n, int m) {
  std::vector<double> out;
  for (int j = 1; j < n; ++j) {
    for (int i = 0; i < j; ++i) {
      for (int k = 0; k < m; ++k) out.push_back(a(j * m + k, i * m + k));
    }
  }
  return out;
}

std::vector<double> parameters_for(TransformKind structure, const CausalTransform& t) {
  const int n = t.frame_length();
  const int m = t.block_dim();
  std::vector<double> x = structure == TransformKind::Toeplitz ? toeplitz_from(t.encoder(), n, m)
                                                               : full_from(t.encoder(), n, m);
  const std::vector<double> y = structure == TransformKind::Toeplitz ? toeplitz_from(t.decoder(), n, m)
                                                                     : full_from(t.decoder(), n, m);
  x.insert(x.end(), y.begin(), y.end());
  return x;
}

CausalTransform transform_for(TransformKind structure, int n, int m, std::span<const double> x) {
  const std::size_t half = x.size() / 2;
  return CausalTransform::from_parameters(structure, n, m, x.first(half), x.subspan(half));
}

}  // namespace

void SearchConfig::validate() const {
  if (!(initial_step > 0.0)) throw DomainError("search: initial_step must be positive");
  if (!(shrink_factor > 0.0 && shrink_factor < 1.0)) throw DomainError("search: shrink_factor must lie in (0, 1)");
  if (!(step_tolerance > 0.0)) throw DomainError("search: step_tolerance must be positive");
  if (max_evaluations == 0) throw DomainError("search: max_evaluations must be positive");
}

SearchResult hooke_jeeves(const Objective& objective, std::vector<double> x0, const SearchConfig& config) {
  config.validate();
  SearchResult res;
  auto eval = [&](std::span<const double> x) {
    ++res.evaluations;
    return objective(x);
  };
  const auto budget_left = [&] { return res.evaluations < config.max_evaluations; };

  double f_base = eval(x0);
  if (!std::isfinite(f_base)) throw DomainError("hooke_jeeves: objective is not finite at the starting point");
  std::vector<double> base = std::move(x0);
  res.history.push_back(f_base);

  // Coordinate sweep around `x`; updates x and fx in place.
  auto explore = [&](std::vector<double>& x, double& fx, double step) {
    for (std::size_t i = 0; i < x.size() && budget_left(); ++i) {
      const double keep = x[i];
      x[i] = keep + step;
      const double up = eval(x);
      if (up < fx) {
        fx = up;
        continue;
      }
      if (!budget_left()) {
        x[i] = keep;
        break;
      }
      x[i] = keep - step;
      const double down = eval(x);
      if (down < fx) {
        fx = down;
        continue;
      }
      x[i] = keep;
    }
  };

  double step = config.initial_step;
  while (step >= config.step_tolerance && budget_left()) {
    std::vector<double> trial = base;
    double f_trial = f_base;
    explore(trial, f_trial, step);
    if (!(f_trial < f_base)) {
      step *= config.shrink_factor;
      continue;
    }
    // Pattern moves: keep extrapolating while the move keeps paying off.
    while (f_trial < f_base) {
      std::vector<double> previous = std::move(base);
      base = std::move(trial);
      f_base = f_trial;
      res.history.push_back(f_base);
      if (!budget_left()) break;
      std::vector<double> pattern(base.size());
      for (std::size_t i = 0; i < base.size(); ++i) pattern[i] = 2.0 * base[i] - previous[i];
      double f_pattern = eval(pattern);
      if (!std::isfinite(f_pattern)) f_pattern = HUGE_VAL;
      explore(pattern, f_pattern, step);
      trial = std::move(pattern);
      f_trial = f_pattern;
    }
  }
  res.budget_exhausted = step >= config.step_tolerance;
  res.x = std::move(base);
  res.value = f_base;
  return res;
}

std::vector<double> effective_variances(const CausalTransform& transform, const AvailabilityMoments& moments,
                                        const Matrix& k_x, const Matrix& weight) {
  const int m = transform.block_dim();
  const int n = transform.frame_length();
  const int dim = n * m;
  const Matrix& g = transform.encoder_inverse();
  Matrix w = g.transpose() * expected_weighted_gram(transform, moments, weight) * g;
  w = 0.5 * (w + w.transpose());
  const double floor = 1e-12 * w.trace() / dim;
  const double smallest = Eigen::SelfAdjointEigenSolver<Matrix>(w, Eigen::EigenvaluesOnly).eigenvalues().minCoeff();
  if (smallest < floor) w.diagonal().array() += floor;
  const Matrix z = reverse_cholesky(w);

  const Matrix cov_d = g * k_x * g.transpose();
  std::vector<double> out(static_cast<std::size_t>(n));
  for (int i = 0; i < n; ++i) {
    const Matrix zi = z.block(i * m, i * m, m, m);
    const Matrix c = zi * cov_d.block(i * m, i * m, m, m) * zi.transpose();
    const double det = c.determinant();
    if (!(det > 0.0)) throw FactorizationError("effective_variances: degenerate quantizer input covariance");
    out[static_cast<std::size_t>(i)] = m == 1 ? det : std::pow(det, 1.0 / m);
  }
  return out;
}

double uniform_rate_objective(const CausalTransform& transform, const AvailabilityMoments& moments,
                              const Matrix& k_x, const Matrix& weight, double average_rate, double noise_constant) {
  const std::vector<double> var = fine_quantization_input_variances(transform, k_x);
  return am_wmse(transform, moments, k_x, uniform_noise(var, average_rate, noise_constant), weight);
}

DesignResult design_code(const DesignProblem& problem, const SearchConfig& config) {
  config.validate();
  const int n = problem.frame_length;
  const int m = problem.block_dim;
  if (problem.k_x.dim() != n * m) throw DomainError("design_code: K_x dimension mismatch");
  if (problem.stats.dim() != n) throw DomainError("design_code: channel frame length mismatch");
  if (!(problem.noise_constant > 0.0)) throw DomainError("design_code: noise constant must be positive");
  const Matrix& k_x = problem.k_x.matrix();
  const AvailabilityMoments moments(problem.stats);
  auto objective_of = [&](const CausalTransform& t) {
    return uniform_rate_objective(t, moments, k_x, problem.weight, problem.average_rate, problem.noise_constant);
  };

  DesignResult result;
  const PltDesign plt = plt_design(problem.k_x, m);
  switch (problem.structure) {
    case TransformKind::Identity:
      result.transform = CausalTransform::identity(n, m);
      break;
    case TransformKind::PLT:
      result.transform = plt.transform;
      break;
    case TransformKind::Full:
    case TransformKind::Toeplitz: {
      const TransformKind s = problem.structure;
      std::vector<double> start = parameters_for(s, plt.transform);
      double best = objective_of(transform_for(s, n, m, start));
      for (const auto& w : problem.warm_starts) {
        if (w.frame_length() != n || w.block_dim() != m) throw DomainError("design_code: warm start has the wrong shape");
        std::vector<double> cand = parameters_for(s, w);
        const double f = objective_of(transform_for(s, n, m, cand));
        if (f < best) {
          best = f;
          start = std::move(cand);
        }
      }
      const SearchResult sr = hooke_jeeves(
          [&](std::span<const double> x) { return objective_of(transform_for(s, n, m, x)); }, start, config);
      result.transform = transform_for(s, n, m, sr.x);
      result.iterations = sr.evaluations;
      result.objective_history = sr.history;
      result.budget_exhausted = sr.budget_exhausted;
      break;
    }
  }
  result.search_objective = objective_of(result.transform);
  if (result.objective_history.empty()) result.objective_history.push_back(result.search_objective);

  result.input_variances = fine_quantization_input_variances(result.transform, k_x);
  const std::vector<double> eff = effective_variances(result.transform, moments, k_x, problem.weight);
  result.rates = clamp_rates(allocate_rates(eff, problem.average_rate), problem.min_rate);
  result.k_q = allocated_noise(result.input_variances, result.rates.rates, m, problem.noise_constant);
  result.predicted_am_wmse = am_wmse(result.transform, moments, k_x, result.k_q, problem.weight);
  if (problem.lqg_base_cost) result.predicted_lqg_cost = *problem.lqg_base_cost + m * result.predicted_am_wmse;
  return result;
}

void write_design(std::ostream& os, const DesignResult& r) {
  auto list = [&os](const char* key, const std::vector<double>& v) {
    os << key;
    for (double x : v) os << ' ' << format_double(x);
    os << '\n';
  };
  os << "# rctc-design v1\n";
  os << "predicted_am_wmse " << format_double(r.predicted_am_wmse) << '\n';
  if (r.predicted_lqg_cost) os << "predicted_lqg_cost " << format_double(*r.predicted_lqg_cost) << '\n';
  os << "search_objective " << format_double(r.search_objective) << '\n';
  os << "iterations " << r.iterations << '\n';
  os << "budget_exhausted " << (r.budget_exhausted ? 1 : 0) << '\n';
  os << "average_rate " << format_double(r.rates.average) << '\n';
  list("rates", r.rates.rates);
  list("effective_variances", r.rates.effective_variances);
  list("input_variances", r.input_variances);
  std::vector<double> kq(static_cast<std::size_t>(r.k_q.rows()));
  for (Eigen::Index i = 0; i < r.k_q.rows(); ++i) kq[static_cast<std::size_t>(i)] = r.k_q(i, i);
  list("noise_variances", kq);
  list("objective_history", r.objective_history);
  write_transform(os, r.transform);
}

DesignResult read_design(std::istream& is) {
  DesignResult r;
  std::string line;
  std::vector<double> kq;
  auto values = [](std::istringstream& ss) {
    std::vector<double> v;
    std::string tok;
    while (ss >> tok) v.push_back(parse_double(tok));
    return v;
  };
  while (std::getline(is, line)) {
    if (line.empty() || line.front() == '#') continue;
    std::istringstream ss(line);
    std::string key;
    ss >> key;
    if (key == "kind") {
      std::stringstream rest;
      rest << line << '\n' << is.rdbuf();
      r.transform = read_transform(rest);
      break;
    }
    if (key == "predicted_am_wmse") r.predicted_am_wmse = values(ss).at(0);
    else if (key == "predicted_lqg_cost") r.predicted_lqg_cost = values(ss).at(0);
    else if (key == "search_objective") r.search_objective = values(ss).at(0);
    else if (key == "iterations") r.iterations = static_cast<std::size_t>(values(ss).at(0));
    else if (key == "budget_exhausted") r.budget_exhausted = values(ss).at(0) != 0.0;
    else if (key == "average_rate") r.rates.average = values(ss).at(0);
    else if (key == "rates") r.rates.rates = values(ss);
    else if (key == "effective_variances") r.rates.effective_variances = values(ss);
    else if (key == "input_variances") r.input_variances = values(ss);
    else if (key == "noise_variances") kq = values(ss);
    else if (key == "objective_history") r.objective_history = values(ss);
    else throw DomainError("read_design: unknown key '" + key + "'");
  }
  if (r.transform.dim() == 0) throw DomainError("read_design: missing transform");
  r.k_q = Matrix::Zero(static_cast<Eigen::Index>(kq.size()), static_cast<Eigen::Index>(kq.size()));
  for (std::size_t i = 0; i < kq.size(); ++i) r.k_q(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(i)) = kq[i];
  return r;
}

}  // namespace rctc
