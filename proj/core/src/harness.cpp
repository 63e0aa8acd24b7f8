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

#include "rctc/harness.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <limits>
#include <ostream>
#include <set>

#include "rctc/codec.hpp"
#include "rctc/error.hpp"
#include "rctc/format.hpp"
#include "rctc/random.hpp"
#include "rctc/source_model.hpp"

namespace rctc {
namespace {

constexpr const char* kKnownKeys[] = {
    "experiment",       "source_rho",         "source_variance",   "F",
    "G",                "C",                  "K_w",               "K_v",
    "R",                "S",                  "design_coefficient", "pilot_horizon",
    "analytic_covariance", "horizon",         "burn_in",           "frame_length",
    "block_dim",        "rate",               "deadline",          "sample_period",
    "p_grid",           "schemes",            "correlation",       "quantizer",
    "noise_constant",   "min_rate",           "seed",              "design_samples",
    "frames",           "batch_count",        "search.initial_step", "search.shrink_factor",
    "search.step_tolerance", "search.max_evaluations", "output",
};

std::uint64_t p_tag(double p) { return std::bit_cast<std::uint64_t>(p); }

std::uint64_t design_seed(const ExperimentConfig& c, double p) { return derive_seed(c.seed, {10, p_tag(p)}); }

std::uint64_t sim_seed(const ExperimentConfig& c, Scheme s, double p) {
  return derive_seed(c.seed, {20, static_cast<std::uint64_t>(s), p_tag(p)});
}

std::uint64_t analytic_pilot_seed(const ExperimentConfig& c, Scheme s, double p) {
  return derive_seed(c.seed, {40, static_cast<std::uint64_t>(s), p_tag(p)});
}

std::size_t to_size(const KeyValueConfig& cfg, const std::string& key, std::size_t fallback) {
  const long long v = cfg.get_int(key, static_cast<long long>(fallback));
  if (v < 0) throw ConfigError(key, "must be non-negative");
  return static_cast<std::size_t>(v);
}

Matrix scalar(double v) { return Matrix::Constant(1, 1, v); }

// Closed-loop design model: controller plus the AR design covariance, whose
// per-sample variance comes from a pilot run with perfect state feedback.
struct LqgContext {
  ControllerSolution solution;
  CovarianceMatrix k_x;
};

LqgContext lqg_context(const ExperimentConfig& c) {
  LqgContext ctx;
  ctx.solution = solve_controller(c.plant, c.weights);
  const int d = c.plant.state_dim();
  ClosedLoopOptions pilot;
  pilot.horizon = c.pilot_horizon;
  pilot.burn_in = c.burn_in;
  pilot.channel_enabled = false;
  const ChannelModel dummy = c.channel_for(0.5);
  const ClosedLoopResult r =
      simulate_closed_loop(c.plant, c.weights, ctx.solution, CausalTransform::identity(c.frame_length, d),
                           QuantizerBank::exact(static_cast<std::size_t>(c.frame_length), static_cast<std::size_t>(d)),
                           dummy, pilot, derive_seed(c.seed, {30}));
  // Average the per-position state covariance blocks over the frame.
  Matrix state = Matrix::Zero(d, d);
  for (int i = 0; i < c.frame_length; ++i) state += r.frame_covariance.block(i * d, i * d, d, d);
  state /= c.frame_length;
  state = 0.5 * (state + state.transpose());
  Matrix k = Matrix::Zero(c.frame_length * d, c.frame_length * d);
  for (int i = 0; i < c.frame_length; ++i) {
    for (int j = 0; j < c.frame_length; ++j) {
      k.block(i * d, j * d, d, d) = std::pow(c.design_coefficient, std::abs(i - j)) * state;
    }
  }
  ctx.k_x = CovarianceMatrix(std::move(k));
  return ctx;
}

SchemeDesign design_with(const ExperimentConfig& c, Scheme scheme, double p, const CovarianceMatrix& k_x,
                         Matrix weight, std::optional<double> lqg_base,
                         const std::optional<CausalTransform>& warm_start) {
  const int m = c.kind == ExperimentKind::ClosedLoopLqg ? c.plant.state_dim() : c.block_dim;
  const ChannelModel channel = c.channel_for(p);
  DesignProblem problem{k_x,
                        availability_stats(channel, c.design_samples, design_seed(c, p), c.correlation),
                        weight,
                        c.rate,
                        c.frame_length,
                        m,
                        TransformKind::Identity,
                        c.noise_constant,
                        c.min_rate,
                        {},
                        lqg_base};
  switch (scheme) {
    case Scheme::NoCoding: problem.structure = TransformKind::Identity; break;
    case Scheme::Plt: problem.structure = TransformKind::PLT; break;
    case Scheme::RtcTc: problem.structure = TransformKind::Toeplitz; break;
    case Scheme::RcTc: problem.structure = TransformKind::Full; break;
  }
  if (warm_start) problem.warm_starts.push_back(*warm_start);
  DesignResult design = design_code(problem, c.search);
  if (scheme == Scheme::NoCoding) {
    // Plain quantization: every quantizer at the average rate.
    design.rates.rates.assign(static_cast<std::size_t>(c.frame_length), c.rate);
    design.rates.effective_variances.assign(static_cast<std::size_t>(c.frame_length), 1.0);
    Matrix k_q = Matrix::Zero(k_x.dim(), k_x.dim());
    for (Eigen::Index i = 0; i < k_q.rows(); ++i) {
      k_q(i, i) = c.noise_constant * std::exp2(-2.0 * c.rate) * design.input_variances[static_cast<std::size_t>(i)];
    }
    design.k_q = std::move(k_q);
    design.predicted_am_wmse = am_wmse(design.transform, AvailabilityMoments(problem.stats), k_x.matrix(),
                                       design.k_q, problem.weight);
    if (lqg_base) design.predicted_lqg_cost = *lqg_base + m * design.predicted_am_wmse;
  }
  return {std::move(design), k_x, std::move(weight)};
}

std::string mode_string(const ExperimentConfig& c) {
  std::string s = to_string(c.correlation);
  s += c.quantizer == QuantizerMode::Codebook ? "/codebook" : "/modeled";
  if (c.kind == ExperimentKind::ClosedLoopLqg) {
    s += c.analytic_covariance == AnalyticCovariance::Pilot ? "/pilot" : "/design";
  }
  return s;
}

// Designs every requested scheme for one p; RC-TC also starts from the
// RTC-TC optimum when both are requested.
template <typename DesignFn>
std::vector<std::pair<Scheme, SchemeDesign>> design_all(const ExperimentConfig& c, DesignFn&& fn) {
  std::vector<Scheme> order = c.schemes;
  std::stable_sort(order.begin(), order.end());
  std::vector<std::pair<Scheme, SchemeDesign>> out;
  std::optional<CausalTransform> toeplitz;
  for (Scheme s : order) {
    SchemeDesign d = fn(s, s == Scheme::RcTc ? toeplitz : std::nullopt);
    if (s == Scheme::RtcTc) toeplitz = d.design.transform;
    out.emplace_back(s, std::move(d));
  }
  return out;
}

ResultRow base_row(const ExperimentConfig& c, Scheme s, double p) {
  ResultRow row;
  row.scheme = s;
  row.p = p;
  row.lambda = c.channel_for(p).lambda;
  row.seed = sim_seed(c, s, p);
  row.mode = mode_string(c);
  row.frame_length = c.frame_length;
  row.rate = c.rate;
  row.design_samples = c.design_samples;
  return row;
}

}  // namespace

const char* to_string(Scheme scheme) {
  switch (scheme) {
    case Scheme::NoCoding: return "no_coding";
    case Scheme::Plt: return "plt";
    case Scheme::RtcTc: return "rtc_tc";
    case Scheme::RcTc: return "rc_tc";
  }
  return "unknown";
}

Scheme scheme_from_string(const std::string& text) {
  if (text == "no_coding") return Scheme::NoCoding;
  if (text == "plt") return Scheme::Plt;
  if (text == "rtc_tc") return Scheme::RtcTc;
  if (text == "rc_tc") return Scheme::RcTc;
  throw DomainError("unknown scheme '" + text + "'");
}

PlantModel plant_from_config(const KeyValueConfig& cfg) {
  PlantModel plant;
  plant.f = cfg.has("F") ? cfg.get_matrix("F") : scalar(1.49);
  plant.g = cfg.has("G") ? cfg.get_matrix("G") : scalar(0.05);
  plant.c = cfg.has("C") ? cfg.get_matrix("C") : Matrix::Identity(plant.f.rows(), plant.f.rows());
  plant.k_w = cfg.has("K_w") ? cfg.get_matrix("K_w") : scalar(0.01);
  plant.k_v = cfg.has("K_v") ? cfg.get_matrix("K_v") : scalar(0.001);
  try {
    plant.validate();
  } catch (const DomainError& e) {
    throw ConfigError("F", e.what());
  }
  return plant;
}

LqgWeights weights_from_config(const KeyValueConfig& cfg) {
  LqgWeights w;
  w.r = cfg.has("R") ? cfg.get_matrix("R") : scalar(1.0);
  w.s = cfg.has("S") ? cfg.get_matrix("S") : scalar(0.01);
  return w;
}

ExperimentConfig ExperimentConfig::from_config(const KeyValueConfig& cfg) {
  const std::set<std::string> known(std::begin(kKnownKeys), std::end(kKnownKeys));
  for (const auto& k : cfg.keys()) {
    if (!known.count(k)) throw ConfigError(k, "unknown key");
  }
  ExperimentConfig c;
  const std::string kind = cfg.get_string("experiment", "source");
  if (kind == "source") c.kind = ExperimentKind::SourceCoding;
  else if (kind == "lqg") c.kind = ExperimentKind::ClosedLoopLqg;
  else throw ConfigError("experiment", "expected 'source' or 'lqg'");

  c.source_rho = cfg.get_double("source_rho", c.source_rho);
  c.source_variance = cfg.get_double("source_variance", c.source_variance);
  c.design_coefficient = cfg.get_double("design_coefficient", c.design_coefficient);
  c.pilot_horizon = to_size(cfg, "pilot_horizon", c.pilot_horizon);
  const std::string ac = cfg.get_string("analytic_covariance", "pilot");
  if (ac == "pilot") c.analytic_covariance = AnalyticCovariance::Pilot;
  else if (ac == "design") c.analytic_covariance = AnalyticCovariance::DesignModel;
  else throw ConfigError("analytic_covariance", "expected 'pilot' or 'design'");
  c.horizon = to_size(cfg, "horizon", c.horizon);
  c.burn_in = to_size(cfg, "burn_in", c.burn_in);
  c.frame_length = static_cast<int>(cfg.get_int("frame_length", c.frame_length));
  c.block_dim = static_cast<int>(cfg.get_int("block_dim", c.block_dim));
  c.rate = cfg.get_double("rate", c.rate);
  c.deadline = cfg.get_double("deadline", c.deadline);
  c.sample_period = cfg.get_double("sample_period", c.deadline / 4.0);
  if (cfg.has("p_grid")) c.p_grid = cfg.get_doubles("p_grid");
  if (cfg.has("schemes")) {
    c.schemes.clear();
    for (const auto& s : cfg.get_strings("schemes")) {
      try {
        c.schemes.push_back(scheme_from_string(s));
      } catch (const DomainError& e) {
        throw ConfigError("schemes", e.what());
      }
    }
  }
  try {
    c.correlation = delay_correlation_from_string(cfg.get_string("correlation", "montecarlo"));
  } catch (const DomainError& e) {
    throw ConfigError("correlation", e.what());
  }
  const std::string q = cfg.get_string("quantizer", "modeled");
  if (q == "modeled") c.quantizer = QuantizerMode::ModeledNoise;
  else if (q == "codebook") c.quantizer = QuantizerMode::Codebook;
  else throw ConfigError("quantizer", "expected 'modeled' or 'codebook'");
  c.noise_constant = cfg.get_double("noise_constant", c.noise_constant);
  c.min_rate = cfg.get_double("min_rate", c.min_rate);
  c.seed = static_cast<std::uint64_t>(cfg.get_int("seed", static_cast<long long>(c.seed)));
  c.design_samples = to_size(cfg, "design_samples", c.design_samples);
  c.frames = to_size(cfg, "frames", c.frames);
  c.batch_count = to_size(cfg, "batch_count", c.batch_count);
  c.search.initial_step = cfg.get_double("search.initial_step", c.search.initial_step);
  c.search.shrink_factor = cfg.get_double("search.shrink_factor", c.search.shrink_factor);
  c.search.step_tolerance = cfg.get_double("search.step_tolerance", c.search.step_tolerance);
  c.search.max_evaluations = to_size(cfg, "search.max_evaluations", c.search.max_evaluations);
  c.output = cfg.get_string("output", "");

  if (c.kind == ExperimentKind::ClosedLoopLqg) {
    c.plant = plant_from_config(cfg);
    c.weights = weights_from_config(cfg);
    if (!cfg.has("block_dim")) c.block_dim = c.plant.state_dim();
  }
  c.validate();
  return c;
}

void ExperimentConfig::validate() const {
  if (!(deadline > 0.0) || !std::isfinite(deadline)) throw ConfigError("deadline", "must be positive");
  if (!(sample_period > 0.0) || !std::isfinite(sample_period)) throw ConfigError("sample_period", "must be positive");
  if (frame_length < 1) throw ConfigError("frame_length", "must be positive");
  if (block_dim < 1) throw ConfigError("block_dim", "must be positive");
  if (!std::isfinite(rate)) throw ConfigError("rate", "must be finite");
  if (p_grid.empty()) throw ConfigError("p_grid", "empty grid");
  for (double p : p_grid) {
    if (!(p > 0.0 && p < 1.0)) throw ConfigError("p_grid", "values must lie in (0, 1)");
  }
  if (schemes.empty()) throw ConfigError("schemes", "no schemes");
  if (!(noise_constant > 0.0)) throw ConfigError("noise_constant", "must be positive");
  if (!(min_rate >= 0.0)) throw ConfigError("min_rate", "must be non-negative");
  if (min_rate > rate) throw ConfigError("min_rate", "exceeds the average rate");
  if (design_samples == 0) throw ConfigError("design_samples", "must be positive");
  if (batch_count < 2) throw ConfigError("batch_count", "need at least two batches");
  try {
    search.validate();
  } catch (const DomainError& e) {
    throw ConfigError("search", e.what());
  }
  if (kind == ExperimentKind::SourceCoding) {
    if (!(std::abs(source_rho) < 1.0)) throw ConfigError("source_rho", "must satisfy |rho| < 1");
    if (!(source_variance > 0.0)) throw ConfigError("source_variance", "must be positive");
    if (block_dim != 1) throw ConfigError("block_dim", "the Gauss-Markov source is scalar");
    if (frames < batch_count) throw ConfigError("frames", "fewer frames than batches");
  } else {
    if (block_dim != plant.state_dim()) throw ConfigError("block_dim", "must equal the plant state dimension");
    if (!(std::abs(design_coefficient) < 1.0)) throw ConfigError("design_coefficient", "must satisfy |a| < 1");
    if (horizon < static_cast<std::size_t>(frame_length) || horizon < batch_count) {
      throw ConfigError("horizon", "too short");
    }
    if (pilot_horizon < static_cast<std::size_t>(frame_length) || pilot_horizon < batch_count) {
      throw ConfigError("pilot_horizon", "too short");
    }
    try {
      weights.validate(plant);
    } catch (const DomainError& e) {
      throw ConfigError("R", e.what());
    }
  }
}

ChannelModel ExperimentConfig::channel_for(double p) const {
  return ChannelModel::from_violation_probability(p, deadline, sample_period, frame_length);
}

SchemeDesign design_scheme(const ExperimentConfig& config, Scheme scheme, double p,
                           const std::optional<CausalTransform>& warm_start) {
  if (config.kind == ExperimentKind::SourceCoding) {
    const CovarianceMatrix k_x = ar1_covariance(config.source_rho, config.source_variance, config.frame_length);
    return design_with(config, scheme, p, k_x, Matrix::Identity(k_x.dim(), k_x.dim()), std::nullopt, warm_start);
  }
  const LqgContext ctx = lqg_context(config);
  return design_with(config, scheme, p, ctx.k_x, ctx.solution.weight_block(config.frame_length),
                     (ctx.solution.p * config.plant.k_w).trace(), warm_start);
}

QuantizerBank bank_for(const ExperimentConfig& config, const DesignResult& design) {
  const auto m = static_cast<std::size_t>(design.transform.block_dim());
  if (config.quantizer == QuantizerMode::Codebook) {
    return QuantizerBank::realized(design.rates.rates, design.input_variances, m);
  }
  return QuantizerBank::modeled(design.rates.rates, design.input_variances, m, config.noise_constant);
}

std::vector<ResultRow> run_source_experiment(const ExperimentConfig& c) {
  if (c.kind != ExperimentKind::SourceCoding) throw ConfigError("experiment", "not a source experiment");
  c.validate();
  const GaussMarkovModel source = GaussMarkovModel::ar1(c.source_rho, c.source_variance);
  const CovarianceMatrix k_x = ar1_covariance(c.source_rho, c.source_variance, c.frame_length);
  const Matrix identity = Matrix::Identity(k_x.dim(), k_x.dim());
  const auto n = static_cast<std::size_t>(c.frame_length);

  std::vector<ResultRow> rows;
  for (double p : c.p_grid) {
    const ChannelModel channel = c.channel_for(p);
    const AvailabilityMoments exact = AvailabilityMoments::exact(channel);
    auto designs = design_all(c, [&](Scheme s, const std::optional<CausalTransform>& warm) {
      return design_with(c, s, p, k_x, identity, std::nullopt, warm);
    });
    for (auto& [scheme, sd] : designs) {
      ResultRow row = base_row(c, scheme, p);
      const QuantizerBank bank = bank_for(c, sd.design);
      row.noise_constant = bank.noise_constant();
      row.design_predicted = sd.design.predicted_am_wmse;
      row.analytic = am_wmse(sd.design.transform, exact, k_x.matrix(), modeled_noise_covariance(bank).matrix(), identity);
      if (sd.design.budget_exhausted) row.status = "budget_exhausted";

      const std::vector<double> path = sample_path(source, c.frames * n, derive_seed(row.seed, {1}));
      Rng channel_rng(derive_seed(row.seed, {2}));
      Rng quant_rng(derive_seed(row.seed, {3}));
      const std::size_t batches = c.batch_count;
      const std::size_t per_batch = c.frames / batches;
      std::vector<double> batch_sum(batches, 0.0);
      std::vector<std::size_t> batch_n(batches, 0);
      double total = 0.0;
      for (std::size_t f = 0; f < c.frames; ++f) {
        const std::span<const double> frame(path.data() + f * n, n);
        const EncodedFrame enc = encode(frame, sd.design.transform, bank, quant_rng);
        const AvailabilityMatrix b = sample_availability(channel, c.correlation, channel_rng);
        const Vector xhat = decode({enc.codevalues.data(), n}, sd.design.transform, b);
        double err = 0.0;
        for (std::size_t i = 0; i < n; ++i) err += (frame[i] - xhat(static_cast<Eigen::Index>(i))) *
                                                   (frame[i] - xhat(static_cast<Eigen::Index>(i)));
        err /= static_cast<double>(n);
        total += err;
        const std::size_t bi = std::min(f / std::max<std::size_t>(per_batch, 1), batches - 1);
        batch_sum[bi] += err;
        ++batch_n[bi];
      }
      row.simulated = total / static_cast<double>(c.frames);
      double mean = 0.0;
      for (std::size_t i = 0; i < batches; ++i) mean += batch_sum[i] / static_cast<double>(batch_n[i]);
      mean /= static_cast<double>(batches);
      double var = 0.0;
      for (std::size_t i = 0; i < batches; ++i) {
        const double d = batch_sum[i] / static_cast<double>(batch_n[i]) - mean;
        var += d * d;
      }
      row.standard_error = std::sqrt(var / static_cast<double>(batches - 1) / static_cast<double>(batches));
      row.sim_samples = c.frames;
      rows.push_back(std::move(row));
    }
  }
  return rows;
}

std::vector<ResultRow> run_lqg_experiment(const ExperimentConfig& c) {
  if (c.kind != ExperimentKind::ClosedLoopLqg) throw ConfigError("experiment", "not a closed-loop experiment");
  c.validate();
  const LqgContext ctx = lqg_context(c);
  const Matrix weight = ctx.solution.weight_block(c.frame_length);
  const double base = (ctx.solution.p * c.plant.k_w).trace();

  ClosedLoopOptions run;
  run.horizon = c.horizon;
  run.burn_in = c.burn_in;
  run.correlation = c.correlation;
  run.batch_count = c.batch_count;
  ClosedLoopOptions pilot = run;
  pilot.horizon = c.pilot_horizon;

  std::vector<ResultRow> rows;
  for (double p : c.p_grid) {
    const ChannelModel channel = c.channel_for(p);
    const AvailabilityMoments exact = AvailabilityMoments::exact(channel);
    auto designs = design_all(c, [&](Scheme s, const std::optional<CausalTransform>& warm) {
      return design_with(c, s, p, ctx.k_x, weight, base, warm);
    });
    for (auto& [scheme, sd] : designs) {
      ResultRow row = base_row(c, scheme, p);
      const QuantizerBank bank = bank_for(c, sd.design);
      row.noise_constant = bank.noise_constant();
      row.design_predicted = sd.design.predicted_lqg_cost.value_or(std::nan(""));
      if (sd.design.budget_exhausted) row.status = "budget_exhausted";
      const Matrix k_q = modeled_noise_covariance(bank).matrix();

      Matrix analytic_kx = ctx.k_x.matrix();
      if (c.analytic_covariance == AnalyticCovariance::Pilot) {
        const ClosedLoopResult pr = simulate_closed_loop(c.plant, c.weights, ctx.solution, sd.design.transform, bank,
                                                         channel, pilot, analytic_pilot_seed(c, scheme, p));
        if (pr.diverged) {
          row.status = "diverged";
        } else {
          analytic_kx = 0.5 * (pr.frame_covariance + pr.frame_covariance.transpose());
        }
      }
      row.analytic = analytic_lqg_cost(ctx.solution, c.plant, exact, sd.design.transform, analytic_kx, k_q);

      const ClosedLoopResult sim =
          simulate_closed_loop(c.plant, c.weights, ctx.solution, sd.design.transform, bank, channel, run, row.seed);
      row.sim_samples = sim.steps;
      if (sim.diverged) {
        row.status = "diverged";
        row.simulated = std::numeric_limits<double>::quiet_NaN();
        row.standard_error = std::numeric_limits<double>::quiet_NaN();
      } else {
        row.simulated = sim.empirical_cost;
        row.standard_error = sim.standard_error;
      }
      rows.push_back(std::move(row));
    }
  }
  return rows;
}

std::vector<ResultRow> run_experiment(const ExperimentConfig& config) {
  return config.kind == ExperimentKind::SourceCoding ? run_source_experiment(config) : run_lqg_experiment(config);
}

void write_results_csv(std::ostream& os, std::vector<ResultRow> rows) {
  std::stable_sort(rows.begin(), rows.end(), [](const ResultRow& a, const ResultRow& b) {
    return a.p != b.p ? a.p < b.p : a.scheme < b.scheme;
  });
  os << "# rctc-results v1\n";
  os << "scheme,p,lambda,analytic,simulated,stderr,seed,mode,c,N,r,design_predicted,design_samples,sim_samples,"
        "status\n";
  for (const auto& r : rows) {
    os << to_string(r.scheme) << ',' << format_double(r.p) << ',' << format_double(r.lambda) << ','
       << format_double(r.analytic) << ',' << format_double(r.simulated) << ',' << format_double(r.standard_error)
       << ',' << r.seed << ',' << r.mode << ',' << format_double(r.noise_constant) << ',' << r.frame_length << ','
       << format_double(r.rate) << ',' << format_double(r.design_predicted) << ',' << r.design_samples << ','
       << r.sim_samples << ',' << r.status << '\n';
  }
}

}  // namespace rctc
