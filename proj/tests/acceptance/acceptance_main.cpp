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

// Acceptance checks. Prints one PASS/FAIL line per criterion; with an
// argument N only criterion N runs. Exit status is nonzero on any failure.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iterator>
#include <numeric>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include <unistd.h>

#include "oracles.hpp"
#include "rctc/channel.hpp"
#include "rctc/codec.hpp"
#include "rctc/config.hpp"
#include "rctc/designer.hpp"
#include "rctc/harness.hpp"
#include "rctc/lqg.hpp"
#include "rctc/quantizer.hpp"
#include "rctc/source_model.hpp"

namespace {

using namespace rctc;
using Clock = std::chrono::steady_clock;

struct Outcome {
  bool pass = true;
  std::string detail;
  void require(bool ok, const std::string& what) {
    if (!ok) {
      pass = false;
      detail += (detail.empty() ? "" : "; ") + what;
    }
  }
};

double seconds_since(Clock::time_point t0) {
  return std::chrono::duration<double>(Clock::now() - t0).count();
}

std::string fmt(const char* f, double a) {
  char buf[96];
  std::snprintf(buf, sizeof buf, f, a);
  return buf;
}

std::string fmt2(const char* f, double a, double b) {
  char buf[160];
  std::snprintf(buf, sizeof buf, f, a, b);
  return buf;
}

Matrix s1(double v) { return Matrix::Constant(1, 1, v); }

Matrix gaussian_matrix(int r, int c, std::mt19937_64& rng) {
  std::normal_distribution<double> g;
  Matrix m(r, c);
  for (int i = 0; i < r; ++i)
    for (int j = 0; j < c; ++j) m(i, j) = g(rng);
  return m;
}

ExperimentConfig load(const std::string& name) {
  return ExperimentConfig::from_config(KeyValueConfig::load(std::string(RCTC_CONFIG_DIR) + "/" + name));
}

// 1. Riccati correctness.
Outcome riccati() {
  Outcome o;
  const auto t0 = Clock::now();
  const PlantModel unit{s1(1), s1(1), s1(1), s1(1), s1(0)};
  const Matrix p = solve_riccati(unit, {s1(1), s1(1)});
  const double golden = (1 + std::sqrt(5.0)) / 2;
  o.require(std::abs(p(0, 0) - golden) < 1e-9, fmt("|P - phi| = %.3g", std::abs(p(0, 0) - golden)));
  std::mt19937_64 rng(1);
  int solved = 0;
  double worst = 0.0;
  while (solved < 100) {
    const int d = 1 + static_cast<int>(rng() % 4);
    const int n = 1 + static_cast<int>(rng() % 2);
    const PlantModel plant{gaussian_matrix(d, d, rng), gaussian_matrix(d, n, rng), Matrix::Identity(d, d),
                           Matrix::Identity(d, d), Matrix()};
    if (!is_controllable(plant.f, plant.g)) continue;
    const Matrix r = gaussian_matrix(d, d, rng);
    const Matrix s = gaussian_matrix(n, n, rng);
    const LqgWeights w{r * r.transpose() + 0.1 * Matrix::Identity(d, d), s * s.transpose() + 0.1 * Matrix::Identity(n, n)};
    const Matrix pp = solve_riccati(plant, w);
    worst = std::max(worst, riccati_residual(pp, plant, w) / pp.norm());
    ++solved;
  }
  const double t = seconds_since(t0);
  o.require(worst < 1e-10, fmt("worst relative residual %.3g", worst));
  o.require(t < 1.0, fmt("runtime %.2fs", t));
  if (o.pass) o.detail = fmt2("P=%.12f, worst residual/||P|| %.2g", p(0, 0), worst) + fmt(", %.3fs", t);
  return o;
}

// 2. Rate allocation optimality.
Outcome rate_allocation() {
  Outcome o;
  const auto t0 = Clock::now();
  std::mt19937_64 rng(2);
  std::lognormal_distribution<double> lv(0.0, 1.0);
  std::normal_distribution<double> g(0.0, 1.0);
  double worst_mean = 0.0;
  int beaten = 0;
  for (int instance = 0; instance < 20; ++instance) {
    std::vector<double> v(3);
    for (auto& x : v) x = lv(rng);
    const double r = 1.0 + 0.5 * instance;
    const auto a = allocate_rates(v, r);
    worst_mean = std::max(worst_mean, std::abs(std::accumulate(a.rates.begin(), a.rates.end(), 0.0) / 3.0 - r));
    auto distortion = [&](const std::vector<double>& rates) {
      double d = 0.0;
      for (int i = 0; i < 3; ++i) d += std::exp2(-2 * rates[static_cast<std::size_t>(i)]) * v[static_cast<std::size_t>(i)];
      return d;
    };
    const double best = distortion(a.rates);
    for (int k = 0; k < 1000; ++k) {
      std::vector<double> alt{r + g(rng), r + g(rng), 0.0};
      alt[2] = 3 * r - alt[0] - alt[1];
      if (distortion(alt) < best) ++beaten;
    }
  }
  const double t = seconds_since(t0);
  o.require(worst_mean < 1e-12, fmt("mean error %.3g", worst_mean));
  o.require(beaten == 0, fmt("%.0f random allocations beat the optimum", beaten));
  o.require(t < 1.0, fmt("runtime %.2fs", t));
  if (o.pass) o.detail = fmt2("20 instances x 1000 rivals, mean error %.2g, %.3fs", worst_mean, t);
  return o;
}

// 3. Codec round trip.
Outcome codec_round_trip() {
  Outcome o;
  const auto t0 = Clock::now();
  std::mt19937_64 rng(3);
  std::normal_distribution<double> g;
  Rng qrng(4);
  double worst = 0.0;
  for (int k = 0; k < 10000; ++k) {
    const int n = 1 + k % 8;
    const auto count = CausalTransform::parameter_count(TransformKind::Full, n, 1);
    std::vector<double> c(count);
    for (auto& x : c) x = 0.5 * g(rng);
    const auto t = CausalTransform::from_parameters(TransformKind::Full, n, 1, c, c);
    std::vector<double> x(static_cast<std::size_t>(n));
    for (auto& v : x) v = g(rng);
    const auto enc = encode(x, t, QuantizerBank::exact(static_cast<std::size_t>(n), 1), qrng);
    const Vector xhat = decode({enc.codevalues.data(), static_cast<std::size_t>(n)}, t, AvailabilityMatrix(n, true));
    for (int i = 0; i < n; ++i) worst = std::max(worst, std::abs(xhat(i) - x[static_cast<std::size_t>(i)]));
  }
  const double t = seconds_since(t0);
  o.require(worst < 1e-12, fmt("max error %.3g", worst));
  o.require(t < 5.0, fmt("runtime %.2fs", t));
  if (o.pass) o.detail = fmt2("10^4 frames, max |x_hat - x| %.2g, %.3fs", worst, t);
  return o;
}

// 4. PLT decorrelation.
Outcome plt_decorrelation() {
  Outcome o;
  const int n = 6;
  const std::size_t frames = 100000;
  const auto kx = ar1_covariance(0.9, 1.0, n);
  const auto plt = plt_design(kx, 1);
  const auto path = sample_path(GaussMarkovModel::ar1(0.9, 1.0), frames * n, 5);
  Rng qrng(6);
  const auto bank = QuantizerBank::exact(n, 1);
  std::vector<Vector> d;
  d.reserve(frames);
  for (std::size_t f = 0; f < frames; ++f) {
    d.push_back(encode({path.data() + f * n, static_cast<std::size_t>(n)}, plt.transform, bank, qrng).quantizer_inputs);
  }
  double worst_z = 0.0;
  double worst_rel = 0.0;
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j <= i; ++j) {
      double s = 0.0, s2 = 0.0;
      for (const auto& v : d) {
        const double p = v(i) * v(j);
        s += p;
        s2 += p * p;
      }
      const double mean = s / frames;
      const double se = std::sqrt((s2 / frames - mean * mean) / frames);
      if (i == j) {
        worst_rel = std::max(worst_rel, std::abs(mean / plt.input_variances[static_cast<std::size_t>(i)] - 1.0));
      } else {
        worst_z = std::max(worst_z, std::abs(mean) / se);
      }
    }
  }
  o.require(worst_z < 3.0, fmt("off-diagonal at %.2f standard errors", worst_z));
  o.require(worst_rel < 0.02, fmt("diagonal off by %.3f", worst_rel));
  if (o.pass) o.detail = fmt2("max off-diagonal %.2f SE, max diagonal deviation %.4f", worst_z, worst_rel);
  return o;
}

// 5. Exhaustive availability enumeration.
Outcome exhaustive_oracle() {
  Outcome o;
  double worst = 0.0;
  std::mt19937_64 rng(7);
  std::normal_distribution<double> g(0.0, 0.6);
  const PlantModel plant{s1(1.49), s1(0.05), s1(1), s1(0.01), s1(0.001)};
  const auto sol = solve_controller(plant, {s1(1), s1(0.01)});
  for (int n : {2, 3}) {
    for (double p : {0.05, 0.3}) {
      const auto model = ChannelModel::from_violation_probability(p, 0.05, 0.0125, n);
      const auto patterns = oracle::enumerate_patterns(n, model.lambda, model.deadline, model.sample_period);
      const auto count = CausalTransform::parameter_count(TransformKind::Full, n, 1);
      std::vector<double> enc(count), dec(count);
      for (auto& v : enc) v = g(rng);
      for (auto& v : dec) v = g(rng);
      const auto t = CausalTransform::from_parameters(TransformKind::Full, n, 1, enc, dec);
      const Matrix kx = ar1_covariance(0.85, 0.7, n).matrix();
      const Matrix kq = 0.02 * Matrix::Identity(n, n);
      std::vector<AvailabilityMatrix> real;
      std::vector<double> wts;
      for (const auto& pat : patterns) {
        AvailabilityMatrix b(n);
        for (int i = 0; i < n; ++i)
          for (int j = 0; j <= i; ++j) b.set(i, j, pat.b(i, j) != 0.0);
        real.push_back(b);
        wts.push_back(pat.probability);
      }
      const auto stats = availability_stats_from(model, real, wts, DelayCorrelation::IndependentApprox);
      const auto exact = AvailabilityMoments::exact(model);
      const Matrix eye = Matrix::Identity(n, n);
      const double brute = oracle::brute_am_wmse(t.encoder(), t.decoder(), patterns, kx, kq, eye);
      const double brute_cost = (sol.p * plant.k_w).trace() +
                                oracle::brute_am_wmse(t.encoder(), t.decoder(), patterns, kx, kq, sol.weight_block(n));
      for (double v : {am_wmse(t, exact, kx, kq, eye) - brute, am_wmse(t, stats, kx, kq, eye) - brute,
                       analytic_lqg_cost(sol, plant, exact, t, kx, kq) - brute_cost,
                       analytic_lqg_cost(sol, plant, stats, t, kx, kq) - brute_cost}) {
        worst = std::max(worst, std::abs(v));
      }
    }
  }
  o.require(worst < 1e-10, fmt("max deviation %.3g", worst));
  if (o.pass) o.detail = fmt("N=2,3; max deviation from enumeration %.2g", worst);
  return o;
}

// 6. Low-loss limit and decomposition identity.
Outcome remark_limit() {
  Outcome o;
  const PlantModel plant{s1(1.49), s1(0.05), s1(1), s1(0.01), s1(0.001)};
  const LqgWeights w{s1(1), s1(0.01)};
  const auto sol = solve_controller(plant, w);
  const int n = 8;
  const auto lossless = ChannelModel::from_violation_probability(std::exp(-30.0), 0.05, 0.0125, n);
  const auto kx = ar1_covariance(0.8677, 0.03, n);
  const auto plt = plt_design(kx, 1);
  std::vector<double> rates(n, 5.0);
  const auto bank = QuantizerBank::modeled(rates, plt.input_variances, 1, 1.0);
  const Matrix kq = modeled_noise_covariance(bank).matrix();
  const double cost = analytic_lqg_cost(sol, plant, AvailabilityMoments::exact(lossless), plt.transform, kx.matrix(), kq);
  const double expected = (sol.p * plant.k_w).trace() + (sol.weight_block(n) * kq).trace() / n;
  const double rel = std::abs(cost - expected) / expected;
  o.require(rel < 1e-6, fmt("relative deviation %.3g", rel));

  // Per-sample weighted error equals m times AM-WMSE with M = blockdiag(R_eq),
  // and tr(P K_wbar) + tr(R Lambda) equals tr(P K_w) + tr(R_eq Lambda).
  std::mt19937_64 rng(8);
  double worst = 0.0;
  for (int trial = 0; trial < 100; ++trial) {
    const int m = 1 + trial % 3;
    const int frames = 1 + trial % 7;
    const Matrix f = gaussian_matrix(m, m, rng);
    const Matrix a = gaussian_matrix(m, m, rng);
    const Matrix p = a * a.transpose();
    const Matrix b = gaussian_matrix(m, m, rng);
    const Matrix r = b * b.transpose() + Matrix::Identity(m, m);
    const Matrix req = f.transpose() * p * f - p + r;
    const Matrix e = gaussian_matrix(m * frames, 1, rng);
    double per_sample = 0.0;
    for (int i = 0; i < frames; ++i) {
      const Matrix ei = e.block(i * m, 0, m, 1);
      per_sample += (ei.transpose() * req * ei)(0, 0);
    }
    per_sample /= frames;
    const double amwmse = (e.transpose() * block_diagonal(req, frames) * e)(0, 0) / (m * frames);
    worst = std::max(worst, std::abs(per_sample - m * amwmse) / (1 + std::abs(per_sample)));
    const Matrix l = gaussian_matrix(m, m, rng);
    const Matrix lambda = l * l.transpose();
    const Matrix k = gaussian_matrix(m, m, rng);
    const Matrix kw = k * k.transpose();
    const double lhs = (p * (f * lambda * f.transpose() + kw - lambda)).trace() + (r * lambda).trace();
    const double rhs = (p * kw).trace() + (req * lambda).trace();
    worst = std::max(worst, std::abs(lhs - rhs) / (1 + std::abs(lhs)));
  }
  o.require(worst < 1e-12, fmt("identity residual %.3g", worst));
  if (o.pass) o.detail = fmt2("relative deviation %.2g, identity residual %.2g", rel, worst);
  return o;
}

// 7. Design dominance on the shared frozen availability set.
Outcome dominance() {
  Outcome o;
  const auto t0 = Clock::now();
  auto cfg = load("source_sweep.conf");
  cfg.p_grid = {0.05, 0.1, 0.2, 0.3};
  std::string summary;
  for (double p : cfg.p_grid) {
    const auto none = design_scheme(cfg, Scheme::NoCoding, p).design.predicted_am_wmse;
    const auto plt = design_scheme(cfg, Scheme::Plt, p).design.predicted_am_wmse;
    const auto rtc = design_scheme(cfg, Scheme::RtcTc, p);
    const auto rc = design_scheme(cfg, Scheme::RcTc, p, rtc.design.transform).design.predicted_am_wmse;
    const double r = rtc.design.predicted_am_wmse;
    const std::string at = fmt(" at p=%.2f", p);
    o.require(none >= plt, "no-coding < PLT" + at);
    o.require(plt >= r, "PLT < RTC-TC" + at);
    o.require(r >= rc, "RTC-TC < RC-TC" + at);
    if (p >= 0.1) o.require(rc < plt, "RC-TC not below PLT" + at);
    summary += fmt(" p=%.2f:", p) + fmt("%.5f/", none) + fmt("%.5f/", plt) + fmt("%.5f/", r) + fmt("%.5f", rc);
  }
  const double t = seconds_since(t0);
  o.require(t < 600.0, fmt("runtime %.1fs", t));
  if (o.pass) o.detail = "none/plt/rtc/rc" + summary + fmt(", %.1fs", t);
  return o;
}

// 8. Lossless recovery of the prediction transform.
Outcome lossless_recovery() {
  Outcome o;
  const int n = 6;
  const auto model = ChannelModel::from_violation_probability(std::exp(-30.0), 0.05, 0.0125, n);
  const DesignProblem prob{ar1_covariance(0.9, 1.0, n),
                           availability_stats(model, 2000, 9, DelayCorrelation::MonteCarlo),
                           Matrix::Identity(n, n),
                           5.0,
                           n,
                           1,
                           TransformKind::Full,
                           1.0,
                           0.0,
                           {},
                           std::nullopt};
  const auto res = design_code(prob, SearchConfig{});
  const auto plt = plt_design(prob.k_x, 1).transform;
  const double plt_obj = uniform_rate_objective(plt, AvailabilityMoments(prob.stats), prob.k_x.matrix(), prob.weight, 5.0, 1.0);
  const double rel = std::abs(res.search_objective - plt_obj) / plt_obj;
  const double enc = (res.transform.encoder() - plt.encoder()).cwiseAbs().maxCoeff();
  const double dec = (res.transform.decoder() - plt.decoder()).cwiseAbs().maxCoeff();
  o.require(rel < 1e-3, fmt("objective differs by %.3g", rel));
  o.require(enc < 1e-3 && dec < 1e-3, fmt2("entry deviation enc %.3g dec %.3g", enc, dec));
  if (o.pass) o.detail = fmt("objective rel. diff %.2g, ", rel) + fmt2("max entry diff enc %.2g dec %.2g", enc, dec);
  return o;
}

// 9. Closed-loop consistency and ranking.
Outcome closed_loop() {
  Outcome o;
  const auto t0 = Clock::now();
  std::string summary;
  auto check_ranking = [&](const std::vector<ResultRow>& rows, const char* tag) {
    for (const auto& base : rows) {
      if (base.scheme != Scheme::NoCoding) continue;
      for (const auto& r : rows) {
        if (r.p != base.p || r.scheme == Scheme::NoCoding) continue;
        if (!(r.analytic < base.analytic)) {
          o.require(false, std::string(tag) + " " + to_string(r.scheme) + fmt(" not below no-coding at p=%.2f", r.p) +
                               fmt2(" (%.5f vs %.5f)", r.analytic, base.analytic));
        }
      }
    }
  };
  auto cfg = load("lqg_sweep.conf");
  const auto r5 = run_lqg_experiment(cfg);
  check_ranking(r5, "r=5");

  cfg.rate = 8.0;
  cfg.p_grid = {0.05, 0.1};
  cfg.horizon = 1000000;
  const auto r8 = run_lqg_experiment(cfg);
  check_ranking(r8, "r=8");
  for (const auto& r : r8) {
    const double z = (r.simulated - r.analytic) / r.standard_error;
    summary += " " + std::string(to_string(r.scheme)) + fmt("@%.2f:", r.p) + fmt("%+.2fSE", z);
    if (!(std::abs(z) <= 3.0)) {
      o.require(false, std::string(to_string(r.scheme)) + fmt(" at p=%.2f", r.p) + fmt(" off by %.2f SE", z));
    }
  }
  const double t = seconds_since(t0);
  o.require(t < 900.0, fmt("runtime %.1fs", t));
  o.detail += (o.detail.empty() ? "" : " |") + summary + fmt(", %.1fs", t);
  return o;
}

// 10. Byte-identical CLI output.
Outcome determinism() {
  Outcome o;
#ifdef RCTC_CLI_PATH
  namespace fs = std::filesystem;
  const fs::path dir = fs::temp_directory_path() / ("rctc_accept_" + std::to_string(::getpid()));
  fs::create_directories(dir);
  const std::string cli = RCTC_CLI_PATH;
  const std::string cfgdir = RCTC_CONFIG_DIR;
  {
    std::ofstream small(dir / "lqg.conf");
    small << "experiment = lqg\nframe_length = 8\nrate = 5\np_grid = 0.1, 0.2\nhorizon = 50000\n"
             "pilot_horizon = 20000\ndesign_samples = 300\nbatch_count = 50\nseed = 11\n";
  }
  struct Run {
    std::string name;
    std::string args;
  };
  const std::vector<Run> runs{
      {"sweep_source", "sweep --config " + cfgdir + "/source_sweep.conf --seed 5"},
      {"sweep_lqg", "sweep --config " + (dir / "lqg.conf").string()},
      {"design", "design --config " + cfgdir + "/source_sweep.conf --scheme rc_tc --p 0.2"},
      {"simulate", "simulate --config " + (dir / "lqg.conf").string() + " --scheme rtc_tc"},
      {"riccati", "riccati --config " + cfgdir + "/plant.conf"},
  };
  auto slurp = [](const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    return std::string(std::istreambuf_iterator<char>(in), {});
  };
  for (const auto& run : runs) {
    std::string outputs[2];
    for (int k = 0; k < 2; ++k) {
      const fs::path out = dir / (run.name + std::to_string(k) + ".out");
      const std::string cmd = cli + " " + run.args + " --out " + out.string() + " 2>/dev/null";
      const int rc = std::system(cmd.c_str());
      o.require(rc == 0, run.name + " exited nonzero");
      outputs[k] = slurp(out);
    }
    o.require(!outputs[0].empty() && outputs[0] == outputs[1], run.name + " output differs between runs");
  }
  fs::remove_all(dir);
  if (o.pass) o.detail = "sweep (source, lqg), design, simulate, riccati byte-identical on repeat";
#else
  o.require(false, "command line tool not built");
#endif
  return o;
}

}  // namespace

int main(int argc, char** argv) {
  const std::vector<std::pair<const char*, std::function<Outcome()>>> criteria{
      {"Riccati correctness", riccati},
      {"rate allocation", rate_allocation},
      {"codec round trip", codec_round_trip},
      {"PLT decorrelation", plt_decorrelation},
      {"exhaustive availability oracle", exhaustive_oracle},
      {"low-loss limit and cost identity", remark_limit},
      {"design dominance", dominance},
      {"lossless recovery", lossless_recovery},
      {"closed-loop consistency", closed_loop},
      {"CLI determinism", determinism},
  };
  int only = 0;
  if (argc > 1) only = std::atoi(argv[1]);
  bool all = true;
  for (std::size_t i = 0; i < criteria.size(); ++i) {
    const int id = static_cast<int>(i) + 1;
    if (only != 0 && only != id) continue;
    Outcome out;
    try {
      out = criteria[i].second();
    } catch (const std::exception& e) {
      out.pass = false;
      out.detail = std::string("exception: ") + e.what();
    }
    all = all && out.pass;
    std::printf("[%s] %2d %s: %s\n", out.pass ? "PASS" : "FAIL", id, criteria[i].first, out.detail.c_str());
    std::fflush(stdout);
  }
  return all ? 0 : 1;
}
