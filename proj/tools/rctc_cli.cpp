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

// Command line front end: design, simulate, sweep, riccati.

#include <CLI11.hpp>

#include <cstdint>
#include <fstream>
#include <iostream>
#include <memory>
#include <optional>
#include <string>

#include "rctc/config.hpp"
#include "rctc/designer.hpp"
#include "rctc/error.hpp"
#include "rctc/format.hpp"
#include "rctc/harness.hpp"
#include "rctc/lqg.hpp"
#include "rctc/random.hpp"

namespace {

struct Options {
  std::string config;
  std::string out;
  std::optional<std::uint64_t> seed;
  std::string scheme;
  std::optional<double> p;
  std::string design;
};

// Writes to --out when given, otherwise to stdout.
class Sink {
 public:
  explicit Sink(const std::string& path) {
    if (!path.empty()) {
      file_ = std::make_unique<std::ofstream>(path, std::ios::binary);
      if (!*file_) throw std::runtime_error("cannot open output file '" + path + "'");
    }
  }
  std::ostream& stream() { return file_ ? *file_ : std::cout; }

 private:
  std::unique_ptr<std::ofstream> file_;
};

rctc::ExperimentConfig load_experiment(const Options& opt) {
  const auto cfg = rctc::KeyValueConfig::load(opt.config);
  auto exp = rctc::ExperimentConfig::from_config(cfg);
  if (opt.seed) exp.seed = *opt.seed;
  return exp;
}

rctc::Scheme pick_scheme(const Options& opt, const rctc::ExperimentConfig& exp) {
  return opt.scheme.empty() ? exp.schemes.front() : rctc::scheme_from_string(opt.scheme);
}

double pick_p(const Options& opt, const rctc::ExperimentConfig& exp) { return opt.p ? *opt.p : exp.p_grid.front(); }

int run_design(const Options& opt) {
  const auto exp = load_experiment(opt);
  const auto sd = rctc::design_scheme(exp, pick_scheme(opt, exp), pick_p(opt, exp));
  Sink sink(opt.out.empty() ? exp.output : opt.out);
  rctc::write_design(sink.stream(), sd.design);
  return 0;
}

int run_simulate(const Options& opt) {
  const auto exp = load_experiment(opt);
  if (exp.kind != rctc::ExperimentKind::ClosedLoopLqg) {
    throw rctc::ConfigError("experiment", "simulate needs experiment = lqg");
  }
  const rctc::Scheme scheme = pick_scheme(opt, exp);
  const double p = pick_p(opt, exp);
  rctc::DesignResult design;
  if (!opt.design.empty()) {
    std::ifstream in(opt.design);
    if (!in) throw std::runtime_error("cannot open design file '" + opt.design + "'");
    design = rctc::read_design(in);
  } else {
    design = rctc::design_scheme(exp, scheme, p).design;
  }
  const auto solution = rctc::solve_controller(exp.plant, exp.weights);
  rctc::ClosedLoopOptions run;
  run.horizon = exp.horizon;
  run.burn_in = exp.burn_in;
  run.correlation = exp.correlation;
  run.batch_count = exp.batch_count;
  run.record_trace = true;
  const auto result = rctc::simulate_closed_loop(exp.plant, exp.weights, solution, design.transform,
                                                 rctc::bank_for(exp, design), exp.channel_for(p), run,
                                                 rctc::derive_seed(exp.seed, {20, static_cast<std::uint64_t>(scheme)}));
  Sink sink(opt.out.empty() ? exp.output : opt.out);
  rctc::write_trace_csv(sink.stream(), result.trace);
  std::cerr << "cost " << rctc::format_double(result.empirical_cost) << " stderr "
            << rctc::format_double(result.standard_error) << (result.diverged ? " diverged" : "") << '\n';
  return result.diverged ? 1 : 0;
}

int run_sweep(const Options& opt) {
  const auto exp = load_experiment(opt);
  const auto rows = rctc::run_experiment(exp);
  Sink sink(opt.out.empty() ? exp.output : opt.out);
  rctc::write_results_csv(sink.stream(), rows);
  return 0;
}

void print_matrix(std::ostream& os, const char* name, const rctc::Matrix& m) {
  os << name << " =";
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    os << (i == 0 ? " " : "; ");
    for (Eigen::Index j = 0; j < m.cols(); ++j) os << (j == 0 ? "" : ", ") << rctc::format_double(m(i, j));
  }
  os << '\n';
}

int run_riccati(const Options& opt) {
  const auto cfg = rctc::KeyValueConfig::load(opt.config);
  const auto plant = rctc::plant_from_config(cfg);
  const auto weights = rctc::weights_from_config(cfg);
  weights.validate(plant);
  const rctc::Matrix p = rctc::solve_riccati(plant, weights);
  Sink sink(opt.out);
  print_matrix(sink.stream(), "P", p);
  print_matrix(sink.stream(), "L", rctc::ce_gain(p, plant, weights));
  print_matrix(sink.stream(), "R_eq", rctc::weight_req(p, plant, weights));
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Causal transform coding for LQG control over a random-delay channel"};
  app.require_subcommand(1, 1);
  Options opt;

  auto add_common = [&](CLI::App* sub, bool needs_experiment) {
    sub->add_option("--config", opt.config, "key = value configuration file")->required();
    sub->add_option("--out", opt.out, "output path (default: config 'output', then stdout)");
    if (needs_experiment) {
      sub->add_option("--seed", opt.seed, "master seed, overrides the config");
    }
  };
  auto* design = app.add_subcommand("design", "design one scheme and write a design file");
  add_common(design, true);
  design->add_option("--scheme", opt.scheme, "no_coding | plt | rtc_tc | rc_tc");
  design->add_option("--p", opt.p, "delay violation probability");
  auto* simulate = app.add_subcommand("simulate", "one closed-loop run, writes a trace CSV");
  add_common(simulate, true);
  simulate->add_option("--scheme", opt.scheme, "no_coding | plt | rtc_tc | rc_tc");
  simulate->add_option("--p", opt.p, "delay violation probability");
  simulate->add_option("--design", opt.design, "design file to use instead of designing");
  auto* sweep = app.add_subcommand("sweep", "run the configured experiment, writes a results CSV");
  add_common(sweep, true);
  auto* riccati = app.add_subcommand("riccati", "print P, L and R_eq for a plant");
  add_common(riccati, false);
  riccati->add_option("--seed", opt.seed, "ignored");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    std::cerr << "error: " << e.what() << "\n\n" << app.help();
    return 2;
  }

  try {
    if (*design) return run_design(opt);
    if (*simulate) return run_simulate(opt);
    if (*sweep) return run_sweep(opt);
    if (*riccati) return run_riccati(opt);
  } catch (const std::exception& e) {
    std::cerr << "rctc: " << e.what() << '\n';
    return 1;
  }
  return 2;
}
