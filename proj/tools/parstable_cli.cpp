#include <cstdint>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "parstable/errors.hpp"
#include "parstable/estimation.hpp"
#include "parstable/monte_carlo.hpp"
#include "parstable/par_model.hpp"
#include "parstable/pipeline.hpp"

namespace fs = std::filesystem;
using namespace parstable;

namespace {

constexpr int kExitUsage = 1;
constexpr int kExitData = 2;
constexpr int kExitNumerical = 3;

// Shared flags; config values fill whatever was not given on the command line.
struct Common {
  std::string config_path;
  std::string out = "-";
  std::size_t period = 0;
  std::string method = "yw-cv";
  std::uint64_t seed = 1;
  std::optional<double> alpha;
  PipelineConfig config;

  CLI::Option* period_opt = nullptr;
  CLI::Option* method_opt = nullptr;
  CLI::Option* seed_opt = nullptr;
  CLI::Option* alpha_opt = nullptr;

  void load_config() {
    if (config_path.empty()) return;
    std::ifstream in(config_path);
    if (!in) throw DataError("cannot open config file " + config_path);
    config = parse_pipeline_config(in);
    if (period_opt && period_opt->count() == 0 && config.period) period = *config.period;
    if (method_opt && method_opt->count() == 0 && config.method) {
      method = *config.method == Method::YwCv ? "yw-cv" : "yw-t";
    }
    if (seed_opt && seed_opt->count() == 0 && config.seed) seed = *config.seed;
    if (alpha_opt && alpha_opt->count() == 0 && config.alpha) alpha = config.alpha;
  }

  std::size_t require_period() const {
    if (period < 1) throw std::invalid_argument("--period is required (or set it in --config)");
    return period;
  }
};

void add_common(CLI::App* app, Common& c, bool with_period, bool with_method) {
  app->add_option("--config", c.config_path, "JSON config file")->check(CLI::ExistingFile);
  app->add_option("--out", c.out, "output path ('-' for stdout)");
  c.seed_opt = app->add_option("--seed", c.seed, "base random seed");
  if (with_period) c.period_opt = app->add_option("--period", c.period, "period T")->check(CLI::PositiveNumber);
  if (with_method) {
    c.method_opt = app->add_option("--method", c.method, "estimator")
                       ->check(CLI::IsMember({"yw-cv", "yw-t"}, CLI::ignore_case));
    c.alpha_opt = app->add_option("--alpha", c.alpha, "stability index for yw-t");
  }
}

template <class Fn>
void with_output(const std::string& path, Fn&& fn) {
  if (path == "-" || path.empty()) {
    fn(std::cout);
    return;
  }
  std::ofstream os(path);
  if (!os) throw DataError("cannot write " + path);
  fn(os);
}

MultiTrajectory read_input(const std::string& path, const CsvColumns& cols) {
  if (path == "-") return read_trajectory_csv(std::cin, cols);
  std::ifstream in(path);
  if (!in) throw DataError("cannot open " + path);
  return read_trajectory_csv(in, cols);
}

ParModel load_model(const std::string& preset, const std::string& model_path, double alpha) {
  if (!model_path.empty()) {
    std::ifstream in(model_path);
    if (!in) throw DataError("cannot open " + model_path);
    return read_model_json(in);
  }
  if (preset == "model1") return model1_preset(alpha);
  if (preset == "model2") return model2_preset(alpha);
  throw std::invalid_argument("unknown preset '" + preset + "'");
}

DeterministicComponents load_det(const std::string& path, const ParModel& model) {
  if (path.empty()) {
    DeterministicComponents det;
    det.period = model.period();
    det.intercept.assign(model.dim(), 0.0);
    det.slope.assign(model.dim(), 0.0);
    det.periodic_mean.assign(model.dim(), std::vector<double>(model.period(), 0.0));
    return det;
  }
  std::ifstream in(path);
  if (!in) throw DataError("cannot open " + path);
  return read_deterministic_json(in);
}

std::vector<double> default_quantiles(const Common& c, const std::vector<double>& given) {
  if (!given.empty()) return given;
  if (c.config.quantiles) return *c.config.quantiles;
  return {0.1, 0.5, 0.9};
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Simulation and estimation of periodic autoregressive alpha-stable models"};
  app.require_subcommand(1);

  // simulate
  Common sim_c;
  std::string sim_preset = "model1", sim_model;
  double sim_alpha = 1.8;
  std::size_t sim_length = 1000;
  std::optional<std::size_t> sim_burn;
  auto* sim = app.add_subcommand("simulate", "simulate a trajectory to CSV");
  add_common(sim, sim_c, false, false);
  sim->add_option("--preset", sim_preset, "built-in model")->check(CLI::IsMember({"model1", "model2"}));
  sim->add_option("--model", sim_model, "model JSON file (overrides --preset)")->check(CLI::ExistingFile);
  auto* sim_alpha_opt = sim->add_option("--alpha", sim_alpha, "stability index for a preset");
  sim->add_option("--length,-L", sim_length, "trajectory length")->check(CLI::PositiveNumber);
  sim->add_option("--burn-in", sim_burn, "discarded transient steps");

  // estimate
  Common est_c;
  std::string est_input = "-";
  auto* est = app.add_subcommand("estimate", "estimate coefficients from a trajectory CSV");
  add_common(est, est_c, true, true);
  est->add_option("--input,-i", est_input, "trajectory CSV with header t,x1,...,xm");

  // mc-study
  Common mc_c;
  std::string mc_preset = "model1";
  std::vector<std::size_t> mc_lengths{1000};
  std::vector<double> mc_alphas{1.1, 1.2, 1.3, 1.4, 1.5, 1.6, 1.7, 1.8, 1.9};
  std::vector<std::string> mc_methods{"yw-cv", "yw-t"};
  std::size_t mc_reps = 200, mc_threads = 1;
  auto* mc = app.add_subcommand("mc-study", "Monte Carlo study to long-format CSV");
  add_common(mc, mc_c, false, false);
  mc->add_option("--preset", mc_preset, "built-in model")->check(CLI::IsMember({"model1", "model2"}));
  mc->add_option("--lengths", mc_lengths, "trajectory lengths")->delimiter(',');
  mc->add_option("--alphas", mc_alphas, "stability indices")->delimiter(',');
  mc->add_option("--methods", mc_methods, "estimators")->delimiter(',');
  mc->add_option("--replicates,-M", mc_reps, "replicates per cell");
  mc->add_option("--threads", mc_threads, "worker threads");

  // fit
  Common fit_c;
  std::string fit_input = "-", fit_time = "t";
  std::vector<std::string> fit_columns;
  std::size_t fit_hmax = 10, fit_nsims = 1000;
  auto* fit = app.add_subcommand("fit", "fit deterministic part, coefficients and diagnostics");
  add_common(fit, fit_c, true, true);
  fit->add_option("--input,-i", fit_input, "raw data CSV");
  fit->add_option("--time-column", fit_time, "name of the time column");
  fit->add_option("--columns", fit_columns, "value columns to use, in order")->delimiter(',');
  auto* fit_hmax_opt = fit->add_option("--h-max", fit_hmax, "largest lag of the covariation screens");
  auto* fit_nsims_opt = fit->add_option("--n-sims", fit_nsims, "Anderson-Darling simulations (0 skips)");

  // quantile-lines
  Common ql_c;
  std::string ql_model, ql_det;
  std::size_t ql_length = 0, ql_paths = 5000;
  std::vector<double> ql_qs;
  auto* ql = app.add_subcommand("quantile-lines", "pointwise quantiles of simulated paths");
  add_common(ql, ql_c, false, false);
  ql->add_option("--model", ql_model, "model JSON from fit")->required()->check(CLI::ExistingFile);
  ql->add_option("--deterministic", ql_det, "deterministic JSON from fit")->check(CLI::ExistingFile);
  ql->add_option("--length,-L", ql_length, "path length")->required()->check(CLI::PositiveNumber);
  auto* ql_paths_opt = ql->add_option("--n-paths", ql_paths, "simulated paths");
  ql->add_option("--quantiles", ql_qs, "quantile orders")->delimiter(',');

  // one-step
  Common os_c;
  std::string os_model, os_det, os_input = "-", os_time = "t";
  std::vector<std::string> os_columns;
  std::size_t os_paths = 5000;
  std::vector<double> os_qs;
  auto* one = app.add_subcommand("one-step", "one-step-ahead conditional quantiles");
  add_common(one, os_c, false, false);
  one->add_option("--model", os_model, "model JSON from fit")->required()->check(CLI::ExistingFile);
  one->add_option("--deterministic", os_det, "deterministic JSON from fit")->check(CLI::ExistingFile);
  one->add_option("--input,-i", os_input, "observed data CSV");
  one->add_option("--time-column", os_time, "name of the time column");
  one->add_option("--columns", os_columns, "value columns to use, in order")->delimiter(',');
  auto* os_paths_opt = one->add_option("--n-paths", os_paths, "noise draws per time step");
  one->add_option("--quantiles", os_qs, "quantile orders")->delimiter(',');

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? 0 : kExitUsage;
  }

  try {
    if (sim->parsed()) {
      sim_c.load_config();
      if (sim_alpha_opt->count() == 0 && sim_c.config.alpha) sim_alpha = *sim_c.config.alpha;
      if (!sim_burn && sim_c.config.burn_in) sim_burn = sim_c.config.burn_in;
      const ParModel model = load_model(sim_preset, sim_model, sim_alpha);
      RandomStream rng(sim_c.seed);
      SimulationOptions opts;
      opts.burn_in = sim_burn;
      const auto traj = simulate_par1(model, sim_length, rng, opts);
      with_output(sim_c.out, [&](std::ostream& os) { write_trajectory_csv(os, traj); });
    } else if (est->parsed()) {
      est_c.load_config();
      const auto traj = read_input(est_input, {});
      const auto res = estimate(traj, est_c.require_period(), parse_method(est_c.method), est_c.alpha);
      for (std::size_t v = 0; v < res.reports.size(); ++v) {
        if (!res.reports[v].converged) {
          std::cerr << "warning: phase " << (v + 1) << ": " << res.reports[v].detail << '\n';
        }
      }
      with_output(est_c.out, [&](std::ostream& os) { write_estimates_csv(os, res.theta_hat); });
    } else if (mc->parsed()) {
      mc_c.load_config();
      McConfig cfg{mc_preset == "model1" ? model1_preset() : model2_preset()};
      cfg.lengths = mc_lengths;
      cfg.alphas = mc_alphas;
      cfg.methods.clear();
      for (const auto& m : mc_methods) cfg.methods.push_back(parse_method(m));
      cfg.replicates = mc_reps;
      cfg.threads = mc_threads;
      cfg.seed = mc_c.seed;
      if (mc_c.config.burn_in) cfg.simulation.burn_in = mc_c.config.burn_in;
      const auto report = run_mc_study(cfg);
      for (const auto& f : report.failures) {
        if (f.failed > 0) {
          std::cerr << to_string(f.method) << " alpha=" << f.alpha << " L=" << f.length << ": "
                    << f.failed << " of " << f.attempted << " replicates failed\n";
        }
      }
      with_output(mc_c.out, [&](std::ostream& os) { write_mc_csv(os, report); });
    } else if (fit->parsed()) {
      fit_c.load_config();
      if (fit_hmax_opt->count() == 0 && fit_c.config.h_max) fit_hmax = *fit_c.config.h_max;
      if (fit_nsims_opt->count() == 0 && fit_c.config.n_sims) fit_nsims = *fit_c.config.n_sims;
      const auto traj = read_input(fit_input, CsvColumns{fit_time, fit_columns});
      FitOptions opts;
      opts.method = parse_method(fit_c.method);
      opts.alpha = fit_c.alpha;
      opts.h_max = fit_hmax;
      opts.n_sims = fit_nsims;
      opts.seed = fit_c.seed;
      const auto res = fit_par1(traj, fit_c.require_period(), opts);
      if (fit_c.out == "-") {
        write_estimates_csv(std::cout, res.estimation.theta_hat);
        std::cout << '\n';
        write_diagnostics_table(std::cout, res.diagnostics);
      } else {
        const fs::path dir(fit_c.out);
        fs::create_directories(dir);
        auto put = [&](const char* name, auto&& fn) { with_output((dir / name).string(), fn); };
        put("coefficients.csv", [&](std::ostream& os) { write_estimates_csv(os, res.estimation.theta_hat); });
        put("diagnostics.csv", [&](std::ostream& os) { write_diagnostics_table(os, res.diagnostics); });
        put("ncv.csv", [&](std::ostream& os) { write_ncv_csv(os, res.diagnostics); });
        put("residuals.csv", [&](std::ostream& os) { write_trajectory_csv(os, res.residuals); });
        put("model.json", [&](std::ostream& os) { write_model_json(os, res.model); });
        put("deterministic.json", [&](std::ostream& os) { write_deterministic_json(os, res.deterministic); });
      }
    } else if (ql->parsed()) {
      ql_c.load_config();
      if (ql_paths_opt->count() == 0 && ql_c.config.n_paths) ql_paths = *ql_c.config.n_paths;
      const ParModel model = load_model("", ql_model, 0.0);
      const auto det = load_det(ql_det, model);
      RandomStream rng(ql_c.seed);
      const auto paths = simulate_quantile_lines(model, det, ql_paths, default_quantiles(ql_c, ql_qs),
                                                 ql_length, rng, ql_c.config.burn_in);
      with_output(ql_c.out, [&](std::ostream& os) { write_quantile_paths_csv(os, paths); });
    } else if (one->parsed()) {
      os_c.load_config();
      if (os_paths_opt->count() == 0 && os_c.config.n_paths) os_paths = *os_c.config.n_paths;
      const ParModel model = load_model("", os_model, 0.0);
      const auto det = load_det(os_det, model);
      const auto traj = read_input(os_input, CsvColumns{os_time, os_columns});
      RandomStream rng(os_c.seed);
      const auto paths = one_step_quantiles(model, det, traj, default_quantiles(os_c, os_qs), os_paths, rng);
      with_output(os_c.out, [&](std::ostream& os) { write_quantile_paths_csv(os, paths); });
    }
  } catch (const DataError& e) {
    std::cerr << "data error: " << e.what() << '\n';
    return kExitData;
  } catch (const NumericalError& e) {
    std::cerr << "numerical failure: " << e.what() << '\n';
    return kExitNumerical;
  } catch (const std::invalid_argument& e) {
    std::cerr << "invalid input: " << e.what() << '\n';
    return kExitData;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitUsage;
  }
  return 0;
}
