#include <optional>
#include <string>
#include <vector>

#include <pybind11/eigen.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "parstable/covariation.hpp"
#include "parstable/errors.hpp"
#include "parstable/estimation.hpp"
#include "parstable/monte_carlo.hpp"
#include "parstable/par_model.hpp"
#include "parstable/pipeline.hpp"
#include "parstable/solver.hpp"
#include "parstable/stable.hpp"

namespace py = pybind11;
using namespace parstable;

namespace {

py::dict solve_report_dict(const SolveReport& r) {
  py::dict d;
  d["method"] = std::string(to_string(r.method));
  d["iterations"] = r.iterations;
  d["residual_norm"] = r.residual_norm;
  d["converged"] = r.converged;
  d["inconsistent"] = r.inconsistent;
  d["detail"] = r.detail;
  return d;
}

py::dict estimation_dict(const EstimationResult& r) {
  py::dict d;
  d["theta"] = r.theta_hat;
  d["method"] = std::string(to_string(r.method));
  d["alpha_used"] = r.alpha_used;
  py::list reports;
  for (const auto& rep : r.reports) reports.append(solve_report_dict(rep));
  d["reports"] = reports;
  d["converged"] = r.all_converged();
  return d;
}

std::vector<Method> parse_methods(const std::vector<std::string>& names) {
  std::vector<Method> out;
  for (const auto& n : names) out.push_back(parse_method(n));
  return out;
}

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() = "alpha-stable PAR(1) simulation and estimation";

  auto base = py::register_exception<Error>(m, "Error", PyExc_RuntimeError);
  py::register_exception<DataError>(m, "DataError", base.ptr());
  py::register_exception<NumericalError>(m, "NumericalError", base.ptr());

  py::class_<ParModel>(m, "ParModel")
      .def(py::init([](std::vector<Eigen::MatrixXd> theta, double alpha, Eigen::MatrixXd points,
                       std::vector<double> weights) {
             return ParModel(std::move(theta), alpha,
                             DiscreteSpectralMeasure(std::move(points), std::move(weights)));
           }),
           py::arg("theta"), py::arg("alpha"), py::arg("points"), py::arg("weights"),
           "Coefficients Theta(1..T), stability index and noise atoms (columns of `points`).")
      .def_property_readonly("alpha", &ParModel::alpha)
      .def_property_readonly("period", &ParModel::period)
      .def_property_readonly("dim", &ParModel::dim)
      .def_property_readonly("theta", &ParModel::thetas)
      .def_property_readonly("noise_points",
                             [](const ParModel& p) { return p.noise().points(); })
      .def_property_readonly("noise_weights",
                             [](const ParModel& p) { return p.noise().weights(); })
      .def("with_alpha", &ParModel::with_alpha, py::arg("alpha"));

  m.def("model1_preset", &model1_preset, py::arg("alpha") = 1.8);
  m.def("model2_preset", &model2_preset, py::arg("alpha") = 1.8);

  m.def(
      "check_boundedness",
      [](const ParModel& model) {
        const auto r = check_boundedness(model);
        py::dict d;
        d["bounded"] = r.bounded;
        d["spectral_radius"] = r.spectral_radius;
        d["partial_abs_sum"] = r.partial_abs_sum;
        d["detail"] = r.detail;
        return d;
      },
      py::arg("model"));

  m.def(
      "simulate",
      [](const ParModel& model, std::size_t length, std::uint64_t seed,
         std::optional<std::size_t> burn_in) {
        RandomStream rng(seed);
        SimulationOptions opts;
        opts.burn_in = burn_in;
        RowMatrix x;
        {
          py::gil_scoped_release release;
          x = simulate_par1(model, length, rng, opts).values();
        }
        return x;
      },
      py::arg("model"), py::arg("length"), py::arg("seed") = 1, py::arg("burn_in") = py::none(),
      "m x L array of observations at t = 1..L.");

  m.def(
      "estimate",
      [](const RowMatrix& x, std::size_t period, const std::string& method,
         std::optional<double> alpha) {
        return estimation_dict(estimate(MultiTrajectory(x), period, parse_method(method), alpha));
      },
      py::arg("x"), py::arg("period"), py::arg("method") = "YW-CV", py::arg("alpha") = py::none());

  m.def(
      "solve_coefficients",
      [](const Eigen::MatrixXd& m0, const Eigen::MatrixXd& m1) {
        const auto r = solve_coefficients(m0, m1);
        py::dict d = solve_report_dict(r);
        d["solution"] = r.solution;
        return d;
      },
      py::arg("m0"), py::arg("m1"), "Theta with Theta m0 = m1.");

  m.def(
      "stable_cdf",
      [](const std::vector<double>& x, double alpha, double scale) {
        const StableParams p(alpha, scale);
        std::vector<double> out;
        out.reserve(x.size());
        for (double v : x) out.push_back(stable_cdf(p, v));
        return out;
      },
      py::arg("x"), py::arg("alpha"), py::arg("scale") = 1.0);

  m.def(
      "mcculloch_estimate",
      [](const std::vector<double>& sample) {
        const auto p = mcculloch_estimate(sample);
        return py::make_tuple(p.alpha, p.scale);
      },
      py::arg("sample"), "(alpha, scale) by the quantile method.");

  m.def(
      "ncv_auto", [](const std::vector<double>& x, long h) { return ncv_auto(x, h); },
      py::arg("x"), py::arg("h"));
  m.def(
      "ncv_cross",
      [](const std::vector<double>& xi, const std::vector<double>& xj, long h) {
        return ncv_cross(xi, xj, h);
      },
      py::arg("xi"), py::arg("xj"), py::arg("h"));

  m.def(
      "run_mc_study",
      [](const ParModel& model, std::vector<std::size_t> lengths, std::vector<double> alphas,
         std::size_t replicates, const std::vector<std::string>& methods, std::uint64_t seed,
         std::size_t threads) {
        McConfig cfg{model};
        cfg.lengths = std::move(lengths);
        cfg.alphas = std::move(alphas);
        cfg.replicates = replicates;
        cfg.methods = parse_methods(methods);
        cfg.seed = seed;
        cfg.threads = threads;
        McReport r;
        {
          py::gil_scoped_release release;
          r = run_mc_study(cfg);
        }
        py::list rows;
        for (const auto& c : r.cells) {
          py::dict d;
          d["method"] = std::string(to_string(c.method));
          d["alpha"] = c.alpha;
          d["L"] = c.length;
          d["v"] = c.v;
          d["i"] = c.i;
          d["j"] = c.j;
          d["median"] = c.median;
          d["q05"] = c.q05;
          d["q95"] = c.q95;
          d["true_value"] = c.true_value;
          rows.append(d);
        }
        return rows;
      },
      py::arg("model"), py::arg("lengths") = std::vector<std::size_t>{1000},
      py::arg("alphas") = std::vector<double>{1.5}, py::arg("replicates") = 200,
      py::arg("methods") = std::vector<std::string>{"YW-CV", "YW-T"}, py::arg("seed") = 1,
      py::arg("threads") = 1, "One row per (method, alpha, L, v, i, j) cell.");

  m.def(
      "fit",
      [](const RowMatrix& x, std::size_t period, const std::string& method,
         std::optional<double> alpha, std::size_t h_max, std::size_t n_sims, std::uint64_t seed) {
        FitOptions opts;
        opts.method = parse_method(method);
        opts.alpha = alpha;
        opts.h_max = h_max;
        opts.n_sims = n_sims;
        opts.seed = seed;
        std::optional<FitResult> r;
        {
          py::gil_scoped_release release;
          r.emplace(fit_par1(MultiTrajectory(x), period, opts));
        }
        py::dict d;
        d["estimation"] = estimation_dict(r->estimation);
        d["model"] = r->model;
        d["residuals"] = r->residuals.values();
        py::list comps;
        for (const auto& c : r->diagnostics.components) {
          py::dict cd;
          cd["alpha"] = c.alpha;
          cd["scale"] = c.scale;
          cd["ad_p_value"] = c.ad_p_value;
          cd["ad_statistic"] = c.ad_statistic;
          comps.append(cd);
        }
        d["diagnostics"] = comps;
        py::dict det;
        det["intercept"] = r->deterministic.intercept;
        det["slope"] = r->deterministic.slope;
        det["periodic_mean"] = r->deterministic.periodic_mean;
        d["deterministic"] = det;
        return d;
      },
      py::arg("x"), py::arg("period"), py::arg("method") = "YW-CV", py::arg("alpha") = py::none(),
      py::arg("h_max") = 10, py::arg("n_sims") = 0, py::arg("seed") = 1,
      "Detrend, estimate, and diagnose the residuals of an m x L series.");
}
