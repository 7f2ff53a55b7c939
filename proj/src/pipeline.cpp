#include "parstable/pipeline.hpp"

#include <algorithm>
#include <cmath>
#include <istream>
#include <numeric>
#include <ostream>
#include <sstream>
#include <stdexcept>

#include <nlohmann/json.hpp>

#include "parstable/covariation.hpp"
#include "parstable/csv.hpp"
#include "parstable/errors.hpp"
#include "parstable/format.hpp"
#include "parstable/stats.hpp"

namespace parstable {

using nlohmann::json;

// CSV input ------------------------------------------------------------------

MultiTrajectory read_trajectory_csv(std::istream& is, const CsvColumns& columns) {
  std::string line;
  if (!std::getline(is, line)) throw DataError("CSV input is empty");
  if (line.size() >= 3 && line.compare(0, 3, "\xEF\xBB\xBF") == 0) line.erase(0, 3);
  const auto header = split_csv_line(line);

  auto index_of = [&](const std::string& name) -> std::size_t {
    const auto it = std::find(header.begin(), header.end(), name);
    if (it == header.end()) throw DataError("CSV header lacks column '" + name + "'");
    return static_cast<std::size_t>(it - header.begin());
  };
  const std::size_t t_col = index_of(columns.time_column);
  std::vector<std::size_t> cols;
  if (columns.value_columns.empty()) {
    for (std::size_t c = 0; c < header.size(); ++c) {
      if (c != t_col) cols.push_back(c);
    }
  } else {
    for (const auto& name : columns.value_columns) cols.push_back(index_of(name));
  }
  if (cols.empty()) throw DataError("CSV has no value columns");

  std::vector<std::vector<double>> data(cols.size());
  std::size_t row = 1;
  while (std::getline(is, line)) {
    ++row;
    if (line.empty() || line == "\r") continue;
    const auto fields = split_csv_line(line);
    if (fields.size() != header.size()) {
      std::ostringstream os;
      os << "CSV row " << row << " has " << fields.size() << " fields, expected " << header.size();
      throw DataError(os.str());
    }
    if (fields[t_col].empty()) throw DataError("CSV row " + std::to_string(row) + " has no time label");
    for (std::size_t k = 0; k < cols.size(); ++k) {
      try {
        data[k].push_back(parse_csv_double(fields[cols[k]]));
      } catch (const DataError& e) {
        throw DataError("CSV row " + std::to_string(row) + ": " + e.what());
      }
    }
  }
  if (data.front().empty()) throw DataError("CSV has no data rows");
  RowMatrix values(static_cast<Eigen::Index>(cols.size()), static_cast<Eigen::Index>(data.front().size()));
  for (std::size_t k = 0; k < cols.size(); ++k) {
    values.row(static_cast<Eigen::Index>(k)) =
        Eigen::Map<const Eigen::RowVectorXd>(data[k].data(), static_cast<Eigen::Index>(data[k].size()));
  }
  return MultiTrajectory(std::move(values), 1);
}

// Deterministic components ---------------------------------------------------

namespace {

std::size_t phase_index(long t, std::size_t period) {
  const long T = static_cast<long>(period);
  long r = (t - 1) % T;
  if (r < 0) r += T;
  return static_cast<std::size_t>(r);
}

}  // namespace

double DeterministicComponents::value(std::size_t i, long t) const {
  return intercept.at(i) + slope.at(i) * static_cast<double>(t) +
         periodic_mean.at(i)[phase_index(t, period)];
}

std::pair<DeterministicComponents, MultiTrajectory> fit_deterministic(const MultiTrajectory& traj,
                                                                      std::size_t period) {
  if (period < 1) throw std::invalid_argument("period must be >= 1");
  if (traj.length() < 2 * period) throw DataError("trajectory shorter than two periods");
  const std::size_t m = traj.dim();
  const std::size_t L = traj.length();

  Eigen::VectorXd t(static_cast<Eigen::Index>(L));
  for (std::size_t k = 0; k < L; ++k) t(static_cast<Eigen::Index>(k)) = static_cast<double>(traj.t0() + static_cast<long>(k));
  const double t_mean = t.mean();
  const Eigen::VectorXd tc = t.array() - t_mean;
  const double stt = tc.squaredNorm();

  DeterministicComponents det;
  det.period = period;
  RowMatrix out(traj.values().rows(), traj.values().cols());
  for (std::size_t i = 0; i < m; ++i) {
    const auto ii = static_cast<Eigen::Index>(i);
    const Eigen::VectorXd y = traj.values().row(ii).transpose();
    const double y_mean = y.mean();
    const double b = stt > 0.0 ? tc.dot(y) / stt : 0.0;
    const double a = y_mean - b * t_mean;
    const Eigen::VectorXd detr = y.array() - a - b * t.array();

    std::vector<double> sums(period, 0.0);
    std::vector<std::size_t> counts(period, 0);
    for (std::size_t k = 0; k < L; ++k) {
      const std::size_t ph = phase_index(traj.t0() + static_cast<long>(k), period);
      sums[ph] += detr(static_cast<Eigen::Index>(k));
      ++counts[ph];
    }
    std::vector<double> pm(period);
    for (std::size_t ph = 0; ph < period; ++ph) pm[ph] = sums[ph] / static_cast<double>(counts[ph]);
    for (std::size_t k = 0; k < L; ++k) {
      const std::size_t ph = phase_index(traj.t0() + static_cast<long>(k), period);
      out(ii, static_cast<Eigen::Index>(k)) = detr(static_cast<Eigen::Index>(k)) - pm[ph];
    }
    det.intercept.push_back(a);
    det.slope.push_back(b);
    det.periodic_mean.push_back(std::move(pm));
  }
  return {std::move(det), MultiTrajectory(std::move(out), traj.t0())};
}

MultiTrajectory add_deterministic(const MultiTrajectory& traj, const DeterministicComponents& det) {
  if (det.dim() != traj.dim()) throw std::invalid_argument("deterministic part has wrong dimension");
  RowMatrix out = traj.values();
  for (std::size_t i = 0; i < traj.dim(); ++i) {
    for (std::size_t k = 0; k < traj.length(); ++k) {
      out(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(k)) +=
          det.value(i, traj.t0() + static_cast<long>(k));
    }
  }
  return MultiTrajectory(std::move(out), traj.t0());
}

// Diagnostics ----------------------------------------------------------------

DiagnosticsReport diagnose_residuals(const MultiTrajectory& residuals, std::size_t /*period*/,
                                     std::size_t h_max, std::size_t n_sims, RandomStream& rng) {
  const std::size_t m = residuals.dim();
  const std::size_t L = residuals.length();
  if (L < 200) throw DataError("residual diagnostics need at least 200 observations");
  if (h_max >= L) throw std::invalid_argument("h_max must be smaller than the series length");

  DiagnosticsReport rep;
  for (std::size_t i = 0; i < m; ++i) {
    const auto x = residuals.component(i);
    const StableParams fit = mcculloch_estimate(x);
    ComponentDiagnostics cd{fit.alpha, fit.scale, std::nullopt, std::nullopt};
    if (n_sims > 0) {
      RandomStream sub = rng.substream(i);
      const auto ad = ad_stable_test(x, n_sims, sub);
      cd.ad_p_value = ad.p_value;
      cd.ad_statistic = ad.statistic;
    }
    rep.components.push_back(cd);
  }

  const long H = static_cast<long>(h_max);
  for (long h = -H; h <= H; ++h) rep.lags.push_back(h);
  for (std::size_t i = 0; i < m; ++i) {
    std::vector<double> row;
    for (long h : rep.lags) row.push_back(ncv_auto(residuals.component(i), h));
    rep.auto_ncv.push_back(std::move(row));
    for (std::size_t j = 0; j < m; ++j) {
      if (i == j) continue;
      std::vector<double> cross;
      for (long h : rep.lags) cross.push_back(ncv_cross(residuals, i, j, h));
      rep.cross_ncv.emplace(std::make_pair(i, j), std::move(cross));
    }
  }

  if (m == 2) {
    double a = 0.0;
    for (const auto& c : rep.components) a += c.alpha;
    a = std::clamp(a / 2.0, 1.0001, 2.0);
    std::vector<double> x0(L), x1(L);
    for (std::size_t k = 0; k < L; ++k) {
      x0[k] = residuals.at(0, k + 1) / rep.components[0].scale;
      x1[k] = residuals.at(1, k + 1) / rep.components[1].scale;
    }
    rep.spectral_measure = estimate_spectral_measure_2d(x0, x1, a);
  }
  return rep;
}

void write_diagnostics_table(std::ostream& os, const DiagnosticsReport& report) {
  os << "residual,ad_p_value,alpha\n";
  for (std::size_t i = 0; i < report.components.size(); ++i) {
    const auto& c = report.components[i];
    os << 'Z' << (i + 1) << ',' << (c.ad_p_value ? format_double(*c.ad_p_value) : std::string("NA"))
       << ',' << format_double(c.alpha) << '\n';
  }
}

void write_ncv_csv(std::ostream& os, const DiagnosticsReport& report) {
  os << "lag,kind,i,j,ncv\n";
  for (std::size_t i = 0; i < report.auto_ncv.size(); ++i) {
    for (std::size_t k = 0; k < report.lags.size(); ++k) {
      os << report.lags[k] << ",auto," << (i + 1) << ',' << (i + 1) << ','
         << format_double(report.auto_ncv[i][k]) << '\n';
    }
  }
  for (const auto& [key, vals] : report.cross_ncv) {
    for (std::size_t k = 0; k < report.lags.size(); ++k) {
      os << report.lags[k] << ",cross," << (key.first + 1) << ',' << (key.second + 1) << ','
         << format_double(vals[k]) << '\n';
    }
  }
}

// Fitting --------------------------------------------------------------------

DiscreteSpectralMeasure fit_noise_measure(const MultiTrajectory& residuals, double alpha,
                                          const std::vector<ComponentDiagnostics>& marginals) {
  const std::size_t m = residuals.dim();
  if (marginals.size() != m) throw std::invalid_argument("one marginal fit per component needed");
  if (m == 2) {
    return estimate_spectral_measure_2d(residuals.component(0), residuals.component(1), alpha);
  }
  const auto mi = static_cast<Eigen::Index>(m);
  const Eigen::MatrixXd axes = Eigen::MatrixXd::Identity(mi, mi);
  std::vector<double> w;
  for (const auto& c : marginals) w.push_back(0.5 * std::pow(c.scale, alpha));
  return DiscreteSpectralMeasure::symmetrized(axes, w);
}

FitResult fit_par1(const MultiTrajectory& traj, std::size_t period, const FitOptions& options) {
  auto [det, detr] = fit_deterministic(traj, period);
  auto est = estimate(detr, period, options.method, options.alpha, options.estimation);
  auto res = par_residuals(detr, est.theta_hat);
  RandomStream rng(options.seed);
  auto diag = diagnose_residuals(res, period, options.h_max, options.n_sims, rng);
  double a = 0.0;
  for (const auto& c : diag.components) a += c.alpha;
  a = std::clamp(a / static_cast<double>(diag.components.size()), 1.0001, 2.0);
  auto noise = fit_noise_measure(res, a, diag.components);
  ParModel model(est.theta_hat, a, std::move(noise));
  return FitResult{std::move(det), std::move(est), std::move(res), std::move(diag), std::move(model)};
}

// Predictive simulation ------------------------------------------------------

namespace {

void check_quantile_orders(const std::vector<double>& qs) {
  if (qs.empty()) throw std::invalid_argument("no quantile orders given");
  for (double q : qs) {
    if (!(q >= 0.0 && q <= 1.0)) throw std::invalid_argument("quantile orders must lie in [0, 1]");
  }
}

}  // namespace

QuantilePaths simulate_quantile_lines(const ParModel& model, const DeterministicComponents& det,
                                      std::size_t n_paths, const std::vector<double>& qs,
                                      std::size_t length, RandomStream& rng,
                                      std::optional<std::size_t> burn_in) {
  if (n_paths < 100) throw std::invalid_argument("quantile lines need at least 100 paths");
  if (length < 1) throw std::invalid_argument("length must be >= 1");
  if (det.dim() != model.dim()) throw std::invalid_argument("deterministic part has wrong dimension");
  check_quantile_orders(qs);
  if (!check_boundedness(model).bounded) throw NumericalError("model is not bounded; cannot simulate");

  const auto m = static_cast<Eigen::Index>(model.dim());
  const std::size_t burn = burn_in.value_or(50 * model.period());
  std::vector<RandomStream> streams;
  streams.reserve(n_paths);
  for (std::size_t k = 0; k < n_paths; ++k) streams.push_back(rng.substream(k));

  QuantilePaths out;
  out.qs = qs;
  out.t0 = 1;
  out.lines.assign(qs.size(), RowMatrix(m, static_cast<Eigen::Index>(length)));

  Eigen::MatrixXd state = Eigen::MatrixXd::Zero(m, static_cast<Eigen::Index>(n_paths));
  std::vector<double> cross(n_paths);
  const long first = 1 - static_cast<long>(burn);
  for (long t = first; t <= static_cast<long>(length); ++t) {
    const Eigen::MatrixXd& th = model.theta_at(t);
    for (std::size_t k = 0; k < n_paths; ++k) {
      const auto kk = static_cast<Eigen::Index>(k);
      state.col(kk) = th * state.col(kk) + draw_stable_vector(model.noise(), model.alpha(), streams[k]);
    }
    if (t < 1) continue;
    for (Eigen::Index i = 0; i < m; ++i) {
      for (std::size_t k = 0; k < n_paths; ++k) cross[k] = state(i, static_cast<Eigen::Index>(k));
      const auto qv = quantiles(cross, qs);
      const double d = det.value(static_cast<std::size_t>(i), t);
      for (std::size_t q = 0; q < qs.size(); ++q) out.lines[q](i, t - 1) = qv[q] + d;
    }
  }
  return out;
}

QuantilePaths one_step_quantiles(const ParModel& model, const DeterministicComponents& det,
                                 const MultiTrajectory& traj, const std::vector<double>& qs,
                                 std::size_t n_paths, RandomStream& rng) {
  if (n_paths < 1) throw std::invalid_argument("n_paths must be >= 1");
  if (det.dim() != model.dim() || traj.dim() != model.dim()) {
    throw std::invalid_argument("model, deterministic part and data differ in dimension");
  }
  if (traj.length() < 2) throw DataError("one-step quantiles need at least two observations");
  check_quantile_orders(qs);

  const auto m = static_cast<Eigen::Index>(model.dim());
  const std::size_t L = traj.length();
  QuantilePaths out;
  out.qs = qs;
  out.t0 = traj.t0() + 1;
  out.lines.assign(qs.size(), RowMatrix(m, static_cast<Eigen::Index>(L - 1)));

  std::vector<double> draws(n_paths);
  for (std::size_t p = 2; p <= L; ++p) {
    const long t = traj.t0() + static_cast<long>(p) - 1;
    Eigen::VectorXd prev = traj.column(p - 1);
    for (Eigen::Index i = 0; i < m; ++i) prev(i) -= det.value(static_cast<std::size_t>(i), t - 1);
    const Eigen::VectorXd mean = model.theta_at(t) * prev;
    RandomStream sub = rng.substream(static_cast<std::uint64_t>(p));
    const Eigen::MatrixXd z = sample_stable_vector(model.noise(), model.alpha(), n_paths, sub);
    for (Eigen::Index i = 0; i < m; ++i) {
      for (std::size_t k = 0; k < n_paths; ++k) draws[k] = z(i, static_cast<Eigen::Index>(k));
      const auto qv = quantiles(draws, qs);
      const double base = mean(i) + det.value(static_cast<std::size_t>(i), t);
      for (std::size_t q = 0; q < qs.size(); ++q) {
        out.lines[q](i, static_cast<Eigen::Index>(p - 2)) = base + qv[q];
      }
    }
  }
  return out;
}

double band_coverage(const QuantilePaths& paths, const MultiTrajectory& traj) {
  if (paths.lines.empty()) throw std::invalid_argument("no quantile lines");
  const auto lo_it = std::min_element(paths.qs.begin(), paths.qs.end());
  const auto hi_it = std::max_element(paths.qs.begin(), paths.qs.end());
  const auto& lo = paths.lines[static_cast<std::size_t>(lo_it - paths.qs.begin())];
  const auto& hi = paths.lines[static_cast<std::size_t>(hi_it - paths.qs.begin())];
  const long start = std::max(paths.t0, traj.t0());
  const long end = std::min(paths.t0 + static_cast<long>(lo.cols()),
                            traj.t0() + static_cast<long>(traj.length()));
  if (end <= start || static_cast<Eigen::Index>(traj.dim()) != lo.rows()) {
    throw std::invalid_argument("quantile lines and data do not overlap");
  }
  std::size_t inside = 0, total = 0;
  for (Eigen::Index i = 0; i < lo.rows(); ++i) {
    for (long t = start; t < end; ++t) {
      const double x = traj.values()(i, t - traj.t0());
      const auto c = static_cast<Eigen::Index>(t - paths.t0);
      inside += (x >= lo(i, c) && x <= hi(i, c)) ? 1 : 0;
      ++total;
    }
  }
  return static_cast<double>(inside) / static_cast<double>(total);
}

void write_quantile_paths_csv(std::ostream& os, const QuantilePaths& paths) {
  if (paths.lines.empty()) return;
  const Eigen::Index m = paths.lines.front().rows();
  os << "t,q";
  for (Eigen::Index i = 0; i < m; ++i) os << ",x" << (i + 1);
  os << '\n';
  for (Eigen::Index c = 0; c < paths.lines.front().cols(); ++c) {
    for (std::size_t q = 0; q < paths.qs.size(); ++q) {
      os << (paths.t0 + c) << ',' << format_double(paths.qs[q]);
      for (Eigen::Index i = 0; i < m; ++i) os << ',' << format_double(paths.lines[q](i, c));
      os << '\n';
    }
  }
}

// Configuration --------------------------------------------------------------

namespace {

json parse_json(std::istream& is, const char* what) {
  try {
    return json::parse(is);
  } catch (const json::exception& e) {
    throw DataError(std::string(what) + ": " + e.what());
  }
}

template <class T>
T get_as(const json& j, const char* key) {
  try {
    return j.at(key).get<T>();
  } catch (const json::exception& e) {
    throw DataError(std::string("field '") + key + "': " + e.what());
  }
}

std::size_t get_count(const json& j, const char* key) {
  const auto it = j.find(key);
  if (it == j.end()) throw DataError(std::string("missing field '") + key + "'");
  const json& v = *it;
  if (!v.is_number_unsigned()) throw DataError(std::string("field '") + key + "' must be a non-negative integer");
  return v.get<std::size_t>();
}

}  // namespace

PipelineConfig parse_pipeline_config(std::istream& is) {
  const json j = parse_json(is, "config");
  if (!j.is_object()) throw DataError("config must be a JSON object");
  PipelineConfig c;
  for (const auto& [key, value] : j.items()) {
    if (key == "period") {
      c.period = get_count(j, "period");
    } else if (key == "method") {
      try {
        c.method = parse_method(get_as<std::string>(j, "method"));
      } catch (const std::invalid_argument& e) {
        throw DataError(e.what());
      }
    } else if (key == "alpha") {
      if (!value.is_null()) c.alpha = get_as<double>(j, "alpha");
    } else if (key == "burn_in") {
      c.burn_in = get_count(j, "burn_in");
    } else if (key == "seed") {
      c.seed = get_count(j, "seed");
    } else if (key == "n_paths") {
      c.n_paths = get_count(j, "n_paths");
    } else if (key == "quantiles") {
      c.quantiles = get_as<std::vector<double>>(j, "quantiles");
    } else if (key == "h_max") {
      c.h_max = get_count(j, "h_max");
    } else if (key == "n_sims") {
      c.n_sims = get_count(j, "n_sims");
    } else {
      throw DataError("unknown config key '" + key + "'");
    }
  }
  return c;
}

// Model files ----------------------------------------------------------------

namespace {

json matrix_to_json(const Eigen::MatrixXd& a) {
  json rows = json::array();
  for (Eigen::Index i = 0; i < a.rows(); ++i) {
    json row = json::array();
    for (Eigen::Index j = 0; j < a.cols(); ++j) row.push_back(a(i, j));
    rows.push_back(std::move(row));
  }
  return rows;
}

Eigen::MatrixXd matrix_from_json(const json& rows) {
  if (!rows.is_array() || rows.empty()) throw DataError("matrix must be a non-empty array of rows");
  const std::size_t n_cols = rows.front().size();
  Eigen::MatrixXd a(static_cast<Eigen::Index>(rows.size()), static_cast<Eigen::Index>(n_cols));
  for (std::size_t i = 0; i < rows.size(); ++i) {
    if (!rows[i].is_array() || rows[i].size() != n_cols) throw DataError("ragged matrix");
    for (std::size_t j = 0; j < n_cols; ++j) {
      if (!rows[i][j].is_number()) throw DataError("matrix entries must be numbers");
      a(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = rows[i][j].get<double>();
    }
  }
  return a;
}

}  // namespace

void write_model_json(std::ostream& os, const ParModel& model) {
  json j;
  j["alpha"] = model.alpha();
  j["theta"] = json::array();
  for (const auto& th : model.thetas()) j["theta"].push_back(matrix_to_json(th));
  j["noise"]["points"] = matrix_to_json(model.noise().points().transpose());
  j["noise"]["weights"] = model.noise().weights();
  os << j.dump(2) << '\n';
}

ParModel read_model_json(std::istream& is) {
  const json j = parse_json(is, "model file");
  try {
    const double alpha = get_as<double>(j, "alpha");
    std::vector<Eigen::MatrixXd> theta;
    for (const auto& th : j.at("theta")) theta.push_back(matrix_from_json(th));
    Eigen::MatrixXd pts = matrix_from_json(j.at("noise").at("points")).transpose();
    auto weights = get_as<std::vector<double>>(j.at("noise"), "weights");
    return ParModel(std::move(theta), alpha, DiscreteSpectralMeasure(std::move(pts), std::move(weights)));
  } catch (const json::exception& e) {
    throw DataError(std::string("model file: ") + e.what());
  } catch (const std::invalid_argument& e) {
    throw DataError(std::string("model file: ") + e.what());
  }
}

void write_deterministic_json(std::ostream& os, const DeterministicComponents& det) {
  json j;
  j["period"] = det.period;
  j["intercept"] = det.intercept;
  j["slope"] = det.slope;
  j["periodic_mean"] = det.periodic_mean;
  os << j.dump(2) << '\n';
}

DeterministicComponents read_deterministic_json(std::istream& is) {
  const json j = parse_json(is, "deterministic file");
  DeterministicComponents det;
  det.period = get_count(j, "period");
  det.intercept = get_as<std::vector<double>>(j, "intercept");
  det.slope = get_as<std::vector<double>>(j, "slope");
  det.periodic_mean = get_as<std::vector<std::vector<double>>>(j, "periodic_mean");
  const std::size_t m = det.intercept.size();
  if (det.period < 1 || m == 0 || det.slope.size() != m || det.periodic_mean.size() != m) {
    throw DataError("deterministic file: inconsistent sizes");
  }
  for (const auto& pm : det.periodic_mean) {
    if (pm.size() != det.period) throw DataError("deterministic file: periodic mean length differs from period");
  }
  return det;
}

}  // namespace parstable
