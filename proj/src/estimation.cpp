#include "parstable/estimation.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <istream>
#include <ostream>
#include <sstream>
#include <stdexcept>
#include <string>

#include "parstable/csv.hpp"
#include "parstable/errors.hpp"
#include "parstable/format.hpp"
#include "parstable/stats.hpp"

namespace parstable {

const char* to_string(Method method) noexcept {
  return method == Method::YwCv ? "YW-CV" : "YW-T";
}

Method parse_method(std::string_view text) {
  std::string s;
  for (char c : text) s.push_back(c == '_' ? '-' : static_cast<char>(std::tolower(static_cast<unsigned char>(c))));
  if (s == "yw-cv") return Method::YwCv;
  if (s == "yw-t") return Method::YwT;
  throw std::invalid_argument("unknown method '" + std::string(text) + "' (expected yw-cv or yw-t)");
}

bool EstimationResult::all_converged() const noexcept {
  return std::all_of(reports.begin(), reports.end(), [](const SolveReport& r) { return r.converged; });
}

EstimationResult estimate_from_matrices(const std::vector<Eigen::MatrixXd>& lag0,
                                        const std::vector<Eigen::MatrixXd>& lag1, Method method,
                                        const SolverOptions& options) {
  if (lag0.empty() || lag0.size() != lag1.size()) {
    throw std::invalid_argument("need one lag-0 and one lag-1 matrix per phase");
  }
  EstimationResult out;
  out.method = method;
  for (std::size_t k = 0; k < lag0.size(); ++k) {
    if (!lag0[k].allFinite() || !lag1[k].allFinite()) {
      std::ostringstream os;
      os << "phase " << (k + 1) << ": covariation matrix has non-finite entries";
      throw NumericalError(os.str());
    }
    SolveReport rep = solve_coefficients(lag0[k], lag1[k], options);
    if (!rep.solution.allFinite()) {
      std::ostringstream os;
      os << "phase " << (k + 1) << ": coefficient solve produced non-finite values ("
         << rep.detail << ")";
      throw NumericalError(os.str());
    }
    out.theta_hat.push_back(rep.solution);
    out.reports.push_back(std::move(rep));
  }
  return out;
}

namespace {

void require_estimable(const MultiTrajectory& traj, std::size_t period) {
  if (period < 1) throw std::invalid_argument("period must be >= 1");
  if (traj.dim() < 1) throw std::invalid_argument("trajectory has no components");
  if (traj.length() < 4 * period) {
    std::ostringstream os;
    os << "trajectory of length " << traj.length() << " is shorter than four periods (T = "
       << period << ")";
    throw DataError(os.str());
  }
}

}  // namespace

EstimationResult yw_cv_estimate(const MultiTrajectory& traj, std::size_t period,
                                const EstimationOptions& options) {
  require_estimable(traj, period);
  std::vector<Eigen::MatrixXd> lag0;
  std::vector<Eigen::MatrixXd> lag1;
  for (std::size_t v = 1; v <= period; ++v) {
    lag1.push_back(ncv_phase_matrix(traj, period, v, 1).values);
    lag0.push_back(ncv_phase_matrix(traj, period, v - 1, 0).values);
  }
  return estimate_from_matrices(lag0, lag1, Method::YwCv, options.solver);
}

double estimate_common_alpha(const MultiTrajectory& series) {
  std::vector<double> alphas;
  for (std::size_t i = 0; i < series.dim(); ++i) {
    alphas.push_back(mcculloch_estimate(series.component(i)).alpha);
  }
  const double a = median(alphas);
  return std::clamp(a, 1.0001, 2.0);
}

EstimationResult yw_t_estimate(const MultiTrajectory& traj, std::size_t period,
                               std::optional<double> alpha, const EstimationOptions& options) {
  require_estimable(traj, period);
  double a = 0.0;
  if (alpha) {
    if (!(*alpha > 1.0 && *alpha <= 2.0)) throw std::invalid_argument("alpha must lie in (1, 2]");
    a = *alpha;
  } else {
    const auto prelim = yw_cv_estimate(traj, period, options);
    a = estimate_common_alpha(par_residuals(traj, prelim.theta_hat));
  }
  std::vector<Eigen::MatrixXd> lag0;
  std::vector<Eigen::MatrixXd> lag1;
  for (std::size_t v = 1; v <= period; ++v) {
    lag1.push_back(cv_phase_matrix_spectral(traj, period, v, 1, a, options.projection).values);
    lag0.push_back(cv_phase_matrix_spectral(traj, period, v - 1, 0, a, options.projection).values);
  }
  auto out = estimate_from_matrices(lag0, lag1, Method::YwT, options.solver);
  out.alpha_used = a;
  return out;
}

EstimationResult estimate(const MultiTrajectory& traj, std::size_t period, Method method,
                          std::optional<double> alpha, const EstimationOptions& options) {
  return method == Method::YwCv ? yw_cv_estimate(traj, period, options)
                                : yw_t_estimate(traj, period, alpha, options);
}

MultiTrajectory par_residuals(const MultiTrajectory& traj,
                              const std::vector<Eigen::MatrixXd>& theta) {
  if (theta.empty()) throw std::invalid_argument("no coefficient matrices");
  const auto m = static_cast<Eigen::Index>(traj.dim());
  for (const auto& th : theta) {
    if (th.rows() != m || th.cols() != m) throw std::invalid_argument("coefficient size mismatch");
  }
  if (traj.length() < 2) throw DataError("need at least two observations for residuals");
  const std::size_t period = theta.size();
  const std::size_t n = traj.length() - 1;
  RowMatrix z(m, static_cast<Eigen::Index>(n));
  for (std::size_t p = 2; p <= traj.length(); ++p) {
    const auto& th = theta[(p - 1) % period];
    z.col(static_cast<Eigen::Index>(p - 2)) = traj.column(p) - th * traj.column(p - 1);
  }
  return MultiTrajectory(std::move(z), traj.t0() + 1);
}

void write_estimates_csv(std::ostream& os, const std::vector<Eigen::MatrixXd>& theta) {
  if (theta.empty()) return;
  const Eigen::Index m = theta.front().rows();
  os << "v";
  for (Eigen::Index i = 0; i < m; ++i) {
    for (Eigen::Index j = 0; j < m; ++j) os << ",theta_" << (i + 1) << (j + 1);
  }
  os << '\n';
  for (std::size_t v = 0; v < theta.size(); ++v) {
    os << (v + 1);
    for (Eigen::Index i = 0; i < m; ++i) {
      for (Eigen::Index j = 0; j < m; ++j) os << ',' << format_double(theta[v](i, j));
    }
    os << '\n';
  }
}

std::vector<Eigen::MatrixXd> read_estimates_csv(std::istream& is) {
  std::string line;
  if (!std::getline(is, line)) throw DataError("coefficient CSV is empty");
  const auto header = split_csv_line(line);
  const std::size_t n_coef = header.size() - 1;
  const auto m = static_cast<Eigen::Index>(std::lround(std::sqrt(static_cast<double>(n_coef))));
  if (header.empty() || header[0] != "v" || n_coef == 0 ||
      static_cast<std::size_t>(m * m) != n_coef) {
    throw DataError("coefficient CSV header must be v,theta_11,...,theta_mm");
  }
  std::vector<Eigen::MatrixXd> out;
  while (std::getline(is, line)) {
    if (line.empty() || line == "\r") continue;
    const auto fields = split_csv_line(line);
    if (fields.size() != header.size()) throw DataError("coefficient CSV row has wrong field count");
    if (static_cast<std::size_t>(parse_csv_double(fields[0])) != out.size() + 1) {
      throw DataError("coefficient CSV phases must run 1..T in order");
    }
    Eigen::MatrixXd th(m, m);
    for (Eigen::Index i = 0; i < m; ++i) {
      for (Eigen::Index j = 0; j < m; ++j) {
        th(i, j) = parse_csv_double(fields[static_cast<std::size_t>(1 + i * m + j)]);
      }
    }
    out.push_back(std::move(th));
  }
  if (out.empty()) throw DataError("coefficient CSV has no rows");
  return out;
}

}  // namespace parstable
