#include "parstable/covariation.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <sstream>
#include <stdexcept>

#include "parstable/errors.hpp"

namespace parstable {

namespace {

double sign(double x) { return static_cast<double>((x > 0.0) - (x < 0.0)); }

void require_phase_args(const MultiTrajectory& traj, std::size_t period, std::size_t v,
                        std::size_t h) {
  if (period < 1) throw std::invalid_argument("period must be >= 1");
  if (v > period) throw std::invalid_argument("phase must lie in 0..T");
  if (h > 1) throw std::invalid_argument("phase matrices use lag 0 or 1");
  if (traj.length() < 2 * period) throw DataError("trajectory shorter than two periods");
}

}  // namespace

double ncv_cross(std::span<const double> xi, std::span<const double> xj, long h) {
  const long L = static_cast<long>(xi.size());
  if (xj.size() != xi.size()) throw std::invalid_argument("series lengths differ");
  if (std::abs(h) >= L) throw std::invalid_argument("|lag| must be smaller than the length");
  const long r = std::max(1L, 1 + h);
  const long l = std::min(L, L + h);
  double num = 0.0;
  for (long t = r; t <= l; ++t) num += xi[t - 1] * sign(xj[t - h - 1]);
  double den = 0.0;
  for (long t = r; t <= L; ++t) den += std::abs(xj[t - 1]);
  if (den == 0.0) throw DataError("normalized covariation: zero denominator");
  return num / den;
}

double ncv_auto(std::span<const double> x, long h) { return ncv_cross(x, x, h); }

double ncv_cross(const MultiTrajectory& traj, std::size_t i, std::size_t j, long h) {
  return ncv_cross(traj.component(i), traj.component(j), h);
}

std::size_t phase_start(std::size_t v, std::size_t h) noexcept {
  return (v > 0 && v > h) ? 0 : 1;
}

std::pair<std::vector<double>, std::vector<double>> phase_pairs(const MultiTrajectory& traj,
                                                                std::size_t period, std::size_t v,
                                                                std::size_t h, std::size_t r,
                                                                std::size_t l) {
  require_phase_args(traj, period, v, h);
  const std::size_t n_cycles = traj.length() / period;
  std::pair<std::vector<double>, std::vector<double>> out;
  for (std::size_t n = phase_start(v, h); n < n_cycles; ++n) {
    const std::size_t p = n * period + v;
    out.first.push_back(traj.at(r, p));
    out.second.push_back(traj.at(l, p - h));
  }
  return out;
}

PhaseCovMatrix ncv_phase_matrix(const MultiTrajectory& traj, std::size_t period, std::size_t v,
                                std::size_t h) {
  require_phase_args(traj, period, v, h);
  const std::size_t m = traj.dim();
  const std::size_t n_cycles = traj.length() / period;
  const std::size_t n0 = phase_start(v, h);

  Eigen::VectorXd den = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(m));
  Eigen::MatrixXd num = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(m), static_cast<Eigen::Index>(m));
  for (std::size_t n = n0; n < n_cycles; ++n) {
    const std::size_t p = n * period + v;
    for (std::size_t l = 0; l < m; ++l) {
      const double xl = traj.at(l, p - h);
      const double sl = sign(xl);
      den(static_cast<Eigen::Index>(l)) += std::abs(xl);
      for (std::size_t r = 0; r < m; ++r) {
        num(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(l)) += traj.at(r, p) * sl;
      }
    }
  }
  for (Eigen::Index l = 0; l < den.size(); ++l) {
    if (den(l) == 0.0) {
      std::ostringstream os;
      os << "normalized covariation at phase " << v << ", lag " << h << ": component " << (l + 1)
         << " is identically zero";
      throw DataError(os.str());
    }
    num.col(l) /= den(l);
  }
  return PhaseCovMatrix{period, v, h, std::move(num), CovKind::NormalizedMoment};
}

double cv_from_spectral(const DiscreteSpectralMeasure& measure2d, double alpha) {
  if (measure2d.dim() != 2) throw std::invalid_argument("covariation needs a 2-D spectral measure");
  if (!(alpha > 1.0 && alpha <= 2.0)) throw std::invalid_argument("alpha must lie in (1, 2]");
  return measure2d.covariation(0, 1, alpha);
}

DiscreteSpectralMeasure estimate_spectral_measure_2d(std::span<const double> x,
                                                     std::span<const double> y, double alpha,
                                                     const ProjectionOptions& options) {
  if (x.size() != y.size()) throw std::invalid_argument("coordinate samples differ in length");
  if (x.size() < 100) throw DataError("spectral measure estimation needs at least 100 points");
  if (!(alpha > 1.0 && alpha <= 2.0)) throw std::invalid_argument("alpha must lie in (1, 2]");
  if (options.n_grid < 4 || options.n_grid % 2 != 0) {
    throw std::invalid_argument("n_grid must be even and >= 4");
  }
  const std::size_t half = options.n_grid / 2;
  const double step = std::numbers::pi / static_cast<double>(half);
  const auto hn = static_cast<Eigen::Index>(half);

  // Projection scales on the half circle; theta and -theta project alike.
  Eigen::VectorXd b(hn);
  std::vector<double> proj(x.size());
  for (Eigen::Index k = 0; k < hn; ++k) {
    const double c = std::cos(step * static_cast<double>(k));
    const double s = std::sin(step * static_cast<double>(k));
    for (std::size_t i = 0; i < x.size(); ++i) proj[i] = c * x[i] + s * y[i];
    b(k) = std::pow(mcculloch_scale(proj, alpha), alpha);
  }
  if (!b.allFinite()) throw NumericalError("spectral measure: non-finite projection scale");
  const double b_norm = b.norm();
  if (b_norm == 0.0) throw DataError("spectral measure: sample is identically zero");

  // Atom j and its antipode share weight w_j.
  Eigen::MatrixXd A(hn, hn);
  for (Eigen::Index k = 0; k < hn; ++k) {
    for (Eigen::Index j = 0; j < hn; ++j) {
      A(k, j) = 2.0 * std::pow(std::abs(std::cos(step * static_cast<double>(k - j))), alpha);
    }
  }

  // Accelerated projected gradient for min ||A w - b||^2 s.t. w >= 0.
  const Eigen::MatrixXd AtA = A.transpose() * A;
  const Eigen::VectorXd Atb = A.transpose() * b;
  const double lipschitz = Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd>(AtA).eigenvalues().maxCoeff();
  Eigen::VectorXd w = Eigen::VectorXd::Zero(hn);
  Eigen::VectorXd z = w;
  double tk = 1.0;
  for (std::size_t it = 0; it < options.max_iter; ++it) {
    const Eigen::VectorXd w_next = (z - (AtA * z - Atb) / lipschitz).cwiseMax(0.0);
    const double t_next = 0.5 * (1.0 + std::sqrt(1.0 + 4.0 * tk * tk));
    z = w_next + ((tk - 1.0) / t_next) * (w_next - w);
    const double change = (w_next - w).norm();
    w = w_next;
    tk = t_next;
    if (change <= options.tol * std::max(w.norm(), 1e-300)) break;
  }

  const double misfit = (A * w - b).norm() / b_norm;
  if (!std::isfinite(misfit) || misfit > 0.5) {
    std::ostringstream os;
    os << "spectral measure: projection-scale system is ill-posed (relative misfit " << misfit
       << ")";
    throw NumericalError(os.str());
  }

  const double w_max = w.maxCoeff();
  std::vector<Eigen::Index> keep;
  for (Eigen::Index j = 0; j < hn; ++j) {
    if (w(j) > 1e-12 * w_max) keep.push_back(j);
  }
  if (keep.empty()) throw NumericalError("spectral measure: fitted weights are all zero");
  Eigen::MatrixXd pts(2, static_cast<Eigen::Index>(keep.size()));
  std::vector<double> weights;
  for (std::size_t i = 0; i < keep.size(); ++i) {
    const double ang = step * static_cast<double>(keep[i]);
    pts(0, static_cast<Eigen::Index>(i)) = std::cos(ang);
    pts(1, static_cast<Eigen::Index>(i)) = std::sin(ang);
    weights.push_back(w(keep[i]));
  }
  return DiscreteSpectralMeasure::symmetrized(pts, weights);
}

PhaseCovMatrix cv_phase_matrix_spectral(const MultiTrajectory& traj, std::size_t period,
                                        std::size_t v, std::size_t h, double alpha,
                                        const ProjectionOptions& options) {
  const std::size_t m = traj.dim();
  Eigen::MatrixXd out(static_cast<Eigen::Index>(m), static_cast<Eigen::Index>(m));
  for (std::size_t r = 0; r < m; ++r) {
    for (std::size_t l = 0; l < m; ++l) {
      const auto [xr, xl] = phase_pairs(traj, period, v, h, r, l);
      const auto measure = estimate_spectral_measure_2d(xr, xl, alpha, options);
      out(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(l)) =
          cv_from_spectral(measure, alpha);
    }
  }
  return PhaseCovMatrix{period, v, h, std::move(out), CovKind::Spectral};
}

}  // namespace parstable
