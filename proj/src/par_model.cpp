#include "parstable/par_model.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <ostream>
#include <sstream>
#include <stdexcept>

#include "parstable/format.hpp"

namespace parstable {

// MultiTrajectory ------------------------------------------------------------

MultiTrajectory::MultiTrajectory(RowMatrix values, long t0) : values_(std::move(values)), t0_(t0) {
  if (values_.rows() < 1) throw std::invalid_argument("trajectory needs at least one component");
  if (!values_.allFinite()) throw std::invalid_argument("trajectory contains non-finite values");
}

std::span<const double> MultiTrajectory::component(std::size_t i) const {
  if (i >= dim()) throw std::out_of_range("component index out of range");
  return {values_.data() + static_cast<std::ptrdiff_t>(i * length()), length()};
}

void write_trajectory_csv(std::ostream& os, const MultiTrajectory& traj) {
  os << "t";
  for (std::size_t i = 0; i < traj.dim(); ++i) os << ",x" << (i + 1);
  os << '\n';
  for (std::size_t p = 1; p <= traj.length(); ++p) {
    os << traj.t0() + static_cast<long>(p) - 1;
    for (std::size_t i = 0; i < traj.dim(); ++i) os << ',' << format_double(traj.at(i, p));
    os << '\n';
  }
}

// ParModel -------------------------------------------------------------------

ParModel::ParModel(std::vector<Eigen::MatrixXd> theta, double alpha, DiscreteSpectralMeasure noise)
    : theta_(std::move(theta)), alpha_(alpha), noise_(std::move(noise)) {
  if (theta_.empty()) throw std::invalid_argument("PAR model needs period T >= 1");
  const Eigen::Index m = theta_.front().rows();
  for (const auto& th : theta_) {
    if (th.rows() != m || th.cols() != m) {
      throw std::invalid_argument("coefficient matrices must all be m x m");
    }
    if (!th.allFinite()) throw std::invalid_argument("coefficient matrix has non-finite entries");
  }
  if (static_cast<Eigen::Index>(noise_.dim()) != m) {
    throw std::invalid_argument("noise spectral measure dimension differs from model dimension");
  }
  if (!(alpha_ > 1.0 && alpha_ <= 2.0)) throw std::invalid_argument("alpha must lie in (1, 2]");
}

const Eigen::MatrixXd& ParModel::theta(std::size_t v) const {
  if (v < 1 || v > period()) throw std::out_of_range("phase must lie in 1..T");
  return theta_[v - 1];
}

std::size_t ParModel::phase_of(long t) const noexcept {
  const long T = static_cast<long>(period());
  long r = (t - 1) % T;
  if (r < 0) r += T;
  return static_cast<std::size_t>(r) + 1;
}

const Eigen::MatrixXd& ParModel::theta_at(long t) const { return theta_[phase_of(t) - 1]; }

bool ParModel::is_diagonal() const {
  for (const auto& th : theta_) {
    for (Eigen::Index r = 0; r < th.rows(); ++r) {
      for (Eigen::Index c = 0; c < th.cols(); ++c) {
        if (r != c && th(r, c) != 0.0) return false;
      }
    }
  }
  return true;
}

ParModel ParModel::with_alpha(double alpha) const { return ParModel(theta_, alpha, noise_); }

// Simulation -----------------------------------------------------------------

MultiTrajectory simulate_par1(const ParModel& model, std::size_t length, RandomStream& rng,
                              const SimulationOptions& options) {
  if (length < model.period()) throw std::invalid_argument("trajectory length must be >= T");
  if (!options.allow_unbounded) {
    const auto report = check_boundedness(model);
    if (!report.bounded) throw std::invalid_argument("model is not bounded: " + report.detail);
  }
  const std::size_t burn = options.burn_in.value_or(50 * model.period());
  const auto m = static_cast<Eigen::Index>(model.dim());
  RowMatrix out(m, static_cast<Eigen::Index>(length));
  Eigen::VectorXd x = Eigen::VectorXd::Zero(m);
  const long first = 1 - static_cast<long>(burn);
  for (std::size_t k = 0; k < burn + length; ++k) {
    const long t = first + static_cast<long>(k);
    x = model.theta_at(t) * x + draw_stable_vector(model.noise(), model.alpha(), rng);
    if (t >= 1) out.col(static_cast<Eigen::Index>(t - 1)) = x;
  }
  return MultiTrajectory(std::move(out), 1);
}

GProduct g_product(const ParModel& model, long t, std::size_t j) {
  const auto m = static_cast<Eigen::Index>(model.dim());
  Eigen::MatrixXd g = Eigen::MatrixXd::Identity(m, m);
  for (std::size_t k = 0; k < j; ++k) g = g * model.theta_at(t - static_cast<long>(k));
  return GProduct{t, j, std::move(g)};
}

BoundednessReport check_boundedness(const ParModel& model, double tol, std::size_t max_terms) {
  if (!(tol > 0.0)) throw std::invalid_argument("tolerance must be positive");
  const long T = static_cast<long>(model.period());
  const Eigen::MatrixXd mono = g_product(model, T, model.period()).matrix;

  BoundednessReport rep{};
  std::ostringstream detail;
  if (model.is_diagonal()) {
    rep.bounded = true;
    rep.spectral_radius = 0.0;
    for (Eigen::Index r = 0; r < mono.rows(); ++r) {
      const double p = mono(r, r);
      rep.spectral_radius = std::max(rep.spectral_radius, std::abs(p));
      if (!(std::abs(p) < 1.0)) rep.bounded = false;
      detail << "P_" << (r + 1) << "=" << p << ' ';
    }
    detail << (rep.bounded ? "(all |P_r| < 1)" : "(some |P_r| >= 1)");
  } else {
    rep.spectral_radius = mono.eigenvalues().cwiseAbs().maxCoeff();
    rep.bounded = rep.spectral_radius < 1.0 - tol;
    detail << "spectral radius of period product " << rep.spectral_radius
           << (rep.bounded ? " < 1" : " >= 1");
  }

  Eigen::MatrixXd g = Eigen::MatrixXd::Identity(mono.rows(), mono.cols());
  Eigen::MatrixXd acc = Eigen::MatrixXd::Zero(mono.rows(), mono.cols());
  for (std::size_t j = 0; j < max_terms; ++j) {
    acc += g.cwiseAbs();
    g = g * model.theta_at(T - static_cast<long>(j));
    if (!g.allFinite()) break;
  }
  rep.partial_abs_sum = acc.maxCoeff();
  rep.detail = detail.str();
  return rep;
}

// Theoretical covariation ----------------------------------------------------

SeriesValue theoretical_cv(const ParModel& model, std::size_t r, std::size_t l, long s, long t,
                           std::size_t truncation, double tail_tol) {
  const std::size_t m = model.dim();
  if (r >= m || l >= m) throw std::out_of_range("component index out of range");
  if (truncation < model.period()) throw std::invalid_argument("truncation must be >= T");

  const double am1 = model.alpha() - 1.0;
  const auto& noise = model.noise();
  const Eigen::MatrixXd& atoms = noise.points();
  const auto& w = noise.weights();

  // Both rows share the tail product g(b, b-j+1) with b = min(s, t).
  const long b = std::min(s, t);
  Eigen::RowVectorXd u = g_product(model, s, static_cast<std::size_t>(s - b)).matrix.row(
      static_cast<Eigen::Index>(r));
  Eigen::RowVectorXd v = g_product(model, t, static_cast<std::size_t>(t - b)).matrix.row(
      static_cast<Eigen::Index>(l));

  double sum = 0.0;
  double term = 0.0;
  for (std::size_t j = 0; j < truncation; ++j) {
    if (j > 0) {
      const Eigen::MatrixXd& th = model.theta_at(b - static_cast<long>(j) + 1);
      u = u * th;
      v = v * th;
    }
    const Eigen::RowVectorXd pu = u * atoms;
    const Eigen::RowVectorXd pv = v * atoms;
    term = 0.0;
    for (std::size_t k = 0; k < w.size(); ++k) {
      const auto kk = static_cast<Eigen::Index>(k);
      term += signed_power(pv(kk), am1) * pu(kk) * w[k];
    }
    sum += term;
  }
  const bool warn = std::abs(term) > tail_tol * std::abs(sum);
  return SeriesValue{sum, std::abs(term), warn};
}

double theoretical_cv_diagonal(const ParModel& model, std::size_t r, std::size_t l, long s, long t) {
  if (!model.is_diagonal()) {
    throw std::invalid_argument("closed-form covariation requires diagonal coefficient matrices");
  }
  const std::size_t m = model.dim();
  if (r >= m || l >= m) throw std::out_of_range("component index out of range");
  const auto ri = static_cast<Eigen::Index>(r);
  const auto li = static_cast<Eigen::Index>(l);
  const double am1 = model.alpha() - 1.0;
  const std::size_t T = model.period();

  auto g_diag = [&](Eigen::Index c, long from, std::size_t j) {
    double p = 1.0;
    for (std::size_t k = 0; k < j; ++k) p *= model.theta_at(from - static_cast<long>(k))(c, c);
    return p;
  };
  const double p_r = g_diag(ri, static_cast<long>(T), T);
  const double p_l = g_diag(li, static_cast<long>(T), T);
  if (!(std::abs(p_r) < 1.0 && std::abs(p_l) < 1.0)) {
    throw std::invalid_argument("closed-form covariation requires |P_r| < 1 and |P_l| < 1");
  }
  const double noise_cv = model.noise().covariation(r, l, model.alpha());
  const double denom = 1.0 - signed_power(p_l, am1) * p_r;

  const long base = std::min(s, t);
  double lead = 0.0;
  if (s >= t) {
    lead = g_diag(ri, s, static_cast<std::size_t>(s - t));
  } else {
    lead = signed_power(g_diag(li, t, static_cast<std::size_t>(t - s)), am1);
  }
  double period_sum = 0.0;
  for (std::size_t k = 0; k < T; ++k) {
    period_sum += signed_power(g_diag(li, base, k), am1) * g_diag(ri, base, k);
  }
  return lead * noise_cv / denom * period_sum;
}

Eigen::MatrixXd theoretical_cv_matrix(const ParModel& model, long v, long h,
                                      std::size_t truncation) {
  const auto m = static_cast<Eigen::Index>(model.dim());
  Eigen::MatrixXd out(m, m);
  for (Eigen::Index r = 0; r < m; ++r) {
    for (Eigen::Index l = 0; l < m; ++l) {
      out(r, l) = theoretical_cv(model, static_cast<std::size_t>(r), static_cast<std::size_t>(l),
                                 v, v - h, truncation)
                      .value;
    }
  }
  return out;
}

Eigen::MatrixXd theoretical_ncv_matrix(const ParModel& model, long v, long h,
                                       std::size_t truncation) {
  Eigen::MatrixXd out = theoretical_cv_matrix(model, v, h, truncation);
  for (Eigen::Index l = 0; l < out.cols(); ++l) {
    const double norm_pow = theoretical_cv(model, static_cast<std::size_t>(l),
                                           static_cast<std::size_t>(l), v - h, v - h, truncation)
                                .value;
    out.col(l) /= norm_pow;
  }
  return out;
}

}  // namespace parstable
