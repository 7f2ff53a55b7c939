#include "parstable/solver.hpp"

#include <cmath>
#include <limits>
#include <sstream>
#include <stdexcept>

#include "parstable/errors.hpp"

namespace parstable {

const char* to_string(SolveMethod method) noexcept {
  switch (method) {
    case SolveMethod::Direct:
      return "direct";
    case SolveMethod::BiCGStab:
      return "bicgstab";
  }
  return "unknown";
}

// IncompleteLU ----------------------------------------------------------------

IncompleteLU::IncompleteLU(const Eigen::MatrixXd& a) : lu_(a) {
  if (a.rows() != a.cols()) throw std::invalid_argument("ILU(0) needs a square matrix");
  const Eigen::Index n = a.rows();
  for (Eigen::Index i = 1; i < n; ++i) {
    for (Eigen::Index k = 0; k < i; ++k) {
      if (a(i, k) == 0.0) continue;
      if (lu_(k, k) == 0.0) throw NumericalError("ILU(0): zero pivot");
      lu_(i, k) /= lu_(k, k);
      for (Eigen::Index j = k + 1; j < n; ++j) {
        if (a(i, j) != 0.0) lu_(i, j) -= lu_(i, k) * lu_(k, j);
      }
    }
  }
  for (Eigen::Index i = 0; i < n; ++i) {
    if (lu_(i, i) == 0.0) throw NumericalError("ILU(0): zero pivot");
  }
}

Eigen::VectorXd IncompleteLU::apply(const Eigen::VectorXd& rhs) const {
  Eigen::VectorXd y = lu_.triangularView<Eigen::UnitLower>().solve(rhs);
  return lu_.triangularView<Eigen::Upper>().solve(y);
}

// BiCGSTAB --------------------------------------------------------------------

VectorSolveReport bicgstab(const Eigen::MatrixXd& a, const Eigen::VectorXd& b, double tol,
                           std::size_t maxit, const IncompleteLU* precond) {
  if (a.rows() != a.cols() || a.rows() != b.size()) {
    throw std::invalid_argument("bicgstab: dimension mismatch");
  }
  if (!(tol > 0.0)) throw std::invalid_argument("bicgstab: tol must be positive");
  if (maxit < 1) throw std::invalid_argument("bicgstab: maxit must be >= 1");

  auto apply_k = [&](const Eigen::VectorXd& v) -> Eigen::VectorXd {
    return precond != nullptr ? precond->apply(v) : v;
  };

  VectorSolveReport rep;
  const Eigen::Index n = b.size();
  const double b_norm = b.norm();
  const double target = tol * b_norm;
  rep.solution = Eigen::VectorXd::Zero(n);
  if (b_norm == 0.0) {
    rep.converged = true;
    return rep;
  }

  constexpr double tiny = std::numeric_limits<double>::min() * 1e10;
  Eigen::VectorXd x = Eigen::VectorXd::Zero(n);
  Eigen::VectorXd best = x;
  double best_res = b_norm;
  std::size_t it = 0;

  // Restarts from the true residual whenever the recursive residual claims
  // convergence that explicit multiplication does not confirm.
  while (it < maxit) {
    Eigen::VectorXd r = b - a * x;
    double r_norm = r.norm();
    if (r_norm <= target) break;
    const Eigen::VectorXd r_hat = r;
    Eigen::VectorXd p = Eigen::VectorXd::Zero(n);
    Eigen::VectorXd v = Eigen::VectorXd::Zero(n);
    double rho_prev = 1.0;
    double alpha = 1.0;
    double omega = 1.0;
    bool restart = false;

    while (it < maxit) {
      ++it;
      const double rho = r_hat.dot(r);
      if (std::abs(rho) <= tiny || std::abs(rho) < 1e-30 * r_hat.norm() * r_norm) {
        rep.breakdown = true;
        rep.detail = "breakdown: rho vanished";
        break;
      }
      const double beta = (rho / rho_prev) * (alpha / omega);
      p = r + beta * (p - omega * v);
      const Eigen::VectorXd y = apply_k(p);
      v = a * y;
      const double denom = r_hat.dot(v);
      if (std::abs(denom) <= tiny) {
        rep.breakdown = true;
        rep.detail = "breakdown: r_hat . v vanished";
        break;
      }
      alpha = rho / denom;
      const Eigen::VectorXd s = r - alpha * v;
      if (s.norm() <= target) {
        x += alpha * y;
        restart = true;
        break;
      }
      const Eigen::VectorXd z = apply_k(s);
      const Eigen::VectorXd t = a * z;
      const double tt = t.dot(t);
      if (tt <= tiny) {
        x += alpha * y;
        rep.breakdown = true;
        rep.detail = "breakdown: t vanished";
        break;
      }
      omega = t.dot(s) / tt;
      x += alpha * y + omega * z;
      r = s - omega * t;
      r_norm = r.norm();
      if (r_norm < best_res) {
        best_res = r_norm;
        best = x;
      }
      if (r_norm <= target) {
        restart = true;
        break;
      }
      if (std::abs(omega) <= tiny) {
        rep.breakdown = true;
        rep.detail = "breakdown: omega vanished";
        break;
      }
      rho_prev = rho;
    }
    const double true_res = (b - a * x).norm();
    if (true_res < best_res) {
      best_res = true_res;
      best = x;
    }
    if (true_res <= target) break;
    if (!restart) break;
    rep.breakdown = false;
    rep.detail.clear();
  }

  const double x_res = (b - a * x).norm();
  rep.solution = x_res <= best_res ? x : best;
  rep.residual_norm = (b - a * rep.solution).norm();
  rep.iterations = it;
  rep.converged = rep.residual_norm <= target;
  if (rep.converged) {
    rep.breakdown = false;
    rep.detail = "converged";
  } else if (rep.detail.empty()) {
    std::ostringstream os;
    os << "no convergence after " << it << " iterations";
    rep.detail = os.str();
  }
  return rep;
}

// Matrix systems --------------------------------------------------------------

namespace {

void require_square_pair(const Eigen::MatrixXd& m0, const Eigen::MatrixXd& m1) {
  if (m0.rows() != m0.cols() || m1.rows() != m1.cols() || m0.rows() != m1.rows()) {
    throw std::invalid_argument("coefficient system needs square matrices of equal size");
  }
}

}  // namespace

SolveReport solution1(const Eigen::MatrixXd& m0, const Eigen::MatrixXd& m1,
                      const SolverOptions& options) {
  require_square_pair(m0, m1);
  const Eigen::MatrixXd a = m0.transpose();
  const Eigen::MatrixXd rhs = m1.transpose();
  const Eigen::Index m = a.rows();

  std::optional<IncompleteLU> ilu;
  if (static_cast<std::size_t>(m) >= options.precondition_from_dim) {
    try {
      ilu.emplace(a);
    } catch (const NumericalError&) {
      ilu.reset();
    }
  }

  SolveReport rep;
  rep.method = SolveMethod::BiCGStab;
  Eigen::MatrixXd theta_t(m, m);
  bool all_converged = true;
  std::ostringstream detail;
  for (Eigen::Index i = 0; i < m; ++i) {
    const Eigen::VectorXd bi = rhs.col(i);
    const auto col = bicgstab(a, bi, options.tol, options.maxit, ilu ? &*ilu : nullptr);
    theta_t.col(i) = col.solution;
    rep.iterations += col.iterations;
    if (!col.converged) {
      all_converged = false;
      detail << "column " << (i + 1) << ": " << col.detail << "; ";
      // A singular system is consistent iff its least-squares residual vanishes.
      const Eigen::VectorXd ls = a.completeOrthogonalDecomposition().solve(bi);
      if ((a * ls - bi).norm() > std::sqrt(options.tol) * std::max(bi.norm(), 1e-300)) {
        rep.inconsistent = true;
      }
    }
  }
  rep.solution = theta_t.transpose();
  rep.residual_norm = (rep.solution * m0 - m1).norm();
  rep.converged = all_converged && rep.residual_norm <= options.tol * m1.norm();
  if (rep.inconsistent) detail << "system is inconsistent";
  rep.detail = rep.converged ? "converged" : detail.str();
  return rep;
}

SolveReport solve_direct(const Eigen::MatrixXd& m0, const Eigen::MatrixXd& m1) {
  require_square_pair(m0, m1);
  const Eigen::PartialPivLU<Eigen::MatrixXd> lu(m0.transpose());
  SolveReport rep;
  rep.method = SolveMethod::Direct;
  rep.solution = lu.solve(m1.transpose()).transpose();
  rep.residual_norm = (rep.solution * m0 - m1).norm();
  rep.converged = rep.solution.allFinite();
  rep.detail = rep.converged ? "direct LU solve" : "direct LU solve produced non-finite values";
  return rep;
}

SolveReport solve_coefficients(const Eigen::MatrixXd& m0, const Eigen::MatrixXd& m1,
                               const SolverOptions& options) {
  require_square_pair(m0, m1);
  const Eigen::PartialPivLU<Eigen::MatrixXd> lu(m0.transpose());
  const double rcond = lu.rcond();
  if (std::isfinite(rcond) && rcond * options.max_condition >= 1.0) {
    SolveReport rep = solve_direct(m0, m1);
    if (rep.converged) return rep;
  }
  return solution1(m0, m1, options);
}

}  // namespace parstable
