#pragma once

#include <cstddef>
#include <optional>
#include <string>

#include <Eigen/Dense>

namespace parstable {

enum class SolveMethod { Direct, BiCGStab };

const char* to_string(SolveMethod method) noexcept;

/// Incomplete LU factorization with zero fill-in: L (unit lower) and U share
/// the nonzero pattern of A. On a fully dense A this is LU without pivoting.
class IncompleteLU {
 public:
  /// Throws NumericalError on a zero pivot.
  explicit IncompleteLU(const Eigen::MatrixXd& a);

  /// Solves L U x = rhs.
  Eigen::VectorXd apply(const Eigen::VectorXd& rhs) const;

  const Eigen::MatrixXd& factors() const noexcept { return lu_; }

 private:
  Eigen::MatrixXd lu_;
};

struct VectorSolveReport {
  Eigen::VectorXd solution;
  std::size_t iterations = 0;
  double residual_norm = 0.0;  ///< ||A x - b||, recomputed explicitly
  bool converged = false;
  bool breakdown = false;
  std::string detail;
};

/// Preconditioned BiCGSTAB for A x = b. Convergence means
/// ||A x - b|| <= tol ||b|| by explicit multiplication. On non-convergence the
/// best iterate is returned; a vanishing rho or omega is reported as
/// breakdown.
VectorSolveReport bicgstab(const Eigen::MatrixXd& a, const Eigen::VectorXd& b, double tol,
                           std::size_t maxit, const IncompleteLU* precond = nullptr);

struct SolveReport {
  Eigen::MatrixXd solution;
  SolveMethod method = SolveMethod::Direct;
  std::size_t iterations = 0;
  double residual_norm = 0.0;  ///< ||Theta M0 - M1||_F
  bool converged = false;
  bool inconsistent = false;  ///< singular M0 with M1 outside its reach
  std::string detail;
};

struct SolverOptions {
  double tol = 1e-10;
  std::size_t maxit = 1000;
  /// Condition estimate above which the direct solve hands over to
  /// solution1.
  double max_condition = 1e12;
  /// ILU(0) preconditioning from this dimension up.
  std::size_t precondition_from_dim = 8;
};

/// Theta with Theta M0 = M1 column by column: the transposed system
/// M0' theta_i = (M1')_i is solved by BiCGSTAB for every i = 1..m.
SolveReport solution1(const Eigen::MatrixXd& m0, const Eigen::MatrixXd& m1,
                      const SolverOptions& options = {});

/// M1 M0^{-1} by LU with partial pivoting.
SolveReport solve_direct(const Eigen::MatrixXd& m0, const Eigen::MatrixXd& m1);

/// Reciprocal-condition based routing: direct when M0 is well conditioned,
/// solution1 otherwise.
SolveReport solve_coefficients(const Eigen::MatrixXd& m0, const Eigen::MatrixXd& m1,
                               const SolverOptions& options = {});

}  // namespace parstable
