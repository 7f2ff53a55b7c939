#pragma once

#include <cstddef>
#include <iosfwd>
#include <optional>
#include <string_view>
#include <vector>

#include <Eigen/Dense>

#include "parstable/covariation.hpp"
#include "parstable/par_model.hpp"
#include "parstable/solver.hpp"

namespace parstable {

enum class Method { YwCv, YwT };

/// "YW-CV" or "YW-T".
const char* to_string(Method method) noexcept;
/// Accepts yw-cv / yw-t in any letter case, with '-' or '_'.
Method parse_method(std::string_view text);

struct EstimationOptions {
  SolverOptions solver;
  ProjectionOptions projection;
};

struct EstimationResult {
  std::vector<Eigen::MatrixXd> theta_hat;  ///< Theta(1..T), index v-1
  Method method = Method::YwCv;
  std::optional<double> alpha_used;
  std::vector<SolveReport> reports;  ///< one per phase

  std::size_t period() const noexcept { return theta_hat.size(); }
  std::size_t dim() const noexcept {
    return theta_hat.empty() ? 0 : static_cast<std::size_t>(theta_hat.front().rows());
  }
  bool all_converged() const noexcept;
};

/// Solves Theta(v) lag0[v-1] = lag1[v-1] for v = 1..T, where lag1[v-1] is the
/// lag-1 matrix of phase v and lag0[v-1] the lag-0 matrix of phase v-1.
/// Throws NumericalError when a phase solution is not finite.
EstimationResult estimate_from_matrices(const std::vector<Eigen::MatrixXd>& lag0,
                                        const std::vector<Eigen::MatrixXd>& lag1, Method method,
                                        const SolverOptions& options = {});

/// Yule-Walker estimate from moment-based normalized covariation matrices.
/// Requires L >= 4T.
EstimationResult yw_cv_estimate(const MultiTrajectory& traj, std::size_t period,
                                const EstimationOptions& options = {});

/// Yule-Walker estimate from spectral-measure-based covariation matrices.
/// Without `alpha`, a preliminary YW-CV fit supplies residuals and alpha is
/// the median of their componentwise McCulloch estimates.
EstimationResult yw_t_estimate(const MultiTrajectory& traj, std::size_t period,
                               std::optional<double> alpha = std::nullopt,
                               const EstimationOptions& options = {});

EstimationResult estimate(const MultiTrajectory& traj, std::size_t period, Method method,
                          std::optional<double> alpha = std::nullopt,
                          const EstimationOptions& options = {});

/// Z(t) = X(t) - Theta(t) X(t-1) for t = 2..L; the result starts at t0 + 1.
MultiTrajectory par_residuals(const MultiTrajectory& traj,
                              const std::vector<Eigen::MatrixXd>& theta);

/// Median over components of the McCulloch alpha estimates, clamped to
/// (1, 2].
double estimate_common_alpha(const MultiTrajectory& series);

/// Table layout `v,theta_11,theta_12,...,theta_mm`, one row per phase.
void write_estimates_csv(std::ostream& os, const std::vector<Eigen::MatrixXd>& theta);
/// Inverse of write_estimates_csv. Throws DataError on malformed input.
std::vector<Eigen::MatrixXd> read_estimates_csv(std::istream& is);

}  // namespace parstable
