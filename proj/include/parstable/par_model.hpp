#pragma once

#include <cstddef>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "parstable/random.hpp"
#include "parstable/stable.hpp"

namespace parstable {

using RowMatrix = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

/// m-component sample path of length L. Component i is stored contiguously;
/// column k holds the observation at time t0 + k.
class MultiTrajectory {
 public:
  explicit MultiTrajectory(RowMatrix values, long t0 = 1);

  std::size_t dim() const noexcept { return static_cast<std::size_t>(values_.rows()); }
  std::size_t length() const noexcept { return static_cast<std::size_t>(values_.cols()); }
  long t0() const noexcept { return t0_; }
  const RowMatrix& values() const noexcept { return values_; }

  std::span<const double> component(std::size_t i) const;

  /// Observation of component i at 1-based sample position p (p = 1..L).
  double at(std::size_t i, std::size_t p) const {
    return values_(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(p - 1));
  }
  Eigen::VectorXd column(std::size_t p) const {
    return values_.col(static_cast<Eigen::Index>(p - 1));
  }

 private:
  RowMatrix values_;
  long t0_;
};

/// Writes `t,x1,...,xm` with round-trip precision.
void write_trajectory_csv(std::ostream& os, const MultiTrajectory& traj);

/// m-dimensional alpha-stable PAR(1): X(t) = Theta(t) X(t-1) + Z(t), with
/// Theta periodic of period T and Z iid with the given spectral measure.
class ParModel {
 public:
  ParModel(std::vector<Eigen::MatrixXd> theta, double alpha, DiscreteSpectralMeasure noise);

  std::size_t dim() const noexcept { return static_cast<std::size_t>(theta_.front().rows()); }
  std::size_t period() const noexcept { return theta_.size(); }
  double alpha() const noexcept { return alpha_; }
  const DiscreteSpectralMeasure& noise() const noexcept { return noise_; }
  const std::vector<Eigen::MatrixXd>& thetas() const noexcept { return theta_; }

  /// Coefficient matrix of phase v = 1..T.
  const Eigen::MatrixXd& theta(std::size_t v) const;
  /// Coefficient matrix in force at any integer time t.
  const Eigen::MatrixXd& theta_at(long t) const;
  /// Phase 1..T of an integer time t.
  std::size_t phase_of(long t) const noexcept;

  bool is_diagonal() const;
  ParModel with_alpha(double alpha) const;

 private:
  std::vector<Eigen::MatrixXd> theta_;
  double alpha_;
  DiscreteSpectralMeasure noise_;
};

struct SimulationOptions {
  /// Transient steps discarded before the first output; default 50 T.
  std::optional<std::size_t> burn_in;
  /// Simulate even when check_boundedness rejects the model.
  bool allow_unbounded = false;
};

/// Iterates the recursion from X = 0 for burn_in + L steps and keeps the last
/// L states, labelled t = 1..L (burn-in steps occupy t <= 0, so phases line
/// up with Theta).
MultiTrajectory simulate_par1(const ParModel& model, std::size_t length, RandomStream& rng,
                              const SimulationOptions& options = {});

struct GProduct {
  long t;
  std::size_t j;
  Eigen::MatrixXd matrix;
};

/// g(t, t-j+1) = Theta(t) Theta(t-1) ... Theta(t-j+1); identity for j = 0.
GProduct g_product(const ParModel& model, long t, std::size_t j);

struct BoundednessReport {
  bool bounded;
  /// Spectral radius of the period-T product Theta(T)...Theta(1).
  double spectral_radius;
  /// Largest over (r,l) of sum_{j < max_terms} |g_rl(T, T-j+1)|.
  double partial_abs_sum;
  std::string detail;
};

/// Diagonal models: bounded iff |P_r| < 1 for every r, with P_r the product of
/// theta_rr over one period. Otherwise bounded iff the spectral radius of the
/// period product is below 1 - tol, which makes the g-products decay
/// geometrically.
BoundednessReport check_boundedness(const ParModel& model, double tol = 1e-9,
                                    std::size_t max_terms = 1000);

struct SeriesValue {
  double value;
  /// Magnitude of the last retained term.
  double last_term;
  /// last_term exceeded tail_tol * |value|.
  bool truncation_warning;
};

/// Covariation CV(X_r(s), X_l(t)) of the bounded solution as the partial sum
/// of its moving-average series over the noise atoms. r, l are 0-based.
SeriesValue theoretical_cv(const ParModel& model, std::size_t r, std::size_t l, long s, long t,
                           std::size_t truncation = 500, double tail_tol = 1e-10);

/// Closed form of the same covariation for diagonal Theta (geometric sum over
/// whole periods). Throws std::invalid_argument for non-diagonal models.
double theoretical_cv_diagonal(const ParModel& model, std::size_t r, std::size_t l, long s, long t);

/// m x m matrix with (r,l) entry CV(X_r(v), X_l(v-h)).
Eigen::MatrixXd theoretical_cv_matrix(const ParModel& model, long v, long h,
                                      std::size_t truncation = 500);

/// Normalized version: column l divided by CV(X_l(v-h), X_l(v-h)), i.e. by
/// sigma^alpha of the conditioning variable.
Eigen::MatrixXd theoretical_ncv_matrix(const ParModel& model, long v, long h,
                                       std::size_t truncation = 500);

}  // namespace parstable
