#pragma once

#include <cstddef>
#include <span>
#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "parstable/par_model.hpp"
#include "parstable/stable.hpp"

namespace parstable {

enum class CovKind { NormalizedMoment, Spectral };

/// Per-phase m x m dependence matrix at lag h: entry (r,l) measures
/// component r at phase v against component l at phase v - h.
struct PhaseCovMatrix {
  std::size_t period;
  std::size_t phase;
  std::size_t lag;
  Eigen::MatrixXd values;
  CovKind kind;
};

/// Normalized auto-covariation estimate
///   sum_{t=r}^{l} x(t) sign(x(t-h)) / sum_{t=r}^{L} |x(t)|,
/// r = max(1, 1+h), l = min(L, L+h). The denominator range is kept exactly
/// as in the published estimator. Throws DataError on a zero denominator.
double ncv_auto(std::span<const double> x, long h);

/// Cross version: x_i in the numerator, sign and absolute value of x_j.
double ncv_cross(std::span<const double> xi, std::span<const double> xj, long h);
double ncv_cross(const MultiTrajectory& traj, std::size_t i, std::size_t j, long h);

/// First period index n0 of the phase sums: 0 when v > 0 and v - h > 0,
/// otherwise 1.
std::size_t phase_start(std::size_t v, std::size_t h) noexcept;

/// Paired phase sub-samples {x_r(nT+v)} and {x_l(nT+v-h)} for n = n0..N-1,
/// N = floor(L / T). Phase v may be 0 (the predecessor of phase 1).
std::pair<std::vector<double>, std::vector<double>> phase_pairs(const MultiTrajectory& traj,
                                                                std::size_t period, std::size_t v,
                                                                std::size_t h, std::size_t r,
                                                                std::size_t l);

/// Moment-based normalized covariation matrix of phase v (0..T) at lag
/// h in {0, 1}. The lag-0 diagonal is exactly 1.
PhaseCovMatrix ncv_phase_matrix(const MultiTrajectory& traj, std::size_t period, std::size_t v,
                                std::size_t h);

/// Covariation of the first coordinate on the second for a 2-D spectral
/// measure: sum_j s1_j (s2_j)^<alpha-1> gamma_j.
double cv_from_spectral(const DiscreteSpectralMeasure& measure2d, double alpha);

struct ProjectionOptions {
  std::size_t n_grid = 40;     ///< atoms on the circle; even
  std::size_t max_iter = 500;  ///< projected-gradient iterations
  double tol = 1e-8;           ///< relative step size stopping rule
};

/// Projection-method estimate of a symmetric 2-D spectral measure. The alpha
/// scale of <theta_k, X> is estimated for n_grid/2 directions on the half
/// circle; nonnegative weights on n_grid equally spaced atoms are fitted so
/// that sum_j |<theta_k, s_j>|^alpha gamma_j matches them in least squares.
/// Atoms whose fitted weight is zero are dropped.
DiscreteSpectralMeasure estimate_spectral_measure_2d(std::span<const double> x,
                                                     std::span<const double> y, double alpha,
                                                     const ProjectionOptions& options = {});

/// Spectral-measure-based covariation matrix of phase v at lag h: each entry
/// is cv_from_spectral of the measure estimated from the paired sub-samples.
PhaseCovMatrix cv_phase_matrix_spectral(const MultiTrajectory& traj, std::size_t period,
                                        std::size_t v, std::size_t h, double alpha,
                                        const ProjectionOptions& options = {});

}  // namespace parstable
