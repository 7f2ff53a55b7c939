#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include <Eigen/Dense>

#include "parstable/random.hpp"

namespace parstable {

/// Parameters of a symmetric alpha-stable law with zero location.
struct StableParams {
  double alpha;  ///< stability index, 1 < alpha <= 2
  double scale;  ///< sigma > 0

  StableParams(double alpha, double scale);
};

/// |x|^a * sign(x). Total: signed_power(0, a) == 0 for every a >= 0.
double signed_power(double x, double a);

/// Finite spectral measure on the unit sphere of R^m made of point masses.
/// Points are stored as the columns of a dim x size matrix.
class DiscreteSpectralMeasure {
 public:
  /// Validates unit norm (1e-12) and strictly positive weights. With
  /// `require_symmetric` the atom set must be closed under negation with equal
  /// weights on antipodes.
  DiscreteSpectralMeasure(Eigen::MatrixXd points, std::vector<double> weights,
                          bool require_symmetric = false);

  /// Builds the symmetric measure holding every given atom and its negation,
  /// each with the given weight.
  static DiscreteSpectralMeasure symmetrized(const Eigen::MatrixXd& half_points,
                                             std::span<const double> half_weights);

  std::size_t dim() const noexcept { return static_cast<std::size_t>(points_.rows()); }
  std::size_t size() const noexcept { return weights_.size(); }
  const Eigen::MatrixXd& points() const noexcept { return points_; }
  const std::vector<double>& weights() const noexcept { return weights_; }
  Eigen::VectorXd point(std::size_t j) const { return points_.col(static_cast<Eigen::Index>(j)); }
  double weight(std::size_t j) const { return weights_[j]; }
  double total_mass() const;
  bool is_symmetric() const noexcept { return symmetric_; }
  /// For a symmetric measure, one index per antipodal pair (the lower one).
  const std::vector<std::size_t>& pair_leaders() const noexcept { return leaders_; }

  /// Same atoms, every weight multiplied by c > 0.
  DiscreteSpectralMeasure scaled(double c) const;

  /// Sum over atoms of |<theta, s_j>|^alpha gamma_j, the alpha-th power of the
  /// scale of the projection <theta, Z>.
  double projection_scale_pow(const Eigen::VectorXd& theta, double alpha) const;

  /// Sum over atoms of s_r * s_l^<alpha-1> gamma_j: covariation of component
  /// r on component l of a vector with this spectral measure.
  double covariation(std::size_t r, std::size_t l, double alpha) const;

 private:
  Eigen::MatrixXd points_;
  std::vector<double> weights_;
  std::vector<std::size_t> antipode_;  // valid when symmetric_
  std::vector<std::size_t> leaders_;
  bool symmetric_ = false;
};

/// One draw from SaS(alpha, 1) by the Chambers-Mallows-Stuck construction.
double draw_sas_standard(double alpha, RandomStream& rng);

/// n independent draws from SaS(alpha, sigma). For alpha = 2 these are
/// N(0, 2 sigma^2).
std::vector<double> sample_sas_1d(const StableParams& params, std::size_t n, RandomStream& rng);

/// One draw Z = sum_j gamma_j^{1/alpha} W_j s_j with W_j iid SaS(1).
/// Antipodal pairs of a symmetric measure are merged into one draw with
/// doubled weight, which leaves the law unchanged.
Eigen::VectorXd draw_stable_vector(const DiscreteSpectralMeasure& measure, double alpha,
                                   RandomStream& rng);

/// n draws as the columns of a dim x n matrix.
Eigen::MatrixXd sample_stable_vector(const DiscreteSpectralMeasure& measure, double alpha,
                                     std::size_t n, RandomStream& rng);

/// exp(-sum_j |<theta, s_j>|^alpha gamma_j). Real because the law is
/// symmetric.
double char_function(const DiscreteSpectralMeasure& measure, double alpha,
                     const Eigen::VectorXd& theta);

// McCulloch quantile estimator (symmetric case) ---------------------------

/// Stability index for a given quantile spread ratio
/// (x95 - x05) / (x75 - x25). Ratios at or below the Gaussian value map to
/// alpha = 2; results are clipped to [1.0001, 2]. Throws NumericalError for
/// ratios beyond the table.
double mcculloch_alpha_from_ratio(double spread_ratio);

/// (x75 - x25) / sigma of a standard symmetric stable law with index alpha.
double mcculloch_scale_factor(double alpha);

/// McCulloch estimate from the 5/25/50/75/95% sample quantiles. Requires at
/// least 100 observations.
StableParams mcculloch_estimate(std::span<const double> sample);

/// McCulloch scale estimate when alpha is already known.
double mcculloch_scale(std::span<const double> sample, double alpha);

// Distribution function and goodness of fit -------------------------------

/// P(X <= x) for X ~ SaS(alpha, sigma), from the Zolotarev integral
/// representation (non-oscillatory, finite range) with a split at the
/// integrand's transition point.
double stable_cdf(const StableParams& params, double x);

/// Anderson-Darling statistic of `sample` against SaS(params).
double anderson_darling_statistic(std::span<const double> sample, const StableParams& params);

struct AdTestResult {
  double p_value;
  double statistic;
  StableParams fitted;
  std::size_t n_sims;
};

/// Monte Carlo Anderson-Darling test of the symmetric stable hypothesis.
/// Parameters are fitted by McCulloch; the null distribution of the statistic
/// is simulated from the fitted law with a re-fit on every replicate.
/// Replicate k draws from rng.substream(k).
AdTestResult ad_stable_test(std::span<const double> sample, std::size_t n_sims, RandomStream& rng);

}  // namespace parstable
