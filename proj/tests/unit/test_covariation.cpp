#include <doctest.h>

#include <cmath>
#include <vector>

#include "parstable/covariation.hpp"
#include "parstable/errors.hpp"
#include "parstable/monte_carlo.hpp"

using namespace parstable;

namespace {

MultiTrajectory from_rows(std::initializer_list<std::vector<double>> rows) {
  const auto m = static_cast<Eigen::Index>(rows.size());
  const auto L = static_cast<Eigen::Index>(rows.begin()->size());
  RowMatrix v(m, L);
  Eigen::Index i = 0;
  for (const auto& r : rows) {
    for (Eigen::Index k = 0; k < L; ++k) v(i, k) = r[static_cast<std::size_t>(k)];
    ++i;
  }
  return MultiTrajectory(v);
}

}  // namespace

TEST_CASE("normalized auto-covariation by hand") {
  const std::vector<double> ones{1, 1, 1, 1};
  CHECK(ncv_auto(ones, 0) == 1.0);
  // Numerator t = 2..4 gives 3, denominator t = 2..4 gives 3.
  CHECK(ncv_auto(ones, 1) == doctest::Approx(1.0));
  const std::vector<double> x{1.0, -2.0, 3.0, -0.5};
  // h = 1: [(-2)(+1) + 3(-1) + (-0.5)(+1)] / (2 + 3 + 0.5)
  CHECK(ncv_auto(x, 1) == doctest::Approx(-5.5 / 5.5));
  // h = -1: t = 1..3, x(t) sign x(t+1); denominator t = 1..4.
  CHECK(ncv_auto(x, -1) == doctest::Approx((1.0 * -1 + -2.0 * 1 + 3.0 * -1) / 6.5));
  CHECK(ncv_auto(x, 0) == 1.0);
  const std::vector<double> zeros(5, 0.0);
  CHECK_THROWS_AS(ncv_auto(zeros, 1), DataError);
  CHECK_THROWS_AS(ncv_auto(x, 4), std::invalid_argument);
}

TEST_CASE("cross covariation uses the second series for sign and scale") {
  const std::vector<double> a{1.0, 2.0, 3.0};
  const std::vector<double> b{-1.0, 1.0, 4.0};
  CHECK(ncv_cross(a, b, 0) == doctest::Approx((-1.0 + 2.0 + 3.0) / 6.0));
  const auto traj = from_rows({a, b});
  CHECK(ncv_cross(traj, 0, 1, 0) == ncv_cross(a, b, 0));
}

TEST_CASE("phase index rule") {
  CHECK(phase_start(2, 1) == 0);
  CHECK(phase_start(1, 1) == 1);
  CHECK(phase_start(1, 0) == 0);
  CHECK(phase_start(0, 0) == 1);

  std::vector<double> r1, r2;
  for (int k = 1; k <= 12; ++k) {
    r1.push_back(k);
    r2.push_back(-k);
  }
  const auto traj = from_rows({r1, r2});
  // T = 3, N = 4. Phase 1 at lag 1 pairs x(nT+1) with x(nT) for n = 1..3.
  const auto [x, y] = phase_pairs(traj, 3, 1, 1, 0, 1);
  CHECK(x == std::vector<double>{4, 7, 10});
  CHECK(y == std::vector<double>{-3, -6, -9});
  // Its lag-0 partner at phase 0 uses the same conditioning observations.
  const auto [u, w] = phase_pairs(traj, 3, 0, 0, 1, 1);
  CHECK(u == y);
  const auto [p, q] = phase_pairs(traj, 3, 2, 1, 0, 0);
  CHECK(p == std::vector<double>{2, 5, 8, 11});
  CHECK(q == std::vector<double>{1, 4, 7, 10});
}

TEST_CASE("phase matrices") {
  RandomStream rng(1);
  const auto traj = simulate_par1(model1_preset(), 600, rng);
  for (std::size_t v = 0; v <= 3; ++v) {
    const auto m0 = ncv_phase_matrix(traj, 3, v, 0);
    CHECK(m0.values(0, 0) == 1.0);
    CHECK(m0.values(1, 1) == 1.0);
    CHECK(m0.kind == CovKind::NormalizedMoment);
  }
  const auto m1 = ncv_phase_matrix(traj, 3, 2, 1);
  const auto [x, y] = phase_pairs(traj, 3, 2, 1, 1, 0);
  double num = 0.0, den = 0.0;
  for (std::size_t k = 0; k < x.size(); ++k) {
    num += x[k] * (y[k] > 0 ? 1.0 : (y[k] < 0 ? -1.0 : 0.0));
    den += std::abs(y[k]);
  }
  CHECK(m1.values(1, 0) == doctest::Approx(num / den));

  CHECK_THROWS_AS(ncv_phase_matrix(traj, 400, 1, 1), DataError);
  CHECK_THROWS_AS(ncv_phase_matrix(traj, 3, 4, 1), std::invalid_argument);
  CHECK_THROWS_AS(ncv_phase_matrix(traj, 3, 1, 2), std::invalid_argument);
  RowMatrix zero = RowMatrix::Zero(2, 30);
  zero.row(0).setOnes();
  CHECK_THROWS_AS(ncv_phase_matrix(MultiTrajectory(zero), 3, 1, 0), DataError);
}

TEST_CASE("covariation from a 2-D measure") {
  Eigen::MatrixXd half(2, 1);
  half << 0.6, 0.8;
  const std::vector<double> w{0.5};
  const auto m = DiscreteSpectralMeasure::symmetrized(half, w);
  CHECK(cv_from_spectral(m, 1.5) == doctest::Approx(2.0 * 0.5 * 0.6 * std::pow(0.8, 0.5)));
  Eigen::MatrixXd three(3, 1);
  three << 1.0, 0.0, 0.0;
  CHECK_THROWS_AS(cv_from_spectral(DiscreteSpectralMeasure(three, {1.0}), 1.5), std::invalid_argument);
}

TEST_CASE("projection method recovers covariation and mass") {
  const double alpha = 1.8;
  const auto noise = model1_preset(alpha).noise();
  RandomStream rng(31);
  const Eigen::MatrixXd z = sample_stable_vector(noise, alpha, 20000, rng);
  std::vector<double> x(static_cast<std::size_t>(z.cols())), y(x.size());
  for (Eigen::Index k = 0; k < z.cols(); ++k) {
    x[static_cast<std::size_t>(k)] = z(0, k);
    y[static_cast<std::size_t>(k)] = z(1, k);
  }
  const auto est = estimate_spectral_measure_2d(x, y, alpha);
  CHECK(est.is_symmetric());
  CHECK(est.total_mass() == doctest::Approx(noise.total_mass()).epsilon(0.1));
  CHECK(cv_from_spectral(est, alpha) == doctest::Approx(noise.covariation(0, 1, alpha)).epsilon(0.15));
  CHECK(est.covariation(1, 0, alpha) == doctest::Approx(noise.covariation(1, 0, alpha)).epsilon(0.15));

  const std::vector<double> small(50, 1.0);
  CHECK_THROWS_AS(estimate_spectral_measure_2d(small, small, alpha), DataError);
  ProjectionOptions odd;
  odd.n_grid = 7;
  CHECK_THROWS_AS(estimate_spectral_measure_2d(x, y, alpha, odd), std::invalid_argument);
}

TEST_CASE("spectral covariation matrices track the theoretical ones") {
  const auto model = model1_preset(1.8);
  RandomStream rng(77);
  const auto traj = simulate_par1(model, 60000, rng);
  const auto est = cv_phase_matrix_spectral(traj, 3, 1, 1, 1.8);
  CHECK(est.kind == CovKind::Spectral);
  const auto truth = theoretical_cv_matrix(model, 1, 1);
  CHECK((est.values - truth).cwiseAbs().maxCoeff() < 0.15 * truth.cwiseAbs().maxCoeff());
}
