#include <doctest.h>

#include <cmath>
#include <sstream>
#include <vector>

#include "parstable/covariation.hpp"
#include "parstable/monte_carlo.hpp"
#include "parstable/par_model.hpp"

using namespace parstable;

namespace {

ParModel scalar_ar1(double phi, double alpha, double w) {
  Eigen::MatrixXd th(1, 1);
  th << phi;
  Eigen::MatrixXd pts(1, 1);
  pts << 1.0;
  const std::vector<double> weights{w};
  return ParModel({th}, alpha, DiscreteSpectralMeasure::symmetrized(pts, weights));
}

}  // namespace

TEST_CASE("phases and periodic coefficients") {
  const auto m = model1_preset();
  CHECK(m.period() == 3);
  CHECK(m.dim() == 2);
  CHECK(m.phase_of(1) == 1);
  CHECK(m.phase_of(3) == 3);
  CHECK(m.phase_of(4) == 1);
  CHECK(m.phase_of(0) == 3);
  CHECK(m.phase_of(-2) == 1);
  CHECK(m.theta_at(5)(0, 0) == m.theta(2)(0, 0));
  CHECK(m.theta_at(-1)(1, 0) == m.theta(2)(1, 0));
  CHECK_THROWS_AS(m.theta(0), std::out_of_range);
  CHECK_THROWS_AS(m.theta(4), std::out_of_range);
  CHECK_FALSE(m.is_diagonal());
  CHECK(m.with_alpha(1.3).alpha() == 1.3);
  CHECK_THROWS_AS(m.with_alpha(0.9), std::invalid_argument);
}

TEST_CASE("g-products") {
  const auto m = model1_preset();
  CHECK(g_product(m, 7, 0).matrix.isIdentity());
  const Eigen::MatrixXd expected = m.theta(3) * m.theta(2) * m.theta(1);
  CHECK((g_product(m, 3, 3).matrix - expected).norm() < 1e-15);
  const auto ar = scalar_ar1(0.7, 1.5, 0.5);
  CHECK(g_product(ar, 10, 4).matrix(0, 0) == doctest::Approx(std::pow(0.7, 4)));
}

TEST_CASE("boundedness of the presets") {
  // Spectral radii of the one-period products, computed independently with numpy.
  const auto r1 = check_boundedness(model1_preset());
  CHECK(r1.bounded);
  CHECK(r1.spectral_radius == doctest::Approx(0.3109).epsilon(1e-3));
  const auto r2 = check_boundedness(model2_preset());
  CHECK(r2.bounded);
  CHECK(r2.spectral_radius == doctest::Approx(0.6391).epsilon(1e-3));

  const auto unstable = scalar_ar1(1.05, 1.5, 0.5);
  CHECK_FALSE(check_boundedness(unstable).bounded);
  RandomStream rng(1);
  CHECK_THROWS_AS(simulate_par1(unstable, 100, rng), std::invalid_argument);
  SimulationOptions opts;
  opts.allow_unbounded = true;
  CHECK_NOTHROW(simulate_par1(unstable, 100, rng, opts));
}

TEST_CASE("simulation is deterministic and labelled from t = 1") {
  const auto m = model1_preset();
  RandomStream a(9), b(9);
  const auto x = simulate_par1(m, 300, a);
  const auto y = simulate_par1(m, 300, b);
  CHECK(x.length() == 300);
  CHECK(x.dim() == 2);
  CHECK(x.t0() == 1);
  CHECK(x.values() == y.values());
  std::ostringstream os;
  write_trajectory_csv(os, x);
  CHECK(os.str().rfind("t,x1,x2\n1,", 0) == 0);
}

TEST_CASE("series covariation of a scalar AR(1)") {
  // X = sum_j phi^j Z(t-j): CV(X(t), X(t)) = sigma_Z^alpha / (1 - |phi|^alpha)
  // and CV(X(t+k), X(t)) = phi^k CV(X(t), X(t)).
  const double phi = -0.6, alpha = 1.5, w = 0.4;
  const auto m = scalar_ar1(phi, alpha, w);
  const double var = 2.0 * w / (1.0 - std::pow(std::abs(phi), alpha));
  CHECK(theoretical_cv(m, 0, 0, 5, 5).value == doctest::Approx(var).epsilon(1e-12));
  CHECK(theoretical_cv(m, 0, 0, 7, 5).value == doctest::Approx(phi * phi * var).epsilon(1e-12));
  // Backward lag: CV(X(t), X(t+1)) = sum_j phi^j (phi^{j+1})^<alpha-1> sigma^alpha.
  const double back = 2.0 * w * signed_power(phi, alpha - 1.0) / (1.0 - std::pow(std::abs(phi), alpha));
  CHECK(theoretical_cv(m, 0, 0, 5, 6).value == doctest::Approx(back).epsilon(1e-12));
  CHECK(theoretical_cv_diagonal(m, 0, 0, 5, 6) == doctest::Approx(back).epsilon(1e-12));
  const auto short_sum = theoretical_cv(m, 0, 0, 5, 5, 3);
  CHECK(short_sum.truncation_warning);
}

TEST_CASE("closed form refuses non-diagonal models") {
  CHECK_THROWS_AS(theoretical_cv_diagonal(model1_preset(), 0, 0, 1, 1), std::invalid_argument);
}

TEST_CASE("normalized matrix columns are scaled covariations") {
  const auto m = model1_preset(1.7);
  const auto cv = theoretical_cv_matrix(m, 2, 1);
  const auto ncv = theoretical_ncv_matrix(m, 2, 1);
  for (Eigen::Index l = 0; l < 2; ++l) {
    const double s = theoretical_cv(m, static_cast<std::size_t>(l), static_cast<std::size_t>(l), 1, 1).value;
    CHECK(ncv(0, l) == doctest::Approx(cv(0, l) / s));
    CHECK(ncv(1, l) == doctest::Approx(cv(1, l) / s));
  }
  const auto lag0 = theoretical_ncv_matrix(m, 3, 0);
  CHECK(lag0(0, 0) == doctest::Approx(1.0));
  CHECK(lag0(1, 1) == doctest::Approx(1.0));
}

TEST_CASE("sample normalized covariation approaches the theoretical value") {
  // E[X_r sign X_l] / E|X_l| equals CV(X_r, X_l) / CV(X_l, X_l).
  const auto m = model1_preset(1.8);
  RandomStream rng(2024);
  const auto traj = simulate_par1(m, 300000, rng);
  const auto est = ncv_phase_matrix(traj, 3, 2, 1).values;
  const auto truth = theoretical_ncv_matrix(m, 2, 1);
  CHECK((est - truth).cwiseAbs().maxCoeff() < 0.05);
}
