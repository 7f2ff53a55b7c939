#include <doctest.h>

#include <cmath>
#include <sstream>
#include <vector>

#include "parstable/errors.hpp"
#include "parstable/estimation.hpp"
#include "parstable/monte_carlo.hpp"

using namespace parstable;

namespace {

void theoretical_inputs(const ParModel& model, bool normalized, std::vector<Eigen::MatrixXd>& lag0,
                        std::vector<Eigen::MatrixXd>& lag1) {
  for (long v = 1; v <= static_cast<long>(model.period()); ++v) {
    lag1.push_back(normalized ? theoretical_ncv_matrix(model, v, 1) : theoretical_cv_matrix(model, v, 1));
    lag0.push_back(normalized ? theoretical_ncv_matrix(model, v - 1, 0)
                              : theoretical_cv_matrix(model, v - 1, 0));
  }
}

double max_error(const std::vector<Eigen::MatrixXd>& est, const ParModel& model) {
  double e = 0.0;
  for (std::size_t v = 1; v <= model.period(); ++v) {
    e = std::max(e, (est[v - 1] - model.theta(v)).cwiseAbs().maxCoeff());
  }
  return e;
}

MultiTrajectory permuted(const MultiTrajectory& traj, const std::vector<Eigen::Index>& perm) {
  RowMatrix v(traj.values().rows(), traj.values().cols());
  for (std::size_t k = 0; k < perm.size(); ++k) v.row(static_cast<Eigen::Index>(k)) = traj.values().row(perm[k]);
  return MultiTrajectory(v);
}

}  // namespace

TEST_CASE("method names") {
  CHECK(parse_method("yw-cv") == Method::YwCv);
  CHECK(parse_method("YW_T") == Method::YwT);
  CHECK(std::string(to_string(Method::YwT)) == "YW-T");
  CHECK_THROWS_AS(parse_method("ols"), std::invalid_argument);
}

TEST_CASE("exact recovery from theoretical matrices") {
  for (double alpha : {1.3, 1.8}) {
    for (const auto& model : {model1_preset(alpha), model2_preset(alpha)}) {
      std::vector<Eigen::MatrixXd> n0, n1, c0, c1;
      theoretical_inputs(model, true, n0, n1);
      theoretical_inputs(model, false, c0, c1);
      const auto a = estimate_from_matrices(n0, n1, Method::YwCv);
      const auto b = estimate_from_matrices(c0, c1, Method::YwT);
      CHECK(a.all_converged());
      CHECK(max_error(a.theta_hat, model) < 1e-6);
      CHECK(max_error(b.theta_hat, model) < 1e-6);
      for (std::size_t v = 0; v < model.period(); ++v) {
        CHECK((a.theta_hat[v] - b.theta_hat[v]).cwiseAbs().maxCoeff() < 1e-10);
      }
    }
  }
}

TEST_CASE("column scaling leaves the solution unchanged") {
  RandomStream rng(3);
  Eigen::MatrixXd m0(3, 3), m1(3, 3);
  for (Eigen::Index i = 0; i < 3; ++i) {
    for (Eigen::Index j = 0; j < 3; ++j) {
      m0(i, j) = rng.uniform(-1.0, 1.0) + (i == j ? 2.0 : 0.0);
      m1(i, j) = rng.uniform(-1.0, 1.0);
    }
  }
  Eigen::Vector3d d(0.3, 2.5, 7.0);
  const auto a = estimate_from_matrices({m0}, {m1}, Method::YwCv);
  const auto b = estimate_from_matrices({m0 * d.asDiagonal()}, {m1 * d.asDiagonal()}, Method::YwCv);
  CHECK((a.theta_hat[0] - b.theta_hat[0]).cwiseAbs().maxCoeff() < 1e-10);
}

TEST_CASE("scalar AR(1) reduces to the ratio of normalized covariations") {
  RandomStream rng(8);
  RowMatrix x(1, 400);
  double prev = 0.0;
  for (Eigen::Index k = 0; k < 400; ++k) {
    prev = 0.5 * prev + rng.uniform(-1.0, 1.0);
    x(0, k) = prev;
  }
  const MultiTrajectory traj(x);
  const auto est = yw_cv_estimate(traj, 1);
  // With T = 1: lag-1 sums over t = 2..L, lag-0 over t = 1..L-1 (phase 0, n >= 1).
  double num = 0.0, den = 0.0;
  for (Eigen::Index k = 1; k < 400; ++k) {
    num += x(0, k) * (x(0, k - 1) > 0 ? 1.0 : -1.0);
    den += std::abs(x(0, k - 1));
  }
  CHECK(est.theta_hat[0](0, 0) == doctest::Approx(num / den).epsilon(1e-12));
}

TEST_CASE("estimates on simulated data") {
  const auto model = model1_preset(1.8);
  RandomStream rng(12);
  const auto traj = simulate_par1(model, 20000, rng);
  const auto cv = yw_cv_estimate(traj, 3);
  CHECK(cv.method == Method::YwCv);
  CHECK(cv.period() == 3);
  CHECK(cv.dim() == 2);
  CHECK_FALSE(cv.alpha_used.has_value());
  CHECK(max_error(cv.theta_hat, model) < 0.1);

  const auto t = yw_t_estimate(traj, 3);
  REQUIRE(t.alpha_used.has_value());
  CHECK(*t.alpha_used == doctest::Approx(1.8).epsilon(0.05));
  CHECK(max_error(t.theta_hat, model) < 0.15);
  CHECK_THROWS_AS(yw_t_estimate(traj, 3, 2.5), std::invalid_argument);
}

TEST_CASE("relabeling components permutes the estimates") {
  const auto model = model2_preset(1.7);
  RandomStream rng(21);
  const auto traj = simulate_par1(model, 3000, rng);
  const std::vector<Eigen::Index> perm{2, 0, 1};
  const auto a = yw_cv_estimate(traj, 2);
  const auto b = yw_cv_estimate(permuted(traj, perm), 2);
  for (std::size_t v = 0; v < 2; ++v) {
    for (Eigen::Index i = 0; i < 3; ++i) {
      for (Eigen::Index j = 0; j < 3; ++j) {
        CHECK(b.theta_hat[v](i, j) == doctest::Approx(a.theta_hat[v](perm[static_cast<std::size_t>(i)], perm[static_cast<std::size_t>(j)])).epsilon(1e-9));
      }
    }
  }
}

TEST_CASE("input validation") {
  RowMatrix x = RowMatrix::Zero(2, 40);
  CHECK_THROWS_AS(yw_cv_estimate(MultiTrajectory(x), 3), DataError);
  RowMatrix shortx = RowMatrix::Ones(2, 10);
  CHECK_THROWS_AS(yw_cv_estimate(MultiTrajectory(shortx), 3), DataError);
  CHECK_THROWS_AS(estimate_from_matrices({}, {}, Method::YwCv), std::invalid_argument);
  Eigen::MatrixXd nan = Eigen::MatrixXd::Identity(2, 2);
  nan(0, 0) = std::nan("");
  CHECK_THROWS_AS(estimate_from_matrices({Eigen::MatrixXd::Identity(2, 2)}, {nan}, Method::YwCv), NumericalError);
}

TEST_CASE("residuals") {
  const auto model = model1_preset();
  RandomStream rng(2);
  const auto traj = simulate_par1(model, 30, rng);
  const auto z = par_residuals(traj, model.thetas());
  CHECK(z.length() == 29);
  CHECK(z.t0() == 2);
  const Eigen::VectorXd expect = traj.column(5) - model.theta(2) * traj.column(4);
  CHECK((z.column(4) - expect).norm() < 1e-14);
}

TEST_CASE("coefficient CSV round trip") {
  const auto model = model2_preset();
  std::ostringstream os;
  write_estimates_csv(os, model.thetas());
  const std::string text = os.str();
  CHECK(text.rfind("v,theta_11,theta_12,theta_13,theta_21,", 0) == 0);
  std::istringstream is(text);
  const auto back = read_estimates_csv(is);
  REQUIRE(back.size() == 2);
  CHECK(back[1] == model.theta(2));
  std::istringstream bad("v,theta_11,theta_12\n1,0.1,0.2\n");
  CHECK_THROWS_AS(read_estimates_csv(bad), DataError);
}
