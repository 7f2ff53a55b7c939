#include <doctest.h>

#include "parstable/errors.hpp"
#include "parstable/random.hpp"
#include "parstable/solver.hpp"

using namespace parstable;

namespace {

Eigen::MatrixXd random_matrix(Eigen::Index r, Eigen::Index c, RandomStream& rng) {
  Eigen::MatrixXd a(r, c);
  for (Eigen::Index i = 0; i < r; ++i) {
    for (Eigen::Index j = 0; j < c; ++j) a(i, j) = rng.uniform(-1.0, 1.0);
  }
  return a;
}

}  // namespace

TEST_CASE("bicgstab on the identity") {
  RandomStream rng(1);
  const Eigen::VectorXd b = random_matrix(6, 1, rng);
  const auto rep = bicgstab(Eigen::MatrixXd::Identity(6, 6), b, 1e-12, 10);
  CHECK(rep.converged);
  CHECK(rep.iterations <= 1);
  CHECK((rep.solution - b).norm() < 1e-14);
}

TEST_CASE("bicgstab manufactured solution") {
  RandomStream rng(2);
  Eigen::MatrixXd a = random_matrix(5, 5, rng) + 3.0 * Eigen::MatrixXd::Identity(5, 5);
  const Eigen::VectorXd x = random_matrix(5, 1, rng);
  const auto rep = bicgstab(a, a * x, 1e-12, 100);
  CHECK(rep.converged);
  CHECK((rep.solution - x).cwiseAbs().maxCoeff() < 1e-8);
  CHECK(rep.residual_norm <= 1e-12 * (a * x).norm());
}

TEST_CASE("bicgstab on a consistent rank-one system") {
  Eigen::VectorXd u(4);
  u << 1.0, -2.0, 0.5, 3.0;
  const Eigen::MatrixXd a = u * u.transpose();
  const auto rep = bicgstab(a, u, 1e-10, 100);
  CHECK(rep.converged);
  CHECK((a * rep.solution - u).norm() <= 1e-10 * u.norm());
}

TEST_CASE("bicgstab reports failure on an inconsistent singular system") {
  Eigen::MatrixXd a = Eigen::MatrixXd::Zero(3, 3);
  a(0, 0) = 1.0;
  a(1, 1) = 2.0;
  Eigen::VectorXd b(3);
  b << 1.0, 1.0, 1.0;
  const auto rep = bicgstab(a, b, 1e-10, 50);
  CHECK_FALSE(rep.converged);
  CHECK(rep.residual_norm >= 1.0 - 1e-12);
  CHECK(!rep.detail.empty());
  CHECK_THROWS_AS(bicgstab(a, b, 0.0, 10), std::invalid_argument);
  CHECK_THROWS_AS(bicgstab(a, b, 1e-8, 0), std::invalid_argument);
}

TEST_CASE("zero right-hand side") {
  const auto rep = bicgstab(Eigen::MatrixXd::Identity(3, 3), Eigen::VectorXd::Zero(3), 1e-10, 5);
  CHECK(rep.converged);
  CHECK(rep.solution.isZero());
}

TEST_CASE("ILU(0) of a dense matrix is its LU factorization") {
  RandomStream rng(3);
  const Eigen::MatrixXd a = random_matrix(6, 6, rng) + 4.0 * Eigen::MatrixXd::Identity(6, 6);
  const IncompleteLU ilu(a);
  const Eigen::MatrixXd& f = ilu.factors();
  const Eigen::MatrixXd l = f.triangularView<Eigen::UnitLower>();
  const Eigen::MatrixXd u = f.triangularView<Eigen::Upper>();
  CHECK((l * u - a).norm() < 1e-12);
  const Eigen::VectorXd b = random_matrix(6, 1, rng);
  CHECK((a * ilu.apply(b) - b).norm() < 1e-12);

  Eigen::MatrixXd sing = Eigen::MatrixXd::Identity(3, 3);
  sing(0, 0) = 0.0;
  sing(1, 0) = 1.0;
  CHECK_THROWS_AS(IncompleteLU{sing}, NumericalError);
}

TEST_CASE("ILU(0) keeps the sparsity pattern") {
  Eigen::MatrixXd a = 4.0 * Eigen::MatrixXd::Identity(10, 10);
  for (Eigen::Index i = 0; i + 1 < 10; ++i) {
    a(i, i + 1) = -1.0;
    a(i + 1, i) = -1.0;
  }
  a(0, 9) = 0.5;
  const IncompleteLU ilu(a);
  for (Eigen::Index i = 0; i < 10; ++i) {
    for (Eigen::Index j = 0; j < 10; ++j) {
      if (a(i, j) == 0.0) CHECK(ilu.factors()(i, j) == 0.0);
    }
  }
}

TEST_CASE("preconditioned and plain runs agree") {
  RandomStream rng(4);
  const Eigen::MatrixXd a = random_matrix(12, 12, rng) + 5.0 * Eigen::MatrixXd::Identity(12, 12);
  const Eigen::VectorXd b = random_matrix(12, 1, rng);
  const IncompleteLU ilu(a);
  const auto plain = bicgstab(a, b, 1e-12, 500);
  const auto pre = bicgstab(a, b, 1e-12, 500, &ilu);
  CHECK(plain.converged);
  CHECK(pre.converged);
  CHECK((plain.solution - pre.solution).cwiseAbs().maxCoeff() < 1e-8);
  CHECK(pre.iterations <= plain.iterations);
}

TEST_CASE("solution1") {
  RandomStream rng(5);
  SUBCASE("identity M0 returns M1") {
    const Eigen::MatrixXd m1 = random_matrix(3, 3, rng);
    const auto rep = solution1(Eigen::MatrixXd::Identity(3, 3), m1);
    CHECK(rep.converged);
    CHECK(rep.method == SolveMethod::BiCGStab);
    CHECK((rep.solution - m1).norm() < 1e-12);
  }
  SUBCASE("manufactured coefficients, m = 2..9, against the direct inverse") {
    for (Eigen::Index m = 2; m <= 9; ++m) {
      const Eigen::MatrixXd m0 = random_matrix(m, m, rng) + 2.0 * Eigen::MatrixXd::Identity(m, m);
      const Eigen::MatrixXd th = random_matrix(m, m, rng);
      const Eigen::MatrixXd m1 = th * m0;
      const auto rep = solution1(m0, m1);
      CHECK(rep.converged);
      CHECK((rep.solution - th).cwiseAbs().maxCoeff() < 1e-8);
      CHECK((rep.solution - m1 * m0.inverse()).cwiseAbs().maxCoeff() < 1e-8);
      CHECK(rep.residual_norm <= 1e-10 * m1.norm());
    }
  }
  SUBCASE("inconsistent singular system is flagged") {
    Eigen::MatrixXd m0 = Eigen::MatrixXd::Zero(2, 2);
    m0(0, 0) = 1.0;
    const Eigen::MatrixXd m1 = Eigen::MatrixXd::Ones(2, 2);
    const auto rep = solution1(m0, m1);
    CHECK_FALSE(rep.converged);
    CHECK(rep.inconsistent);
  }
  CHECK_THROWS_AS(solution1(Eigen::MatrixXd::Identity(2, 2), Eigen::MatrixXd::Identity(3, 3)),
                  std::invalid_argument);
}

TEST_CASE("routing between direct and iterative solves") {
  RandomStream rng(6);
  const Eigen::MatrixXd m0 = random_matrix(3, 3, rng) + 2.0 * Eigen::MatrixXd::Identity(3, 3);
  const Eigen::MatrixXd m1 = random_matrix(3, 3, rng);
  const auto direct = solve_coefficients(m0, m1);
  CHECK(direct.method == SolveMethod::Direct);
  CHECK((direct.solution * m0 - m1).norm() < 1e-12);

  // Rank-deficient but consistent: handed to solution1.
  Eigen::MatrixXd s0 = random_matrix(3, 2, rng) * random_matrix(2, 3, rng);
  const Eigen::MatrixXd s1 = random_matrix(3, 3, rng) * s0;
  const auto rep = solve_coefficients(s0, s1);
  CHECK(rep.method == SolveMethod::BiCGStab);
  CHECK(rep.converged);
  CHECK(rep.residual_norm <= 1e-10 * s1.norm());
  CHECK(std::string(to_string(SolveMethod::Direct)) == "direct");
}
