#include <doctest.h>

#include <random>

#include "fxtnes/linalg.hpp"
#include "test_util.hpp"

using namespace fxtnes;
using namespace fxtnes::testing;

TEST_CASE("jacobi eigenvalues of a diagonal matrix") {
  Matrix d = Vector(vec({3, 1, 2})).asDiagonal();
  const auto eig = jacobi_eigen(d);
  CHECK(eig.values(0) == doctest::Approx(1.0));
  CHECK(eig.values(1) == doctest::Approx(2.0));
  CHECK(eig.values(2) == doctest::Approx(3.0));
}

TEST_CASE("jacobi decomposition reconstructs random symmetric matrices") {
  std::mt19937_64 rng(11);
  for (int trial = 0; trial < 50; ++trial) {
    const Eigen::Index n = 2 + trial % 9;
    Matrix a(n, n);
    for (Eigen::Index i = 0; i < n; ++i)
      for (Eigen::Index j = 0; j < n; ++j) a(i, j) = random_vector(rng, 1, 10.0)(0);
    a = symmetric_part(a);
    const auto eig = jacobi_eigen(a);
    const Matrix rebuilt = eig.vectors * eig.values.asDiagonal() * eig.vectors.transpose();
    CHECK((rebuilt - a).cwiseAbs().maxCoeff() < 1e-10);
    CHECK((eig.vectors.transpose() * eig.vectors - Matrix::Identity(n, n)).cwiseAbs().maxCoeff() <
          1e-12);
    for (Eigen::Index i = 1; i < n; ++i) CHECK(eig.values(i - 1) <= eig.values(i));
  }
}

TEST_CASE("jacobi agrees with power iteration on extreme eigenvalues") {
  std::mt19937_64 rng(5);
  for (int trial = 0; trial < 20; ++trial) {
    const Eigen::Index n = 3 + trial % 5;
    Matrix a(n, n);
    for (Eigen::Index i = 0; i < n; ++i) a.row(i) = random_vector(rng, n, 4.0).transpose();
    a = symmetric_part(a);
    const auto eig = jacobi_eigen(a);
    CHECK(std::abs(eig.values(0) - power_iteration_min(a)) < 1e-8);
  }
}

TEST_CASE("non-symmetric and non-square inputs are rejected") {
  Matrix a(2, 2);
  a << 1, 2, 0, 1;
  CHECK_THROWS_AS(jacobi_eigen(a), std::invalid_argument);
  CHECK_THROWS_AS(jacobi_eigen(Matrix(2, 3)), std::invalid_argument);
  CHECK(asymmetry(a) == doctest::Approx(2.0));
  CHECK(min_symmetric_eigenvalue(a) == doctest::Approx(0.0).epsilon(1e-12));
}
