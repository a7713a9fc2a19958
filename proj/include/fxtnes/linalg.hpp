#pragma once

#include <Eigen/Dense>

namespace fxtnes {

using Vector = Eigen::VectorXd;
using Matrix = Eigen::MatrixXd;

/// Eigen-decomposition of a real symmetric matrix. Values are sorted in
/// ascending order; column j of `vectors` belongs to `values[j]`.
struct SymmetricEigen {
  Vector values;
  Matrix vectors;
};

/// Cyclic Jacobi rotations. Intended for desk-scale matrices (n <= 32 or so);
/// cost is O(n^3) per sweep. Throws std::invalid_argument if `a` is not
/// square or not symmetric to within `symmetry_tol` (absolute, max entry).
SymmetricEigen jacobi_eigen(const Matrix& a, double symmetry_tol = 1e-9,
                            int max_sweeps = 64);

Matrix symmetric_part(const Matrix& a);

/// Smallest eigenvalue of (a + a^T)/2.
double min_symmetric_eigenvalue(const Matrix& a);

/// Largest absolute entry of a - a^T.
double asymmetry(const Matrix& a);

}  // namespace fxtnes
