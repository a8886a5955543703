#pragma once

#include "reachguard/geometry.hpp"

namespace reachguard {

/// Eigen-decomposition of a symmetric matrix; values sorted non-increasing,
/// `vectors.col(k)` pairs with `values[k]`.
struct SymmetricEigen {
  Vector values;
  Matrix vectors;
};

/// Cyclic Jacobi rotations. Deterministic for identical input.
SymmetricEigen symmetric_eigen(const Matrix& s);

/// Largest eigenvalue of the symmetric part (J + J^T)/2.
double sym_part_max_eig(const Matrix& j);

/// sqrt(sum_ij bounds_ij^2): upper bound on the spectral norm of any matrix
/// whose entries are bounded in magnitude by `bounds`.
double entrywise_norm_upper(const Matrix& bounds);

/// Spectral norm via the symmetric eigensolver on M^T M.
double spectral_norm(const Matrix& m);

struct WeylReport {
  Vector eig_a;    // non-increasing
  Vector eig_e;
  Vector eig_sum;  // eigenvalues of A + E
  /// Largest amount by which lambda_n(E) <= lambda_k(A+E) - lambda_k(A) <= lambda_1(E)
  /// is violated over k (<= 0 when the sandwich holds).
  double max_violation = 0.0;

  bool holds(double slack) const { return max_violation <= slack; }
};

WeylReport weyl_shift_bounds(const Matrix& a, const Matrix& e);

/// Invertible similarity P with P J P^-1 in real block form.
/// P is scaled so that ||P^-1|| = 1, hence ||P|| = cond.
struct Transform {
  Matrix p;
  Matrix p_inv;
  double cond = 1.0;
  bool identity_fallback = true;

  static Transform identity(Eigen::Index n);
};

/// Real block diagonalization from an eigendecomposition: 1x1 blocks for real
/// eigenvalues and [[a, c], [-c, a]] for a +- ci. Falls back to the identity
/// when eigenvalues are not separated by 1e-6 ||J||, when the eigenvector
/// matrix is ill-conditioned beyond `cond_cap`, or when the reconstruction
/// misses the block form by more than 1e-6 ||J||. Symmetric J always gets an
/// orthogonal P.
Transform real_block_transform(const Matrix& j, double cond_cap = 1e6);

/// True when the symmetric-part eigenvalue bound is strictly negative.
bool contraction_check(double sym_eig_upper);

}  // namespace reachguard
