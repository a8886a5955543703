#include "reachguard/linalg.hpp"

#include "reachguard/error.hpp"

#include <Eigen/Eigenvalues>
#include <Eigen/LU>

#include <algorithm>
#include <cmath>
#include <complex>
#include <numeric>
#include <vector>

namespace reachguard {

namespace {

void require_square_finite(const Matrix& m, const char* where) {
  if (m.rows() != m.cols() || m.rows() == 0) {
    throw Error(ErrorCode::kDimensionMismatch, std::string(where) + ": matrix must be square and non-empty");
  }
  if (!m.allFinite()) throw Error(ErrorCode::kNonFinite, std::string(where) + ": non-finite entry");
}

double max_abs(const Matrix& m) { return m.cwiseAbs().maxCoeff(); }

void require_symmetric(const Matrix& m, const char* where) {
  require_square_finite(m, where);
  if (max_abs(m - m.transpose()) > 1e-12 * std::max(1.0, max_abs(m))) {
    throw Error(ErrorCode::kInvalidArgument, std::string(where) + ": matrix is not symmetric");
  }
}

}  // namespace

SymmetricEigen symmetric_eigen(const Matrix& s) {
  require_square_finite(s, "symmetric_eigen");
  const Eigen::Index n = s.rows();
  Matrix a = 0.5 * (s + s.transpose());
  Matrix v = Matrix::Identity(n, n);

  const double frob = a.norm();
  for (int sweep = 0; sweep < 100; ++sweep) {
    double off = 0.0;
    for (Eigen::Index p = 0; p < n; ++p)
      for (Eigen::Index q = p + 1; q < n; ++q) off += a(p, q) * a(p, q);
    if (off == 0.0 || std::sqrt(off) <= 1e-16 * frob) break;

    for (Eigen::Index p = 0; p < n; ++p) {
      for (Eigen::Index q = p + 1; q < n; ++q) {
        const double apq = a(p, q);
        if (apq == 0.0) continue;
        const double theta = (a(q, q) - a(p, p)) / (2.0 * apq);
        const double t = (theta >= 0.0 ? 1.0 : -1.0) / (std::abs(theta) + std::sqrt(theta * theta + 1.0));
        const double c = 1.0 / std::sqrt(t * t + 1.0);
        const double sn = t * c;
        for (Eigen::Index k = 0; k < n; ++k) {
          const double akp = a(k, p), akq = a(k, q);
          a(k, p) = c * akp - sn * akq;
          a(k, q) = sn * akp + c * akq;
        }
        for (Eigen::Index k = 0; k < n; ++k) {
          const double apk = a(p, k), aqk = a(q, k);
          a(p, k) = c * apk - sn * aqk;
          a(q, k) = sn * apk + c * aqk;
        }
        for (Eigen::Index k = 0; k < n; ++k) {
          const double vkp = v(k, p), vkq = v(k, q);
          v(k, p) = c * vkp - sn * vkq;
          v(k, q) = sn * vkp + c * vkq;
        }
      }
    }
  }

  std::vector<Eigen::Index> order(static_cast<std::size_t>(n));
  std::iota(order.begin(), order.end(), Eigen::Index{0});
  std::stable_sort(order.begin(), order.end(), [&](auto i, auto j) { return a(i, i) > a(j, j); });

  SymmetricEigen out{Vector(n), Matrix(n, n)};
  for (Eigen::Index k = 0; k < n; ++k) {
    out.values[k] = a(order[k], order[k]);
    out.vectors.col(k) = v.col(order[k]);
  }
  return out;
}

double sym_part_max_eig(const Matrix& j) {
  require_square_finite(j, "sym_part_max_eig");
  return symmetric_eigen(0.5 * (j + j.transpose())).values[0];
}

double entrywise_norm_upper(const Matrix& bounds) {
  if (!bounds.allFinite()) throw Error(ErrorCode::kNonFinite, "entrywise_norm_upper: non-finite bound");
  if (bounds.size() > 0 && bounds.minCoeff() < 0.0) {
    throw Error(ErrorCode::kInvalidArgument, "entrywise_norm_upper: negative bound");
  }
  return bounds.norm();
}

double spectral_norm(const Matrix& m) {
  if (!m.allFinite()) throw Error(ErrorCode::kNonFinite, "spectral_norm: non-finite entry");
  if (m.size() == 0) return 0.0;
  const Matrix gram = m.transpose() * m;
  return std::sqrt(std::max(0.0, symmetric_eigen(gram).values[0]));
}

WeylReport weyl_shift_bounds(const Matrix& a, const Matrix& e) {
  require_symmetric(a, "weyl_shift_bounds(A)");
  require_symmetric(e, "weyl_shift_bounds(E)");
  if (a.rows() != e.rows()) throw Error(ErrorCode::kDimensionMismatch, "weyl_shift_bounds: size mismatch");

  WeylReport r;
  r.eig_a = symmetric_eigen(a).values;
  r.eig_e = symmetric_eigen(e).values;
  r.eig_sum = symmetric_eigen(a + e).values;
  const double lo = r.eig_e[r.eig_e.size() - 1];
  const double hi = r.eig_e[0];
  r.max_violation = -std::numeric_limits<double>::infinity();
  for (Eigen::Index k = 0; k < a.rows(); ++k) {
    const double shift = r.eig_sum[k] - r.eig_a[k];
    r.max_violation = std::max({r.max_violation, lo - shift, shift - hi});
  }
  return r;
}

Transform Transform::identity(Eigen::Index n) {
  return Transform{Matrix::Identity(n, n), Matrix::Identity(n, n), 1.0, true};
}

namespace {

Transform finish_transform(Matrix w, const Matrix& w_inv_unscaled, double cond_cap) {
  const double w_norm = spectral_norm(w);
  Matrix w_inv = w_inv_unscaled;
  const double cond = w_norm * spectral_norm(w_inv);
  if (!std::isfinite(cond) || cond > cond_cap) return Transform::identity(w.rows());
  w /= w_norm;
  w_inv *= w_norm;
  return Transform{std::move(w_inv), std::move(w), std::max(1.0, cond), false};
}

}  // namespace

Transform real_block_transform(const Matrix& j, double cond_cap) {
  if (j.rows() != j.cols() || j.rows() == 0) {
    throw Error(ErrorCode::kDimensionMismatch, "real_block_transform: matrix must be square");
  }
  const Eigen::Index n = j.rows();
  if (!j.allFinite()) return Transform::identity(n);
  const double scale = spectral_norm(j);
  if (scale == 0.0) return Transform::identity(n);

  if (max_abs(j - j.transpose()) <= 1e-12 * scale) {
    const SymmetricEigen se = symmetric_eigen(j);
    return finish_transform(se.vectors, se.vectors.transpose(), cond_cap);
  }

  Eigen::EigenSolver<Matrix> es(j, true);
  if (es.info() != Eigen::Success) return Transform::identity(n);
  const Eigen::VectorXcd lambda = es.eigenvalues();
  const Eigen::MatrixXcd vecs = es.eigenvectors();

  for (Eigen::Index a = 0; a < n; ++a)
    for (Eigen::Index b = a + 1; b < n; ++b)
      if (std::abs(lambda[a] - lambda[b]) < 1e-6 * scale) return Transform::identity(n);

  const double imag_tol = 1e-9 * scale;
  Matrix w(n, n);
  Matrix block = Matrix::Zero(n, n);
  Eigen::Index col = 0;
  for (Eigen::Index k = 0; k < n; ++k) {
    const std::complex<double> lk = lambda[k];
    if (std::abs(lk.imag()) <= imag_tol) {
      Vector v = vecs.col(k).real();
      const double nv = v.norm();
      if (col >= n || nv == 0.0) return Transform::identity(n);
      w.col(col) = v / nv;
      block(col, col) = lk.real();
      ++col;
    } else if (lk.imag() > 0.0) {
      Eigen::VectorXcd v = vecs.col(k);
      const double nv = v.norm();
      if (col + 1 >= n || nv == 0.0) return Transform::identity(n);
      v /= nv;
      w.col(col) = v.real();
      w.col(col + 1) = v.imag();
      block(col, col) = lk.real();
      block(col, col + 1) = lk.imag();
      block(col + 1, col) = -lk.imag();
      block(col + 1, col + 1) = lk.real();
      col += 2;
    }
  }
  if (col != n) return Transform::identity(n);

  Eigen::FullPivLU<Matrix> lu(w);
  if (!lu.isInvertible()) return Transform::identity(n);
  Transform t = finish_transform(w, lu.inverse(), cond_cap);
  if (t.identity_fallback) return t;

  const Matrix reconstructed = t.p * j * t.p_inv;
  if (max_abs(reconstructed - block) > 1e-6 * scale) return Transform::identity(n);
  if (max_abs(t.p * t.p_inv - Matrix::Identity(n, n)) > 1e-8 * static_cast<double>(n)) {
    return Transform::identity(n);
  }
  return t;
}

bool contraction_check(double sym_eig_upper) { return sym_eig_upper < 0.0; }

}  // namespace reachguard
