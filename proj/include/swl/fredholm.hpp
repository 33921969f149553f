#pragma once

#include <cmath>
#include <string>
#include <utility>

#include <Eigen/Dense>

#include "swl/errors.hpp"

namespace swl {

/// det(I - A) for a square real matrix.
inline double det_identity_minus(const Eigen::MatrixXd& a) {
  const Eigen::Index n = a.rows();
  if (a.cols() != n) throw SizeError("det_identity_minus: matrix is not square");
  if (n == 0) return 1.0;
  const Eigen::MatrixXd m = Eigen::MatrixXd::Identity(n, n) - a;
  return m.partialPivLu().determinant();
}

/// sqrt of a determinant that should be a squared probability.
inline double sqrt_nonnegative(double det, double floor = 1e-8) {
  if (det < -floor)
    throw NegativeDeterminant("determinant " + std::to_string(det) + " below roundoff floor");
  return std::sqrt(std::max(0.0, det));
}

/// Pfaffian of a real skew-symmetric matrix (Parlett-Reid elimination with
/// pivoting).
inline double pfaffian(Eigen::MatrixXd a) {
  const Eigen::Index n = a.rows();
  if (a.cols() != n) throw SizeError("pfaffian: matrix is not square");
  if (n % 2 == 1) return 0.0;
  double pf = 1.0;
  for (Eigen::Index k = 0; k < n - 1; k += 2) {
    Eigen::Index p = k + 1;
    a.col(k).tail(n - k - 1).cwiseAbs().maxCoeff(&p);
    p += k + 1;
    if (p != k + 1) {
      a.row(k + 1).swap(a.row(p));
      a.col(k + 1).swap(a.col(p));
      pf = -pf;
    }
    const double piv = a(k, k + 1);
    if (piv == 0.0) return 0.0;
    pf *= piv;
    if (k + 2 < n) {
      const Eigen::VectorXd tau = a.row(k).tail(n - k - 2) / piv;
      const Eigen::VectorXd u = a.col(k + 1).tail(n - k - 2);
      // Eliminate rows/cols k, k+1 from the trailing block.
      Eigen::MatrixXd upd = tau * u.transpose();
      a.bottomRightCorner(n - k - 2, n - k - 2) += upd - upd.transpose();
    }
  }
  return pf;
}

}  // namespace swl
