#pragma once

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstddef>
#include <string>
#include <vector>

#include <Eigen/Dense>
#include <cblas.h>
#include <lapacke.h>

#include "swl/errors.hpp"
#include "swl/rng.hpp"

namespace swl {

using cplx = std::complex<double>;

struct Quaternion {
  double w = 0.0, x = 0.0, y = 0.0, z = 0.0;

  static Quaternion real(double v) { return {v, 0.0, 0.0, 0.0}; }
  static Quaternion i() { return {0.0, 1.0, 0.0, 0.0}; }
  static Quaternion j() { return {0.0, 0.0, 1.0, 0.0}; }
  static Quaternion k() { return {0.0, 0.0, 0.0, 1.0}; }

  double norm2() const { return w * w + x * x + y * y + z * z; }
  Quaternion conj() const { return {w, -x, -y, -z}; }

  friend Quaternion operator+(Quaternion p, Quaternion q) {
    return {p.w + q.w, p.x + q.x, p.y + q.y, p.z + q.z};
  }
  friend Quaternion operator-(Quaternion p, Quaternion q) {
    return {p.w - q.w, p.x - q.x, p.y - q.y, p.z - q.z};
  }
  friend Quaternion operator*(double s, Quaternion q) { return {s * q.w, s * q.x, s * q.y, s * q.z}; }
  friend bool operator==(const Quaternion&, const Quaternion&) = default;
};

/// Hamilton product.
inline Quaternion quat_mul(Quaternion p, Quaternion q) {
  return {p.w * q.w - p.x * q.x - p.y * q.y - p.z * q.z,
          p.w * q.x + p.x * q.w + p.y * q.z - p.z * q.y,
          p.w * q.y - p.x * q.z + p.y * q.w + p.z * q.x,
          p.w * q.z + p.x * q.y - p.y * q.x + p.z * q.w};
}

inline Quaternion operator*(Quaternion p, Quaternion q) { return quat_mul(p, q); }

/// [[w + x i, y + z i], [-y + z i, w - x i]]
inline Eigen::Matrix2cd embed(Quaternion q) {
  Eigen::Matrix2cd m;
  m << cplx(q.w, q.x), cplx(q.y, q.z), cplx(-q.y, q.z), cplx(q.w, -q.x);
  return m;
}

/// N x M quaternionic array held only as its 2N x 2M complex embedding.
class QuaternionMatrix {
 public:
  QuaternionMatrix() = default;
  QuaternionMatrix(std::size_t rows, std::size_t cols)
      : rows_(rows), cols_(cols), data_(Eigen::MatrixXcd::Zero(2 * rows, 2 * cols)) {}

  /// Wraps an existing embedding. The 2x2 block pattern is checked.
  static QuaternionMatrix from_embedding(Eigen::MatrixXcd data, double tol = 1e-12) {
    if (data.rows() % 2 != 0 || data.cols() % 2 != 0)
      throw SizeError("QuaternionMatrix: embedding dimensions must be even");
    QuaternionMatrix q;
    q.rows_ = static_cast<std::size_t>(data.rows() / 2);
    q.cols_ = static_cast<std::size_t>(data.cols() / 2);
    q.data_ = std::move(data);
    if (!q.has_block_pattern(tol))
      throw InvalidParams("QuaternionMatrix: embedding violates the quaternion block pattern");
    return q;
  }

  std::size_t rows() const { return rows_; }
  std::size_t cols() const { return cols_; }
  const Eigen::MatrixXcd& embedding() const { return data_; }

  Quaternion at(std::size_t r, std::size_t c) const {
    const cplx a = data_(2 * r, 2 * c);
    const cplx b = data_(2 * r, 2 * c + 1);
    return {a.real(), a.imag(), b.real(), b.imag()};
  }

  void set(std::size_t r, std::size_t c, Quaternion q) {
    data_.block<2, 2>(2 * r, 2 * c) = embed(q);
  }

  QuaternionMatrix adjoint() const {
    QuaternionMatrix out;
    out.rows_ = cols_;
    out.cols_ = rows_;
    out.data_ = data_.adjoint();
    return out;
  }

  friend QuaternionMatrix operator*(const QuaternionMatrix& a, const QuaternionMatrix& b) {
    if (a.cols_ != b.rows_) throw SizeError("QuaternionMatrix: inner dimensions differ");
    QuaternionMatrix out;
    out.rows_ = a.rows_;
    out.cols_ = b.cols_;
    out.data_.noalias() = a.data_ * b.data_;
    return out;
  }

  /// Re Tr for square matrices.
  double real_trace() const {
    double s = 0.0;
    for (std::size_t i = 0; i < std::min(rows_, cols_); ++i) s += data_(2 * i, 2 * i).real();
    return s;
  }

  bool has_block_pattern(double tol) const {
    const double tol2 = tol * tol;
    for (Eigen::Index r = 0; r < data_.rows(); r += 2)
      for (Eigen::Index c = 0; c < data_.cols(); c += 2) {
        const cplx a = data_(r, c), b = data_(r, c + 1);
        const cplx cc = data_(r + 1, c), d = data_(r + 1, c + 1);
        if (std::norm(d - std::conj(a)) > tol2 || std::norm(cc + std::conj(b)) > tol2) return false;
      }
    return true;
  }

 private:
  std::size_t rows_ = 0;
  std::size_t cols_ = 0;
  Eigen::MatrixXcd data_;
};

/// Rank-1 spiked ensemble: M samples of an N-variate quaternionic normal with
/// population eigenvalues (1 + a, 1, ..., 1).
struct SpikedParams {
  int M = 1;
  int N = 1;
  double a = 0.0;

  SpikedParams() = default;
  SpikedParams(int m_samples, int n_dim, double spike) : M(m_samples), N(n_dim), a(spike) {
    validate();
  }

  /// M = gamma^2 N, which must come out an integer.
  static SpikedParams from_gamma(int n_dim, double gamma, double spike) {
    if (!(gamma >= 1.0)) throw InvalidParams("SpikedParams: gamma must be >= 1");
    const double m = gamma * gamma * n_dim;
    const double mr = std::round(m);
    if (std::abs(m - mr) > 1e-9 * std::max(1.0, m))
      throw InvalidParams("SpikedParams: gamma^2 N is not an integer");
    return SpikedParams(static_cast<int>(mr), n_dim, spike);
  }

  double gamma() const { return std::sqrt(static_cast<double>(M) / N); }

  /// Population eigenvalue of row i (0-based).
  double population(int i) const { return i == 0 ? 1.0 + a : 1.0; }

  void validate() const {
    if (N < 1) throw InvalidParams("SpikedParams: N must be >= 1");
    if (M < N) throw InvalidParams("SpikedParams: M must be >= N");
    if (!(a > -1.0)) throw InvalidParams("SpikedParams: a must exceed -1");
  }
};

namespace detail {

/// Lower triangle of scale * X X* (BLAS zherk), mirrored to a full matrix.
inline Eigen::MatrixXcd gram_lower(const Eigen::MatrixXcd& x, double scale) {
  const auto n = static_cast<int>(x.rows());
  const auto k = static_cast<int>(x.cols());
  Eigen::MatrixXcd s = Eigen::MatrixXcd::Zero(n, n);
  cblas_zherk(CblasColMajor, CblasLower, CblasNoTrans, n, k, scale, x.data(), n, 0.0, s.data(), n);
  s.triangularView<Eigen::StrictlyUpper>() = s.adjoint();
  return s;
}

/// All eigenvalues of a Hermitian matrix, ascending (LAPACK zheevr).
inline Eigen::VectorXd hermitian_spectrum(Eigen::MatrixXcd h) {
  const auto n = static_cast<lapack_int>(h.rows());
  Eigen::VectorXd w(n);
  if (n == 0) return w;
  lapack_int found = 0;
  std::vector<lapack_int> support(2 * static_cast<std::size_t>(n));
  const lapack_int info = LAPACKE_zheevr(
      LAPACK_COL_MAJOR, 'N', 'A', 'L', n, reinterpret_cast<lapack_complex_double*>(h.data()), n,
      0.0, 0.0, 0, 0, 0.0, &found, w.data(), nullptr, 1, support.data());
  if (info != 0 || found != n)
    throw PairMismatch("hermitian_spectrum: LAPACK zheevr failed, info " + std::to_string(info));
  return w;
}

}  // namespace detail

/// Eigenvalues of a quaternionic Hermitian matrix, one per Kramers pair,
/// ascending. `tol` is relative to max(1, spectral radius).
inline std::vector<double> hermitian_eigenvalues(const QuaternionMatrix& s, double tol = 1e-8) {
  if (s.rows() != s.cols()) throw SizeError("hermitian_eigenvalues: matrix is not square");
  const Eigen::MatrixXcd& e = s.embedding();
  const double magnitude = std::sqrt(std::max(1.0, e.cwiseAbs2().maxCoeff()));
  double asym2 = 0.0;
  for (Eigen::Index c = 0; c < e.cols(); ++c)
    for (Eigen::Index r = c; r < e.rows(); ++r) asym2 = std::max(asym2, std::norm(e(r, c) - std::conj(e(c, r))));
  const double asym = std::sqrt(asym2);
  if (asym > tol * magnitude)
    throw NotHermitian("hermitian_eigenvalues: asymmetry " + std::to_string(asym));

  const Eigen::VectorXd ev = detail::hermitian_spectrum(e);
  const double scale = std::max(1.0, ev.cwiseAbs().maxCoeff());
  std::vector<double> out(s.rows());
  for (std::size_t k = 0; k < s.rows(); ++k) {
    const double lo = ev(2 * k), hi = ev(2 * k + 1);
    if (std::abs(hi - lo) > tol * scale)
      throw PairMismatch("hermitian_eigenvalues: Kramers pair " + std::to_string(k) +
                         " split by " + std::to_string(hi - lo));
    out[k] = lo;
  }
  return out;
}

/// N x M data matrix: entry (i, m) has four independent N(0, l_i / 4)
/// components, so E|x|^2 = l_i.
inline QuaternionMatrix sample_data_matrix(const SpikedParams& p, const RngStream& rng) {
  p.validate();
  QuaternionMatrix x(p.N, p.M);
  for (int i = 0; i < p.N; ++i) {
    const double sd = std::sqrt(p.population(i) / 4.0);
    for (int m = 0; m < p.M; ++m) {
      const auto p01 = rng.normal_pair(i, m, 0);
      const auto p23 = rng.normal_pair(i, m, 1);
      const Quaternion q{sd * p01[0], sd * p01[1], sd * p23[0], sd * p23[1]};
      x.set(i, m, q);
    }
  }
  return x;
}

/// S = (1/M) X X*.
inline QuaternionMatrix sample_matrix(const SpikedParams& p, const RngStream& rng) {
  const QuaternionMatrix x = sample_data_matrix(p, rng);
  return QuaternionMatrix::from_embedding(detail::gram_lower(x.embedding(), 1.0 / p.M), 1e-10);
}

/// Complex analogue: entries with E|x|^2 = l_i (real and imaginary parts of
/// variance l_i / 2), S = (1/M) X X*, returned as an N x N Hermitian matrix.
inline Eigen::MatrixXcd sample_complex_matrix(const SpikedParams& p, const RngStream& rng) {
  p.validate();
  Eigen::MatrixXcd x(p.N, p.M);
  for (int i = 0; i < p.N; ++i) {
    const double sd = std::sqrt(p.population(i) / 2.0);
    for (int m = 0; m < p.M; ++m) {
      const auto z = rng.normal_pair(i, m, 0);
      x(i, m) = cplx(sd * z[0], sd * z[1]);
    }
  }
  return detail::gram_lower(x, 1.0 / p.M);
}

}  // namespace swl
