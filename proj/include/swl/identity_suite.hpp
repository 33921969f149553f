#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <random>
#include <string>
#include <vector>

#include <Eigen/Dense>
#include <boost/multiprecision/cpp_bin_float.hpp>
#include <boost/multiprecision/eigen.hpp>
#include <boost/rational.hpp>

#include "swl/errors.hpp"
#include "swl/quaternion.hpp"
#include "swl/rng.hpp"
#include "swl/special_functions.hpp"

namespace swl {

/// Distinct positive sample eigenvalues, at most four of them.
struct LambdaPoint {
  std::vector<double> values;

  LambdaPoint() = default;
  explicit LambdaPoint(std::vector<double> v) : values(std::move(v)) { validate(); }

  int N() const { return static_cast<int>(values.size()); }

  void validate() const {
    if (values.empty() || values.size() > 4) throw SizeError("LambdaPoint: need 1 to 4 values");
    for (std::size_t i = 0; i < values.size(); ++i) {
      if (!(values[i] > 0.0)) throw DomainError("LambdaPoint: values must be positive");
      for (std::size_t j = 0; j < i; ++j)
        if (std::abs(values[i] - values[j]) <= 1e-6)
          throw DomainError("LambdaPoint: values must be pairwise separated by more than 1e-6");
    }
  }
};

namespace detail {

inline double relative_residual(double got, double want) {
  return std::abs(got - want) / std::max(1.0, std::abs(want));
}

/// Wide float for the confluent determinants, which lose roughly
/// log10(cond) digits in double precision at N = 4.
using Wide = boost::multiprecision::cpp_bin_float_50;
using WideMatrix = Eigen::Matrix<Wide, Eigen::Dynamic, Eigen::Dynamic>;

/// 2N x 2N confluent matrix: rows 0..2N-2 are powers 0..2N-2, the last row is
/// power `last`. Column 2i holds x_i^k, column 2i+1 its derivative.
template <class T = double>
Eigen::Matrix<T, Eigen::Dynamic, Eigen::Dynamic> confluent_matrix(const std::vector<double>& x, int last) {
  const int n = static_cast<int>(x.size());
  Eigen::Matrix<T, Eigen::Dynamic, Eigen::Dynamic> m(2 * n, 2 * n);
  for (int r = 0; r < 2 * n; ++r) {
    const int k = (r == 2 * n - 1) ? last : r;
    for (int i = 0; i < n; ++i) {
      const T xi(x[i]);
      m(r, 2 * i) = pow(xi, k);
      m(r, 2 * i + 1) = k == 0 ? T(0) : T(k) * pow(xi, k - 1);
    }
  }
  return m;
}

inline Wide wide_vandermonde_fourth(const std::vector<double>& x) {
  Wide v(1);
  for (std::size_t i = 0; i < x.size(); ++i)
    for (std::size_t j = i + 1; j < x.size(); ++j) v *= pow(Wide(x[i]) - Wide(x[j]), 4);
  return v;
}

inline Wide wide_determinant(const WideMatrix& m) { return m.partialPivLu().determinant(); }

/// Complete homogeneous symmetric polynomial h_j, summed over monomials.
template <class T>
T complete_homogeneous(const std::vector<T>& x, int j) {
  // h_j(x_1..x_n) = sum_e x_1^e h_{j-e}(x_2..x_n)
  std::vector<T> h(j + 1, T(0));
  h[0] = T(1);
  for (const T& xi : x) {
    for (int d = 1; d <= j; ++d) h[d] += xi * h[d - 1];
  }
  return h[j];
}

template <class T>
std::vector<T> doubled(const std::vector<T>& x) {
  std::vector<T> out;
  for (const T& v : x) {
    out.push_back(v);
    out.push_back(v);
  }
  return out;
}

/// Coefficient of t^j in prod_i (1 - x_i t)^{-2}.
template <class T>
T inverse_square_coefficient(const std::vector<T>& x, int j) {
  std::vector<T> c(j + 1, T(0));
  c[0] = T(1);
  for (const T& xi : x) {
    // (1 - x t)^{-2} = sum_k (k + 1) x^k t^k
    std::vector<T> f(j + 1);
    T p(1);
    for (int k = 0; k <= j; ++k) {
      f[k] = T(k + 1) * p;
      p *= xi;
    }
    std::vector<T> next(j + 1, T(0));
    for (int a = 0; a <= j; ++a)
      for (int b = 0; a + b <= j; ++b) next[a + b] += c[a] * f[b];
    c = std::move(next);
  }
  return c[j];
}

}  // namespace detail

/// prod_{i<j} (x_i - x_j)^4.
inline double vandermonde_fourth(const std::vector<double>& x) {
  double v = 1.0;
  for (std::size_t i = 0; i < x.size(); ++i)
    for (std::size_t j = i + 1; j < x.size(); ++j) v *= std::pow(x[i] - x[j], 4);
  return v;
}

/// det of the confluent Vandermonde matrix against prod (x_i - x_j)^4.
inline double check_confluent_vandermonde(const LambdaPoint& p) {
  p.validate();
  const detail::Wide det = detail::wide_determinant(detail::confluent_matrix<detail::Wide>(p.values, 2 * p.N() - 1));
  const detail::Wide want = detail::wide_vandermonde_fourth(p.values);
  return static_cast<double>(abs(det - want) / abs(want));
}

/// Determinant ratio with the last power raised to 2N + j - 1.
inline double lemma1_ratio(const LambdaPoint& p, int j) {
  p.validate();
  if (j < 0) throw DomainError("lemma1_ratio: j must be >= 0");
  const detail::Wide det =
      detail::wide_determinant(detail::confluent_matrix<detail::Wide>(p.values, 2 * p.N() - 1 + j));
  return static_cast<double>(det / detail::wide_vandermonde_fourth(p.values));
}

/// h_j of the doubled variables (x_1, x_1, ..., x_N, x_N).
inline double doubled_schur(const LambdaPoint& p, int j) {
  return detail::complete_homogeneous(detail::doubled(p.values), j);
}

inline double check_lemma1(const LambdaPoint& p, int j) {
  if (p.N() > 3 || j > 4) throw SizeError("check_lemma1: needs N <= 3 and j <= 4");
  return detail::relative_residual(lemma1_ratio(p, j), doubled_schur(p, j));
}

/// One-row Jack polynomial C_(j)^(1/2), read off its generating function
/// sum_j (j + 1) C_(j) t^j = prod 1 / (1 - x_i t)^2.
inline double jack_one_row(const LambdaPoint& p, int j) {
  p.validate();
  return detail::inverse_square_coefficient(p.values, j) / (j + 1);
}

inline double check_jack_identity(const LambdaPoint& p, int j) {
  if (p.N() > 3 || j > 6) throw SizeError("check_jack_identity: needs N <= 3 and j <= 6");
  return detail::relative_residual((j + 1) * jack_one_row(p, j), doubled_schur(p, j));
}

using Rational = boost::rational<long long>;

/// Exact version for rational eigenvalues: (j + 1) C_(j) - h_j(doubled).
inline Rational jack_identity_defect(const std::vector<Rational>& x, int j) {
  if (x.empty() || x.size() > 3 || j < 0 || j > 6)
    throw SizeError("jack_identity_defect: needs 1 <= N <= 3 and 0 <= j <= 6");
  const Rational coef = detail::inverse_square_coefficient(x, j);
  const Rational c = coef / Rational(j + 1);
  return Rational(j + 1) * c - detail::complete_homogeneous(detail::doubled(x), j);
}

/// Random LambdaPoint with N values in [lo, hi], separated by at least 0.05.
inline LambdaPoint random_lambda_point(std::mt19937_64& gen, int N, double lo = 0.2, double hi = 3.0) {
  std::uniform_real_distribution<double> u(lo, hi);
  for (;;) {
    std::vector<double> v(N);
    for (auto& x : v) x = u(gen);
    std::vector<double> s = v;
    std::sort(s.begin(), s.end());
    bool ok = true;
    for (int i = 1; i < N; ++i) ok = ok && (s[i] - s[i - 1] > 0.05);
    if (ok) return LambdaPoint(std::move(v));
  }
}

struct IdentityRow {
  std::string check;
  LambdaPoint point;
  int j = 0;
  double residual = 0.0;
};

/// Seeded sweep: every check at `points` random parameter points.
inline std::vector<IdentityRow> identity_sweep(std::uint64_t seed = 20240601, int points = 24) {
  std::mt19937_64 gen(seed);
  std::uniform_int_distribution<int> n3(1, 3), n4(1, 4), j4(0, 4), j6(0, 6);
  std::vector<IdentityRow> rows;
  for (int k = 0; k < points; ++k) {
    const LambdaPoint pv = random_lambda_point(gen, n4(gen));
    rows.push_back({"confluent_vandermonde", pv, 0, check_confluent_vandermonde(pv)});
    const LambdaPoint pl = random_lambda_point(gen, n3(gen));
    const int jl = j4(gen);
    rows.push_back({"lemma1", pl, jl, check_lemma1(pl, jl)});
    const LambdaPoint pj = random_lambda_point(gen, n3(gen));
    const int jj = j6(gen);
    rows.push_back({"jack_identity", pj, jj, check_jack_identity(pj, jj)});
    rows.push_back({"lemma1_vs_jack", pl, jl,
                    detail::relative_residual(lemma1_ratio(pl, jl), (jl + 1) * jack_one_row(pl, jl))});
  }
  return rows;
}

// ---------------------------------------------------------------------------
// Joint eigenvalue density
// ---------------------------------------------------------------------------

namespace detail {

/// (e^{c x} - sum_{k < n} (c x)^k / k!) / c^n and its x-derivative, both
/// times e^{log_scale}. Dropping the polynomial part changes the determinant
/// only by a constant, and the division keeps c = 0 finite (limit x^n / n!).
/// For large c x the exponential is combined with the scale before it is
/// formed, so a small weight can cancel a huge e^{c x}.
inline std::array<double, 2> exp_remainder(double c, double x, int n, double log_scale = 0.0) {
  const double cx = c * x;
  auto series = [&](int order) {
    // sum_{k >= order} c^{k - order} x^k / k!
    double term = std::pow(x, order) / std::tgamma(order + 1.0);
    double s = 0.0;
    for (int k = order; k < order + 2000; ++k) {
      s += term;
      if (std::abs(term) <= 1e-17 * std::abs(s)) break;
      term *= cx / (k + 1);
    }
    return s;
  };
  const double sc = std::exp(log_scale);
  if (std::abs(cx) < 4.0) return {sc * series(n), sc * (n >= 1 ? series(n - 1) : c * series(0))};
  double poly = 0.0, dpoly = 0.0, term = 1.0;
  for (int k = 0; k < n; ++k) {
    poly += term;
    if (k + 1 < n) dpoly += term;
    term *= cx / (k + 1);
  }
  if (c > 0.0) {
    const double f = std::exp(cx + log_scale - n * std::log(c));
    const double em = std::exp(-cx);
    return {f * (1.0 - poly * em), c * f * (1.0 - dpoly * em)};
  }
  const double cn = std::pow(c, n);
  return {sc * (std::exp(cx) - poly) / cn, sc * c * (std::exp(cx) - dpoly) / cn};
}

}  // namespace detail

/// Joint density of the N sample eigenvalues (unordered), normalised by
/// tensor Gauss-Legendre quadrature. N <= 2.
class JointDensity {
 public:
  explicit JointDensity(const SpikedParams& p, double cutoff = 0.0) : p_(p) {
    p.validate();
    if (p.N > 2) throw SizeError("JointDensity: N must be <= 2");
    c_ = p.a / (1.0 + p.a) * 2.0 * p.M;
    if (cutoff <= 0.0) cutoff = 12.0 * (1.0 + p.a) * (1.0 + 1.0 / p.gamma()) * (1.0 + 1.0 / p.gamma()) + 20.0;
    norm_ = 1.0;
    norm_ = integrate_box(0.0, cutoff, 0.0, cutoff, 60);
  }

  /// Unnormalised Vtilde^4 of the confluent matrix with an exponential last row.
  double vtilde4(const std::vector<double>& x) const {
    return scaled_matrix(x, std::vector<double>(x.size(), 0.0)).fullPivLu().determinant();
  }

  double operator()(const std::vector<double>& x) const {
    if (static_cast<int>(x.size()) != p_.N) throw SizeError("JointDensity: wrong arity");
    // half the log weight goes on each of the two columns of x_i
    std::vector<double> half(x.size());
    for (std::size_t i = 0; i < x.size(); ++i) {
      if (!(x[i] > 0.0)) return 0.0;
      half[i] = 0.5 * ((2.0 * (p_.M - p_.N) + 1.0) * std::log(x[i]) - 2.0 * p_.M * x[i]);
    }
    // full pivoting: the exponential row can be many orders above the rest
    return scaled_matrix(x, half).fullPivLu().determinant() / norm_;
  }

  /// Mass in [x0, x1] (N = 1) or [x0, x1] x [y0, y1] (N = 2).
  double integrate_box(double x0, double x1, double y0, double y1, int panels = 4) const {
    const QuadratureGrid gx = composite_legendre(x0, x1, panels, 16);
    if (p_.N == 1) return gx.integrate([&](double x) { return (*this)({x}); });
    const QuadratureGrid gy = composite_legendre(y0, y1, panels, 16);
    double s = 0.0;
    for (std::size_t i = 0; i < gx.size(); ++i)
      for (std::size_t k = 0; k < gy.size(); ++k)
        s += gx.weights[i] * gy.weights[k] * (*this)({gx.nodes[i], gy.nodes[k]});
    return s;
  }

  const SpikedParams& params() const { return p_; }

 private:
  Eigen::MatrixXd scaled_matrix(const std::vector<double>& x, const std::vector<double>& log_scale) const {
    const int n = static_cast<int>(x.size());
    Eigen::MatrixXd m = detail::confluent_matrix(x, 0);
    for (int i = 0; i < n; ++i) {
      const double sc = std::exp(log_scale[i]);
      m.col(2 * i) *= sc;
      m.col(2 * i + 1) *= sc;
      const auto g = detail::exp_remainder(c_, x[i], 2 * n - 1, log_scale[i]);
      m(2 * n - 1, 2 * i) = g[0];
      m(2 * n - 1, 2 * i + 1) = g[1];
    }
    return m;
  }

  SpikedParams p_;
  double c_ = 0.0;
  double norm_ = 1.0;
};

/// Sup over a 10 x 10 grid (10 bins for N = 1) of the difference between
/// binned probabilities of the density and of `samples` Monte Carlo draws.
/// For N = 2 each draw is counted at both orderings with weight 1/2.
inline double check_joint_density(const SpikedParams& p, std::size_t samples = 1000000,
                                  std::uint64_t seed = 20240601, int bins = 10) {
  p.validate();
  if (p.N > 2 || p.M > 4) throw SizeError("check_joint_density: needs N <= 2 and M <= 4");
  const JointDensity dens(p);
  const double g = 1.0 + 1.0 / p.gamma();
  const double upper = 1.5 * (1.0 + p.a) * g * g + 1.0;
  const double h = upper / bins;

  std::vector<double> hist(p.N == 1 ? bins : bins * bins, 0.0);
  auto bin_of = [&](double x) { return static_cast<int>(std::floor(x / h)); };
  for (std::size_t t = 0; t < samples; ++t) {
    const std::vector<double> ev = hermitian_eigenvalues(sample_matrix(p, RngStream{seed, t}));
    if (p.N == 1) {
      const int b = bin_of(ev[0]);
      if (b >= 0 && b < bins) hist[b] += 1.0;
    } else {
      const int b0 = bin_of(ev[0]), b1 = bin_of(ev[1]);
      if (b0 >= 0 && b0 < bins && b1 >= 0 && b1 < bins) {
        hist[b0 * bins + b1] += 0.5;
        hist[b1 * bins + b0] += 0.5;
      }
    }
  }

  double worst = 0.0;
  for (int i = 0; i < bins; ++i) {
    if (p.N == 1) {
      const double want = dens.integrate_box(i * h, (i + 1) * h, 0.0, 0.0, 1);
      worst = std::max(worst, std::abs(hist[i] / samples - want));
      continue;
    }
    for (int k = 0; k < bins; ++k) {
      const double want = dens.integrate_box(i * h, (i + 1) * h, k * h, (k + 1) * h, 1);
      worst = std::max(worst, std::abs(hist[i * bins + k] / samples - want));
    }
  }
  return worst;
}

}  // namespace swl
