#pragma once

#include <array>
#include <cmath>
#include <numbers>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Dense>
#include <boost/numeric/odeint.hpp>

#include "swl/errors.hpp"
#include "swl/fredholm.hpp"
#include "swl/quaternion.hpp"
#include "swl/special_functions.hpp"

namespace swl {

enum class Family { GUE, GUE1, GOE, GSE, GSE1, Gaussian };

inline const char* family_name(Family f) {
  switch (f) {
    case Family::GUE: return "gue";
    case Family::GUE1: return "gue1";
    case Family::GOE: return "goe";
    case Family::GSE: return "gse";
    case Family::GSE1: return "gse1";
    case Family::Gaussian: return "gaussian";
  }
  return "?";
}

inline Family parse_family(const std::string& s) {
  for (Family f : {Family::GUE, Family::GUE1, Family::GOE, Family::GSE, Family::GSE1, Family::Gaussian})
    if (s == family_name(f)) return f;
  throw InvalidParams("unknown family '" + s + "'");
}

/// A limit law together with its discretisation: `nodes` Gauss-Legendre
/// points on [T, T + cutoff].
struct LimitFamily {
  Family tag = Family::GUE;
  int nodes = 96;
  double cutoff = 40.0;
};

// ---------------------------------------------------------------------------
// Airy kernel
// ---------------------------------------------------------------------------

namespace detail {

/// Rule for the t-integrals int_0^inf (...)(x + t) dt, given the smallest x.
/// Unit panels until Ai(x + t) is below 1e-30.
inline QuadratureGrid airy_t_grid(double xmin) {
  const double upper = std::max(6.0, 25.0 - xmin);
  const int panels = static_cast<int>(std::ceil(upper));
  return composite_legendre(0.0, panels, panels, 20);
}

}  // namespace detail

/// K_Airy(xi, eta) = int_0^inf Ai(xi + t) Ai(eta + t) dt by quadrature.
inline double airy_kernel(double xi, double eta) {
  const QuadratureGrid g = detail::airy_t_grid(std::min(xi, eta));
  double s = 0.0;
  for (std::size_t k = 0; k < g.size(); ++k)
    s += g.weights[k] * airy_ai(xi + g.nodes[k]) * airy_ai(eta + g.nodes[k]);
  return s;
}

/// Closed form of the kernel on the diagonal, Ai'(x)^2 - x Ai(x)^2.
inline double airy_kernel_diagonal(double x) {
  const AiryValues v = airy_all(x);
  return v.aip * v.aip - x * v.ai * v.ai;
}

/// Airy-type operators sampled on a Gauss-Legendre grid over [T, T + cutoff].
/// Matrices are indexed (i, j) = (xi_i, eta_j):
///   K  = int_0^inf Ai(xi+t) Ai(eta+t) dt
///   dK = -d/deta K = -int_0^inf Ai(xi+t) Ai'(eta+t) dt
///   IK = int_0^inf B(xi+t) Ai(eta+t) dt = int_xi^inf K(s, eta) ds
struct AiryOperators {
  std::vector<double> x;
  std::vector<double> w;
  Eigen::VectorXd ai;  // Ai(x_i)
  Eigen::VectorXd b;   // B(x_i)
  Eigen::MatrixXd K;
  Eigen::MatrixXd dK;
  Eigen::MatrixXd IK;
};

inline AiryOperators build_airy_operators(double T, int m, double cutoff = 40.0) {
  const QuadratureGrid g = gauss_legendre(m, T, T + cutoff);
  const QuadratureGrid tg = detail::airy_t_grid(T);
  const auto n = static_cast<Eigen::Index>(g.size());
  const auto nt = static_cast<Eigen::Index>(tg.size());
  Eigen::MatrixXd A(n, nt), Ap(n, nt), Bm(n, nt);
  for (Eigen::Index i = 0; i < n; ++i)
    for (Eigen::Index k = 0; k < nt; ++k) {
      const AiryValues v = airy_all(g.nodes[i] + tg.nodes[k]);
      A(i, k) = v.ai;
      Ap(i, k) = v.aip;
      Bm(i, k) = v.tail;
    }
  const Eigen::Map<const Eigen::VectorXd> tw(tg.weights.data(), nt);
  const Eigen::MatrixXd Aw = A * tw.asDiagonal();
  AiryOperators op;
  op.x = g.nodes;
  op.w = g.weights;
  op.ai.resize(n);
  op.b.resize(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    const AiryValues v = airy_all(g.nodes[i]);
    op.ai(i) = v.ai;
    op.b(i) = v.tail;
  }
  op.K = Aw * A.transpose();
  op.dK = -(Aw * Ap.transpose());
  op.IK = (Bm * tw.asDiagonal()) * A.transpose();
  return op;
}

// ---------------------------------------------------------------------------
// Fredholm determinants
// ---------------------------------------------------------------------------

namespace detail {

inline Eigen::MatrixXd weight_fold(const Eigen::MatrixXd& k, const std::vector<double>& w) {
  Eigen::VectorXd sw(static_cast<Eigen::Index>(w.size()));
  for (std::size_t i = 0; i < w.size(); ++i) sw(static_cast<Eigen::Index>(i)) = std::sqrt(w[i]);
  return sw.asDiagonal() * k * sw.asDiagonal();
}

template <class Kernel>
double scalar_det_on(const Kernel& kernel, const QuadratureGrid& g) {
  const auto n = static_cast<Eigen::Index>(g.size());
  Eigen::MatrixXd k(n, n);
  for (Eigen::Index i = 0; i < n; ++i)
    for (Eigen::Index j = 0; j < n; ++j) k(i, j) = kernel(g.nodes[i], g.nodes[j]);
  return det_identity_minus(weight_fold(k, g.weights));
}

template <class Kernel2>
double block_det_on(const Kernel2& kernel, const QuadratureGrid& g) {
  const auto n = static_cast<Eigen::Index>(g.size());
  Eigen::MatrixXd p(2 * n, 2 * n);
  for (Eigen::Index i = 0; i < n; ++i)
    for (Eigen::Index j = 0; j < n; ++j) {
      const std::array<double, 4> e = kernel(g.nodes[i], g.nodes[j]);
      const double sw = std::sqrt(g.weights[i] * g.weights[j]);
      p(i, j) = sw * e[0];
      p(i, n + j) = sw * e[1];
      p(n + i, j) = sw * e[2];
      p(n + i, n + j) = sw * e[3];
    }
  return det_identity_minus(p);
}

}  // namespace detail

/// Default stability tolerance for node doubling.
inline constexpr double kFredholmDriftTol = 1e-7;

/// det(I - K) on L^2(T, T + cutoff) for a scalar kernel K(x, y), checked
/// against the rule with twice the nodes.
template <class Kernel>
double fredholm_det_scalar(const Kernel& kernel, double T, int m, double cutoff = 40.0,
                           double drift_tol = kFredholmDriftTol) {
  if (m < 16) throw SizeError("fredholm_det_scalar: m must be >= 16");
  const double d1 = detail::scalar_det_on(kernel, gauss_legendre(m, T, T + cutoff));
  const double d2 = detail::scalar_det_on(kernel, gauss_legendre(2 * m, T, T + cutoff));
  if (std::abs(d1 - d2) > drift_tol)
    throw ConvergenceError("fredholm_det_scalar: node doubling drift " + std::to_string(std::abs(d1 - d2)));
  return d1;
}

/// Block version: kernel(x, y) returns {P11, P12, P21, P22}.
template <class Kernel2>
double fredholm_det_block(const Kernel2& kernel, double T, int m, double cutoff = 40.0,
                          double drift_tol = kFredholmDriftTol) {
  if (m < 16) throw SizeError("fredholm_det_block: m must be >= 16");
  const double d1 = detail::block_det_on(kernel, gauss_legendre(m, T, T + cutoff));
  const double d2 = detail::block_det_on(kernel, gauss_legendre(2 * m, T, T + cutoff));
  if (std::abs(d1 - d2) > drift_tol)
    throw ConvergenceError("fredholm_det_block: node doubling drift " + std::to_string(std::abs(d1 - d2)));
  return d1;
}

// ---------------------------------------------------------------------------
// Limit laws
// ---------------------------------------------------------------------------

inline double standard_normal_cdf(double t) { return 0.5 * std::erfc(-t / std::numbers::sqrt2); }

namespace detail {

/// Determinant whose (square root of) is the CDF, on one discretisation.
inline double limit_determinant(Family f, const AiryOperators& op) {
  const auto n = static_cast<Eigen::Index>(op.x.size());
  const Eigen::VectorXd ones = Eigen::VectorXd::Ones(n);
  switch (f) {
    case Family::GUE:
      return det_identity_minus(weight_fold(op.K, op.w));
    case Family::GUE1:
    case Family::GOE: {
      const Eigen::VectorXd s1 = ones - op.b;
      return det_identity_minus(weight_fold(op.K + s1 * op.ai.transpose(), op.w));
    }
    case Family::GSE:
    case Family::GSE1: {
      Eigen::MatrixXd S = 0.5 * op.K - 0.25 * op.ai * op.b.transpose();
      const Eigen::MatrixXd SD = 0.5 * op.dK - 0.25 * op.ai * op.ai.transpose();
      Eigen::MatrixXd IS = -0.5 * op.IK + 0.25 * op.b * op.b.transpose();
      if (f == Family::GSE1) {
        S += 0.5 * op.ai * ones.transpose();
        IS += -0.5 * op.b * ones.transpose() + 0.5 * ones * op.b.transpose();
      }
      Eigen::MatrixXd P(2 * n, 2 * n);
      P << weight_fold(S, op.w), weight_fold(SD, op.w), weight_fold(IS, op.w),
          weight_fold(S.transpose(), op.w);
      return det_identity_minus(P);
    }
    case Family::Gaussian:
      break;
  }
  throw InvalidParams("limit_determinant: no determinant for the Gaussian law");
}

inline double cdf_from_determinant(Family f, double det) {
  if (f == Family::GUE || f == Family::GUE1) {
    if (det < -1e-9) throw NegativeDeterminant("limit_cdf: determinant " + std::to_string(det));
    return det;
  }
  return sqrt_nonnegative(det, 1e-9);
}

}  // namespace detail

struct LimitCdfResult {
  double value = 0.0;
  double drift = 0.0;  // |value(2m) - value(m)|
};

/// CDF of a limit law at T, reported at `nodes` points after a doubling check.
inline LimitCdfResult limit_cdf_report(const LimitFamily& fam, double T,
                                       double drift_tol = kFredholmDriftTol) {
  if (fam.tag == Family::Gaussian) return {standard_normal_cdf(T), 0.0};
  if (fam.nodes < 16) throw SizeError("limit_cdf: nodes must be >= 16");
  const double v1 = detail::cdf_from_determinant(
      fam.tag, detail::limit_determinant(fam.tag, build_airy_operators(T, fam.nodes, fam.cutoff)));
  const double v2 = detail::cdf_from_determinant(
      fam.tag, detail::limit_determinant(fam.tag, build_airy_operators(T, 2 * fam.nodes, fam.cutoff)));
  LimitCdfResult r{v1, std::abs(v1 - v2)};
  if (r.drift > drift_tol)
    throw ConvergenceError(std::string("limit_cdf: family ") + family_name(fam.tag) + " with m = " +
                           std::to_string(fam.nodes) + " drifts by " + std::to_string(r.drift));
  return r;
}

inline double limit_cdf(const LimitFamily& fam, double T) { return limit_cdf_report(fam, T).value; }

inline double limit_cdf(Family f, double T, int nodes = 96) {
  return limit_cdf(LimitFamily{f, nodes, 40.0}, T);
}

// ---------------------------------------------------------------------------
// Rescaling maps
// ---------------------------------------------------------------------------

enum class Regime { subcritical, critical, supercritical };
enum class Ensemble { quaternionic, complex, quaternionic_white, complex_white };

inline const char* regime_name(Regime r) {
  switch (r) {
    case Regime::subcritical: return "subcritical";
    case Regime::critical: return "critical";
    case Regime::supercritical: return "supercritical";
  }
  return "?";
}

inline const char* ensemble_name(Ensemble e) {
  switch (e) {
    case Ensemble::quaternionic: return "quaternionic";
    case Ensemble::complex: return "complex";
    case Ensemble::quaternionic_white: return "quaternionic-white";
    case Ensemble::complex_white: return "complex-white";
  }
  return "?";
}

inline constexpr double kCriticalTol = 1e-12;

/// Centering p and scale q: max(lambda) ~ p + q * (limit law).
struct RescaleMap {
  Regime regime = Regime::subcritical;
  double center = 0.0;
  double scale = 1.0;
  Ensemble ensemble = Ensemble::quaternionic;

  double apply(double lambda_max) const { return (lambda_max - center) / scale; }
};

inline Regime classify_regime(double a, double gamma) {
  const double thr = 1.0 / gamma;
  if (std::abs(a - thr) <= kCriticalTol) return Regime::critical;
  return a < thr ? Regime::subcritical : Regime::supercritical;
}

/// Map in a prescribed regime. RegimeError if the supercritical map is asked
/// for with a <= 1/gamma.
inline RescaleMap rescale_map(const SpikedParams& p, Ensemble e, Regime regime) {
  p.validate();
  const double g = p.gamma();
  const bool quat = (e == Ensemble::quaternionic || e == Ensemble::quaternionic_white);
  const double mm = quat ? 2.0 * p.M : static_cast<double>(p.M);
  RescaleMap r;
  r.regime = regime;
  r.ensemble = e;
  if (regime == Regime::supercritical) {
    const double a = p.a;
    const double disc = 1.0 - 1.0 / (g * g * a * a);
    if (!(a > 1.0 / g) || !(disc > 0.0))
      throw RegimeError("rescale_map: supercritical map needs a > 1/gamma");
    r.center = (a + 1.0) * (1.0 + 1.0 / (g * g * a));
    r.scale = (a + 1.0) * std::sqrt(disc) / std::sqrt(mm);
  } else {
    r.center = (1.0 + 1.0 / g) * (1.0 + 1.0 / g);
    r.scale = std::pow(1.0 + g, 4.0 / 3.0) / (g * std::pow(mm, 2.0 / 3.0));
  }
  return r;
}

/// Map for the regime of (a, gamma). White ensembles always use the
/// soft-edge map.
inline RescaleMap rescale_map(const SpikedParams& p, Ensemble e) {
  const bool white = (e == Ensemble::quaternionic_white || e == Ensemble::complex_white);
  return rescale_map(p, e, white ? Regime::subcritical : classify_regime(p.a, p.gamma()));
}

/// Limit law predicted for a regime.
inline Family predicted_family(Regime r, Ensemble e) {
  const bool quat = (e == Ensemble::quaternionic || e == Ensemble::quaternionic_white);
  switch (r) {
    case Regime::subcritical: return quat ? Family::GSE : Family::GUE;
    case Regime::critical: return quat ? Family::GSE1 : Family::GUE1;
    case Regime::supercritical: return Family::Gaussian;
  }
  return Family::Gaussian;
}

// ---------------------------------------------------------------------------
// Painleve II cross-check
// ---------------------------------------------------------------------------

inline constexpr double kPainleveStart = 8.0;

struct PainleveValue {
  double q = 0.0;
  double dq = 0.0;
  double integral = 0.0;  // int_s^inf q(t) dt
};

/// Hastings-McLeod solution of q'' = s q + 2 q^3, integrated from s = 8 with
/// Airy data toward smaller s (adaptive Dormand-Prince, relative tolerance
/// 1e-12; the absolute tolerance sits far below Ai(8) ~ 1e-7).
inline PainleveValue painleve_solution(double s) {
  if (s < -7.0) throw DomainError("painleve_q: s below -7 is outside the stable range");
  const AiryValues a0 = airy_all(kPainleveStart);
  if (s >= kPainleveStart) {
    const AiryValues v = airy_all(s);
    return {v.ai, v.aip, v.tail};
  }
  using State = std::array<double, 3>;  // q, q', int_s^8 q (accumulated with sign)
  State y{a0.ai, a0.aip, 0.0};
  auto rhs = [](const State& u, State& du, double t) {
    du[0] = u[1];
    du[1] = t * u[0] + 2.0 * u[0] * u[0] * u[0];
    du[2] = u[0];
  };
  namespace ode = boost::numeric::odeint;
  auto stepper = ode::make_controlled(1e-20, 1e-12, ode::runge_kutta_dopri5<State>());
  ode::integrate_adaptive(stepper, rhs, y, kPainleveStart, s, -1e-3);
  if (!std::isfinite(y[0]) || std::abs(y[0]) > 1e3)
    throw DomainError("painleve_q: integration diverged at s = " + std::to_string(s));
  // y[2] = int_8^s q = -int_s^8 q
  return {y[0], y[1], -y[2] + a0.tail};
}

inline double painleve_q(double s) { return painleve_solution(s).q; }

struct TwResiduals {
  double resolvent_value = 0.0;  // |(I+R) s1 (T) - e^{-int q}|
  double inner_product = 0.0;    // |<(I+R) s1, Ai>_T - (1 - e^{-int q})|
};

/// Residuals of the two resolvent identities that tie the Airy-kernel
/// operator on (T, inf) to the Hastings-McLeod solution.
inline TwResiduals tw_identity_check(double T, int m = 96, double cutoff = 40.0) {
  if (T < -6.0 || T > 8.0) throw DomainError("tw_identity_check: T outside [-6, 8]");
  const AiryOperators op = build_airy_operators(T, m, cutoff);
  const auto n = static_cast<Eigen::Index>(op.x.size());
  const Eigen::Map<const Eigen::VectorXd> w(op.w.data(), n);
  const Eigen::VectorXd s1 = Eigen::VectorXd::Ones(n) - op.b;
  // (I - K W) u = s1, so u = (I + R) s1 at the nodes
  const Eigen::MatrixXd sys = Eigen::MatrixXd::Identity(n, n) - op.K * w.asDiagonal();
  const Eigen::VectorXd u = sys.partialPivLu().solve(s1);
  // Nystrom interpolation at x = T
  Eigen::VectorXd kT(n);
  for (Eigen::Index j = 0; j < n; ++j) kT(j) = airy_kernel(T, op.x[static_cast<std::size_t>(j)]);
  const double uT = airy_s1(T) + kT.dot(w.asDiagonal() * u);
  const double inner = (w.asDiagonal() * u).dot(op.ai);
  const double e = std::exp(-painleve_solution(T).integral);
  return {std::abs(uT - e), std::abs(inner - (1.0 - e))};
}

}  // namespace swl
