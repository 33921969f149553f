#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstddef>
#include <limits>
#include <numbers>
#include <string>
#include <vector>

#include "swl/errors.hpp"

namespace swl {

// ---------------------------------------------------------------------------
// LogScaled: sign and log-magnitude carrier for products that leave the
// double range (Laguerre values times exponential weights).
// ---------------------------------------------------------------------------

struct LogScaled {
  int sign = 0;  // -1, 0, +1
  double log_mag = -std::numeric_limits<double>::infinity();

  static LogScaled zero() { return {}; }

  static LogScaled from(double v) {
    if (v == 0.0) return {};
    return {v > 0 ? 1 : -1, std::log(std::abs(v))};
  }

  /// sign * exp(log_mag); saturates to +-inf or 0 outside the double range.
  double value() const {
    if (sign == 0) return 0.0;
    return sign * std::exp(log_mag);
  }

  /// value() * exp(-shift); use to bring a family of values onto a common scale.
  double scaled(double shift) const {
    if (sign == 0) return 0.0;
    return sign * std::exp(log_mag - shift);
  }

  bool is_zero() const { return sign == 0; }

  friend LogScaled operator*(LogScaled a, LogScaled b) {
    if (a.sign == 0 || b.sign == 0) return {};
    return {a.sign * b.sign, a.log_mag + b.log_mag};
  }
  friend LogScaled operator/(LogScaled a, LogScaled b) {
    if (b.sign == 0) throw DomainError("LogScaled: division by zero");
    if (a.sign == 0) return {};
    return {a.sign * b.sign, a.log_mag - b.log_mag};
  }
  LogScaled operator-() const { return {-sign, log_mag}; }

  /// Multiply by exp(t).
  LogScaled times_exp(double t) const {
    if (sign == 0) return {};
    return {sign, log_mag + t};
  }

  friend LogScaled operator+(LogScaled a, LogScaled b) {
    if (a.sign == 0) return b;
    if (b.sign == 0) return a;
    const double hi = std::max(a.log_mag, b.log_mag);
    const double s = a.scaled(hi) + b.scaled(hi);
    if (s == 0.0) return {};
    return {s > 0 ? 1 : -1, hi + std::log(std::abs(s))};
  }
  friend LogScaled operator-(LogScaled a, LogScaled b) { return a + (-b); }
};

/// Sum of LogScaled terms with a single rescaling pass.
inline LogScaled log_sum(const std::vector<LogScaled>& terms) {
  double hi = -std::numeric_limits<double>::infinity();
  for (const auto& t : terms)
    if (t.sign != 0) hi = std::max(hi, t.log_mag);
  if (!std::isfinite(hi)) return {};
  double s = 0.0;
  for (const auto& t : terms) s += t.scaled(hi);
  if (s == 0.0) return {};
  return {s > 0 ? 1 : -1, hi + std::log(std::abs(s))};
}

inline double log_factorial(double n) { return std::lgamma(n + 1.0); }

// ---------------------------------------------------------------------------
// Laguerre polynomials
// ---------------------------------------------------------------------------

/// L_0^{(alpha)}(x) ... L_nmax^{(alpha)}(x) by the three-term recurrence. The
/// running pair is renormalised whenever it grows past 1e150 so that the
/// result survives alpha ~ 80 at arguments of a few hundred.
inline std::vector<LogScaled> laguerre_table(int nmax, double alpha, double x) {
  std::vector<LogScaled> out;
  if (nmax < 0) return out;
  out.reserve(static_cast<std::size_t>(nmax) + 1);
  double prev = 0.0;
  double cur = 1.0;
  double log_scale = 0.0;
  out.push_back(LogScaled::from(1.0));
  for (int k = 0; k < nmax; ++k) {
    const double next = ((2.0 * k + 1.0 + alpha - x) * cur - (k + alpha) * prev) / (k + 1.0);
    prev = cur;
    cur = next;
    const double mag = std::max(std::abs(cur), std::abs(prev));
    if (mag > 1e150 || (mag < 1e-150 && mag > 0.0)) {
      const double l = std::log(mag);
      cur /= mag;
      prev /= mag;
      log_scale += l;
    }
    LogScaled v = LogScaled::from(cur);
    out.push_back(v.times_exp(log_scale));
  }
  return out;
}

/// L_n^{(alpha)}(x); zero for n < 0.
inline LogScaled laguerre(int n, double alpha, double x) {
  if (n < 0) return LogScaled::zero();
  return laguerre_table(n, alpha, x).back();
}

/// d/dx L_n^{(alpha)}(x) = (n L_n - (n + alpha) L_{n-1}) / x.
inline LogScaled laguerre_deriv(int n, double alpha, double x) {
  if (n < 0) return LogScaled::zero();
  if (x == 0.0)
    throw DomainError("laguerre_deriv: x = 0; the limit is -binom(n+alpha, n-1)");
  if (n == 0) return LogScaled::zero();
  const auto t = laguerre_table(n, alpha, x);
  const LogScaled num = LogScaled::from(static_cast<double>(n)) * t[n] -
                        LogScaled::from(n + alpha) * t[n - 1];
  return num / LogScaled::from(x);
}

// ---------------------------------------------------------------------------
// Quadrature
// ---------------------------------------------------------------------------

enum class GridKind { finite_interval, half_line };

struct QuadratureGrid {
  std::vector<double> nodes;
  std::vector<double> weights;
  GridKind kind = GridKind::finite_interval;
  double lower = -1.0;
  double upper = 1.0;      // +inf for half_line
  double map_scale = 0.0;  // L of the half-line map, 0 otherwise

  std::size_t size() const { return nodes.size(); }

  template <class F>
  double integrate(F&& f) const {
    double s = 0.0;
    for (std::size_t k = 0; k < nodes.size(); ++k) s += weights[k] * f(nodes[k]);
    return s;
  }
};

/// m-point Gauss-Legendre rule on [-1, 1], 2 <= m <= 512.
inline QuadratureGrid gauss_legendre(int m) {
  if (m < 2 || m > 512)
    throw SizeError("gauss_legendre: m = " + std::to_string(m) + " outside [2, 512]");
  QuadratureGrid g;
  g.nodes.assign(m, 0.0);
  g.weights.assign(m, 0.0);
  const int half = (m + 1) / 2;
  for (int i = 0; i < half; ++i) {
    double z = std::cos(std::numbers::pi * (i + 0.75) / (m + 0.5));
    double dp = 0.0;
    for (int it = 0; it < 100; ++it) {
      double p0 = 1.0, p1 = z;
      for (int k = 2; k <= m; ++k) {
        const double p2 = ((2.0 * k - 1.0) * z * p1 - (k - 1.0) * p0) / k;
        p0 = p1;
        p1 = p2;
      }
      dp = m * (z * p1 - p0) / (z * z - 1.0);
      const double dz = p1 / dp;
      z -= dz;
      if (std::abs(dz) < 1e-16) break;
    }
    {
      double p0 = 1.0, p1 = z;
      for (int k = 2; k <= m; ++k) {
        const double p2 = ((2.0 * k - 1.0) * z * p1 - (k - 1.0) * p0) / k;
        p0 = p1;
        p1 = p2;
      }
      dp = m * (z * p1 - p0) / (z * z - 1.0);
    }
    const double w = 2.0 / ((1.0 - z * z) * dp * dp);
    g.nodes[i] = -z;
    g.nodes[m - 1 - i] = z;
    g.weights[i] = w;
    g.weights[m - 1 - i] = w;
  }
  if (m % 2 == 1) g.nodes[m / 2] = 0.0;
  return g;
}

/// Gauss-Legendre rule mapped affinely onto [a, b].
inline QuadratureGrid gauss_legendre(int m, double a, double b) {
  QuadratureGrid g = gauss_legendre(m);
  const double h = 0.5 * (b - a);
  for (std::size_t k = 0; k < g.size(); ++k) {
    g.nodes[k] = a + h * (g.nodes[k] + 1.0);
    g.weights[k] *= h;
  }
  g.lower = a;
  g.upper = b;
  return g;
}

/// Composite rule: `panels` equal panels on [a, b], `order` points each.
inline QuadratureGrid composite_legendre(double a, double b, int panels, int order) {
  const QuadratureGrid ref = gauss_legendre(order);
  QuadratureGrid g;
  g.lower = a;
  g.upper = b;
  g.nodes.reserve(static_cast<std::size_t>(panels) * order);
  g.weights.reserve(static_cast<std::size_t>(panels) * order);
  const double width = (b - a) / panels;
  for (int p = 0; p < panels; ++p) {
    const double lo = a + p * width;
    for (int k = 0; k < order; ++k) {
      g.nodes.push_back(lo + 0.5 * width * (ref.nodes[k] + 1.0));
      g.weights.push_back(0.5 * width * ref.weights[k]);
    }
  }
  return g;
}

/// Rule on [T, inf): x = T + L u / (1 - u) with u Gauss-Legendre on (0, 1).
inline QuadratureGrid half_line_grid(double T, int m, double L = 10.0) {
  if (!(L > 0.0)) throw DomainError("half_line_grid: map scale must be positive");
  const QuadratureGrid ref = gauss_legendre(m);
  QuadratureGrid g;
  g.kind = GridKind::half_line;
  g.lower = T;
  g.upper = std::numeric_limits<double>::infinity();
  g.map_scale = L;
  g.nodes.resize(ref.size());
  g.weights.resize(ref.size());
  for (std::size_t k = 0; k < ref.size(); ++k) {
    const double u = 0.5 * (ref.nodes[k] + 1.0);
    const double one_minus = 1.0 - u;
    g.nodes[k] = T + L * u / one_minus;
    g.weights[k] = 0.5 * ref.weights[k] * L / (one_minus * one_minus);
  }
  return g;
}

// ---------------------------------------------------------------------------
// Airy function family
// ---------------------------------------------------------------------------

struct AiryValues {
  double ai = 0.0;
  double aip = 0.0;
  double tail = 0.0;  // B(x) = int_x^inf Ai(t) dt
};

namespace detail {

inline constexpr double kAi0 = 0.355028053887817239260063186004183;
inline constexpr double kAip0 = -0.258819403792806798405183560189203;

/// Ai and Ai' from the large-|x| expansions.
inline AiryValues airy_asymptotic(double x) {
  constexpr double sqrt_pi = 1.772453850905516027298167483341145;
  const double ax = std::abs(x);
  const double zeta = 2.0 / 3.0 * ax * std::sqrt(ax);
  // u_k and v_k coefficients, summed while terms decrease.
  std::array<double, 40> u{}, v{};
  u[0] = 1.0;
  v[0] = 1.0;
  for (int k = 1; k < 40; ++k) {
    u[k] = u[k - 1] * (6.0 * k - 5.0) * (6.0 * k - 3.0) * (6.0 * k - 1.0) /
           ((2.0 * k - 1.0) * 216.0 * k);
    v[k] = -u[k] * (6.0 * k + 1.0) / (6.0 * k - 1.0);
  }
  AiryValues r;
  if (x > 0.0) {
    double su = 0.0, sv = 0.0, zp = 1.0, last = std::numeric_limits<double>::infinity();
    for (int k = 0; k < 40; ++k) {
      const double tu = u[k] / zp;
      if (std::abs(tu) > last) break;
      last = std::abs(tu);
      const double sgn = (k % 2 == 0) ? 1.0 : -1.0;
      su += sgn * tu;
      sv += sgn * v[k] / zp;
      if (last < 1e-18) break;
      zp *= zeta;
    }
    const double e = std::exp(-zeta);
    const double q = std::pow(ax, 0.25);
    r.ai = e / (2.0 * sqrt_pi * q) * su;
    r.aip = -q * e / (2.0 * sqrt_pi) * sv;
    r.tail = e / (2.0 * sqrt_pi * q * q * q) * (1.0 - 41.0 / (48.0 * ax * std::sqrt(ax)));
    return r;
  }
  // Oscillatory side.
  double pe = 0.0, po = 0.0, qe = 0.0, qo = 0.0;
  double zp = 1.0, last = std::numeric_limits<double>::infinity();
  for (int k = 0; k < 40; ++k) {
    const double tu = u[k] / zp;
    if (std::abs(tu) > last) break;
    last = std::abs(tu);
    const int j = k / 2;
    const double sgn = (j % 2 == 0) ? 1.0 : -1.0;
    if (k % 2 == 0) {
      pe += sgn * tu;
      qe += sgn * v[k] / zp;
    } else {
      po += sgn * tu;
      qo += sgn * v[k] / zp;
    }
    if (last < 1e-18) break;
    zp *= zeta;
  }
  const double q = std::pow(ax, 0.25);
  const double ph = zeta - std::numbers::pi / 4.0;
  const double c = std::cos(ph), s = std::sin(ph);
  r.ai = (c * pe + s * po) / (sqrt_pi * q);
  r.aip = q / sqrt_pi * (s * qe - c * qo);
  r.tail = std::numeric_limits<double>::quiet_NaN();
  return r;
}

/// Taylor expansion of an Airy-equation solution about c, evaluated at c + h.
/// Returns y(c+h), y'(c+h) and int_c^{c+h} y.
inline std::array<double, 3> airy_taylor(double c, double y0, double y1, double h) {
  double an_2 = 0.0;  // a_{n-1}
  double an_1 = y0;   // a_n
  double an = y1;     // a_{n+1}
  double y = y0 + y1 * h;
  double dy = y1;
  double integral = y0 * h + y1 * h * h / 2.0;
  double hp = h;  // h^{n+1} at loop entry with n = 0
  const double scale = std::abs(y0) + std::abs(y1) + 1e-300;
  int small_run = 0;
  // a_{n+2} = (c a_n + a_{n-1}) / ((n+2)(n+1))
  for (int n = 0; n < 120; ++n) {
    const double next = (c * an_1 + an_2) / ((n + 2.0) * (n + 1.0));
    an_2 = an_1;
    an_1 = an;
    an = next;
    // an is a_{n+2}
    const double hn1 = hp;       // h^{n+1}
    const double hn2 = hp * h;   // h^{n+2}
    y += an * hn2;
    dy += (n + 2.0) * an * hn1;
    integral += an * hn2 * h / (n + 3.0);
    hp = hn2;
    const double mag = std::abs(an * hn2) + std::abs((n + 2.0) * an * hn1);
    if (mag < 1e-19 * scale) {
      if (++small_run >= 3) break;
    } else {
      small_run = 0;
    }
  }
  return {y, dy, integral};
}

/// Ai, Ai' and B tabulated at anchors spaced 0.5 on [-40, 16]. The right
/// half is generated from the asymptotic expansion at 16 by Taylor stepping
/// toward the origin (the stable direction for Ai); the left half starts from
/// the exact values at 0 and steps into the oscillatory region.
class AiryTable {
 public:
  static constexpr double kLeft = -40.0;
  static constexpr double kRight = 16.0;
  static constexpr double kStep = 0.5;

  static const AiryTable& instance() {
    static const AiryTable table;
    return table;
  }

  AiryValues eval(double x) const {
    if (x >= kRight) return airy_asymptotic(x);
    if (x < kLeft) return eval_far_left(x);
    const auto k = static_cast<std::size_t>(std::lround((x - kLeft) / kStep));
    const AiryValues& a = anchors_[k];
    const double c = kLeft + kStep * static_cast<double>(k);
    const auto t = airy_taylor(c, a.ai, a.aip, x - c);
    return {t[0], t[1], a.tail - t[2]};
  }

  /// Mismatch at the origin between the right-hand chain and the exact values.
  const std::array<double, 3>& origin_mismatch() const { return mismatch_; }

 private:
  AiryTable() {
    const int count = static_cast<int>(std::lround((kRight - kLeft) / kStep)) + 1;
    anchors_.resize(count);
    const int origin = static_cast<int>(std::lround(-kLeft / kStep));
    AiryValues v = airy_asymptotic(kRight);
    anchors_[count - 1] = v;
    for (int k = count - 1; k > origin; --k) {
      const double c = kLeft + kStep * k;
      const auto t = airy_taylor(c, v.ai, v.aip, -kStep);
      v = {t[0], t[1], v.tail - t[2]};
      anchors_[k - 1] = v;
    }
    mismatch_ = {v.ai - kAi0, v.aip - kAip0, v.tail - 1.0 / 3.0};
    v = {kAi0, kAip0, 1.0 / 3.0};
    anchors_[origin] = v;
    for (int k = origin; k > 0; --k) {
      const double c = kLeft + kStep * k;
      const auto t = airy_taylor(c, v.ai, v.aip, -kStep);
      v = {t[0], t[1], v.tail - t[2]};
      anchors_[k - 1] = v;
    }
  }

  AiryValues eval_far_left(double x) const {
    AiryValues r = airy_asymptotic(x);
    // B(x) = B(kLeft) + int_x^{kLeft} Ai, integrated with the asymptotic Ai.
    const double span = kLeft - x;
    const int panels = std::max(1, static_cast<int>(std::ceil(span / 0.25)));
    const QuadratureGrid g = composite_legendre(x, kLeft, panels, 16);
    double s = 0.0;
    for (std::size_t k = 0; k < g.size(); ++k) s += g.weights[k] * airy_asymptotic(g.nodes[k]).ai;
    r.tail = anchors_.front().tail + s;
    return r;
  }

  std::vector<AiryValues> anchors_;
  std::array<double, 3> mismatch_{};
};

}  // namespace detail

/// Ai(x), Ai'(x) and B(x) = int_x^inf Ai(t) dt in one evaluation.
inline AiryValues airy_all(double x) { return detail::AiryTable::instance().eval(x); }

inline double airy_ai(double x) { return airy_all(x).ai; }
inline double airy_ai_prime(double x) { return airy_all(x).aip; }

/// B(x) = int_x^inf Ai(t) dt.
inline double airy_tail(double x) { return airy_all(x).tail; }

/// s^{(1)}(x) = 1 - B(x).
inline double airy_s1(double x) { return 1.0 - airy_tail(x); }

}  // namespace swl
