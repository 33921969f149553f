#pragma once

#include <algorithm>
#include <cmath>
#include <complex>
#include <limits>
#include <numbers>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "swl/errors.hpp"
#include "swl/fredholm.hpp"
#include "swl/quaternion.hpp"
#include "swl/special_functions.hpp"

namespace swl {

/// Spike magnitudes below this use the unperturbed (white) basis.
inline constexpr double kWhiteThreshold = 1e-8;

/// Largest M for which the finite-N machinery is validated.
inline constexpr int kMaxFiniteM = 40;

/// Trapezoid rule for the contour of the last basis function.
/// radius = 0 selects the radius automatically for every evaluation point.
struct ContourRule {
  int nodes = 256;
  double radius = 0.0;
};

/// Skew-orthogonal basis phi_0 ... phi_{2N-1} for the weight
/// x^{2(M-N)+1} e^{-2Mx}, with normalisations r_0 ... r_{N-1}.
struct SkewBasis {
  SpikedParams params;
  bool white = false;
  double alpha = 0.0;                // 2(M - N)
  std::vector<double> even_coef;     // prod_{i<=k} (2i-1)/(2i+alpha), k = 0..N-1
  std::vector<LogScaled> r;          // r_j, sign kept for a < 0
  ContourRule contour;

  int N() const { return params.N; }
  int M() const { return params.M; }
  int dim() const { return 2 * params.N; }
  double spike() const { return params.a; }
  /// Exponent c = 2Ma/(1+a) of phi_{2N-1}.
  double c() const { return 2.0 * params.M * params.a / (1.0 + params.a); }
  /// Pole of the contour integrand, -a/(a+1).
  double pole() const { return -params.a / (1.0 + params.a); }
};

namespace detail {

inline void check_finite_params(const SpikedParams& p) {
  p.validate();
  if (p.M > kMaxFiniteM)
    throw RangeError("finite kernel: M = " + std::to_string(p.M) + " exceeds " +
                     std::to_string(kMaxFiniteM));
}

inline SkewBasis basis_common(const SpikedParams& p) {
  check_finite_params(p);
  SkewBasis b;
  b.params = p;
  b.alpha = 2.0 * (p.M - p.N);
  b.even_coef.resize(p.N);
  double prod = 1.0;
  for (int k = 0; k < p.N; ++k) {
    if (k > 0) prod *= (2.0 * k - 1.0) / (2.0 * k + b.alpha);
    b.even_coef[k] = prod;
  }
  b.r.resize(p.N);
  const double log2m = std::log(2.0 * p.M);
  for (int j = 0; j < p.N; ++j) {
    const double lr = -(b.alpha + 1.0) * log2m + log_factorial(2.0 * j + b.alpha + 1.0) -
                      log_factorial(2.0 * j) + std::log(b.even_coef[j]);
    b.r[j] = LogScaled{1, lr};
  }
  return b;
}

/// log of x^{M-N+1/2} e^{-Mx}
inline double log_weight(const SkewBasis& b, double x) {
  return (b.M() - b.N() + 0.5) * std::log(x) - b.M() * x;
}

}  // namespace detail

/// Basis of the unperturbed ensemble: the even/odd construction extended to
/// j = N - 1.
inline SkewBasis build_white_basis(const SpikedParams& params) {
  SkewBasis b = detail::basis_common(params);
  b.white = true;
  return b;
}

/// Spiked basis. Throws DegenerateParam when |a| is below the white threshold.
inline SkewBasis build_skew_basis(const SpikedParams& params) {
  if (std::abs(params.a) < kWhiteThreshold)
    throw DegenerateParam("build_skew_basis: a = 0 is the white ensemble");
  SkewBasis b = detail::basis_common(params);
  const int M = params.M, N = params.N;
  const double a = params.a;
  const double lr = (b.alpha + 1.0) * std::log((1.0 + a) / (2.0 * M)) +
                    (2.0 * N - 1.0) * std::log(std::abs(a)) + log_factorial(2.0 * M - 1.0) -
                    log_factorial(2.0 * N - 2.0) + std::log(b.even_coef[N - 1]);
  b.r[N - 1] = LogScaled{a > 0 ? 1 : -1, lr};
  return b;
}

/// White basis when |a| < threshold, spiked basis otherwise.
inline SkewBasis make_basis(const SpikedParams& params) {
  return std::abs(params.a) < kWhiteThreshold ? build_white_basis(params)
                                              : build_skew_basis(params);
}

// ---------------------------------------------------------------------------
// phi_{2N-1} by contour quadrature
// ---------------------------------------------------------------------------

struct ContourValue {
  LogScaled phi;
  LogScaled dphi;
  double imag_residue = 0.0;  // relative to |phi|
  double radius = 0.0;
  bool encloses_pole = true;
  int nodes = 0;
};

namespace detail {

using cd = std::complex<double>;

/// log of f(z) z, where f is the contour integrand of phi_{2N-1}.
inline cd contour_log_term(const SkewBasis& b, double y, cd z) {
  const int M = b.M(), N = b.N();
  const double a = b.spike();
  return -2.0 * M * y * z + (2.0 * M - 1.0) * std::log(1.0 + z) +
         (2.0 - 2.0 * N) * std::log(z) - std::log((a + 1.0) * z + a);
}

/// Largest log-magnitude of the trapezoid terms on the circle |z| = R,
/// sampled at `probes` angles (real arithmetic only).
inline double contour_cost(const SkewBasis& b, double y, double R, int probes = 32) {
  const int M = b.M(), N = b.N();
  const double a = b.spike();
  const double base = (2.0 - 2.0 * N) * std::log(R);
  double worst = -std::numeric_limits<double>::infinity();
  for (int k = 0; k < probes; ++k) {
    const double ct = std::cos(2.0 * std::numbers::pi * (k + 0.5) / probes);
    const double one_plus = 1.0 + 2.0 * R * ct + R * R;
    const double pole = (a + 1.0) * (a + 1.0) * R * R + 2.0 * a * (a + 1.0) * R * ct + a * a;
    const double v = -2.0 * M * y * R * ct + 0.5 * (2.0 * M - 1.0) * std::log(one_plus) + base -
                     0.5 * std::log(pole);
    worst = std::max(worst, v);
  }
  return worst;
}

/// Radius in [lo, hi] minimising contour_cost: coarse log grid, then
/// golden-section refinement around the best grid point.
inline double best_radius(const SkewBasis& b, double y, double lo, double hi) {
  const int steps = 16;
  const double span = std::log(hi / lo);
  auto cost_at = [&](double u) { return contour_cost(b, y, lo * std::exp(u)); };
  int best_i = 0;
  double best_c = std::numeric_limits<double>::infinity();
  for (int i = 0; i <= steps; ++i) {
    const double cst = cost_at(span * i / steps);
    if (cst < best_c) {
      best_c = cst;
      best_i = i;
    }
  }
  double u0 = span * std::max(best_i - 1, 0) / steps;
  double u1 = span * std::min(best_i + 1, steps) / steps;
  const double g = 0.5 * (std::sqrt(5.0) - 1.0);
  double p = u1 - g * (u1 - u0), q = u0 + g * (u1 - u0);
  double cp = cost_at(p), cq = cost_at(q);
  for (int it = 0; it < 20; ++it) {
    if (cp < cq) {
      u1 = q;
      q = p;
      cq = cp;
      p = u1 - g * (u1 - u0);
      cp = cost_at(p);
    } else {
      u0 = p;
      p = q;
      cp = cq;
      q = u0 + g * (u1 - u0);
      cq = cost_at(q);
    }
  }
  const double u = cp < cq ? p : q;
  return lo * std::exp(std::min(cp, cq) < best_c ? u : span * best_i / steps);
}

}  // namespace detail

/// phi_{2N-1}(y) and its derivative from the contour representation on a
/// circle of radius R. With encloses_pole = false the circle only encloses the
/// origin and the residue e^{cy} at z = -a/(a+1) is added in closed form.
inline ContourValue phi_last_contour(const SkewBasis& b, double y, int nodes, double R,
                                     bool encloses_pole) {
  using detail::cd;
  if (b.white) throw DegenerateParam("phi_last_contour: white basis has no contour term");
  const double z0 = std::abs(b.pole());
  if (encloses_pole ? !(R > z0) : !(R < z0))
    throw ContourError("phi_last_contour: radius " + std::to_string(R) +
                       " on the wrong side of the pole");
  const int M = b.M(), N = b.N();
  const double a = b.spike();

  std::vector<cd> logs(nodes);
  std::vector<cd> zs(nodes);
  double shift = -std::numeric_limits<double>::infinity();
  for (int k = 0; k < nodes; ++k) {
    const double th = 2.0 * std::numbers::pi * (k + 0.5) / nodes;
    zs[k] = std::polar(R, th);
    logs[k] = detail::contour_log_term(b, y, zs[k]);
    shift = std::max(shift, logs[k].real());
  }
  cd s0 = 0.0, s1 = 0.0;
  for (int k = 0; k < nodes; ++k) {
    const cd t = std::exp(logs[k] - shift);
    s0 += t;
    s1 += -2.0 * M * zs[k] * t;
  }
  s0 /= static_cast<double>(nodes);
  s1 /= static_cast<double>(nodes);

  // prefactor -(1+a)^{alpha+1} a^{2N-1}
  const double log_pref = (b.alpha + 1.0) * std::log1p(a) + (2.0 * N - 1.0) * std::log(std::abs(a));
  const int sign_pref = a > 0 ? -1 : 1;
  const LogScaled pref{sign_pref, log_pref + shift};

  ContourValue out;
  out.radius = R;
  out.encloses_pole = encloses_pole;
  out.nodes = nodes;
  LogScaled v = pref * LogScaled::from(s0.real());
  LogScaled d = pref * LogScaled::from(s1.real());
  const LogScaled vi = pref * LogScaled::from(std::abs(s0.imag()));
  if (!encloses_pole) {
    const double cc = b.c();
    v = v + LogScaled{1, cc * y};
    d = d + LogScaled::from(cc).times_exp(cc * y);
  }
  out.phi = v;
  out.dphi = d;
  out.imag_residue = v.is_zero() ? (vi.is_zero() ? 0.0 : 1.0) : std::exp(vi.log_mag - v.log_mag);
  return out;
}

/// Node count large enough to resolve e^{-2Myz} and the pole orders on a
/// circle of radius R.
inline int contour_nodes_for(const SkewBasis& b, double y, double R) {
  const double need = 3.0 * 2.0 * b.M() * y * R + 4.0 * (b.M() + b.N()) + 64.0;
  int n = std::max(b.contour.nodes, 16);
  while (n < need) n *= 2;
  return n;
}

/// Production evaluation of phi_{2N-1}(y) and phi'_{2N-1}(y). Picks between
/// the circle around both poles and residue-plus-inner-circle by the size of
/// the largest trapezoid term, then checks the imaginary residue.
inline ContourValue phi_last(const SkewBasis& b, double y) {
  if (!(y > 0.0)) throw DomainError("phi_last: y must be positive");
  const double z0 = std::abs(b.pole());
  const double margin = 1.25;
  ContourValue v;
  if (b.contour.radius > 0.0) {
    const double R = b.contour.radius;
    v = phi_last_contour(b, y, contour_nodes_for(b, y, R), R, R > z0);
  } else {
    const double ra = detail::best_radius(b, y, margin * z0, margin * std::max(z0, 1.0) * 64.0);
    const double rb = detail::best_radius(b, y, z0 / margin * 1e-6, z0 / margin);
    const double ca = detail::contour_cost(b, y, ra);
    const double cb = detail::contour_cost(b, y, rb);
    const bool use_outer = ca <= cb;
    const double R = use_outer ? ra : rb;
    v = phi_last_contour(b, y, contour_nodes_for(b, y, R), R, use_outer);
  }
  if (v.imag_residue > 1e-9)
    throw ContourError("phi_last: imaginary residue " + std::to_string(v.imag_residue) +
                       " at y = " + std::to_string(y));
  return v;
}

/// phi_{2N-1} from its defining series e^{cy} - (1+a)^{alpha+1} sum (-a)^j L_j,
/// with Neumaier-compensated summation. Subject to cancellation; test oracle.
inline double phi_last_series(const SkewBasis& b, double y) {
  const int N = b.N();
  const double a = b.spike();
  const auto lag = laguerre_table(2 * N - 2, b.alpha, 2.0 * b.M() * y);
  const double pref = std::pow(1.0 + a, b.alpha + 1.0);
  double sum = std::exp(b.c() * y), comp = 0.0;
  for (int j = 0; j <= 2 * N - 2; ++j) {
    const double term = -pref * std::pow(-a, j) * lag[j].value();
    const double t = sum + term;
    if (std::abs(sum) >= std::abs(term))
      comp += (sum - t) + term;
    else
      comp += (term - t) + sum;
    sum = t;
  }
  return sum + comp;
}

// ---------------------------------------------------------------------------
// psi functions
// ---------------------------------------------------------------------------

/// psi_i and psi'_i for i = 0 .. 2N-1 at one point, log-scaled.
struct BasisValues {
  std::vector<LogScaled> psi;
  std::vector<LogScaled> dpsi;
};

inline BasisValues basis_values(const SkewBasis& b, double x) {
  if (!(x > 0.0)) throw DomainError("basis_values: x must be positive");
  const int N = b.N(), M = b.M();
  const double al = b.alpha;
  const auto L = laguerre_table(2 * N, al, 2.0 * M * x);
  const double lw = detail::log_weight(b, x);
  const double lh = lw - std::log(x);
  BasisValues v;
  v.psi.resize(2 * N);
  v.dpsi.resize(2 * N);
  LogScaled even = LogScaled::zero();
  for (int j = 0; j < N; ++j) {
    even = even + LogScaled::from(b.even_coef[j]) * L[2 * j];
    v.psi[2 * j] = even.times_exp(lw);
    v.dpsi[2 * j] = (LogScaled::from(0.5 * b.even_coef[j] * (2.0 * j + 1.0)) * L[2 * j + 1]).times_exp(lh);
    if (j < N - 1 || b.white) {
      v.psi[2 * j + 1] = (-L[2 * j + 1]).times_exp(lw);
      const LogScaled bracket = LogScaled::from(2.0 * j + 2.0) * L[2 * j + 2] -
                                LogScaled::from(2.0 * j + al + 1.0) * L[2 * j];
      v.dpsi[2 * j + 1] = (LogScaled::from(-0.5) * bracket).times_exp(lh);
    }
  }
  if (!b.white) {
    const ContourValue c = phi_last(b, x);
    const LogScaled dw_over_w = LogScaled::from((M - N + 0.5) / x - M);
    v.psi[2 * N - 1] = c.phi.times_exp(lw);
    v.dpsi[2 * N - 1] = (c.dphi + c.phi * dw_over_w).times_exp(lw);
  }
  return v;
}

/// psi_{2N-1}(y).
inline double psi_last(const SkewBasis& b, double y) {
  if (b.white) return basis_values(b, y).psi[2 * b.N() - 1].value();
  return phi_last(b, y).phi.times_exp(detail::log_weight(b, y)).value();
}

/// psi'_{2N-1}(x).
inline double psi_last_deriv(const SkewBasis& b, double x) {
  return basis_values(b, x).dpsi[2 * b.N() - 1].value();
}

/// Default quadrature for the tail integrals below: the integrand decays like
/// e^{-Mt}, so the map scale follows 1/M.
inline QuadratureGrid tail_grid(const SkewBasis& b, double x, int m = 128) {
  const double L = std::max(0.05, (2.0 + std::sqrt(static_cast<double>(b.M()))) / b.M());
  return half_line_grid(x, m, L);
}

/// int_x^inf t^{M-N-1/2} e^{-Mt} L_{2N-1}(2Mt) dt on a tail grid starting at x.
inline double odd_tail_integral(const SkewBasis& b, const QuadratureGrid& grid) {
  const int N = b.N(), M = b.M();
  std::vector<LogScaled> terms;
  terms.reserve(grid.size());
  for (std::size_t k = 0; k < grid.size(); ++k) {
    const double t = grid.nodes[k];
    const LogScaled l = laguerre(2 * N - 1, b.alpha, 2.0 * M * t);
    terms.push_back((l * LogScaled::from(grid.weights[k]))
                        .times_exp((M - N - 0.5) * std::log(t) - M * t));
  }
  return log_sum(terms).value();
}

/// Constant C with psi_{2N-2}(x) = -C * odd_tail_integral(x).
inline double penult_constant(const SkewBasis& b) {
  return 0.5 * (2.0 * b.N() - 1.0) * b.even_coef[b.N() - 1];
}

/// psi_{2N-2}(x) from its tail-integral representation.
inline double psi_penult(const SkewBasis& b, double x) {
  if (!(x > 0.0)) throw DomainError("psi_penult: x must be positive");
  return -penult_constant(b) * odd_tail_integral(b, tail_grid(b, x));
}

// ---------------------------------------------------------------------------
// Matrix kernel
// ---------------------------------------------------------------------------

struct KernelValues {
  double S = 0.0;
  double SD = 0.0;
  double IS = 0.0;
};

/// Kernel entries from the psi-sums directly.
inline KernelValues kernel_eval_sum(const SkewBasis& b, const BasisValues& vx, const BasisValues& vy) {
  KernelValues k;
  for (int j = 0; j < b.N(); ++j) {
    const LogScaled& r = b.r[j];
    const int e = 2 * j, o = 2 * j + 1;
    k.S += ((vx.dpsi[o] * vy.psi[e] - vx.dpsi[e] * vy.psi[o]) / r).value();
    k.SD += ((vx.dpsi[e] * vy.dpsi[o] - vx.dpsi[o] * vy.dpsi[e]) / r).value();
    k.IS += ((vx.psi[o] * vy.psi[e] - vx.psi[e] * vy.psi[o]) / r).value();
  }
  return k;
}

inline KernelValues kernel_eval_sum(const SkewBasis& b, double x, double y) {
  return kernel_eval_sum(b, basis_values(b, x), basis_values(b, y));
}

/// S_4 split as S_4a1 + S_4a2 + S_4b.
struct KernelParts {
  double a1 = 0.0;
  double a2 = 0.0;
  double b = 0.0;
  double total() const { return a1 + a2 + b; }
};

/// S_4(x, y) by the closed Laguerre forms: a Christoffel-type sum over
/// j <= 2N-2, a term in L_{2N-2} times the odd tail integral, and the spike
/// part in L_{2N-1}, psi_{2N-1}, psi'_{2N-1}.
inline KernelParts kernel_parts(const SkewBasis& b, double x, double y) {
  if (b.white) throw DegenerateParam("kernel_parts: the split needs a spiked basis");
  const int N = b.N(), M = b.M();
  const double al = b.alpha;
  const auto Lx = laguerre_table(2 * N - 1, al, 2.0 * M * x);
  const auto Ly = laguerre_table(2 * N - 1, al, 2.0 * M * y);
  const double lhx = (M - N - 0.5) * std::log(x) - M * x;
  const double lwy = detail::log_weight(b, y);
  const double l2m = std::log(2.0 * M) * (al + 1.0);

  KernelParts p;
  std::vector<LogScaled> terms;
  for (int j = 0; j <= 2 * N - 2; ++j)
    terms.push_back((Lx[j] * Ly[j]).times_exp(log_factorial(j) - log_factorial(j + al)));
  p.a1 = log_sum(terms).times_exp(std::log(0.5) + l2m + lhx + lwy).value();

  const double tail = odd_tail_integral(b, tail_grid(b, y));
  const LogScaled c2 = LogScaled{1, std::log(0.25) + l2m + log_factorial(2.0 * N - 1.0) -
                                        log_factorial(2.0 * M - 2.0)};
  p.a2 = (c2 * Lx[2 * N - 2] * LogScaled::from(tail)).times_exp(lhx).value();

  const double a = b.spike();
  const LogScaled cb{a > 0 ? -1 : 1,
                     std::log(0.5) + (al + 1.0) * std::log(2.0 * M / (1.0 + a)) -
                         (2.0 * N - 1.0) * std::log(std::abs(a)) + log_factorial(2.0 * N - 1.0) -
                         log_factorial(2.0 * M - 1.0)};
  const ContourValue cy = phi_last(b, y);
  const BasisValues vx = basis_values(b, x);
  const LogScaled psi_y = cy.phi.times_exp(lwy);
  const LogScaled inner =
      (Lx[2 * N - 1] * psi_y).times_exp(lhx) + vx.dpsi[2 * N - 1] * LogScaled::from(tail);
  p.b = (cb * inner).value();
  return p;
}

/// (S_4, SD_4, IS_4) at (x, y): S_4 from the closed Laguerre forms (spiked
/// case; the white case uses the psi-sum throughout), SD_4 and IS_4 from the psi-sums.
inline KernelValues kernel_eval(const SkewBasis& b, double x, double y) {
  if (!(x > 0.0) || !(y > 0.0)) throw DomainError("kernel_eval: x, y must be positive");
  KernelValues k = kernel_eval_sum(b, x, y);
  if (!b.white) k.S = kernel_parts(b, x, y).total();
  return k;
}

// ---------------------------------------------------------------------------
// Gap probability
// ---------------------------------------------------------------------------

namespace detail {

/// Skew Gram G_ik = sum_n w_n (psi_i psi'_k - psi'_i psi_k) over a grid.
struct SkewGram {
  std::vector<std::vector<LogScaled>> g;
};

inline SkewGram skew_gram(const SkewBasis& b, const std::vector<double>& nodes,
                          const std::vector<double>& weights) {
  const int d = b.dim();
  std::vector<BasisValues> vals;
  vals.reserve(nodes.size());
  for (double x : nodes) vals.push_back(basis_values(b, x));
  SkewGram out;
  out.g.assign(d, std::vector<LogScaled>(d));
  std::vector<LogScaled> terms(nodes.size());
  for (int i = 0; i < d; ++i)
    for (int k = i + 1; k < d; ++k) {
      for (std::size_t n = 0; n < nodes.size(); ++n) {
        const auto& v = vals[n];
        terms[n] = (v.psi[i] * v.dpsi[k] - v.dpsi[i] * v.psi[k]) * LogScaled::from(weights[n]);
      }
      out.g[i][k] = log_sum(terms);
      out.g[k][i] = -out.g[i][k];
    }
  return out;
}

/// det(I - C G) with C the inverse-normalisation pattern C_{2j,2j+1} = -1/r_j,
/// C_{2j+1,2j} = 1/r_j. Entries can span hundreds of orders of magnitude, so
/// a diagonal similarity (Osborne balancing on log magnitudes) is applied
/// before leaving the log domain.
inline double gap_determinant(const SkewBasis& b, const SkewGram& sg) {
  const int d = b.dim();
  std::vector<std::vector<LogScaled>> cg(d, std::vector<LogScaled>(d));
  for (int i = 0; i < d; ++i) {
    const int partner = (i % 2 == 0) ? i + 1 : i - 1;
    const LogScaled inv_r = LogScaled::from(1.0) / b.r[i / 2];
    const LogScaled cfac = (i % 2 == 0) ? -inv_r : inv_r;
    for (int k = 0; k < d; ++k) cg[i][k] = cfac * sg.g[partner][k];
  }
  std::vector<double> shift(d, 0.0);
  auto log_abs_sum = [](const std::vector<double>& logs) {
    double hi = -std::numeric_limits<double>::infinity();
    for (double v : logs) hi = std::max(hi, v);
    if (!std::isfinite(hi)) return hi;
    double s = 0.0;
    for (double v : logs) s += std::exp(v - hi);
    return hi + std::log(s);
  };
  for (int sweep = 0; sweep < 50; ++sweep) {
    double moved = 0.0;
    for (int i = 0; i < d; ++i) {
      std::vector<double> row, col;
      for (int k = 0; k < d; ++k) {
        if (k == i) continue;
        if (!cg[i][k].is_zero()) row.push_back(cg[i][k].log_mag + shift[i] - shift[k]);
        if (!cg[k][i].is_zero()) col.push_back(cg[k][i].log_mag + shift[k] - shift[i]);
      }
      if (row.empty() || col.empty()) continue;
      const double delta = 0.5 * (log_abs_sum(col) - log_abs_sum(row));
      shift[i] += delta;
      moved = std::max(moved, std::abs(delta));
    }
    if (moved < 1e-3) break;
  }
  Eigen::MatrixXd m(d, d);
  for (int i = 0; i < d; ++i)
    for (int k = 0; k < d; ++k) m(i, k) = cg[i][k].times_exp(shift[i] - shift[k]).value();
  return det_identity_minus(m);
}

}  // namespace detail

/// Map scale for the finite-N half-line grid: covers the bulk edge and the
/// spike location from T.
inline double finite_map_scale(const SpikedParams& p, double T) {
  const double g = std::sqrt(static_cast<double>(p.M) / p.N);
  const double edge = (1.0 + 1.0 / g) * (1.0 + 1.0 / g);
  const double spike = p.a > 0 ? (1.0 + p.a) * (1.0 + 1.0 / (g * g * p.a)) : 0.0;
  const double top = std::max(edge, spike);
  return std::max(0.25, std::max(top - T, 0.0) + (1.0 + std::abs(p.a)) * 2.0 / std::sqrt(p.M));
}

struct FiniteCdfResult {
  double value = 0.0;       // P(max lambda <= T) at 2m nodes
  double determinant = 0.0; // det(I - P_T) at 2m nodes
  double drift = 0.0;       // |value(2m) - value(m)|
  int nodes = 0;
};

/// det(I - P_T) for the Nystrom discretisation of the matrix kernel on the
/// given grid. The kernel has rank 2N, so the 2m x 2m determinant is reduced
/// exactly to a 2N x 2N one.
inline double finite_gap_determinant(const SkewBasis& b, const QuadratureGrid& grid) {
  return detail::gap_determinant(b, detail::skew_gram(b, grid.nodes, grid.weights));
}

inline FiniteCdfResult finite_cdf_report(const SpikedParams& params, double T, int m = 64,
                                         double drift_tol = 1e-6) {
  if (!(T > 0.0)) throw DomainError("finite_cdf: T must be positive");
  if (m < 16) throw SizeError("finite_cdf: m must be >= 16");
  const SkewBasis b = make_basis(params);
  const double L = finite_map_scale(params, T);
  const double d1 = finite_gap_determinant(b, half_line_grid(T, m, L));
  const double d2 = finite_gap_determinant(b, half_line_grid(T, 2 * m, L));
  FiniteCdfResult out;
  out.determinant = d2;
  out.value = sqrt_nonnegative(d2);
  out.drift = std::abs(out.value - sqrt_nonnegative(d1));
  out.nodes = 2 * m;
  if (out.drift > drift_tol)
    throw ConvergenceError("finite_cdf: node doubling moved the value by " +
                           std::to_string(out.drift));
  return out;
}

/// P(max lambda <= T) = sqrt(det(I - P_T)).
inline double finite_cdf(const SpikedParams& params, double T, int m = 64) {
  return finite_cdf_report(params, T, m).value;
}

/// Dense 2m x 2m Nystrom matrix W^{1/2} [[S, SD], [IS, S^T]] W^{1/2}, built
/// from the psi-sum kernel. Only sensible for small N: the entries grow like
/// 1/r_j, and its determinant loses digits once they are far above 1.
inline Eigen::MatrixXd nystrom_block_matrix(const SkewBasis& b, const QuadratureGrid& grid) {
  const auto m = static_cast<Eigen::Index>(grid.size());
  std::vector<BasisValues> vals;
  for (double x : grid.nodes) vals.push_back(basis_values(b, x));
  Eigen::MatrixXd P(2 * m, 2 * m);
  for (Eigen::Index i = 0; i < m; ++i)
    for (Eigen::Index j = 0; j < m; ++j) {
      const double sw = std::sqrt(grid.weights[i] * grid.weights[j]);
      const KernelValues kij = kernel_eval_sum(b, vals[i], vals[j]);
      const KernelValues kji = kernel_eval_sum(b, vals[j], vals[i]);
      P(i, j) = sw * kij.S;
      P(i, m + j) = sw * kij.SD;
      P(m + i, j) = sw * kij.IS;
      P(m + i, m + j) = sw * kji.S;
    }
  return P;
}

// ---------------------------------------------------------------------------
// Oracles
// ---------------------------------------------------------------------------

/// Full skew Gram matrix <phi_i, phi_k>_4 = int_0^inf (psi_i psi'_k - psi'_i psi_k)
/// by composite Gauss-Legendre on (0, X].
inline Eigen::MatrixXd skew_gram_matrix(const SkewBasis& b, int panels = 160, int order = 24) {
  const double a = b.spike();
  const double decay = b.white ? b.M() : std::min<double>(b.M(), 2.0 * b.M() / (1.0 + a));
  const double X = 4.0 + (60.0 + 2.0 * (b.M() + b.N())) / decay;
  const QuadratureGrid g = composite_legendre(0.0, X, panels, order);
  const auto sg = detail::skew_gram(b, g.nodes, g.weights);
  Eigen::MatrixXd G(b.dim(), b.dim());
  for (int i = 0; i < b.dim(); ++i)
    for (int k = 0; k < b.dim(); ++k) G(i, k) = sg.g[i][k].value();
  return G;
}

/// Worst relative deviation of the Gram matrix from the pattern
/// G(2j, 2j+1) = r_j = -G(2j+1, 2j), zero elsewhere. Off-pattern entries are
/// measured against sqrt(|r_i| |r_k|) of their blocks.
inline double skew_orthogonality_residual(const SkewBasis& b, const Eigen::MatrixXd& G) {
  double worst = 0.0;
  for (int i = 0; i < b.dim(); ++i)
    for (int k = 0; k < b.dim(); ++k) {
      const LogScaled ri = b.r[i / 2], rk = b.r[k / 2];
      double dev;
      if (i / 2 == k / 2 && i != k) {
        const double want = (i % 2 == 0 ? 1.0 : -1.0) * ri.value();
        dev = std::abs(G(i, k) / want - 1.0);
      } else {
        dev = std::abs(G(i, k)) / std::exp(0.5 * (ri.log_mag + rk.log_mag));
      }
      worst = std::max(worst, dev);
    }
  return worst;
}

inline double skew_orthogonality_residual(const SpikedParams& p) {
  const SkewBasis b = make_basis(p);
  return skew_orthogonality_residual(b, skew_gram_matrix(b));
}

/// P(max lambda <= T) from the de Bruijn Pfaffian over (0, T], normalised by
/// the same Pfaffian over (0, X] with X far beyond the spectrum. N <= 2.
inline double debruijn_cdf_oracle(const SpikedParams& params, double T, int panels = 120,
                                  int order = 24) {
  if (params.N > 2) throw SizeError("debruijn_cdf_oracle: N must be 1 or 2");
  if (!(T > 0.0)) throw DomainError("debruijn_cdf_oracle: T must be positive");
  const SkewBasis b = make_basis(params);
  const double a = b.spike();
  const double decay = b.white ? b.M() : std::min<double>(b.M(), 2.0 * b.M() / (1.0 + a));
  const double X = std::max(T, 4.0 + (60.0 + 2.0 * (b.M() + b.N())) / decay);

  auto pf_over = [&](double upper) {
    const QuadratureGrid g = composite_legendre(0.0, upper, panels, order);
    const auto sg = detail::skew_gram(b, g.nodes, g.weights);
    const int d = b.dim();
    Eigen::MatrixXd A = Eigen::MatrixXd::Zero(d, d);
    for (int i = 0; i < d; ++i)
      for (int k = 0; k < d; ++k)
        if (i != k) A(i, k) = sg.g[i][k].value();
    return pfaffian(A);
  };
  return pf_over(T) / pf_over(X);
}

}  // namespace swl
