#include <cmath>
#include <complex>
#include <numbers>

#include <boost/math/special_functions/airy.hpp>
#include <boost/math/special_functions/binomial.hpp>
#include <boost/math/special_functions/factorials.hpp>
#include <boost/math/special_functions/gamma.hpp>
#include <boost/math/special_functions/laguerre.hpp>
#include <gtest/gtest.h>

#include "swl/special_functions.hpp"

using namespace swl;

namespace {

// Eq. 2 along the rays arg z = +-pi/3: Ai(x) = Im int_0^inf e^{-t^3/3 - x t w} w dt / pi
// with w = e^{i pi / 3}.
double airy_from_contour(double x) {
  const std::complex<double> w = std::polar(1.0, std::numbers::pi / 3.0);
  const QuadratureGrid g = composite_legendre(0.0, 14.0, 56, 20);
  std::complex<double> s = 0.0;
  for (std::size_t k = 0; k < g.size(); ++k) {
    const double t = g.nodes[k];
    s += g.weights[k] * std::exp(-t * t * t / 3.0 - x * t * w) * w;
  }
  return s.imag() / std::numbers::pi;
}

double laguerre_series(int n, double alpha, double x) {
  double s = 0.0;
  for (int k = 0; k <= n; ++k)
    s += boost::math::binomial_coefficient<double>(n + static_cast<unsigned>(alpha), n - k) *
         std::pow(-x, k) / boost::math::factorial<double>(k);
  return s;
}

}  // namespace

TEST(LogScaled, RoundTripsAndSigns) {
  EXPECT_EQ(LogScaled::from(0.0).sign, 0);
  EXPECT_DOUBLE_EQ(LogScaled::from(-3.5).value(), -3.5);
  const LogScaled big{1, 800.0};
  EXPECT_NEAR((big * LogScaled{-1, -799.0}).value(), -std::exp(1.0), 1e-12);
  EXPECT_NEAR((LogScaled::from(2.0) + LogScaled::from(-5.0)).value(), -3.0, 1e-14);
  EXPECT_TRUE((LogScaled::from(2.0) - LogScaled::from(2.0)).is_zero());
  EXPECT_NEAR(log_sum({LogScaled::from(1.0), LogScaled::from(2.0), LogScaled::from(-0.5)}).value(), 2.5,
              1e-14);
}

TEST(Laguerre, SmallCases) {
  for (double a : {0.0, 3.0, 40.0})
    for (double x : {0.0, 1.5, 200.0}) EXPECT_DOUBLE_EQ(laguerre(0, a, x).value(), 1.0);
  EXPECT_NEAR(laguerre(1, 2.0, 3.0).value(), 0.0, 1e-15);
  EXPECT_NEAR(laguerre(2, 0.0, 2.0).value(), -1.0, 1e-15);
  EXPECT_TRUE(laguerre(-1, 0.0, 1.0).is_zero());
}

TEST(Laguerre, MatchesExplicitSeries) {
  for (int n : {1, 4, 9})
    for (double a : {0.0, 2.0, 6.0})
      for (double x : {0.3, 2.5, 7.0}) {
        const double want = laguerre_series(n, a, x);
        EXPECT_NEAR(laguerre(n, a, x).value(), want, 1e-12 * std::max(1.0, std::abs(want)));
      }
}

TEST(Laguerre, MatchesBoostAssociated) {
  for (unsigned n : {3u, 10u, 20u})
    for (unsigned m : {0u, 4u, 16u})
      for (double x : {0.5, 5.0, 30.0}) {
        const double want = boost::math::laguerre(n, m, x);
        EXPECT_NEAR(laguerre(n, m, x).value(), want, 1e-11 * std::max(1.0, std::abs(want)));
      }
}

TEST(Laguerre, SurvivesLargeArguments) {
  // mpmath at 60 digits: L_79^(80)(400) = -e^147.344..., L_159^(80)(900) = -e^372.562...
  const LogScaled v = laguerre(79, 80.0, 400.0);
  EXPECT_EQ(v.sign, -1);
  EXPECT_NEAR(v.log_mag, 147.34412663517832234, 1e-9);
  const LogScaled w = laguerre(159, 80.0, 900.0);
  EXPECT_EQ(w.sign, -1);
  EXPECT_NEAR(w.log_mag, 372.56201566829743005, 1e-9);
}

TEST(Laguerre, OrthogonalityUnderWeight) {
  const double alpha = 6.0;
  const QuadratureGrid g = composite_legendre(0.0, 120.0, 60, 20);
  for (int j = 0; j <= 8; ++j)
    for (int k = 0; k <= 8; ++k) {
      const double s = g.integrate([&](double x) {
        return laguerre(j, alpha, x).value() * laguerre(k, alpha, x).value() * std::pow(x, alpha) *
               std::exp(-x);
      });
      const double norm = std::exp(std::lgamma(j + alpha + 1.0) - std::lgamma(j + 1.0));
      if (j == k) EXPECT_NEAR(s / norm, 1.0, 1e-9);
      else EXPECT_NEAR(s / norm, 0.0, 1e-9);
    }
}

TEST(LaguerreDeriv, ConstantsAndDomain) {
  for (double x : {0.2, 3.0, 11.0}) {
    EXPECT_TRUE(laguerre_deriv(0, 2.0, x).is_zero());
    EXPECT_NEAR(laguerre_deriv(1, 2.0, x).value(), -1.0, 1e-14);
  }
  EXPECT_THROW(laguerre_deriv(3, 1.0, 0.0), DomainError);
}

TEST(LaguerreDeriv, FiniteDifference) {
  const double h = 1e-5, x = 1.7;
  const double fd = (laguerre(3, 2.0, x + h).value() - laguerre(3, 2.0, x - h).value()) / (2 * h);
  EXPECT_NEAR(laguerre_deriv(3, 2.0, x).value(), fd, 1e-8);
}

TEST(LaguerreDeriv, DifferentialIdentityAgainstBoost) {
  // d/dx L_n^(a) = -L_{n-1}^(a+1)
  for (unsigned n = 1; n <= 12; ++n)
    for (unsigned a : {0u, 3u, 10u})
      for (double x : {0.1, 1.0, 5.0, 20.0}) {
        const double want = -boost::math::laguerre(n - 1, a + 1, x);
        EXPECT_NEAR(laguerre_deriv(n, a, x).value(), want, 1e-9 * std::max(1.0, std::abs(want)));
      }
}

TEST(GaussLegendre, Exactness) {
  const QuadratureGrid g2 = gauss_legendre(2);
  EXPECT_NEAR(g2.integrate([](double x) { return x * x; }), 2.0 / 3.0, 1e-15);
  for (int m : {2, 7, 64, 301, 512}) {
    const QuadratureGrid g = gauss_legendre(m);
    double w = 0.0;
    for (double v : g.weights) {
      EXPECT_GT(v, 0.0);
      w += v;
    }
    EXPECT_NEAR(w, 2.0, 1e-14);
    for (std::size_t k = 1; k < g.size(); ++k) EXPECT_LT(g.nodes[k - 1], g.nodes[k]);
    // degree 2m - 1 monomial pair
    const int d = 2 * m - 2;
    EXPECT_NEAR(g.integrate([&](double x) { return std::pow(x, d); }), 2.0 / (d + 1), 1e-13);
  }
  EXPECT_NEAR(gauss_legendre(64).integrate([](double x) { return std::cos(x); }), 2.0 * std::sin(1.0),
              1e-13);
  EXPECT_THROW(gauss_legendre(1), SizeError);
  EXPECT_THROW(gauss_legendre(513), SizeError);
}

TEST(GaussLegendre, MappedInterval) {
  const QuadratureGrid g = gauss_legendre(20, 1.0, 4.0);
  EXPECT_NEAR(g.integrate([](double x) { return 1.0 / x; }), std::log(4.0), 1e-14);
  const QuadratureGrid c = composite_legendre(0.0, 10.0, 5, 16);
  EXPECT_NEAR(c.integrate([](double x) { return std::exp(-x); }), 1.0 - std::exp(-10.0), 1e-14);
}

TEST(HalfLineGrid, ExponentialMass) {
  const QuadratureGrid g = half_line_grid(2.5, 64, 1.0);
  for (double x : g.nodes) EXPECT_GT(x, 2.5);
  EXPECT_NEAR(g.integrate([](double x) { return std::exp(-(x - 2.5)); }), 1.0, 1e-10);
  EXPECT_THROW(half_line_grid(0.0, 16, 0.0), DomainError);
}

TEST(HalfLineGrid, SelfConvergence) {
  auto f = [](double x) { return std::exp(-x * x); };
  const double a = half_line_grid(-1.0, 64, 2.0).integrate(f);
  const double b = half_line_grid(-1.0, 128, 2.0).integrate(f);
  EXPECT_LT(std::abs(a - b), 1e-12);
  EXPECT_NEAR(b, 0.5 * std::sqrt(std::numbers::pi) * std::erfc(-1.0), 1e-12);
}

TEST(Airy, MatchesBoost) {
  for (double x = -15.0; x <= 30.0; x += 0.37) {
    EXPECT_NEAR(airy_ai(x), boost::math::airy_ai(x), 1e-12) << x;
    EXPECT_NEAR(airy_ai_prime(x), boost::math::airy_ai_prime(x), 1e-12) << x;
  }
}

TEST(Airy, ZeroFromTwoMethods) {
  const double closed = 1.0 / (std::pow(3.0, 2.0 / 3.0) * std::tgamma(2.0 / 3.0));
  EXPECT_NEAR(airy_ai(0.0), closed, 1e-15);
  EXPECT_NEAR(airy_from_contour(0.0), closed, 1e-12);
  for (double x : {-3.0, 1.0, 2.5}) EXPECT_NEAR(airy_ai(x), airy_from_contour(x), 1e-12) << x;
}

TEST(Airy, DecayAndMonotoneTail) {
  EXPECT_LT(airy_ai(30.0), 1e-30);
  EXPECT_GT(airy_ai(30.0), 0.0);
  double prev = airy_ai(2.0);
  for (double x = 2.5; x <= 30.0; x += 0.5) {
    const double v = airy_ai(x);
    EXPECT_LT(v, prev);
    prev = v;
  }
}

TEST(AiryTail, FrozenValues) {
  // mpmath quad of Ai, 30 digits
  EXPECT_NEAR(airy_tail(0.0), 1.0 / 3.0, 1e-14);
  EXPECT_NEAR(airy_tail(-2.0), 1.2351061593719397, 1e-12);
  EXPECT_NEAR(airy_tail(3.0), 0.0034129573263115608, 1e-13);
  EXPECT_NEAR(airy_tail(-40.0), 0.96530251812241207, 1e-10);
  EXPECT_LT(std::abs(airy_tail(30.0)), 1e-12);
}

TEST(AiryTail, TotalMassOverFiniteWindowIsNotOne) {
  // int_{-40}^{40} Ai = B(-40) - B(40); the oscillating tail left of -40
  // still carries about 0.035, so the window does not hold unit mass.
  const double window = airy_tail(-40.0) - airy_tail(40.0);
  EXPECT_GT(std::abs(window - 1.0), 0.03);
  const QuadratureGrid g = composite_legendre(-40.0, 40.0, 160, 20);
  EXPECT_NEAR(g.integrate(airy_ai), window, 1e-12);
}

TEST(AiryTail, DerivativeAndComplement) {
  const double h = 1e-4;
  for (double x : {-2.0, 0.0, 2.0}) {
    EXPECT_NEAR((airy_tail(x + h) - airy_tail(x - h)) / (2 * h), -airy_ai(x), 1e-7);
    EXPECT_DOUBLE_EQ(airy_s1(x) + airy_tail(x), 1.0);
  }
}

TEST(AiryTail, QuadratureOfAi) {
  for (double x : {-7.0, -1.0, 1.5, 6.0}) {
    const QuadratureGrid g = composite_legendre(x, x + 40.0, 80, 20);
    EXPECT_NEAR(airy_tail(x), g.integrate(airy_ai) + airy_tail(x + 40.0), 1e-12) << x;
  }
}
