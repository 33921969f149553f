#include <cmath>
#include <numeric>
#include <random>

#include <boost/math/special_functions/gamma.hpp>
#include <gtest/gtest.h>

#include "swl/finite_kernel.hpp"
#include "swl/mc_experiments.hpp"

using namespace swl;

namespace {

double mean(const std::vector<double>& v) { return std::accumulate(v.begin(), v.end(), 0.0) / v.size(); }

}  // namespace

TEST(RunTrials, DeterministicAcrossThreadCounts) {
  const SpikedParams p(6, 4, 0.8);
  for (Ensemble e : {Ensemble::quaternionic, Ensemble::complex}) {
    const TrialBatch one = run_trials(p, e, 37, 11, 1);
    const TrialBatch three = run_trials(p, e, 37, 11, 3);
    ASSERT_EQ(one.raw_max.size(), 37u);
    EXPECT_EQ(one.raw_max, three.raw_max);
    EXPECT_EQ(one.rescaled, three.rescaled);
    EXPECT_NE(run_trials(p, e, 37, 12, 1).raw_max, one.raw_max);
  }
}

TEST(RunTrials, RescaledUsesMap) {
  const TrialBatch b = run_trials(SpikedParams(8, 8, 2.0), Ensemble::quaternionic, 5, 3, 1);
  EXPECT_EQ(b.map.regime, Regime::supercritical);
  for (std::size_t i = 0; i < 5; ++i) EXPECT_DOUBLE_EQ(b.rescaled[i], b.map.apply(b.raw_max[i]));
}

TEST(RunTrials, RejectsBadInput) {
  const SpikedParams p(4, 4, 0.5);
  EXPECT_THROW(run_trials(p, Ensemble::quaternionic, 0, 1), InvalidParams);
  EXPECT_THROW(run_trials(p, Ensemble::quaternionic_white, 10, 1), InvalidParams);
}

TEST(KsStatistic, SmallCases) {
  EXPECT_DOUBLE_EQ(ks_statistic(std::vector<double>{0.0}, standard_normal_cdf), 0.5);
  const int n = 200;
  std::vector<double> u(n);
  for (int i = 0; i < n; ++i) u[i] = (i + 0.5) / n;
  EXPECT_NEAR(ks_statistic(u, [](double x) { return x; }), 0.5 / n, 1e-15);
  std::reverse(u.begin(), u.end());
  EXPECT_NEAR(ks_statistic(u, [](double x) { return x; }), 0.5 / n, 1e-15);
  // point mass far right of a uniform law
  EXPECT_DOUBLE_EQ(ks_statistic(std::vector<double>{2.0, 3.0}, [](double x) { return std::clamp(x, 0.0, 1.0); }),
                   1.0);
}

TEST(KsStatistic, InverseTransformSample) {
  // Normal draws against their own law stay within the DKW band.
  std::mt19937_64 g(99);
  std::normal_distribution<double> d;
  std::vector<double> s(20000);
  for (double& x : s) x = d(g);
  EXPECT_LT(ks_statistic(s, standard_normal_cdf), 0.0136);  // P(exceed) < 0.05
  for (double& x : s) x += 0.1;
  EXPECT_GT(ks_statistic(s, standard_normal_cdf), 0.03);
}

TEST(TabulatedCdf, AgreesWithDirectEvaluation) {
  const TabulatedCdf t(Family::GSE, -7.0, 5.0, 0.1, 64);
  for (double x : {-5.55, -3.03, -1.27, 0.41}) EXPECT_NEAR(t(x), limit_cdf(Family::GSE, x), 2e-4) << x;
  EXPECT_DOUBLE_EQ(t(-20.0), t(-7.0));
  EXPECT_DOUBLE_EQ(t(20.0), t(5.0));
  EXPECT_DOUBLE_EQ(TabulatedCdf(Family::Gaussian)(1.0), standard_normal_cdf(1.0));
  EXPECT_THROW(TabulatedCdf(Family::GOE, 1.0, 0.0), InvalidParams);
}

TEST(PhaseRow, SyntheticGaussianBatch) {
  TrialBatch b;
  b.params = SpikedParams(80, 80, 3.0);
  b.map = rescale_map(b.params, Ensemble::quaternionic);
  std::mt19937_64 g(5);
  std::normal_distribution<double> d;
  for (int i = 0; i < 3000; ++i) b.rescaled.push_back(d(g));
  LawTables tables;
  const PhaseRow r = phase_row(b, tables);
  EXPECT_EQ(r.expected, Family::Gaussian);
  EXPECT_TRUE(r.matches());
  EXPECT_LT(r.ks_gaussian, 0.03);
}

TEST(MonteCarlo, OneByOneIsGamma) {
  // N = 1: the eigenvalue is Gamma(2M, (1 + a) / 2M)
  const SpikedParams p(3, 1, 0.5);
  const TrialBatch b = run_trials(p, Ensemble::quaternionic, 20000, 20240601, 1);
  const double ks = ks_statistic(b.raw_max, [&](double x) {
    return x <= 0.0 ? 0.0 : boost::math::gamma_p(2.0 * p.M, 2.0 * p.M * x / (1.0 + p.a));
  });
  EXPECT_LT(ks, 0.02);
}

TEST(MonteCarlo, FiniteCdfAgreesWithSampling) {
  const SpikedParams p(3, 2, 0.5);
  // tabulate the exact CDF, then interpolate
  std::vector<double> xs, ys;
  for (double t = 0.05; t <= 12.0; t += 0.05) {
    xs.push_back(t);
    ys.push_back(finite_cdf(p, t));
  }
  const double lo = xs.front(), hi = xs.back(), y_lo = ys.front();
  const boost::math::interpolators::pchip<std::vector<double>> f(std::move(xs), std::move(ys));
  const TrialBatch b = run_trials(p, Ensemble::quaternionic, 20000, 20240601, 1);
  const double ks = ks_statistic(b.raw_max, [&](double x) {
    if (x <= lo) return y_lo * std::max(0.0, x) / lo;
    return x >= hi ? 1.0 : f(x);
  });
  EXPECT_LT(ks, 0.02);
}

TEST(MonteCarlo, MeanLargestMatchesExactFiniteMean) {
  // exact means from int_0^inf (1 - P(max <= t)) dt at M = N = 40
  const struct {
    double a, exact;
  } cases[] = {{0.0, 3.592198}, {2.0, 4.444095}};
  for (const auto& c : cases) {
    const TrialBatch b = run_trials(SpikedParams(40, 40, c.a), Ensemble::quaternionic, 2000, 20240601, 1);
    EXPECT_NEAR(mean(b.raw_max), c.exact, 0.03) << c.a;
  }
}

TEST(MonteCarlo, WhiteMeanSitsBelowSoftEdge) {
  // The finite-N mean undershoots (1 + 1/gamma)^2 = 4 by about 0.4 at N = 40.
  const TrialBatch b = run_trials(SpikedParams(40, 40, 0.0), Ensemble::quaternionic, 500, 7, 1);
  EXPECT_LT(mean(b.raw_max), 3.75);
  EXPECT_GT(mean(b.raw_max), 3.4);
}
