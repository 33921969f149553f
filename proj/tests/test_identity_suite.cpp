#include <cmath>
#include <random>

#include <boost/math/distributions/gamma.hpp>
#include <gtest/gtest.h>

#include "swl/identity_suite.hpp"

using namespace swl;

TEST(LambdaPoint, Validation) {
  EXPECT_NO_THROW(LambdaPoint({0.5, 1.5, 2.0}));
  EXPECT_THROW(LambdaPoint(std::vector<double>{}), SizeError);
  EXPECT_THROW(LambdaPoint({1.0, 2.0, 3.0, 4.0, 5.0}), SizeError);
  EXPECT_THROW(LambdaPoint({1.0, 1.0 + 1e-7}), DomainError);
  EXPECT_THROW(LambdaPoint({-1.0, 2.0}), DomainError);
}

TEST(ConfluentVandermonde, HandWorkedCases) {
  // N = 1: [[1, 0], [x, 1]]; N = 2 at {1, 2}: (1 - 2)^4 = 1
  EXPECT_LT(check_confluent_vandermonde(LambdaPoint({0.7})), 1e-30);
  EXPECT_DOUBLE_EQ(vandermonde_fourth({1.0, 2.0}), 1.0);
  EXPECT_DOUBLE_EQ(vandermonde_fourth({1.0, 3.0, 4.0}), 16.0 * 81.0 * 1.0);
  EXPECT_NEAR(lemma1_ratio(LambdaPoint({1.0, 2.0}), 0), 1.0, 1e-30);
}

TEST(ConfluentVandermonde, FourPointsNeedWidePrecision) {
  std::mt19937_64 g(3);
  for (int k = 0; k < 20; ++k)
    EXPECT_LT(check_confluent_vandermonde(random_lambda_point(g, 4)), 1e-12);
}

TEST(Lemma1, SmallClosedForms) {
  const LambdaPoint one({1.7});
  for (int j = 0; j <= 4; ++j)  // h_j(x, x) = (j + 1) x^j
    EXPECT_NEAR(lemma1_ratio(one, j), (j + 1) * std::pow(1.7, j), 1e-12 * std::pow(1.7, j) * (j + 1));
  const LambdaPoint two({0.5, 2.0});
  EXPECT_NEAR(doubled_schur(two, 1), 2.0 * 2.5, 1e-14);
  EXPECT_NEAR(lemma1_ratio(two, 1), 5.0, 1e-12);
  EXPECT_THROW(check_lemma1(LambdaPoint({1.0, 2.0, 3.0, 4.0}), 1), SizeError);
  EXPECT_THROW(check_lemma1(two, 5), SizeError);
  EXPECT_THROW(lemma1_ratio(two, -1), DomainError);
}

TEST(JackIdentity, OneVariable) {
  for (int j = 0; j <= 6; ++j) EXPECT_NEAR(jack_one_row(LambdaPoint({1.3}), j), std::pow(1.3, j), 1e-13 * std::pow(1.3, j));
  EXPECT_THROW(check_jack_identity(LambdaPoint({1.0}), 7), SizeError);
}

TEST(JackIdentity, ExactOverRationals) {
  using R = Rational;
  const std::vector<std::vector<R>> pts = {
      {R(1, 2)}, {R(1, 3), R(5, 2)}, {R(2, 7), R(3, 4), R(11, 5)}, {R(1), R(2), R(3)}};
  for (const auto& x : pts)
    for (int j = 0; j <= 6; ++j) EXPECT_EQ(jack_identity_defect(x, j), R(0)) << x.size() << " " << j;
  EXPECT_THROW(jack_identity_defect({R(1), R(2), R(3), R(4)}, 1), SizeError);
}

TEST(IdentitySweep, AllResidualsSmall) {
  const auto rows = identity_sweep();
  ASSERT_EQ(rows.size(), 4u * 24u);
  for (const auto& r : rows) {
    const double tol = r.check == "lemma1_vs_jack" ? 1e-12 : 1e-10;
    EXPECT_LT(r.residual, tol) << r.check << " N=" << r.point.N() << " j=" << r.j;
  }
  // the sweep is seeded
  const auto again = identity_sweep();
  for (std::size_t i = 0; i < rows.size(); ++i) EXPECT_EQ(rows[i].residual, again[i].residual);
}

TEST(JointDensity, OneByOneIsGammaDensity) {
  for (double a : {0.0, 0.5, -0.5}) {
    const SpikedParams p(3, 1, a);
    const JointDensity d(p);
    const boost::math::gamma_distribution<double> law(2.0 * p.M, (1.0 + a) / (2.0 * p.M));
    for (double x : {0.2, 0.8, 1.5, 3.0}) EXPECT_NEAR(d({x}), boost::math::pdf(law, x), 1e-9) << a << " " << x;
  }
}

TEST(JointDensity, SymmetricAndNormalised) {
  for (double a : {0.5, 0.0, -0.5, 2.0}) {
    const SpikedParams p(3, 2, a);
    const JointDensity d(p);
    EXPECT_NEAR(d({0.7, 1.9}), d({1.9, 0.7}), 1e-12 * d({0.7, 1.9}));
    EXPECT_GE(d({1.0, 1.0}), 0.0);
    EXPECT_NEAR(d.integrate_box(0.0, 60.0, 0.0, 60.0, 40), 1.0, 1e-8) << a;
  }
  EXPECT_THROW(JointDensity(SpikedParams(4, 3, 0.5)), SizeError);
}

TEST(JointDensity, AgreesWithSampling) {
  EXPECT_LT(check_joint_density(SpikedParams(3, 2, 0.5), 200000), 0.01);
  EXPECT_LT(check_joint_density(SpikedParams(2, 1, 1.0), 100000), 0.01);
  // large c x: the exponential row dwarfs the polynomial rows
  EXPECT_LT(check_joint_density(SpikedParams(3, 2, 2.0), 200000), 0.01);
  EXPECT_THROW(check_joint_density(SpikedParams(5, 2, 0.5), 10), SizeError);
}
