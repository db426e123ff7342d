#include <gtest/gtest.h>

#include <boost/math/quadrature/exp_sinh.hpp>
#include <boost/math/quadrature/tanh_sinh.hpp>

#include <cmath>

#include "pssmp/pssmp.hpp"

using namespace pssmp;

TEST(LimitV, FrozenDensityAndCdf) {
  EXPECT_NEAR(v_density(1.0, 0.5, 2.0), 1.0 / (4.0 * num::pi), 1e-15);
  EXPECT_NEAR(v_cdf(1.0, 0.5, 2.0), 0.5, 1e-13);
  EXPECT_EQ(v_density(1.0, 0.5, -1.0), 0.0);
  EXPECT_EQ(v_cdf(1.0, 0.5, 0.0), 0.0);
}

TEST(LimitV, DensityHasUnitMassAndMatchesCdf) {
  for (double alpha : {0.5, 1.0, 3.0})
    for (double beta : {0.2, 0.5, 0.8}) {
      auto f = [&](double v) { return v_density(alpha, beta, v); };
      boost::math::quadrature::tanh_sinh<double> ts;
      boost::math::quadrature::exp_sinh<double> es;
      double lo = ts.integrate(f, 0.0, 1.0), hi = es.integrate(f, 1.0, num::inf);
      EXPECT_NEAR(lo + hi, 1.0, 1e-8) << alpha << ' ' << beta;
      EXPECT_NEAR(lo, v_cdf(alpha, beta, 1.0), 1e-8) << alpha << ' ' << beta;
    }
}

TEST(LimitV, SamplerMatchesCdf) {
  Engine rng(SeedPlan(3).stream(0));
  std::vector<double> v(100000);
  for (auto& x : v) x = v_sampler(1.0, 0.5, rng);
  auto e = EmpiricalDistribution::from_samples(v);
  EXPECT_LE(ks_distance(e, [](double x) { return v_cdf(1.0, 0.5, x); }), 0.01);
  EXPECT_NEAR(e.quantile(0.5), 2.0, 0.05);
}

TEST(LimitV, Degeneracy) {
  EXPECT_EQ(LimitLawVSpec(1.0, 1.0).degeneracy(), Degeneracy::ZeroAlmostSurely);
  EXPECT_EQ(LimitLawVSpec(1.0, 0.0).degeneracy(), Degeneracy::InfiniteAlmostSurely);
  EXPECT_EQ(LimitLawVSpec(1.0, 0.3).degeneracy(), Degeneracy::None);
  EXPECT_THROW(v_density(1.0, 1.0, 1.0), DegenerateLawError);
  EXPECT_THROW(LimitLawVSpec(-1.0, 0.5), DomainError);
}

TEST(Arcsine, CdfAndDensity) {
  EXPECT_NEAR(arcsine_cdf(0.5, 0.5), 0.5, 1e-13);
  EXPECT_NEAR(arcsine_cdf(0.5, 0.25), 2 * std::asin(0.5) / num::pi, 1e-13);
  EXPECT_NEAR(arcsine_density(0.5, 0.5), 2.0 / num::pi, 1e-15);
}

TEST(MittagLeffler, MomentsAndSampler) {
  EXPECT_DOUBLE_EQ(ml_moment(1.0, 3), 1.0);
  EXPECT_NEAR(ml_moment(0.5, 1), 1.0 / std::tgamma(1.5), 1e-14);
  EXPECT_NEAR(ml_moment(0.0, 3), 6.0, 1e-12);
  Engine rng(SeedPlan(6).stream(0));
  std::vector<double> x(200000);
  for (auto& v : x) v = ml_sampler(0.5, rng);
  for (int n : {1, 2}) {
    auto m = moment_estimate(x, n);
    EXPECT_LE(std::abs(m.mean - ml_moment(0.5, n)), 4 * m.stderr_) << n;
  }
  EXPECT_THROW(ml_sampler(0.0, rng), DegenerateLawError);
  EXPECT_EQ(ml_sampler(1.0, rng), 1.0);
}

TEST(DynkinLamperti, FrozenDensity) {
  EXPECT_NEAR(dynkin_lamperti_density(0.5, 0.5, 0.5), 0.2250791, 1e-7);
  EXPECT_EQ(dynkin_lamperti_density(0.5, 1.5, 0.5), 0.0);
}

TEST(DynkinLamperti, CellMassMarginal) {
  // integrating the overshoot out of a full strip gives the arcsine law
  for (double beta : {0.3, 0.5, 0.7}) {
    double m = dynkin_lamperti_cell_mass(beta, 0.2, 0.6, 0.0, num::inf);
    EXPECT_NEAR(m, arcsine_cdf(beta, 0.6) - arcsine_cdf(beta, 0.2), 1e-8) << beta;
  }
  EXPECT_NEAR(dynkin_lamperti_cell_mass(0.5, 0.0, 1.0, 0.0, num::inf), 1.0, 1e-8);
}

TEST(DynkinLamperti, DegenerateEndpoints) {
  EXPECT_THROW(dynkin_lamperti_density(0.0, 0.5, 0.5), DegenerateLawError);
  try {
    dynkin_lamperti_density(1.0, 0.5, 0.5);
    FAIL();
  } catch (const DegenerateLawError& e) {
    EXPECT_EQ(e.flag, Degeneracy::DiracAtOrigin);
  }
}

TEST(Lil, GrowthAndConstant) {
  auto s = SubordinatorSpec::stable(0.5, 1.0);
  for (double t : {20.0, 1e3, 1e8}) {
    double ll = std::log(std::log(t));
    EXPECT_NEAR(growth_g(s, t), t * t / ll, 1e-9 * t * t / ll);
  }
  EXPECT_DOUBLE_EQ(lil_constant(0.5), 0.25);
  EXPECT_THROW(growth_g(s, 10.0), DomainError);
}

TEST(IntegralTest, StableVerdicts) {
  auto s = SubordinatorSpec::stable(0.5, 1.0);
  EXPECT_EQ(integral_test(s, PowerLogFunction{2.0}).verdict, Verdict::Converges);
  EXPECT_EQ(integral_test(s, PowerLogFunction{0.5}).verdict, Verdict::Diverges);
  auto r = integral_test(s, PowerLogFunction{1.0});
  EXPECT_EQ(r.pieces.size(), 60u);
  EXPECT_NE(r.verdict, Verdict::Converges);
  EXPECT_NEAR(r.min_increase_ratio, 0.5, 1e-12);
}

TEST(IntegralTest, RejectsNonIncreasing) {
  auto s = SubordinatorSpec::stable(0.5, 1.0);
  EXPECT_THROW(integral_test(s, [](double) { return 1.0; }), UsageError);
  EXPECT_THROW(integral_test(s, PowerLogFunction{1.0}, 2.0), UsageError);
}
