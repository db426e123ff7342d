#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "pssmp/pssmp.hpp"

using namespace pssmp;

namespace {
double exp_cdf(double x) { return x <= 0 ? 0.0 : -std::expm1(-x); }
}  // namespace

TEST(Ks, ExactQuantilesAreClose) {
  const std::size_t n = 999;
  std::vector<double> xs;
  for (std::size_t k = 1; k <= n; ++k) xs.push_back(-std::log1p(-static_cast<double>(k) / (n + 1)));
  double d = ks_distance(EmpiricalDistribution::from_samples(xs), exp_cdf);
  EXPECT_LE(d, 1.0 / (n + 1) + 1e-12);
}

TEST(Ks, OwnSamplerBelowCriticalValue) {
  Engine rng(SeedPlan(101).stream(0));
  std::vector<double> xs(10000);
  for (auto& x : xs) x = standard_exponential(rng);
  double d = ks_distance(EmpiricalDistribution::from_samples(xs), exp_cdf);
  EXPECT_NEAR(ks_critical_value(10000), 0.0163, 2e-4);
  EXPECT_LT(d, 0.0193);
}

TEST(Ks, ConstantSampleIsFar) {
  std::vector<double> xs(50, std::log(2.0));
  EXPECT_GE(ks_distance(EmpiricalDistribution::from_samples(xs), exp_cdf), 0.5 - 1e-12);
}

TEST(Ks, EmptySampleIsUsageError) {
  EXPECT_THROW(EmpiricalDistribution::from_samples({}), UsageError);
}

TEST(Ks, WeightedWithEqualWeightsMatchesPlain) {
  Engine rng(SeedPlan(5).stream(1));
  std::vector<double> xs(2000), ws(2000, 3.5);
  for (auto& x : xs) x = standard_exponential(rng);
  auto plain = EmpiricalDistribution::from_samples(xs);
  auto weighted = EmpiricalDistribution::weighted(xs, ws);
  EXPECT_NEAR(ks_distance(plain, exp_cdf), ks_distance(weighted, exp_cdf), 1e-12);
  double sum = 0;
  for (double w : weighted.weights()) sum += w;
  EXPECT_NEAR(sum, 1.0, 1e-12);
  EXPECT_TRUE(std::is_sorted(weighted.atoms().begin(), weighted.atoms().end()));
}

TEST(Ks, WeightedCdfUsesCumulativeWeights) {
  auto e = EmpiricalDistribution::weighted({2.0, 1.0, 3.0}, {0.5, 0.25, 0.25});
  EXPECT_DOUBLE_EQ(e.cdf(0.5), 0.0);
  EXPECT_DOUBLE_EQ(e.cdf(1.0), 0.25);
  EXPECT_DOUBLE_EQ(e.cdf(2.5), 0.75);
  EXPECT_DOUBLE_EQ(e.cdf(3.0), 1.0);
  EXPECT_DOUBLE_EQ(e.quantile(0.5), 2.0);
}

TEST(Ks, TwoSampleIdenticalIsZero) {
  auto a = EmpiricalDistribution::from_samples({1, 2, 3});
  EXPECT_DOUBLE_EQ(ks_two_sample(a, a), 0.0);
  auto b = EmpiricalDistribution::from_samples({4, 5, 6});
  EXPECT_DOUBLE_EQ(ks_two_sample(a, b), 1.0);
}

TEST(Moments, ConstantSample) {
  auto m = moment_estimate(std::vector<double>(100, 1.5), 3);
  EXPECT_DOUBLE_EQ(m.mean, 1.5 * 1.5 * 1.5);
  EXPECT_EQ(m.stderr_, 0.0);
  EXPECT_TRUE(m.degenerate);
}

TEST(Moments, ExponentialSecondMoment) {
  Engine rng(SeedPlan(17).stream(0));
  std::vector<double> xs(100000);
  for (auto& x : xs) x = standard_exponential(rng);
  auto m = moment_estimate(xs, 2);
  EXPECT_FALSE(m.degenerate);
  EXPECT_LE(std::abs(m.mean - 2.0), 4 * m.stderr_);
}

TEST(Chi2, DynkinLampertiSelfConsistency) {
  const double beta = 0.5;
  Engine rng(SeedPlan(23).stream(0));
  std::vector<std::pair<double, double>> s(10000);
  for (auto& p : s) p = dynkin_lamperti_sampler(beta, rng);
  Bins2D b;
  for (int k = 0; k <= 6; ++k) {
    double q = k / 6.0;
    b.x_edges.push_back(q);
    b.y_edges.push_back(k == 6 ? num::inf : q / (1.0 - q));
  }
  auto r = binned_chi2(s, b, [&](double u0, double u1, double w0, double w1) {
    return dynkin_lamperti_cell_mass(beta, u0, u1, w0, w1);
  });
  EXPECT_GT(r.dof, 10);
  EXPECT_LE(r.statistic, r.critical_99);
}

TEST(Chi2, MergesSparseCells) {
  std::vector<std::pair<double, double>> s(20, {0.1, 0.1});
  Bins2D b{{0.0, 0.5, 1.0}, {0.0, 0.5, 1.0}};
  auto r = binned_chi2(s, b, [](double, double, double, double) { return 0.25; });
  EXPECT_EQ(r.groups, 4);
  EXPECT_NEAR(r.statistic, 3 * 5.0 + (20 - 5.0) * (20 - 5.0) / 5.0, 1e-12);
}

TEST(SeedPlan, StreamsDependOnlyOnIndex) {
  SeedPlan p(42);
  Engine a = p.stream(7), b = p.stream(7), c = p.stream(8), d = p.stream(7, 1);
  EXPECT_EQ(a(), b());
  EXPECT_NE(p.stream(7)(), c());
  EXPECT_NE(p.stream(7)(), d());
  EXPECT_NE(SeedPlan(43).stream(7)(), p.stream(7)());
}

TEST(SeedPlan, ParallelMapIsIndependentOfJobs) {
  SeedPlan p(9);
  auto f = [&](std::size_t i) {
    Engine r = p.stream(i);
    return uniform_open(r);
  };
  auto a = parallel_map<double>(100, 1, f);
  auto b = parallel_map<double>(100, 4, f);
  EXPECT_EQ(a, b);
}

TEST(SeedPlan, ParallelMapRethrowsLowestIndex) {
  try {
    parallel_map<int>(50, 3, [](std::size_t i) -> int {
      if (i == 11 || i == 30) throw std::runtime_error(std::to_string(i));
      return 0;
    });
    FAIL();
  } catch (const std::runtime_error& e) {
    EXPECT_STREQ(e.what(), "11");
  }
}

TEST(Numerics, IncompleteBetaAgainstClosedForms) {
  // I_x(1/2, 1/2) = 2 asin(sqrt x)/pi
  for (double x : {0.01, 0.2, 0.5, 0.9, 0.999})
    EXPECT_NEAR(num::ibeta(0.5, 0.5, x), 2 * std::asin(std::sqrt(x)) / num::pi, 1e-13);
  // I_x(a, 1) = x^a
  EXPECT_NEAR(num::ibeta(0.3, 1.0, 0.4), std::pow(0.4, 0.3), 1e-13);
  EXPECT_NEAR(num::ibeta(2.0, 3.0, 0.25), 0.26171875, 1e-13);
}

TEST(Numerics, KolmogorovQuantileRoundTrip) {
  EXPECT_NEAR(num::kolmogorov_sf(num::kolmogorov_quantile(0.01)), 0.01, 1e-10);
  EXPECT_NEAR(num::kolmogorov_quantile(0.01), 1.6276, 1e-4);
}
