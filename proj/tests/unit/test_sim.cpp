#include "sicdf/fit.hpp"
#include "sicdf/simulation.hpp"

#include <gtest/gtest.h>

#include <cmath>

using namespace sicdf;

namespace {

double mean(const std::vector<double>& v)
{
  double s = 0.0;
  for (double x : v) {
    s += x;
  }
  return s / static_cast<double>(v.size());
}

double variance(const std::vector<double>& v)
{
  const double m = mean(v);
  double s = 0.0;
  for (double x : v) {
    s += (x - m) * (x - m);
  }
  return s / static_cast<double>(v.size() - 1);
}

} // namespace

TEST(Generators, TrueDirections)
{
  const Direction a = true_direction(Model::example1);
  const double r14 = std::sqrt(14.0);
  EXPECT_NEAR(a[0], 1.0 / r14, 1e-15);
  EXPECT_NEAR(a[1], 2.0 / r14, 1e-15);
  EXPECT_EQ(a[2], 0.0);
  EXPECT_NEAR(a[3], 3.0 / r14, 1e-15);
  const Direction b = true_direction(Model::example2);
  for (std::size_t j = 0; j < 4; ++j) {
    EXPECT_NEAR(b[j], 0.5, 1e-15);
  }
}

TEST(Generators, Example1Moments)
{
  Rng rng(1);
  const GeneratedData g = gen_example1(100000, rng);
  // Var(theta^T X) = 1 and Var(eps) = 1
  EXPECT_NEAR(variance(g.data.responses()), 2.0, 0.05);
  EXPECT_NEAR(mean(g.data.responses()), 0.0, 0.02);
}

TEST(Generators, Example2Moments)
{
  Rng rng(2);
  const GeneratedData g = gen_example2(100000, rng);
  // Var(sin X) = (1 - e^-2) / 2 for X ~ N(0, 1)
  const double expected = (1.0 - std::exp(-2.0)) / 2.0 + 1.0;
  EXPECT_NEAR(variance(g.data.responses()), expected, 0.05);
  EXPECT_NEAR(mean(g.data.responses()), 0.0, 0.02);
}

TEST(Generators, NoiselessHook)
{
  Rng a(3), b(3);
  const GeneratedData with = gen_example2(500, a, true);
  const GeneratedData without = gen_example2(500, b, false);
  EXPECT_EQ(with.data.covariates(), without.data.covariates());
  for (std::size_t i = 0; i < 500; ++i) {
    const auto x = without.data.row(i);
    const double m = 0.5 * (std::sin(x[0]) + std::sin(x[1]) + std::sin(x[2]) + std::sin(x[3]));
    EXPECT_EQ(without.data.y(i), m);
    EXPECT_LE(std::abs(m), 2.0);
  }
  Rng c(4);
  const GeneratedData lin = gen_example1(50, c, false);
  for (std::size_t i = 0; i < 50; ++i) {
    EXPECT_NEAR(lin.data.y(i), dot(lin.theta.components(), lin.data.row(i)), 1e-14);
  }
}

TEST(Truth, Example1IsNormalShift)
{
  const Direction th = true_direction(Model::example1);
  EXPECT_NEAR(true_cdf_example1(th, 0.0, 1.959964), 0.975, 1e-6);
  EXPECT_DOUBLE_EQ(true_cdf_example1(th, 0.3, 0.3), 0.5);
  EXPECT_NEAR(true_cdf_example1(th, 1.0, 0.0), 1.0 - true_cdf_example1(th, -1.0, 0.0), 1e-15);
}

TEST(Truth, Example2SymmetricAtOrigin)
{
  // m(X) given theta^T X = 0 is symmetric about 0, so F(0 | 0) = 1/2
  Rng rng(5);
  const McEstimate e = true_cdf_example2(true_direction(Model::example2), 0.0, 0.0, 200000, rng);
  EXPECT_NEAR(e.value, 0.5, 4.0 * e.std_error + 1e-3);
}

TEST(Truth, Example2MonteCarloSelfConsistent)
{
  const Direction th = true_direction(Model::example2);
  Rng r1(6), r2(7);
  for (double y : {-1.0, 0.5, 1.5}) {
    const McEstimate a = true_cdf_example2(th, 0.7, y, 20000, r1);
    const McEstimate b = true_cdf_example2(th, 0.7, y, 20000, r2);
    EXPECT_LE(std::abs(a.value - b.value), 3.0 * std::hypot(a.std_error, b.std_error));
  }
  EXPECT_THROW(true_cdf_example2(th, 0.0, 0.0, 9999, r1), ValidationError);
  EXPECT_THROW(model_truth(Model::example2, 100), ValidationError);
}

TEST(Truth, Example2ConditionalMeansMatchDirectConditioning)
{
  // X = z theta + (I - theta theta^T) xi has theta^T X = z exactly
  const Direction th = true_direction(Model::example2);
  Rng rng(8);
  const std::vector<double> m = example2_conditional_means(th, 1.2, 20000, rng);
  // each coordinate given the index is N(z/2, 3/4), and E sin(N(mu, s2)) =
  // sin(mu) e^{-s2/2}, so E m = 2 sin(z/2) e^{-3/8}
  EXPECT_NEAR(mean(m), 2.0 * std::sin(0.6) * std::exp(-0.375), 0.01);
}

TEST(Truth, ModelTruthIsOrderIndependent)
{
  const TruthFunction a = model_truth(Model::example2, 10000, 1);
  const TruthFunction b = model_truth(Model::example2, 10000, 1);
  const double first = a(0.5, 0.2);
  a(-0.3, 0.1);
  EXPECT_EQ(a(0.5, 0.2), first);
  b(1.0, 0.0);
  EXPECT_EQ(b(0.5, 0.2), first);
}

TEST(AvgAbsError, SelfComparisonIsZeroAndOnePointGrid)
{
  Rng rng(9);
  const GeneratedData g = gen_example1(200, rng);
  const std::vector<double> idx = g.data.project(g.theta.components());
  const TruthFunction self = [&](double z, double y) {
    const LocalLinearWeights lw = moment_sums(idx, z, 0.5, Epanechnikov{});
    return detail::weighted_cdf(lw, g.data.responses(), y).value;
  };
  EXPECT_NEAR(avg_abs_error(g.data, g.theta, 0.5, self, {-1.0, 1.0}, {-1.0, 1.0}), 0.0, 1e-15);
  const TruthFunction truth = model_truth(Model::example1);
  const double one = avg_abs_error(g.data, g.theta, 0.5, truth, {0.0, 0.0}, {0.0, 0.0});
  EXPECT_NEAR(one, std::abs(self(0.0, 0.0) - 0.5), 1e-15);
  EXPECT_EQ(regular_grid({-2.0, 2.0}).size(), 81u);
}

TEST(AvgAbsError, TrueDirectionBeatsWrongOnes)
{
  Rng rng(10);
  const GeneratedData g = gen_example1(400, rng);
  const TruthFunction truth = model_truth(Model::example1);
  const auto [zr, yr] = error_ranges(g.data, g.theta);
  const double good = avg_abs_error(g.data, g.theta, 0.5, truth, zr, yr);
  // orthogonal to theta: (3, 0, 0, -1) / sqrt(10)
  const Direction orth = Direction::canonicalize(std::vector<double>{3.0, 0.0, 0.0, -1.0});
  EXPECT_NEAR(dot(orth.components(), g.theta.components()), 0.0, 1e-15);
  EXPECT_LT(good, avg_abs_error(g.data, orth, 0.5, truth, zr, yr));
  Rng dir(11);
  for (int k = 0; k < 5; ++k) {
    std::vector<double> v(4);
    for (double& c : v) {
      c = dir.normal();
    }
    const Direction r = Direction::canonicalize(v);
    if (std::abs(dot(r.components(), g.theta.components())) < 0.9) {
      EXPECT_LT(good, avg_abs_error(g.data, r, 0.5, truth, zr, yr));
    }
  }
}

TEST(Study, SingleReplicationIsDeterministic)
{
  StudyConfig c;
  c.n = 60;
  c.replications = 1;
  c.h_replicates = 2;
  c.H_replicates = 2;
  c.grid_size = 4;
  c.grid_start = 0.3;
  c.options.restarts = 0;
  c.spheres.points = 3;
  const StudyReport a = run_study(c);
  const StudyReport b = run_study(c);
  ASSERT_EQ(a.records.size(), 1u);
  ASSERT_TRUE(a.records[0].ok) << a.records[0].error;
  EXPECT_EQ(a.records[0].h_selected, b.records[0].h_selected);
  EXPECT_EQ(a.records[0].H, b.records[0].H);
  EXPECT_EQ(a.records[0].error_estimated, b.records[0].error_estimated);
  EXPECT_EQ(a.records[0].primary().theta_hat.vector(), b.records[0].primary().theta_hat.vector());
  const double ip = a.records[0].primary().inner_product;
  EXPECT_LE(std::abs(ip), 1.0 + 1e-12);
}

TEST(Study, RejectsBadMultipliers)
{
  StudyConfig c;
  c.bandwidth.multipliers = {2.0};
  EXPECT_THROW(run_study(c), ValidationError);
  c.bandwidth.multipliers = {};
  EXPECT_THROW(run_study(c), ValidationError);
}
