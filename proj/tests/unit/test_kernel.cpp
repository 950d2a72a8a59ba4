#include "sicdf/direction.hpp"
#include "sicdf/kernel.hpp"
#include "sicdf/rng.hpp"

#include <gtest/gtest.h>

#include <cmath>

using namespace sicdf;

TEST(Epanechnikov, Values)
{
  EXPECT_EQ(epanechnikov(0.0), 0.75);
  EXPECT_EQ(epanechnikov(1.0), 0.0);
  EXPECT_EQ(epanechnikov(-1.0), 0.0);
  EXPECT_DOUBLE_EQ(epanechnikov(0.5), 0.5625);
  EXPECT_EQ(epanechnikov(3.0), 0.0);
  EXPECT_EQ(Epanechnikov::support_radius, 1.0);
}

TEST(Epanechnikov, Symmetric)
{
  Rng rng(1);
  for (int k = 0; k < 1000; ++k) {
    const double u = 4.0 * rng.uniform() - 2.0;
    EXPECT_EQ(epanechnikov(u), epanechnikov(-u));
  }
}

TEST(Epanechnikov, UnitMass)
{
  const int m = 200000;
  double area = 0.0;
  for (int k = 0; k < m; ++k) {
    const double a = -1.0 + 2.0 * k / m, b = -1.0 + 2.0 * (k + 1) / m;
    area += 0.5 * (b - a) * (epanechnikov(a) + epanechnikov(b));
  }
  EXPECT_NEAR(area, 1.0, 1e-6);
}

TEST(Epanechnikov, MonotoneOnUnitInterval)
{
  double prev = epanechnikov(0.0);
  for (int k = 1; k <= 1000; ++k) {
    const double v = epanechnikov(k / 1000.0);
    EXPECT_LE(v, prev);
    prev = v;
  }
}

TEST(Epanechnikov, ByName)
{
  EXPECT_EQ(kernel_from_name("epanechnikov")(0.0), 0.75);
  EXPECT_THROW(kernel_from_name("gaussian"), ValidationError);
}

TEST(Canonicalize, Examples)
{
  const Direction a = Direction::canonicalize(std::vector<double>{0.0, -2.0});
  EXPECT_EQ(a[0], 0.0);
  EXPECT_EQ(a[1], 1.0);

  const Direction b = Direction::canonicalize(std::vector<double>{-1.0, 2.0, 0.0, -3.0});
  const double r = std::sqrt(14.0);
  EXPECT_NEAR(b[0], 1.0 / r, 1e-15);
  EXPECT_NEAR(b[1], -2.0 / r, 1e-15);
  EXPECT_EQ(b[2], 0.0);
  EXPECT_NEAR(b[3], 3.0 / r, 1e-15);

  EXPECT_THROW(Direction::canonicalize(std::vector<double>{1e-15, 1e-15}), NumericalError);
}

TEST(Canonicalize, IdempotentUnitAndSigned)
{
  Rng rng(4);
  for (int k = 0; k < 200; ++k) {
    std::vector<double> v(5);
    for (double& c : v) {
      c = rng.normal();
    }
    if (k % 3 == 0) {
      v[0] = 0.0;
    }
    const Direction d = Direction::canonicalize(v);
    double ss = 0.0;
    for (double c : d.components()) {
      ss += c * c;
    }
    EXPECT_NEAR(ss, 1.0, 1e-12);
    std::size_t first = 0;
    while (std::abs(d[first]) <= 1e-12) {
      ++first;
    }
    EXPECT_GT(d[first], 0.0);
    EXPECT_TRUE(Direction::canonicalize(d.components()) == d);
    std::vector<double> neg(v);
    for (double& c : neg) {
      c = -c;
    }
    EXPECT_TRUE(Direction::canonicalize(neg) == d);
  }
}
