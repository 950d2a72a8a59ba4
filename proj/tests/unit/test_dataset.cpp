#include "sicdf/csv.hpp"
#include "sicdf/dataset.hpp"
#include "sicdf/rng.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <limits>
#include <sstream>

using namespace sicdf;

namespace {

std::string write_temp(const std::string& name, const std::string& text)
{
  const auto path = std::filesystem::temp_directory_path() / ("sicdf_test_" + name);
  std::ofstream(path) << text;
  return path.string();
}

std::string error_of(const std::function<void()>& fn)
{
  try {
    fn();
  } catch (const ValidationError& e) {
    return e.what();
  }
  return {};
}

} // namespace

TEST(Csv, ThreeRowFile)
{
  const auto path = write_temp("three.csv", "x1,x2,y\n1,2,3\n4,5,6\n7,8,9\n");
  const Dataset d = load_csv(path, {"x1", "x2"}, "y");
  EXPECT_EQ(d.size(), 3u);
  EXPECT_EQ(d.dim(), 2u);
  EXPECT_EQ(d.x(1, 0), 4.0);
  EXPECT_EQ(d.x(2, 1), 8.0);
  EXPECT_EQ(d.y(0), 3.0);
}

TEST(Csv, BlankCellNamesTheRow)
{
  const auto path = write_temp("blank.csv", "x1,y\n1,2\n3,\n5,6\n");
  const std::string msg = error_of([&] { load_csv(path, {"x1"}, "y"); });
  EXPECT_NE(msg.find("row 2"), std::string::npos) << msg;
  EXPECT_NE(msg.find("'y'"), std::string::npos) << msg;
  EXPECT_NE(msg.find("blank"), std::string::npos) << msg;
}

TEST(Csv, ColumnsFollowRequestedOrder)
{
  const auto path = write_temp("order.csv", "b,y,a\n1,0,10\n2,0,20\n");
  const Dataset d = load_csv(path, {"a", "b"}, "y");
  EXPECT_EQ(d.x(0, 0), 10.0);
  EXPECT_EQ(d.x(0, 1), 1.0);
  EXPECT_EQ(d.x(1, 0), 20.0);
}

TEST(Csv, Errors)
{
  EXPECT_THROW(load_csv("/nonexistent/file.csv", {"x"}, "y"), ValidationError);
  const auto path = write_temp("bad.csv", "x,y\n1,2\nfoo,3\n4,inf\n");
  EXPECT_NE(error_of([&] { load_csv(path, {"z"}, "y"); }).find("'z'"), std::string::npos);
  EXPECT_NE(error_of([&] { load_csv(path, {"x"}, "y"); }).find("foo"), std::string::npos);
  const auto path2 = write_temp("inf.csv", "x,y\n1,2\n4,inf\n");
  EXPECT_NE(error_of([&] { load_csv(path2, {"x"}, "y"); }).find("row 2"), std::string::npos);
}

TEST(Csv, RoundTripThroughText)
{
  Rng rng(5);
  std::vector<double> x(20), y(10);
  for (double& v : x) {
    v = rng.normal();
  }
  for (double& v : y) {
    v = rng.normal();
  }
  const Dataset d(x, y, 2);
  std::istringstream in(to_csv(d, {"a", "b"}, "y"));
  const Dataset back = dataset_from_table(read_csv_stream(in), {"a", "b"}, "y");
  EXPECT_EQ(back.covariates(), d.covariates());
  EXPECT_EQ(back.responses(), d.responses());
}

TEST(Dataset, RejectsNonFinite)
{
  const double nan = std::numeric_limits<double>::quiet_NaN();
  EXPECT_THROW(Dataset({1.0, nan}, {1.0, 2.0}, 1), ValidationError);
  EXPECT_THROW(Dataset({1.0, 2.0}, {1.0, INFINITY}, 1), ValidationError);
  EXPECT_THROW(Dataset({1.0, 2.0, 3.0}, {1.0, 2.0}, 1), ValidationError);
  EXPECT_THROW(Dataset({}, {}, 1), ValidationError);
  EXPECT_THROW(Dataset({1.0}, {1.0}, 0), ValidationError);
}

TEST(Embed, TwoLags)
{
  const std::vector<double> s{1, 2, 3, 4};
  const Dataset d = embed_time_series(s, 2);
  ASSERT_EQ(d.size(), 2u);
  EXPECT_EQ(d.x(0, 0), 2.0);
  EXPECT_EQ(d.x(0, 1), 1.0);
  EXPECT_EQ(d.y(0), 3.0);
  EXPECT_EQ(d.x(1, 0), 3.0);
  EXPECT_EQ(d.x(1, 1), 2.0);
  EXPECT_EQ(d.y(1), 4.0);
}

TEST(Embed, LengthAndTargetProperty)
{
  Rng rng(11);
  std::vector<double> s(176);
  for (double& v : s) {
    v = rng.normal();
  }
  const Dataset d = embed_time_series(s, 2);
  EXPECT_EQ(d.size(), 174u);
  for (std::size_t r = 0; r < d.size(); ++r) {
    EXPECT_EQ(d.y(r), s[r + 2]);
    EXPECT_EQ(d.x(r, 0), s[r + 1]);
    EXPECT_EQ(d.x(r, 1), s[r]);
  }
}

TEST(Embed, TooShort)
{
  const std::vector<double> s{5, 5};
  EXPECT_THROW(embed_time_series(s, 2), ValidationError);
}

TEST(Standardize, TwoPoints)
{
  const auto [d, p] = standardize(Dataset({-1.0, 1.0}, {0.0, 0.0}, 1));
  EXPECT_NEAR(d.x(0, 0), -std::sqrt(0.5), 1e-15);
  EXPECT_NEAR(d.x(1, 0), std::sqrt(0.5), 1e-15);
  EXPECT_EQ(p.mean[0], 0.0);
  EXPECT_NEAR(p.sd[0], std::sqrt(2.0), 1e-15);
}

TEST(Standardize, IdempotentOnStandardizedData)
{
  Rng rng(3);
  std::vector<double> x(300), y(100);
  for (double& v : x) {
    v = 3.0 + 2.0 * rng.normal();
  }
  const auto [once, p1] = standardize(Dataset(x, y, 3));
  const auto [twice, p2] = standardize(once);
  for (std::size_t j = 0; j < 3; ++j) {
    EXPECT_NEAR(p2.mean[j], 0.0, 1e-14);
    EXPECT_NEAR(p2.sd[j], 1.0, 1e-14);
  }
  for (std::size_t k = 0; k < x.size(); ++k) {
    EXPECT_NEAR(twice.covariates()[k], once.covariates()[k], 1e-13);
  }
}

TEST(Standardize, ConstantColumn)
{
  EXPECT_THROW(standardize(Dataset({2.0, 2.0, 2.0}, {1.0, 2.0, 3.0}, 1)), ValidationError);
}

TEST(Standardize, MomentsAndInverse)
{
  Rng rng(8);
  std::vector<double> x(500), y(250);
  for (double& v : x) {
    v = -4.0 + 7.0 * rng.uniform();
  }
  for (double& v : y) {
    v = rng.normal();
  }
  const Dataset raw(x, y, 2);
  const auto [s, p] = standardize(raw);
  for (std::size_t j = 0; j < 2; ++j) {
    double mean = 0.0, ss = 0.0;
    for (std::size_t i = 0; i < s.size(); ++i) {
      mean += s.x(i, j);
    }
    mean /= static_cast<double>(s.size());
    for (std::size_t i = 0; i < s.size(); ++i) {
      ss += (s.x(i, j) - mean) * (s.x(i, j) - mean);
    }
    EXPECT_NEAR(mean, 0.0, 1e-14);
    EXPECT_NEAR(ss / static_cast<double>(s.size() - 1), 1.0, 1e-13);
  }
  EXPECT_EQ(s.responses(), raw.responses());
  const Dataset back = p.invert(s);
  for (std::size_t k = 0; k < x.size(); ++k) {
    EXPECT_LE(std::abs(back.covariates()[k] - x[k]), 1e-12 * std::max(1.0, std::abs(x[k])));
  }
}
