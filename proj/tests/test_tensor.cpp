#include <gtest/gtest.h>

#include "mrca/keyvalue.hpp"
#include "mrca/random.hpp"
#include "mrca/tensor.hpp"

using namespace mrca;

TEST(Shape, ColumnMajorBandSequentialIndex)
{
  const Shape s{3, 4, 2, 2};
  EXPECT_EQ(s.index(0, 0, 0, 0), 0u);
  EXPECT_EQ(s.index(1, 0, 0, 0), 1u);
  EXPECT_EQ(s.index(0, 1, 0, 0), 3u);
  EXPECT_EQ(s.index(0, 0, 1, 0), 12u);
  EXPECT_EQ(s.index(0, 0, 0, 1), 24u);
  EXPECT_EQ(s.index(2, 3, 1, 1), s.size() - 1);
}

TEST(DataCube, RejectsInvalidConstruction)
{
  EXPECT_THROW(DataCube(0, 1, 1, {}), std::invalid_argument);
  EXPECT_THROW(DataCube(1, 1, 2, {1.0}), std::invalid_argument);
  EXPECT_THROW(DataCube(1, 1, 1, {1.0}, 0.0), std::invalid_argument);
  EXPECT_THROW(DataCube(1, 1, 1, {NAN}), std::invalid_argument);
  EXPECT_THROW(DataCube(1, 1, 1, {INFINITY}), std::invalid_argument);
  EXPECT_THROW(DataCube(1, 1, 2, {1.0, 2.0}, 1.0, {"a"}), std::invalid_argument);
}

TEST(Matr, SinglePixelIsOneRow)
{
  const DataCube x(1, 1, 3, {1.0, 2.0, 3.0});
  const auto m = matr(x);
  EXPECT_EQ(m.pixels, 1u);
  EXPECT_EQ(m.bands, 3u);
  EXPECT_EQ(m.at(0, 0), 1.0);
  EXPECT_EQ(m.at(0, 1), 2.0);
  EXPECT_EQ(m.at(0, 2), 3.0);
}

TEST(Matr, TwoByTwoIsColumnMajor)
{
  // x(0,0)=a, x(1,0)=b, x(0,1)=c, x(1,1)=d
  const DataCube x(2, 2, 1, {10.0, 20.0, 30.0, 40.0});
  EXPECT_EQ(x(1, 0, 0), 20.0);
  EXPECT_EQ(x(0, 1, 0), 30.0);
  const auto m = matr(x);
  ASSERT_EQ(m.pixels, 4u);
  EXPECT_EQ(m.at(0, 0), x(0, 0, 0));
  EXPECT_EQ(m.at(1, 0), x(1, 0, 0));
  EXPECT_EQ(m.at(2, 0), x(0, 1, 0));
  EXPECT_EQ(m.at(3, 0), x(1, 1, 0));
}

TEST(Matr, RoundTripIsBitwiseIdentity)
{
  Rng rng(5);
  for (int t = 0; t < 20; ++t) {
    const DataCube x(5, 7, 4, rng.normal_vector(140), 2.5);
    const auto y = unmatr(matr(x), 5, 7, 2.5);
    EXPECT_EQ(x, y);
  }
  EXPECT_THROW(unmatr(LexMatrix{6, 1, std::vector<double>(6)}, 2, 2), std::invalid_argument);
}

TEST(FrobeniusNorm, ClosedForms)
{
  EXPECT_EQ(frobenius_norm(DataCube::zeros(3, 3, 2)), 0.0);
  EXPECT_EQ(frobenius_norm(DataCube(1, 1, 1, {3.0})), 3.0);
  EXPECT_DOUBLE_EQ(frobenius_norm(DataCube(2, 1, 2, {1.0, 2.0, 2.0, 4.0})), 5.0);
}

TEST(FrobeniusNorm, Homogeneous)
{
  Rng rng(9);
  for (int t = 0; t < 20; ++t) {
    auto v = rng.normal_vector(24);
    const double alpha = rng.uniform(-3.0, 3.0);
    const DataCube x(2, 3, 4, v);
    for (auto& e : v) e *= alpha;
    EXPECT_NEAR(frobenius_norm(DataCube(2, 3, 4, v)), std::abs(alpha) * frobenius_norm(x), 1e-12);
  }
}

TEST(DataCube, BandViewAndWithSamples)
{
  const DataCube x(2, 1, 2, {1.0, 2.0, 3.0, 4.0}, 4.0, {"a", "b"});
  const auto b1 = x.band(1);
  EXPECT_EQ(b1[0], 3.0);
  EXPECT_EQ(b1[1], 4.0);
  const auto y = x.with_samples({0.0, 0.0, 0.0, 0.0});
  EXPECT_EQ(y.band_labels(), x.band_labels());
  EXPECT_EQ(y.dynamic_range(), 4.0);
}

TEST(Domain, StackedOffsets)
{
  const Domain d = Domain::concat(Shape{2, 2, 1, 1}, Shape{1, 1, 3, 1});
  EXPECT_EQ(d.size(), 7u);
  EXPECT_EQ(d.offset(1), 4u);
  EXPECT_FALSE(d.single());
  EXPECT_THROW((void)d.shape(), std::logic_error);
}

TEST(FlatAcquisition, SizeContract)
{
  EXPECT_NO_THROW(FlatAcquisition(2, 3, std::vector<double>(6)));
  EXPECT_THROW(FlatAcquisition(2, 3, std::vector<double>(5)), std::invalid_argument);
}

TEST(Rng, FixedSequenceAndMoments)
{
  Rng a(42), b(42);
  for (int i = 0; i < 100; ++i) EXPECT_EQ(a.normal(), b.normal());
  Rng r(1);
  double s = 0.0, s2 = 0.0;
  const int n = 200000;
  for (int i = 0; i < n; ++i) {
    const double u = r.uniform();
    ASSERT_GE(u, 0.0);
    ASSERT_LT(u, 1.0);
    s += u;
    s2 += u * u;
  }
  EXPECT_NEAR(s / n, 0.5, 5e-3);
  EXPECT_NEAR(s2 / n - (s / n) * (s / n), 1.0 / 12.0, 2e-3);
}

TEST(KeyValues, ParseAndErrors)
{
  const auto kv = KeyValues::parse_string("# comment\n a = 1 \nb=hello world # tail\n\n");
  EXPECT_EQ(kv.get("a"), "1");
  EXPECT_EQ(kv.get("b"), "hello world");
  EXPECT_EQ(kv.get_uint("a"), 1u);
  EXPECT_THROW((void)kv.get("c"), std::invalid_argument);
  EXPECT_THROW((void)kv.get_double("b"), std::invalid_argument);
  EXPECT_THROW(KeyValues::parse_string("novalue\n"), std::invalid_argument);
  EXPECT_THROW(KeyValues::parse_string("a=1\na=2\n"), std::invalid_argument);
}

TEST(FormatDouble, RoundTrips)
{
  Rng rng(3);
  for (int i = 0; i < 1000; ++i) {
    const double v = rng.normal() * std::pow(10.0, rng.uniform(-8.0, 8.0));
    EXPECT_EQ(std::stod(format_double(v)), v);
  }
  EXPECT_EQ(format_double(0.001), "0.001");
  EXPECT_EQ(format_double(1.4), "1.4");
}
