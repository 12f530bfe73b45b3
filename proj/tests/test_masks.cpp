#include <gtest/gtest.h>

#include <filesystem>

#include "mrca/formation.hpp"
#include "mrca/masks.hpp"

using namespace mrca;

TEST(Bayer, EveryTwoByTwoBlockIsRggb)
{
  const auto h = bayer_mask(6, 8);
  EXPECT_EQ(h.band_roles(), (std::vector<std::string>{"R", "G", "B"}));
  for (std::size_t bi = 0; bi < 6; bi += 2)
    for (std::size_t bj = 0; bj < 8; bj += 2) {
      std::array<int, 3> count{};
      for (std::size_t i = bi; i < bi + 2; ++i)
        for (std::size_t j = bj; j < bj + 2; ++j)
          for (std::size_t k = 0; k < 3; ++k) count[k] += h(i, j, k) == 1.0;
      EXPECT_EQ(count, (std::array<int, 3>{1, 2, 1}));
      EXPECT_EQ(h(bi, bj, 0), 1.0);      // R top-left
      EXPECT_EQ(h(bi + 1, bj + 1, 2), 1.0);
      EXPECT_EQ(h(bi, bj + 1, 1), 1.0);   // greens on the anti-diagonal
      EXPECT_EQ(h(bi + 1, bj, 1), 1.0);
    }
}

TEST(Bayer, ExactlyOneBandPerPixel)
{
  const auto h = bayer_mask(5, 7);  // odd sizes allowed
  for (std::size_t j = 0; j < 7; ++j)
    for (std::size_t i = 0; i < 5; ++i) EXPECT_EQ(h(i, j, 0) + h(i, j, 1) + h(i, j, 2), 1.0);
  EXPECT_TRUE(h.binary());
}

TEST(Bayer, PartitionOfUnityReproducesScalarImage)
{
  Rng rng(1);
  const std::size_t rows = 4, cols = 6;
  const auto plane = rng.normal_vector(rows * cols);
  std::vector<double> cube;
  for (int k = 0; k < 3; ++k) cube.insert(cube.end(), plane.begin(), plane.end());
  const auto op = compose(sum_channels(Shape{rows, cols, 3, 1}), mask_apply(bayer_mask(rows, cols)));
  EXPECT_EQ(op.apply(cube), plane);
}

TEST(PeriodicMask, AllPanTile)
{
  const PeriodicTile t{2, 3, 2, {-1, -1, -1, -1, -1, -1}};
  const auto m = periodic_mask(t, 4, 6);
  EXPECT_EQ(m.lri.max_weight(), 0.0);
  for (double w : m.pan.weights()) EXPECT_EQ(w, 1.0);
}

TEST(PeriodicMask, Bt4PanCounts)
{
  const auto t = bt4pan_tile();
  EXPECT_EQ(t.height, 4u);
  EXPECT_EQ(t.width, 4u);
  const auto m = periodic_mask(t, 4, 4);
  EXPECT_EQ(m.pan.band_support()[0], 8u);
  EXPECT_EQ(m.lri.band_support(), (std::vector<std::size_t>{2, 2, 2, 2}));
  for (std::size_t j = 0; j < 4; ++j)
    for (std::size_t i = 0; i < 4; ++i) EXPECT_EQ(m.pan(i, j, 0), (i + j) % 2 == 0 ? 1.0 : 0.0);
  // whole-image coverage on a larger grid
  const auto big = periodic_mask(t, 16, 12);
  EXPECT_EQ(big.pan.band_support()[0], 16u * 12u / 2u);
}

TEST(PeriodicMask, Bt8PanCounts)
{
  const auto m = periodic_mask(bt8pan_tile(), 4, 4);
  EXPECT_EQ(m.pan.band_support()[0], 8u);
  EXPECT_EQ(m.lri.band_support(), std::vector<std::size_t>(8, 1));
}

TEST(PeriodicMask, SupportsAreDisjointAndCover)
{
  for (const char* name : {"bayer", "msfa4", "bt4pan", "bt8pan"}) {
    const auto m = periodic_mask(builtin_tile(name), 9, 10);
    const auto lri = m.lri.pixel_support();
    const auto pan = m.pan.pixel_support();
    for (std::size_t p = 0; p < lri.size(); ++p) {
      EXPECT_FALSE(lri[p] && pan[p]) << name;
      EXPECT_TRUE(lri[p] || pan[p]) << name;
    }
    EXPECT_TRUE(builtin_tile(name).missing_channels().empty()) << name;
  }
}

TEST(PeriodicMask, BinaryMaskHasUnitBound)
{
  const auto m = periodic_mask(bt4pan_tile(), 8, 8);
  EXPECT_EQ(mask_apply(m.lri).norm_bound(), 1.0);
  EXPECT_EQ(mask_apply(m.pan).norm_bound(), 1.0);
}

TEST(PeriodicTile, ValidationAndMissingChannels)
{
  EXPECT_THROW((PeriodicTile{1, 2, 2, {0, 2}}.validate()), std::invalid_argument);
  EXPECT_THROW((PeriodicTile{1, 2, 2, {0, -2}}.validate()), std::invalid_argument);
  EXPECT_THROW((PeriodicTile{1, 2, 2, {0}}.validate()), std::invalid_argument);
  const PeriodicTile t{1, 2, 3, {0, -1}};
  EXPECT_EQ(t.missing_channels(), (std::vector<std::size_t>{1, 2}));
  EXPECT_TRUE(t.has_pan());
  EXPECT_THROW(builtin_tile("nope"), std::invalid_argument);
}

TEST(MaskFile, RoundTripOnBuiltins)
{
  const auto dir = std::filesystem::temp_directory_path() / "mrca_test_masks";
  std::filesystem::create_directories(dir);
  for (const char* name : {"bayer", "msfa4", "bt4pan", "bt8pan"}) {
    const auto t = builtin_tile(name);
    EXPECT_EQ(parse_tile_string(format_tile(t)), t) << name;
    const auto path = (dir / (std::string(name) + ".txt")).string();
    write_mask_file(path, t);
    EXPECT_EQ(parse_mask_file(path), t) << name;
    EXPECT_EQ(resolve_tile(path), t) << name;
  }
}

TEST(MaskFile, TrivialSingleChannel)
{
  const auto t = parse_tile_string("1 1 1\n0\n");
  EXPECT_EQ(t, (PeriodicTile{1, 1, 1, {0}}));
  const auto m = periodic_mask(t, 3, 3);
  for (double w : m.lri.weights()) EXPECT_EQ(w, 1.0);
}

TEST(MaskFile, CommentsAreIgnored)
{
  const auto t = parse_tile_string("# pan + 2 channels\n1 3 2   # header\n-1 0 1\n\n");
  EXPECT_EQ(t.cells, (std::vector<int>{-1, 0, 1}));
}

TEST(MaskFile, MalformedInputs)
{
  EXPECT_THROW(parse_tile_string(""), std::invalid_argument);
  EXPECT_THROW(parse_tile_string("2 2\n0 0\n0 0\n"), std::invalid_argument);
  EXPECT_THROW(parse_tile_string("2 2 1\n0 0\n0\n"), std::invalid_argument);  // row length
  EXPECT_THROW(parse_tile_string("2 2 1\n0 0\n"), std::invalid_argument);     // missing row
  EXPECT_THROW(parse_tile_string("1 2 1\n0 x\n"), std::invalid_argument);
  EXPECT_THROW(parse_tile_string("1 2 1\n0 1\n"), std::invalid_argument);     // out of range
  EXPECT_THROW(parse_tile_string("1 1 1\n0\n0\n"), std::invalid_argument);    // trailing
  EXPECT_THROW(parse_tile_string("0 1 1\n"), std::invalid_argument);
  EXPECT_THROW(parse_mask_file("/nonexistent/mask.txt"), std::runtime_error);
}

TEST(Mask, RejectsNegativeAndMismatchedWeights)
{
  EXPECT_THROW(Mask(1, 1, 1, {-1.0}), std::invalid_argument);
  EXPECT_THROW(Mask(1, 1, 2, {1.0}), std::invalid_argument);
  EXPECT_THROW(Mask(1, 1, 1, {NAN}), std::invalid_argument);
}
