#include <gtest/gtest.h>

#include <filesystem>

#include "mrca/presets.hpp"
#include "support.hpp"

using namespace mrca;

namespace {

FormationPreset small(const std::string& name, std::size_t rows = 8, std::size_t cols = 8)
{
  auto p = FormationPreset::named(name);
  p.rows = rows;
  p.cols = cols;
  p.bands = 4;
  p.seed = 21;
  return p;
}

std::vector<double> random_cube(const Shape& s, std::uint64_t seed)
{
  Rng rng(seed);
  return rng.uniform_vector(s.size());
}

} // namespace

TEST(TableTwoReduction, MultiresolutionIsPanPlusDecimatedBlur)
{
  const auto p = small("multires");
  const auto f = build_formation(p);
  const Shape s = p.image_shape();
  const auto x = random_cube(s, 1);
  const auto y = f.op.apply(x);

  const std::size_t n = s.pixels();
  ASSERT_EQ(y.size(), n + n);  // P plus 4x4x4 LRI
  for (std::size_t q = 0; q < n; ++q) {
    double acc = 0.0;
    for (std::size_t k = 0; k < 4; ++k) acc += 0.25 * x[q + n * k];
    EXPECT_EQ(y[q], acc);
  }
  const auto k = gaussian_kernel(mtf_gaussian_sigma(2.0, p.nyquist_gain), 8);
  const std::size_t r = 8, ar = k.anchor_row(), ac = k.anchor_col();
  std::size_t at = n;
  for (std::size_t b = 0; b < 4; ++b)
    for (std::size_t j = 0; j < 8; j += 2)
      for (std::size_t i = 0; i < 8; i += 2) {
        double acc = 0.0;
        for (std::size_t v = 0; v < k.cols; ++v)
          for (std::size_t u = 0; u < k.rows; ++u) {
            const std::size_t si = (i + r + ar - u) % r, sj = (j + r + ac - v) % r;
            acc += k.at(u, v) * x[si + r * sj + n * b];
          }
        EXPECT_EQ(y[at++], acc);
      }
}

TEST(TableTwoReduction, CfaIsPerPixelChannelSelection)
{
  const auto p = small("cfa");
  const auto f = build_formation(p);
  const Shape s = p.image_shape();
  const auto x = random_cube(s, 2);
  const auto y = f.op.apply(x);
  const auto tile = msfa4_tile();
  const std::size_t n = s.pixels();
  ASSERT_EQ(y.size(), n);
  for (std::size_t j = 0; j < 8; ++j)
    for (std::size_t i = 0; i < 8; ++i) {
      // y = sum_k h_k * x_k with one-hot h
      double acc = 0.0;
      for (std::size_t b = 0; b < 4; ++b) {
        const double h = tile.at(i % 2, j % 2) == static_cast<int>(b) ? 1.0 : 0.0;
        acc += h * x[s.index(i, j, b)];
      }
      EXPECT_EQ(y[i + 8 * j], acc);
    }
}

TEST(TableTwoReduction, CassiIsMaskShiftSum)
{
  const auto p = small("cassi");
  const auto f = build_formation(p);
  const Shape s = p.image_shape();
  const auto x = random_cube(s, 3);
  const auto y = f.op.apply(x);
  const auto h = random_aperture(8, 8, 4, p.cassi_density, p.seed);
  const std::size_t wide = 8 + 4 - 1;
  ASSERT_EQ(y.size(), 8 * wide);
  for (std::size_t jj = 0; jj < wide; ++jj)
    for (std::size_t i = 0; i < 8; ++i) {
      double acc = 0.0;
      for (std::size_t b = 0; b < 4; ++b) {
        if (jj < b || jj - b >= 8) continue;
        acc += h(i, jj - b, b) * x[s.index(i, jj - b, b)];
      }
      EXPECT_EQ(y[i + 8 * jj], acc);
    }
  std::size_t open = 0;
  for (double w : h.weights()) open += w > 0.0;
  EXPECT_GT(open, 0u);
  EXPECT_LT(open, h.weights().size());
}

TEST(TableTwoReduction, IdentityPreset)
{
  const auto f = build_formation(small("identity"));
  const auto x = random_cube(f.image, 4);
  EXPECT_EQ(f.op.apply(x), x);
}

TEST(CompressionRatio, MatchesSampleCounts)
{
  EXPECT_DOUBLE_EQ(compression_ratio(FormationPreset::named("mrca")), 0.25);
  EXPECT_DOUBLE_EQ(compression_ratio(FormationPreset::named("multires")), 0.5);
  EXPECT_DOUBLE_EQ(compression_ratio(FormationPreset::named("cfa")), 0.25);
  auto wide = small("cassi", 4, 1024);
  EXPECT_NEAR(compression_ratio(wide), 0.251, 5e-4);
  EXPECT_DOUBLE_EQ(compression_ratio(small("identity")), 1.0);
  auto eight = FormationPreset::named("mrca");
  eight.bands = 8;
  eight.mask = "bt8pan";
  EXPECT_DOUBLE_EQ(compression_ratio(eight), 1.0 / 8.0);
}

TEST(Formation, AdjointsAndBounds)
{
  for (const char* name : {"mrca", "multires", "cfa", "cassi", "identity"}) {
    auto p = small(name);
    if (std::string(name) == "mrca") p.rho_b = 1.4;
    const auto f = build_formation(p);
    EXPECT_LT(adjoint_dot_test(f.op), 1e-10) << name;
    EXPECT_LE(mrca::test::largest_singular_value(mrca::test::dense_forward(f.op)),
              f.op.norm_bound() * (1 + 1e-12))
        << name;
  }
}

TEST(Formation, MrcaExposesBlocks)
{
  const auto f = build_formation(small("mrca"));
  ASSERT_TRUE(f.lri_mask && f.pan_mask && f.lri_mosaic && f.hri_branch && f.lri_branch);
  Rng rng(5);
  const auto x = rng.normal_vector(f.image.size());
  const auto sum = f.hri_branch->apply(x);
  const auto lri = f.lri_branch->apply(x);
  const auto y = f.op.apply(x);
  for (std::size_t i = 0; i < y.size(); ++i) EXPECT_EQ(y[i], sum[i] + lri[i]);
}

TEST(Formation, MaskChannelCountMustMatch)
{
  auto p = small("mrca");
  p.bands = 3;
  EXPECT_THROW(build_formation(p), std::invalid_argument);
  p = small("cfa");
  p.mask = "no-such-tile";
  EXPECT_THROW(build_formation(p), std::exception);
}

TEST(FormationPreset, ConfigRoundTrip)
{
  auto p = small("cassi", 16, 24);
  p.rho_b = 1.25;
  p.noise_rel = 0.01;
  p.seed = 123456789012345ULL;
  const auto q = FormationPreset::from_keyvalues(KeyValues::parse_string(p.to_keyvalues().str()));
  EXPECT_EQ(q.to_keyvalues().str(), p.to_keyvalues().str());
  EXPECT_EQ(q.seed, p.seed);
  EXPECT_EQ(q.rho_b, 1.25);

  const auto path = (std::filesystem::temp_directory_path() / "mrca_preset.cfg").string();
  p.save(path);
  EXPECT_EQ(FormationPreset::load(path).to_keyvalues().str(), p.to_keyvalues().str());
}

TEST(FormationPreset, RejectsBadConfigs)
{
  EXPECT_THROW(FormationPreset::from_keyvalues(KeyValues::parse_string("colour=red\n")),
               std::invalid_argument);
  EXPECT_THROW(FormationPreset::from_keyvalues(KeyValues::parse_string("preset=foo\n")),
               std::invalid_argument);
  EXPECT_THROW(FormationPreset::from_keyvalues(KeyValues::parse_string("rows=-3\n")),
               std::invalid_argument);
  EXPECT_THROW(FormationPreset::from_keyvalues(KeyValues::parse_string("nyquist_gain=1.5\n")),
               std::invalid_argument);
  EXPECT_THROW(FormationPreset::load("/nonexistent/formation.cfg"), std::runtime_error);
  EXPECT_THROW(FormationPreset::named("pushbroom"), std::invalid_argument);
}
