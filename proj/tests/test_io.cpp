#include <gtest/gtest.h>

#include <filesystem>
#include <fstream>

#include "mrca/io.hpp"
#include "mrca/random.hpp"

using namespace mrca;
namespace fs = std::filesystem;

namespace {

fs::path scratch(const std::string& name)
{
  const auto dir = fs::temp_directory_path() / "mrca_test_io";
  fs::create_directories(dir);
  return dir / name;
}

} // namespace

TEST(DatacubeFile, Float32RoundTripWithinSinglePrecision)
{
  Rng rng(1);
  const DataCube x(5, 7, 3, rng.uniform_vector(105, 0.0, 255.0), 255.0, {"r", "g", "b"});
  const auto path = scratch("cube32.raw").string();
  write_datacube(path, x);
  EXPECT_EQ(fs::file_size(path), 105u * 4u);
  const auto y = read_datacube(path);
  EXPECT_EQ(y.shape(), x.shape());
  EXPECT_EQ(y.dynamic_range(), 255.0);
  EXPECT_EQ(y.band_labels(), x.band_labels());
  for (std::size_t i = 0; i < x.size(); ++i)
    EXPECT_EQ(y.samples()[i], static_cast<double>(static_cast<float>(x.samples()[i])));
}

TEST(DatacubeFile, Float64RoundTripIsExact)
{
  Rng rng(2);
  const DataCube x(4, 3, 2, rng.normal_vector(24), 1.5);
  const auto path = scratch("cube64.raw").string();
  write_datacube(path, x, SampleType::float64);
  EXPECT_EQ(read_datacube(path), x);
}

TEST(DatacubeFile, PayloadIsLittleEndianBandSequential)
{
  const DataCube x(2, 1, 2, {1.0, 2.0, 3.0, 4.0});
  const auto path = scratch("order.raw").string();
  write_datacube(path, x);
  std::ifstream in(path, std::ios::binary);
  float v[4];
  in.read(reinterpret_cast<char*>(v), sizeof v);
  EXPECT_EQ(v[0], 1.0f);
  EXPECT_EQ(v[1], 2.0f);
  EXPECT_EQ(v[2], 3.0f);
  EXPECT_EQ(v[3], 4.0f);
  std::ifstream hdr(header_path(path));
  const auto kv = KeyValues::parse(hdr);
  EXPECT_EQ(kv.get("rows"), "2");
  EXPECT_EQ(kv.get("bands"), "2");
  EXPECT_EQ(kv.get("interleave"), "bsq");
}

TEST(DatacubeFile, Errors)
{
  EXPECT_THROW(read_datacube(scratch("missing.raw").string()), std::runtime_error);
  const auto path = scratch("short.raw").string();
  write_datacube(path, DataCube::zeros(2, 2, 1));
  fs::resize_file(path, 8);
  EXPECT_THROW(read_datacube(path), std::invalid_argument);
}

TEST(StackedArray, PartsSurviveRoundTrip)
{
  const Domain d = Domain::concat(Shape{4, 4, 1, 1}, Shape{2, 2, 3, 1});
  Rng rng(4);
  ArrayFile a{d, rng.normal_vector(d.size()), 2.0, {}, "observation"};
  const auto path = scratch("stacked.raw").string();
  write_array(path, a, SampleType::float64);
  const auto b = read_array(path);
  EXPECT_EQ(b.domain, d);
  EXPECT_EQ(b.samples, a.samples);
  EXPECT_EQ(b.kind, "observation");
  EXPECT_THROW(read_datacube(path), std::invalid_argument);
}

TEST(Ppm, HeaderAndScaling)
{
  const DataCube x(1, 2, 3, {0.0, 1.0, 0.5, 0.5, 1.0, 0.0});
  const auto path = scratch("img.ppm").string();
  write_ppm(path, x, 0, 1, 2);
  std::ifstream in(path, std::ios::binary);
  std::string magic;
  int w = 0, h = 0, maxv = 0;
  in >> magic >> w >> h >> maxv;
  in.get();
  EXPECT_EQ(magic, "P6");
  EXPECT_EQ(w, 2);
  EXPECT_EQ(h, 1);
  EXPECT_EQ(maxv, 255);
  unsigned char px[6];
  in.read(reinterpret_cast<char*>(px), 6);
  EXPECT_EQ(px[0], 0);
  EXPECT_EQ(px[1], 128);
  EXPECT_EQ(px[2], 255);
  EXPECT_EQ(px[3], 255);
  EXPECT_EQ(px[4], 128);
  EXPECT_EQ(px[5], 0);
  EXPECT_THROW(write_ppm(path, x, 0, 1, 3), std::invalid_argument);
}
