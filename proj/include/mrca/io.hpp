#pragma once

// Datacube files: raw little-endian planar (band-sequential, column-major
// planes) payload plus a "<name>.hdr" key=value sidecar. Observations use the
// same container; a stacked observation lists its blocks under "parts".

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "mrca/keyvalue.hpp"
#include "mrca/tensor.hpp"

namespace mrca {

enum class SampleType
{
  float32,
  float64,
};

inline std::string header_path(const std::string& payload) { return payload + ".hdr"; }

struct ArrayFile
{
  Domain domain;
  std::vector<double> samples;
  double dynamic_range = 1.0;
  std::vector<std::string> band_labels;
  std::string kind = "datacube";  // datacube | observation
};

namespace detail {

inline std::string shape_token(const Shape& s)
{
  return std::to_string(s.rows) + "x" + std::to_string(s.cols) + "x" + std::to_string(s.bands) +
         "x" + std::to_string(s.dirs);
}

inline Shape parse_shape_token(const std::string& tok)
{
  std::vector<std::size_t> v;
  std::stringstream ss(tok);
  std::string item;
  while (std::getline(ss, item, 'x')) {
    if (item.empty() || item.find_first_not_of("0123456789") != std::string::npos)
      throw std::invalid_argument("malformed shape '" + tok + "'");
    v.push_back(std::stoull(item));
  }
  if (v.size() != 4) throw std::invalid_argument("malformed shape '" + tok + "'");
  return Shape{v[0], v[1], v[2], v[3]};
}

inline std::string join(const std::vector<std::string>& items, char sep)
{
  std::string out;
  for (std::size_t i = 0; i < items.size(); ++i) out += (i ? std::string(1, sep) : "") + items[i];
  return out;
}

inline std::vector<std::string> split(const std::string& s, char sep)
{
  std::vector<std::string> out;
  if (s.empty()) return out;
  std::stringstream ss(s);
  std::string item;
  while (std::getline(ss, item, sep)) out.push_back(item);
  return out;
}

template <typename T>
T to_little(T v)
{
  if constexpr (std::endian::native == std::endian::big) {
    unsigned char b[sizeof(T)];
    std::memcpy(b, &v, sizeof(T));
    for (std::size_t i = 0; i < sizeof(T) / 2; ++i) std::swap(b[i], b[sizeof(T) - 1 - i]);
    std::memcpy(&v, b, sizeof(T));
  }
  return v;
}

} // namespace detail

inline void write_array(const std::string& path, const ArrayFile& a,
                        SampleType type = SampleType::float32)
{
  if (a.samples.size() != a.domain.size())
    throw std::invalid_argument("write_array: sample count does not match the domain");
  KeyValues kv;
  kv.set("kind", a.kind);
  const Shape& first = a.domain.parts().front();
  kv.set("rows", std::to_string(first.rows));
  kv.set("cols", std::to_string(first.cols));
  kv.set("bands", std::to_string(first.bands));
  if (!a.domain.single() || first.dirs != 1) {
    std::vector<std::string> parts;
    for (const auto& s : a.domain.parts()) parts.push_back(detail::shape_token(s));
    kv.set("parts", detail::join(parts, ';'));
  }
  kv.set("dynamic_range", format_double(a.dynamic_range));
  if (!a.band_labels.empty()) kv.set("band_labels", detail::join(a.band_labels, ','));
  kv.set("dtype", type == SampleType::float32 ? "float32" : "float64");
  kv.set("byte_order", "little");
  kv.set("interleave", "bsq");
  kv.set("pixel_order", "column_major");

  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write '" + path + "'");
  for (double v : a.samples) {
    if (type == SampleType::float32) {
      const float f = detail::to_little(static_cast<float>(v));
      out.write(reinterpret_cast<const char*>(&f), sizeof f);
    } else {
      const double d = detail::to_little(v);
      out.write(reinterpret_cast<const char*>(&d), sizeof d);
    }
  }
  if (!out) throw std::runtime_error("error writing '" + path + "'");
  std::ofstream hdr(header_path(path));
  if (!hdr) throw std::runtime_error("cannot write '" + header_path(path) + "'");
  hdr << kv.str();
  if (!hdr) throw std::runtime_error("error writing '" + header_path(path) + "'");
}

inline ArrayFile read_array(const std::string& path)
{
  std::ifstream hdr(header_path(path));
  if (!hdr) throw std::runtime_error("cannot open header '" + header_path(path) + "'");
  const auto kv = KeyValues::parse(hdr, header_path(path));

  ArrayFile a;
  a.kind = kv.get_or("kind", "datacube");
  std::vector<Shape> parts;
  if (kv.has("parts")) {
    for (const auto& tok : detail::split(kv.get("parts"), ';'))
      parts.push_back(detail::parse_shape_token(tok));
  } else {
    parts.push_back(Shape{kv.get_uint("rows"), kv.get_uint("cols"), kv.get_uint("bands"), 1});
  }
  for (const auto& s : parts)
    if (s.size() == 0) throw std::invalid_argument(header_path(path) + ": empty shape");
  a.domain = Domain(parts);
  a.dynamic_range = kv.has("dynamic_range") ? kv.get_double("dynamic_range") : 1.0;
  a.band_labels = detail::split(kv.get_or("band_labels", ""), ',');
  if (kv.get_or("byte_order", "little") != "little")
    throw std::invalid_argument(header_path(path) + ": only little-endian payloads are supported");
  if (kv.get_or("interleave", "bsq") != "bsq")
    throw std::invalid_argument(header_path(path) + ": only band-sequential payloads are supported");
  const std::string dtype = kv.get_or("dtype", "float32");
  if (dtype != "float32" && dtype != "float64")
    throw std::invalid_argument(header_path(path) + ": unsupported dtype '" + dtype + "'");
  const std::size_t width = dtype == "float32" ? 4 : 8;

  std::ifstream in(path, std::ios::binary | std::ios::ate);
  if (!in) throw std::runtime_error("cannot open '" + path + "'");
  const auto bytes = static_cast<std::size_t>(in.tellg());
  const std::size_t n = a.domain.size();
  if (bytes != n * width)
    throw std::invalid_argument("'" + path + "' holds " + std::to_string(bytes) +
                                " bytes, header implies " + std::to_string(n * width));
  in.seekg(0);
  a.samples.resize(n);
  for (std::size_t i = 0; i < n; ++i) {
    if (width == 4) {
      float f = 0;
      in.read(reinterpret_cast<char*>(&f), sizeof f);
      a.samples[i] = detail::to_little(f);
    } else {
      double d = 0;
      in.read(reinterpret_cast<char*>(&d), sizeof d);
      a.samples[i] = detail::to_little(d);
    }
  }
  if (!in) throw std::runtime_error("error reading '" + path + "'");
  return a;
}

inline void write_datacube(const std::string& path, const DataCube& cube,
                           SampleType type = SampleType::float32)
{
  write_array(path, ArrayFile{Domain(cube.shape()), cube.vector(), cube.dynamic_range(),
                              cube.band_labels(), "datacube"},
              type);
}

inline DataCube read_datacube(const std::string& path)
{
  auto a = read_array(path);
  if (!a.domain.single() || a.domain.shape().dirs != 1)
    throw std::invalid_argument("'" + path + "' is not a single datacube");
  return DataCube(a.domain.shape(), std::move(a.samples), a.dynamic_range, a.band_labels);
}

/// Binary PPM of three bands, each scaled from [0, rho] to [0, 255].
inline void write_ppm(const std::string& path, const DataCube& cube, std::size_t r,
                      std::size_t g, std::size_t b)
{
  for (std::size_t k : {r, g, b})
    if (k >= cube.bands())
      throw std::invalid_argument("write_ppm: band " + std::to_string(k) + " out of range");
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write '" + path + "'");
  out << "P6\n" << cube.cols() << ' ' << cube.rows() << "\n255\n";
  const double rho = cube.dynamic_range();
  for (std::size_t i = 0; i < cube.rows(); ++i)
    for (std::size_t j = 0; j < cube.cols(); ++j)
      for (std::size_t k : {r, g, b}) {
        const double v = std::clamp(cube(i, j, k) / rho, 0.0, 1.0);
        const auto byte = static_cast<unsigned char>(std::lround(v * 255.0));
        out.put(static_cast<char>(byte));
      }
  if (!out) throw std::runtime_error("error writing '" + path + "'");
}

} // namespace mrca
