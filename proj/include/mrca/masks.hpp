#pragma once

// Focal-plane masks: per-pixel, per-channel multiplicative weights built from
// periodic tiles. A tile cell holds -1 for a high-resolution (PAN) sensor or
// the index of the low-resolution channel it samples.

#include <algorithm>
#include <cmath>
#include <fstream>
#include <sstream>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "mrca/tensor.hpp"

namespace mrca {

inline constexpr int kPanCell = -1;

/// H in lexicographic layout (pixels x bands), stored with the cube enumeration.
class Mask
{
public:
  Mask(std::size_t rows, std::size_t cols, std::size_t bands, std::vector<double> weights,
       std::vector<std::string> band_roles = {})
    : shape_{rows, cols, bands, 1}, weights_(std::move(weights)), roles_(std::move(band_roles))
  {
    if (rows == 0 || cols == 0 || bands == 0)
      throw std::invalid_argument("Mask: dimensions must be positive");
    if (weights_.size() != shape_.size()) throw std::invalid_argument("Mask: size mismatch");
    for (double w : weights_)
      if (!std::isfinite(w) || w < 0.0)
        throw std::invalid_argument("Mask: entries must be finite and nonnegative");
    if (roles_.empty())
      for (std::size_t k = 0; k < bands; ++k) roles_.push_back("lri" + std::to_string(k));
    if (roles_.size() != bands) throw std::invalid_argument("Mask: band role count mismatch");
  }

  static Mask ones(std::size_t rows, std::size_t cols, std::size_t bands)
  {
    return Mask(rows, cols, bands, std::vector<double>(rows * cols * bands, 1.0));
  }

  const Shape& shape() const noexcept { return shape_; }
  std::size_t rows() const noexcept { return shape_.rows; }
  std::size_t cols() const noexcept { return shape_.cols; }
  std::size_t bands() const noexcept { return shape_.bands; }
  std::span<const double> weights() const noexcept { return weights_; }
  const std::vector<std::string>& band_roles() const noexcept { return roles_; }

  double operator()(std::size_t i, std::size_t j, std::size_t k) const
  {
    return weights_[shape_.index(i, j, k)];
  }

  double max_weight() const
  {
    double m = 0.0;
    for (double w : weights_) m = std::max(m, w);
    return m;
  }

  bool binary() const
  {
    for (double w : weights_)
      if (w != 0.0 && w != 1.0) return false;
    return true;
  }

  /// Number of active entries per band.
  std::vector<std::size_t> band_support() const
  {
    std::vector<std::size_t> n(bands(), 0);
    for (std::size_t k = 0; k < bands(); ++k)
      for (std::size_t p = 0; p < shape_.pixels(); ++p)
        if (weights_[p + shape_.pixels() * k] != 0.0) ++n[k];
    return n;
  }

  /// Per-pixel indicator of any active band.
  std::vector<bool> pixel_support() const
  {
    std::vector<bool> s(shape_.pixels(), false);
    for (std::size_t k = 0; k < bands(); ++k)
      for (std::size_t p = 0; p < shape_.pixels(); ++p)
        if (weights_[p + shape_.pixels() * k] != 0.0) s[p] = true;
    return s;
  }

  friend bool operator==(const Mask&, const Mask&) = default;

private:
  Shape shape_;
  std::vector<double> weights_;
  std::vector<std::string> roles_;
};

struct PeriodicTile
{
  std::size_t height = 1;
  std::size_t width = 1;
  std::size_t bands = 1;
  std::vector<int> cells;  // row-major height x width

  int at(std::size_t r, std::size_t c) const { return cells.at(r * width + c); }

  void validate() const
  {
    if (height == 0 || width == 0 || bands == 0)
      throw std::invalid_argument("PeriodicTile: dimensions must be positive");
    if (cells.size() != height * width)
      throw std::invalid_argument("PeriodicTile: expected " + std::to_string(height * width) +
                                  " cells, got " + std::to_string(cells.size()));
    for (int c : cells)
      if (c < kPanCell || c >= static_cast<int>(bands))
        throw std::invalid_argument("PeriodicTile: cell value " + std::to_string(c) +
                                    " outside [-1, " + std::to_string(bands - 1) + "]");
  }

  /// LRI channels that never appear in one period (they cannot be recovered).
  std::vector<std::size_t> missing_channels() const
  {
    std::vector<bool> seen(bands, false);
    for (int c : cells)
      if (c >= 0) seen[static_cast<std::size_t>(c)] = true;
    std::vector<std::size_t> out;
    for (std::size_t k = 0; k < bands; ++k)
      if (!seen[k]) out.push_back(k);
    return out;
  }

  bool has_pan() const
  {
    for (int c : cells)
      if (c == kPanCell) return true;
    return false;
  }

  friend bool operator==(const PeriodicTile&, const PeriodicTile&) = default;
};

/// RGGB: R top-left, greens on the anti-diagonal.
inline PeriodicTile bayer_tile() { return PeriodicTile{2, 2, 3, {0, 1, 1, 2}}; }

/// 4-band 2x2 MSFA (each channel once per period).
inline PeriodicTile msfa4_tile() { return PeriodicTile{2, 2, 4, {0, 1, 2, 3}}; }

/// 4x4, PAN on the (i + j) even checkerboard, 4 channels twice each.
inline PeriodicTile bt4pan_tile()
{
  return PeriodicTile{4, 4, 4,
                      {-1, 0, -1, 1,  //
                       2, -1, 3, -1,  //
                       -1, 1, -1, 0,  //
                       3, -1, 2, -1}};
}

/// 4x4, PAN on the (i + j) even checkerboard, 8 channels once each.
inline PeriodicTile bt8pan_tile()
{
  return PeriodicTile{4, 4, 8,
                      {-1, 0, -1, 1,  //
                       2, -1, 3, -1,  //
                       -1, 4, -1, 5,  //
                       6, -1, 7, -1}};
}

inline PeriodicTile builtin_tile(const std::string& name)
{
  if (name == "bayer") return bayer_tile();
  if (name == "msfa4") return msfa4_tile();
  if (name == "bt4pan") return bt4pan_tile();
  if (name == "bt8pan") return bt8pan_tile();
  throw std::invalid_argument("unknown mask name '" + name + "' (bayer, msfa4, bt4pan, bt8pan)");
}

inline bool is_builtin_tile(const std::string& name)
{
  return name == "bayer" || name == "msfa4" || name == "bt4pan" || name == "bt8pan";
}

struct TiledMasks
{
  Mask lri;  // rows x cols x Nk
  Mask pan;  // rows x cols x 1
};

inline TiledMasks periodic_mask(const PeriodicTile& tile, std::size_t rows, std::size_t cols)
{
  tile.validate();
  const std::size_t nk = tile.bands;
  std::vector<double> lri(rows * cols * nk, 0.0), pan(rows * cols, 0.0);
  for (std::size_t j = 0; j < cols; ++j)
    for (std::size_t i = 0; i < rows; ++i) {
      const int c = tile.at(i % tile.height, j % tile.width);
      const std::size_t p = i + rows * j;
      if (c == kPanCell)
        pan[p] = 1.0;
      else
        lri[p + rows * cols * static_cast<std::size_t>(c)] = 1.0;
    }
  return {Mask(rows, cols, nk, std::move(lri)), Mask(rows, cols, 1, std::move(pan), {"hri"})};
}

inline Mask bayer_mask(std::size_t rows, std::size_t cols)
{
  auto m = periodic_mask(bayer_tile(), rows, cols).lri;
  return Mask(rows, cols, 3, {m.weights().begin(), m.weights().end()}, {"R", "G", "B"});
}

/// Text format: "th tw Nk" on the first line, then th rows of tw integers.
inline PeriodicTile parse_tile(std::istream& in)
{
  std::string line;
  auto next_line = [&]() -> bool {
    while (std::getline(in, line)) {
      if (auto pos = line.find('#'); pos != std::string::npos) line.erase(pos);
      if (line.find_first_not_of(" \t\r") != std::string::npos) return true;
    }
    return false;
  };
  if (!next_line()) throw std::invalid_argument("mask file: missing header");
  PeriodicTile t;
  {
    std::istringstream hs(line);
    long long h = 0, w = 0, k = 0;
    std::string extra;
    if (!(hs >> h >> w >> k) || (hs >> extra) || h <= 0 || w <= 0 || k <= 0)
      throw std::invalid_argument("mask file: malformed header '" + line + "'");
    t.height = static_cast<std::size_t>(h);
    t.width = static_cast<std::size_t>(w);
    t.bands = static_cast<std::size_t>(k);
  }
  for (std::size_t r = 0; r < t.height; ++r) {
    if (!next_line())
      throw std::invalid_argument("mask file: expected " + std::to_string(t.height) + " rows");
    std::istringstream rs(line);
    std::vector<int> row;
    int v = 0;
    while (rs >> v) row.push_back(v);
    if (!rs.eof()) throw std::invalid_argument("mask file: non-integer entry in row " +
                                               std::to_string(r));
    if (row.size() != t.width)
      throw std::invalid_argument("mask file: row " + std::to_string(r) + " has " +
                                  std::to_string(row.size()) + " entries, expected " +
                                  std::to_string(t.width));
    t.cells.insert(t.cells.end(), row.begin(), row.end());
  }
  if (next_line()) throw std::invalid_argument("mask file: trailing content");
  t.validate();
  return t;
}

inline PeriodicTile parse_tile_string(const std::string& text)
{
  std::istringstream in(text);
  return parse_tile(in);
}

inline PeriodicTile parse_mask_file(const std::string& path)
{
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open mask file '" + path + "'");
  return parse_tile(in);
}

inline std::string format_tile(const PeriodicTile& t)
{
  t.validate();
  std::ostringstream os;
  os << t.height << ' ' << t.width << ' ' << t.bands << '\n';
  for (std::size_t r = 0; r < t.height; ++r) {
    for (std::size_t c = 0; c < t.width; ++c) os << (c ? " " : "") << t.at(r, c);
    os << '\n';
  }
  return os.str();
}

inline void write_mask_file(const std::string& path, const PeriodicTile& t)
{
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write mask file '" + path + "'");
  out << format_tile(t);
  if (!out) throw std::runtime_error("error writing mask file '" + path + "'");
}

/// Built-in name or path to a tile file.
inline PeriodicTile resolve_tile(const std::string& name_or_path)
{
  if (is_builtin_tile(name_or_path)) return builtin_tile(name_or_path);
  return parse_mask_file(name_or_path);
}

} // namespace mrca
