#pragma once

// Datacube storage and the lexicographic (pixel x band) view.
//
// Every array in the library uses one enumeration, fixed here:
//
//   flat(i, j, k, m) = i + Ni * (j + Nj * (k + Nk * m))
//
// i.e. band-sequential planes, each plane stored column-major (the columns of
// the image concatenated). The lexicographic pixel index is p = i + Ni * j, so
// the sample buffer of a cube already *is* matr(X) stored column-major as an
// (Ni*Nj) x Nk matrix. All indices are 0-based.

#include <cmath>
#include <cstddef>
#include <numeric>
#include <span>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace mrca {

struct Shape
{
  std::size_t rows = 1;
  std::size_t cols = 1;
  std::size_t bands = 1;
  std::size_t dirs = 1;

  constexpr std::size_t pixels() const noexcept { return rows * cols; }
  constexpr std::size_t size() const noexcept { return rows * cols * bands * dirs; }

  constexpr std::size_t index(std::size_t i, std::size_t j, std::size_t k = 0,
                              std::size_t m = 0) const noexcept
  {
    return i + rows * (j + cols * (k + bands * m));
  }

  friend constexpr bool operator==(const Shape&, const Shape&) = default;

  std::string str() const
  {
    std::string s = std::to_string(rows) + "x" + std::to_string(cols) + "x" + std::to_string(bands);
    if (dirs != 1) s += "x" + std::to_string(dirs);
    return s;
  }
};

/// Ordered list of array blocks. A single block is the common case; several
/// blocks describe a stacked observation (e.g. a PAN image next to an MS image).
class Domain
{
public:
  Domain() = default;
  Domain(Shape s) : parts_{s} {}  // NOLINT: implicit on purpose, blocks are shapes
  explicit Domain(std::vector<Shape> parts) : parts_(std::move(parts)) {}

  const std::vector<Shape>& parts() const noexcept { return parts_; }
  std::size_t part_count() const noexcept { return parts_.size(); }
  bool single() const noexcept { return parts_.size() == 1; }
  const Shape& shape() const
  {
    if (!single()) throw std::logic_error("Domain::shape: domain " + str() + " is stacked");
    return parts_.front();
  }

  std::size_t size() const noexcept
  {
    std::size_t n = 0;
    for (const auto& p : parts_) n += p.size();
    return n;
  }

  /// Offset of block b inside the concatenated buffer.
  std::size_t offset(std::size_t b) const
  {
    std::size_t n = 0;
    for (std::size_t i = 0; i < b; ++i) n += parts_.at(i).size();
    return n;
  }

  static Domain concat(const Domain& a, const Domain& b)
  {
    std::vector<Shape> parts = a.parts_;
    parts.insert(parts.end(), b.parts_.begin(), b.parts_.end());
    return Domain(std::move(parts));
  }

  friend bool operator==(const Domain&, const Domain&) = default;

  std::string str() const
  {
    std::string s;
    for (std::size_t i = 0; i < parts_.size(); ++i) {
      if (i) s += "+";
      s += parts_[i].str();
    }
    return s;
  }

private:
  std::vector<Shape> parts_;
};

inline double dot(std::span<const double> a, std::span<const double> b)
{
  if (a.size() != b.size()) throw std::invalid_argument("dot: size mismatch");
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
  return s;
}

inline double norm2(std::span<const double> a) { return std::sqrt(dot(a, a)); }

inline bool all_finite(std::span<const double> a)
{
  for (double v : a)
    if (!std::isfinite(v)) return false;
  return true;
}

/// Pixel x band matrix, column-major: at(p, k) = values[p + pixels * k].
struct LexMatrix
{
  std::size_t pixels = 0;
  std::size_t bands = 0;
  std::vector<double> values;

  double at(std::size_t p, std::size_t k) const { return values.at(p + pixels * k); }
};

/// Image X as rows x cols x bands samples with a declared peak intensity.
/// Immutable once built; all values are finite.
class DataCube
{
public:
  DataCube(std::size_t rows, std::size_t cols, std::size_t bands, std::vector<double> samples,
           double dynamic_range = 1.0, std::vector<std::string> band_labels = {})
    : shape_{rows, cols, bands, 1}, samples_(std::move(samples)), dynamic_range_(dynamic_range),
      labels_(std::move(band_labels))
  {
    if (rows == 0 || cols == 0 || bands == 0)
      throw std::invalid_argument("DataCube: dimensions must be positive");
    if (samples_.size() != shape_.size())
      throw std::invalid_argument("DataCube: expected " + std::to_string(shape_.size()) +
                                  " samples for " + shape_.str() + ", got " +
                                  std::to_string(samples_.size()));
    if (!(dynamic_range_ > 0.0) || !std::isfinite(dynamic_range_))
      throw std::invalid_argument("DataCube: dynamic range must be positive and finite");
    if (!all_finite(samples_)) throw std::invalid_argument("DataCube: non-finite sample");
    if (!labels_.empty() && labels_.size() != bands)
      throw std::invalid_argument("DataCube: band label count does not match band count");
  }

  DataCube(Shape shape, std::vector<double> samples, double dynamic_range = 1.0,
           std::vector<std::string> band_labels = {})
    : DataCube(shape.rows, shape.cols, shape.bands, std::move(samples), dynamic_range,
               std::move(band_labels))
  {
    if (shape.dirs != 1) throw std::invalid_argument("DataCube: shape must have dirs == 1");
  }

  static DataCube zeros(std::size_t rows, std::size_t cols, std::size_t bands, double rho = 1.0)
  {
    return DataCube(rows, cols, bands, std::vector<double>(rows * cols * bands, 0.0), rho);
  }

  const Shape& shape() const noexcept { return shape_; }
  std::size_t rows() const noexcept { return shape_.rows; }
  std::size_t cols() const noexcept { return shape_.cols; }
  std::size_t bands() const noexcept { return shape_.bands; }
  std::size_t size() const noexcept { return samples_.size(); }
  double dynamic_range() const noexcept { return dynamic_range_; }
  const std::vector<std::string>& band_labels() const noexcept { return labels_; }

  std::span<const double> samples() const noexcept { return samples_; }
  const std::vector<double>& vector() const noexcept { return samples_; }

  double operator()(std::size_t i, std::size_t j, std::size_t k) const
  {
    return samples_[shape_.index(i, j, k)];
  }

  std::span<const double> band(std::size_t k) const
  {
    return std::span<const double>(samples_).subspan(k * shape_.pixels(), shape_.pixels());
  }

  /// Same geometry and metadata, new samples.
  DataCube with_samples(std::vector<double> samples) const
  {
    return DataCube(shape_.rows, shape_.cols, shape_.bands, std::move(samples), dynamic_range_,
                    labels_);
  }

  friend bool operator==(const DataCube&, const DataCube&) = default;

private:
  Shape shape_;
  std::vector<double> samples_;
  double dynamic_range_;
  std::vector<std::string> labels_;
};

/// Single-channel focal-plane acquisition y.
class FlatAcquisition
{
public:
  FlatAcquisition(std::size_t rows, std::size_t cols, std::vector<double> samples)
    : rows_(rows), cols_(cols), samples_(std::move(samples))
  {
    if (rows == 0 || cols == 0) throw std::invalid_argument("FlatAcquisition: empty");
    if (samples_.size() != rows * cols)
      throw std::invalid_argument("FlatAcquisition: sample count mismatch");
  }

  std::size_t rows() const noexcept { return rows_; }
  std::size_t cols() const noexcept { return cols_; }
  std::span<const double> samples() const noexcept { return samples_; }

private:
  std::size_t rows_, cols_;
  std::vector<double> samples_;
};

inline LexMatrix matr(const DataCube& cube)
{
  return LexMatrix{cube.shape().pixels(), cube.bands(), cube.vector()};
}

inline DataCube unmatr(const LexMatrix& m, std::size_t rows, std::size_t cols,
                       double dynamic_range = 1.0)
{
  if (rows * cols != m.pixels)
    throw std::invalid_argument("unmatr: rows*cols does not match pixel count");
  return DataCube(rows, cols, m.bands, m.values, dynamic_range);
}

inline double frobenius_norm(const DataCube& cube) { return norm2(cube.samples()); }

} // namespace mrca
