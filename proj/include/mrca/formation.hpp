#pragma once

// Elementary acquisition blocks as LinearOps: spectral degradation, circular
// convolution, decimation, masking, shifting, channel summation, the
// Butterworth blur, plus the noise model and LRI/HRI radiometric equalization.

#include <fftw3.h>

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <complex>
#include <cstdint>
#include <memory>
#include <mutex>
#include <numbers>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "mrca/linear_op.hpp"
#include "mrca/masks.hpp"
#include "mrca/random.hpp"
#include "mrca/tensor.hpp"

namespace mrca {

// ---------------------------------------------------------------------------
// Spectral degradation: p_:j = sum_k w_jk x_:k

class SpectralWeights
{
public:
  /// Row-major Np x Nk coefficients.
  SpectralWeights(std::size_t hri_bands, std::size_t bands, std::vector<double> w)
    : np_(hri_bands), nk_(bands), w_(std::move(w))
  {
    if (np_ == 0 || nk_ == 0) throw std::invalid_argument("SpectralWeights: empty matrix");
    if (w_.size() != np_ * nk_) throw std::invalid_argument("SpectralWeights: size mismatch");
    if (!all_finite(w_)) throw std::invalid_argument("SpectralWeights: non-finite weight");
  }

  /// One HRI channel equal to the band average (w_1k = 1/Nk).
  static SpectralWeights average(std::size_t bands)
  {
    return SpectralWeights(1, bands, std::vector<double>(bands, 1.0 / static_cast<double>(bands)));
  }

  static SpectralWeights zeros(std::size_t hri_bands, std::size_t bands)
  {
    return SpectralWeights(hri_bands, bands, std::vector<double>(hri_bands * bands, 0.0));
  }

  std::size_t hri_bands() const noexcept { return np_; }
  std::size_t bands() const noexcept { return nk_; }
  double operator()(std::size_t j, std::size_t k) const { return w_[j * nk_ + k]; }

  /// Largest singular value of W.
  double spectral_norm() const
  {
    Eigen::MatrixXd m(static_cast<Eigen::Index>(np_), static_cast<Eigen::Index>(nk_));
    for (std::size_t j = 0; j < np_; ++j)
      for (std::size_t k = 0; k < nk_; ++k)
        m(static_cast<Eigen::Index>(j), static_cast<Eigen::Index>(k)) = (*this)(j, k);
    Eigen::JacobiSVD<Eigen::MatrixXd> svd(m);
    return svd.singularValues().size() ? svd.singularValues()(0) : 0.0;
  }

private:
  std::size_t np_, nk_;
  std::vector<double> w_;
};

inline LinearOp spectral_degrade(const SpectralWeights& w, std::size_t rows, std::size_t cols)
{
  const Shape in{rows, cols, w.bands(), 1};
  const Shape out{rows, cols, w.hri_bands(), 1};
  const std::size_t n = in.pixels();
  auto fwd = [w, n](std::span<const double> x, std::span<double> y) {
    for (std::size_t j = 0; j < w.hri_bands(); ++j) {
      auto yj = y.subspan(j * n, n);
      std::fill(yj.begin(), yj.end(), 0.0);
      for (std::size_t k = 0; k < w.bands(); ++k) {
        const double c = w(j, k);
        const auto xk = x.subspan(k * n, n);
        for (std::size_t p = 0; p < n; ++p) yj[p] += c * xk[p];
      }
    }
  };
  auto adj = [w, n](std::span<const double> y, std::span<double> x) {
    for (std::size_t k = 0; k < w.bands(); ++k) {
      auto xk = x.subspan(k * n, n);
      std::fill(xk.begin(), xk.end(), 0.0);
      for (std::size_t j = 0; j < w.hri_bands(); ++j) {
        const double c = w(j, k);
        const auto yj = y.subspan(j * n, n);
        for (std::size_t p = 0; p < n; ++p) xk[p] += c * yj[p];
      }
    }
  };
  return LinearOp("spectral", in, out, fwd, adj, w.spectral_norm());
}

// ---------------------------------------------------------------------------
// Circular convolution by one kernel per band.

struct Kernel2D
{
  std::size_t rows = 1;
  std::size_t cols = 1;
  std::vector<double> taps{1.0};  // column-major, taps[u + rows * v]

  double at(std::size_t u, std::size_t v) const { return taps[u + rows * v]; }
  /// Tap aligned with the output pixel.
  std::size_t anchor_row() const noexcept { return (rows - 1) / 2; }
  std::size_t anchor_col() const noexcept { return (cols - 1) / 2; }

  static Kernel2D delta() { return {}; }
};

/// Unit-sum isotropic Gaussian, (2r+1)^2 taps with r = ceil(3 sigma).
inline Kernel2D gaussian_kernel(double sigma, std::size_t max_extent = 0)
{
  if (!(sigma > 0.0)) return Kernel2D::delta();
  auto radius = static_cast<std::size_t>(std::ceil(3.0 * sigma));
  if (max_extent > 0) radius = std::min(radius, (max_extent - 1) / 2);
  const std::size_t n = 2 * radius + 1;
  Kernel2D k{n, n, std::vector<double>(n * n)};
  double s = 0.0;
  for (std::size_t v = 0; v < n; ++v)
    for (std::size_t u = 0; u < n; ++u) {
      const double du = static_cast<double>(u) - static_cast<double>(radius);
      const double dv = static_cast<double>(v) - static_cast<double>(radius);
      const double g = std::exp(-(du * du + dv * dv) / (2.0 * sigma * sigma));
      k.taps[u + n * v] = g;
      s += g;
    }
  for (auto& t : k.taps) t /= s;
  return k;
}

/// Spatial std of a Gaussian whose transfer function equals `gain` at the
/// Nyquist frequency of an image `ratio` times coarser.
inline double mtf_gaussian_sigma(double ratio, double nyquist_gain = 0.3)
{
  if (!(nyquist_gain > 0.0 && nyquist_gain < 1.0))
    throw std::invalid_argument("mtf_gaussian_sigma: gain must be in (0, 1)");
  // exp(-2 pi^2 s^2 f^2) = gain at f = 0.5 / ratio
  return ratio * std::sqrt(-2.0 * std::log(nyquist_gain)) / std::numbers::pi;
}

class BlurBank
{
public:
  explicit BlurBank(std::vector<Kernel2D> kernels) : kernels_(std::move(kernels))
  {
    if (kernels_.empty()) throw std::invalid_argument("BlurBank: no kernels");
    for (const auto& k : kernels_) {
      if (k.rows == 0 || k.cols == 0 || k.taps.size() != k.rows * k.cols)
        throw std::invalid_argument("BlurBank: malformed kernel");
      if (!all_finite(k.taps)) throw std::invalid_argument("BlurBank: non-finite tap");
    }
  }

  static BlurBank uniform(const Kernel2D& k, std::size_t bands)
  {
    return BlurBank(std::vector<Kernel2D>(bands, k));
  }

  static BlurBank delta(std::size_t bands) { return uniform(Kernel2D::delta(), bands); }

  /// Gaussian MTF-matched bank for scale ratio `ratio`.
  static BlurBank mtf_gaussian(std::size_t bands, double ratio, double nyquist_gain = 0.3,
                               std::size_t max_extent = 0)
  {
    return uniform(gaussian_kernel(mtf_gaussian_sigma(ratio, nyquist_gain), max_extent), bands);
  }

  std::size_t bands() const noexcept { return kernels_.size(); }
  const Kernel2D& kernel(std::size_t k) const { return kernels_.at(k); }

private:
  std::vector<Kernel2D> kernels_;
};

struct ConvNormBound
{
  double certified = 0.0;  // max |DFT| of the zero-padded kernels at the image size
  double l2_formula = 0.0; // max_k sqrt(sum_i b_ik^2), reported only
};

/// Exact spectral norm of the per-band circulant convolution on a rows x cols
/// grid: the circulant is normal, so its singular values are the magnitudes
/// of the kernel DFT.
inline ConvNormBound conv_norm_bound(const BlurBank& bank, std::size_t rows, std::size_t cols)
{
  ConvNormBound res;
  using cplx = std::complex<double>;
  for (std::size_t b = 0; b < bank.bands(); ++b) {
    const auto& k = bank.kernel(b);
    if (k.rows > rows || k.cols > cols)
      throw std::invalid_argument("conv_norm_bound: kernel larger than image");
    double e = 0.0;
    for (double t : k.taps) e += t * t;
    res.l2_formula = std::max(res.l2_formula, std::sqrt(e));

    // Separable evaluation: first along kernel rows, then along columns.
    std::vector<cplx> partial(rows * k.cols);
    for (std::size_t fu = 0; fu < rows; ++fu)
      for (std::size_t v = 0; v < k.cols; ++v) {
        cplx s = 0.0;
        for (std::size_t u = 0; u < k.rows; ++u) {
          const double ang = -2.0 * std::numbers::pi * static_cast<double>((u * fu) % rows) /
                             static_cast<double>(rows);
          s += k.at(u, v) * cplx(std::cos(ang), std::sin(ang));
        }
        partial[fu + rows * v] = s;
      }
    for (std::size_t fv = 0; fv < cols; ++fv) {
      std::vector<cplx> tw(k.cols);
      for (std::size_t v = 0; v < k.cols; ++v) {
        const double ang = -2.0 * std::numbers::pi * static_cast<double>((v * fv) % cols) /
                           static_cast<double>(cols);
        tw[v] = cplx(std::cos(ang), std::sin(ang));
      }
      for (std::size_t fu = 0; fu < rows; ++fu) {
        cplx s = 0.0;
        for (std::size_t v = 0; v < k.cols; ++v) s += partial[fu + rows * v] * tw[v];
        res.certified = std::max(res.certified, std::abs(s));
      }
    }
  }
  return res;
}

/// Band-wise circular convolution; adjoint is circular correlation by the
/// same kernels.
inline LinearOp spatial_convolve(const BlurBank& bank, std::size_t rows, std::size_t cols)
{
  const std::size_t nk = bank.bands();
  const Shape shape{rows, cols, nk, 1};
  const double bound = conv_norm_bound(bank, rows, cols).certified;
  const std::size_t n = shape.pixels();

  // out(i, j) = sum_{u,v} K(u, v) x(i - u + au, j - v + av), indices mod size
  auto fwd = [bank, rows, cols, n](std::span<const double> x, std::span<double> y) {
    std::fill(y.begin(), y.end(), 0.0);
    for (std::size_t b = 0; b < bank.bands(); ++b) {
      const auto& k = bank.kernel(b);
      const auto xb = x.subspan(b * n, n);
      auto yb = y.subspan(b * n, n);
      for (std::size_t v = 0; v < k.cols; ++v)
        for (std::size_t u = 0; u < k.rows; ++u) {
          const double c = k.at(u, v);
          if (c == 0.0) continue;
          const std::size_t di = (rows + k.anchor_row() - u % rows) % rows;
          const std::size_t dj = (cols + k.anchor_col() - v % cols) % cols;
          for (std::size_t j = 0; j < cols; ++j) {
            const std::size_t sj = (j + dj) % cols;
            const double* src = xb.data() + rows * sj;
            double* dst = yb.data() + rows * j;
            for (std::size_t i = 0; i < rows; ++i) {
              std::size_t si = i + di;
              if (si >= rows) si -= rows;
              dst[i] += c * src[si];
            }
          }
        }
    }
  };
  auto adj = [bank, rows, cols, n](std::span<const double> y, std::span<double> x) {
    std::fill(x.begin(), x.end(), 0.0);
    for (std::size_t b = 0; b < bank.bands(); ++b) {
      const auto& k = bank.kernel(b);
      const auto yb = y.subspan(b * n, n);
      auto xb = x.subspan(b * n, n);
      for (std::size_t v = 0; v < k.cols; ++v)
        for (std::size_t u = 0; u < k.rows; ++u) {
          const double c = k.at(u, v);
          if (c == 0.0) continue;
          const std::size_t di = (rows + k.anchor_row() - u % rows) % rows;
          const std::size_t dj = (cols + k.anchor_col() - v % cols) % cols;
          // transpose of the gather above: scatter y(i, j) into x(i + di, j + dj)
          for (std::size_t j = 0; j < cols; ++j) {
            const std::size_t sj = (j + dj) % cols;
            const double* src = yb.data() + rows * j;
            double* dst = xb.data() + rows * sj;
            for (std::size_t i = 0; i < rows; ++i) {
              std::size_t si = i + di;
              if (si >= rows) si -= rows;
              dst[si] += c * src[i];
            }
          }
        }
    }
  };
  return LinearOp("conv", shape, shape, fwd, adj, bound);
}

// ---------------------------------------------------------------------------
// Decimation: keep rows/cols 0, r, 2r, ...

inline LinearOp decimate(std::size_t ratio, const Shape& in)
{
  if (ratio == 0) throw std::invalid_argument("decimate: ratio must be positive");
  if (in.rows % ratio != 0 || in.cols % ratio != 0)
    throw std::invalid_argument("decimate: ratio " + std::to_string(ratio) +
                                " does not divide " + in.str());
  const Shape out{in.rows / ratio, in.cols / ratio, in.bands, in.dirs};
  const std::size_t planes = in.bands * in.dirs;
  auto fwd = [in, out, ratio, planes](std::span<const double> x, std::span<double> y) {
    for (std::size_t b = 0; b < planes; ++b)
      for (std::size_t j = 0; j < out.cols; ++j)
        for (std::size_t i = 0; i < out.rows; ++i)
          y[i + out.rows * (j + out.cols * b)] = x[i * ratio + in.rows * (j * ratio + in.cols * b)];
  };
  auto adj = [in, out, ratio, planes](std::span<const double> y, std::span<double> x) {
    std::fill(x.begin(), x.end(), 0.0);
    for (std::size_t b = 0; b < planes; ++b)
      for (std::size_t j = 0; j < out.cols; ++j)
        for (std::size_t i = 0; i < out.rows; ++i)
          x[i * ratio + in.rows * (j * ratio + in.cols * b)] = y[i + out.rows * (j + out.cols * b)];
  };
  return LinearOp("decimate(" + std::to_string(ratio) + ")", in, out, fwd, adj, 1.0);
}

// ---------------------------------------------------------------------------
// Masking, shifting and summing over channels.

inline LinearOp mask_apply(const Mask& h)
{
  auto mul = [h](std::span<const double> x, std::span<double> y) {
    const auto w = h.weights();
    for (std::size_t i = 0; i < x.size(); ++i) y[i] = x[i] * w[i];
  };
  return LinearOp("mask", h.shape(), h.shape(), mul, mul, h.max_weight());
}

/// Injective map from source samples to positions of a target array.
class ShiftMap
{
public:
  ShiftMap(Shape source, Shape target, std::vector<std::size_t> destination)
    : source_(source), target_(target), dest_(std::move(destination))
  {
    if (dest_.size() != source_.size()) throw std::invalid_argument("ShiftMap: size mismatch");
    std::vector<bool> used(target_.size(), false);
    for (std::size_t d : dest_) {
      if (d >= target_.size()) throw std::invalid_argument("ShiftMap: target out of range");
      if (used[d]) throw std::invalid_argument("ShiftMap: map is not injective");
      used[d] = true;
    }
  }

  static ShiftMap identity(const Shape& s)
  {
    std::vector<std::size_t> d(s.size());
    for (std::size_t i = 0; i < d.size(); ++i) d[i] = i;
    return ShiftMap(s, s, std::move(d));
  }

  /// r(i, j, k) = (i, j, k) into a wider target.
  static ShiftMap embed(const Shape& s, const Shape& target)
  {
    if (target.rows < s.rows || target.cols < s.cols || target.bands < s.bands)
      throw std::invalid_argument("ShiftMap::embed: target smaller than source");
    std::vector<std::size_t> d(s.size());
    for (std::size_t k = 0; k < s.bands; ++k)
      for (std::size_t j = 0; j < s.cols; ++j)
        for (std::size_t i = 0; i < s.rows; ++i) d[s.index(i, j, k)] = target.index(i, j, k);
    return ShiftMap(s, target, std::move(d));
  }

  const Shape& source() const noexcept { return source_; }
  const Shape& target() const noexcept { return target_; }
  std::span<const std::size_t> destinations() const noexcept { return dest_; }

private:
  Shape source_;
  Shape target_;
  std::vector<std::size_t> dest_;
};

/// Single-disperser CASSI: band k is shifted right by k columns,
/// target width cols + bands - 1.
inline ShiftMap cassi_shift_map(std::size_t rows, std::size_t cols, std::size_t bands)
{
  if (rows == 0 || cols == 0 || bands == 0)
    throw std::invalid_argument("cassi_shift_map: dimensions must be positive");
  const Shape src{rows, cols, bands, 1};
  const Shape dst{rows, cols + bands - 1, bands, 1};
  std::vector<std::size_t> d(src.size());
  for (std::size_t k = 0; k < bands; ++k)
    for (std::size_t j = 0; j < cols; ++j)
      for (std::size_t i = 0; i < rows; ++i) d[src.index(i, j, k)] = dst.index(i, j + k, k);
  return ShiftMap(src, dst, std::move(d));
}

inline LinearOp shift_apply(const ShiftMap& m)
{
  auto fwd = [m](std::span<const double> x, std::span<double> y) {
    std::fill(y.begin(), y.end(), 0.0);
    const auto d = m.destinations();
    for (std::size_t s = 0; s < x.size(); ++s) y[d[s]] = x[s];
  };
  auto adj = [m](std::span<const double> y, std::span<double> x) {
    const auto d = m.destinations();
    for (std::size_t s = 0; s < x.size(); ++s) x[s] = y[d[s]];
  };
  return LinearOp("shift", m.source(), m.target(), fwd, adj, 1.0);
}

inline LinearOp sum_channels(const Shape& in)
{
  const Shape out{in.rows, in.cols, 1, 1};
  const std::size_t n = in.pixels();
  const std::size_t nk = in.bands;
  auto fwd = [n, nk](std::span<const double> x, std::span<double> y) {
    std::copy(x.begin(), x.begin() + static_cast<std::ptrdiff_t>(n), y.begin());
    for (std::size_t k = 1; k < nk; ++k)
      for (std::size_t p = 0; p < n; ++p) y[p] += x[p + n * k];
  };
  auto adj = [n, nk](std::span<const double> y, std::span<double> x) {
    for (std::size_t k = 0; k < nk; ++k)
      std::copy(y.begin(), y.end(), x.begin() + static_cast<std::ptrdiff_t>(n * k));
  };
  return LinearOp("sum", in, out, fwd, adj, std::sqrt(static_cast<double>(nk)));
}

/// sum o shift o mask. Every source sample lands on exactly one focal-plane
/// pixel, so A A* is diagonal and its largest entry gives the exact norm; the
/// smaller of that and the product bound is certified.
inline LinearOp mosaic(const Mask& h, const std::optional<ShiftMap>& shift = std::nullopt)
{
  const ShiftMap m = shift ? *shift : ShiftMap::identity(h.shape());
  if (!(m.source() == h.shape()))
    throw std::invalid_argument("mosaic: shift source " + m.source().str() +
                                " does not match mask " + h.shape().str());
  LinearOp op = compose_all({sum_channels(m.target()), shift_apply(m), mask_apply(h)});

  const std::size_t plane = m.target().pixels();
  std::vector<double> energy(plane, 0.0);
  const auto w = h.weights();
  const auto d = m.destinations();
  for (std::size_t s = 0; s < w.size(); ++s) energy[d[s] % plane] += w[s] * w[s];
  const double exact = std::sqrt(*std::max_element(energy.begin(), energy.end()));
  return op.with_norm_bound(std::min(op.norm_bound(), exact), "mosaic");
}

// ---------------------------------------------------------------------------
// Zero-phase Butterworth low-pass applied through the DFT.

namespace detail {

inline std::mutex& fftw_planner_mutex()
{
  static std::mutex m;
  return m;
}

/// r2c/c2r plan pair for one column-major rows x cols plane.
class RealFftPlan
{
public:
  RealFftPlan(std::size_t rows, std::size_t cols) : rows_(rows), cols_(cols)
  {
    const auto n0 = static_cast<int>(cols), n1 = static_cast<int>(rows);
    auto* in = static_cast<double*>(fftw_malloc(sizeof(double) * rows * cols));
    auto* out = static_cast<fftw_complex*>(fftw_malloc(sizeof(fftw_complex) * spectrum_size()));
    std::lock_guard lock(fftw_planner_mutex());
    // Column-major rows x cols is row-major cols x rows for FFTW.
    forward_ = fftw_plan_dft_r2c_2d(n0, n1, in, out, FFTW_ESTIMATE);
    backward_ = fftw_plan_dft_c2r_2d(n0, n1, out, in, FFTW_ESTIMATE);
    fftw_free(in);
    fftw_free(out);
    if (!forward_ || !backward_) throw std::runtime_error("FFTW planning failed");
  }
  RealFftPlan(const RealFftPlan&) = delete;
  RealFftPlan& operator=(const RealFftPlan&) = delete;
  ~RealFftPlan()
  {
    std::lock_guard lock(fftw_planner_mutex());
    fftw_destroy_plan(forward_);
    fftw_destroy_plan(backward_);
  }

  std::size_t half_rows() const noexcept { return rows_ / 2 + 1; }
  std::size_t spectrum_size() const noexcept { return cols_ * half_rows(); }

  /// y = IDFT(gain .* DFT(x)) for a real, even gain over the half spectrum.
  void filter(std::span<const double> x, std::span<double> y, std::span<const double> gain) const
  {
    const std::size_t n = rows_ * cols_;
    auto* buf = static_cast<double*>(fftw_malloc(sizeof(double) * n));
    auto* spec = static_cast<fftw_complex*>(fftw_malloc(sizeof(fftw_complex) * spectrum_size()));
    std::copy(x.begin(), x.end(), buf);
    fftw_execute_dft_r2c(forward_, buf, spec);
    const double scale = 1.0 / static_cast<double>(n);
    for (std::size_t s = 0; s < spectrum_size(); ++s) {
      spec[s][0] *= gain[s] * scale;
      spec[s][1] *= gain[s] * scale;
    }
    fftw_execute_dft_c2r(backward_, spec, buf);
    std::copy(buf, buf + n, y.begin());
    fftw_free(buf);
    fftw_free(spec);
  }

private:
  std::size_t rows_, cols_;
  fftw_plan forward_ = nullptr;
  fftw_plan backward_ = nullptr;
};

} // namespace detail

/// Signed DFT frequency of bin `b` out of `n`, in cycles per pixel.
inline double dft_frequency(std::size_t b, std::size_t n)
{
  const auto bi = static_cast<double>(b), ni = static_cast<double>(n);
  return (2 * b <= n ? bi : bi - ni) / ni;
}

/// |H(f)| = 1 / sqrt(1 + (f / fc)^(2 order)), fc = 1 / rho_b, f radial.
inline double butterworth_gain(double f, double rho_b, int order)
{
  return 1.0 / std::sqrt(1.0 + std::pow(f * rho_b, 2.0 * order));
}

inline LinearOp butterworth_blur(const Shape& shape, double rho_b, int order = 1)
{
  if (!(rho_b > 0.0)) throw std::invalid_argument("butterworth_blur: rho_b must be positive");
  if (order < 1) throw std::invalid_argument("butterworth_blur: order must be >= 1");
  auto plan = std::make_shared<const detail::RealFftPlan>(shape.rows, shape.cols);
  // Half spectrum laid out [col freq][row freq 0..rows/2].
  auto gain = std::make_shared<std::vector<double>>(plan->spectrum_size());
  double peak = 0.0;
  for (std::size_t c = 0; c < shape.cols; ++c)
    for (std::size_t r = 0; r < plan->half_rows(); ++r) {
      const double f = std::hypot(dft_frequency(r, shape.rows), dft_frequency(c, shape.cols));
      const double g = butterworth_gain(f, rho_b, order);
      (*gain)[r + plan->half_rows() * c] = g;
      peak = std::max(peak, g);
    }
  const std::size_t n = shape.pixels();
  const std::size_t planes = shape.bands * shape.dirs;
  auto run = [plan, gain, n, planes](std::span<const double> x, std::span<double> y) {
    for (std::size_t b = 0; b < planes; ++b)
      plan->filter(x.subspan(b * n, n), y.subspan(b * n, n), *gain);
  };
  return LinearOp("butterworth", shape, shape, run, run, peak);
}

// ---------------------------------------------------------------------------
// Noise and radiometric preprocessing.

inline std::vector<double> add_gaussian_noise(std::span<const double> y, double sigma,
                                              std::uint64_t seed)
{
  if (!(sigma >= 0.0)) throw std::invalid_argument("add_gaussian_noise: sigma must be >= 0");
  std::vector<double> out(y.begin(), y.end());
  if (sigma == 0.0) return out;
  Rng rng(seed);
  for (auto& v : out) v += sigma * rng.normal();
  return out;
}

struct SampleStats
{
  double mean = 0.0;
  double stddev = 0.0;
  std::size_t count = 0;
};

inline SampleStats support_stats(std::span<const double> y, const std::vector<bool>& support)
{
  SampleStats s;
  for (std::size_t p = 0; p < y.size(); ++p)
    if (support[p]) {
      s.mean += y[p];
      ++s.count;
    }
  if (s.count == 0) return s;
  s.mean /= static_cast<double>(s.count);
  double v = 0.0;
  for (std::size_t p = 0; p < y.size(); ++p)
    if (support[p]) v += (y[p] - s.mean) * (y[p] - s.mean);
  s.stddev = std::sqrt(v / static_cast<double>(s.count));
  return s;
}

/// Affine map of the LRI-support samples of y so that their mean and standard
/// deviation equal those of the HRI-support samples.
inline std::vector<double> equalize_lri_stats(std::span<const double> y,
                                              const std::vector<bool>& lri_support,
                                              const std::vector<bool>& hri_support)
{
  if (lri_support.size() != y.size() || hri_support.size() != y.size())
    throw std::invalid_argument("equalize_lri_stats: support size mismatch");
  const auto lri = support_stats(y, lri_support);
  const auto hri = support_stats(y, hri_support);
  if (lri.count == 0 || hri.count == 0)
    throw std::invalid_argument("equalize_lri_stats: empty LRI or HRI support");
  if (!(lri.stddev > 0.0))
    throw std::invalid_argument("equalize_lri_stats: LRI samples have zero variance");
  std::vector<double> out(y.begin(), y.end());
  const double gain = hri.stddev / lri.stddev;
  for (std::size_t p = 0; p < y.size(); ++p)
    if (lri_support[p]) out[p] = (y[p] - lri.mean) * gain + hri.mean;
  return out;
}

} // namespace mrca
