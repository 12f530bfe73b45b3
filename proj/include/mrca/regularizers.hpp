#pragma once

// Gradient operators and the metric norms g(W) applied to their output, with
// the proximal operators of the Fenchel conjugates used by the dual update.
//
// A gradient field W has shape rows x cols x bands x dirs; the per-pixel block
// W_ij:: is the bands x dirs matrix of its gradients.

#include <Eigen/Dense>
#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "mrca/linear_op.hpp"
#include "mrca/tensor.hpp"

namespace mrca {

struct GradientField
{
  Shape shape;
  std::vector<double> values;

  GradientField(Shape s, std::vector<double> v) : shape(s), values(std::move(v))
  {
    if (values.size() != shape.size()) throw std::invalid_argument("GradientField: size mismatch");
    if (!all_finite(values)) throw std::invalid_argument("GradientField: non-finite entry");
  }
};

enum class TvBoundary
{
  zero,      // samples outside the image are zero
  replicate, // no difference across the first row / column
};

/// |L|_op <= sqrt(8) for two first-order differences.
inline constexpr double tv_norm_bound() { return 2.8284271247461903; }

/// Forward differences along rows (dir 0) and columns (dir 1).
inline LinearOp tv_operator(const Shape& image, TvBoundary boundary = TvBoundary::zero)
{
  if (image.dirs != 1) throw std::invalid_argument("tv_operator: image must have dirs == 1");
  const Shape field{image.rows, image.cols, image.bands, 2};
  const std::size_t rows = image.rows, cols = image.cols, nk = image.bands;
  const std::size_t plane = rows * cols, vol = plane * nk;
  const bool zero_edge = boundary == TvBoundary::zero;

  auto fwd = [=](std::span<const double> x, std::span<double> w) {
    for (std::size_t k = 0; k < nk; ++k)
      for (std::size_t j = 0; j < cols; ++j)
        for (std::size_t i = 0; i < rows; ++i) {
          const std::size_t p = i + rows * j + plane * k;
          const double up = i > 0 ? x[p - 1] : (zero_edge ? 0.0 : x[p]);
          const double left = j > 0 ? x[p - rows] : (zero_edge ? 0.0 : x[p]);
          w[p] = x[p] - up;
          w[p + vol] = x[p] - left;
        }
  };
  // Negative divergence matching the boundary handling of fwd.
  auto adj = [=](std::span<const double> w, std::span<double> x) {
    for (std::size_t k = 0; k < nk; ++k)
      for (std::size_t j = 0; j < cols; ++j)
        for (std::size_t i = 0; i < rows; ++i) {
          const std::size_t p = i + rows * j + plane * k;
          double v = 0.0;
          if (zero_edge || i > 0) v += w[p];
          if (i + 1 < rows) v -= w[p + 1];
          if (zero_edge || j > 0) v += w[p + vol];
          if (j + 1 < cols) v -= w[p + vol + rows];
          x[p] = v;
        }
  };
  return LinearOp("tv", image, field, fwd, adj, tv_norm_bound());
}

inline GradientField tv_forward(const DataCube& x, TvBoundary boundary = TvBoundary::zero)
{
  const auto op = tv_operator(x.shape(), boundary);
  return GradientField(op.output().shape(), op.apply(x.samples()));
}

inline DataCube tv_adjoint(const GradientField& w, double dynamic_range = 1.0,
                           TvBoundary boundary = TvBoundary::zero)
{
  if (w.shape.dirs != 2) throw std::invalid_argument("tv_adjoint: field must have 2 directions");
  const Shape image{w.shape.rows, w.shape.cols, w.shape.bands, 1};
  const auto op = tv_operator(image, boundary);
  return DataCube(image, op.adjoint(w.values), dynamic_range);
}

// ---------------------------------------------------------------------------

enum class NormKind
{
  l221, // sum over pixels of the Frobenius norm of the bands x dirs block
  l111, // sum of absolute values
  s1l1, // sum over pixels of the nuclear norm of the block
};

inline NormKind parse_norm(const std::string& s)
{
  if (s == "l221") return NormKind::l221;
  if (s == "l111") return NormKind::l111;
  if (s == "s1l1") return NormKind::s1l1;
  throw std::invalid_argument("unknown norm '" + s + "' (l221, l111, s1l1)");
}

inline std::string norm_name(NormKind k)
{
  switch (k) {
  case NormKind::l221: return "l221";
  case NormKind::l111: return "l111";
  case NormKind::s1l1: return "s1l1";
  }
  return "?";
}

/// Singular values and right singular vectors of an n x 2 matrix from the
/// 2 x 2 Gram matrix. s2 comes from the sum of squared 2 x 2 minors
/// (= det of the Gram matrix) to avoid cancellation.
struct TwoColumnSvd
{
  double s1 = 0.0, s2 = 0.0;    // s1 >= s2 >= 0
  std::array<double, 2> v1{1.0, 0.0};
  std::array<double, 2> v2{0.0, 1.0};
};

inline TwoColumnSvd two_column_svd(std::span<const double> c0, std::span<const double> c1)
{
  double a = 0.0, b = 0.0, d = 0.0, minors = 0.0;
  for (std::size_t r = 0; r < c0.size(); ++r) {
    a += c0[r] * c0[r];
    b += c0[r] * c1[r];
    d += c1[r] * c1[r];
    for (std::size_t s = r + 1; s < c0.size(); ++s) {
      const double m = c0[r] * c1[s] - c0[s] * c1[r];
      minors += m * m;
    }
  }
  TwoColumnSvd out;
  const double half_gap = 0.5 * (a - d);
  const double radius = std::hypot(half_gap, b);
  const double top = 0.5 * (a + d) + radius;
  out.s1 = std::sqrt(top);
  out.s2 = out.s1 > 0.0 ? std::sqrt(minors) / out.s1 : 0.0;
  const double theta = 0.5 * std::atan2(2.0 * b, a - d);
  out.v1 = {std::cos(theta), std::sin(theta)};
  out.v2 = {-std::sin(theta), std::cos(theta)};
  return out;
}

namespace detail {

inline void gather_block(std::span<const double> w, const Shape& s, std::size_t p,
                         std::vector<double>& block)
{
  const std::size_t plane = s.pixels();
  block.resize(s.bands * s.dirs);
  for (std::size_t e = 0; e < block.size(); ++e) block[e] = w[p + plane * e];
}

inline void scatter_block(std::span<double> w, const Shape& s, std::size_t p,
                          const std::vector<double>& block)
{
  const std::size_t plane = s.pixels();
  for (std::size_t e = 0; e < block.size(); ++e) w[p + plane * e] = block[e];
}

inline Eigen::Map<const Eigen::MatrixXd> block_matrix(const std::vector<double>& block,
                                                      const Shape& s)
{
  // block[k + bands * m] is column-major bands x dirs
  return Eigen::Map<const Eigen::MatrixXd>(block.data(), static_cast<Eigen::Index>(s.bands),
                                           static_cast<Eigen::Index>(s.dirs));
}

inline double nuclear_norm(const std::vector<double>& block, const Shape& s)
{
  if (s.dirs == 1) return norm2(block);
  if (s.dirs == 2) {
    const std::span<const double> all(block);
    const auto svd = two_column_svd(all.subspan(0, s.bands), all.subspan(s.bands, s.bands));
    return svd.s1 + svd.s2;
  }
  Eigen::JacobiSVD<Eigen::MatrixXd> svd(block_matrix(block, s));
  return svd.singularValues().sum();
}

/// Blocks whose recomputed norm exceeds the radius by less than this relative
/// margin count as inside, so that projecting a projected block is a no-op.
inline constexpr double kBallSlack = 16.0 * std::numeric_limits<double>::epsilon();

/// Projection of one block onto the spectral-norm ball of radius lambda.
inline void project_spectral_ball(std::vector<double>& block, const Shape& s, double lambda)
{
  if (s.dirs == 1) {
    const double n = norm2(block);
    if (n > lambda * (1.0 + kBallSlack))
      for (auto& v : block) v *= lambda / n;
    return;
  }
  // M <- M V diag(min(1, lambda / s_i)) V^T
  if (s.dirs == 2) {
    const std::size_t nk = s.bands;
    std::span<const double> all(block);
    const auto svd = two_column_svd(all.subspan(0, nk), all.subspan(nk, nk));
    if (svd.s1 <= lambda * (1.0 + kBallSlack)) return;
    if (svd.s2 > lambda) {
      // Both values clipped: lambda times the polar factor M G^(-1/2), with the
      // closed-form 2x2 square root sqrt(G) = (G + sqrt(det G) I) / sqrt(tr G + 2 sqrt(det G)).
      // No eigenvectors are involved, so nearly equal singular values are harmless.
      double a = 0.0, b = 0.0, d = 0.0, det = 0.0;
      for (std::size_t r = 0; r < nk; ++r) {
        a += block[r] * block[r];
        b += block[r] * block[r + nk];
        d += block[r + nk] * block[r + nk];
        for (std::size_t q = r + 1; q < nk; ++q) {
          const double m = block[r] * block[q + nk] - block[q] * block[r + nk];
          det += m * m;
        }
      }
      const double sd = std::sqrt(det);
      const double scale = lambda / (std::sqrt(a + d + 2.0 * sd) * sd);
      const double i00 = (d + sd) * scale, i01 = -b * scale, i11 = (a + sd) * scale;
      for (std::size_t r = 0; r < nk; ++r) {
        const double m0 = block[r], m1 = block[r + nk];
        block[r] = m0 * i00 + m1 * i01;
        block[r + nk] = m0 * i01 + m1 * i11;
      }
      return;
    }
    // Only s1 clipped: lambda u1 v1^T + (M v2) v2^T with u1 = M v1 / |M v1|.
    double n1 = 0.0;
    for (std::size_t r = 0; r < nk; ++r) {
      const double t = block[r] * svd.v1[0] + block[r + nk] * svd.v1[1];
      n1 += t * t;
    }
    const double g1 = lambda / std::sqrt(n1);
    for (std::size_t r = 0; r < nk; ++r) {
      const double m0 = block[r], m1 = block[r + nk];
      const double p1 = g1 * (m0 * svd.v1[0] + m1 * svd.v1[1]);
      const double p2 = m0 * svd.v2[0] + m1 * svd.v2[1];
      block[r] = p1 * svd.v1[0] + p2 * svd.v2[0];
      block[r + nk] = p1 * svd.v1[1] + p2 * svd.v2[1];
    }
    return;
  }
  const Eigen::MatrixXd m = block_matrix(block, s);
  Eigen::JacobiSVD<Eigen::MatrixXd> svd(m, Eigen::ComputeThinU | Eigen::ComputeThinV);
  Eigen::VectorXd sv = svd.singularValues();
  if (sv.size() == 0 || sv(0) <= lambda * (1.0 + kBallSlack)) return;
  for (Eigen::Index i = 0; i < sv.size(); ++i) sv(i) = std::min(sv(i), lambda);
  const Eigen::MatrixXd p = svd.matrixU() * sv.asDiagonal() * svd.matrixV().transpose();
  for (std::size_t e = 0; e < block.size(); ++e) block[e] = p.data()[e];
}

} // namespace detail

inline double g_eval(NormKind kind, std::span<const double> w, const Shape& s)
{
  if (w.size() != s.size()) throw std::invalid_argument("g_eval: size mismatch");
  double total = 0.0;
  if (kind == NormKind::l111) {
    for (double v : w) total += std::abs(v);
    return total;
  }
  std::vector<double> block;
  for (std::size_t p = 0; p < s.pixels(); ++p) {
    detail::gather_block(w, s, p, block);
    total += kind == NormKind::l221 ? norm2(block) : detail::nuclear_norm(block, s);
  }
  return total;
}

inline double g_eval(NormKind kind, const GradientField& w) { return g_eval(kind, w.values, w.shape); }

/// prox of (lambda g)^*: projection onto the dual-norm ball of radius lambda,
/// pixel by pixel (l2 ball, l-inf box, spectral-norm ball).
inline void prox_conj_inplace(NormKind kind, std::span<double> w, const Shape& s, double lambda)
{
  if (!(lambda > 0.0)) throw std::invalid_argument("prox_conj: lambda must be positive");
  if (w.size() != s.size()) throw std::invalid_argument("prox_conj: size mismatch");
  if (kind == NormKind::l111) {
    for (auto& v : w) v = std::clamp(v, -lambda, lambda);
    return;
  }
  const std::size_t plane = s.pixels(), depth = s.bands * s.dirs;
  if (kind == NormKind::l221) {
    for (std::size_t p = 0; p < plane; ++p) {
      double e = 0.0;
      for (std::size_t d = 0; d < depth; ++d) e += w[p + plane * d] * w[p + plane * d];
      const double scale = std::sqrt(e) / lambda;
      if (scale > 1.0 + detail::kBallSlack)
        for (std::size_t d = 0; d < depth; ++d) w[p + plane * d] /= scale;
    }
    return;
  }
  std::vector<double> block;
  for (std::size_t p = 0; p < plane; ++p) {
    detail::gather_block(w, s, p, block);
    detail::project_spectral_ball(block, s, lambda);
    detail::scatter_block(w, s, p, block);
  }
}

inline GradientField prox_conj(NormKind kind, const GradientField& w, double lambda)
{
  std::vector<double> out = w.values;
  prox_conj_inplace(kind, out, w.shape, lambda);
  return GradientField(w.shape, std::move(out));
}

} // namespace mrca
