#pragma once

// Full-reference quality indices and the report row they feed.

#include "json.hpp"  // nlohmann::json, vendored single header

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <ostream>
#include <stdexcept>
#include <string>
#include <vector>

#include "mrca/keyvalue.hpp"
#include "mrca/tensor.hpp"

namespace mrca {

namespace detail {

inline void require_same_shape(const DataCube& ref, const DataCube& est, const char* what)
{
  if (!(ref.shape() == est.shape()))
    throw std::invalid_argument(std::string(what) + ": shape mismatch " + ref.shape().str() +
                                " vs " + est.shape().str());
}

} // namespace detail

/// 10 log10(rho^2 / MSE), rho the declared dynamic range of ref.
inline double psnr(const DataCube& ref, const DataCube& est)
{
  detail::require_same_shape(ref, est, "psnr");
  double se = 0.0;
  const auto a = ref.samples(), b = est.samples();
  for (std::size_t i = 0; i < a.size(); ++i) se += (a[i] - b[i]) * (a[i] - b[i]);
  if (se == 0.0) return std::numeric_limits<double>::infinity();
  const double mse = se / static_cast<double>(a.size());
  const double rho = ref.dynamic_range();
  return 10.0 * std::log10(rho * rho / mse);
}

enum class SamZeroPolicy
{
  skip,       // pixels with a zero spectrum are left out of the mean
  count_zero, // they count as 0 degrees
};

/// Mean spectral angle in degrees.
inline double sam(const DataCube& ref, const DataCube& est,
                  SamZeroPolicy zeros = SamZeroPolicy::skip)
{
  detail::require_same_shape(ref, est, "sam");
  if (ref.bands() < 2) throw std::invalid_argument("sam: needs at least 2 bands");
  const std::size_t n = ref.shape().pixels(), nk = ref.bands();
  const auto a = ref.samples(), b = est.samples();
  double total = 0.0;
  std::size_t counted = 0;
  for (std::size_t p = 0; p < n; ++p) {
    double ab = 0.0, aa = 0.0, bb = 0.0;
    for (std::size_t k = 0; k < nk; ++k) {
      const double x = a[p + n * k], y = b[p + n * k];
      ab += x * y;
      aa += x * x;
      bb += y * y;
    }
    if (aa == 0.0 || bb == 0.0) {
      if (zeros == SamZeroPolicy::count_zero) ++counted;
      continue;
    }
    const double c = std::clamp(ab / (std::sqrt(aa) * std::sqrt(bb)), -1.0, 1.0);
    if (c > 0.999) {
      // acos is ill-conditioned near 1: atan2(|a ^ b|, a.b), with |a ^ b|^2
      // summed over the 2x2 minors to avoid cancellation.
      double minors = 0.0;
      for (std::size_t k = 0; k < nk; ++k)
        for (std::size_t l = k + 1; l < nk; ++l) {
          const double m = a[p + n * k] * b[p + n * l] - a[p + n * l] * b[p + n * k];
          minors += m * m;
        }
      total += std::atan2(std::sqrt(minors), ab);
    } else {
      total += std::acos(c);
    }
    ++counted;
  }
  if (counted == 0) return 0.0;
  return total / static_cast<double>(counted) * 180.0 / std::numbers::pi;
}

namespace detail {

inline std::vector<double> ssim_window()
{
  constexpr int r = 5;
  constexpr double s = 1.5;
  std::vector<double> g(2 * r + 1);
  double t = 0.0;
  for (int u = -r; u <= r; ++u) t += g[u + r] = std::exp(-(u * u) / (2.0 * s * s));
  for (auto& v : g) v /= t;
  return g;
}

/// Separable 11x11 Gaussian filter, "valid" region only.
inline std::vector<double> filter_valid(std::span<const double> plane, std::size_t rows,
                                        std::size_t cols, const std::vector<double>& g)
{
  const std::size_t w = g.size();
  const std::size_t vr = rows - w + 1, vc = cols - w + 1;
  std::vector<double> tmp(vr * cols, 0.0), out(vr * vc, 0.0);
  for (std::size_t j = 0; j < cols; ++j)
    for (std::size_t i = 0; i < vr; ++i) {
      double s = 0.0;
      for (std::size_t u = 0; u < w; ++u) s += g[u] * plane[i + u + rows * j];
      tmp[i + vr * j] = s;
    }
  for (std::size_t j = 0; j < vc; ++j)
    for (std::size_t i = 0; i < vr; ++i) {
      double s = 0.0;
      for (std::size_t v = 0; v < w; ++v) s += g[v] * tmp[i + vr * (j + v)];
      out[i + vr * j] = s;
    }
  return out;
}

} // namespace detail

/// Mean SSIM over bands (Gaussian 11x11 window, sigma 1.5, K1 = 0.01, K2 = 0.03).
inline double ssim(const DataCube& ref, const DataCube& est)
{
  detail::require_same_shape(ref, est, "ssim");
  constexpr std::size_t win = 11;
  if (ref.rows() < win || ref.cols() < win)
    throw std::invalid_argument("ssim: image " + ref.shape().str() +
                                " is smaller than the 11x11 window");
  const double rho = ref.dynamic_range();
  const double c1 = (0.01 * rho) * (0.01 * rho), c2 = (0.03 * rho) * (0.03 * rho);
  const auto g = detail::ssim_window();
  const std::size_t rows = ref.rows(), cols = ref.cols(), n = rows * cols;
  std::vector<double> xx(n), yy(n), xy(n);
  double total = 0.0;
  for (std::size_t k = 0; k < ref.bands(); ++k) {
    const auto x = ref.band(k), y = est.band(k);
    for (std::size_t p = 0; p < n; ++p) {
      xx[p] = x[p] * x[p];
      yy[p] = y[p] * y[p];
      xy[p] = x[p] * y[p];
    }
    const auto mx = detail::filter_valid(x, rows, cols, g);
    const auto my = detail::filter_valid(y, rows, cols, g);
    const auto sxx = detail::filter_valid(xx, rows, cols, g);
    const auto syy = detail::filter_valid(yy, rows, cols, g);
    const auto sxy = detail::filter_valid(xy, rows, cols, g);
    double band_sum = 0.0;
    for (std::size_t p = 0; p < mx.size(); ++p) {
      const double vx = sxx[p] - mx[p] * mx[p];
      const double vy = syy[p] - my[p] * my[p];
      const double cxy = sxy[p] - mx[p] * my[p];
      band_sum += ((2.0 * mx[p] * my[p] + c1) * (2.0 * cxy + c2)) /
                  ((mx[p] * mx[p] + my[p] * my[p] + c1) * (vx + vy + c2));
    }
    total += band_sum / static_cast<double>(mx.size());
  }
  return total / static_cast<double>(ref.bands());
}

// ---------------------------------------------------------------------------

struct QualityReport
{
  std::string dataset;
  std::string formation;
  std::string reconstruction;
  double lambda_bar = 0.0;
  double ssim = 0.0;
  double psnr = 0.0;
  double sam = 0.0;
  double compression_ratio = 1.0;
  std::string notes;  // free-form, e.g. sweep-point parameters

  static std::string csv_header()
  {
    return "dataset,formation,reconstruction,lambda_bar,ssim,psnr,sam,compression_ratio,notes";
  }

  static std::string format_metric(double v)
  {
    if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
    if (std::isnan(v)) return "nan";
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.6f", v);
    return buf;
  }

  std::string csv_row() const
  {
    auto field = [](const std::string& s) {
      if (s.find_first_of(",\"\n") == std::string::npos) return s;
      std::string q = "\"";
      for (char c : s) q += c == '"' ? std::string("\"\"") : std::string(1, c);
      return q + "\"";
    };
    return field(dataset) + "," + field(formation) + "," + field(reconstruction) + "," +
           format_double(lambda_bar) + "," + format_metric(ssim) + "," + format_metric(psnr) +
           "," + format_metric(sam) + "," + format_metric(compression_ratio) + "," + field(notes);
  }

  /// JSON has no infinity literal; non-finite metrics become strings.
  nlohmann::ordered_json json() const
  {
    auto metric = [](double v) -> nlohmann::ordered_json {
      if (std::isfinite(v)) return v;
      return format_metric(v);
    };
    nlohmann::ordered_json j;
    j["dataset"] = dataset;
    j["formation"] = formation;
    j["reconstruction"] = reconstruction;
    j["lambda_bar"] = lambda_bar;
    j["ssim"] = metric(ssim);
    j["psnr"] = metric(psnr);
    j["sam"] = metric(sam);
    j["compression_ratio"] = metric(compression_ratio);
    if (!notes.empty()) j["notes"] = notes;
    return j;
  }
};

enum class ReportFormat
{
  csv,
  json,
};

inline ReportFormat parse_report_format(const std::string& s)
{
  if (s == "csv") return ReportFormat::csv;
  if (s == "json") return ReportFormat::json;
  throw std::invalid_argument("unknown report format '" + s + "' (csv, json)");
}

inline std::string format_reports(const std::vector<QualityReport>& rows, ReportFormat f)
{
  if (f == ReportFormat::csv) {
    std::string out = QualityReport::csv_header() + "\n";
    for (const auto& r : rows) out += r.csv_row() + "\n";
    return out;
  }
  auto arr = nlohmann::ordered_json::array();
  for (const auto& r : rows) arr.push_back(r.json());
  return arr.dump(2) + "\n";
}

/// All three indices of est against ref.
inline QualityReport evaluate_quality(const DataCube& ref, const DataCube& est)
{
  QualityReport r;
  r.psnr = psnr(ref, est);
  r.sam = ref.bands() >= 2 ? sam(ref, est) : 0.0;
  r.ssim = ssim(ref, est);
  return r;
}

} // namespace mrca
