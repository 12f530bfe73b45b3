#pragma once

// Validation pipeline: reference -> simulated acquisition -> reconstruction
// -> quality report, plus the synthetic scene generator, reduced-resolution
// reference preparation, and a simple interpolating baseline.

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <future>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "mrca/formation.hpp"
#include "mrca/io.hpp"
#include "mrca/metrics.hpp"
#include "mrca/presets.hpp"
#include "mrca/random.hpp"
#include "mrca/regularizers.hpp"
#include "mrca/solver.hpp"
#include "mrca/tensor.hpp"

namespace mrca {

/// FNV-1a over the IEEE-754 bytes of the samples.
inline std::uint64_t checksum(std::span<const double> v)
{
  std::uint64_t h = 0xcbf29ce484222325ull;
  for (double d : v) {
    std::uint64_t bits = 0;
    std::memcpy(&bits, &d, sizeof bits);
    for (int b = 0; b < 8; ++b) {
      h ^= (bits >> (8 * b)) & 0xffu;
      h *= 0x100000001b3ull;
    }
  }
  return h;
}

// ---------------------------------------------------------------------------
// Synthetic scenes

struct SceneParams
{
  std::size_t rows = 64;
  std::size_t cols = 64;
  std::size_t bands = 4;
  double dynamic_range = 1.0;
  std::size_t regions = 6;  // constant rectangles and disks
  std::size_t lines = 3;    // 1-px lines
};

struct SyntheticScene
{
  DataCube cube;
  // Per-pixel content: 0 = ramp background, r >= 1 = constant region r, -1 = line.
  std::vector<int> labels;
};

inline SyntheticScene synth_scene_detailed(const SceneParams& p, std::uint64_t seed)
{
  if (p.rows == 0 || p.cols == 0 || p.bands == 0)
    throw std::invalid_argument("synth_scene: dimensions must be positive");
  if (!(p.dynamic_range > 0.0)) throw std::invalid_argument("synth_scene: rho must be positive");
  Rng rng(seed);
  const std::size_t n = p.rows * p.cols, nk = p.bands;

  auto spectrum = [&](double lo, double hi) {
    std::vector<double> s(nk);
    // smooth-ish spectra: random endpoints, linear in between, small wiggle
    const double a = rng.uniform(lo, hi), b = rng.uniform(lo, hi);
    for (std::size_t k = 0; k < nk; ++k) {
      const double t = nk > 1 ? static_cast<double>(k) / static_cast<double>(nk - 1) : 0.0;
      s[k] = std::clamp(a + (b - a) * t + rng.uniform(-0.05, 0.05), lo, hi);
    }
    return s;
  };

  std::vector<int> labels(n, 0);
  std::vector<std::vector<double>> spectra{spectrum(0.2, 0.6)};  // background
  for (std::size_t r = 0; r < p.regions; ++r) {
    spectra.push_back(spectrum(0.05, 0.9));
    const int id = static_cast<int>(r + 1);
    const double ci = rng.uniform(0.15, 0.85) * static_cast<double>(p.rows);
    const double cj = rng.uniform(0.15, 0.85) * static_cast<double>(p.cols);
    const double hi = rng.uniform(0.08, 0.22) * static_cast<double>(p.rows);
    const double hj = rng.uniform(0.08, 0.22) * static_cast<double>(p.cols);
    const bool disk = rng.uniform() < 0.5;
    for (std::size_t j = 0; j < p.cols; ++j)
      for (std::size_t i = 0; i < p.rows; ++i) {
        const double di = (static_cast<double>(i) - ci) / hi;
        const double dj = (static_cast<double>(j) - cj) / hj;
        const bool inside = disk ? di * di + dj * dj <= 1.0 : std::abs(di) <= 1.0 && std::abs(dj) <= 1.0;
        if (inside) labels[i + p.rows * j] = id;
      }
  }
  const auto line_spectrum = spectrum(0.85, 1.0);
  for (std::size_t l = 0; l < p.lines; ++l) {
    const bool horizontal = l % 2 == 0;
    const std::size_t extent = horizontal ? p.rows : p.cols;
    const std::size_t at = rng.below(extent);
    const std::size_t len = horizontal ? p.cols : p.rows;
    const std::size_t from = rng.below(len / 2 + 1);
    const std::size_t to = std::min(len, from + len / 2);
    for (std::size_t t = from; t < to; ++t) {
      const std::size_t i = horizontal ? at : t, j = horizontal ? t : at;
      labels[i + p.rows * j] = -1;
    }
  }

  std::vector<double> x(n * nk);
  const double rho = p.dynamic_range;
  for (std::size_t j = 0; j < p.cols; ++j)
    for (std::size_t i = 0; i < p.rows; ++i) {
      const std::size_t px = i + p.rows * j;
      const int id = labels[px];
      // background ramp along the diagonal, factor in [0.4, 1]
      const double ramp = 0.4 + 0.6 * (static_cast<double>(i + j) /
                                       static_cast<double>(p.rows + p.cols - 1));
      for (std::size_t k = 0; k < nk; ++k) {
        double v = 0.0;
        if (id == -1)
          v = line_spectrum[k];
        else if (id == 0)
          v = spectra[0][k] * ramp;
        else
          v = spectra[static_cast<std::size_t>(id)][k];
        x[px + n * k] = std::clamp(v, 0.0, 1.0) * rho;
      }
    }
  return {DataCube(p.rows, p.cols, nk, std::move(x), rho), std::move(labels)};
}

inline DataCube synth_scene(const SceneParams& p, std::uint64_t seed)
{
  return synth_scene_detailed(p, seed).cube;
}

// ---------------------------------------------------------------------------
// Reduced-resolution references

struct WaldBundle
{
  DataCube reference;  // LRI at its native resolution
  DataCube hri;        // HRI degraded to the LRI scale
};

/// Degrades a high-resolution HRI by `ratio` (blur then decimate) so that the
/// LRI at its native resolution can serve as ground truth. The default blur
/// is the MTF-matched Gaussian; ratio 1 defaults to no blur.
inline WaldBundle wald_reduce(const DataCube& hri_highres, const DataCube& lri, std::size_t ratio,
                              std::optional<BlurBank> blur = std::nullopt)
{
  if (ratio == 0) throw std::invalid_argument("wald_reduce: ratio must be positive");
  const Shape hs = hri_highres.shape();
  if (hs.rows % ratio != 0 || hs.cols % ratio != 0)
    throw std::invalid_argument("wald_reduce: ratio " + std::to_string(ratio) + " does not divide " +
                                hs.str());
  if (lri.rows() * ratio != hs.rows || lri.cols() * ratio != hs.cols)
    throw std::invalid_argument("wald_reduce: LRI " + lri.shape().str() + " is not HRI " + hs.str() +
                                " reduced by " + std::to_string(ratio));
  BlurBank bank = blur ? *blur
                       : (ratio == 1 ? BlurBank::delta(hs.bands)
                                     : BlurBank::mtf_gaussian(hs.bands, static_cast<double>(ratio),
                                                              0.3, std::min(hs.rows, hs.cols)));
  if (bank.bands() != hs.bands)
    throw std::invalid_argument("wald_reduce: blur bank has the wrong number of bands");
  const LinearOp degrade = compose(decimate(ratio, hs), spatial_convolve(bank, hs.rows, hs.cols));
  const Shape out = degrade.output().shape();
  return {lri, DataCube(out, degrade.apply(hri_highres.samples()), hri_highres.dynamic_range(),
                        hri_highres.band_labels())};
}

// ---------------------------------------------------------------------------
// Baseline reconstruction

namespace detail {

/// Keys cubic (a = -0.5) weight.
inline double cubic_weight(double t)
{
  t = std::abs(t);
  if (t < 1.0) return (1.5 * t - 2.5) * t * t + 1.0;
  if (t < 2.0) return ((-0.5 * t + 2.5) * t - 4.0) * t + 2.0;
  return 0.0;
}

/// Periodic separable cubic upsampling of one plane; sample (i, j) of the
/// input lands on (ratio i, ratio j) of the output.
inline std::vector<double> cubic_upsample(std::span<const double> in, std::size_t rows,
                                          std::size_t cols, std::size_t ratio)
{
  const std::size_t orows = rows * ratio, ocols = cols * ratio;
  auto weights = [ratio](std::size_t o, std::size_t n, std::array<std::size_t, 4>& idx,
                         std::array<double, 4>& w) {
    const std::size_t base = o / ratio;
    const double frac = static_cast<double>(o % ratio) / static_cast<double>(ratio);
    for (int t = 0; t < 4; ++t) {
      const long long src = static_cast<long long>(base) + t - 1;
      const long long nn = static_cast<long long>(n);
      idx[t] = static_cast<std::size_t>(((src % nn) + nn) % nn);
      w[t] = cubic_weight(frac - static_cast<double>(t - 1));
    }
  };
  std::vector<double> tmp(orows * cols), out(orows * ocols);
  std::array<std::size_t, 4> idx{};
  std::array<double, 4> w{};
  for (std::size_t oi = 0; oi < orows; ++oi) {
    weights(oi, rows, idx, w);
    for (std::size_t j = 0; j < cols; ++j) {
      double s = 0.0;
      for (int t = 0; t < 4; ++t) s += w[t] * in[idx[t] + rows * j];
      tmp[oi + orows * j] = s;
    }
  }
  for (std::size_t oj = 0; oj < ocols; ++oj) {
    weights(oj, cols, idx, w);
    for (std::size_t oi = 0; oi < orows; ++oi) {
      double s = 0.0;
      for (int t = 0; t < 4; ++t) s += w[t] * tmp[oi + orows * idx[t]];
      out[oi + orows * oj] = s;
    }
  }
  return out;
}

/// Gaussian-normalized interpolation of sparse samples in one plane.
inline std::vector<double> normalized_interpolation(std::span<const double> values,
                                                    std::span<const double> indicator,
                                                    std::size_t rows, std::size_t cols,
                                                    double sigma)
{
  const std::size_t n = rows * cols;
  const auto conv = spatial_convolve(BlurBank::uniform(gaussian_kernel(sigma, std::min(rows, cols)), 1),
                                     rows, cols);
  std::vector<double> weighted(n);
  double sum = 0.0, count = 0.0;
  for (std::size_t p = 0; p < n; ++p) {
    weighted[p] = values[p] * indicator[p];
    sum += weighted[p];
    count += indicator[p];
  }
  const double fallback = sum / count;
  const auto num = conv.apply(weighted);
  const auto den = conv.apply(indicator);
  std::vector<double> out(n);
  for (std::size_t p = 0; p < n; ++p) {
    // exact samples are kept; elsewhere the normalized average
    if (indicator[p] > 0.0)
      out[p] = values[p];
    else
      out[p] = den[p] > 1e-12 ? num[p] / den[p] : fallback;
  }
  return out;
}

} // namespace detail

/// Per-channel interpolation from the observation. Mosaic formations: every
/// channel's samples are recovered through the pseudo-inverse of the LRI
/// mosaic and filled by normalized Gaussian interpolation. Stacked
/// formations: cubic upsampling of the LRI with a common offset so that the
/// spectral average matches the HRI mean.
inline DataCube baseline_reconstruct(std::span<const double> y, const Formation& f,
                                     double dynamic_range = 1.0)
{
  if (y.size() != f.op.output().size())
    throw std::invalid_argument("baseline: observation has " + std::to_string(y.size()) +
                                " samples, formation produces " +
                                std::to_string(f.op.output().size()));
  const Shape img = f.image;
  const std::size_t rows = img.rows, cols = img.cols, nk = img.bands, n = img.pixels();

  if (f.preset.name == "identity")
    return DataCube(img, std::vector<double>(y.begin(), y.end()), dynamic_range);

  if (f.preset.name == "multires") {
    const Domain& out = f.op.output();
    const Shape ps = out.parts()[0], ls = out.parts()[1];
    const auto pan = y.subspan(0, ps.size());
    const auto lri = y.subspan(out.offset(1), ls.size());
    const std::size_t ratio = f.preset.ratio;
    std::vector<double> x(img.size());
    for (std::size_t k = 0; k < nk; ++k) {
      const auto up = detail::cubic_upsample(lri.subspan(k * ls.pixels(), ls.pixels()), ls.rows,
                                             ls.cols, ratio);
      std::copy(up.begin(), up.end(), x.begin() + static_cast<std::ptrdiff_t>(k * n));
    }
    // The first HRI channel is the band average.
    double pan_mean = 0.0, model_mean = 0.0;
    for (std::size_t p = 0; p < n; ++p) pan_mean += pan[p];
    for (std::size_t k = 0; k < nk; ++k)
      for (std::size_t p = 0; p < n; ++p) model_mean += x[p + n * k] / static_cast<double>(nk);
    const double offset = (pan_mean - model_mean) / static_cast<double>(n);
    for (auto& v : x) v += offset;
    return DataCube(img, std::move(x), dynamic_range);
  }

  if (!f.lri_mosaic || !f.lri_mask)
    throw std::invalid_argument("baseline: formation '" + f.preset.name + "' exposes no mask");
  const LinearOp& am = *f.lri_mosaic;
  const auto h = f.lri_mask->weights();
  if (am.output().size() != y.size())
    throw std::invalid_argument("baseline: LRI mosaic does not match the observation");
  // A_m^+ y = A_m^T (A_m A_m^T)^-1 y with A_m A_m^T = diag(A_m h)
  const auto energy = am.apply(h);
  std::vector<double> z(y.size(), 0.0);
  for (std::size_t t = 0; t < y.size(); ++t)
    if (energy[t] > 0.0) z[t] = y[t] / energy[t];
  const auto sparse = am.adjoint(z);

  std::vector<double> x(img.size());
  for (std::size_t k = 0; k < nk; ++k) {
    std::vector<double> ind(n), vals(n);
    std::size_t count = 0;
    for (std::size_t p = 0; p < n; ++p) {
      if (h[p + n * k] > 0.0) {
        ind[p] = 1.0;
        vals[p] = sparse[p + n * k] / h[p + n * k];
        ++count;
      }
    }
    if (count == 0)
      throw std::invalid_argument("baseline: channel " + std::to_string(k) + " has no samples");
    const double spacing = std::sqrt(static_cast<double>(n) / static_cast<double>(count));
    const auto filled =
        count == n ? vals : detail::normalized_interpolation(vals, ind, rows, cols, 0.5 * spacing);
    std::copy(filled.begin(), filled.end(), x.begin() + static_cast<std::ptrdiff_t>(k * n));
  }
  return DataCube(img, std::move(x), dynamic_range);
}

// ---------------------------------------------------------------------------
// Pipeline

struct PipelineSpec
{
  std::string dataset = "synthetic";  // "synthetic" or a datacube path
  std::uint64_t scene_seed = 0;
  SceneParams scene;                  // dims are taken from the formation
  FormationPreset formation;
  std::string reconstruction = "v1";  // v1 | v2 | baseline
  double lambda_bar = 1e-3;
  std::size_t iterations = 250;
  double over_relaxation = 1.9;
  std::optional<NormKind> norm;       // overrides the variant's norm
  std::optional<double> rho_b;        // overrides the variant's HRI blur
  TvBoundary tv = TvBoundary::zero;
  bool equalize = false;              // match LRI sample statistics to the HRI samples
  std::string out_dir;                // empty: keep everything in memory

  void validate() const
  {
    formation.validate();
    if (reconstruction != "v1" && reconstruction != "v2" && reconstruction != "baseline")
      throw std::invalid_argument("unknown reconstruction '" + reconstruction +
                                  "' (v1, v2, baseline)");
    if (!(lambda_bar >= 0.0)) throw std::invalid_argument("lambda_bar must be >= 0");
    if (iterations == 0) throw std::invalid_argument("iterations must be >= 1");
    if (dataset != "synthetic" && !std::filesystem::exists(dataset))
      throw std::runtime_error("dataset '" + dataset + "' does not exist");
  }
};

struct Observation
{
  Domain domain;
  std::vector<double> samples;
  double dynamic_range = 1.0;
};

inline std::uint64_t noise_seed(const FormationPreset& p) { return p.seed ^ 0x9e3779b97f4a7c15ull; }

/// The reference datacube named by spec.dataset; adjusts the formation dims to it.
inline DataCube load_reference(PipelineSpec& spec)
{
  if (spec.dataset == "synthetic") {
    SceneParams sp = spec.scene;
    sp.rows = spec.formation.rows;
    sp.cols = spec.formation.cols;
    sp.bands = spec.formation.bands;
    return synth_scene(sp, spec.scene_seed);
  }
  auto cube = read_datacube(spec.dataset);
  spec.formation.rows = cube.rows();
  spec.formation.cols = cube.cols();
  spec.formation.bands = cube.bands();
  return cube;
}

inline Observation simulate(const FormationPreset& preset, const DataCube& x)
{
  if (!(x.shape() == preset.image_shape()))
    throw std::invalid_argument("simulate: scene " + x.shape().str() + " does not match formation " +
                                preset.image_shape().str());
  const Formation f = build_formation(preset);
  auto y = f.op.apply(x.samples());
  y = add_gaussian_noise(y, preset.noise_rel * x.dynamic_range(), noise_seed(preset));
  return {f.op.output(), std::move(y), x.dynamic_range()};
}

struct Reconstruction
{
  DataCube estimate;
  std::optional<SolverTrace> trace;
  std::string label;  // e.g. "jodefu-v1", "baseline"
};

/// Formation used as the reconstruction model (the variant picks A_b).
inline FormationPreset model_preset(const PipelineSpec& spec)
{
  FormationPreset p = spec.formation;
  if (spec.reconstruction != "baseline") p.rho_b = jodefu_preset(spec.reconstruction).rho_b;
  if (spec.rho_b) p.rho_b = *spec.rho_b;
  return p;
}

inline Reconstruction reconstruct(const PipelineSpec& spec, const Observation& obs)
{
  spec.validate();
  if (spec.reconstruction == "baseline") {
    const Formation f = build_formation(spec.formation);
    return {baseline_reconstruct(obs.samples, f, obs.dynamic_range), std::nullopt, "baseline"};
  }
  const JodefuVariant variant = jodefu_preset(spec.reconstruction);
  const Formation f = build_formation(model_preset(spec));
  if (!(obs.domain == f.op.output()))
    throw std::invalid_argument("reconstruct: observation " + obs.domain.str() +
                                " does not match formation output " + f.op.output().str());
  std::vector<double> y = obs.samples;
  if (spec.equalize) {
    if (!f.lri_mask || !f.pan_mask)
      throw std::invalid_argument("equalization needs a formation with PAN and LRI samples");
    const auto lri = f.lri_mask->pixel_support();
    const auto pan = f.pan_mask->pixel_support();
    y = equalize_lri_stats(y, lri, pan);
  }
  const LinearOp l = tv_operator(f.image, spec.tv);
  SolverConfig cfg = SolverConfig::from_normalized(spec.lambda_bar, obs.dynamic_range);
  cfg.max_iterations = spec.iterations;
  cfg.over_relaxation = spec.over_relaxation;
  const NormKind g = spec.norm.value_or(variant.norm);
  auto res = jodefu_solve(f.op, l, g, y, cfg);
  return {DataCube(f.image, std::move(res.x), obs.dynamic_range), std::move(res.trace),
          "jodefu-" + variant.name};
}

inline std::string dataset_label(const PipelineSpec& spec)
{
  if (spec.dataset == "synthetic") return "synthetic-" + std::to_string(spec.scene_seed);
  return std::filesystem::path(spec.dataset).filename().string();
}

inline QualityReport evaluate(const PipelineSpec& spec, const DataCube& reference,
                              const Reconstruction& rec)
{
  QualityReport r = evaluate_quality(reference, rec.estimate);
  r.dataset = dataset_label(spec);
  r.formation = spec.formation.name;
  r.reconstruction = rec.label;
  r.lambda_bar = rec.label == "baseline" ? 0.0 : spec.lambda_bar;
  r.compression_ratio = compression_ratio(spec.formation);
  return r;
}

struct PipelineResult
{
  QualityReport report;
  DataCube reference;
  Observation observation;
  Reconstruction reconstruction;
};

inline void write_observation(const std::string& path, const Observation& obs,
                              SampleType type = SampleType::float32)
{
  write_array(path, ArrayFile{obs.domain, obs.samples, obs.dynamic_range, {}, "observation"}, type);
}

inline Observation read_observation(const std::string& path)
{
  auto a = read_array(path);
  return {a.domain, std::move(a.samples), a.dynamic_range};
}

inline PipelineResult run_pipeline(PipelineSpec spec)
{
  spec.validate();
  DataCube reference = load_reference(spec);
  Observation obs = simulate(spec.formation, reference);
  Reconstruction rec = reconstruct(spec, obs);
  QualityReport report = evaluate(spec, reference, rec);
  if (!spec.out_dir.empty()) {
    namespace fs = std::filesystem;
    fs::create_directories(spec.out_dir);
    const fs::path dir(spec.out_dir);
    write_datacube((dir / "reference.raw").string(), reference);
    write_observation((dir / "y.raw").string(), obs);
    write_datacube((dir / "xhat.raw").string(), rec.estimate);
    spec.formation.save((dir / "formation.cfg").string());
    for (auto [name, fmt] : {std::pair{"report.csv", ReportFormat::csv},
                             std::pair{"report.json", ReportFormat::json}}) {
      std::ofstream out(dir / name);
      if (!out) throw std::runtime_error("cannot write '" + (dir / name).string() + "'");
      out << format_reports({report}, fmt);
    }
  }
  return {std::move(report), std::move(reference), std::move(obs), std::move(rec)};
}

// ---------------------------------------------------------------------------
// Parameter sweeps

struct SweepAxes
{
  std::vector<double> lambda_bars;           // empty: the base lambda_bar
  std::vector<NormKind> norms;               // empty: the variant's norm
  std::vector<double> rho_bs;                // empty: the variant's blur
};

/// One report row per grid point, in lexicographic (lambda, norm, rho_b)
/// order. Points run concurrently when threads > 1.
inline std::vector<QualityReport> sweep(const PipelineSpec& base, const SweepAxes& axes,
                                        std::size_t threads = 1)
{
  std::vector<std::optional<double>> lambdas, rhos;
  std::vector<std::optional<NormKind>> norms;
  for (double l : axes.lambda_bars) lambdas.emplace_back(l);
  for (auto g : axes.norms) norms.emplace_back(g);
  for (double r : axes.rho_bs) rhos.emplace_back(r);
  if (lambdas.empty()) lambdas.emplace_back();
  if (norms.empty()) norms.emplace_back(base.norm);
  if (rhos.empty()) rhos.emplace_back(base.rho_b);

  std::vector<PipelineSpec> points;
  for (const auto& l : lambdas)
    for (const auto& g : norms)
      for (const auto& r : rhos) {
        PipelineSpec s = base;
        s.out_dir.clear();
        if (l) s.lambda_bar = *l;
        s.norm = g;
        s.rho_b = r;
        points.push_back(s);
      }

  auto run_point = [](const PipelineSpec& s) {
    QualityReport r = run_pipeline(s).report;
    const auto preset = model_preset(s);
    std::string norm = s.reconstruction == "baseline"
                           ? "-"
                           : norm_name(s.norm.value_or(jodefu_preset(s.reconstruction).norm));
    r.notes = "norm=" + norm + ";rho_b=" + format_double(preset.rho_b);
    return r;
  };

  std::vector<QualityReport> out(points.size());
  if (threads <= 1) {
    for (std::size_t i = 0; i < points.size(); ++i) out[i] = run_point(points[i]);
    return out;
  }
  for (std::size_t start = 0; start < points.size(); start += threads) {
    std::vector<std::future<QualityReport>> batch;
    const std::size_t stop = std::min(points.size(), start + threads);
    for (std::size_t i = start; i < stop; ++i)
      batch.push_back(std::async(std::launch::async, run_point, points[i]));
    for (std::size_t i = start; i < stop; ++i) out[i] = batch[i - start].get();
  }
  return out;
}

} // namespace mrca
