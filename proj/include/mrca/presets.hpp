#pragma once

// Assembled acquisition models. The full MRCA sums an HRI branch
// (spectral degradation -> mosaic -> blur) and an LRI branch
// (spatial blur -> mosaic) on one focal plane; the other presets are the
// classic special cases obtained by replacing blocks with identities or zeros.

#include <algorithm>
#include <cstdint>
#include <fstream>
#include <optional>
#include <stdexcept>
#include <string>

#include "mrca/formation.hpp"
#include "mrca/keyvalue.hpp"
#include "mrca/linear_op.hpp"
#include "mrca/masks.hpp"
#include "mrca/random.hpp"

namespace mrca {

struct FormationPreset
{
  std::string name = "mrca";  // mrca | multires | cfa | cassi | identity
  std::size_t rows = 64;
  std::size_t cols = 64;
  std::size_t bands = 4;
  std::size_t hri_bands = 1;
  std::size_t ratio = 2;      // HRI / LRI scale ratio
  std::string mask = "bt4pan"; // built-in tile name, tile file, or "random" (cassi)
  double nyquist_gain = 0.3;  // LRI Gaussian MTF gain at the LRI Nyquist frequency
  double rho_b = 0.0;         // Butterworth diameter of the HRI blur, 0 = identity
  int butterworth_order = 1;
  double cassi_density = 0.5; // open fraction of the random coded aperture
  double noise_rel = 0.0;     // noise sigma as a fraction of the dynamic range
  std::uint64_t seed = 0;

  void validate() const
  {
    if (name != "mrca" && name != "multires" && name != "cfa" && name != "cassi" &&
        name != "identity")
      throw std::invalid_argument("unknown formation '" + name +
                                  "' (mrca, multires, cfa, cassi, identity)");
    if (rows == 0 || cols == 0 || bands == 0 || hri_bands == 0)
      throw std::invalid_argument("formation: dimensions must be positive");
    if (ratio == 0) throw std::invalid_argument("formation: ratio must be positive");
    if (!(nyquist_gain > 0.0 && nyquist_gain < 1.0))
      throw std::invalid_argument("formation: nyquist_gain must be in (0, 1)");
    if (!(rho_b >= 0.0)) throw std::invalid_argument("formation: rho_b must be >= 0");
    if (butterworth_order < 1) throw std::invalid_argument("formation: butterworth_order >= 1");
    if (!(cassi_density > 0.0 && cassi_density <= 1.0))
      throw std::invalid_argument("formation: cassi_density must be in (0, 1]");
    if (!(noise_rel >= 0.0)) throw std::invalid_argument("formation: noise_rel must be >= 0");
  }

  KeyValues to_keyvalues() const
  {
    KeyValues kv;
    kv.set("preset", name);
    kv.set("rows", std::to_string(rows));
    kv.set("cols", std::to_string(cols));
    kv.set("bands", std::to_string(bands));
    kv.set("hri_bands", std::to_string(hri_bands));
    kv.set("ratio", std::to_string(ratio));
    kv.set("mask", mask);
    kv.set("nyquist_gain", format_double(nyquist_gain));
    kv.set("rho_b", format_double(rho_b));
    kv.set("butterworth_order", std::to_string(butterworth_order));
    kv.set("cassi_density", format_double(cassi_density));
    kv.set("noise_rel", format_double(noise_rel));
    kv.set("seed", std::to_string(seed));
    return kv;
  }

  static FormationPreset from_keyvalues(const KeyValues& kv)
  {
    static const char* known[] = {"preset", "rows", "cols", "bands", "hri_bands", "ratio",
                                  "mask", "nyquist_gain", "rho_b", "butterworth_order",
                                  "cassi_density", "noise_rel", "seed"};
    for (const auto& [k, v] : kv.entries()) {
      bool ok = false;
      for (const char* n : known) ok = ok || k == n;
      if (!ok) throw std::invalid_argument("formation config: unknown key '" + k + "'");
    }
    FormationPreset p;
    p.name = kv.get_or("preset", p.name);
    if (kv.has("rows")) p.rows = kv.get_uint("rows");
    if (kv.has("cols")) p.cols = kv.get_uint("cols");
    if (kv.has("bands")) p.bands = kv.get_uint("bands");
    if (kv.has("hri_bands")) p.hri_bands = kv.get_uint("hri_bands");
    if (kv.has("ratio")) p.ratio = kv.get_uint("ratio");
    p.mask = kv.get_or("mask", p.mask);
    if (kv.has("nyquist_gain")) p.nyquist_gain = kv.get_double("nyquist_gain");
    if (kv.has("rho_b")) p.rho_b = kv.get_double("rho_b");
    if (kv.has("butterworth_order"))
      p.butterworth_order = static_cast<int>(kv.get_uint("butterworth_order"));
    if (kv.has("cassi_density")) p.cassi_density = kv.get_double("cassi_density");
    if (kv.has("noise_rel")) p.noise_rel = kv.get_double("noise_rel");
    if (kv.has("seed")) p.seed = kv.get_uint("seed");
    p.validate();
    return p;
  }

  static FormationPreset load(const std::string& path)
  {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open formation config '" + path + "'");
    return from_keyvalues(KeyValues::parse(in, path));
  }

  void save(const std::string& path) const
  {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot write formation config '" + path + "'");
    out << to_keyvalues().str();
  }

  /// Defaults for a named preset (mask and ratio conventions).
  static FormationPreset named(const std::string& name)
  {
    FormationPreset p;
    p.name = name;
    if (name == "cfa") p.mask = "msfa4";
    if (name == "cassi") p.mask = "random";
    p.validate();
    return p;
  }

  Shape image_shape() const { return Shape{rows, cols, bands, 1}; }
};

struct Formation
{
  FormationPreset preset;
  LinearOp op;
  Shape image;
  // Building blocks, exposed for the baseline reconstructor and for tests.
  std::optional<Mask> lri_mask{};
  std::optional<Mask> pan_mask{};
  std::optional<ShiftMap> lri_shift{};
  std::optional<LinearOp> lri_mosaic{};  // mosaic of the LRI branch (mask/shift/sum)
  std::optional<LinearOp> hri_branch{};
  std::optional<LinearOp> lri_branch{};

  double compression_ratio() const
  {
    return static_cast<double>(op.output().size()) / static_cast<double>(op.input().size());
  }
};

/// Seeded binary coded aperture, identical in every band.
inline Mask random_aperture(std::size_t rows, std::size_t cols, std::size_t bands, double density,
                            std::uint64_t seed)
{
  Rng rng(seed);
  std::vector<double> plane(rows * cols);
  for (auto& v : plane) v = rng.uniform() < density ? 1.0 : 0.0;
  std::vector<double> w;
  w.reserve(rows * cols * bands);
  for (std::size_t k = 0; k < bands; ++k) w.insert(w.end(), plane.begin(), plane.end());
  return Mask(rows, cols, bands, std::move(w));
}

inline TiledMasks tiled_masks_for(const FormationPreset& p)
{
  const auto tile = resolve_tile(p.mask);
  if (tile.bands != p.bands)
    throw std::invalid_argument("mask '" + p.mask + "' has " + std::to_string(tile.bands) +
                                " channels but the formation has " + std::to_string(p.bands));
  return periodic_mask(tile, p.rows, p.cols);
}

/// PAN indicator replicated over the HRI channels.
inline Mask replicate_pan(const Mask& pan, std::size_t hri_bands)
{
  std::vector<double> w;
  for (std::size_t k = 0; k < hri_bands; ++k)
    w.insert(w.end(), pan.weights().begin(), pan.weights().end());
  return Mask(pan.rows(), pan.cols(), hri_bands, std::move(w));
}

/// HRI branch: [blur] o mosaic(H_p, shift) o spectral(W).
inline LinearOp hri_branch(const SpectralWeights& w, const Mask& pan, const Shape& plane_target,
                           const FormationPreset& p)
{
  const Shape hri{p.rows, p.cols, w.hri_bands(), 1};
  std::optional<ShiftMap> shift;
  const Shape target{plane_target.rows, plane_target.cols, w.hri_bands(), 1};
  if (!(target == hri)) shift = ShiftMap::embed(hri, target);
  LinearOp op = compose(mosaic(pan, shift), spectral_degrade(w, p.rows, p.cols));
  if (p.rho_b > 0.0)
    op = compose(butterworth_blur(op.output().shape(), p.rho_b, p.butterworth_order), op);
  return op;
}

inline Formation build_formation(const FormationPreset& p)
{
  p.validate();
  const Shape image = p.image_shape();
  const std::size_t max_extent = std::min(p.rows, p.cols);

  if (p.name == "identity") return Formation{p, identity_op(image), image};

  if (p.name == "multires") {
    // Separate acquisitions: [P; decimate(conv(X))].
    const auto w = p.hri_bands == 1 ? SpectralWeights::average(p.bands)
                                    : SpectralWeights(p.hri_bands, p.bands,
                                                      std::vector<double>(p.hri_bands * p.bands,
                                                                          1.0 / p.bands));
    const auto bank = BlurBank::mtf_gaussian(p.bands, static_cast<double>(p.ratio),
                                             p.nyquist_gain, max_extent);
    LinearOp lri = compose(decimate(p.ratio, image), spatial_convolve(bank, p.rows, p.cols));
    LinearOp hri = spectral_degrade(w, p.rows, p.cols);
    if (p.rho_b > 0.0)
      hri = compose(butterworth_blur(hri.output().shape(), p.rho_b, p.butterworth_order), hri);
    Formation f{p, stack(hri, lri), image};
    f.hri_branch = hri;
    f.lri_branch = lri;
    return f;
  }

  if (p.name == "mrca") {
    auto masks = tiled_masks_for(p);
    const auto w = p.hri_bands == 1 ? SpectralWeights::average(p.bands)
                                    : SpectralWeights(p.hri_bands, p.bands,
                                                      std::vector<double>(p.hri_bands * p.bands,
                                                                          1.0 / p.bands));
    const auto bank = BlurBank::mtf_gaussian(p.bands, static_cast<double>(p.ratio),
                                             p.nyquist_gain, max_extent);
    const Mask pan = replicate_pan(masks.pan, p.hri_bands);
    LinearOp lri_mos = mosaic(masks.lri);
    LinearOp lri = compose(lri_mos, spatial_convolve(bank, p.rows, p.cols));
    LinearOp hri = hri_branch(w, pan, lri.output().shape(), p);
    Formation f{p, add(hri, lri).with_norm_bound(hri.norm_bound() + lri.norm_bound(), "mrca"),
                image};
    f.lri_mask = masks.lri;
    f.pan_mask = masks.pan;
    f.lri_mosaic = lri_mos;
    f.hri_branch = hri;
    f.lri_branch = lri;
    return f;
  }

  // cfa / cassi: HRI samples suppressed with all-zero weights, no LRI blur.
  Mask lri_mask = Mask::ones(1, 1, 1);
  std::optional<ShiftMap> shift;
  Mask pan = Mask(p.rows, p.cols, p.hri_bands, std::vector<double>(p.rows * p.cols * p.hri_bands));
  if (p.name == "cfa") {
    auto masks = tiled_masks_for(p);
    lri_mask = masks.lri;
  } else {
    if (p.mask == "random")
      lri_mask = random_aperture(p.rows, p.cols, p.bands, p.cassi_density, p.seed);
    else
      lri_mask = tiled_masks_for(p).lri;
    shift = cassi_shift_map(p.rows, p.cols, p.bands);
  }
  LinearOp lri = mosaic(lri_mask, shift);
  LinearOp hri = hri_branch(SpectralWeights::zeros(p.hri_bands, p.bands), pan,
                            lri.output().shape(), p);
  Formation f{p, add(hri, lri).with_norm_bound(hri.norm_bound() + lri.norm_bound(), p.name),
              image};
  f.lri_mask = lri_mask;
  f.lri_shift = shift;
  f.lri_mosaic = lri;
  f.hri_branch = hri;
  f.lri_branch = lri;
  return f;
}

/// Acquired samples over reconstructed samples.
inline double compression_ratio(const FormationPreset& p)
{
  return build_formation(p).compression_ratio();
}

} // namespace mrca
