// mrca: simulate acquisitions, reconstruct, evaluate, run pipelines and sweeps.

#include "CLI11.hpp"

#include <cstdio>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "mrca/mrca.hpp"

namespace {

using namespace mrca;

/// Formation flags shared by simulate, reconstruct and pipeline. Flags given
/// on the command line override a --config file.
struct FormationFlags
{
  std::string config;
  std::optional<std::string> name, mask;
  std::optional<std::size_t> rows, cols, bands, ratio;
  std::optional<double> hri_blur, noise, gain;
  std::optional<std::uint64_t> seed;

  void add_to(CLI::App& app)
  {
    app.add_option("--config", config, "formation config file (key=value)")->check(CLI::ExistingFile);
    app.add_option("--formation", name, "mrca | multires | cfa | cassi | identity");
    app.add_option("--mask", mask, "tile name (bayer, msfa4, bt4pan, bt8pan), tile file, or random");
    app.add_option("--rows", rows, "image rows");
    app.add_option("--cols", cols, "image columns");
    app.add_option("--bands", bands, "spectral bands of the reconstructed cube");
    app.add_option("--ratio", ratio, "HRI/LRI scale ratio");
    app.add_option("--nyquist-gain", gain, "LRI MTF gain at Nyquist");
    app.add_option("--hri-blur", hri_blur, "Butterworth diameter of the simulated HRI blur (0 = none)");
    app.add_option("--noise", noise, "noise sigma as a fraction of the dynamic range");
    app.add_option("--seed", seed, "formation seed (noise, random aperture)");
  }

  FormationPreset resolve() const
  {
    FormationPreset p = config.empty() ? FormationPreset::named(name.value_or("mrca"))
                                       : FormationPreset::load(config);
    if (!config.empty() && name) p.name = *name;
    if (mask) p.mask = *mask;
    if (rows) p.rows = *rows;
    if (cols) p.cols = *cols;
    if (bands) p.bands = *bands;
    if (ratio) p.ratio = *ratio;
    if (gain) p.nyquist_gain = *gain;
    if (hri_blur) p.rho_b = *hri_blur;
    if (noise) p.noise_rel = *noise;
    if (seed) p.seed = *seed;
    p.validate();
    return p;
  }
};

struct SolverFlags
{
  std::string reconstruction = "v1";
  double lambda_bar = 1e-3;
  std::size_t iters = 250;
  double over_relaxation = 1.9;
  std::optional<double> rho_b;
  std::optional<std::string> norm;
  std::string tv = "tv";
  bool equalize = false;

  void add_to(CLI::App& app)
  {
    app.add_option("--reconstruction", reconstruction, "v1 | v2 | baseline")
        ->check(CLI::IsMember({"v1", "v2", "baseline"}));
    app.add_option("--lambda-bar", lambda_bar, "normalized regularization weight (lambda / rho_y)");
    app.add_option("--iters", iters, "iteration count");
    app.add_option("--over-relaxation", over_relaxation, "over-relaxation in (0, 2)");
    app.add_option("--rho-b", rho_b, "Butterworth diameter of the model blur A_b (0 = identity)");
    app.add_option("--norm", norm, "l221 | l111 | s1l1 (overrides the variant)");
    app.add_option("--tv", tv, "gradient operator: tv | tv-replicate")
        ->check(CLI::IsMember({"tv", "tv-replicate"}));
    app.add_flag("--equalize", equalize, "match LRI sample statistics to the PAN samples");
  }

  void apply(PipelineSpec& s) const
  {
    s.reconstruction = reconstruction;
    s.lambda_bar = lambda_bar;
    s.iterations = iters;
    s.over_relaxation = over_relaxation;
    s.rho_b = rho_b;
    if (norm) s.norm = parse_norm(*norm);
    s.tv = tv == "tv" ? TvBoundary::zero : TvBoundary::replicate;
    s.equalize = equalize;
  }
};

SampleType parse_dtype(const std::string& s)
{
  if (s == "float32") return SampleType::float32;
  if (s == "float64") return SampleType::float64;
  throw std::invalid_argument("unknown dtype '" + s + "' (float32, float64)");
}

std::vector<double> parse_doubles(const std::string& list)
{
  std::vector<double> out;
  std::stringstream ss(list);
  std::string item;
  while (std::getline(ss, item, ',')) {
    std::size_t used = 0;
    const double v = std::stod(item, &used);
    if (used != item.size()) throw std::invalid_argument("malformed number '" + item + "'");
    out.push_back(v);
  }
  return out;
}

void write_text(const std::string& path, const std::string& text)
{
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write '" + path + "'");
  out << text;
}

void write_trace(const std::string& path, const SolverTrace& t)
{
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write '" + path + "'");
  out << "iteration,cost\n0," << format_double(t.initial_cost) << "\n";
  for (std::size_t i = 0; i < t.cost.size(); ++i)
    out << t.iteration[i] << "," << format_double(t.cost[i]) << "\n";
}

void maybe_ppm(const std::string& path, const DataCube& x)
{
  if (path.empty()) return;
  if (x.bands() >= 3)
    write_ppm(path, x, 2, 1, 0);
  else
    write_ppm(path, x, 0, 0, 0);
}

} // namespace

int main(int argc, char** argv)
{
  CLI::App app{"multiresolution compressed acquisition: simulation and JoDeFu reconstruction"};
  app.require_subcommand(1);

  // simulate -----------------------------------------------------------------
  auto* sim = app.add_subcommand("simulate", "acquire a datacube through a formation model");
  FormationFlags sim_f;
  sim_f.add_to(*sim);
  std::string sim_dataset = "synthetic", sim_out, sim_ref_out, sim_cfg_out, sim_dtype = "float32";
  std::uint64_t sim_scene_seed = 0;
  sim->add_option("--dataset", sim_dataset, "'synthetic' or a datacube file");
  sim->add_option("--scene-seed", sim_scene_seed, "synthetic scene seed");
  sim->add_option("--out", sim_out, "observation file")->required();
  sim->add_option("--ref-out", sim_ref_out, "write the reference datacube here");
  sim->add_option("--config-out", sim_cfg_out, "write the resolved formation config here");
  sim->add_option("--dtype", sim_dtype, "float32 | float64");

  // reconstruct --------------------------------------------------------------
  auto* rec = app.add_subcommand("reconstruct", "recover a datacube from an observation");
  FormationFlags rec_f;
  rec_f.add_to(*rec);
  SolverFlags rec_s;
  rec_s.add_to(*rec);
  std::string rec_in, rec_out, rec_trace, rec_ppm, rec_dtype = "float32";
  rec->add_option("--in", rec_in, "observation file")->required();
  rec->add_option("--out", rec_out, "estimated datacube")->required();
  rec->add_option("--trace", rec_trace, "write the objective per iteration (csv)");
  rec->add_option("--ppm", rec_ppm, "write an 8-bit preview of the estimate");
  rec->add_option("--dtype", rec_dtype, "float32 | float64");

  // evaluate -----------------------------------------------------------------
  auto* ev = app.add_subcommand("evaluate", "quality indices of an estimate against a reference");
  std::string ev_ref, ev_in, ev_report = "csv", ev_out, ev_formation, ev_label = "external";
  ev->add_option("--ref", ev_ref, "reference datacube")->required();
  ev->add_option("--in", ev_in, "estimated datacube")->required();
  ev->add_option("--report", ev_report, "csv | json")->check(CLI::IsMember({"csv", "json"}));
  ev->add_option("--out", ev_out, "write the report here instead of stdout");
  ev->add_option("--formation", ev_formation, "formation name for the report row");
  ev->add_option("--label", ev_label, "reconstruction label for the report row");

  // pipeline -----------------------------------------------------------------
  auto* pipe = app.add_subcommand("pipeline", "reference -> simulate -> reconstruct -> evaluate");
  FormationFlags pipe_f;
  pipe_f.add_to(*pipe);
  SolverFlags pipe_s;
  pipe_s.add_to(*pipe);
  std::string pipe_dataset = "synthetic", pipe_out, pipe_report = "csv", pipe_ppm;
  std::string sweep_lambda, sweep_norm, sweep_rho;
  std::uint64_t pipe_scene_seed = 0;
  std::size_t threads = 1;
  pipe->add_option("--dataset", pipe_dataset, "'synthetic' or a datacube file");
  pipe->add_option("--scene-seed", pipe_scene_seed, "synthetic scene seed");
  pipe->add_option("--out", pipe_out, "output directory for cubes, config and reports");
  pipe->add_option("--report", pipe_report, "csv | json")->check(CLI::IsMember({"csv", "json"}));
  pipe->add_option("--ppm", pipe_ppm, "write an 8-bit preview of the estimate");
  pipe->add_option("--sweep-lambda", sweep_lambda, "comma-separated lambda_bar grid");
  pipe->add_option("--sweep-norm", sweep_norm, "comma-separated norms");
  pipe->add_option("--sweep-rho-b", sweep_rho, "comma-separated model blur diameters");
  pipe->add_option("--threads", threads, "concurrent sweep points")->check(CLI::PositiveNumber);

  // masks --------------------------------------------------------------------
  auto* mk = app.add_subcommand("masks", "write, inspect or list periodic mask tiles");
  std::string mk_name, mk_in, mk_out;
  bool mk_list = false;
  auto* mk_name_opt = mk->add_option("--name", mk_name, "built-in tile");
  auto* mk_in_opt = mk->add_option("--in", mk_in, "tile file to parse and summarize");
  mk->add_option("--out", mk_out, "write the tile here");
  mk->add_flag("--list", mk_list, "list built-in tiles");
  mk_name_opt->excludes(mk_in_opt);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e);
  }

  try {
    if (*sim) {
      PipelineSpec spec;
      spec.dataset = sim_dataset;
      spec.scene_seed = sim_scene_seed;
      spec.formation = sim_f.resolve();
      spec.reconstruction = "baseline";
      spec.validate();
      const DataCube ref = load_reference(spec);
      const Observation obs = simulate(spec.formation, ref);
      write_observation(sim_out, obs, parse_dtype(sim_dtype));
      if (!sim_ref_out.empty()) write_datacube(sim_ref_out, ref, parse_dtype(sim_dtype));
      if (!sim_cfg_out.empty()) spec.formation.save(sim_cfg_out);
      std::cout << "observation " << obs.domain.str() << " (" << obs.samples.size()
                << " samples, compression ratio "
                << QualityReport::format_metric(compression_ratio(spec.formation)) << ") -> "
                << sim_out << "\n";
    } else if (*rec) {
      PipelineSpec spec;
      spec.formation = rec_f.resolve();
      rec_s.apply(spec);
      const Observation obs = read_observation(rec_in);
      const Reconstruction r = reconstruct(spec, obs);
      write_datacube(rec_out, r.estimate, parse_dtype(rec_dtype));
      if (!rec_trace.empty() && r.trace) write_trace(rec_trace, *r.trace);
      maybe_ppm(rec_ppm, r.estimate);
      std::cout << r.label << " estimate " << r.estimate.shape().str() << " -> " << rec_out;
      if (r.trace)
        std::cout << " (" << r.trace->iterations << " iterations, cost "
                  << format_double(r.trace->initial_cost) << " -> "
                  << format_double(r.trace->cost.empty() ? r.trace->initial_cost : r.trace->cost.back())
                  << ")";
      std::cout << "\n";
    } else if (*ev) {
      const DataCube ref = read_datacube(ev_ref);
      const DataCube est = read_datacube(ev_in);
      QualityReport r = evaluate_quality(ref, est);
      r.dataset = std::filesystem::path(ev_ref).filename().string();
      r.formation = ev_formation;
      r.reconstruction = ev_label;
      const std::string text = format_reports({r}, parse_report_format(ev_report));
      if (ev_out.empty())
        std::cout << text;
      else
        write_text(ev_out, text);
    } else if (*pipe) {
      PipelineSpec spec;
      spec.dataset = pipe_dataset;
      spec.scene_seed = pipe_scene_seed;
      spec.formation = pipe_f.resolve();
      pipe_s.apply(spec);
      const auto fmt = parse_report_format(pipe_report);
      if (!sweep_lambda.empty() || !sweep_norm.empty() || !sweep_rho.empty()) {
        SweepAxes axes;
        if (!sweep_lambda.empty()) axes.lambda_bars = parse_doubles(sweep_lambda);
        if (!sweep_rho.empty()) axes.rho_bs = parse_doubles(sweep_rho);
        std::stringstream ss(sweep_norm);
        for (std::string item; std::getline(ss, item, ',');) axes.norms.push_back(parse_norm(item));
        const auto rows = sweep(spec, axes, threads);
        const std::string text = format_reports(rows, fmt);
        std::cout << text;
        if (!pipe_out.empty()) {
          std::filesystem::create_directories(pipe_out);
          write_text((std::filesystem::path(pipe_out) / (fmt == ReportFormat::csv ? "sweep.csv" : "sweep.json")).string(), text);
        }
      } else {
        spec.out_dir = pipe_out;
        const auto res = run_pipeline(spec);
        maybe_ppm(pipe_ppm, res.reconstruction.estimate);
        std::cout << format_reports({res.report}, fmt);
      }
    } else if (*mk) {
      if (mk_list) {
        for (const char* n : {"bayer", "msfa4", "bt4pan", "bt8pan"}) std::cout << n << "\n";
        return 0;
      }
      if (mk_name.empty() && mk_in.empty())
        throw std::invalid_argument("masks: give --name, --in or --list");
      const PeriodicTile tile = mk_in.empty() ? builtin_tile(mk_name) : parse_mask_file(mk_in);
      if (!mk_out.empty()) write_mask_file(mk_out, tile);
      std::size_t pan = 0;
      for (int c : tile.cells) pan += c == kPanCell;
      std::cout << "tile " << tile.height << "x" << tile.width << ", " << tile.bands
                << " channels, " << pan << " PAN cells";
      const auto missing = tile.missing_channels();
      if (!missing.empty()) {
        std::cout << ", channels never sampled:";
        for (auto k : missing) std::cout << " " << k;
      }
      std::cout << "\n" << format_tile(tile);
    }
  } catch (const std::exception& e) {
    std::cerr << "mrca: error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
