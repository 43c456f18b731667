// Command-line front end: mask/phantom/sample/reconstruct/evaluate/sweep.
#include <CLI11.hpp>
#include <json.hpp>

#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <iostream>
#include <numeric>
#include <vector>

#include "gbdl/admm.hpp"
#include "gbdl/config.hpp"
#include "gbdl/io.hpp"
#include "gbdl/metrics.hpp"
#include "gbdl/phantom.hpp"
#include "gbdl/pipeline.hpp"
#include "gbdl/sampling.hpp"

namespace fs = std::filesystem;
using namespace gbdl;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitUsage = 1;
constexpr int kExitData = 2;
constexpr int kExitNumerical = 3;

std::string frame_name(const char* stem, int t, const char* ext) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%s_%03d%s", stem, t, ext);
  return buf;
}

struct SampledInput {
  std::vector<KSpaceFrame> frames;
  int side = 0;
};

SampledInput load_sampled(const std::string& dir) {
  const fs::path manifest_path = fs::path(dir) / "manifest.json";
  std::ifstream in(manifest_path);
  if (!in) throw DataError("cannot open " + manifest_path.string());
  nlohmann::json manifest;
  in >> manifest;
  SampledInput si;
  si.side = manifest.at("side").get<int>();
  const int frames = manifest.at("frames").get<int>();
  for (int t = 1; t <= frames; ++t) {
    si.frames.push_back(
        load_kspace((fs::path(dir) / frame_name("frame", t, ".json")).string()));
  }
  return si;
}

void write_frame_png(const ComplexImage& img, const std::string& path) {
  write_png_gray(magnitude(img), path);
}

void write_error_png(const ComplexImage& recon, const ComplexImage& truth,
                     const std::string& path) {
  // error amplified x4, same convention as the figure-style error maps
  RealImage err = (magnitude(recon) - magnitude(truth)).cwiseAbs() * 4.0;
  write_png_gray(err, path);
}

double mean_of(const std::vector<double>& v) {
  return v.empty() ? 0.0 : std::accumulate(v.begin(), v.end(), 0.0) / v.size();
}

double std_of(const std::vector<double>& v) {
  if (v.size() < 2) return 0.0;
  const double m = mean_of(v);
  double acc = 0.0;
  for (double x : v) acc += (x - m) * (x - m);
  return std::sqrt(acc / (v.size() - 1.0));
}

// ---------------------------------------------------------------- mask ----
int cmd_mask(const std::string& out, int side, double rate, int rays,
             double seed_angle) {
  if (rays <= 0) rays = rays_for_rate(side, rate, seed_angle);
  const SamplingMask mask = radial_mask(side, rays, seed_angle);
  save_mask(mask, out);
  std::cout << "mask " << side << "x" << side << " rays=" << rays
            << " rate=" << mask.rate() << " -> " << out << "\n";
  return kExitOk;
}

// ------------------------------------------------------------- phantom ----
int cmd_phantom(const std::string& out, int side, int frames, double amplitude,
                uint64_t seed) {
  const Dataset ds = generate_phantom(side, frames, amplitude, seed);
  save_dataset(ds, out);
  std::cout << "phantom " << side << "x" << side << "x" << frames << " -> " << out
            << "\n";
  return kExitOk;
}

// -------------------------------------------------------------- sample ----
int cmd_sample(const std::string& data, const std::string& outdir, double rate_first,
               double rate, double noise_sigma, uint64_t seed, double seed_angle) {
  const Dataset ds = load_dataset(data);
  fs::create_directories(outdir);
  const SamplingMask mask1 =
      radial_mask(ds.side, rays_for_rate(ds.side, rate_first, seed_angle), seed_angle);
  const SamplingMask rest =
      radial_mask(ds.side, rays_for_rate(ds.side, rate, seed_angle), seed_angle);
  save_mask(mask1, (fs::path(outdir) / "mask_first.pgm").string());
  save_mask(rest, (fs::path(outdir) / "mask_rest.pgm").string());
  for (int t = 1; t <= ds.frames; ++t) {
    Rng rng(seed, 0x6d656173ULL, static_cast<uint64_t>(t - 1));
    const KSpaceFrame f =
        measure(ds.frame(t - 1), t == 1 ? mask1 : rest, noise_sigma, rng, t);
    save_kspace(f, (fs::path(outdir) / frame_name("frame", t, ".json")).string(),
                t == 1 ? "mask_first.pgm" : "mask_rest.pgm");
  }
  nlohmann::json manifest;
  manifest["side"] = ds.side;
  manifest["frames"] = ds.frames;
  manifest["rate_first"] = mask1.rate();
  manifest["rate_rest"] = rest.rate();
  manifest["noise_sigma"] = noise_sigma;
  std::ofstream mout((fs::path(outdir) / "manifest.json").string());
  mout << manifest.dump(2) << "\n";
  std::cout << "sampled " << ds.frames << " frames (rates " << mask1.rate() << ", "
            << rest.rate() << ") -> " << outdir << "\n";
  return kExitOk;
}

// --------------------------------------------------------- reconstruct ----
int cmd_reconstruct(const std::string& input, const std::string& outdir,
                    const RunConfig& cfg, const std::string& truth_path,
                    const std::string& state_out, const std::string& resume) {
  const SampledInput si = load_sampled(input);
  fs::create_directories(outdir);
  Dataset truth_ds;
  const bool have_truth = !truth_path.empty();
  if (have_truth) {
    truth_ds = load_dataset(truth_path);
    if (truth_ds.side != si.side || truth_ds.frames < static_cast<int>(si.frames.size()))
      throw DataError("truth dataset does not match the sampled input");
  }

  save_config(cfg, (fs::path(outdir) / "config.effective.json").string());
  CsvWriter csv((fs::path(outdir) / "diagnostics.csv").string(),
                {"frame", "iteration", "residual", "data_error", "dual_gap",
                 "active_atoms", "code_gini", "psnr"});

  std::vector<ComplexImage> recon;
  recon.reserve(si.frames.size());
  const FrameSink sink = [&](const FrameOutput& f) {
    write_frame_png(f.image, (fs::path(outdir) / frame_name("frame", f.frame, ".png")).string());
    if (have_truth)
      write_error_png(f.image, truth_ds.frame(f.frame - 1),
                      (fs::path(outdir) / frame_name("error", f.frame, ".png")).string());
    for (const auto& d : f.diags)
      csv.row({std::to_string(f.frame), std::to_string(d.iteration),
               CsvWriter::num(d.rel_change), CsvWriter::num(d.data_error),
               CsvWriter::num(d.dual_gap), std::to_string(d.active_atoms),
               CsvWriter::num(d.code_gini), CsvWriter::num(d.psnr)});
    recon.push_back(f.image);
    std::cout << "frame " << f.frame << " done (" << f.diags.size() << " iterations)"
              << (have_truth && !f.diags.empty()
                      ? " psnr=" + CsvWriter::num(f.diags.back().psnr)
                      : "")
              << "\n";
  };

  const TruthProvider truth =
      have_truth ? TruthProvider([&](int t) { return truth_ds.frame(t - 1); })
                 : TruthProvider();
  SequenceCheckpoint cp_out;
  SequenceCheckpoint cp_in;
  const bool resuming = !resume.empty();
  if (resuming) cp_in = load_sequence_checkpoint(resume);
  try {
    reconstruct_sequence(static_cast<int>(si.frames.size()),
                         [&](int t) { return si.frames[static_cast<size_t>(t - 1)]; },
                         cfg, sink, nullptr, truth,
                         state_out.empty() ? nullptr : &cp_out,
                         resuming ? &cp_in : nullptr);
  } catch (const NumericalAbort& e) {
    for (const auto& d : e.diags)
      csv.row({"abort", std::to_string(d.iteration), CsvWriter::num(d.rel_change),
               CsvWriter::num(d.data_error), CsvWriter::num(d.dual_gap),
               std::to_string(d.active_atoms), CsvWriter::num(d.code_gini),
               CsvWriter::num(d.psnr)});
    std::cerr << "numerical abort: " << e.what() << "\n";
    return kExitNumerical;
  }
  if (!state_out.empty()) save_sequence_checkpoint(cp_out, state_out);
  if (!recon.empty())
    save_dataset(dataset_from_frames(recon, "complex64"),
                 (fs::path(outdir) / "recon.json").string());
  return kExitOk;
}

// ------------------------------------------------------------ evaluate ----
int cmd_evaluate(const std::string& recon_path, const std::string& truth_path,
                 const std::string& out) {
  const Dataset recon = load_dataset(recon_path);
  const Dataset truth = load_dataset(truth_path);
  if (recon.side != truth.side || recon.frames > truth.frames)
    throw DataError("evaluate: recon/truth shape mismatch");
  CsvWriter csv(out, {"frame", "psnr", "wavelet_gini"});
  const int levels = default_wavelet_levels(recon.side);
  for (int t = 0; t < recon.frames; ++t) {
    const ComplexImage r = recon.frame(t);
    const double p = psnr(r, truth.frame(t));
    const WaveletCoeffs w = dwt2(r, levels);
    Eigen::VectorXd mags(w.data.size());
    for (Eigen::Index i = 0; i < w.data.size(); ++i) mags(i) = std::abs(w.data.data()[i]);
    csv.row({std::to_string(t + 1), CsvWriter::num(p), CsvWriter::num(gini_index(mags))});
  }
  std::cout << "metrics for " << recon.frames << " frames -> " << out << "\n";
  return kExitOk;
}

// --------------------------------------------------------------- sweep ----
int cmd_sweep(const std::string& param, const std::vector<double>& values,
              const std::string& out, int side, int frames, RunConfig base,
              double amplitude) {
  if (param != "Ng" && param != "L" && param != "R1")
    throw CLI::ValidationError("--param must be one of Ng, L, R1");
  const Dataset ds = generate_phantom(side, frames, amplitude, base.master_seed);
  CsvWriter csv(out, {"param", "value", "mean_psnr", "std_psnr",
                      "mean_iter_seconds", "mean_code_gini"});
  for (double value : values) {
    RunConfig cfg = base;
    if (param == "Ng")
      cfg.num_groups = static_cast<int>(value);
    else if (param == "L")
      cfg.patch_area = static_cast<int>(value);
    else
      cfg.radius = value;
    cfg.validate();

    const SamplingMask mask1 = radial_mask(
        side, rays_for_rate(side, cfg.rate_first, cfg.seed_angle), cfg.seed_angle);
    const SamplingMask rest = radial_mask(
        side, rays_for_rate(side, cfg.rate_rest, cfg.seed_angle), cfg.seed_angle);
    std::vector<KSpaceFrame> sampled;
    for (int t = 0; t < frames; ++t) {
      Rng rng(cfg.master_seed, 0x6d656173ULL, static_cast<uint64_t>(t));
      sampled.push_back(
          measure(ds.frame(t), t == 0 ? mask1 : rest, cfg.noise_sigma, rng, t + 1));
    }

    std::vector<double> psnrs, ginis, iter_seconds;
    auto last = std::chrono::steady_clock::now();
    const FrameSink sink = [&](const FrameOutput& f) {
      const auto now = std::chrono::steady_clock::now();
      const double sec = std::chrono::duration<double>(now - last).count();
      last = now;
      psnrs.push_back(psnr(f.image, ds.frame(f.frame - 1)));
      double g = 0.0;
      for (const auto& d : f.diags) g += d.code_gini;
      if (!f.diags.empty()) {
        ginis.push_back(g / static_cast<double>(f.diags.size()));
        if (f.frame >= 2)
          iter_seconds.push_back(sec / static_cast<double>(f.diags.size()));
      }
    };
    reconstruct_sequence(frames,
                         [&](int t) { return sampled[static_cast<size_t>(t - 1)]; },
                         cfg, sink);
    csv.row({param, CsvWriter::num(value), CsvWriter::num(mean_of(psnrs)),
             CsvWriter::num(std_of(psnrs)), CsvWriter::num(mean_of(iter_seconds)),
             CsvWriter::num(mean_of(ginis))});
    std::cout << param << "=" << value << " mean_psnr=" << mean_of(psnrs)
              << " iter_s=" << mean_of(iter_seconds) << " gini=" << mean_of(ginis)
              << "\n";
  }
  return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Group Bayesian dictionary-learning reconstruction for dynamic MRI"};
  app.require_subcommand(1);

  // mask
  auto* mask_cmd = app.add_subcommand("mask", "Generate a radial sampling mask");
  std::string mask_out = "mask.pgm";
  int mask_side = 256, mask_rays = 0;
  double mask_rate = 0.4, mask_angle = 0.0;
  mask_cmd->add_option("--out", mask_out, "Output PGM path");
  mask_cmd->add_option("--side", mask_side, "Grid side (power of two)");
  mask_cmd->add_option("--rate", mask_rate, "Target sampling rate in (0,1]");
  mask_cmd->add_option("--rays", mask_rays, "Explicit ray count (overrides --rate)");
  mask_cmd->add_option("--seed-angle", mask_angle, "First ray angle in radians");

  // phantom
  auto* ph_cmd = app.add_subcommand("phantom", "Generate the dynamic test phantom");
  std::string ph_out = "phantom.json";
  int ph_side = 64, ph_frames = 10;
  double ph_amp = 1.0;
  uint64_t ph_seed = 1;
  ph_cmd->add_option("--out", ph_out, "Output dataset header (.json; .raw beside it)");
  ph_cmd->add_option("--side", ph_side, "Image side (power of two)");
  ph_cmd->add_option("--frames", ph_frames, "Number of frames");
  ph_cmd->add_option("--amplitude", ph_amp, "Motion/pulsation amplitude");
  ph_cmd->add_option("--seed", ph_seed, "Geometry seed");

  // sample
  auto* sm_cmd = app.add_subcommand("sample", "Undersample a dataset into k-space frames");
  std::string sm_data, sm_outdir = "ks";
  double sm_rate_first = 0.4, sm_rate = 0.2, sm_sigma = 0.0, sm_angle = 0.0;
  uint64_t sm_seed = 1;
  sm_cmd->add_option("--data", sm_data, "Input dataset header (.json)")->required();
  sm_cmd->add_option("--outdir", sm_outdir, "Output directory");
  sm_cmd->add_option("--rate-first", sm_rate_first, "Frame-1 sampling rate");
  sm_cmd->add_option("--rate", sm_rate, "Sampling rate for frames >= 2");
  sm_cmd->add_option("--noise-sigma", sm_sigma, "Per-component noise std");
  sm_cmd->add_option("--seed", sm_seed, "Noise seed");
  sm_cmd->add_option("--seed-angle", sm_angle, "First ray angle in radians");

  // reconstruct
  auto* rc_cmd = app.add_subcommand("reconstruct", "Reconstruct a sampled sequence");
  std::string rc_input, rc_outdir = "recon", rc_config, rc_truth, rc_ref;
  std::string rc_state_out, rc_resume;
  int rc_iters = -1, rc_groups = -1, rc_burnin = -1;
  double rc_tau = -1.0;
  bool rc_ablation = false;
  uint64_t rc_seed = 0;
  bool rc_seed_set = false;
  rc_cmd->add_option("--input", rc_input, "Directory produced by `sample`")->required();
  rc_cmd->add_option("--outdir", rc_outdir, "Output directory");
  rc_cmd->add_option("--config", rc_config, "RunConfig JSON file");
  rc_cmd->add_option("--truth", rc_truth, "Ground-truth dataset for PSNR/error maps");
  rc_cmd->add_option("--iters", rc_iters, "Override max iterations");
  rc_cmd->add_option("--groups", rc_groups, "Override number of patch groups");
  rc_cmd->add_option("--burn-in", rc_burnin, "Override burn-in sweeps");
  rc_cmd->add_option("--tau", rc_tau, "Override support threshold");
  rc_cmd->add_option("--reference", rc_ref, "Reference mode: prev or first");
  rc_cmd->add_flag("--ablation", rc_ablation, "Single group, self-only dependence");
  rc_cmd->add_option("--state-out", rc_state_out,
                     "Checkpoint prefix written after each completed frame");
  rc_cmd->add_option("--resume", rc_resume, "Resume from a checkpoint prefix");
  rc_cmd->add_option("--seed", rc_seed, "Override master seed")
      ->each([&](const std::string&) { rc_seed_set = true; });

  // evaluate
  auto* ev_cmd = app.add_subcommand("evaluate", "PSNR/Gini metrics against ground truth");
  std::string ev_recon, ev_truth, ev_out = "metrics.csv";
  ev_cmd->add_option("--recon", ev_recon, "Reconstruction dataset header")->required();
  ev_cmd->add_option("--truth", ev_truth, "Ground-truth dataset header")->required();
  ev_cmd->add_option("--out", ev_out, "Output CSV path");

  // sweep
  auto* sw_cmd = app.add_subcommand("sweep", "Parameter sensitivity sweep on the phantom");
  std::string sw_param = "Ng", sw_out = "sweep.csv", sw_config;
  std::vector<double> sw_values;
  int sw_side = 64, sw_frames = 3;
  double sw_amp = 1.0;
  sw_cmd->add_option("--param", sw_param, "Ng, L, or R1")->required();
  sw_cmd->add_option("--values", sw_values, "Comma-separated values")
      ->required()
      ->delimiter(',');
  sw_cmd->add_option("--out", sw_out, "Output CSV path");
  sw_cmd->add_option("--side", sw_side, "Phantom side");
  sw_cmd->add_option("--frames", sw_frames, "Phantom frames");
  sw_cmd->add_option("--amplitude", sw_amp, "Phantom motion amplitude");
  sw_cmd->add_option("--config", sw_config, "Base RunConfig JSON file");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kExitOk : kExitUsage;
  }

  try {
    if (mask_cmd->parsed())
      return cmd_mask(mask_out, mask_side, mask_rate, mask_rays, mask_angle);
    if (ph_cmd->parsed()) return cmd_phantom(ph_out, ph_side, ph_frames, ph_amp, ph_seed);
    if (sm_cmd->parsed())
      return cmd_sample(sm_data, sm_outdir, sm_rate_first, sm_rate, sm_sigma, sm_seed,
                        sm_angle);
    if (rc_cmd->parsed()) {
      RunConfig cfg = rc_config.empty() ? RunConfig{} : load_config(rc_config);
      if (rc_ablation) cfg = ablation_config(cfg);
      if (rc_iters > 0) cfg.max_iters = rc_iters;
      if (rc_groups > 0) cfg.num_groups = rc_groups;
      if (rc_burnin >= 0) cfg.burn_in = rc_burnin;
      if (rc_tau > 0.0) cfg.support_tau = rc_tau;
      if (!rc_ref.empty()) cfg.reference_mode = rc_ref;
      if (rc_seed_set) cfg.master_seed = rc_seed;
      cfg.validate();
      return cmd_reconstruct(rc_input, rc_outdir, cfg, rc_truth, rc_state_out, rc_resume);
    }
    if (ev_cmd->parsed()) return cmd_evaluate(ev_recon, ev_truth, ev_out);
    if (sw_cmd->parsed()) {
      RunConfig base = sw_config.empty() ? RunConfig{} : load_config(sw_config);
      return cmd_sweep(sw_param, sw_values, sw_out, sw_side, sw_frames, base, sw_amp);
    }
  } catch (const CLI::Error& e) {
    std::cerr << e.what() << "\n";
    return kExitUsage;
  } catch (const NumericalAbort& e) {
    std::cerr << "numerical abort: " << e.what() << "\n";
    return kExitNumerical;
  } catch (const std::invalid_argument& e) {
    std::cerr << "invalid arguments: " << e.what() << "\n";
    return kExitUsage;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitData;
  }
  return kExitUsage;
}
