#include "gbdl/pipeline.hpp"

#include <cmath>
#include <fstream>

#include <json.hpp>

#include "gbdl/io.hpp"
#include "gbdl/sampling.hpp"

namespace gbdl {

namespace {

// Spatial-only self lists for the dependence-disabled mode.
std::vector<std::vector<int>> self_lists(int n) {
  std::vector<std::vector<int>> out(static_cast<size_t>(n));
  for (int i = 0; i < n; ++i) out[static_cast<size_t>(i)] = {i};
  return out;
}

ReconOptions recon_options(const RunConfig& cfg, int side, double sigma) {
  ReconOptions opt;
  opt.weights.lambda_g = cfg.lambda_g;
  opt.weights.rho = cfg.rho;
  opt.weights.lambda = cfg.lambda;
  opt.weights.noiseless = cfg.noiseless;
  opt.max_iters = cfg.max_iters;
  opt.tolerance = cfg.tolerance;
  opt.levels = cfg.wavelet_levels(side);
  opt.patch_area = cfg.patch_area;
  opt.sigma = sigma;
  opt.radius = cfg.radius;
  opt.self_only_dependence = cfg.self_only_dependence;
  return opt;
}

struct InitPieces {
  PatchGrouping grouping;
  std::vector<std::vector<int>> neighbors;
  GibbsState state;
  double sigma;
};

// Grouping from the guide magnitudes, kernel width, dependence rows and a
// cold hierarchical state, seeded from (master_seed, frame, purpose).
InitPieces init_from_guide(const ComplexImage& guide, const RunConfig& cfg,
                           uint64_t purpose) {
  const int side = static_cast<int>(guide.rows());
  const int n = side * side;
  InitPieces p{};
  const PatchMatrix mag_patches = extract_patches(magnitude(guide), cfg.patch_area);
  p.grouping = kmeans_group(mag_patches, cfg.num_groups,
                            cfg.master_seed ^ (0x67726f7570ULL + purpose), cfg.kmeans_iters);
  const PatchMatrix stacked = extract_patches(guide, cfg.patch_area);
  DependenceMatrix dep;
  if (cfg.self_only_dependence) {
    p.neighbors = self_lists(n);
    p.sigma = 1.0;
    dep = identity_dependence(n);
  } else {
    p.neighbors = neighbor_lists(p.grouping, side, cfg.radius);
    p.sigma = cfg.kernel_width > 0.0
                  ? cfg.kernel_width
                  : median_kernel_width(stacked, p.grouping, side, cfg.radius,
                                        cfg.master_seed ^ 0x7369ULL);
    dep.sigma = p.sigma;
    dep.radius = cfg.radius;
    rebuild_dependence(dep, stacked, stacked, p.neighbors);
  }
  p.state = init_state(p.grouping, dep, p.neighbors, 2 * cfg.patch_area, cfg.dict_size,
                       cfg.hyper, cfg.master_seed ^ (0x696e6974ULL + purpose));
  return p;
}

size_t image_bytes(const ComplexImage& img) {
  return static_cast<size_t>(img.size()) * sizeof(cd);
}

size_t state_bytes(const GibbsState& st) {
  size_t total = 0;
  for (const auto& g : st.groups) {
    total += static_cast<size_t>(g.dict.size() + g.s.size() + g.alpha.size() +
                                 g.pi_star.size() + g.pi.size()) *
             sizeof(double);
    total += static_cast<size_t>(g.z.size());
    total += static_cast<size_t>(g.eta.size() + g.gamma_s.size()) * sizeof(double);
    for (const auto& row : g.dep_rows) total += row.size() * (sizeof(int) + sizeof(double));
    for (const auto& row : g.neigh) total += row.size() * sizeof(int);
  }
  return total;
}

}  // namespace

BootstrapResult bootstrap_first_frame(const KSpaceFrame& y1, const RunConfig& cfg,
                                      const ComplexImage* guide,
                                      const ComplexImage* truth) {
  cfg.validate();
  const int side = y1.mask.side();
  BootstrapResult boot;

  if (guide) {
    if (!guide->allFinite())
      throw NumericalAbort("bootstrap_first_frame: non-finite guide image", {});
    boot.image = *guide;  // fully sampled guide: no solve needed
  } else {
    // Provisional grouping from the zero-filled image, empty support.
    const ComplexImage x0 = kspace_adjoint(y1);
    if (!x0.allFinite())
      throw NumericalAbort("bootstrap_first_frame: non-finite measurements", {});
    InitPieces prov = init_from_guide(x0, cfg, /*purpose=*/1);
    reseed_streams(prov.state, cfg.master_seed, 1);
    const PatchMatrix p0 = extract_patches(x0, cfg.patch_area);
    for (int b = 0; b < cfg.burn_in; ++b) gibbs_sweep(prov.state, p0);
    FrameResult fr = reconstruct_frame(y1, prov.grouping, prov.neighbors, prov.state,
                                       empty_support(side),
                                       recon_options(cfg, side, prov.sigma),
                                       /*init_ref=*/nullptr, truth);
    boot.image = std::move(fr.image);
    boot.diags = std::move(fr.diags);
  }

  // Final grouping from the reconstructed guide; fresh state with burn-in.
  InitPieces fin = init_from_guide(boot.image, cfg, /*purpose=*/2);
  reseed_streams(fin.state, cfg.master_seed, 1);
  const PatchMatrix pg = extract_patches(boot.image, cfg.patch_area);
  for (int b = 0; b < cfg.burn_in; ++b) gibbs_sweep(fin.state, pg);
  boot.grouping = std::move(fin.grouping);
  boot.neighbors = std::move(fin.neighbors);
  boot.state = std::move(fin.state);
  boot.sigma = fin.sigma;
  return boot;
}

SequenceStats reconstruct_sequence(int num_frames, const FrameProvider& frames,
                                   const RunConfig& cfg, const FrameSink& sink,
                                   const ComplexImage* guide, const TruthProvider& truth,
                                   SequenceCheckpoint* checkpoint_out,
                                   const SequenceCheckpoint* resume_from) {
  cfg.validate();
  if (num_frames < 1) throw std::invalid_argument("reconstruct_sequence: no frames");
  SequenceStats stats;
  const bool use_first = cfg.reference_mode == "first";

  GibbsState state;
  PatchGrouping grouping;
  std::vector<std::vector<int>> neighbors;
  double sigma = 1.0;
  ComplexImage prev, first;
  int side = 0;
  int start = 2;

  if (resume_from) {
    if (resume_from->next_frame < 2)
      throw std::invalid_argument("reconstruct_sequence: bad resume frame");
    state = resume_from->state;
    grouping = resume_from->grouping;
    sigma = resume_from->sigma;
    prev = resume_from->prev;
    first = resume_from->first;
    start = resume_from->next_frame;
    side = static_cast<int>(prev.rows());
    neighbors = cfg.self_only_dependence
                    ? self_lists(side * side)
                    : neighbor_lists(grouping, side, cfg.radius);
    stats.frames_done = start - 1;
  } else {
    const KSpaceFrame y1 = frames(1);
    side = y1.mask.side();
    ComplexImage truth_buf;
    const ComplexImage* truth_ptr = nullptr;
    if (truth) {
      truth_buf = truth(1);
      truth_ptr = &truth_buf;
    }
    BootstrapResult boot = bootstrap_first_frame(y1, cfg, guide, truth_ptr);
    sink(FrameOutput{1, boot.image, boot.diags});
    stats.frames_done = 1;
    state = std::move(boot.state);
    grouping = std::move(boot.grouping);
    neighbors = std::move(boot.neighbors);
    sigma = boot.sigma;
    prev = std::move(boot.image);
    if (use_first) first = prev;
  }

  if (checkpoint_out) {
    checkpoint_out->state = state;
    checkpoint_out->grouping = grouping;
    checkpoint_out->sigma = sigma;
    checkpoint_out->prev = prev;
    checkpoint_out->first = first;
    checkpoint_out->next_frame = stats.frames_done + 1;
  }

  const int levels = cfg.wavelet_levels(side);
  ComplexImage truth_buf;
  for (int t = start; t <= num_frames; ++t) {
    const KSpaceFrame y = frames(t);
    const ComplexImage& ref = use_first ? first : prev;
    const SupportSet support = estimate_support(ref, cfg.support_tau, levels);
    reseed_streams(state, cfg.master_seed, static_cast<uint64_t>(t));
    if (truth) truth_buf = truth(t);
    FrameResult fr = reconstruct_frame(y, grouping, neighbors, state, support,
                                       recon_options(cfg, side, sigma), &ref,
                                       truth ? &truth_buf : nullptr);
    sink(FrameOutput{t, fr.image, fr.diags});
    prev = std::move(fr.image);
    stats.frames_done = t;
    if (checkpoint_out) {
      checkpoint_out->state = state;
      checkpoint_out->prev = prev;
      checkpoint_out->next_frame = t + 1;
    }

    size_t retained = state_bytes(state) + image_bytes(prev);
    if (use_first) retained += image_bytes(first);
    stats.peak_retained_bytes = std::max(stats.peak_retained_bytes, retained);
  }
  return stats;
}

namespace {

// Retained reference images at full double precision (resume must reproduce
// the uninterrupted run bit for bit, so the float32 dataset format is out).
void write_image_blob(std::ofstream& out, const ComplexImage& img) {
  const int32_t side = static_cast<int32_t>(img.rows());
  out.write(reinterpret_cast<const char*>(&side), sizeof(side));
  out.write(reinterpret_cast<const char*>(img.data()),
            static_cast<std::streamsize>(sizeof(cd) * img.size()));
}

ComplexImage read_image_blob(std::ifstream& in) {
  int32_t side = 0;
  in.read(reinterpret_cast<char*>(&side), sizeof(side));
  if (!in || side < 0) throw DataError("sequence checkpoint: bad image blob");
  ComplexImage img(side, side);
  in.read(reinterpret_cast<char*>(img.data()),
          static_cast<std::streamsize>(sizeof(cd) * img.size()));
  if (!in) throw DataError("sequence checkpoint: truncated image blob");
  return img;
}

}  // namespace

void save_sequence_checkpoint(const SequenceCheckpoint& cp, const std::string& prefix) {
  save_checkpoint(cp.state, cp.grouping, cp.sigma, prefix);
  const bool has_first = cp.first.size() > 0;
  std::ofstream blob(prefix + "_images.bin", std::ios::binary);
  if (!blob) throw DataError("cannot write " + prefix + "_images.bin");
  write_image_blob(blob, cp.prev);
  if (has_first) write_image_blob(blob, cp.first);
  nlohmann::json j;
  j["next_frame"] = cp.next_frame;
  j["has_first"] = has_first;
  std::ofstream out(prefix + "_run.json");
  if (!out) throw DataError("cannot write " + prefix + "_run.json");
  out << j.dump(2) << "\n";
}

SequenceCheckpoint load_sequence_checkpoint(const std::string& prefix) {
  SequenceCheckpoint cp;
  Checkpoint base = load_checkpoint(prefix);
  cp.state = std::move(base.state);
  cp.grouping = std::move(base.grouping);
  cp.sigma = base.sigma;
  std::ifstream in(prefix + "_run.json");
  if (!in) throw DataError("cannot open " + prefix + "_run.json");
  nlohmann::json j;
  in >> j;
  cp.next_frame = j.at("next_frame").get<int>();
  const bool has_first = j.at("has_first").get<bool>();
  std::ifstream blob(prefix + "_images.bin", std::ios::binary);
  if (!blob) throw DataError("cannot open " + prefix + "_images.bin");
  cp.prev = read_image_blob(blob);
  if (has_first) cp.first = read_image_blob(blob);
  return cp;
}

ComplexImage zero_filled_baseline(const KSpaceFrame& y) { return kspace_adjoint(y); }

RunConfig ablation_config(RunConfig cfg) {
  cfg.num_groups = 1;
  cfg.self_only_dependence = true;
  return cfg;
}

}  // namespace gbdl
