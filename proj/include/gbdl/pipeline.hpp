#pragma once

#include <functional>
#include <optional>

#include "gbdl/admm.hpp"
#include "gbdl/config.hpp"

namespace gbdl {

struct BootstrapResult {
  ComplexImage image;  // frame-1 reconstruction (or the supplied guide)
  PatchGrouping grouping;
  std::vector<std::vector<int>> neighbors;
  GibbsState state;
  double sigma = 1.0;
  std::vector<IterationDiag> diags;  // empty when a guide skipped the solve
};

// Frame-1 bootstrap: reconstruct with an empty support (global sparsity on
// all coefficients) under a provisional zero-filled grouping, then regroup
// from the reconstruction and re-initialize a group-consistent state with
// burn-in. A supplied fully sampled guide skips the solve.
BootstrapResult bootstrap_first_frame(const KSpaceFrame& y1, const RunConfig& cfg,
                                      const ComplexImage* guide = nullptr,
                                      const ComplexImage* truth = nullptr);

struct FrameOutput {
  int frame = 0;  // 1-based
  ComplexImage image;
  std::vector<IterationDiag> diags;
};

using FrameProvider = std::function<KSpaceFrame(int)>;          // 1-based frame index
using TruthProvider = std::function<ComplexImage(int)>;
using FrameSink = std::function<void(const FrameOutput&)>;

struct SequenceStats {
  size_t peak_retained_bytes = 0;  // images + sampler state held across frames
  int frames_done = 0;
};

// Everything a stopped run needs to continue from frame next_frame; resuming
// reproduces the uninterrupted run bit for bit.
struct SequenceCheckpoint {
  GibbsState state;
  PatchGrouping grouping;
  double sigma = 1.0;
  ComplexImage prev;   // reconstruction of frame next_frame - 1
  ComplexImage first;  // frame-1 reconstruction (reference_mode "first")
  int next_frame = 2;
};

// Causal sequence reconstruction: frame t sees only measurements 1..t. Each
// finished frame is handed to the sink immediately; only the reference
// image(s) and one GibbsState are retained between frames. When
// checkpoint_out is given it reflects the state after the last completed
// frame; resume_from restarts mid-sequence instead of bootstrapping.
SequenceStats reconstruct_sequence(int num_frames, const FrameProvider& frames,
                                   const RunConfig& cfg, const FrameSink& sink,
                                   const ComplexImage* guide = nullptr,
                                   const TruthProvider& truth = nullptr,
                                   SequenceCheckpoint* checkpoint_out = nullptr,
                                   const SequenceCheckpoint* resume_from = nullptr);

// Persistence for resumable runs: prefix.bin/.json carry the sampler state,
// grouping and kernel width; prefix_images.json the retained frames;
// prefix_run.json the cursor.
void save_sequence_checkpoint(const SequenceCheckpoint& cp, const std::string& prefix);
SequenceCheckpoint load_sequence_checkpoint(const std::string& prefix);

// apply_fu_adjoint alone; the naive comparison baseline.
ComplexImage zero_filled_baseline(const KSpaceFrame& y);

// Full pipeline with grouping and dependence disabled (one group, self-only
// rows); the beta-process-factor-analysis-like ablation.
RunConfig ablation_config(RunConfig cfg);

}  // namespace gbdl
