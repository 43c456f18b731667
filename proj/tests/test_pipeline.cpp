#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <filesystem>
#include <map>

#include "gbdl/metrics.hpp"
#include "gbdl/phantom.hpp"
#include "gbdl/pipeline.hpp"
#include "gbdl/sampling.hpp"
#include "helpers.hpp"

using namespace gbdl;

namespace {

// Small, fast configuration for 32x32 sequences.
RunConfig small_config() {
  RunConfig cfg;
  cfg.patch_area = 16;
  cfg.dict_size = 16;
  cfg.num_groups = 4;
  cfg.radius = 6.0;
  cfg.max_iters = 12;
  cfg.burn_in = 4;
  cfg.kmeans_iters = 20;
  cfg.master_seed = 42;
  return cfg;
}

struct Captured {
  std::map<int, ComplexImage> images;
  std::map<int, std::vector<IterationDiag>> diags;
};

FrameSink capture(Captured& out) {
  return [&out](const FrameOutput& f) {
    out.images[f.frame] = f.image;
    out.diags[f.frame] = f.diags;
  };
}

std::vector<KSpaceFrame> sample_sequence(const Dataset& ds, const RunConfig& cfg) {
  const int side = ds.side;
  const SamplingMask mask1 =
      radial_mask(side, rays_for_rate(side, cfg.rate_first, cfg.seed_angle), cfg.seed_angle);
  const SamplingMask rest =
      radial_mask(side, rays_for_rate(side, cfg.rate_rest, cfg.seed_angle), cfg.seed_angle);
  std::vector<KSpaceFrame> frames;
  for (int t = 0; t < ds.frames; ++t) {
    Rng noise(cfg.master_seed, 0x6d656173ULL, static_cast<uint64_t>(t));
    frames.push_back(measure(ds.frame(t), t == 0 ? mask1 : rest, cfg.noise_sigma,
                             noise, t + 1));
  }
  return frames;
}

}  // namespace

TEST_CASE("bootstrap_first_frame: a supplied guide skips the solve") {
  Rng rng(91);
  const ComplexImage guide = oracle::random_image(32, rng);
  const RunConfig cfg = small_config();
  SamplingMask mask = radial_mask(32, 6, 0.0);
  const KSpaceFrame y1 = kspace_sample(guide, mask);
  const BootstrapResult boot = bootstrap_first_frame(y1, cfg, &guide);
  CHECK((boot.image - guide).norm() == doctest::Approx(0.0));
  CHECK(boot.diags.empty());
  CHECK(boot.grouping.num_groups == cfg.num_groups);
  CHECK(boot.state.groups.size() == static_cast<size_t>(cfg.num_groups));
}

TEST_CASE("bootstrap_first_frame beats the zero-filled baseline on the phantom") {
  const Dataset ds = generate_phantom(32, 1, 1.0, 3);
  const ComplexImage truth = ds.frame(0);
  RunConfig cfg = small_config();
  cfg.max_iters = 25;
  const SamplingMask mask =
      radial_mask(32, rays_for_rate(32, cfg.rate_first, 0.0), 0.0);
  const KSpaceFrame y1 = kspace_sample(truth, mask);
  const BootstrapResult boot = bootstrap_first_frame(y1, cfg, nullptr, &truth);
  const double zf = psnr(zero_filled_baseline(y1), truth);
  const double got = psnr(boot.image, truth);
  INFO("zero-filled ", zf, " dB, bootstrap ", got, " dB");
  CHECK(got >= zf + 3.0);
}

TEST_CASE("reconstruct_sequence: T = 1 equals the bootstrap output") {
  const Dataset ds = generate_phantom(32, 1, 1.0, 7);
  RunConfig cfg = small_config();
  auto frames = sample_sequence(ds, cfg);
  Captured seq;
  reconstruct_sequence(1, [&](int t) { return frames[static_cast<size_t>(t - 1)]; },
                       cfg, capture(seq));
  REQUIRE(seq.images.count(1) == 1);
  const BootstrapResult boot = bootstrap_first_frame(frames[0], cfg);
  CHECK((seq.images[1] - boot.image).norm() == doctest::Approx(0.0));
}

TEST_CASE("reconstruct_sequence: static phantom holds quality across frames") {
  const Dataset ds = generate_phantom(32, 5, 0.0, 11);  // all frames identical
  RunConfig cfg = small_config();
  cfg.rate_rest = 0.3;
  auto frames = sample_sequence(ds, cfg);
  Captured seq;
  reconstruct_sequence(5, [&](int t) { return frames[static_cast<size_t>(t - 1)]; },
                       cfg, capture(seq),
                       nullptr, [&](int t) { return ds.frame(t - 1); });
  const double p2 = psnr(seq.images[2], ds.frame(1));
  const double p5 = psnr(seq.images[5], ds.frame(4));
  INFO("frame2 ", p2, " dB, frame5 ", p5, " dB");
  CHECK(p5 >= p2 - 0.1);
}

TEST_CASE("reconstruct_sequence: causal prefix identity and rerun reproducibility") {
  const Dataset ds = generate_phantom(32, 4, 0.8, 13);
  RunConfig cfg = small_config();
  cfg.max_iters = 8;
  auto frames = sample_sequence(ds, cfg);
  const FrameProvider provider = [&](int t) { return frames[static_cast<size_t>(t - 1)]; };

  Captured full1, full2, prefix;
  reconstruct_sequence(4, provider, cfg, capture(full1));
  reconstruct_sequence(4, provider, cfg, capture(full2));
  reconstruct_sequence(2, provider, cfg, capture(prefix));

  for (int t = 1; t <= 4; ++t)
    CHECK((full1.images[t] - full2.images[t]).norm() == doctest::Approx(0.0));
  for (int t = 1; t <= 2; ++t)
    CHECK((prefix.images[t] - full1.images[t]).norm() == doctest::Approx(0.0));
}

TEST_CASE("reconstruct_sequence: retained state is O(1) in the frame count") {
  const Dataset ds = generate_phantom(32, 8, 0.8, 17);
  RunConfig cfg = small_config();
  cfg.max_iters = 4;
  cfg.burn_in = 2;
  auto frames = sample_sequence(ds, cfg);
  const FrameProvider provider = [&](int t) { return frames[static_cast<size_t>(t - 1)]; };
  Captured a, b;
  const SequenceStats s3 = reconstruct_sequence(3, provider, cfg, capture(a));
  const SequenceStats s8 = reconstruct_sequence(8, provider, cfg, capture(b));
  CHECK(s3.frames_done == 3);
  CHECK(s8.frames_done == 8);
  CHECK(s3.peak_retained_bytes > 0);
  CHECK(s8.peak_retained_bytes == s3.peak_retained_bytes);
}

TEST_CASE("reconstruct_sequence: reference mode 'first' is accepted") {
  const Dataset ds = generate_phantom(32, 3, 0.8, 19);
  RunConfig cfg = small_config();
  cfg.reference_mode = "first";
  cfg.max_iters = 5;
  cfg.burn_in = 2;
  auto frames = sample_sequence(ds, cfg);
  Captured seq;
  const SequenceStats st = reconstruct_sequence(
      3, [&](int t) { return frames[static_cast<size_t>(t - 1)]; }, cfg, capture(seq));
  CHECK(st.frames_done == 3);
  CHECK(seq.images.size() == 3);
}

TEST_CASE("ablation_config disables grouping and dependence") {
  const RunConfig cfg = ablation_config(small_config());
  CHECK(cfg.num_groups == 1);
  CHECK(cfg.self_only_dependence);
  // it runs end to end and is deterministic
  const Dataset ds = generate_phantom(32, 2, 0.8, 23);
  RunConfig run = cfg;
  run.max_iters = 5;
  run.burn_in = 2;
  auto frames = sample_sequence(ds, run);
  Captured a, b;
  const FrameProvider provider = [&](int t) { return frames[static_cast<size_t>(t - 1)]; };
  reconstruct_sequence(2, provider, run, capture(a));
  reconstruct_sequence(2, provider, run, capture(b));
  for (int t = 1; t <= 2; ++t)
    CHECK((a.images[t] - b.images[t]).norm() == doctest::Approx(0.0));
}

TEST_CASE("sequence checkpoint: resumed run reproduces the uninterrupted one") {
  const Dataset ds = generate_phantom(32, 4, 0.8, 29);
  RunConfig cfg = small_config();
  cfg.max_iters = 6;
  cfg.burn_in = 2;
  auto frames = sample_sequence(ds, cfg);
  const FrameProvider provider = [&](int t) { return frames[static_cast<size_t>(t - 1)]; };

  Captured full;
  reconstruct_sequence(4, provider, cfg, capture(full));

  Captured head;
  SequenceCheckpoint cp;
  reconstruct_sequence(2, provider, cfg, capture(head), nullptr, nullptr, &cp);
  CHECK(cp.next_frame == 3);

  const auto dir = std::filesystem::temp_directory_path() / "gbdl_seq_ckpt";
  std::filesystem::create_directories(dir);
  const std::string prefix = (dir / "run").string();
  save_sequence_checkpoint(cp, prefix);
  const SequenceCheckpoint loaded = load_sequence_checkpoint(prefix);
  CHECK(loaded.next_frame == 3);
  CHECK((loaded.prev - cp.prev).norm() == doctest::Approx(0.0));

  Captured tail;
  reconstruct_sequence(4, provider, cfg, capture(tail), nullptr, nullptr, nullptr,
                       &loaded);
  REQUIRE(tail.images.count(3) == 1);
  REQUIRE(tail.images.count(4) == 1);
  CHECK((tail.images[3] - full.images[3]).norm() == doctest::Approx(0.0));
  CHECK((tail.images[4] - full.images[4]).norm() == doctest::Approx(0.0));
}

TEST_CASE("dual gap trends down and iterates stay bounded on the phantom") {
  const Dataset ds = generate_phantom(32, 1, 1.0, 31);
  const ComplexImage truth = ds.frame(0);
  RunConfig cfg = small_config();
  cfg.max_iters = 40;
  cfg.tolerance = 0.0;
  const SamplingMask mask = radial_mask(32, rays_for_rate(32, cfg.rate_first, 0.0), 0.0);
  const KSpaceFrame y1 = kspace_sample(truth, mask);
  const BootstrapResult boot = bootstrap_first_frame(y1, cfg, nullptr, &truth);
  REQUIRE(boot.diags.size() == 40);
  double early = 0.0, late = 0.0;
  const double zf_norm = zero_filled_baseline(y1).norm();
  for (const auto& d : boot.diags) {
    if (d.iteration <= 20)
      early += d.dual_gap;
    else
      late += d.dual_gap;
    CHECK(d.iterate_norm <= 10.0 * zf_norm);
    CHECK(std::isfinite(d.iterate_norm));
  }
  CHECK(late / 20.0 < early / 20.0);
}

TEST_CASE("zero_filled_baseline equals the truth under a full mask") {
  Rng rng(92);
  const ComplexImage truth = oracle::random_image(16, rng);
  const KSpaceFrame y = kspace_sample(truth, oracle::full_mask(16));
  CHECK(oracle::rel_err(zero_filled_baseline(y), truth) < 1e-10);
}
