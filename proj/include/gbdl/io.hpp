#pragma once

#include <fstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "gbdl/dictlearn.hpp"
#include "gbdl/image.hpp"
#include "gbdl/kspace.hpp"

namespace gbdl {

// Raw + JSON dataset: little-endian float32 payload, frame-major, row-major,
// complex stored as interleaved (re, im). Magnitudes are normalized to [0,1]
// on access by dividing by intensity_scale.
struct Dataset {
  int side = 0;
  int frames = 0;
  std::string dtype = "real32";  // "real32" or "complex64"
  double intensity_scale = 1.0;
  std::vector<float> payload;

  long elements_per_frame() const;
  ComplexImage frame(int t) const;  // t in [0, frames)
};

class DataError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// json_path names the header; the payload lives beside it with a .raw suffix.
Dataset load_dataset(const std::string& json_path);
void save_dataset(const Dataset& ds, const std::string& json_path);

Dataset dataset_from_frames(const std::vector<ComplexImage>& images,
                            const std::string& dtype = "complex64");

// Sampling masks: binary 0/255 PGM plus a JSON sidecar {side, num_rays, rate}.
void save_mask(const SamplingMask& mask, const std::string& pgm_path);
SamplingMask load_mask(const std::string& pgm_path);

// Same mask as a row-major bit-packed blob (8 cells per byte) with the same
// JSON sidecar.
void save_mask_packed(const SamplingMask& mask, const std::string& bin_path);
SamplingMask load_mask_packed(const std::string& bin_path);

// Measured frames: float64 (re, im) pairs plus a JSON sidecar carrying the
// frame metadata and the mask file name (resolved relative to the sidecar).
void save_kspace(const KSpaceFrame& frame, const std::string& json_path,
                 const std::string& mask_pgm_relative);
KSpaceFrame load_kspace(const std::string& json_path);

// 8-bit grayscale PNG of values clamped to [0,1].
void write_png_gray(const RealImage& img, const std::string& path);

// Gibbs state checkpoint: binary blob + JSON manifest
// {groups, K, patch_dim, sweep_count, seed}.
void save_checkpoint(const GibbsState& state, const PatchGrouping& grouping,
                     double sigma, const std::string& prefix);
struct Checkpoint {
  GibbsState state;
  PatchGrouping grouping;
  double sigma = 1.0;
};
Checkpoint load_checkpoint(const std::string& prefix);

// Grouping + dependence sidecar for offline reuse.
void save_grouping(const PatchGrouping& grouping, const DependenceMatrix& dep,
                   const std::string& path);
void load_grouping(const std::string& path, PatchGrouping& grouping,
                   DependenceMatrix& dep);

class CsvWriter {
 public:
  CsvWriter(const std::string& path, const std::vector<std::string>& header);
  void row(const std::vector<std::string>& cells);
  static std::string num(double v);

 private:
  std::ofstream out_;
};

}  // namespace gbdl
