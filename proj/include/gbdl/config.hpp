#pragma once

#include <cstdint>
#include <string>

#include "gbdl/dictlearn.hpp"

namespace gbdl {

// Every tunable of a reconstruction run. Defaults follow the reference
// operating point: 4x4 patches, 128 initial atoms, 11 groups, neighborhood
// radius 13, lambda_g 10, rho 1000, lambda 1e10, 100 iterations.
struct RunConfig {
  int patch_area = 16;
  int dict_size = 128;
  int num_groups = 11;
  double radius = 13.0;
  double kernel_width = 0.0;  // <= 0 selects the median heuristic
  double support_tau = 0.01;
  double lambda_g = 10.0;
  double rho = 1000.0;
  double lambda = 1e10;
  bool noiseless = true;
  int max_iters = 100;
  double tolerance = 1e-4;
  int burn_in = 20;
  uint64_t master_seed = 170915;
  double rate_first = 0.4;
  double rate_rest = 0.2;
  double seed_angle = 0.0;
  double noise_sigma = 0.0;
  std::string reference_mode = "prev";  // "prev" or "first"
  bool self_only_dependence = false;    // ablation: identity dependence rows
  int kmeans_iters = 50;
  int levels = -1;  // -1: log2(side) - 2
  HyperParams hyper;

  int wavelet_levels(int side) const;
  void validate() const;  // throws std::invalid_argument on bad fields
};

std::string config_to_json(const RunConfig& cfg);
RunConfig config_from_json(const std::string& text);

RunConfig load_config(const std::string& path);
void save_config(const RunConfig& cfg, const std::string& path);

}  // namespace gbdl
