#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <vector>

#include "gbdl/grouping.hpp"
#include "gbdl/patches.hpp"
#include "gbdl/rng.hpp"

namespace gbdl {

// Hyper-prior constants of the hierarchical beta-Bernoulli model. eta0 = 1
// is accepted (the Beta(c0 eta0, 0) direction degenerates to eta = 1 - 1e-6)
// but pins every activation probability at 1, which freezes the usage
// inference; the working default is the symmetric eta0 = 1/2.
struct HyperParams {
  double c0 = 1.0;
  double c1 = 1.0;
  double eta0 = 0.5;
  double e0 = 1.0, f0 = 1.0;  // weight precision Gamma(e0, f0)
  double g0 = 1.0, h0 = 1.0;  // noise precision Gamma(g0, h0)
};

using BinaryMatrix = Eigen::Matrix<uint8_t, Eigen::Dynamic, Eigen::Dynamic>;

// Everything one group's sampler owns. Columns index the group's patches in
// member order; probability matrices are stored atoms-by-patches so the hot
// loops touch contiguous memory.
struct GroupState {
  std::vector<int> members;  // global patch ids, ascending

  Eigen::MatrixXd dict;      // patch_dim x K
  BinaryMatrix z;            // K x N
  Eigen::MatrixXd s;         // K x N
  Eigen::MatrixXd alpha;     // K x N, s .* z (kept consistent)

  Eigen::MatrixXd pi_star;   // K x N (column l = local beta-process weights)
  Eigen::MatrixXd pi;        // K x N (column i = patch i's activation probs)
  Eigen::VectorXd eta;       // K
  Eigen::VectorXd gamma_s;   // K
  double gamma_eps = 1.0;

  Eigen::VectorXi unused_sweeps;  // consecutive sweeps each atom went unused

  // Local-index dependence rows and spatial neighborhoods (Q_l).
  std::vector<std::vector<std::pair<int, double>>> dep_rows;
  std::vector<std::vector<int>> neigh;

  Rng rng;
  long eta_fallbacks = 0;  // empty slice intervals resolved by keeping eta

  int dim() const { return static_cast<int>(dict.rows()); }
  int num_atoms() const { return static_cast<int>(dict.cols()); }
  int num_patches() const { return static_cast<int>(members.size()); }
  int active_atoms() const;
};

struct GibbsState {
  std::vector<GroupState> groups;
  int patch_dim = 0;   // L' (2L for stacked complex patches)
  int num_atoms = 0;   // K
  HyperParams hyper;
  long sweep_count = 0;
  uint64_t seed = 0;
  int redraw_unused_after = 10;  // prior redraw of atoms idle this many sweeps

  int num_patches() const;
  int active_atoms() const;
  double mean_code_gini() const;             // Gini of |alpha| pooled per group
  double effective_noise_precision() const;  // size-weighted mean of gamma_eps
};

// Cold start per Algorithm-style hierarchical draws. dep carries the
// dependence rows (kernel-built or identity) and neighbors the Q_l sets over
// global patch indices; both are cut down to per-group local indexing here.
GibbsState init_state(const PatchGrouping& grouping, const DependenceMatrix& dep,
                      const std::vector<std::vector<int>>& neighbors, int patch_dim,
                      int num_atoms, const HyperParams& hyper, uint64_t seed);

// Replace the dependence rows (same sparsity universe) without touching the
// learned state; used when the kernel is rebuilt against a new reference.
void set_dependence(GibbsState& state, const DependenceMatrix& dep);

// Reseed every group's stream from (seed, frame, group); keeps causal runs
// reproducible under input truncation.
void reseed_streams(GibbsState& state, uint64_t seed, uint64_t frame);

// Individual conditional updates (exposed for the distribution tests).
// X is the group's patch block, patch_dim x num_patches.
void sample_codes(GroupState& g, const Eigen::MatrixXd& X);
void sample_dictionary(GroupState& g, const Eigen::MatrixXd& X, bool add_noise = true);
void sample_noise_precision(GroupState& g, const Eigen::MatrixXd& X, const HyperParams& h);
void sample_weight_precisions(GroupState& g, const HyperParams& h);
void sample_pi_star(GroupState& g, const HyperParams& h);
void sample_eta(GroupState& g, const HyperParams& h);

// One full pass: codes, dictionary, noise precision, weight precisions,
// pi*, eta, per group in that order; groups run in parallel on their own
// streams.
void gibbs_sweep(GibbsState& state, const PatchMatrix& patches);

// sum_i P_i^T D_{g(i)} alpha_i as a stacked patch matrix / complex image.
PatchMatrix code_patches(const GibbsState& state, int num_patches);
ComplexImage code_image(const GibbsState& state, int side);

Eigen::MatrixXd gather_columns(const PatchMatrix& patches, const std::vector<int>& ids);

}  // namespace gbdl
