#pragma once

#include <Eigen/Dense>
#include <utility>
#include <vector>

#include "gbdl/patches.hpp"
#include "gbdl/rng.hpp"

namespace gbdl {

// Patch -> group assignment produced by k-means on a guide image, frozen for
// the rest of the run.
struct PatchGrouping {
  std::vector<int> assignment;  // patch index -> group id in [0, num_groups)
  Eigen::MatrixXd centroids;    // patch_dim x num_groups
  int num_groups = 0;
  int guide_frame = 0;
  std::vector<double> wcss_history;  // objective after each Lloyd iteration

  std::vector<std::vector<int>> members() const;  // patches per group, ascending
};

PatchGrouping kmeans_group(const PatchMatrix& patches, int num_groups,
                           uint64_t rng_seed, int max_iters = 50);

// Kernel K of the patch-dependence prior: 0 across groups or beyond the
// neighborhood radius, exp(-||p_i - p_j|| / sigma) otherwise.
double similarity_kernel(const Eigen::Ref<const Eigen::VectorXd>& p_i,
                         const Eigen::Ref<const Eigen::VectorXd>& p_j,
                         double loc_ri, double loc_ci, double loc_rj, double loc_cj,
                         int group_i, int group_j, double sigma, double radius);

// Row-normalized kernel weights. Row i lists (j, a_ij) over same-group
// patches within the spatial radius of i; each row sums to one, falling back
// to a self-only row when every kernel value underflows.
struct DependenceMatrix {
  std::vector<std::vector<std::pair<int, double>>> rows;
  double sigma = 1.0;
  double radius = 0.0;
};

// Spatial neighbor lists (same group, distance <= radius, self included),
// fixed once the grouping is fixed. Locations are top-left pixel coordinates
// of the patches; distances are plain Euclidean (no wrap).
std::vector<std::vector<int>> neighbor_lists(const PatchGrouping& grouping,
                                             int side, double radius);

// A_ij = K(p_i^cur, p_j^ref) / sum_j' K(p_i^cur, p_j'^ref) over the fixed
// neighbor pattern. Both patch sets share the grouping.
DependenceMatrix build_dependence(const PatchMatrix& patches_cur,
                                  const PatchMatrix& patches_ref,
                                  const PatchGrouping& grouping, int side,
                                  double sigma, double radius);

// Same, reusing precomputed neighbor lists (the per-iteration fast path;
// values identical to build_dependence).
void rebuild_dependence(DependenceMatrix& dep, const PatchMatrix& patches_cur,
                        const PatchMatrix& patches_ref,
                        const std::vector<std::vector<int>>& neighbors);

// Self-only rows (a_ii = 1): the dependence-disabled ablation.
DependenceMatrix identity_dependence(int num_patches);

// Median within-radius same-group patch distance on the guide image; the
// default kernel width. Falls back to 1.0 on degenerate (constant) guides.
double median_kernel_width(const PatchMatrix& patches, const PatchGrouping& grouping,
                           int side, double radius, uint64_t rng_seed,
                           int max_pairs = 20000);

}  // namespace gbdl
