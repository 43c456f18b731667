#include "gbdl/grouping.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace gbdl {

std::vector<std::vector<int>> PatchGrouping::members() const {
  std::vector<std::vector<int>> m(static_cast<size_t>(num_groups));
  for (int i = 0; i < static_cast<int>(assignment.size()); ++i)
    m[static_cast<size_t>(assignment[static_cast<size_t>(i)])].push_back(i);
  return m;
}

namespace {

// Nearest centroid, lowest index on ties.
int nearest(const PatchMatrix& patches, int i, const Eigen::MatrixXd& centroids) {
  int best = 0;
  double bestd = (patches.col(i) - centroids.col(0)).squaredNorm();
  for (int g = 1; g < centroids.cols(); ++g) {
    const double d = (patches.col(i) - centroids.col(g)).squaredNorm();
    if (d < bestd) {
      bestd = d;
      best = g;
    }
  }
  return best;
}

}  // namespace

PatchGrouping kmeans_group(const PatchMatrix& patches, int num_groups,
                           uint64_t rng_seed, int max_iters) {
  const int n = static_cast<int>(patches.cols());
  if (num_groups < 1) throw std::invalid_argument("kmeans_group: num_groups must be >= 1");
  if (num_groups > n) throw std::invalid_argument("kmeans_group: more groups than patches");

  Rng rng(rng_seed, 0x6b6d65616e73ULL);  // dedicated k-means stream
  PatchGrouping grouping;
  grouping.num_groups = num_groups;
  grouping.assignment.assign(static_cast<size_t>(n), 0);
  grouping.centroids.resize(patches.rows(), num_groups);

  // k-means++ seeding
  std::vector<double> dist2(static_cast<size_t>(n), 0.0);
  {
    const int first = static_cast<int>(rng.u64() % static_cast<uint64_t>(n));
    grouping.centroids.col(0) = patches.col(first);
    for (int i = 0; i < n; ++i)
      dist2[static_cast<size_t>(i)] =
          (patches.col(i) - grouping.centroids.col(0)).squaredNorm();
    for (int g = 1; g < num_groups; ++g) {
      double total = 0.0;
      for (double d : dist2) total += d;
      int pick;
      if (total <= 0.0) {
        pick = static_cast<int>(rng.u64() % static_cast<uint64_t>(n));
      } else {
        const double target = rng.uniform() * total;
        double acc = 0.0;
        pick = n - 1;
        for (int i = 0; i < n; ++i) {
          acc += dist2[static_cast<size_t>(i)];
          if (acc >= target) {
            pick = i;
            break;
          }
        }
      }
      grouping.centroids.col(g) = patches.col(pick);
      for (int i = 0; i < n; ++i) {
        const double d = (patches.col(i) - grouping.centroids.col(g)).squaredNorm();
        if (d < dist2[static_cast<size_t>(i)]) dist2[static_cast<size_t>(i)] = d;
      }
    }
  }

  std::vector<int> counts(static_cast<size_t>(num_groups), 0);
  for (int iter = 0; iter < max_iters; ++iter) {
    bool changed = false;
#pragma omp parallel for schedule(static) reduction(|| : changed)
    for (int i = 0; i < n; ++i) {
      const int g = nearest(patches, i, grouping.centroids);
      if (g != grouping.assignment[static_cast<size_t>(i)]) {
        grouping.assignment[static_cast<size_t>(i)] = g;
        changed = true;
      }
    }

    std::fill(counts.begin(), counts.end(), 0);
    for (int i = 0; i < n; ++i) ++counts[static_cast<size_t>(grouping.assignment[static_cast<size_t>(i)])];

    // Empty-group repair: hand the farthest member of the largest group to
    // the empty one. Strictly decreases the objective.
    for (int g = 0; g < num_groups; ++g) {
      if (counts[static_cast<size_t>(g)] > 0) continue;
      int big = static_cast<int>(std::max_element(counts.begin(), counts.end()) - counts.begin());
      int far_idx = -1;
      double far_d = -1.0;
      for (int i = 0; i < n; ++i) {
        if (grouping.assignment[static_cast<size_t>(i)] != big) continue;
        const double d = (patches.col(i) - grouping.centroids.col(big)).squaredNorm();
        if (d > far_d) {
          far_d = d;
          far_idx = i;
        }
      }
      grouping.assignment[static_cast<size_t>(far_idx)] = g;
      grouping.centroids.col(g) = patches.col(far_idx);
      --counts[static_cast<size_t>(big)];
      ++counts[static_cast<size_t>(g)];
      changed = true;
    }

    // Centroid update, fixed accumulation order per group.
    Eigen::MatrixXd sums = Eigen::MatrixXd::Zero(patches.rows(), num_groups);
    for (int i = 0; i < n; ++i)
      sums.col(grouping.assignment[static_cast<size_t>(i)]) += patches.col(i);
    for (int g = 0; g < num_groups; ++g)
      if (counts[static_cast<size_t>(g)] > 0)
        grouping.centroids.col(g) = sums.col(g) / counts[static_cast<size_t>(g)];

    double wcss = 0.0;
#pragma omp parallel for schedule(static) reduction(+ : wcss)
    for (int i = 0; i < n; ++i)
      wcss += (patches.col(i) -
               grouping.centroids.col(grouping.assignment[static_cast<size_t>(i)]))
                  .squaredNorm();
    grouping.wcss_history.push_back(wcss);

    if (!changed) break;
  }
  return grouping;
}

double similarity_kernel(const Eigen::Ref<const Eigen::VectorXd>& p_i,
                         const Eigen::Ref<const Eigen::VectorXd>& p_j,
                         double loc_ri, double loc_ci, double loc_rj, double loc_cj,
                         int group_i, int group_j, double sigma, double radius) {
  if (sigma <= 0.0) throw std::invalid_argument("similarity_kernel: sigma must be > 0");
  if (group_i != group_j) return 0.0;
  const double dr = loc_ri - loc_rj, dc = loc_ci - loc_cj;
  if (std::sqrt(dr * dr + dc * dc) > radius) return 0.0;
  return std::exp(-(p_i - p_j).norm() / sigma);
}

std::vector<std::vector<int>> neighbor_lists(const PatchGrouping& grouping,
                                             int side, double radius) {
  const int n = static_cast<int>(grouping.assignment.size());
  if (n != side * side)
    throw std::invalid_argument("neighbor_lists: assignment size != side^2");
  const int r_int = static_cast<int>(std::floor(radius));
  // Disc offsets once; reused for every patch.
  std::vector<std::pair<int, int>> disc;
  for (int dr = -r_int; dr <= r_int; ++dr)
    for (int dc = -r_int; dc <= r_int; ++dc)
      if (static_cast<double>(dr) * dr + static_cast<double>(dc) * dc <= radius * radius)
        disc.emplace_back(dr, dc);

  std::vector<std::vector<int>> out(static_cast<size_t>(n));
#pragma omp parallel for schedule(static)
  for (int i = 0; i < n; ++i) {
    const int r = i / side, c = i % side;
    const int gi = grouping.assignment[static_cast<size_t>(i)];
    auto& row = out[static_cast<size_t>(i)];
    for (const auto& [dr, dc] : disc) {
      const int rr = r + dr, cc = c + dc;
      if (rr < 0 || rr >= side || cc < 0 || cc >= side) continue;  // no wrap
      const int j = rr * side + cc;
      if (grouping.assignment[static_cast<size_t>(j)] == gi) row.push_back(j);
    }
    std::sort(row.begin(), row.end());
  }
  return out;
}

void rebuild_dependence(DependenceMatrix& dep, const PatchMatrix& patches_cur,
                        const PatchMatrix& patches_ref,
                        const std::vector<std::vector<int>>& neighbors) {
  const int n = static_cast<int>(neighbors.size());
  dep.rows.resize(static_cast<size_t>(n));
#pragma omp parallel for schedule(dynamic, 64)
  for (int i = 0; i < n; ++i) {
    auto& row = dep.rows[static_cast<size_t>(i)];
    row.clear();
    double total = 0.0;
    for (int j : neighbors[static_cast<size_t>(i)]) {
      const double k =
          std::exp(-(patches_cur.col(i) - patches_ref.col(j)).norm() / dep.sigma);
      if (k > 0.0) {
        row.emplace_back(j, k);
        total += k;
      }
    }
    if (total <= 0.0) {
      row.clear();
      row.emplace_back(i, 1.0);  // all kernels underflowed: self-only row
    } else {
      for (auto& [j, w] : row) w /= total;
    }
  }
}

DependenceMatrix build_dependence(const PatchMatrix& patches_cur,
                                  const PatchMatrix& patches_ref,
                                  const PatchGrouping& grouping, int side,
                                  double sigma, double radius) {
  if (sigma <= 0.0) throw std::invalid_argument("build_dependence: sigma must be > 0");
  if (patches_cur.cols() != patches_ref.cols())
    throw std::invalid_argument("build_dependence: patch sets differ in size");
  DependenceMatrix dep;
  dep.sigma = sigma;
  dep.radius = radius;
  rebuild_dependence(dep, patches_cur, patches_ref, neighbor_lists(grouping, side, radius));
  return dep;
}

DependenceMatrix identity_dependence(int num_patches) {
  DependenceMatrix dep;
  dep.radius = 0.0;
  dep.rows.resize(static_cast<size_t>(num_patches));
  for (int i = 0; i < num_patches; ++i)
    dep.rows[static_cast<size_t>(i)] = {{i, 1.0}};
  return dep;
}

double median_kernel_width(const PatchMatrix& patches, const PatchGrouping& grouping,
                           int side, double radius, uint64_t rng_seed, int max_pairs) {
  const auto neighbors = neighbor_lists(grouping, side, radius);
  const int n = static_cast<int>(patches.cols());
  Rng rng(rng_seed, 0x7369676d61ULL);
  std::vector<double> dists;
  dists.reserve(static_cast<size_t>(max_pairs));
  for (int t = 0; t < max_pairs; ++t) {
    const int i = static_cast<int>(rng.u64() % static_cast<uint64_t>(n));
    const auto& row = neighbors[static_cast<size_t>(i)];
    if (row.size() < 2) continue;
    const int j = row[rng.u64() % row.size()];
    if (j == i) continue;
    dists.push_back((patches.col(i) - patches.col(j)).norm());
  }
  if (dists.empty()) return 1.0;
  std::nth_element(dists.begin(), dists.begin() + static_cast<ptrdiff_t>(dists.size() / 2),
                   dists.end());
  const double med = dists[dists.size() / 2];
  return med > 0.0 ? med : 1.0;
}

}  // namespace gbdl
