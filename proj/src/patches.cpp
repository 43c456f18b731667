#include "gbdl/patches.hpp"

#include <cmath>
#include <stdexcept>

namespace gbdl {

int patch_side(int patch_area) {
  if (patch_area <= 0) throw std::invalid_argument("patch area must be positive");
  const int s = static_cast<int>(std::lround(std::sqrt(static_cast<double>(patch_area))));
  if (s * s != patch_area)
    throw std::invalid_argument("patch area must be a perfect square");
  return s;
}

PatchMatrix extract_patches(const RealImage& img, int patch_area) {
  const int n = static_cast<int>(img.rows());
  if (img.cols() != n) throw std::invalid_argument("extract_patches: image must be square");
  const int ps = patch_side(patch_area);
  if (ps > n) throw std::invalid_argument("extract_patches: patch larger than image");
  PatchMatrix out(patch_area, static_cast<Eigen::Index>(n) * n);
#pragma omp parallel for schedule(static)
  for (int i = 0; i < n * n; ++i) {
    const int r0 = i / n, c0 = i % n;
    int k = 0;
    for (int dr = 0; dr < ps; ++dr) {
      const int r = (r0 + dr) % n;
      for (int dc = 0; dc < ps; ++dc) out(k++, i) = img(r, (c0 + dc) % n);
    }
  }
  return out;
}

PatchMatrix extract_patches(const ComplexImage& img, int patch_area) {
  const int n = static_cast<int>(img.rows());
  if (img.cols() != n) throw std::invalid_argument("extract_patches: image must be square");
  const int ps = patch_side(patch_area);
  if (ps > n) throw std::invalid_argument("extract_patches: patch larger than image");
  PatchMatrix out(2 * patch_area, static_cast<Eigen::Index>(n) * n);
#pragma omp parallel for schedule(static)
  for (int i = 0; i < n * n; ++i) {
    const int r0 = i / n, c0 = i % n;
    int k = 0;
    for (int dr = 0; dr < ps; ++dr) {
      const int r = (r0 + dr) % n;
      for (int dc = 0; dc < ps; ++dc) {
        const cd v = img(r, (c0 + dc) % n);
        out(k, i) = v.real();
        out(k + patch_area, i) = v.imag();
        ++k;
      }
    }
  }
  return out;
}

namespace {

// Gather form of sum_i P_i^T p_i: every pixel receives exactly L
// contributions, accumulated in a fixed order so the parallel result is
// bit-stable.
template <typename Write>
void assemble_impl(const PatchMatrix& patches, int side, int patch_area, Write&& write) {
  const int ps = patch_side(patch_area);
#pragma omp parallel for schedule(static)
  for (int p = 0; p < side * side; ++p) {
    const int r = p / side, c = p % side;
    double re = 0.0, im = 0.0;
    for (int dr = 0; dr < ps; ++dr) {
      const int pr = (r - dr + side) % side;  // patch whose row offset dr hits r
      for (int dc = 0; dc < ps; ++dc) {
        const int pc = (c - dc + side) % side;
        const int patch = pr * side + pc;
        const int entry = dr * ps + dc;
        re += patches(entry, patch);
        if (patches.rows() == 2 * patch_area) im += patches(entry + patch_area, patch);
      }
    }
    write(r, c, re, im);
  }
}

}  // namespace

RealImage assemble_patches_real(const PatchMatrix& patches, int side) {
  const int patch_area = static_cast<int>(patches.rows());
  if (patches.cols() != static_cast<Eigen::Index>(side) * side)
    throw std::invalid_argument("assemble_patches: one column per pixel required");
  RealImage img(side, side);
  assemble_impl(patches, side, patch_area,
                [&](int r, int c, double re, double) { img(r, c) = re; });
  return img;
}

ComplexImage assemble_patches(const PatchMatrix& stacked, int side) {
  if (stacked.rows() % 2 != 0)
    throw std::invalid_argument("assemble_patches: stacked rows must be 2L");
  const int patch_area = static_cast<int>(stacked.rows()) / 2;
  if (stacked.cols() != static_cast<Eigen::Index>(side) * side)
    throw std::invalid_argument("assemble_patches: one column per pixel required");
  ComplexImage img(side, side);
  assemble_impl(stacked, side, patch_area,
                [&](int r, int c, double re, double im) { img(r, c) = cd(re, im); });
  return img;
}

}  // namespace gbdl
