#include "gbdl/reference.hpp"

#include <cmath>
#include <stdexcept>
#include <vector>

namespace gbdl::ref {

PatchMatrix extract_patches(const ComplexImage& img, int patch_area) {
  const int n = static_cast<int>(img.rows());
  const int ps = patch_side(patch_area);
  PatchMatrix out(2 * patch_area, static_cast<Eigen::Index>(n) * n);
  for (int r0 = 0; r0 < n; ++r0) {
    for (int c0 = 0; c0 < n; ++c0) {
      const int i = r0 * n + c0;
      int k = 0;
      for (int dr = 0; dr < ps; ++dr)
        for (int dc = 0; dc < ps; ++dc) {
          const cd v = img((r0 + dr) % n, (c0 + dc) % n);
          out(k, i) = v.real();
          out(k + patch_area, i) = v.imag();
          ++k;
        }
    }
  }
  return out;
}

ComplexImage assemble_patches(const PatchMatrix& stacked, int side) {
  if (stacked.rows() % 2 != 0)
    throw std::invalid_argument("ref::assemble_patches: stacked rows must be 2L");
  const int patch_area = static_cast<int>(stacked.rows()) / 2;
  const int ps = patch_side(patch_area);
  ComplexImage img = ComplexImage::Zero(side, side);
  for (int i = 0; i < side * side; ++i) {
    const int r0 = i / side, c0 = i % side;
    int k = 0;
    for (int dr = 0; dr < ps; ++dr)
      for (int dc = 0; dc < ps; ++dc) {
        img((r0 + dr) % side, (c0 + dc) % side) +=
            cd(stacked(k, i), stacked(k + patch_area, i));
        ++k;
      }
  }
  return img;
}

namespace {

struct Db4 {
  double h[4];
  double g[4];
  Db4() {
    const double s3 = std::sqrt(3.0), s2 = std::sqrt(2.0);
    h[0] = (1.0 + s3) / (4.0 * s2);
    h[1] = (3.0 + s3) / (4.0 * s2);
    h[2] = (3.0 - s3) / (4.0 * s2);
    h[3] = (1.0 - s3) / (4.0 * s2);
    for (int k = 0; k < 4; ++k) g[k] = (k % 2 == 0 ? 1.0 : -1.0) * h[3 - k];
  }
};
const Db4 kDb4;

Eigen::VectorXcd analyze(const Eigen::VectorXcd& x) {
  const int len = static_cast<int>(x.size());
  const int half = len / 2;
  Eigen::VectorXcd out(len);
  for (int i = 0; i < half; ++i) {
    cd a(0, 0), d(0, 0);
    for (int j = 0; j < 4; ++j) {
      const cd v = x((2 * i + j) % len);
      a += kDb4.h[j] * v;
      d += kDb4.g[j] * v;
    }
    out(i) = a;
    out(i + half) = d;
  }
  return out;
}

Eigen::VectorXcd synthesize(const Eigen::VectorXcd& x) {
  const int len = static_cast<int>(x.size());
  const int half = len / 2;
  Eigen::VectorXcd out = Eigen::VectorXcd::Zero(len);
  for (int i = 0; i < half; ++i)
    for (int j = 0; j < 4; ++j)
      out((2 * i + j) % len) += kDb4.h[j] * x(i) + kDb4.g[j] * x(i + half);
  return out;
}

}  // namespace

WaveletCoeffs dwt2(const ComplexImage& img, int levels) {
  WaveletCoeffs w;
  w.data = img;
  w.levels = levels;
  const int n = static_cast<int>(img.rows());
  for (int lv = 0, len = n; lv < levels; ++lv, len /= 2) {
    ComplexImage block = w.data.topLeftCorner(len, len);
    for (int c = 0; c < len; ++c) block.col(c) = analyze(block.col(c));
    for (int r = 0; r < len; ++r)
      block.row(r) = analyze(block.row(r).transpose()).transpose();
    w.data.topLeftCorner(len, len) = block;
  }
  return w;
}

ComplexImage idwt2(const WaveletCoeffs& coeffs) {
  ComplexImage img = coeffs.data;
  const int n = static_cast<int>(img.rows());
  for (int lv = coeffs.levels - 1; lv >= 0; --lv) {
    const int len = n >> lv;
    ComplexImage block = img.topLeftCorner(len, len);
    for (int r = 0; r < len; ++r)
      block.row(r) = synthesize(block.row(r).transpose()).transpose();
    for (int c = 0; c < len; ++c) block.col(c) = synthesize(block.col(c));
    img.topLeftCorner(len, len) = block;
  }
  return img;
}

DependenceMatrix build_dependence(const PatchMatrix& patches_cur,
                                  const PatchMatrix& patches_ref,
                                  const PatchGrouping& grouping, int side,
                                  double sigma, double radius) {
  const int n = static_cast<int>(patches_cur.cols());
  DependenceMatrix dep;
  dep.sigma = sigma;
  dep.radius = radius;
  dep.rows.resize(static_cast<size_t>(n));
  for (int i = 0; i < n; ++i) {
    auto& row = dep.rows[static_cast<size_t>(i)];
    double total = 0.0;
    for (int j = 0; j < n; ++j) {
      const double k = similarity_kernel(
          patches_cur.col(i), patches_ref.col(j), i / side, i % side, j / side,
          j % side, grouping.assignment[static_cast<size_t>(i)],
          grouping.assignment[static_cast<size_t>(j)], sigma, radius);
      if (k > 0.0) {
        row.emplace_back(j, k);
        total += k;
      }
    }
    if (total <= 0.0) {
      row.clear();
      row.emplace_back(i, 1.0);
    } else {
      for (auto& [j, w] : row) w /= total;
    }
  }
  return dep;
}

}  // namespace gbdl::ref
