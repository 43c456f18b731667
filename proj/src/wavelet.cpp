#include "gbdl/wavelet.hpp"

#include <cmath>
#include <stdexcept>
#include <vector>

namespace gbdl {
namespace {

// Orthonormal Daubechies-4 filter taps.
struct Db4 {
  double h[4];  // scaling (low-pass)
  double g[4];  // wavelet (high-pass), g[k] = (-1)^k h[3-k]
  Db4() {
    const double s3 = std::sqrt(3.0);
    const double s2 = std::sqrt(2.0);
    h[0] = (1.0 + s3) / (4.0 * s2);
    h[1] = (3.0 + s3) / (4.0 * s2);
    h[2] = (3.0 - s3) / (4.0 * s2);
    h[3] = (1.0 - s3) / (4.0 * s2);
    for (int k = 0; k < 4; ++k) g[k] = (k % 2 == 0 ? 1.0 : -1.0) * h[3 - k];
  }
};

const Db4 kDb4;

// One periodic analysis step of a length-len strided vector:
// approx[i] = sum_j h[j] x[(2i+j) mod len], detail likewise with g.
void analyze_1d(const cd* x, int len, int stride, cd* out) {
  const int half = len / 2;
  std::vector<cd> a(half), d(half);
  for (int i = 0; i < half; ++i) {
    cd ai(0.0, 0.0), di(0.0, 0.0);
    for (int j = 0; j < 4; ++j) {
      const cd v = x[((2 * i + j) % len) * stride];
      ai += kDb4.h[j] * v;
      di += kDb4.g[j] * v;
    }
    a[i] = ai;
    d[i] = di;
  }
  for (int i = 0; i < half; ++i) out[i * stride] = a[i];
  for (int i = 0; i < half; ++i) out[(i + half) * stride] = d[i];
}

// Transpose of analyze_1d (also its inverse, by orthonormality).
void synthesize_1d(const cd* x, int len, int stride, cd* out) {
  const int half = len / 2;
  std::vector<cd> y(len, cd(0.0, 0.0));
  for (int i = 0; i < half; ++i) {
    const cd ai = x[i * stride];
    const cd di = x[(i + half) * stride];
    for (int j = 0; j < 4; ++j)
      y[(2 * i + j) % len] += kDb4.h[j] * ai + kDb4.g[j] * di;
  }
  for (int m = 0; m < len; ++m) out[m * stride] = y[m];
}

void check_levels(int side, int levels, const char* what) {
  if (levels < 0) throw std::invalid_argument(std::string(what) + ": negative level count");
  if (levels > 0 && (side % (1 << levels)) != 0)
    throw std::invalid_argument(std::string(what) + ": side not divisible by 2^levels");
  if (levels > 0 && (side >> levels) < 1)
    throw std::invalid_argument(std::string(what) + ": too many levels");
}

}  // namespace

WaveletCoeffs dwt2(const ComplexImage& img, int levels) {
  check_square_pow2(img, "dwt2");
  const int n = static_cast<int>(img.rows());
  check_levels(n, levels, "dwt2");
  WaveletCoeffs w;
  w.data = img;
  w.levels = levels;
  for (int lv = 0, len = n; lv < levels; ++lv, len /= 2) {
    ComplexImage block = w.data.topLeftCorner(len, len);
    ComplexImage tmp(len, len);
#pragma omp parallel for schedule(static)
    for (int c = 0; c < len; ++c)
      analyze_1d(block.data() + static_cast<ptrdiff_t>(c) * len, len, 1,
                 tmp.data() + static_cast<ptrdiff_t>(c) * len);
#pragma omp parallel for schedule(static)
    for (int r = 0; r < len; ++r)
      analyze_1d(tmp.data() + r, len, len, block.data() + r);
    w.data.topLeftCorner(len, len) = block;
  }
  return w;
}

ComplexImage idwt2(const WaveletCoeffs& coeffs) {
  const int n = coeffs.side();
  check_levels(n, coeffs.levels, "idwt2");
  ComplexImage img = coeffs.data;
  for (int lv = coeffs.levels - 1; lv >= 0; --lv) {
    const int len = n >> lv;
    ComplexImage block = img.topLeftCorner(len, len);
    ComplexImage tmp(len, len);
#pragma omp parallel for schedule(static)
    for (int r = 0; r < len; ++r)
      synthesize_1d(block.data() + r, len, len, tmp.data() + r);
#pragma omp parallel for schedule(static)
    for (int c = 0; c < len; ++c)
      synthesize_1d(tmp.data() + static_cast<ptrdiff_t>(c) * len, len, 1,
                    block.data() + static_cast<ptrdiff_t>(c) * len);
    img.topLeftCorner(len, len) = block;
  }
  return img;
}

SupportSet estimate_support(const ComplexImage& reference, double tau, int levels) {
  if (!(tau > 0.0 && tau < 1.0))
    throw std::invalid_argument("estimate_support: tau must lie in (0,1)");
  const WaveletCoeffs w = dwt2(reference, levels);
  const int n = w.side();
  SupportSet s;
  s.in_support = MaskGrid::Zero(n, n);
  const double peak = w.data.cwiseAbs().maxCoeff();
  if (peak == 0.0) {
    s.threshold = 0.0;  // all-zero reference: empty support
    return s;
  }
  s.threshold = tau * peak;
  for (int c = 0; c < n; ++c)
    for (int r = 0; r < n; ++r)
      if (std::abs(w.data(r, c)) >= s.threshold) s.in_support(r, c) = 1;
  return s;
}

WaveletCoeffs project_off_support(const WaveletCoeffs& coeffs, const SupportSet& support) {
  if (support.in_support.rows() != coeffs.data.rows() ||
      support.in_support.cols() != coeffs.data.cols())
    throw std::invalid_argument("project_off_support: support/grid mismatch");
  WaveletCoeffs out = coeffs;
  const int n = coeffs.side();
  for (int c = 0; c < n; ++c)
    for (int r = 0; r < n; ++r)
      if (support.in_support(r, c)) out.data(r, c) = cd(0.0, 0.0);
  return out;
}

}  // namespace gbdl
