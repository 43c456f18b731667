#pragma once

#include <Eigen/Dense>
#include <cstdint>

#include "gbdl/image.hpp"
#include "gbdl/kspace.hpp"

namespace gbdl {

// Coefficients of the separable orthonormal Daubechies-4 transform in the
// usual pyramid layout (approximation block in the top-left corner).
struct WaveletCoeffs {
  ComplexImage data;
  int levels = 0;

  int side() const { return static_cast<int>(data.rows()); }
};

// Wavelet-domain index set kept free of the sparsity penalty. Stored as a
// 0/1 grid over the coefficient plane.
struct SupportSet {
  MaskGrid in_support;     // 1 where the index belongs to the support
  double threshold = 0.0;  // absolute magnitude threshold that built it

  long count() const { return static_cast<long>(in_support.cast<long>().sum()); }
  bool empty() const { return in_support.size() == 0 || count() == 0; }
};

// Orthonormal periodic Daubechies-4 analysis/synthesis. levels = 0 is the
// identity. Throws if levels is negative or side is not divisible by
// 2^levels.
WaveletCoeffs dwt2(const ComplexImage& img, int levels);
ComplexImage idwt2(const WaveletCoeffs& coeffs);

// S = { (i,j) : |(W x)_{i,j}| >= tau * max |W x| }. tau must lie in (0,1).
// An all-zero reference yields an empty support.
SupportSet estimate_support(const ComplexImage& reference, double tau, int levels);

// Zero the coefficients whose index lies IN the support; pass the
// complement through. A projection (idempotent).
WaveletCoeffs project_off_support(const WaveletCoeffs& coeffs, const SupportSet& support);

}  // namespace gbdl
