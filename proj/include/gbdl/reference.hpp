#pragma once

#include "gbdl/grouping.hpp"
#include "gbdl/patches.hpp"
#include "gbdl/wavelet.hpp"

// Straightforward single-threaded implementations of the parallel kernels.
// Kept as the comparison oracle for the unit tests and the benchmark; the
// assembly here is the literal scatter sum_i P_i^T p_i rather than the
// per-pixel gather used by the parallel path.
namespace gbdl::ref {

PatchMatrix extract_patches(const ComplexImage& img, int patch_area);
ComplexImage assemble_patches(const PatchMatrix& stacked, int side);

WaveletCoeffs dwt2(const ComplexImage& img, int levels);
ComplexImage idwt2(const WaveletCoeffs& coeffs);

// Definition-level dependence build: scans all patch pairs and applies the
// kernel conditions directly (no neighbor lists).
DependenceMatrix build_dependence(const PatchMatrix& patches_cur,
                                  const PatchMatrix& patches_ref,
                                  const PatchGrouping& grouping, int side,
                                  double sigma, double radius);

}  // namespace gbdl::ref
