#pragma once

#include <Eigen/Dense>

#include "gbdl/image.hpp"

namespace gbdl {

// Overlapping sqrt(L) x sqrt(L) patches, one per pixel, stride one, wrapping
// around the image boundary. Column i holds the patch whose top-left pixel
// is i = r * side + c (row-major); entries are listed row-major within the
// patch. Complex images produce stacked columns [real; imag] of length 2L.
using PatchMatrix = Eigen::MatrixXd;

int patch_side(int patch_area);  // throws unless patch_area is a perfect square

PatchMatrix extract_patches(const RealImage& img, int patch_area);
PatchMatrix extract_patches(const ComplexImage& img, int patch_area);

// Transpose of extraction: sum of P_i^T p_i (the plain sum; the averaging
// divisor L belongs to the normal-equations denominator downstream).
RealImage assemble_patches_real(const PatchMatrix& patches, int side);
ComplexImage assemble_patches(const PatchMatrix& stacked, int side);

}  // namespace gbdl
