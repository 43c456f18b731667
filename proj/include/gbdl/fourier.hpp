#pragma once

#include "gbdl/image.hpp"
#include "gbdl/kspace.hpp"

namespace gbdl {

// Centered unitary 2-D DFT pair: DC lands at (side/2, side/2) and
// ||fft2c(x)|| = ||x||, so ifft2c is the exact adjoint and inverse.
ComplexImage fft2c(const ComplexImage& img);
ComplexImage ifft2c(const ComplexImage& ksp);

// Undersampled Fourier operator F_u: centered unitary DFT restricted to
// mask=1 locations (row-major scan order).
KSpaceFrame kspace_sample(const ComplexImage& img, const SamplingMask& mask);

// Adjoint of F_u: embed the measurements at their mask locations, zero
// elsewhere, inverse transform. Also the zero-filled reconstruction.
ComplexImage kspace_adjoint(const KSpaceFrame& frame);

// Embed measured values onto the full centered k-space grid (zeros off-mask).
ComplexImage embed_kspace(const KSpaceFrame& frame);

}  // namespace gbdl
