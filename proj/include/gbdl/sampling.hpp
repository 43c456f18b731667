#pragma once

#include "gbdl/image.hpp"
#include "gbdl/kspace.hpp"
#include "gbdl/rng.hpp"

namespace gbdl {

// Rasterize num_rays uniformly spaced full-diameter lines through the grid
// center. A cell is marked when its center lies in the signed band
// (-1/2, 1/2] around the continuous line; the DC cell (side/2, side/2) is
// always included.
SamplingMask radial_mask(int side, int num_rays, double seed_angle = 0.0);

double rate_for_rays(int side, int num_rays, double seed_angle = 0.0);

// Minimal ray count whose realized rate reaches target_rate (linear scan, so
// no monotonicity assumption is baked in). Throws if the target is not
// reachable before saturation.
int rays_for_rate(int side, double target_rate, double seed_angle = 0.0);

// y = F_u(x) + w with circularly symmetric complex Gaussian noise of
// per-component standard deviation noise_sigma on the sampled entries.
KSpaceFrame measure(const ComplexImage& img, const SamplingMask& mask,
                    double noise_sigma, Rng& rng, int frame_index = 0);

}  // namespace gbdl
