#include "gbdl/sampling.hpp"

#include <cmath>
#include <stdexcept>

#include "gbdl/fourier.hpp"

namespace gbdl {

namespace {

// Angles come from a fixed uniform fan of fan_size(side) directions, visited
// in bit-reversed order. The first k angles are then a nested sequence (so
// the realized rate is monotone in the ray count) and for k a power of two
// they are exactly the uniformly spaced fan seed + pi*j/k.
int fan_size(int side) {
  const int needed = static_cast<int>(std::ceil(M_PI * side * std::sqrt(2.0)));
  int m = 1;
  while (m < needed) m *= 2;
  return m;
}

int bit_reverse(int v, int bits) {
  int out = 0;
  for (int b = 0; b < bits; ++b) out |= ((v >> b) & 1) << (bits - 1 - b);
  return out;
}

}  // namespace

SamplingMask radial_mask(int side, int num_rays, double seed_angle) {
  if (side < 2 || !is_power_of_two(side))
    throw std::invalid_argument("radial_mask: side must be a power of two >= 2");
  if (num_rays < 1) throw std::invalid_argument("radial_mask: num_rays must be >= 1");
  SamplingMask mask;
  mask.bits = MaskGrid::Zero(side, side);
  mask.num_rays = num_rays;
  const double cy = 0.5 * (side - 1);
  const double cx = 0.5 * (side - 1);
  const int fan = fan_size(side);
  int fan_bits = 0;
  while ((1 << fan_bits) < fan) ++fan_bits;
  const int rays = std::min(num_rays, fan);
  for (int ray = 0; ray < rays; ++ray) {
    const double theta = seed_angle + M_PI * bit_reverse(ray, fan_bits) / fan;
    const double dy = std::sin(theta), dx = std::cos(theta);
#pragma omp parallel for schedule(static)
    for (int r = 0; r < side; ++r) {
      for (int c = 0; c < side; ++c) {
        // signed perpendicular distance of the cell center from the line
        const double s = (r - cy) * dx - (c - cx) * dy;
        if (s > -0.5 && s <= 0.5) mask.bits(r, c) = 1;
      }
    }
  }
  mask.bits(side / 2, side / 2) = 1;  // DC is always acquired
  return mask;
}

double rate_for_rays(int side, int num_rays, double seed_angle) {
  return radial_mask(side, num_rays, seed_angle).rate();
}

int rays_for_rate(int side, double target_rate, double seed_angle) {
  if (!(target_rate > 0.0 && target_rate <= 1.0))
    throw std::invalid_argument("rays_for_rate: target must lie in (0,1]");
  // Angle spacing fine enough that every cell is within half a cell of some
  // ray; beyond this the mask is all ones.
  const int max_rays = static_cast<int>(std::ceil(M_PI * side * std::sqrt(2.0))) + 1;
  for (int rays = 1; rays <= max_rays; ++rays) {
    if (rate_for_rays(side, rays, seed_angle) >= target_rate) return rays;
  }
  throw std::invalid_argument("rays_for_rate: target rate not reachable");
}

KSpaceFrame measure(const ComplexImage& img, const SamplingMask& mask,
                    double noise_sigma, Rng& rng, int frame_index) {
  if (noise_sigma < 0.0) throw std::invalid_argument("measure: negative noise sigma");
  KSpaceFrame frame = kspace_sample(img, mask);
  frame.frame_index = frame_index;
  frame.noise_bound = 0.0;
  if (noise_sigma > 0.0) {
    double energy = 0.0;
    for (Eigen::Index k = 0; k < frame.values.size(); ++k) {
      const cd w(noise_sigma * rng.normal(), noise_sigma * rng.normal());
      frame.values(k) += w;
      energy += std::norm(w);
    }
    frame.noise_bound = std::sqrt(energy);
  }
  return frame;
}

}  // namespace gbdl
