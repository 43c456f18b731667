#pragma once

#include <Eigen/Dense>
#include <cstdint>

#include "gbdl/image.hpp"

namespace gbdl {

using MaskGrid = Eigen::Array<uint8_t, Eigen::Dynamic, Eigen::Dynamic>;

// Binary k-space sampling pattern on the centered grid (DC at side/2, side/2).
struct SamplingMask {
  MaskGrid bits;   // 0/1
  int num_rays = 0;

  int side() const { return static_cast<int>(bits.rows()); }
  long ones() const { return static_cast<long>(bits.cast<long>().sum()); }
  double rate() const {
    const long n = static_cast<long>(bits.size());
    return n == 0 ? 0.0 : static_cast<double>(ones()) / static_cast<double>(n);
  }
};

// Measured k-space values at mask=1 locations, row-major scan order.
struct KSpaceFrame {
  SamplingMask mask;
  Eigen::VectorXcd values;
  int frame_index = 0;
  double noise_bound = 0.0;  // l2 norm of the injected noise, 0 for exact data
};

}  // namespace gbdl
