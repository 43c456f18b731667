#pragma once

#include <cstdint>

#include "gbdl/io.hpp"

namespace gbdl {

// Dynamic ellipse phantom: static torso and marker structures, one ellipse
// translating and dilating across frames, one region with pulsating
// intensity. Real-valued, magnitudes in [0,1]; adjacent frames differ by at
// most ~15% in relative l2 norm at motion_amplitude = 1.
Dataset generate_phantom(int side, int frames, double motion_amplitude, uint64_t seed);

}  // namespace gbdl
