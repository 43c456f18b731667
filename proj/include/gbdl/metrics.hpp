#pragma once

#include <Eigen/Dense>

#include "gbdl/image.hpp"

namespace gbdl {

// Peak signal-to-noise ratio on magnitude images, peak taken from truth.
// Identical images report the 300 dB cap.
double psnr(const ComplexImage& recon, const ComplexImage& truth);

inline constexpr double kPsnrCap = 300.0;

// Sparsity Gini index of |values|, in [0,1). Scale invariant; an all-zero
// vector is defined as 0.
double gini_index(const Eigen::VectorXd& values);

}  // namespace gbdl
