#pragma once

#include <Eigen/Dense>
#include <complex>

#include "gbdl/image.hpp"
#include "gbdl/kspace.hpp"
#include "gbdl/rng.hpp"

// Test-side oracles, independent of the library's transform paths.
namespace oracle {

using gbdl::cd;

inline gbdl::ComplexImage random_image(int side, gbdl::Rng& rng, bool complex = true) {
  gbdl::ComplexImage img(side, side);
  for (int c = 0; c < side; ++c)
    for (int r = 0; r < side; ++r)
      img(r, c) = cd(rng.normal(), complex ? rng.normal() : 0.0);
  return img;
}

inline gbdl::SamplingMask random_mask(int side, gbdl::Rng& rng, double p = 0.5) {
  gbdl::SamplingMask m;
  m.bits = gbdl::MaskGrid::Zero(side, side);
  for (int r = 0; r < side; ++r)
    for (int c = 0; c < side; ++c) m.bits(r, c) = rng.bernoulli(p) ? 1 : 0;
  m.bits(side / 2, side / 2) = 1;
  return m;
}

inline gbdl::SamplingMask full_mask(int side) {
  gbdl::SamplingMask m;
  m.bits = gbdl::MaskGrid::Ones(side, side);
  return m;
}

// Dense centered unitary DFT matrix over row-major flattened pixels:
// output bin (pr,pc) carries frequency (pr - side/2, pc - side/2).
inline Eigen::MatrixXcd dft_matrix(int side) {
  const int n = side * side;
  Eigen::MatrixXcd F(n, n);
  const double scale = 1.0 / side;
  for (int pr = 0; pr < side; ++pr)
    for (int pc = 0; pc < side; ++pc) {
      const int kr = pr - side / 2, kc = pc - side / 2;
      for (int r = 0; r < side; ++r)
        for (int c = 0; c < side; ++c) {
          const double phase = -2.0 * M_PI * (static_cast<double>(kr) * r + static_cast<double>(kc) * c) / side;
          F(pr * side + pc, r * side + c) = scale * cd(std::cos(phase), std::sin(phase));
        }
    }
  return F;
}

inline Eigen::VectorXcd flatten(const gbdl::ComplexImage& img) {
  const int side = static_cast<int>(img.rows());
  Eigen::VectorXcd v(static_cast<Eigen::Index>(side) * side);
  for (int r = 0; r < side; ++r)
    for (int c = 0; c < side; ++c) v(r * side + c) = img(r, c);
  return v;
}

inline gbdl::ComplexImage unflatten(const Eigen::VectorXcd& v, int side) {
  gbdl::ComplexImage img(side, side);
  for (int r = 0; r < side; ++r)
    for (int c = 0; c < side; ++c) img(r, c) = v(r * side + c);
  return img;
}

inline double rel_err(const gbdl::ComplexImage& a, const gbdl::ComplexImage& b) {
  const double denom = b.norm();
  return denom > 0 ? (a - b).norm() / denom : a.norm();
}

}  // namespace oracle
