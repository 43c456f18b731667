#pragma once

#include <Eigen/Dense>
#include <complex>
#include <stdexcept>

namespace gbdl {

using cd = std::complex<double>;

// Square complex-valued image, side a power of two.
using ComplexImage = Eigen::MatrixXcd;
using RealImage = Eigen::MatrixXd;

inline bool is_power_of_two(int v) { return v > 0 && (v & (v - 1)) == 0; }

inline void check_square_pow2(const ComplexImage& img, const char* what) {
  if (img.rows() != img.cols())
    throw std::invalid_argument(std::string(what) + ": image must be square");
  if (!is_power_of_two(static_cast<int>(img.rows())))
    throw std::invalid_argument(std::string(what) + ": side must be a power of two");
}

inline RealImage magnitude(const ComplexImage& img) { return img.cwiseAbs(); }

// Default dyadic decomposition depth: log2(side) - 2, floored at 0.
inline int default_wavelet_levels(int side) {
  int log2side = 0;
  while ((1 << log2side) < side) ++log2side;
  return log2side > 2 ? log2side - 2 : 0;
}

}  // namespace gbdl
