#include "gbdl/fourier.hpp"

#include <fftw3.h>

#include <cmath>
#include <map>
#include <mutex>

namespace gbdl {
namespace {

// FFTW planning is not thread safe; execution with fftw_execute_dft is.
// Plans are cached per (side, sign), created with FFTW_ESTIMATE so planning
// never touches the input buffers.
class PlanCache {
 public:
  fftw_plan get(int side, int sign) {
    std::lock_guard<std::mutex> lock(mu_);
    auto key = std::make_pair(side, sign);
    auto it = plans_.find(key);
    if (it != plans_.end()) return it->second;
    fftw_complex* buf = fftw_alloc_complex(static_cast<size_t>(side) * side);
    fftw_plan p = fftw_plan_dft_2d(side, side, buf, buf, sign,
                                   FFTW_ESTIMATE | FFTW_UNALIGNED);
    fftw_free(buf);
    plans_.emplace(key, p);
    return p;
  }

 private:
  std::mutex mu_;
  std::map<std::pair<int, int>, fftw_plan> plans_;
};

PlanCache& plan_cache() {
  static PlanCache cache;
  return cache;
}

// Swap quadrants so that index 0 moves to side/2 (and back; the shift is an
// involution for even sides, and all our sides are powers of two).
ComplexImage fftshift(const ComplexImage& in) {
  const int n = static_cast<int>(in.rows());
  const int h = n / 2;
  ComplexImage out(n, n);
  for (int c = 0; c < n; ++c) {
    const int cc = (c + h) % n;
    for (int r = 0; r < n; ++r) out((r + h) % n, cc) = in(r, c);
  }
  return out;
}

ComplexImage run_fft(const ComplexImage& in, int sign) {
  const int n = static_cast<int>(in.rows());
  ComplexImage out(n, n);
  fftw_plan p = plan_cache().get(n, sign);
  // A square 2-D DFT commutes with transposition, so Eigen's column-major
  // buffer can be handed to FFTW's row-major transform unchanged.
  fftw_execute_dft(
      p,
      reinterpret_cast<fftw_complex*>(const_cast<cd*>(in.data())),
      reinterpret_cast<fftw_complex*>(out.data()));
  return out;
}

}  // namespace

ComplexImage fft2c(const ComplexImage& img) {
  check_square_pow2(img, "fft2c");
  const double scale = 1.0 / std::sqrt(static_cast<double>(img.size()));
  return fftshift(run_fft(img, FFTW_FORWARD)) * scale;
}

ComplexImage ifft2c(const ComplexImage& ksp) {
  check_square_pow2(ksp, "ifft2c");
  const double scale = 1.0 / std::sqrt(static_cast<double>(ksp.size()));
  return run_fft(fftshift(ksp), FFTW_BACKWARD) * scale;
}

KSpaceFrame kspace_sample(const ComplexImage& img, const SamplingMask& mask) {
  if (mask.side() != img.rows() || mask.side() != img.cols())
    throw std::invalid_argument("kspace_sample: mask/image dimension mismatch");
  const ComplexImage full = fft2c(img);
  KSpaceFrame frame;
  frame.mask = mask;
  frame.values.resize(mask.ones());
  Eigen::Index k = 0;
  const int n = mask.side();
  for (int r = 0; r < n; ++r)
    for (int c = 0; c < n; ++c)
      if (mask.bits(r, c)) frame.values(k++) = full(r, c);
  return frame;
}

ComplexImage embed_kspace(const KSpaceFrame& frame) {
  const int n = frame.mask.side();
  if (frame.values.size() != frame.mask.ones())
    throw std::invalid_argument("embed_kspace: value count != mask ones");
  ComplexImage grid = ComplexImage::Zero(n, n);
  Eigen::Index k = 0;
  for (int r = 0; r < n; ++r)
    for (int c = 0; c < n; ++c)
      if (frame.mask.bits(r, c)) grid(r, c) = frame.values(k++);
  return grid;
}

ComplexImage kspace_adjoint(const KSpaceFrame& frame) {
  return ifft2c(embed_kspace(frame));
}

}  // namespace gbdl
