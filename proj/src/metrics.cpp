#include "gbdl/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <vector>

namespace gbdl {

double psnr(const ComplexImage& recon, const ComplexImage& truth) {
  if (recon.rows() != truth.rows() || recon.cols() != truth.cols())
    throw std::invalid_argument("psnr: dimension mismatch");
  const RealImage a = recon.cwiseAbs();
  const RealImage b = truth.cwiseAbs();
  const double peak = b.maxCoeff();
  if (peak <= 0.0) throw std::invalid_argument("psnr: truth is all zero");
  const double mse = (a - b).squaredNorm() / static_cast<double>(a.size());
  if (mse <= peak * peak * 1e-30) return kPsnrCap;
  return std::min(kPsnrCap, 10.0 * std::log10(peak * peak / mse));
}

double gini_index(const Eigen::VectorXd& values) {
  const Eigen::Index n = values.size();
  if (n == 0) return 0.0;
  std::vector<double> c(static_cast<size_t>(n));
  for (Eigen::Index i = 0; i < n; ++i) c[static_cast<size_t>(i)] = std::abs(values(i));
  std::sort(c.begin(), c.end());
  double l1 = 0.0;
  for (double v : c) l1 += v;
  if (l1 <= 0.0) return 0.0;
  const double N = static_cast<double>(n);
  double acc = 0.0;
  for (Eigen::Index k = 1; k <= n; ++k)
    acc += (c[static_cast<size_t>(k - 1)] / l1) * ((N - k + 0.5) / N);
  return 1.0 - 2.0 * acc;
}

}  // namespace gbdl
