#include "gbdl/admm.hpp"

#include <cmath>
#include <limits>

#include "gbdl/metrics.hpp"
#include "gbdl/patches.hpp"

namespace gbdl {

SupportSet empty_support(int side) {
  SupportSet s;
  s.in_support = MaskGrid::Zero(side, side);
  s.threshold = 0.0;
  return s;
}

WaveletCoeffs v_update(const WaveletCoeffs& c, const SupportSet& support, double kappa) {
  if (support.in_support.rows() != c.data.rows() ||
      support.in_support.cols() != c.data.cols())
    throw std::invalid_argument("v_update: support/grid mismatch");
  WaveletCoeffs v = c;
  if (kappa <= 0.0) return v;
  const int n = c.side();
#pragma omp parallel for schedule(static)
  for (int col = 0; col < n; ++col) {
    for (int row = 0; row < n; ++row) {
      if (support.in_support(row, col)) continue;  // no penalty on the support
      const cd val = c.data(row, col);
      const double mag = std::abs(val);
      v.data(row, col) = mag > kappa ? val * (1.0 - kappa / mag) : cd(0.0, 0.0);
    }
  }
  return v;
}

ComplexImage x_update(const ComplexImage& code_sum, const KSpaceFrame& y,
                      const WaveletCoeffs& v, const WaveletCoeffs& u,
                      double gamma_eps, int patch_area, const AdmmWeights& w) {
  const int side = y.mask.side();
  if (code_sum.rows() != side || v.data.rows() != side)
    throw std::invalid_argument("x_update: dimension mismatch");
  WaveletCoeffs vu;
  vu.levels = v.levels;
  vu.data = v.data - u.data;

  const ComplexImage code_hat = fft2c(code_sum);
  const ComplexImage vu_hat = fft2c(idwt2(vu));
  const ComplexImage y_grid = embed_kspace(y);

  const double gl = gamma_eps * static_cast<double>(patch_area);
  ComplexImage x_hat(side, side);
#pragma omp parallel for schedule(static)
  for (int c = 0; c < side; ++c) {
    for (int r = 0; r < side; ++r) {
      const bool sampled = y.mask.bits(r, c) != 0;
      if (w.noiseless && sampled) {
        x_hat(r, c) = y_grid(r, c);
        continue;
      }
      const double data_w = (!w.noiseless && sampled) ? w.lambda : 0.0;
      x_hat(r, c) = (gamma_eps * code_hat(r, c) + data_w * y_grid(r, c) +
                     w.rho * vu_hat(r, c)) /
                    (gl + data_w + w.rho);
    }
  }
  return ifft2c(x_hat);
}

void dual_update(WaveletCoeffs& u, const WaveletCoeffs& wx, const WaveletCoeffs& v) {
  u.data += wx.data - v.data;
}

namespace {

double data_consistency_error(const ComplexImage& x, const KSpaceFrame& y) {
  const KSpaceFrame fx = kspace_sample(x, y.mask);
  const double yn = y.values.norm();
  return yn > 0.0 ? (fx.values - y.values).norm() / yn : (fx.values).norm();
}

}  // namespace

FrameResult reconstruct_frame(const KSpaceFrame& y, const PatchGrouping& grouping,
                              const std::vector<std::vector<int>>& neighbors,
                              GibbsState& state, const SupportSet& support,
                              const ReconOptions& opt, const ComplexImage* init_ref,
                              const ComplexImage* truth) {
  const int side = y.mask.side();
  if (static_cast<int>(grouping.assignment.size()) != side * side)
    throw std::invalid_argument("reconstruct_frame: grouping does not match the frame");
  FrameResult res;
  ComplexImage x = kspace_adjoint(y);  // zero-filled start
  if (!x.allFinite())
    throw NumericalAbort("reconstruct_frame: non-finite measurements", res.diags);

  WaveletCoeffs u;
  u.levels = opt.levels;
  u.data = ComplexImage::Zero(side, side);

  DependenceMatrix dep;
  dep.sigma = opt.sigma;
  dep.radius = opt.radius;
  if (!opt.self_only_dependence) {
    // Initial kernel: current estimate against the reference frame.
    const PatchMatrix p0 = extract_patches(x, opt.patch_area);
    const PatchMatrix pref =
        init_ref ? extract_patches(*init_ref, opt.patch_area) : p0;
    rebuild_dependence(dep, p0, pref, neighbors);
    set_dependence(state, dep);
  }

  const double kappa = opt.weights.lambda_g / opt.weights.rho;
  for (int it = 1; it <= opt.max_iters; ++it) {
    WaveletCoeffs c = dwt2(x, opt.levels);
    c.data += u.data;
    const WaveletCoeffs v = v_update(c, support, kappa);

    const PatchMatrix patches = extract_patches(x, opt.patch_area);
    if (!opt.self_only_dependence && it >= 2) {
      // Later sweeps: patch similarity within the current frame.
      rebuild_dependence(dep, patches, patches, neighbors);
      set_dependence(state, dep);
    }
    gibbs_sweep(state, patches);

    const ComplexImage code = code_image(state, side);
    const ComplexImage xn = x_update(code, y, v, u, state.effective_noise_precision(),
                                     opt.patch_area, opt.weights);
    const WaveletCoeffs wxn = dwt2(xn, opt.levels);
    u.data += wxn.data - v.data;

    IterationDiag d;
    d.iteration = it;
    const double xnorm = x.norm();
    d.rel_change = xnorm > 0.0 ? (xn - x).norm() / xnorm : xn.norm();
    d.data_error = data_consistency_error(xn, y);
    d.dual_gap = (wxn.data - v.data).norm();
    d.iterate_norm = xn.norm();
    d.active_atoms = state.active_atoms();
    d.code_gini = state.mean_code_gini();
    d.psnr = truth ? psnr(xn, *truth) : std::numeric_limits<double>::quiet_NaN();
    res.diags.push_back(d);
    res.iterations = it;

    x = xn;
    if (!x.allFinite())
      throw NumericalAbort("reconstruct_frame: non-finite iterate at iteration " +
                               std::to_string(it),
                           res.diags);
    if (d.rel_change < opt.tolerance) break;
  }
  res.image = std::move(x);
  return res;
}

}  // namespace gbdl
