#pragma once

#include <stdexcept>
#include <string>
#include <vector>

#include "gbdl/dictlearn.hpp"
#include "gbdl/fourier.hpp"
#include "gbdl/wavelet.hpp"

namespace gbdl {

struct AdmmWeights {
  double lambda_g = 10.0;  // global sparsity weight
  double rho = 1000.0;     // augmented Lagrangian penalty
  double lambda = 1e10;    // data-consistency weight (ignored when noiseless)
  bool noiseless = true;   // replace sampled k-space entries exactly
};

struct IterationDiag {
  int iteration = 0;
  double rel_change = 0.0;    // ||x_k - x_{k-1}|| / ||x_{k-1}||
  double data_error = 0.0;    // ||F_u x - y|| / ||y||
  double dual_gap = 0.0;      // ||W x - v||
  double iterate_norm = 0.0;  // ||x_k||
  int active_atoms = 0;
  double code_gini = 0.0;
  double psnr = 0.0;  // NaN when no ground truth was supplied
};

struct FrameResult {
  ComplexImage image;
  std::vector<IterationDiag> diags;
  int iterations = 0;
};

// Raised when an iterate goes non-finite; carries the diagnostics collected
// up to the failure so callers can dump them.
class NumericalAbort : public std::runtime_error {
 public:
  NumericalAbort(const std::string& msg, std::vector<IterationDiag> diags)
      : std::runtime_error(msg), diags(std::move(diags)) {}
  std::vector<IterationDiag> diags;
};

SupportSet empty_support(int side);

// Prox step of the off-support l1 term: c = W x + u is shrunk by
// kappa = lambda_g / rho outside the support (complex magnitude
// soft-threshold) and passed through on the support.
WaveletCoeffs v_update(const WaveletCoeffs& c, const SupportSet& support, double kappa);

// Exact Fourier-domain solve of the least-squares stationarity system
// (gamma_eps L I + lambda F_u^T F_u + rho W^T W) x = gamma_eps code_sum +
// lambda F_u^T y + rho W^T (v - u). In noiseless mode the sampled entries
// are replaced by the measurements.
ComplexImage x_update(const ComplexImage& code_sum, const KSpaceFrame& y,
                      const WaveletCoeffs& v, const WaveletCoeffs& u,
                      double gamma_eps, int patch_area, const AdmmWeights& w);

// u <- u + (W x - v)
void dual_update(WaveletCoeffs& u, const WaveletCoeffs& wx, const WaveletCoeffs& v);

struct ReconOptions {
  AdmmWeights weights;
  int max_iters = 100;
  double tolerance = 1e-4;
  int levels = 0;
  int patch_area = 16;
  double sigma = 1.0;   // dependence kernel width
  double radius = 13.0; // neighborhood radius R1
  bool self_only_dependence = false;
};

// One frame of the outer loop: zero-filled start, then per iteration the
// shrinkage step, one Gibbs sweep on the current iterate's patches (with the
// dependence kernel refreshed against the iterate), the Fourier x-solve and
// the dual ascent. init_ref, when given, is the reference image the
// dependence kernel is built against before the first iteration.
FrameResult reconstruct_frame(const KSpaceFrame& y, const PatchGrouping& grouping,
                              const std::vector<std::vector<int>>& neighbors,
                              GibbsState& state, const SupportSet& support,
                              const ReconOptions& opt,
                              const ComplexImage* init_ref = nullptr,
                              const ComplexImage* truth = nullptr);

}  // namespace gbdl
