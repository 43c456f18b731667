// Benchmark of the OpenMP kernels against the serial reference versions.
#include <omp.h>

#include <chrono>
#include <cstdio>
#include <functional>

#include "gbdl/dictlearn.hpp"
#include "gbdl/grouping.hpp"
#include "gbdl/reference.hpp"
#include "gbdl/rng.hpp"
#include "gbdl/wavelet.hpp"

using namespace gbdl;

namespace {

double time_of(const std::function<void()>& fn, int reps) {
  fn();  // warm up
  const auto t0 = std::chrono::steady_clock::now();
  for (int r = 0; r < reps; ++r) fn();
  const auto t1 = std::chrono::steady_clock::now();
  return std::chrono::duration<double>(t1 - t0).count() / reps;
}

void report(const char* name, double serial, double parallel) {
  std::printf("%-24s serial %8.3f ms   parallel %8.3f ms   speedup %.2fx\n", name,
              serial * 1e3, parallel * 1e3, serial / parallel);
}

}  // namespace

int main() {
  const int side = 128;
  const int L = 16;
  Rng rng(7);
  ComplexImage img(side, side);
  for (int c = 0; c < side; ++c)
    for (int r = 0; r < side; ++r) img(r, c) = cd(rng.normal(), rng.normal());

  std::printf("side %d, patches %d, threads %d\n\n", side, side * side,
              omp_get_max_threads());

  report("extract_patches", time_of([&] { ref::extract_patches(img, L); }, 5),
         time_of([&] { extract_patches(img, L); }, 5));

  const PatchMatrix patches = extract_patches(img, L);
  report("assemble_patches", time_of([&] { ref::assemble_patches(patches, side); }, 5),
         time_of([&] { assemble_patches(patches, side); }, 5));

  report("dwt2", time_of([&] { ref::dwt2(img, 5); }, 5),
         time_of([&] { dwt2(img, 5); }, 5));
  const WaveletCoeffs w = dwt2(img, 5);
  report("idwt2", time_of([&] { ref::idwt2(w); }, 5), time_of([&] { idwt2(w); }, 5));

  const PatchMatrix mag = extract_patches(magnitude(img), L);
  const PatchGrouping grouping = kmeans_group(mag, 8, 3);
  const auto neighbors = neighbor_lists(grouping, side, 8.0);
  DependenceMatrix dep;
  dep.sigma = median_kernel_width(patches, grouping, side, 8.0, 3);
  dep.radius = 8.0;
  report("build_dependence",
         time_of([&] { ref::build_dependence(patches, patches, grouping, side,
                                             dep.sigma, 8.0); }, 1),
         time_of([&] { rebuild_dependence(dep, patches, patches, neighbors); }, 1));

  // The sweep's serial reference is the same kernel restricted to 1 thread;
  // per-group streams make both runs bit-identical.
  rebuild_dependence(dep, patches, patches, neighbors);
  GibbsState st1 = init_state(grouping, dep, neighbors, 2 * L, 32, HyperParams{}, 11);
  GibbsState stp = init_state(grouping, dep, neighbors, 2 * L, 32, HyperParams{}, 11);
  const int threads = omp_get_max_threads();
  omp_set_num_threads(1);
  const double sweep_serial = time_of([&] { gibbs_sweep(st1, patches); }, 3);
  omp_set_num_threads(threads);
  const double sweep_parallel = time_of([&] { gibbs_sweep(stp, patches); }, 3);
  report("gibbs_sweep", sweep_serial, sweep_parallel);
  return 0;
}
