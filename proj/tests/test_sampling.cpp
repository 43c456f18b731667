#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <filesystem>

#include "gbdl/fourier.hpp"
#include "gbdl/io.hpp"
#include "gbdl/sampling.hpp"
#include "helpers.hpp"

using namespace gbdl;

TEST_CASE("radial_mask: one ray at angle zero marks exactly one full row") {
  const SamplingMask m = radial_mask(64, 1, 0.0);
  int full_rows = 0;
  for (int r = 0; r < 64; ++r) {
    int ones = 0;
    for (int c = 0; c < 64; ++c) ones += m.bits(r, c);
    if (ones == 64) ++full_rows;
  }
  CHECK(full_rows == 1);
  CHECK(m.ones() == 64);  // the DC cell lies on that row
  CHECK(m.rate() == doctest::Approx(1.0 / 64.0));
}

TEST_CASE("radial_mask matches the exhaustive rasterization oracle") {
  const int side = 32;
  const double seed_angle = 0.37;
  const SamplingMask m = radial_mask(side, 5, seed_angle);
  // Recompute with the pinned rule: nested bit-reversed fan, signed
  // half-cell band around lines through the geometric center, DC forced.
  const int needed = static_cast<int>(std::ceil(M_PI * side * std::sqrt(2.0)));
  int fan = 1;
  while (fan < needed) fan *= 2;
  int bits = 0;
  while ((1 << bits) < fan) ++bits;
  MaskGrid want = MaskGrid::Zero(side, side);
  for (int ray = 0; ray < 5; ++ray) {
    int rev = 0;
    for (int b = 0; b < bits; ++b) rev |= ((ray >> b) & 1) << (bits - 1 - b);
    const double theta = seed_angle + M_PI * rev / fan;
    for (int r = 0; r < side; ++r)
      for (int c = 0; c < side; ++c) {
        const double s =
            (r - 0.5 * (side - 1)) * std::cos(theta) - (c - 0.5 * (side - 1)) * std::sin(theta);
        if (s > -0.5 && s <= 0.5) want(r, c) = 1;
      }
  }
  want(side / 2, side / 2) = 1;
  CHECK((m.bits.cast<int>() - want.cast<int>()).abs().sum() == 0);
}

TEST_CASE("radial_mask saturates to rate 1") {
  const SamplingMask m = radial_mask(64, 4096, 0.0);
  CHECK(m.rate() == doctest::Approx(1.0));
}

TEST_CASE("every mask contains DC and reports its rate exactly") {
  Rng rng(21);
  for (int rep = 0; rep < 10; ++rep) {
    const int rays = 1 + static_cast<int>(rng.u64() % 60);
    const SamplingMask m = radial_mask(64, rays, rng.uniform() * M_PI);
    CHECK(m.bits(32, 32) == 1);
    long ones = 0;
    for (int r = 0; r < 64; ++r)
      for (int c = 0; c < 64; ++c) ones += m.bits(r, c);
    CHECK(m.rate() == doctest::Approx(static_cast<double>(ones) / 4096.0));
  }
}

TEST_CASE("mask central symmetry up to the forced DC pair") {
  const SamplingMask m = radial_mask(64, 9, 0.123);
  int mismatches = 0;
  for (int r = 0; r < 64; ++r)
    for (int c = 0; c < 64; ++c)
      if (m.bits(r, c) != m.bits(63 - r, 63 - c)) ++mismatches;
  CHECK(mismatches <= 2);  // at most the DC cell and its mirror
}

TEST_CASE("rate is monotone nondecreasing in the ray count (64x64 sweep)") {
  double prev = 0.0;
  for (int k = 1; k <= 250; ++k) {
    const double r = rate_for_rays(64, k, 0.0);
    CHECK(r >= prev);
    prev = r;
  }
  CHECK(prev == doctest::Approx(1.0));
}

TEST_CASE("rays_for_rate") {
  SUBCASE("target 1.0 returns a saturating count") {
    const int rays = rays_for_rate(64, 1.0, 0.0);
    CHECK(rate_for_rays(64, rays, 0.0) == doctest::Approx(1.0));
    CHECK(rate_for_rays(64, rays - 1, 0.0) < 1.0);
  }
  SUBCASE("target 0.2 on 64x64 equals the linear-sweep oracle") {
    const int rays = rays_for_rate(64, 0.2, 0.0);
    int want = -1;
    for (int k = 1; k <= 4096; ++k)
      if (rate_for_rays(64, k, 0.0) >= 0.2) {
        want = k;
        break;
      }
    CHECK(rays == want);
  }
  SUBCASE("invalid targets are rejected") {
    CHECK_THROWS_AS(rays_for_rate(64, 0.0, 0.0), std::invalid_argument);
    CHECK_THROWS_AS(rays_for_rate(64, 1.5, 0.0), std::invalid_argument);
  }
}

TEST_CASE("measure") {
  Rng rng(22);
  const ComplexImage x = oracle::random_image(16, rng);
  const SamplingMask mask = radial_mask(16, 5, 0.0);

  SUBCASE("zero noise reproduces the exact operator output") {
    Rng r2(1);
    const KSpaceFrame noisy = measure(x, mask, 0.0, r2, 3);
    const KSpaceFrame exact = kspace_sample(x, mask);
    CHECK((noisy.values - exact.values).norm() == doctest::Approx(0.0));
    CHECK(noisy.frame_index == 3);
    CHECK(noisy.noise_bound == 0.0);
  }
  SUBCASE("zero image with zero noise measures zero") {
    Rng r2(2);
    const KSpaceFrame f = measure(ComplexImage::Zero(16, 16), mask, 0.0, r2);
    CHECK(f.values.norm() == doctest::Approx(0.0));
  }
  SUBCASE("per-component noise variance is within 10% of sigma^2") {
    Rng r2(3);
    const double sigma = 0.2;
    const KSpaceFrame exact = kspace_sample(x, mask);
    double acc = 0.0;
    long count = 0;
    while (count < 20000) {
      const KSpaceFrame noisy = measure(x, mask, sigma, r2);
      const Eigen::VectorXcd diff = noisy.values - exact.values;
      for (Eigen::Index i = 0; i < diff.size(); ++i) {
        acc += diff(i).real() * diff(i).real() + diff(i).imag() * diff(i).imag();
        count += 2;
      }
    }
    const double var = acc / static_cast<double>(count);
    CHECK(var == doctest::Approx(sigma * sigma).epsilon(0.10));
  }
  SUBCASE("negative sigma is rejected") {
    Rng r2(4);
    CHECK_THROWS_AS(measure(x, mask, -1.0, r2), std::invalid_argument);
  }
}

TEST_CASE("mask PGM + sidecar round trip") {
  const SamplingMask m = radial_mask(32, 7, 0.4);
  const auto dir = std::filesystem::temp_directory_path() / "gbdl_mask_test";
  std::filesystem::create_directories(dir);
  const std::string path = (dir / "mask.pgm").string();
  save_mask(m, path);
  const SamplingMask back = load_mask(path);
  CHECK(back.num_rays == 7);
  CHECK((back.bits.cast<int>() - m.bits.cast<int>()).abs().sum() == 0);
}

TEST_CASE("mask packed-bitmap round trip") {
  const SamplingMask m = radial_mask(32, 5, 0.9);
  const auto dir = std::filesystem::temp_directory_path() / "gbdl_mask_test";
  std::filesystem::create_directories(dir);
  const std::string path = (dir / "mask.bin").string();
  save_mask_packed(m, path);
  const SamplingMask back = load_mask_packed(path);
  CHECK(back.num_rays == 5);
  CHECK((back.bits.cast<int>() - m.bits.cast<int>()).abs().sum() == 0);
  CHECK(std::filesystem::file_size(path) == (32 * 32 + 7) / 8);
}
