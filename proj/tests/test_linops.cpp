#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "gbdl/fourier.hpp"
#include "gbdl/patches.hpp"
#include "gbdl/reference.hpp"
#include "gbdl/wavelet.hpp"
#include "helpers.hpp"

using namespace gbdl;

TEST_CASE("kspace_sample: zero image gives zero measurements") {
  Rng rng(1);
  const SamplingMask mask = oracle::random_mask(8, rng);
  const KSpaceFrame f = kspace_sample(ComplexImage::Zero(8, 8), mask);
  CHECK(f.values.norm() == doctest::Approx(0.0));
}

TEST_CASE("kspace_sample: full mask round trip and isometry") {
  Rng rng(2);
  const ComplexImage x = oracle::random_image(16, rng);
  const SamplingMask mask = oracle::full_mask(16);
  const KSpaceFrame f = kspace_sample(x, mask);
  CHECK(f.values.norm() == doctest::Approx(x.norm()).epsilon(1e-10));
  const ComplexImage back = kspace_adjoint(f);
  CHECK(oracle::rel_err(back, x) < 1e-10);
}

TEST_CASE("fft2c: 4x4 ones has a single DC coefficient of 4") {
  const ComplexImage ones = ComplexImage::Ones(4, 4);
  const ComplexImage k = fft2c(ones);
  CHECK(std::abs(k(2, 2) - cd(4.0, 0.0)) < 1e-12);
  double off = 0.0;
  for (int r = 0; r < 4; ++r)
    for (int c = 0; c < 4; ++c)
      if (r != 2 || c != 2) off += std::abs(k(r, c));
  CHECK(off < 1e-12);
}

TEST_CASE("fft2c matches the dense DFT-matrix oracle") {
  Rng rng(3);
  for (int side : {4, 8}) {
    const Eigen::MatrixXcd F = oracle::dft_matrix(side);
    for (int rep = 0; rep < 3; ++rep) {
      const ComplexImage x = oracle::random_image(side, rng);
      const Eigen::VectorXcd want = F * oracle::flatten(x);
      const ComplexImage got = fft2c(x);
      CHECK((oracle::flatten(got) - want).norm() < 1e-10 * want.norm());
    }
  }
}

TEST_CASE("kspace adjoint identity over 100 random pairs") {
  Rng rng(4);
  for (int rep = 0; rep < 100; ++rep) {
    const int side = rep % 2 ? 8 : 16;
    const SamplingMask mask = oracle::random_mask(side, rng);
    const ComplexImage x = oracle::random_image(side, rng);
    KSpaceFrame y;  // random measurement vector on the mask
    y.mask = mask;
    y.values.resize(mask.ones());
    for (Eigen::Index i = 0; i < y.values.size(); ++i)
      y.values(i) = cd(rng.normal(), rng.normal());
    const KSpaceFrame fx = kspace_sample(x, mask);
    const ComplexImage fty = kspace_adjoint(y);
    const cd lhs = fx.values.dot(y.values);  // <F_u x, y> (conjugates fx)
    const cd rhs = oracle::flatten(x).dot(oracle::flatten(fty));
    CHECK(std::abs(lhs - rhs) <= 1e-10 * x.norm() * y.values.norm());
  }
}

TEST_CASE("kspace_sample rejects dimension mismatch") {
  CHECK_THROWS_AS(kspace_sample(ComplexImage::Zero(8, 8), oracle::full_mask(16)),
                  std::invalid_argument);
}

TEST_CASE("extract_patches: constant image, stacked layout") {
  const ComplexImage img = ComplexImage::Constant(8, 8, cd(2.5, -1.0));
  const PatchMatrix p = extract_patches(img, 4);
  REQUIRE(p.rows() == 8);
  REQUIRE(p.cols() == 64);
  CHECK((p.topRows(4).array() - 2.5).abs().maxCoeff() == doctest::Approx(0.0));
  CHECK((p.bottomRows(4).array() + 1.0).abs().maxCoeff() == doctest::Approx(0.0));
}

TEST_CASE("extract_patches: wraparound window on a 4x4 ramp") {
  ComplexImage img(4, 4);
  for (int r = 0; r < 4; ++r)
    for (int c = 0; c < 4; ++c) img(r, c) = cd(r * 4 + c, 0.0);
  const PatchMatrix p = extract_patches(img, 4);
  // patch with top-left pixel (3,3): row-major window entries 15, 12, 3, 0
  const int i = 3 * 4 + 3;
  CHECK(p(0, i) == 15.0);
  CHECK(p(1, i) == 12.0);
  CHECK(p(2, i) == 3.0);
  CHECK(p(3, i) == 0.0);
}

TEST_CASE("extract_patches: full-size patches are cyclic shifts") {
  Rng rng(5);
  const ComplexImage img = oracle::random_image(4, rng);
  const PatchMatrix p = extract_patches(img, 16);
  for (int i = 0; i < 16; ++i) {
    const int r0 = i / 4, c0 = i % 4;
    for (int k = 0; k < 16; ++k) {
      const int dr = k / 4, dc = k % 4;
      const cd want = img((r0 + dr) % 4, (c0 + dc) % 4);
      CHECK(p(k, i) == want.real());
      CHECK(p(k + 16, i) == want.imag());
    }
  }
}

TEST_CASE("extract_patches rejects non-square patch area") {
  const ComplexImage zero = ComplexImage::Zero(8, 8);
  CHECK_THROWS_AS(extract_patches(zero, 5), std::invalid_argument);
}

TEST_CASE("assemble(extract(x)) = L*x exactly on integer images") {
  Rng rng(6);
  ComplexImage img(8, 8);
  for (int r = 0; r < 8; ++r)
    for (int c = 0; c < 8; ++c)
      img(r, c) = cd(static_cast<double>(rng.u64() % 17) - 8.0,
                     static_cast<double>(rng.u64() % 13) - 6.0);
  for (int L : {4, 16}) {
    const ComplexImage sum = assemble_patches(extract_patches(img, L), 8);
    CHECK((sum - static_cast<double>(L) * img).cwiseAbs().maxCoeff() == 0.0);
  }
}

TEST_CASE("assemble_patches: single nonzero column lands on its footprint") {
  PatchMatrix p = PatchMatrix::Zero(8, 16);  // L = 4 on a 4x4 image
  const int i = 1 * 4 + 2;                   // top-left pixel (1,2)
  for (int k = 0; k < 4; ++k) {
    p(k, i) = k + 1.0;
    p(k + 4, i) = -(k + 1.0);
  }
  const ComplexImage img = assemble_patches(p, 4);
  CHECK(img(1, 2) == cd(1.0, -1.0));
  CHECK(img(1, 3) == cd(2.0, -2.0));
  CHECK(img(2, 2) == cd(3.0, -3.0));
  CHECK(img(2, 3) == cd(4.0, -4.0));
  double off = 0.0;
  for (int r = 0; r < 4; ++r)
    for (int c = 0; c < 4; ++c)
      if (!((r == 1 || r == 2) && (c == 2 || c == 3))) off += std::abs(img(r, c));
  CHECK(off == 0.0);
}

TEST_CASE("patch operator adjoint identity over 100 random pairs") {
  Rng rng(7);
  for (int rep = 0; rep < 100; ++rep) {
    const int side = 8;
    const int L = rep % 2 ? 4 : 9;
    const ComplexImage x = oracle::random_image(side, rng);
    PatchMatrix q(2 * L, side * side);
    for (Eigen::Index c = 0; c < q.cols(); ++c)
      for (Eigen::Index r = 0; r < q.rows(); ++r) q(r, c) = rng.normal();
    const PatchMatrix px = extract_patches(x, L);
    const ComplexImage aq = assemble_patches(q, side);
    const double lhs = (px.cwiseProduct(q)).sum();
    // <x, assemble(q)> in the stacked real inner product
    double rhs = 0.0;
    for (int r = 0; r < side; ++r)
      for (int c = 0; c < side; ++c)
        rhs += x(r, c).real() * aq(r, c).real() + x(r, c).imag() * aq(r, c).imag();
    CHECK(std::abs(lhs - rhs) <= 1e-10 * px.norm() * q.norm());
  }
}

TEST_CASE("parallel patch kernels match the serial reference") {
  Rng rng(8);
  const ComplexImage img = oracle::random_image(32, rng);
  const PatchMatrix a = extract_patches(img, 16);
  const PatchMatrix b = ref::extract_patches(img, 16);
  CHECK((a - b).cwiseAbs().maxCoeff() == 0.0);
  PatchMatrix q(32, 32 * 32);
  for (Eigen::Index c = 0; c < q.cols(); ++c)
    for (Eigen::Index r = 0; r < q.rows(); ++r) q(r, c) = rng.normal();
  const ComplexImage ga = assemble_patches(q, 32);
  const ComplexImage gb = ref::assemble_patches(q, 32);
  CHECK((ga - gb).cwiseAbs().maxCoeff() < 1e-12);
}

TEST_CASE("dwt2: zero image, energy, round trip") {
  CHECK(dwt2(ComplexImage::Zero(16, 16), 2).data.norm() == doctest::Approx(0.0));
  Rng rng(9);
  const ComplexImage x = oracle::random_image(64, rng);
  const WaveletCoeffs w = dwt2(x, 4);
  CHECK(std::abs(w.data.norm() - x.norm()) < 1e-10 * x.norm());
  CHECK(oracle::rel_err(idwt2(w), x) < 1e-10);
}

TEST_CASE("dwt2 rejects invalid level counts") {
  CHECK_THROWS_AS(dwt2(ComplexImage::Zero(8, 8), -1), std::invalid_argument);
  CHECK_THROWS_AS(dwt2(ComplexImage::Zero(8, 8), 4), std::invalid_argument);
}

TEST_CASE("dwt2 matches the serial reference transform") {
  Rng rng(10);
  const ComplexImage x = oracle::random_image(32, rng);
  const WaveletCoeffs a = dwt2(x, 3);
  const WaveletCoeffs b = ref::dwt2(x, 3);
  CHECK((a.data - b.data).cwiseAbs().maxCoeff() < 1e-12);
  CHECK((idwt2(a) - ref::idwt2(b)).cwiseAbs().maxCoeff() < 1e-12);
}

TEST_CASE("estimate_support") {
  SUBCASE("all-zero reference gives an empty support") {
    const SupportSet s = estimate_support(ComplexImage::Zero(8, 8), 0.5, 1);
    CHECK(s.count() == 0);
    CHECK(s.threshold == 0.0);
  }
  SUBCASE("tau near zero covers the full grid for generic images") {
    Rng rng(11);
    const ComplexImage x = oracle::random_image(8, rng);
    const SupportSet s = estimate_support(x, 1e-12, 1);
    CHECK(s.count() == 64);
  }
  SUBCASE("8x8, tau = 0.1 equals the brute-force magnitude scan") {
    Rng rng(12);
    const ComplexImage x = oracle::random_image(8, rng);
    const SupportSet s = estimate_support(x, 0.1, 1);
    const WaveletCoeffs w = ref::dwt2(x, 1);
    const double thr = 0.1 * w.data.cwiseAbs().maxCoeff();
    for (int r = 0; r < 8; ++r)
      for (int c = 0; c < 8; ++c)
        CHECK(static_cast<bool>(s.in_support(r, c)) == (std::abs(w.data(r, c)) >= thr));
  }
  SUBCASE("tau outside (0,1) is rejected") {
    CHECK_THROWS_AS(estimate_support(ComplexImage::Zero(8, 8), 0.0, 1),
                    std::invalid_argument);
    CHECK_THROWS_AS(estimate_support(ComplexImage::Zero(8, 8), 1.0, 1),
                    std::invalid_argument);
  }
}

TEST_CASE("project_off_support") {
  Rng rng(13);
  const ComplexImage x = oracle::random_image(8, rng);
  WaveletCoeffs w = dwt2(x, 1);

  SUBCASE("empty support is the identity") {
    SupportSet none;
    none.in_support = MaskGrid::Zero(8, 8);
    CHECK((project_off_support(w, none).data - w.data).norm() == doctest::Approx(0.0));
  }
  SUBCASE("full support zeroes everything") {
    SupportSet all;
    all.in_support = MaskGrid::Ones(8, 8);
    CHECK(project_off_support(w, all).data.norm() == doctest::Approx(0.0));
  }
  SUBCASE("random support matches the indicator-product oracle and is idempotent") {
    SupportSet s;
    s.in_support = MaskGrid::Zero(8, 8);
    for (int r = 0; r < 8; ++r)
      for (int c = 0; c < 8; ++c) s.in_support(r, c) = rng.bernoulli(0.4) ? 1 : 0;
    const WaveletCoeffs once = project_off_support(w, s);
    for (int r = 0; r < 8; ++r)
      for (int c = 0; c < 8; ++c) {
        const cd want = s.in_support(r, c) ? cd(0, 0) : w.data(r, c);
        CHECK(std::abs(once.data(r, c) - want) == doctest::Approx(0.0));
      }
    const WaveletCoeffs twice = project_off_support(once, s);
    CHECK((twice.data - once.data).norm() == doctest::Approx(0.0));
  }
}
