#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <filesystem>

#include "gbdl/grouping.hpp"
#include "gbdl/io.hpp"
#include "gbdl/phantom.hpp"
#include "gbdl/reference.hpp"
#include "helpers.hpp"

using namespace gbdl;

namespace {

PatchMatrix random_patches(int dim, int count, Rng& rng) {
  PatchMatrix p(dim, count);
  for (int c = 0; c < count; ++c)
    for (int r = 0; r < dim; ++r) p(r, c) = rng.normal();
  return p;
}

}  // namespace

TEST_CASE("kmeans_group: one group holds everything") {
  Rng rng(41);
  const PatchMatrix p = random_patches(4, 30, rng);
  const PatchGrouping g = kmeans_group(p, 1, 7);
  for (int a : g.assignment) CHECK(a == 0);
}

TEST_CASE("kmeans_group: two well-separated pairs match the brute-force optimum") {
  PatchMatrix p(2, 4);
  p.col(0) << 0.0, 0.1;
  p.col(1) << 0.2, -0.1;
  p.col(2) << 10.0, 9.9;
  p.col(3) << 10.2, 10.1;
  // Brute force over all 2-partitions: {0,1} vs {2,3} is optimal.
  const PatchGrouping g = kmeans_group(p, 2, 3);
  CHECK(g.assignment[0] == g.assignment[1]);
  CHECK(g.assignment[2] == g.assignment[3]);
  CHECK(g.assignment[0] != g.assignment[2]);
}

TEST_CASE("kmeans_group: more groups than patches is rejected") {
  Rng rng(42);
  const PatchMatrix p = random_patches(4, 3, rng);
  CHECK_THROWS_AS(kmeans_group(p, 4, 1), std::invalid_argument);
}

TEST_CASE("kmeans_group: deterministic given the seed, objective nonincreasing") {
  Rng rng(43);
  const PatchMatrix p = random_patches(8, 200, rng);
  const PatchGrouping a = kmeans_group(p, 5, 11);
  const PatchGrouping b = kmeans_group(p, 5, 11);
  CHECK(a.assignment == b.assignment);
  for (size_t i = 1; i < a.wcss_history.size(); ++i)
    CHECK(a.wcss_history[i] <= a.wcss_history[i - 1] + 1e-9);
}

TEST_CASE("kmeans_group: 11 nonempty groups on a 256x256 guide image") {
  const Dataset ds = generate_phantom(256, 1, 1.0, 5);
  const PatchMatrix patches = extract_patches(magnitude(ds.frame(0)), 16);
  const PatchGrouping g = kmeans_group(patches, 11, 1, 15);
  const auto members = g.members();
  REQUIRE(members.size() == 11);
  for (const auto& m : members) CHECK(!m.empty());
}

TEST_CASE("similarity_kernel") {
  Eigen::VectorXd a(4), b(4);
  a << 1, 2, 3, 4;
  b = a;
  SUBCASE("identical co-located same-group patches score 1") {
    CHECK(similarity_kernel(a, b, 0, 0, 0, 0, 2, 2, 1.0, 5.0) == doctest::Approx(1.0));
  }
  SUBCASE("different groups score 0") {
    CHECK(similarity_kernel(a, b, 0, 0, 0, 0, 1, 2, 1.0, 5.0) == 0.0);
  }
  SUBCASE("beyond the radius scores 0") {
    CHECK(similarity_kernel(a, b, 0, 0, 3, 4, 0, 0, 1.0, 4.9) == 0.0);
    CHECK(similarity_kernel(a, b, 0, 0, 3, 4, 0, 0, 1.0, 5.0) == doctest::Approx(1.0));
  }
  SUBCASE("distance equal to sigma gives 1/e") {
    b(0) += 1.0;  // ||a-b|| = 1
    CHECK(similarity_kernel(a, b, 0, 0, 0, 0, 0, 0, 1.0, 5.0) ==
          doctest::Approx(std::exp(-1.0)));
  }
  SUBCASE("nonpositive sigma is rejected") {
    CHECK_THROWS_AS(similarity_kernel(a, b, 0, 0, 0, 0, 0, 0, 0.0, 5.0),
                    std::invalid_argument);
  }
}

TEST_CASE("build_dependence: rows sum to one and the pattern respects group/radius") {
  Rng rng(44);
  const int side = 8;
  const ComplexImage img = oracle::random_image(side, rng);
  const PatchMatrix p = extract_patches(img, 4);
  PatchGrouping g;
  g.num_groups = 3;
  g.assignment.resize(64);
  for (int i = 0; i < 64; ++i) g.assignment[static_cast<size_t>(i)] = i % 3;
  const DependenceMatrix dep = build_dependence(p, p, g, side, 0.7, 3.0);
  REQUIRE(dep.rows.size() == 64);
  for (int i = 0; i < 64; ++i) {
    double sum = 0.0;
    for (const auto& [j, w] : dep.rows[static_cast<size_t>(i)]) {
      CHECK(w > 0.0);
      CHECK(g.assignment[static_cast<size_t>(j)] == g.assignment[static_cast<size_t>(i)]);
      const double dr = i / side - j / side, dc = i % side - j % side;
      CHECK(std::sqrt(dr * dr + dc * dc) <= 3.0);
      sum += w;
    }
    CHECK(std::abs(sum - 1.0) <= 1e-12);
  }
}

TEST_CASE("build_dependence: three co-located patches match the hand formula") {
  PatchMatrix cur(2, 4), ref(2, 4);
  cur.col(0) << 0, 0;
  cur.col(1) << 1, 0;
  cur.col(2) << 0, 2;
  cur.col(3) << 5, 5;
  ref = cur;
  PatchGrouping g;
  g.num_groups = 2;
  g.assignment = {0, 0, 0, 1};  // patch 3 isolated in its own group
  const double sigma = 1.3;
  const DependenceMatrix dep = build_dependence(cur, ref, g, 2, sigma, 10.0);
  // Row 0 weights: K(0,j) = exp(-||p0 - pj|| / sigma) over j in {0,1,2}.
  const double k0 = 1.0;
  const double k1 = std::exp(-1.0 / sigma);
  const double k2 = std::exp(-2.0 / sigma);
  const double total = k0 + k1 + k2;
  REQUIRE(dep.rows[0].size() == 3);
  CHECK(dep.rows[0][0].second == doctest::Approx(k0 / total).epsilon(1e-12));
  CHECK(dep.rows[0][1].second == doctest::Approx(k1 / total).epsilon(1e-12));
  CHECK(dep.rows[0][2].second == doctest::Approx(k2 / total).epsilon(1e-12));
}

TEST_CASE("build_dependence: kernel underflow falls back to a self-only row") {
  PatchGrouping g;
  g.num_groups = 1;
  g.assignment = {0, 0, 0, 0};
  PatchMatrix cur(2, 4), ref(2, 4);
  for (int i = 0; i < 4; ++i) {
    cur.col(i) << 1e6 * i, 0.0;
    ref.col(i) << -1e6 * (i + 1), 0.0;
  }
  const DependenceMatrix dep = build_dependence(cur, ref, g, 2, 1e-3, 100.0);
  for (int i = 0; i < 4; ++i) {
    REQUIRE(dep.rows[static_cast<size_t>(i)].size() == 1);
    CHECK(dep.rows[static_cast<size_t>(i)][0].first == i);
    CHECK(dep.rows[static_cast<size_t>(i)][0].second == 1.0);
  }
}

TEST_CASE("parallel dependence build matches the all-pairs reference") {
  Rng rng(45);
  const int side = 16;
  const ComplexImage img = oracle::random_image(side, rng);
  const PatchMatrix p = extract_patches(img, 4);
  const PatchMatrix pref = extract_patches(oracle::random_image(side, rng), 4);
  PatchGrouping g;
  g.num_groups = 4;
  g.assignment.resize(256);
  for (int i = 0; i < 256; ++i)
    g.assignment[static_cast<size_t>(i)] = static_cast<int>(rng.u64() % 4);
  const DependenceMatrix fast = build_dependence(p, pref, g, side, 0.9, 5.0);
  const DependenceMatrix slow = ref::build_dependence(p, pref, g, side, 0.9, 5.0);
  REQUIRE(fast.rows.size() == slow.rows.size());
  for (size_t i = 0; i < fast.rows.size(); ++i) {
    REQUIRE(fast.rows[i].size() == slow.rows[i].size());
    for (size_t k = 0; k < fast.rows[i].size(); ++k) {
      CHECK(fast.rows[i][k].first == slow.rows[i][k].first);
      CHECK(fast.rows[i][k].second == doctest::Approx(slow.rows[i][k].second).epsilon(1e-14));
    }
  }
}

TEST_CASE("median_kernel_width is positive and seed-deterministic") {
  Rng rng(46);
  const ComplexImage img = oracle::random_image(16, rng);
  const PatchMatrix p = extract_patches(img, 4);
  const PatchGrouping g = kmeans_group(p, 3, 9);
  const double s1 = median_kernel_width(p, g, 16, 5.0, 77);
  const double s2 = median_kernel_width(p, g, 16, 5.0, 77);
  CHECK(s1 > 0.0);
  CHECK(s1 == s2);
  // constant image degenerates to the fallback width
  const ComplexImage flat = ComplexImage::Constant(16, 16, cd(0.5, 0.0));
  const PatchMatrix pf = extract_patches(flat, 4);
  CHECK(median_kernel_width(pf, g, 16, 5.0, 77) == 1.0);
}

TEST_CASE("grouping + dependence sidecar round trip") {
  Rng rng(47);
  const ComplexImage img = oracle::random_image(8, rng);
  const PatchMatrix p = extract_patches(img, 4);
  const PatchGrouping g = kmeans_group(p, 2, 5);
  const DependenceMatrix dep = build_dependence(p, p, g, 8, 1.1, 4.0);
  const auto dir = std::filesystem::temp_directory_path() / "gbdl_grouping_test";
  std::filesystem::create_directories(dir);
  const std::string path = (dir / "grouping.bin").string();
  save_grouping(g, dep, path);
  PatchGrouping g2;
  DependenceMatrix dep2;
  load_grouping(path, g2, dep2);
  CHECK(g2.assignment == g.assignment);
  CHECK(g2.num_groups == g.num_groups);
  CHECK((g2.centroids - g.centroids).norm() == doctest::Approx(0.0));
  CHECK(dep2.sigma == dep.sigma);
  REQUIRE(dep2.rows.size() == dep.rows.size());
  for (size_t i = 0; i < dep.rows.size(); ++i) CHECK(dep2.rows[i] == dep.rows[i]);
}
