// SPDX-License-Identifier: Apache-2.0
//
// nftk -- near-field array channel toolkit

#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "nftk/geometry.hpp"

using namespace nftk;

TEST_CASE("centered indices of a 3x1 array") {
  const ArrayGeometry geom(3, 1, 0.01);
  const auto idx = centered_indices(geom);
  REQUIRE(idx.size() == 3);
  CHECK(idx[0].m == -1.0);
  CHECK(idx[1].m == 0.0);
  CHECK(idx[2].m == 1.0);
  for (const auto& i : idx) CHECK(i.n == 0.0);
}

TEST_CASE("centered indices of a 4x1 array are half-integers") {
  const ArrayGeometry geom(4, 1, 0.01);
  const auto idx = centered_indices(geom);
  REQUIRE(idx.size() == 4);
  CHECK(idx[0].m == -1.5);
  CHECK(idx[1].m == -0.5);
  CHECK(idx[2].m == 0.5);
  CHECK(idx[3].m == 1.5);
}

TEST_CASE("centered indices of a 2x2 array, row-major with m fastest") {
  const ArrayGeometry geom(2, 2, 0.01);
  const auto idx = centered_indices(geom);
  REQUIRE(idx.size() == 4);
  CHECK((idx[0].m == -0.5 && idx[0].n == -0.5));
  CHECK((idx[1].m == 0.5 && idx[1].n == -0.5));
  CHECK((idx[2].m == -0.5 && idx[2].n == 0.5));
  CHECK((idx[3].m == 0.5 && idx[3].n == 0.5));
}

TEST_CASE("index set is origin- and axis-symmetric with zero sums") {
  for (const auto [nh, nv] : {std::pair{5, 3}, {4, 6}, {7, 4}, {1, 8}}) {
    const ArrayGeometry geom(nh, nv, 0.01);
    const auto idx = centered_indices(geom);
    CHECK(static_cast<int>(idx.size()) == nh * nv);
    double sum_m = 0.0, sum_n = 0.0;
    for (const auto& i : idx) {
      sum_m += i.m;
      sum_n += i.n;
      CHECK(geom.contains({-i.m, -i.n}));
      CHECK(geom.contains({-i.m, i.n}));
      CHECK(geom.contains({i.m, -i.n}));
    }
    CHECK(sum_m == 0.0);
    CHECK(sum_n == 0.0);
  }
}

TEST_CASE("position of (m,n) plus position of (-m,-n) is exactly the origin") {
  const ArrayGeometry geom(6, 4, 0.02);
  const double d = geom.spacing();
  for (const auto& i : centered_indices(geom)) {
    CHECK(i.m * d + (-i.m) * d == 0.0);
    CHECK(i.n * d + (-i.n) * d == 0.0);
  }
}

TEST_CASE("region boundaries: hand values for D = 1 m, lambda = 1 cm") {
  // 2-element array with 1 m pitch gives a 1 m aperture
  const ArrayGeometry geom(2, 1, 0.01, 1.0);
  const auto b = region_boundaries(geom);
  CHECK(b.aperture == doctest::Approx(1.0));
  CHECK(b.rayleigh_distance == doctest::Approx(200.0));
  CHECK(b.fresnel_distance == doctest::Approx(6.2));
}

TEST_CASE("region boundaries: 64x64 half-wavelength UPA against direct recomputation") {
  const double lambda = 0.01;
  const ArrayGeometry geom(64, 64, lambda);
  const auto b = region_boundaries(geom);
  // oracle: recompute from the definition
  const double d = lambda / 2.0;
  const double diag = std::sqrt(2.0) * 63.0 * d;
  CHECK(b.aperture == doctest::Approx(diag).epsilon(1e-12));
  CHECK(b.rayleigh_distance == doctest::Approx(2.0 * diag * diag / lambda).epsilon(1e-12));
  CHECK(b.rayleigh_distance == doctest::Approx(39.69).epsilon(1e-3));
  CHECK(b.fresnel_distance ==
        doctest::Approx(0.62 * std::sqrt(diag * diag * diag / lambda)).epsilon(1e-12));
}

TEST_CASE("rayleigh exceeds fresnel for every generated aperture") {
  for (int n = 2; n <= 128; n *= 2) {
    const ArrayGeometry geom(n, n, 0.01);
    const auto b = region_boundaries(geom);
    CHECK(b.rayleigh_distance > b.fresnel_distance);
  }
}

TEST_CASE("single-antenna array has no boundaries") {
  const ArrayGeometry geom(1, 1, 0.01);
  CHECK_THROWS_AS(region_boundaries(geom), std::invalid_argument);
}

TEST_CASE("symmetric partner examples") {
  const ArrayGeometry even(4, 2, 0.01);
  const auto p = symmetric_partner(even, {1.5, -0.5});
  CHECK(p.m == -1.5);
  CHECK(p.n == 0.5);

  const ArrayGeometry odd(5, 7, 0.01);
  const auto center = symmetric_partner(odd, {0.0, 0.0});
  CHECK(center.m == 0.0);
  CHECK(center.n == 0.0);

  const auto q = symmetric_partner(odd, {-2.0, 3.0});
  CHECK(q.m == 2.0);
  CHECK(q.n == -3.0);
}

TEST_CASE("symmetric partner is an involution and validates membership") {
  const ArrayGeometry geom(6, 5, 0.01);
  for (const auto& i : centered_indices(geom)) {
    const auto p = symmetric_partner(geom, i);
    const auto back = symmetric_partner(geom, p);
    CHECK(back.m == i.m);
    CHECK(back.n == i.n);
  }
  CHECK_THROWS_AS(symmetric_partner(geom, {9.0, 0.0}), std::invalid_argument);
  CHECK_THROWS_AS(symmetric_partner(geom, {0.25, 0.0}), std::invalid_argument);
}

TEST_CASE("geometry rejects invalid parameters") {
  CHECK_THROWS_AS(ArrayGeometry(0, 1, 0.01), std::invalid_argument);
  CHECK_THROWS_AS(ArrayGeometry(2, 2, -1.0), std::invalid_argument);
  CHECK_THROWS_AS(ArrayGeometry(2, 2, 0.01, -0.005), std::invalid_argument);
}
