// SPDX-License-Identifier: Apache-2.0
//
// nftk -- near-field array channel toolkit

#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <numeric>

#include "nftk/recovery.hpp"
#include "nftk/tpd.hpp"

using namespace nftk;

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

// test-side projection energy, independent of the library's solver path
double captured_energy(const ArrayGeometry& geom, const std::vector<Estimate>& entries,
                       const MatC& observations) {
  if (entries.empty()) return 0.0;
  const MatC atoms = estimate_atoms(geom, entries);
  const MatC q = Eigen::HouseholderQR<MatC>(atoms).householderQ() *
                 MatC::Identity(atoms.rows(), atoms.cols());
  return (q.adjoint() * observations).squaredNorm();
}

}  // namespace

TEST_CASE("omp recovers a 1-sparse on-grid signal in one iteration") {
  const ArrayGeometry geom(8, 8, 0.01);
  const Dictionary dict = build_ad_dictionary(geom, 1, 1);
  const int pick = 19;
  const MatC y = dict.atoms.col(pick) * cplx(2.0, -1.0);
  const OmpResult res = omp_detailed(y, dict, 1);
  REQUIRE(res.selected.size() == 1);
  CHECK(res.selected[0] == pick);
  CHECK(res.residual_history.back() < 1e-10);
  CHECK(res.set.entries[0].u == dict.grid[pick].u);
  CHECK(res.set.entries[0].v == dict.grid[pick].v);
}

TEST_CASE("omp recovers any K-sparse support of an orthonormal dictionary") {
  const ArrayGeometry geom(6, 6, 0.01);
  const Dictionary dict = build_ad_dictionary(geom, 1, 1);
  Rng rng(12);
  for (int trial = 0; trial < 10; ++trial) {
    std::vector<int> support;
    while (support.size() < 5) {
      const int g = static_cast<int>(rng.next_u64() % dict.atom_count());
      if (!dict.grid[g].visible) continue;
      if (std::find(support.begin(), support.end(), g) == support.end()) support.push_back(g);
    }
    MatC y = MatC::Zero(geom.size(), 3);
    for (int g : support)
      for (int t = 0; t < 3; ++t) y.col(t) += dict.atoms.col(g) * rng.complex_normal(1.0);
    const OmpResult res = omp_detailed(y, dict, 5);
    auto got = res.selected;
    std::sort(got.begin(), got.end());
    std::sort(support.begin(), support.end());
    CHECK(got == support);
    CHECK(res.residual_history.back() < 1e-12);
  }
}

TEST_CASE("omp residual is non-increasing per iteration") {
  const ArrayGeometry geom(8, 4, 0.01);
  const Dictionary dict = build_ad_dictionary(geom, 2, 2);
  Rng rng(3);
  MatC y(geom.size(), 4);
  for (int i = 0; i < geom.size(); ++i)
    for (int t = 0; t < 4; ++t) y(i, t) = rng.complex_normal(1.0);
  const OmpResult res = omp_detailed(y, dict, 8);
  for (std::size_t i = 1; i < res.residual_history.size(); ++i)
    CHECK(res.residual_history[i] <= res.residual_history[i - 1] + 1e-9);
}

TEST_CASE("omp rejects sparsity beyond the dictionary size") {
  const ArrayGeometry geom(4, 1, 0.01);
  const Dictionary dict = build_ad_dictionary(geom, 1, 1);
  CHECK_THROWS_AS(omp(MatC::Ones(4, 1), dict, 5), std::invalid_argument);
}

TEST_CASE("omp drops a rank-deficient selection and flags the set") {
  // three atoms, the third an exact mixture of the first two: once the
  // signal a+b is fitted the leftover picks can only be dependent
  const ArrayGeometry geom(4, 1, 0.01);
  const Dictionary base = build_ad_dictionary(geom, 1, 1);
  Dictionary dict = base;
  dict.atoms.conservativeResize(Eigen::NoChange, 3);
  dict.grid.resize(3);
  dict.atoms.col(2) = (base.atoms.col(0) + base.atoms.col(1)) / std::sqrt(2.0);
  const MatC y = base.atoms.col(0) + base.atoms.col(1);
  const OmpResult res = omp_detailed(y, dict, 3);
  CHECK(res.dropped_atom);
  CHECK(res.set.degraded);
  CHECK(res.selected.size() < 3);
  CHECK(res.residual_history.back() < 1e-12);
}

TEST_CASE("angular-domain leakage floor vs polar-domain fit at desk scale") {
  const ArrayGeometry geom(32, 32, 0.1);
  const std::vector<Scatterer> scene = {{0.09375, 0.15625, 10.0, 0.4},
                                        {-0.21875, 0.03125, 10.0, 0.3},
                                        {0.40625, -0.28125, 10.0, 0.3}};
  const auto snaps = synthesize_snapshots(geom, scene, 16, kInf, WaveModel::ExactSpherical, 2);
  const double y2 = snaps.snapshots.squaredNorm();
  const Dictionary ad = build_ad_dictionary(geom, 1, 1);
  const Dictionary pd = build_pd_dictionary(geom, 1, 1, kDefaultPdBeta, 2.0, 50.0);
  const auto res_ad = omp_detailed(snaps.snapshots, ad, 3);
  const auto res_pd = omp_detailed(snaps.snapshots, pd, 3);
  const double nmse_ad = res_ad.residual_history.back() / y2;
  const double nmse_pd = res_pd.residual_history.back() / y2;
  CHECK(nmse_ad > 0.1);  // leakage keeps AD above -10 dB
  CHECK(nmse_pd < nmse_ad);
  CHECK(res_pd.set.search_space_size == pd.atom_count());
  // estimates stay inside the visible disk with descending powers
  for (std::size_t i = 0; i < res_pd.set.entries.size(); ++i) {
    const auto& e = res_pd.set.entries[i];
    CHECK(e.u * e.u + e.v * e.v <= 1.0 + 1e-12);
    if (i) CHECK(e.power <= res_pd.set.entries[i - 1].power);
  }
}

TEST_CASE("music resolves a single noiseless tone to within half a grid cell") {
  MatC rows(1, 64);
  for (int j = 0; j < 64; ++j) rows(0, j) = std::polar(1.0, 0.7321 * j);
  std::vector<double> grid(256);
  for (int i = 0; i < 256; ++i) grid[i] = -kPi + 2.0 * kPi * i / 256.0;
  const auto peaks = music_1d(rows, grid, 1);
  REQUIRE(!peaks.empty());
  CHECK(std::abs(peaks[0].frequency - 0.7321) <= kPi / 256.0);
  CHECK(peaks[0].prominent);
}

TEST_CASE("music separates two tones at twice the rayleigh resolution") {
  const int m = 64;
  const double f1 = 0.5, f2 = 0.5 + 2.0 * (2.0 * kPi / m);
  Rng rng(8);
  MatC rows(4, m);
  for (int i = 0; i < 4; ++i) {
    const cplx g1 = rng.complex_normal(1.0), g2 = rng.complex_normal(1.0);
    for (int j = 0; j < m; ++j)
      rows(i, j) = g1 * std::polar(1.0, f1 * j) + g2 * std::polar(1.0, f2 * j) +
                   rng.complex_normal(0.01);  // 20 dB SNR
  }
  std::vector<double> grid(512);
  for (int i = 0; i < 512; ++i) grid[i] = 2.0 * kPi * i / 512.0 - kPi;
  const double cell = 2.0 * kPi / 512.0;

  // dense periodogram oracle: the two strongest well-separated beamformer
  // peaks over a 4096-point grid
  std::vector<double> dense(4096), power(4096);
  for (int i = 0; i < 4096; ++i) {
    dense[i] = 2.0 * kPi * i / 4096.0 - kPi;
    double p = 0.0;
    for (int row = 0; row < 4; ++row) {
      cplx acc = 0.0;
      for (int j = 0; j < m; ++j) acc += rows(row, j) * std::polar(1.0, -dense[i] * j);
      p += std::norm(acc);
    }
    power[i] = p;
  }
  std::vector<int> order(4096);
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(), [&](int a, int b) { return power[a] > power[b]; });
  std::vector<double> oracle;
  for (int idx : order) {
    bool close = false;
    for (double f : oracle) close |= std::abs(dense[idx] - f) < 2.0 * kPi / m;
    if (!close) oracle.push_back(dense[idx]);
    if (oracle.size() == 2) break;
  }
  std::sort(oracle.begin(), oracle.end());

  auto peaks = music_1d(rows, grid, 2);
  REQUIRE(peaks.size() == 2);
  std::sort(peaks.begin(), peaks.end(),
            [](const MusicPeak& a, const MusicPeak& b) { return a.frequency < b.frequency; });
  CHECK(std::abs(peaks[0].frequency - oracle[0]) <= cell);
  CHECK(std::abs(peaks[1].frequency - oracle[1]) <= cell);
  CHECK(std::abs(peaks[0].frequency - f1) <= cell);
  CHECK(std::abs(peaks[1].frequency - f2) <= cell);
}

TEST_CASE("music flags a white-noise-only peak as indistinct") {
  Rng rng(4);
  MatC rows(8, 64);
  for (int i = 0; i < 8; ++i)
    for (int j = 0; j < 64; ++j) rows(i, j) = rng.complex_normal(1.0);
  std::vector<double> grid(128);
  for (int i = 0; i < 128; ++i) grid[i] = -kPi + 2.0 * kPi * i / 128.0;
  const auto peaks = music_1d(rows, grid, 1);
  REQUIRE(!peaks.empty());
  CHECK_FALSE(peaks[0].prominent);
}

TEST_CASE("music rejects a model order at or above the subarray length") {
  MatC rows = MatC::Ones(2, 6);
  std::vector<double> grid = {0.0, 0.5, 1.0};
  Music1dOptions plain;
  plain.smoothing = 0;
  CHECK_THROWS_AS(music_1d(rows, grid, 6, plain), std::invalid_argument);
  Music1dOptions smoothed;
  smoothed.smoothing = 3;
  CHECK_THROWS_AS(music_1d(rows, grid, 3, smoothed), std::invalid_argument);
}

TEST_CASE("music peak locations are invariant to covariance scaling") {
  Rng rng(21);
  MatC rows(3, 48);
  for (int i = 0; i < 3; ++i) {
    const cplx g = rng.complex_normal(1.0);
    for (int j = 0; j < 48; ++j)
      rows(i, j) = g * std::polar(1.0, 1.1 * j) + rng.complex_normal(0.05);
  }
  std::vector<double> grid(200);
  for (int i = 0; i < 200; ++i) grid[i] = -kPi + 2.0 * kPi * i / 200.0;
  const auto base = music_1d(rows, grid, 1);
  const MatC scaled = rows * 37.5;
  const auto same = music_1d(scaled, grid, 1);
  REQUIRE(base.size() == same.size());
  CHECK(base[0].frequency == same[0].frequency);
}

TEST_CASE("tpd angle recovery is exact on ideal single-path sequences") {
  const ArrayGeometry geom(16, 16, 0.01);
  const TpdGrids grids = make_tpd_grids(geom, 1, 1, 0.5, 2.0, 0);
  const double u = grids.u_grid[4], v = grids.v_grid[11];
  TpdSequences seqs;
  seqs.step1 = ideal_step1(geom, {{u, v, 1.0, 1.0}});
  step2_decompose(seqs.step1, seqs.step2_elev, seqs.step2_azim);
  for (auto alg : {LineSpectrumAlgorithm::Omp, LineSpectrumAlgorithm::Music}) {
    const auto sets = tpd_recover_angles(seqs, geom, grids, 1, alg);
    REQUIRE(sets.u_hat.size() == 1);
    REQUIRE(sets.v_hat.size() == 1);
    CHECK(sets.u_hat[0] == doctest::Approx(u).epsilon(1e-12));
    CHECK(sets.v_hat[0] == doctest::Approx(v).epsilon(1e-12));
  }
}

TEST_CASE("a shared elevation angle appears twice and survives pairing") {
  const ArrayGeometry geom(16, 16, 0.01);
  const TpdGrids grids = make_tpd_grids(geom, 1, 1, 0.5, 2.0, 0);
  const double v_shared = grids.v_grid[11];
  const std::vector<Scatterer> scene = {{grids.u_grid[10], v_shared, 2.0, 0.5},
                                        {grids.u_grid[3], v_shared, 2.0, 0.5}};
  TpdSequences seqs;
  seqs.step1 = ideal_step1(geom, scene);
  step2_decompose(seqs.step1, seqs.step2_elev, seqs.step2_azim);
  for (auto alg : {LineSpectrumAlgorithm::Omp, LineSpectrumAlgorithm::Music}) {
    const auto sets = tpd_recover_angles(seqs, geom, grids, 2, alg);
    REQUIRE(sets.v_hat.size() == 2);
    CHECK(sets.v_hat[0] == doctest::Approx(v_shared).epsilon(1e-12));
    CHECK(sets.v_hat[1] == doctest::Approx(v_shared).epsilon(1e-12));
  }

  const auto snaps = synthesize_snapshots(geom, scene, 64, kInf, WaveModel::Fresnel, 5);
  const auto sets = tpd_recover_angles(seqs, geom, grids, 2, LineSpectrumAlgorithm::Omp);
  const auto paired = pair_and_disambiguate(sets.u_hat, sets.v_hat, snaps.snapshots, geom, 2);
  REQUIRE(paired.pairs.size() == 2);
  CHECK(paired.pairs[0].second == doctest::Approx(v_shared));
  CHECK(paired.pairs[1].second == doctest::Approx(v_shared));
  std::vector<double> us = {paired.pairs[0].first, paired.pairs[1].first};
  std::sort(us.begin(), us.end());
  CHECK(us[0] == doctest::Approx(grids.u_grid[3]));
  CHECK(us[1] == doctest::Approx(grids.u_grid[10]));
}

TEST_CASE("period-1 aliasing yields exactly two candidates inside [-1, 1]") {
  const ArrayGeometry geom(16, 16, 0.01);  // d = lambda/2
  const auto set = alias_candidates(-0.2, geom);
  REQUIRE(set.size() == 2);
  CHECK(set[0] == doctest::Approx(-0.2));
  CHECK(set[1] == doctest::Approx(0.8));
  // quarter-wavelength spacing doubles the period; the alias disappears
  const ArrayGeometry dense_pitch(16, 16, 0.01, 0.0025);
  CHECK(alias_candidates(-0.2, dense_pitch).size() == 1);
}

TEST_CASE("an out-of-window azimuth is recovered via its in-window alias") {
  const ArrayGeometry geom(16, 16, 0.01);
  const TpdGrids grids = make_tpd_grids(geom, 1, 1, 0.5, 2.0, 0);
  const double u_in_window = grids.u_grid[4];  // -0.21875
  const double u_true = u_in_window + 1.0;     // 0.78125, outside the window
  const double v_true = grids.v_grid[9];
  TpdSequences seqs;
  seqs.step1 = ideal_step1(geom, {{u_true, v_true, 2.0, 1.0}});
  step2_decompose(seqs.step1, seqs.step2_elev, seqs.step2_azim);
  const auto sets = tpd_recover_angles(seqs, geom, grids, 1, LineSpectrumAlgorithm::Omp);
  CHECK(sets.u_hat[0] == doctest::Approx(u_in_window).epsilon(1e-9));  // fundamental window

  const auto bounds = region_boundaries(geom);
  for (double r : {bounds.fresnel_distance * 1.5, bounds.rayleigh_distance}) {
    const auto snaps = synthesize_snapshots(geom, {{u_true, v_true, r, 1.0}}, 32, 20.0,
                                            WaveModel::ExactSpherical, 3);
    const auto paired = pair_and_disambiguate(sets.u_hat, sets.v_hat, snaps.snapshots, geom, 1);
    REQUIRE(paired.pairs.size() == 1);
    CHECK(paired.pairs[0].first == doctest::Approx(u_true));
  }
}

TEST_CASE("pairing keeps the association that maximizes beamforming power") {
  const ArrayGeometry geom(16, 16, 0.01);
  const TpdGrids grids = make_tpd_grids(geom, 1, 1, 0.5, 2.0, 0);
  const double u1 = grids.u_grid[3], v1 = grids.v_grid[12];
  const double u2 = grids.u_grid[12], v2 = grids.v_grid[4];
  const std::vector<Scatterer> scene = {{u1, v1, 2.0, 0.5}, {u2, v2, 2.0, 0.5}};
  const auto snaps = synthesize_snapshots(geom, scene, 64, kInf, WaveModel::Fresnel, 9);

  const auto paired = pair_and_disambiguate({u1, u2}, {v1, v2}, snaps.snapshots, geom, 2);
  REQUIRE(paired.pairs.size() == 2);
  for (const auto& p : paired.pairs) {
    const bool first = p.first == doctest::Approx(u1) && p.second == doctest::Approx(v1);
    const bool second = p.first == doctest::Approx(u2) && p.second == doctest::Approx(v2);
    CHECK((first || second));
  }

  // explicit check: the correct association strictly beats the swap
  const double scale = 1.0 / std::sqrt(double(geom.size()));
  const auto beam = [&](double u, double v) {
    const VecC a = steering_planar(geom, u, v) * scale;
    return (snaps.snapshots.adjoint() * a).squaredNorm() / snaps.count();
  };
  CHECK(beam(u1, v1) + beam(u2, v2) > beam(u1, v2) + beam(u2, v1));
}

TEST_CASE("pairing output is invariant to candidate ordering") {
  const ArrayGeometry geom(16, 16, 0.01);
  const TpdGrids grids = make_tpd_grids(geom, 1, 1, 0.5, 2.0, 0);
  const std::vector<Scatterer> scene = {{grids.u_grid[3], grids.v_grid[12], 2.0, 0.6},
                                        {grids.u_grid[12], grids.v_grid[4], 2.0, 0.4}};
  const auto snaps = synthesize_snapshots(geom, scene, 32, 20.0, WaveModel::ExactSpherical, 13);
  const auto a = pair_and_disambiguate({scene[0].u, scene[1].u}, {scene[0].v, scene[1].v},
                                       snaps.snapshots, geom, 2);
  const auto b = pair_and_disambiguate({scene[1].u, scene[0].u}, {scene[1].v, scene[0].v},
                                       snaps.snapshots, geom, 2);
  REQUIRE(a.pairs.size() == b.pairs.size());
  for (std::size_t i = 0; i < a.pairs.size(); ++i) {
    CHECK(a.pairs[i].first == b.pairs[i].first);
    CHECK(a.pairs[i].second == b.pairs[i].second);
  }
}

TEST_CASE("matched-filter distance recovery hits the nearest grid point") {
  const ArrayGeometry geom(16, 16, 0.01);
  const TpdGrids grids = make_tpd_grids(geom, 1, 1, 0.2, 2.0, 0);
  const double invr_true = grids.invr_grid[5];
  const Scatterer s{grids.u_grid[4], grids.v_grid[10], 1.0 / invr_true, 1.0};
  const MatC c = ideal_step3(geom, {s});
  const auto est = tpd_recover_distance(c, {{s.u, s.v}}, geom, grids.invr_grid);
  REQUIRE(est.size() == 1);
  CHECK(1.0 / est[0].r == doctest::Approx(invr_true).epsilon(1e-12));
  CHECK_THROWS_AS(tpd_recover_distance(c, {{s.u, s.v}}, geom, {}), std::invalid_argument);
}

TEST_CASE("a scatterer far beyond the rayleigh distance is flagged far-field") {
  const ArrayGeometry geom(16, 16, 0.01);
  const auto bounds = region_boundaries(geom);
  const TpdGrids grids = make_tpd_grids(geom, 1, 1, 0.08 * bounds.rayleigh_distance,
                                        0.5 * bounds.rayleigh_distance, 0);
  const double u = grids.u_grid[4], v = grids.v_grid[11];
  for (double mult : {10.0, 30.0}) {
    const Scatterer s{u, v, mult * bounds.rayleigh_distance, 1.0};
    const auto snaps = synthesize_snapshots(geom, {s}, 1, kInf, WaveModel::ExactSpherical, 7,
                                            GainModel::UnitDeterministic);
    const auto seqs = decompose(snaps, geom);
    const auto est = tpd_recover_distance(seqs.step3, {{u, v}}, geom, grids.invr_grid);
    CHECK(std::isinf(est[0].r));
  }
  // and a solidly near-field one is not
  const Scatterer near_one{u, v, 1.0 / grids.invr_grid[8], 1.0};
  const auto snaps = synthesize_snapshots(geom, {near_one}, 1, kInf, WaveModel::ExactSpherical, 7,
                                          GainModel::UnitDeterministic);
  const auto seqs = decompose(snaps, geom);
  const auto est = tpd_recover_distance(seqs.step3, {{u, v}}, geom, grids.invr_grid);
  CHECK(std::isfinite(est[0].r));
}

TEST_CASE("successive cancellation separates two distances on one bearing") {
  const ArrayGeometry geom(64, 64, 0.01);
  const TpdGrids grids = make_tpd_grids(geom, 1, 1, 2.0, 20.0, 10);
  const double u = 0.09375, v = -0.15625;
  const double invr1 = grids.invr_grid[9];
  const double invr2 = grids.invr_grid[1];
  REQUIRE(invr1 == doctest::Approx(0.5));
  REQUIRE(invr2 == doctest::Approx(0.1));
  const std::vector<Scatterer> scene = {{u, v, 1.0 / invr1, 0.5}, {u, v, 1.0 / invr2, 0.5}};
  const MatC c = ideal_step3(geom, scene);

  const auto est = tpd_recover_distance(c, {{u, v}, {u, v}}, geom, grids.invr_grid);
  REQUIRE(est.size() == 2);
  std::vector<double> got = {1.0 / est[0].r, 1.0 / est[1].r};
  std::sort(got.begin(), got.end());
  const double cell = grids.invr_grid[1] - grids.invr_grid[0];
  CHECK(std::abs(got[0] - invr2) <= 1.01 * cell);
  CHECK(std::abs(got[1] - invr1) <= 1.01 * cell);

  // brute-force joint two-distance search as the oracle
  const int ref = geom.flat(geom.n_h() / 2, geom.n_v() / 2);
  const auto atom = [&](double invr) {
    VecC a = steering_fresnel(geom, Scatterer{u, v, 1.0 / invr, 1.0});
    a *= std::conj(a(ref));
    return VecC(a / a.norm());
  };
  const VecC target = Eigen::Map<const VecC>(c.data(), geom.size());
  double best = 1e300;
  int bi = -1, bj = -1;
  for (std::size_t i = 0; i < grids.invr_grid.size(); ++i)
    for (std::size_t j = i + 1; j < grids.invr_grid.size(); ++j) {
      MatC pair(geom.size(), 2);
      pair.col(0) = atom(grids.invr_grid[i]);
      pair.col(1) = atom(grids.invr_grid[j]);
      MatC gram = pair.adjoint() * pair;
      gram.diagonal().array() += 1e-12;
      const VecC coef = Eigen::LDLT<MatC>(gram).solve(pair.adjoint() * target);
      const double resid = (target - pair * coef).squaredNorm();
      if (resid < best) {
        best = resid;
        bi = static_cast<int>(i);
        bj = static_cast<int>(j);
      }
    }
  CHECK(std::abs(grids.invr_grid[bi] - got[0]) <= 1.01 * cell);
  CHECK(std::abs(grids.invr_grid[bj] - got[1]) <= 1.01 * cell);
}

TEST_CASE("full pipeline returns the exact grid point for on-grid truths") {
  const ArrayGeometry geom(12, 12, 0.01);
  const auto bounds = region_boundaries(geom);
  TpdOptions opts;
  opts.r_min = 0.08 * bounds.rayleigh_distance;
  opts.r_max = 0.5 * bounds.rayleigh_distance;
  const TpdGrids grids = make_tpd_grids(geom, 1, 1, opts.r_min, opts.r_max, 0);
  Rng rng(6);
  for (int trial = 0; trial < 20; ++trial) {
    const double u = grids.u_grid[rng.next_u64() % grids.u_grid.size()];
    const double v = grids.v_grid[rng.next_u64() % grids.v_grid.size()];
    const double invr = grids.invr_grid[rng.next_u64() % grids.invr_grid.size()];
    const Scatterer s{u, v, 1.0 / invr, 1.0};
    const auto snaps = synthesize_snapshots(geom, {s}, 1, kInf, WaveModel::Fresnel, 7,
                                            GainModel::UnitDeterministic);
    const EstimateSet est = tpd_estimate(snaps, geom, 1, opts);
    REQUIRE(est.entries.size() == 1);
    CHECK(est.entries[0].u == doctest::Approx(u).epsilon(1e-12));
    CHECK(est.entries[0].v == doctest::Approx(v).epsilon(1e-12));
    CHECK(1.0 / est.entries[0].r == doctest::Approx(invr).epsilon(1e-9));
    CHECK(est.search_space_size ==
          static_cast<long>(grids.u_grid.size() + grids.v_grid.size() + grids.invr_grid.size()));
  }
}

TEST_CASE("refinement leaves an on-grid optimum untouched") {
  const ArrayGeometry geom(12, 12, 0.01);
  const TpdGrids grids = make_tpd_grids(geom, 1, 1, 0.5, 2.0, 0);
  const Scatterer s{grids.u_grid[7], grids.v_grid[2], 1.0 / grids.invr_grid[4], 1.0};
  const auto snaps = synthesize_snapshots(geom, {s}, 4, kInf, WaveModel::ExactSpherical, 3,
                                          GainModel::UnitDeterministic);
  EstimateSet est;
  est.entries.push_back({s.u, s.v, s.r, 1.0});
  RefineOptions ropts;
  ropts.cell_u = ropts.cell_v = grids.u_grid[1] - grids.u_grid[0];
  ropts.cell_invr = grids.invr_grid[1] - grids.invr_grid[0];
  const EstimateSet fine = refine_offgrid(est, snaps.snapshots, geom, ropts);
  CHECK(std::abs(fine.entries[0].u - s.u) < 1e-6 * ropts.cell_u);
  CHECK(std::abs(fine.entries[0].v - s.v) < 1e-6 * ropts.cell_v);
  CHECK(std::abs(1.0 / fine.entries[0].r - 1.0 / s.r) < 1e-6 * ropts.cell_invr);
}

TEST_CASE("refinement recovers a half-cell off-grid scatterer 10x better") {
  const ArrayGeometry geom(16, 16, 0.01);
  TpdOptions opts;
  opts.r_min = 0.5;
  opts.r_max = 2.0;
  const TpdGrids grids = make_tpd_grids(geom, 1, 1, opts.r_min, opts.r_max, 0);
  const double cell_u = grids.u_grid[1] - grids.u_grid[0];
  const double cell_r = grids.invr_grid[1] - grids.invr_grid[0];
  const double u_true = grids.u_grid[7] + 0.5 * cell_u;
  const double v_true = grids.v_grid[9] - 0.47 * cell_u;
  const double invr_true = grids.invr_grid[8] + 0.5 * cell_r;
  const Scatterer s{u_true, v_true, 1.0 / invr_true, 1.0};
  const auto snaps = synthesize_snapshots(geom, {s}, 8, kInf, WaveModel::ExactSpherical, 5);

  const EstimateSet grid_est = tpd_estimate(snaps, geom, 1, opts);
  RefineOptions ropts;
  ropts.cell_u = ropts.cell_v = cell_u;
  ropts.cell_invr = cell_r;
  const EstimateSet fine = refine_offgrid(grid_est, snaps.snapshots, geom, ropts);

  CHECK(std::abs(fine.entries[0].u - u_true) * 10.0 <
        std::abs(grid_est.entries[0].u - u_true) + 1e-12);
  CHECK(std::abs(fine.entries[0].v - v_true) * 10.0 <
        std::abs(grid_est.entries[0].v - v_true) + 1e-12);
  CHECK(std::abs(1.0 / fine.entries[0].r - invr_true) * 10.0 <
        std::abs(1.0 / grid_est.entries[0].r - invr_true) + 1e-12);
}

TEST_CASE("refinement never reduces the captured energy") {
  const ArrayGeometry geom(8, 8, 0.01);
  Rng rng(31);
  for (int scene_idx = 0; scene_idx < 100; ++scene_idx) {
    std::vector<Scatterer> scene;
    for (int l = 0; l < 2; ++l)
      scene.push_back(
          {rng.uniform(-0.6, 0.6), rng.uniform(-0.6, 0.6), rng.uniform(0.3, 3.0), 0.5});
    const auto snaps = synthesize_snapshots(geom, scene, 6, 10.0, WaveModel::ExactSpherical,
                                            derive_seed(77, scene_idx));
    TpdOptions opts;
    opts.r_min = 0.3;
    opts.r_max = 3.0;
    const EstimateSet grid_est = tpd_estimate(snaps, geom, 2, opts);
    RefineOptions ropts;
    ropts.cell_u = ropts.cell_v = 1.0 / 8.0;
    ropts.cell_invr = (1.0 / 0.3 - 1.0 / 3.0) / 7.0;
    ropts.max_cycles = 3;
    const EstimateSet fine = refine_offgrid(grid_est, snaps.snapshots, geom, ropts);
    const double before = captured_energy(geom, grid_est.entries, snaps.snapshots);
    const double after = captured_energy(geom, fine.entries, snaps.snapshots);
    CHECK(after >= before * (1.0 - 1e-9));
    for (const auto& e : fine.entries) CHECK(e.u * e.u + e.v * e.v <= 1.0 + 1e-9);
  }
}

TEST_CASE("the method registry exposes all six tags and runs them") {
  const auto& reg = method_registry();
  for (const char* tag : {"AD-OMP", "PD-OMP", "AD-MUSIC", "PD-MUSIC", "TPD-OMP", "TPD-MUSIC"})
    CHECK(reg.count(tag) == 1);

  const ArrayGeometry geom(8, 8, 0.01);
  const auto bounds = region_boundaries(geom);
  const Dictionary ad = build_ad_dictionary(geom, 1, 1);
  const Dictionary pd =
      build_pd_dictionary(geom, 1, 1, kDefaultPdBeta, 0.1 * bounds.rayleigh_distance,
                          0.6 * bounds.rayleigh_distance);
  MethodContext ctx;
  ctx.geom = &geom;
  ctx.ad = &ad;
  ctx.pd = &pd;
  ctx.model_order = 2;
  ctx.tpd.r_min = 0.1 * bounds.rayleigh_distance;
  ctx.tpd.r_max = 0.6 * bounds.rayleigh_distance;

  const std::vector<Scatterer> scene = {{0.3, 0.1, 0.3 * bounds.rayleigh_distance, 0.5},
                                        {-0.2, -0.4, 0.3 * bounds.rayleigh_distance, 0.5}};
  const auto snaps = synthesize_snapshots(geom, scene, 32, 20.0, WaveModel::ExactSpherical, 77);
  for (const auto& [tag, solver] : reg) {
    const EstimateSet est = solver(snaps, ctx);
    CHECK(est.method_tag == tag);
    CHECK(!est.entries.empty());
    CHECK(est.search_space_size > 0);
  }
  MethodContext missing;
  missing.geom = &geom;
  CHECK_THROWS_AS(reg.at("AD-OMP")(snaps, missing), std::invalid_argument);
}
