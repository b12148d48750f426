// SPDX-License-Identifier: Apache-2.0
//
// nftk -- near-field array channel toolkit

#pragma once

#include <array>
#include <cstdint>
#include <iosfwd>
#include <vector>

#include "nftk/common.hpp"
#include "nftk/geometry.hpp"
#include "nftk/rng.hpp"

namespace nftk {

/// One sparse scatterer: directional cosines, distance from the array
/// center, and average path power.
struct Scatterer {
  double u = 0.0;      // horizontal directional cosine
  double v = 0.0;      // vertical directional cosine
  double r = 1.0;      // meters
  double power = 1.0;  // average path power P_l

  /// Broadside directional cosine sqrt(1 - u^2 - v^2); >= 0 for valid scatterers.
  double w() const;
};

/// A cluster of scatterers drawn around a common direction from a
/// von Mises-Fisher distribution with concentration kappa.
struct ClusterSpec {
  std::array<double, 3> center_direction{0.0, 0.0, 1.0};  // unit vector, broadside +z
  double concentration = 50.0;                            // vMF kappa
  int scatterers_per_cluster = 2;
  double r_min = 1.0;  // cluster distance drawn uniformly in [r_min, r_max]
  double r_max = 1.0;
  double distance_jitter = 0.0;  // optional per-member jitter, default none
};

enum class WaveModel { ExactSpherical, Fresnel };

enum class GainModel {
  Random,             // i.i.d. CN(0, P_l) per path and snapshot
  UnitDeterministic,  // every gain forced to 1 (test/diagnostic hook)
};

/// T noisy observations of the array response, stored column-wise in
/// row-major centered-index order (horizontal index varies fastest).
struct SnapshotSet {
  MatC snapshots;               // size() x T
  double noise_variance = 0.0;  // per-entry complex noise power
  double snr_db = 0.0;          // +inf means noise disabled
  WaveModel model = WaveModel::ExactSpherical;

  int count() const { return static_cast<int>(snapshots.cols()); }
};

/// Draws every cluster's members and normalizes powers to sum to one.
/// Directions with w <= 0 (behind the array) are rejected and redrawn.
/// All members of a cluster share the cluster's drawn distance unless
/// distance_jitter is set.
std::vector<Scatterer> sample_clusters(const std::vector<ClusterSpec>& specs,
                                       std::uint64_t rng_seed);

/// Exact spherical-wave response: entry (m,n) = exp(-j k (||r s - p_mn|| - r)).
VecC steering_exact(const ArrayGeometry& geom, const Scatterer& s);

/// Fresnel response: entry (m,n) = exp(-j k (-(m d u + n d v) + Q(m,n))) with
/// Q(m,n) = ((m d)^2 + (n d)^2 - (m d u + n d v)^2) / (2 r). Q is origin-
/// symmetric and non-negative; the linear term is origin-antisymmetric.
VecC steering_fresnel(const ArrayGeometry& geom, const Scatterer& s);

VecC steering(const ArrayGeometry& geom, const Scatterer& s, WaveModel model);

/// Far-field planar response exp(+j k d (m u + n v)), the r -> inf limit of
/// both models above.
VecC steering_planar(const ArrayGeometry& geom, double u, double v);

/// The quadratic Fresnel term Q(m,n) in meters.
double fresnel_quadratic_term(const ArrayGeometry& geom, const Scatterer& s, double m, double n);

/// Path gain draws for T snapshots: row l is path l, CN(0, powers[l]) i.i.d.
MatC draw_gains(const std::vector<double>& powers, int snapshots, Rng& rng);

/// Synthesizes snapshot t = sum_l g_l^(t) a(s_l) + w^(t). Noise variance is
/// sigma^2 = (sum_l P_l) / 10^(snr_db/10); pass snr_db = +inf to disable noise.
SnapshotSet synthesize_snapshots(const ArrayGeometry& geom, const std::vector<Scatterer>& scatterers,
                                 int snapshots, double snr_db, WaveModel model,
                                 std::uint64_t rng_seed, GainModel gains = GainModel::Random);

/// Plain-text ground-truth table, one row per scatterer: u v r power.
void save_truth_table(std::ostream& os, const std::vector<Scatterer>& scatterers);
std::vector<Scatterer> load_truth_table(std::istream& is);

}  // namespace nftk
