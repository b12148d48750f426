// SPDX-License-Identifier: Apache-2.0
//
// nftk -- near-field array channel toolkit

#pragma once

#include <functional>
#include <map>
#include <string>
#include <utility>
#include <vector>

#include "nftk/channel.hpp"
#include "nftk/common.hpp"
#include "nftk/dictionary.hpp"
#include "nftk/geometry.hpp"
#include "nftk/tpd.hpp"

namespace nftk {

/// One recovered scatterer. r is +inf when the estimate is flagged far-field.
struct Estimate {
  double u = 0.0;
  double v = 0.0;
  double r = std::numeric_limits<double>::infinity();
  double power = 0.0;
};

struct EstimateSet {
  std::vector<Estimate> entries;  // sorted by descending power
  std::string method_tag;
  long search_space_size = 0;  // candidate grid points examined by the method
  bool degraded = false;       // dropped atoms / fewer candidates than requested
};

// ---------------------------------------------------------------------------
// Greedy sparse coding
// ---------------------------------------------------------------------------

struct OmpOptions {
  bool visible_only = true;  // restrict selection to atoms with u^2 + v^2 <= 1
};

struct OmpResult {
  EstimateSet set;
  std::vector<int> selected;              // dictionary column per iteration
  MatC coefficients;                      // K x T least-squares fit
  std::vector<double> residual_history;   // squared residual norm per iteration
  bool dropped_atom = false;              // a rank-deficient selection was discarded
};

/// Orthogonal matching pursuit over a dictionary. Multiple snapshot columns
/// are treated as an MMV problem: atoms are selected by summed projection
/// power across snapshots. Throws if sparsity exceeds the atom count.
OmpResult omp_detailed(const MatC& observations, const Dictionary& dict, int sparsity,
                       const OmpOptions& opts = {});
EstimateSet omp(const MatC& observations, const Dictionary& dict, int sparsity,
                const OmpOptions& opts = {});

// ---------------------------------------------------------------------------
// Subspace methods
// ---------------------------------------------------------------------------

struct MusicPeak {
  double frequency = 0.0;  // rad per sample
  double power = 0.0;      // pseudo-spectrum value at the peak
  bool prominent = true;   // false when the peak is indistinct from the floor
};

struct Music1dOptions {
  int smoothing = -1;  // subarray length; -1 auto (smooth when rows < order), 0 none
  bool circular = false;  // grid spans a full period; peak search wraps around
  double prominence_factor = 5.0;  // peak/median ratio below which a peak is flagged
};

/// 1D MUSIC line-spectrum estimation. `rows` holds one snapshot per row of a
/// length-M uniformly sampled sequence; `freq_grid` lists candidate
/// frequencies in rad/sample. Returns up to model_order strict local maxima
/// of the noise-subspace pseudo-spectrum, strongest first. Spatial smoothing
/// with subarray length ceil(2M/3) restores rank for coherent sources.
/// Throws if model_order >= subarray length. `spectrum_out`, when given,
/// receives the pseudo-spectrum over the whole grid.
std::vector<MusicPeak> music_1d(const MatC& rows, const std::vector<double>& freq_grid,
                                int model_order, const Music1dOptions& opts = {},
                                std::vector<double>* spectrum_out = nullptr);

/// MUSIC over a multidimensional dictionary grid: noise-subspace
/// pseudo-spectrum per atom, non-maximum suppression over grid neighbors,
/// least-squares power refit on the accepted atoms.
EstimateSet music_grid(const MatC& observations, const Dictionary& dict, int model_order,
                       bool visible_only = true);

// ---------------------------------------------------------------------------
// TPD parameter recovery
// ---------------------------------------------------------------------------

/// 1D candidate grids for the decomposed estimation problems. The angle
/// grids cover one alias period of the doubled-frequency step-1/2 sequences
/// (width min(2, lambda/(2 d)), centered on broadside); the distance grid is
/// uniform in 1/r.
struct TpdGrids {
  std::vector<double> u_grid;
  std::vector<double> v_grid;
  std::vector<double> invr_grid;  // ascending
};

TpdGrids make_tpd_grids(const ArrayGeometry& geom, int oversample_h, int oversample_v,
                        double r_min, double r_max, int distance_levels = 0);

/// Values w in [-1, 1] with w = value + j * (alias period), j integer. The
/// step-1 product doubles the effective spacing, so for d = lambda/2 the
/// period is 1 and every angle has exactly one indistinguishable alias.
std::vector<double> alias_candidates(double value, const ArrayGeometry& geom);

enum class LineSpectrumAlgorithm { Omp, Music };

struct AngleSets {
  std::vector<double> v_hat;  // elevation candidates (from step2_elev)
  std::vector<double> u_hat;  // azimuth candidates (from step2_azim)
};

/// Estimates model_order directional cosines per axis from the step-2
/// sequences, treating symmetric rows (m >= 0, resp. n >= 0) as MMV
/// snapshots of a 1D line spectrum. Candidates whose fitted power falls
/// below multiplicity_threshold times the strongest are replaced by repeats
/// of the strong candidates, so shared angles appear with multiplicity.
AngleSets tpd_recover_angles(const TpdSequences& seqs, const ArrayGeometry& geom,
                             const TpdGrids& grids, int model_order,
                             LineSpectrumAlgorithm algorithm,
                             double multiplicity_threshold = 1e-2);

struct PairedAngles {
  std::vector<std::pair<double, double>> pairs;  // (u, v), strongest first
  std::vector<double> scores;                    // beamforming power per pair
  bool flagged = false;  // fewer than model_order pairs had a finite score
};

/// Re-associates azimuth and elevation candidate sets and resolves the
/// step-1 aliases: every alias combination inside the unit disk is scored by
/// far-field beamforming power on the raw snapshots, and the model_order
/// pairs maximizing the total score are picked by rectangular assignment.
PairedAngles pair_and_disambiguate(const std::vector<double>& u_set,
                                   const std::vector<double>& v_set, const MatC& observations,
                                   const ArrayGeometry& geom, int model_order);

struct DistanceEstimate {
  double r = std::numeric_limits<double>::infinity();  // +inf when flagged far-field
  double mf_power = 0.0;  // matched-filter amplitude at the chosen grid point
};

/// Matched-filter distance recovery on the step-3 sequence: for each angle
/// pair, argmax over the 1/r grid (plus a far-field atom) of the analytic
/// center-referenced response correlation. Multi-scatterer scenes are
/// handled by successive cancellation in descending matched-filter order.
/// A pair whose best finite-distance gain over the far-field atom is below
/// far_field_margin (relative) is flagged far-field.
std::vector<DistanceEstimate> tpd_recover_distance(const MatC& step3,
                                                   const std::vector<std::pair<double, double>>& pairs,
                                                   const ArrayGeometry& geom,
                                                   const std::vector<double>& invr_grid,
                                                   double far_field_margin = 0.005);

struct TpdOptions {
  int oversample_h = 1;
  int oversample_v = 1;
  double r_min = 1.0;
  double r_max = 100.0;
  int distance_levels = 0;  // 0: max(n_h, n_v)
  LineSpectrumAlgorithm algorithm = LineSpectrumAlgorithm::Omp;
  double multiplicity_threshold = 1e-2;
  double far_field_margin = 0.005;
};

/// Full decomposition pipeline: step 1-3 sequences, per-axis angle recovery,
/// pairing/disambiguation, matched-filter distances, exact-model power refit.
EstimateSet tpd_estimate(const SnapshotSet& snapshots, const ArrayGeometry& geom, int model_order,
                         const TpdOptions& opts);

// ---------------------------------------------------------------------------
// Off-grid refinement
// ---------------------------------------------------------------------------

struct RefineOptions {
  double cell_u = 0.0;  // one grid cell per parameter; 0 disables that axis
  double cell_v = 0.0;
  double cell_invr = 0.0;
  int max_cycles = 20;
  double tolerance = 1e-6;  // relative per-cycle objective gain
};

/// Cyclic coordinate descent around the grid-level estimates: golden-section
/// search over +-1 grid cell per parameter, maximizing the energy captured
/// by the joint projection onto the exact-model atoms. The objective is
/// non-decreasing; with an on-grid optimum the estimates do not move.
EstimateSet refine_offgrid(const EstimateSet& estimates, const MatC& observations,
                           const ArrayGeometry& geom, const RefineOptions& opts);

// ---------------------------------------------------------------------------
// Method registry
// ---------------------------------------------------------------------------

struct MethodContext {
  const ArrayGeometry* geom = nullptr;
  const Dictionary* ad = nullptr;  // required by AD-* methods
  const Dictionary* pd = nullptr;  // required by PD-* methods
  TpdOptions tpd;
  int model_order = 1;
  bool refine = false;
  int refine_max_cycles = 20;
};

using Solver = std::function<EstimateSet(const SnapshotSet&, const MethodContext&)>;

/// Solvers keyed by method tag:
/// AD-OMP, PD-OMP, AD-MUSIC, PD-MUSIC, TPD-OMP, TPD-MUSIC.
const std::map<std::string, Solver>& method_registry();

/// Exact-model steering matrix for a set of estimates (planar columns for
/// far-field entries). Shared by power refits, refinement, and channel NMSE.
MatC estimate_atoms(const ArrayGeometry& geom, const std::vector<Estimate>& entries);

}  // namespace nftk
