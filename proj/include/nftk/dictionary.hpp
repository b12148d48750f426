// SPDX-License-Identifier: Apache-2.0
//
// nftk -- near-field array channel toolkit

#pragma once

#include <vector>

#include "nftk/channel.hpp"
#include "nftk/common.hpp"
#include "nftk/geometry.hpp"

namespace nftk {

enum class DictionaryFlavor { AngularDomain, PolarDomain };

/// One grid tuple behind a dictionary column. r is +inf for planar atoms
/// (every AD atom, and the per-angle far-field atom of a PD dictionary).
struct GridPoint {
  double u = 0.0;
  double v = 0.0;
  double r = std::numeric_limits<double>::infinity();
  bool visible = true;  // u^2 + v^2 <= 1
};

/// Sparsifying dictionary: unit-norm atom matrix plus its parameter grid.
struct Dictionary {
  MatC atoms;                   // size() x G, unit-norm columns
  std::vector<GridPoint> grid;  // length G
  DictionaryFlavor flavor = DictionaryFlavor::AngularDomain;

  std::vector<double> u_grid;  // angle grid marginals
  std::vector<double> v_grid;
  std::vector<double> invr_levels;  // PD: finite 1/r levels, ascending (excludes the r=inf atom)

  double coherence_control = 0.0;  // PD beta
  int distance_levels = 0;         // PD S (finite levels; atoms per angle = S + 1)

  int atom_count() const { return static_cast<int>(atoms.cols()); }
  std::size_t memory_bytes() const { return sizeof(cplx) * atoms.size(); }
};

/// Angle grid used by both flavors: u_i = 2i/(O n) - 1 + 1/(O n).
std::vector<double> angle_grid(int count, int oversampling);

/// 2D DFT-style dictionary of planar responses. At oversampling (1,1) the
/// atoms form an orthonormal basis.
Dictionary build_ad_dictionary(const ArrayGeometry& geom, int oversample_h, int oversample_v);

/// Distance level count S = ceil(D^2/(2 lambda beta^2) * (1/r_min - 1/r_max)) + 1.
int pd_distance_level_count(const ArrayGeometry& geom, double beta, double r_min, double r_max);

/// Polar-domain dictionary: for every angle grid point, one far-field atom
/// plus S Fresnel atoms with 1/r equally spaced over [1/r_max, 1/r_min].
/// Larger beta widens the rings (S shrinks ~ 1/beta^2) and raises adjacent
/// coherence.
Dictionary build_pd_dictionary(const ArrayGeometry& geom, int oversample_h, int oversample_v,
                               double beta, double r_min, double r_max);

/// Calibrated so the broadside distance-adjacent coherence lands at ~0.5.
inline constexpr double kDefaultPdBeta = 1.5;

/// Default polar-domain distance bounds for a geometry: the outermost ring
/// sits at the 1/r quantum delta = 2 lambda beta^2 / D^2 (so the far-field
/// atom is one ring away) and the innermost at the first multiple of delta
/// at or inside the Fresnel distance. With these bounds every adjacent pair
/// of same-angle atoms is spaced exactly delta apart in 1/r.
struct PdBounds {
  double r_min = 0.0;
  double r_max = 0.0;
};
PdBounds default_pd_bounds(const ArrayGeometry& geom, double beta = kDefaultPdBeta);

/// Exact max |<a_i, a_j>| over distinct columns, computed in column blocks.
/// Throws for dictionaries with fewer than two atoms.
double mutual_coherence(const Dictionary& dict, int block = 1024);

/// |<a_s, a_{s+1}>| between consecutive-distance atoms of a PD dictionary at
/// the angle grid point closest to broadside (the far-field atom counts as
/// the outermost ring). Returns the maximum over consecutive pairs.
double adjacent_distance_coherence(const Dictionary& dict);

}  // namespace nftk
