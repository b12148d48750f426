// SPDX-License-Identifier: Apache-2.0
//
// nftk -- near-field array channel toolkit

#pragma once

#include <vector>

#include "nftk/common.hpp"

namespace nftk {

/// Centered antenna index. For an axis with count c, indices run
/// p - (c-1)/2 for p = 0..c-1, i.e. integers for odd counts and
/// half-integers for even counts. Every index has an origin-symmetric
/// partner (-m, -n) in the set.
struct AntennaIndex {
  double m = 0.0;  // horizontal
  double n = 0.0;  // vertical
};

/// Uniform planar array in the z = 0 plane, broadside along +z.
/// Directional cosines (u, v) are measured against the x / y axes.
class ArrayGeometry {
 public:
  ArrayGeometry(int n_h, int n_v, double wavelength, double spacing = 0.0);

  int n_h() const { return n_h_; }
  int n_v() const { return n_v_; }
  int size() const { return n_h_ * n_v_; }
  double spacing() const { return spacing_; }
  double wavelength() const { return wavelength_; }
  double wavenumber() const { return 2.0 * kPi / wavelength_; }

  /// Centered horizontal index of antenna column p.
  double index_h(int p) const { return p - 0.5 * (n_h_ - 1); }
  /// Centered vertical index of antenna row q.
  double index_v(int q) const { return q - 0.5 * (n_v_ - 1); }

  /// Flat position of (p, q) in the row-major snapshot layout (m varies fastest).
  int flat(int p, int q) const { return q * n_h_ + p; }

  bool contains(const AntennaIndex& idx) const;

 private:
  int n_h_;
  int n_v_;
  double spacing_;
  double wavelength_;
};

/// Near/far field boundaries for an aperture of diagonal D:
/// rayleigh = 2 D^2 / lambda, fresnel = 0.62 sqrt(D^3 / lambda).
struct RegionBoundaries {
  double rayleigh_distance = 0.0;
  double fresnel_distance = 0.0;
  double aperture = 0.0;
};

/// Row-major list of centered (m, n) pairs; m varies fastest.
std::vector<AntennaIndex> centered_indices(const ArrayGeometry& geom);

/// Throws std::invalid_argument for a degenerate single-antenna array (D = 0).
RegionBoundaries region_boundaries(const ArrayGeometry& geom);

/// Origin-symmetric partner (-m, -n). Throws if idx is not in the index set.
AntennaIndex symmetric_partner(const ArrayGeometry& geom, const AntennaIndex& idx);

}  // namespace nftk
