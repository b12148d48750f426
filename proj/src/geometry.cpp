// SPDX-License-Identifier: Apache-2.0
//
// nftk -- near-field array channel toolkit

#include "nftk/geometry.hpp"

#include <cmath>

namespace nftk {

ArrayGeometry::ArrayGeometry(int n_h, int n_v, double wavelength, double spacing)
    : n_h_(n_h), n_v_(n_v), spacing_(spacing), wavelength_(wavelength) {
  if (n_h < 1 || n_v < 1) throw std::invalid_argument("antenna counts must be >= 1");
  if (wavelength <= 0.0) throw std::invalid_argument("wavelength must be positive");
  if (spacing_ == 0.0) spacing_ = wavelength / 2.0;  // default half-wavelength pitch
  if (spacing_ <= 0.0) throw std::invalid_argument("spacing must be positive");
}

bool ArrayGeometry::contains(const AntennaIndex& idx) const {
  const double p = idx.m + 0.5 * (n_h_ - 1);
  const double q = idx.n + 0.5 * (n_v_ - 1);
  const double pr = std::round(p);
  const double qr = std::round(q);
  if (std::abs(p - pr) > 1e-9 || std::abs(q - qr) > 1e-9) return false;
  return pr >= 0.0 && pr <= n_h_ - 1 && qr >= 0.0 && qr <= n_v_ - 1;
}

std::vector<AntennaIndex> centered_indices(const ArrayGeometry& geom) {
  std::vector<AntennaIndex> out;
  out.reserve(static_cast<std::size_t>(geom.size()));
  for (int q = 0; q < geom.n_v(); ++q)
    for (int p = 0; p < geom.n_h(); ++p) out.push_back({geom.index_h(p), geom.index_v(q)});
  return out;
}

RegionBoundaries region_boundaries(const ArrayGeometry& geom) {
  const double dx = (geom.n_h() - 1) * geom.spacing();
  const double dy = (geom.n_v() - 1) * geom.spacing();
  const double diagonal = std::hypot(dx, dy);
  if (diagonal <= 0.0) throw std::invalid_argument("single-antenna array has no aperture");
  RegionBoundaries b;
  b.aperture = diagonal;
  b.rayleigh_distance = 2.0 * diagonal * diagonal / geom.wavelength();
  b.fresnel_distance = 0.62 * std::sqrt(diagonal * diagonal * diagonal / geom.wavelength());
  return b;
}

AntennaIndex symmetric_partner(const ArrayGeometry& geom, const AntennaIndex& idx) {
  if (!geom.contains(idx)) throw std::invalid_argument("index not in the array's index set");
  // -0.0 would break exact comparisons downstream
  return {idx.m == 0.0 ? 0.0 : -idx.m, idx.n == 0.0 ? 0.0 : -idx.n};
}

}  // namespace nftk
