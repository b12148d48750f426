// SPDX-License-Identifier: Apache-2.0
//
// nftk -- near-field array channel toolkit

#pragma once

#include <iosfwd>
#include <string>

#include "nftk/channel.hpp"
#include "nftk/geometry.hpp"

namespace nftk {

/// Plain-text snapshot container, self-describing so `estimate` can run
/// without repeating the geometry. Values are printed with 17 significant
/// digits and round-trip exactly.
void save_snapshots(std::ostream& os, const SnapshotSet& set, const ArrayGeometry& geom);

struct LoadedSnapshots {
  SnapshotSet set;
  int n_h = 0;
  int n_v = 0;
  double spacing = 0.0;
  double wavelength = 0.0;

  ArrayGeometry geometry() const { return {n_h, n_v, wavelength, spacing}; }
};
LoadedSnapshots load_snapshots(std::istream& is);

}  // namespace nftk
