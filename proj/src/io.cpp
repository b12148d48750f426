// SPDX-License-Identifier: Apache-2.0
//
// nftk -- near-field array channel toolkit

#include "nftk/io.hpp"

#include <cmath>
#include <istream>
#include <ostream>
#include <sstream>

namespace nftk {

void save_snapshots(std::ostream& os, const SnapshotSet& set, const ArrayGeometry& geom) {
  char buf[96];
  os << "nftk-snapshots 1\n";
  std::snprintf(buf, sizeof buf, "%d %d %.17g %.17g\n", geom.n_h(), geom.n_v(), geom.spacing(),
                geom.wavelength());
  os << buf;
  std::snprintf(buf, sizeof buf, "%d %.17g %.17g %s\n", set.count(), set.snr_db,
                set.noise_variance, set.model == WaveModel::ExactSpherical ? "exact" : "fresnel");
  os << buf;
  for (int t = 0; t < set.count(); ++t) {
    for (int i = 0; i < set.snapshots.rows(); ++i) {
      const cplx z = set.snapshots(i, t);
      std::snprintf(buf, sizeof buf, "%s%.17g %.17g", i ? " " : "", z.real(), z.imag());
      os << buf;
    }
    os << "\n";
  }
}

LoadedSnapshots load_snapshots(std::istream& is) {
  std::string magic;
  int version = 0;
  if (!(is >> magic >> version) || magic != "nftk-snapshots" || version != 1)
    throw std::runtime_error("not an nftk snapshot file");

  LoadedSnapshots out;
  int count = 0;
  std::string model;
  if (!(is >> out.n_h >> out.n_v >> out.spacing >> out.wavelength))
    throw std::runtime_error("snapshot file: bad geometry line");
  if (!(is >> count >> out.set.snr_db >> out.set.noise_variance >> model))
    throw std::runtime_error("snapshot file: bad signal line");
  if (model != "exact" && model != "fresnel")
    throw std::runtime_error("snapshot file: unknown wave model " + model);
  out.set.model = model == "exact" ? WaveModel::ExactSpherical : WaveModel::Fresnel;

  const long n = static_cast<long>(out.n_h) * out.n_v;
  out.set.snapshots.resize(n, count);
  for (int t = 0; t < count; ++t)
    for (long i = 0; i < n; ++i) {
      double re = 0.0, im = 0.0;
      if (!(is >> re >> im)) throw std::runtime_error("snapshot file: truncated data");
      out.set.snapshots(i, t) = cplx(re, im);
    }
  return out;
}

}  // namespace nftk
