// SPDX-License-Identifier: Apache-2.0
//
// nftk -- near-field array channel toolkit

#include "nftk/tpd.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numeric>

namespace nftk {

namespace {

void check_nonempty(const SnapshotSet& snapshots, const ArrayGeometry& geom) {
  if (snapshots.count() < 1) throw std::invalid_argument("empty snapshot set");
  if (snapshots.snapshots.rows() != geom.size())
    throw std::invalid_argument("snapshot length does not match geometry");
}

}  // namespace

MatC step1_angular_product(const SnapshotSet& snapshots, const ArrayGeometry& geom) {
  check_nonempty(snapshots, geom);
  const MatC& h = snapshots.snapshots;
  // flat index N-1-i is exactly the origin-symmetric partner of i
  const VecC x = (h.array() * h.colwise().reverse().array().conjugate()).rowwise().mean().matrix();
  MatC out = Eigen::Map<const MatC>(x.data(), geom.n_h(), geom.n_v());
  if (geom.n_h() % 2 == 1 && geom.n_v() % 2 == 1)
    out((geom.n_h() - 1) / 2, (geom.n_v() - 1) / 2) -= snapshots.noise_variance;
  return out;
}

void step2_decompose(const MatC& step1, MatC& step2_elev, MatC& step2_azim) {
  step2_elev = step1 + step1.colwise().reverse();  // x(m,n) + x(-m,n)
  step2_azim = step1 + step1.rowwise().reverse();  // x(m,n) + x(m,-n)
}

AntennaIndex step3_reference(const ArrayGeometry& geom) {
  return {geom.index_h(geom.n_h() / 2), geom.index_v(geom.n_v() / 2)};
}

MatC step3_center_product(const SnapshotSet& snapshots, const ArrayGeometry& geom) {
  check_nonempty(snapshots, geom);
  const MatC& h = snapshots.snapshots;
  const int ref = geom.flat(geom.n_h() / 2, geom.n_v() / 2);
  const VecC c =
      (h.array().rowwise() * h.row(ref).array().conjugate()).rowwise().mean().matrix();
  MatC out = Eigen::Map<const MatC>(c.data(), geom.n_h(), geom.n_v());
  out(geom.n_h() / 2, geom.n_v() / 2) -= snapshots.noise_variance;
  return out;
}

TpdSequences decompose(const SnapshotSet& snapshots, const ArrayGeometry& geom) {
  TpdSequences seqs;
  seqs.step1 = step1_angular_product(snapshots, geom);
  step2_decompose(seqs.step1, seqs.step2_elev, seqs.step2_azim);
  seqs.step3 = step3_center_product(snapshots, geom);
  seqs.snapshots_used = snapshots.count();
  return seqs;
}

MatC ideal_step1(const ArrayGeometry& geom, const std::vector<Scatterer>& scatterers) {
  const double kd = geom.wavenumber() * geom.spacing();
  MatC x = MatC::Zero(geom.n_h(), geom.n_v());
  for (const auto& s : scatterers)
    for (int q = 0; q < geom.n_v(); ++q)
      for (int p = 0; p < geom.n_h(); ++p)
        x(p, q) += s.power *
                   std::polar(1.0, 2.0 * kd * (geom.index_h(p) * s.u + geom.index_v(q) * s.v));
  return x;
}

MatC ideal_step3(const ArrayGeometry& geom, const std::vector<Scatterer>& scatterers) {
  const int ref = geom.flat(geom.n_h() / 2, geom.n_v() / 2);
  MatC c = MatC::Zero(geom.n_h(), geom.n_v());
  for (const auto& s : scatterers) {
    const VecC a = steering_fresnel(geom, s);
    const VecC term = a * std::conj(a(ref)) * s.power;
    c += Eigen::Map<const MatC>(term.data(), geom.n_h(), geom.n_v());
  }
  return c;
}

double estimate_noise_floor(const SnapshotSet& snapshots, const ArrayGeometry& geom,
                            int signal_rank) {
  check_nonempty(snapshots, geom);
  const int t = snapshots.count();
  if (t < 4) throw std::invalid_argument("noise floor estimation needs at least 4 snapshots");
  const int n = geom.size();
  const int sub = std::min(n, std::max(2, t / 2));
  if (signal_rank < 0 || signal_rank >= sub)
    throw std::invalid_argument("signal rank must be below the subarray size");

  // antennas nearest the array center, deterministic order
  std::vector<int> order(n);
  std::iota(order.begin(), order.end(), 0);
  const auto idx = centered_indices(geom);
  std::stable_sort(order.begin(), order.end(), [&](int a, int b) {
    const double da = std::abs(idx[a].m) + std::abs(idx[a].n);
    const double db = std::abs(idx[b].m) + std::abs(idx[b].n);
    if (da != db) return da < db;
    if (idx[a].m != idx[b].m) return idx[a].m > idx[b].m;
    return idx[a].n > idx[b].n;
  });

  MatC sub_snap(sub, t);
  for (int i = 0; i < sub; ++i) sub_snap.row(i) = snapshots.snapshots.row(order[i]);
  const MatC cov = sub_snap * sub_snap.adjoint() / double(t);
  Eigen::SelfAdjointEigenSolver<MatC> es(cov);
  return es.eigenvalues().head(sub - signal_rank).mean();
}

void dump_sequences_csv(const TpdSequences& seqs, const std::string& prefix) {
  const auto write = [&](const MatC& m, const std::string& name, bool phase) {
    std::ofstream os(prefix + name);
    for (int q = 0; q < m.cols(); ++q) {
      for (int p = 0; p < m.rows(); ++p) {
        const double val = phase ? std::arg(m(p, q)) : std::abs(m(p, q));
        os << (p ? "," : "") << val;
      }
      os << "\n";
    }
  };
  write(seqs.step1, "x_mag.csv", false);
  write(seqs.step1, "x_phase.csv", true);
  write(seqs.step2_elev, "s_mag.csv", false);
  write(seqs.step2_elev, "s_phase.csv", true);
  write(seqs.step2_azim, "t_mag.csv", false);
  write(seqs.step2_azim, "t_phase.csv", true);
  write(seqs.step3, "c_mag.csv", false);
  write(seqs.step3, "c_phase.csv", true);
}

}  // namespace nftk
