// SPDX-License-Identifier: Apache-2.0
//
// nftk -- near-field array channel toolkit

#include "nftk/channel.hpp"

#include <cmath>
#include <istream>
#include <limits>
#include <ostream>
#include <sstream>

namespace nftk {

namespace {

using Vec3 = std::array<double, 3>;

Vec3 cross(const Vec3& a, const Vec3& b) {
  return {a[1] * b[2] - a[2] * b[1], a[2] * b[0] - a[0] * b[2], a[0] * b[1] - a[1] * b[0]};
}

double norm(const Vec3& a) { return std::sqrt(a[0] * a[0] + a[1] * a[1] + a[2] * a[2]); }

Vec3 normalized(const Vec3& a) {
  const double n = norm(a);
  return {a[0] / n, a[1] / n, a[2] / n};
}

/// One vMF draw on the unit sphere via the inverse-CDF tangent-normal
/// construction: cos(theta) has CDF ~ exp(kappa t), the tangent azimuth is
/// uniform. Stable for kappa up to ~1e12.
Vec3 sample_vmf(const Vec3& mu, double kappa, Rng& rng) {
  const double uu = rng.uniform_pos();
  // t = 1 + log(u + (1-u) e^{-2 kappa}) / kappa, written to avoid overflow
  const double t = 1.0 + std::log1p(-(1.0 - uu) * (1.0 - std::exp(-2.0 * kappa))) / kappa;
  const double phi = 2.0 * kPi * rng.uniform();
  const double sint = std::sqrt(std::max(0.0, 1.0 - t * t));

  // orthonormal tangent basis at mu
  Vec3 helper = std::abs(mu[2]) < 0.9 ? Vec3{0.0, 0.0, 1.0} : Vec3{1.0, 0.0, 0.0};
  const Vec3 e1 = normalized(cross(helper, mu));
  const Vec3 e2 = cross(mu, e1);

  return {t * mu[0] + sint * (std::cos(phi) * e1[0] + std::sin(phi) * e2[0]),
          t * mu[1] + sint * (std::cos(phi) * e1[1] + std::sin(phi) * e2[1]),
          t * mu[2] + sint * (std::cos(phi) * e1[2] + std::sin(phi) * e2[2])};
}

}  // namespace

double Scatterer::w() const { return std::sqrt(std::max(0.0, 1.0 - u * u - v * v)); }

std::vector<Scatterer> sample_clusters(const std::vector<ClusterSpec>& specs,
                                       std::uint64_t rng_seed) {
  if (specs.empty()) throw std::invalid_argument("no cluster specs given");
  Rng rng(rng_seed);
  std::vector<Scatterer> out;
  for (const auto& spec : specs) {
    if (spec.concentration <= 0.0) throw std::invalid_argument("vMF concentration must be > 0");
    if (spec.scatterers_per_cluster < 1)
      throw std::invalid_argument("scatterers_per_cluster must be >= 1");
    if (spec.r_min <= 0.0 || spec.r_max < spec.r_min)
      throw std::invalid_argument("cluster distance interval invalid");
    const double nrm = norm(spec.center_direction);
    if (std::abs(nrm - 1.0) > 1e-6)
      throw std::invalid_argument("cluster center direction must be a unit vector");

    const double cluster_r = spec.r_min == spec.r_max ? spec.r_min
                                                      : rng.uniform(spec.r_min, spec.r_max);
    for (int i = 0; i < spec.scatterers_per_cluster; ++i) {
      Vec3 dir{};
      int attempts = 0;
      do {  // reject directions behind the array (w <= 0)
        dir = sample_vmf(spec.center_direction, spec.concentration, rng);
        if (++attempts > 10000)
          throw std::runtime_error("cluster direction sampling failed to reach the front halfspace");
      } while (dir[2] <= 0.0);
      Scatterer s;
      s.u = dir[0];
      s.v = dir[1];
      s.r = cluster_r;
      if (spec.distance_jitter > 0.0)
        s.r = std::max(1e-6, s.r + rng.uniform(-spec.distance_jitter, spec.distance_jitter));
      s.power = 1.0;
      out.push_back(s);
    }
  }
  for (auto& s : out) s.power /= double(out.size());  // total power = 1
  return out;
}

VecC steering_exact(const ArrayGeometry& geom, const Scatterer& s) {
  if (s.r <= 0.0) throw std::invalid_argument("scatterer distance must be positive");
  const double k = geom.wavenumber();
  const double d = geom.spacing();
  VecC a(geom.size());
  for (int q = 0; q < geom.n_v(); ++q) {
    const double py = geom.index_v(q) * d;
    for (int p = 0; p < geom.n_h(); ++p) {
      const double px = geom.index_h(p) * d;
      // path - r evaluated as (path^2 - r^2) / (path + r); the direct
      // difference loses all precision once r dwarfs the aperture
      const double radial = s.u * px + s.v * py;       // s_hat . p
      const double p2 = px * px + py * py;             // |p|^2
      const double path = std::sqrt(std::max(0.0, s.r * s.r - 2.0 * s.r * radial + p2));
      const double delta = (p2 - 2.0 * s.r * radial) / (path + s.r);
      a(geom.flat(p, q)) = std::polar(1.0, -k * delta);
    }
  }
  return a;
}

double fresnel_quadratic_term(const ArrayGeometry& geom, const Scatterer& s, double m, double n) {
  const double d = geom.spacing();
  const double lin = m * d * s.u + n * d * s.v;
  return ((m * d) * (m * d) + (n * d) * (n * d) - lin * lin) / (2.0 * s.r);
}

VecC steering_fresnel(const ArrayGeometry& geom, const Scatterer& s) {
  if (s.r <= 0.0) throw std::invalid_argument("scatterer distance must be positive");
  const double k = geom.wavenumber();
  const double d = geom.spacing();
  VecC a(geom.size());
  for (int q = 0; q < geom.n_v(); ++q) {
    const double n = geom.index_v(q);
    for (int p = 0; p < geom.n_h(); ++p) {
      const double m = geom.index_h(p);
      const double lin = m * d * s.u + n * d * s.v;
      a(geom.flat(p, q)) = std::polar(1.0, -k * (-lin + fresnel_quadratic_term(geom, s, m, n)));
    }
  }
  return a;
}

VecC steering(const ArrayGeometry& geom, const Scatterer& s, WaveModel model) {
  return model == WaveModel::ExactSpherical ? steering_exact(geom, s) : steering_fresnel(geom, s);
}

VecC steering_planar(const ArrayGeometry& geom, double u, double v) {
  const double kd = geom.wavenumber() * geom.spacing();
  VecC a(geom.size());
  for (int q = 0; q < geom.n_v(); ++q)
    for (int p = 0; p < geom.n_h(); ++p)
      a(geom.flat(p, q)) = std::polar(1.0, kd * (geom.index_h(p) * u + geom.index_v(q) * v));
  return a;
}

MatC draw_gains(const std::vector<double>& powers, int snapshots, Rng& rng) {
  MatC g(powers.size(), snapshots);
  for (int t = 0; t < snapshots; ++t)
    for (std::size_t l = 0; l < powers.size(); ++l) g(l, t) = rng.complex_normal(powers[l]);
  return g;
}

SnapshotSet synthesize_snapshots(const ArrayGeometry& geom, const std::vector<Scatterer>& scatterers,
                                 int snapshots, double snr_db, WaveModel model,
                                 std::uint64_t rng_seed, GainModel gains) {
  if (scatterers.empty()) throw std::invalid_argument("no scatterers given");
  if (snapshots < 1) throw std::invalid_argument("snapshot count must be >= 1");

  MatC steer(geom.size(), scatterers.size());
  std::vector<double> powers;
  double total_power = 0.0;
  for (std::size_t l = 0; l < scatterers.size(); ++l) {
    steer.col(l) = steering(geom, scatterers[l], model);
    powers.push_back(scatterers[l].power);
    total_power += scatterers[l].power;
  }

  Rng rng(rng_seed);
  MatC g = gains == GainModel::Random ? draw_gains(powers, snapshots, rng)
                                      : MatC::Ones(scatterers.size(), snapshots);

  SnapshotSet set;
  set.snr_db = snr_db;
  set.model = model;
  set.noise_variance = std::isinf(snr_db) ? 0.0 : total_power * db_to_linear(-snr_db);
  set.snapshots = steer * g;
  if (set.noise_variance > 0.0) {
    for (int t = 0; t < snapshots; ++t)
      for (int i = 0; i < geom.size(); ++i)
        set.snapshots(i, t) += rng.complex_normal(set.noise_variance);
  }
  return set;
}

void save_truth_table(std::ostream& os, const std::vector<Scatterer>& scatterers) {
  os << "# u v r power\n";
  char buf[160];
  for (const auto& s : scatterers) {
    std::snprintf(buf, sizeof buf, "%.17g %.17g %.17g %.17g\n", s.u, s.v, s.r, s.power);
    os << buf;
  }
}

std::vector<Scatterer> load_truth_table(std::istream& is) {
  std::vector<Scatterer> out;
  std::string line;
  while (std::getline(is, line)) {
    if (line.empty() || line[0] == '#') continue;
    std::istringstream ls(line);
    Scatterer s;
    if (!(ls >> s.u >> s.v >> s.r >> s.power))
      throw std::runtime_error("malformed truth table row: " + line);
    out.push_back(s);
  }
  return out;
}

}  // namespace nftk
