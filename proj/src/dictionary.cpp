// SPDX-License-Identifier: Apache-2.0
//
// nftk -- near-field array channel toolkit

#include "nftk/dictionary.hpp"

#include <algorithm>
#include <cmath>

namespace nftk {

std::vector<double> angle_grid(int count, int oversampling) {
  if (oversampling < 1) throw std::invalid_argument("oversampling factor must be >= 1");
  const int g = count * oversampling;
  std::vector<double> grid(g);
  for (int i = 0; i < g; ++i) grid[i] = 2.0 * i / g - 1.0 + 1.0 / g;
  return grid;
}

Dictionary build_ad_dictionary(const ArrayGeometry& geom, int oversample_h, int oversample_v) {
  Dictionary dict;
  dict.flavor = DictionaryFlavor::AngularDomain;
  dict.u_grid = angle_grid(geom.n_h(), oversample_h);
  dict.v_grid = angle_grid(geom.n_v(), oversample_v);

  const int g = static_cast<int>(dict.u_grid.size() * dict.v_grid.size());
  const double scale = 1.0 / std::sqrt(double(geom.size()));
  dict.atoms.resize(geom.size(), g);
  dict.grid.reserve(g);
  int col = 0;
  for (double u : dict.u_grid) {
    for (double v : dict.v_grid) {
      dict.atoms.col(col) = steering_planar(geom, u, v) * scale;
      dict.grid.push_back({u, v, std::numeric_limits<double>::infinity(),
                           u * u + v * v <= 1.0 + 1e-12});
      ++col;
    }
  }
  return dict;
}

PdBounds default_pd_bounds(const ArrayGeometry& geom, double beta) {
  const auto bounds = region_boundaries(geom);
  const double delta = 2.0 * geom.wavelength() * beta * beta / (bounds.aperture * bounds.aperture);
  const double inner_rings = std::ceil(1.0 / (bounds.fresnel_distance * delta));
  return {1.0 / (delta * inner_rings), 1.0 / delta};
}

int pd_distance_level_count(const ArrayGeometry& geom, double beta, double r_min, double r_max) {
  if (beta <= 0.0) throw std::invalid_argument("coherence control factor beta must be > 0");
  if (r_min <= 0.0) throw std::invalid_argument("r_min must be positive");
  if (r_max < r_min) throw std::invalid_argument("r_max must be >= r_min");
  const double aperture = region_boundaries(geom).aperture;
  const double span = 1.0 / r_min - 1.0 / r_max;
  if (span == 0.0) return 1;
  return static_cast<int>(std::ceil(
             aperture * aperture / (2.0 * geom.wavelength() * beta * beta) * span)) +
         1;
}

Dictionary build_pd_dictionary(const ArrayGeometry& geom, int oversample_h, int oversample_v,
                               double beta, double r_min, double r_max) {
  Dictionary dict;
  dict.flavor = DictionaryFlavor::PolarDomain;
  dict.coherence_control = beta;
  dict.u_grid = angle_grid(geom.n_h(), oversample_h);
  dict.v_grid = angle_grid(geom.n_v(), oversample_v);

  const double span = 1.0 / r_min - 1.0 / r_max;
  const int s = pd_distance_level_count(geom, beta, r_min, r_max);
  dict.distance_levels = s;
  dict.invr_levels.resize(s);
  for (int i = 0; i < s; ++i)
    dict.invr_levels[i] = s == 1 ? 1.0 / r_min : 1.0 / r_max + span * i / (s - 1);

  const int angle_points = static_cast<int>(dict.u_grid.size() * dict.v_grid.size());
  const int g = angle_points * (s + 1);
  const double scale = 1.0 / std::sqrt(double(geom.size()));
  dict.atoms.resize(geom.size(), g);
  dict.grid.reserve(g);
  int col = 0;
  for (double u : dict.u_grid) {
    for (double v : dict.v_grid) {
      const bool visible = u * u + v * v <= 1.0 + 1e-12;
      dict.atoms.col(col) = steering_planar(geom, u, v) * scale;  // far-field atom first
      dict.grid.push_back({u, v, std::numeric_limits<double>::infinity(), visible});
      ++col;
      for (double invr : dict.invr_levels) {
        Scatterer s_grid{u, v, 1.0 / invr, 1.0};
        dict.atoms.col(col) = steering_fresnel(geom, s_grid) * scale;
        dict.grid.push_back({u, v, 1.0 / invr, visible});
        ++col;
      }
    }
  }
  return dict;
}

double mutual_coherence(const Dictionary& dict, int block) {
  const int g = dict.atom_count();
  if (g < 2) throw std::invalid_argument("mutual coherence needs at least two atoms");
  double mu = 0.0;
  for (int i0 = 0; i0 < g; i0 += block) {
    const int bi = std::min(block, g - i0);
    for (int j0 = i0; j0 < g; j0 += block) {
      const int bj = std::min(block, g - j0);
      const MatC gram = dict.atoms.middleCols(i0, bi).adjoint() * dict.atoms.middleCols(j0, bj);
      for (int i = 0; i < bi; ++i)
        for (int j = 0; j < bj; ++j) {
          if (i0 + i >= j0 + j) continue;  // strict upper triangle only
          mu = std::max(mu, std::abs(gram(i, j)));
        }
    }
  }
  return std::min(mu, 1.0);
}

double adjacent_distance_coherence(const Dictionary& dict) {
  if (dict.flavor != DictionaryFlavor::PolarDomain)
    throw std::invalid_argument("adjacent-distance coherence is a polar-domain measure");
  // angle grid point closest to broadside
  int best_iu = 0, best_iv = 0;
  for (std::size_t i = 0; i < dict.u_grid.size(); ++i)
    if (std::abs(dict.u_grid[i]) < std::abs(dict.u_grid[best_iu])) best_iu = static_cast<int>(i);
  for (std::size_t i = 0; i < dict.v_grid.size(); ++i)
    if (std::abs(dict.v_grid[i]) < std::abs(dict.v_grid[best_iv])) best_iv = static_cast<int>(i);
  const int per_angle = dict.distance_levels + 1;
  const int base =
      (best_iu * static_cast<int>(dict.v_grid.size()) + best_iv) * per_angle;
  double coh = 0.0;
  for (int l = 0; l + 1 < per_angle; ++l)
    coh = std::max(coh, std::abs(dict.atoms.col(base + l).dot(dict.atoms.col(base + l + 1))));
  return coh;
}

}  // namespace nftk
