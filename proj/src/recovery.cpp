// SPDX-License-Identifier: Apache-2.0
//
// nftk -- near-field array channel toolkit

#include "nftk/recovery.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <numeric>

#include "nftk/assignment.hpp"

namespace nftk {

namespace {

constexpr double kScoreSentinel = -1e12;

void sort_by_power(std::vector<Estimate>& entries) {
  std::stable_sort(entries.begin(), entries.end(),
                   [](const Estimate& a, const Estimate& b) { return a.power > b.power; });
}

// Shared MMV orthogonal matching pursuit core. Columns of `observations`
// are snapshots; `atoms` has unit-norm columns. A selection that makes the
// gram matrix numerically singular is dropped and banned.
struct SompCore {
  std::vector<int> selected;
  MatC coefficients;  // k x T
  std::vector<double> residual_history;
  bool dropped_atom = false;
  bool degraded = false;
};

SompCore somp_core(const MatC& observations, const MatC& atoms, int sparsity,
                   std::vector<char> banned) {
  const int g = static_cast<int>(atoms.cols());
  const int t = static_cast<int>(observations.cols());
  if (sparsity < 1) throw std::invalid_argument("sparsity must be >= 1");
  if (sparsity > g) throw std::invalid_argument("sparsity exceeds the atom count");
  if (observations.rows() != atoms.rows())
    throw std::invalid_argument("observation length does not match atom length");
  if (banned.empty()) banned.assign(g, 0);

  const MatC proj0 = atoms.adjoint() * observations;  // G x T
  MatC corr = proj0;
  MatC cross(g, 0);  // A^H A_S
  const double y_norm2 = observations.squaredNorm();

  SompCore res;
  MatC rhs(0, t);
  int attempts = 0;
  while (static_cast<int>(res.selected.size()) < sparsity) {
    if (++attempts > sparsity + 64) {
      res.degraded = true;
      break;
    }
    int best = -1;
    double best_power = -1.0;
    for (int i = 0; i < g; ++i) {
      if (banned[i]) continue;
      const double p = corr.row(i).squaredNorm();
      if (p > best_power) {
        best_power = p;
        best = i;
      }
    }
    if (best < 0) {
      res.degraded = true;
      break;
    }
    banned[best] = 1;
    res.selected.push_back(best);
    const int k = static_cast<int>(res.selected.size());
    cross.conservativeResize(Eigen::NoChange, k);
    cross.col(k - 1) = atoms.adjoint() * atoms.col(best);
    rhs.conservativeResize(k, Eigen::NoChange);
    rhs.row(k - 1) = proj0.row(best);

    MatC gram(k, k);
    for (int i = 0; i < k; ++i)
      for (int j = 0; j < k; ++j) gram(i, j) = cross(res.selected[i], j);
    Eigen::LDLT<MatC> ldlt(gram);
    const VecD pivots = ldlt.vectorD().real();
    if (ldlt.info() != Eigen::Success ||
        pivots.minCoeff() < 1e-12 * std::max(1e-300, pivots.maxCoeff())) {
      res.selected.pop_back();
      cross.conservativeResize(Eigen::NoChange, k - 1);
      rhs.conservativeResize(k - 1, Eigen::NoChange);
      res.dropped_atom = true;
      continue;
    }
    res.coefficients = ldlt.solve(rhs);
    corr = proj0 - cross * res.coefficients;
    const double fitted = (rhs.conjugate().cwiseProduct(res.coefficients)).sum().real();
    res.residual_history.push_back(std::max(0.0, y_norm2 - fitted));
  }
  return res;
}

std::pair<int, int> dict_angle_sizes(const Dictionary& dict) {
  return {static_cast<int>(dict.u_grid.size()), static_cast<int>(dict.v_grid.size())};
}

// (iu, iv, distance level) behind a dictionary column.
std::array<int, 3> grid_coords(const Dictionary& dict, int col) {
  const auto [gu, gv] = dict_angle_sizes(dict);
  (void)gu;
  if (dict.flavor == DictionaryFlavor::AngularDomain) return {col / gv, col % gv, 0};
  const int per_angle = dict.distance_levels + 1;
  const int angle = col / per_angle;
  return {angle / gv, angle % gv, col % per_angle};
}

double median_of(std::vector<double> values) {
  std::sort(values.begin(), values.end());
  const std::size_t n = values.size();
  return n % 2 ? values[n / 2] : 0.5 * (values[n / 2 - 1] + values[n / 2]);
}

}  // namespace

OmpResult omp_detailed(const MatC& observations, const Dictionary& dict, int sparsity,
                       const OmpOptions& opts) {
  std::vector<char> banned(dict.atom_count(), 0);
  if (opts.visible_only)
    for (int i = 0; i < dict.atom_count(); ++i)
      if (!dict.grid[i].visible) banned[i] = 1;

  OmpResult res;
  SompCore core = somp_core(observations, dict.atoms, sparsity, std::move(banned));
  res.selected = core.selected;
  res.coefficients = core.coefficients;
  res.residual_history = core.residual_history;
  res.dropped_atom = core.dropped_atom;
  res.set.degraded = core.degraded || core.dropped_atom;
  res.set.search_space_size = dict.atom_count();

  const double t = static_cast<double>(observations.cols());
  const double n = static_cast<double>(observations.rows());
  for (std::size_t i = 0; i < core.selected.size(); ++i) {
    const GridPoint& gp = dict.grid[core.selected[i]];
    // coefficients are on unit-norm atoms; rescale so power ~ path power
    const double power = core.coefficients.row(i).squaredNorm() / t / n;
    res.set.entries.push_back({gp.u, gp.v, gp.r, power});
  }
  sort_by_power(res.set.entries);
  return res;
}

EstimateSet omp(const MatC& observations, const Dictionary& dict, int sparsity,
                const OmpOptions& opts) {
  return omp_detailed(observations, dict, sparsity, opts).set;
}

std::vector<MusicPeak> music_1d(const MatC& rows, const std::vector<double>& freq_grid,
                                int model_order, const Music1dOptions& opts,
                                std::vector<double>* spectrum_out) {
  const int m = static_cast<int>(rows.cols());
  const int r = static_cast<int>(rows.rows());
  if (m < 2 || r < 1) throw std::invalid_argument("need a non-trivial sequence");
  if (model_order < 1) throw std::invalid_argument("model order must be >= 1");

  const auto smoothed_cov = [&rows, m, r](int sub) {
    const int shifts = m - sub + 1;
    MatC cov = MatC::Zero(sub, sub);
    for (int i = 0; i < r; ++i)
      for (int s = 0; s < shifts; ++s) {
        const VecC x = rows.row(i).segment(s, sub).transpose();
        cov.noalias() += x * x.adjoint();
      }
    return MatC(cov / double(r * shifts));
  };

  int sub = opts.smoothing;
  if (sub < 0) {
    // auto: smooth when the plain covariance cannot carry model_order
    // sources -- too few snapshot rows, or coherent sources collapsing rank
    sub = m;
    bool deficient = r < model_order;
    if (!deficient) {
      Eigen::SelfAdjointEigenSolver<MatC> probe(smoothed_cov(m));
      const VecD ev = probe.eigenvalues();
      int rank = 0;
      for (int i = 0; i < m; ++i)
        if (ev(i) > 1e-8 * ev(m - 1)) ++rank;
      deficient = rank < model_order;
    }
    if (deficient) sub = (2 * m + 2) / 3;  // ceil(2M/3)
  }
  if (sub == 0) sub = m;
  sub = std::min(sub, m);
  if (model_order >= sub)
    throw std::invalid_argument("model order must be smaller than the subarray length");

  Eigen::SelfAdjointEigenSolver<MatC> es(smoothed_cov(sub));
  const MatC signal = es.eigenvectors().rightCols(model_order);

  const int g = static_cast<int>(freq_grid.size());
  std::vector<double> spectrum(g);
  VecC a(sub);
  const double scale = 1.0 / std::sqrt(double(sub));
  for (int i = 0; i < g; ++i) {
    for (int s = 0; s < sub; ++s) a(s) = std::polar(scale, freq_grid[i] * s);
    const double captured = (signal.adjoint() * a).squaredNorm();
    spectrum[i] = 1.0 / std::max(1.0 - captured, 1e-15);
  }

  if (spectrum_out) *spectrum_out = spectrum;
  const double floor_level = median_of(spectrum);
  std::vector<MusicPeak> peaks;
  for (int i = 0; i < g; ++i) {
    const bool has_left = opts.circular || i > 0;
    const bool has_right = opts.circular || i + 1 < g;
    const double left = has_left ? spectrum[(i - 1 + g) % g] : -1.0;
    const double right = has_right ? spectrum[(i + 1) % g] : -1.0;
    if (spectrum[i] > left && spectrum[i] > right)
      peaks.push_back({freq_grid[i], spectrum[i],
                       spectrum[i] > opts.prominence_factor * floor_level});
  }
  std::stable_sort(peaks.begin(), peaks.end(),
                   [](const MusicPeak& a, const MusicPeak& b) { return a.power > b.power; });
  if (static_cast<int>(peaks.size()) > model_order) peaks.resize(model_order);
  return peaks;
}

EstimateSet music_grid(const MatC& observations, const Dictionary& dict, int model_order,
                       bool visible_only) {
  const int n = static_cast<int>(observations.rows());
  const int t = static_cast<int>(observations.cols());
  if (observations.rows() != dict.atoms.rows())
    throw std::invalid_argument("observation length does not match atom length");
  if (model_order >= n) throw std::invalid_argument("model order must be below the array size");

  const MatC cov = observations * observations.adjoint() / double(t);
  Eigen::SelfAdjointEigenSolver<MatC> es(cov);
  const MatC signal = es.eigenvectors().rightCols(model_order);

  const int g = dict.atom_count();
  const VecD captured = (signal.adjoint() * dict.atoms).colwise().squaredNorm().transpose();
  std::vector<double> spectrum(g);
  for (int i = 0; i < g; ++i) spectrum[i] = 1.0 / std::max(1.0 - captured(i), 1e-15);

  std::vector<int> order(g);
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(),
                   [&](int a, int b) { return spectrum[a] > spectrum[b]; });

  // non-maximum suppression over grid neighbors
  std::vector<int> accepted;
  for (int col : order) {
    if (static_cast<int>(accepted.size()) >= model_order) break;
    if (visible_only && !dict.grid[col].visible) continue;
    const auto c = grid_coords(dict, col);
    bool neighbor = false;
    for (int acc : accepted) {
      const auto ca = grid_coords(dict, acc);
      if (std::abs(c[0] - ca[0]) <= 1 && std::abs(c[1] - ca[1]) <= 1 &&
          std::abs(c[2] - ca[2]) <= 1) {
        neighbor = true;
        break;
      }
    }
    if (!neighbor) accepted.push_back(col);
  }

  EstimateSet set;
  set.search_space_size = g;
  set.degraded = static_cast<int>(accepted.size()) < model_order;
  if (!accepted.empty()) {
    MatC sub(n, accepted.size());
    for (std::size_t i = 0; i < accepted.size(); ++i) sub.col(i) = dict.atoms.col(accepted[i]);
    MatC gram = sub.adjoint() * sub;
    gram.diagonal().array() += 1e-10;
    const MatC coef = Eigen::LDLT<MatC>(gram).solve(sub.adjoint() * observations);
    for (std::size_t i = 0; i < accepted.size(); ++i) {
      const GridPoint& gp = dict.grid[accepted[i]];
      set.entries.push_back({gp.u, gp.v, gp.r, coef.row(i).squaredNorm() / double(t) / double(n)});
    }
  }
  sort_by_power(set.entries);
  return set;
}

TpdGrids make_tpd_grids(const ArrayGeometry& geom, int oversample_h, int oversample_v,
                        double r_min, double r_max, int distance_levels) {
  if (r_min <= 0.0 || r_max < r_min) throw std::invalid_argument("invalid TPD distance bounds");
  if (oversample_h < 1 || oversample_v < 1)
    throw std::invalid_argument("oversampling factor must be >= 1");
  const double period = geom.wavelength() / (2.0 * geom.spacing());
  const double window = std::min(2.0, period);

  const auto axis = [&](int count, int oversample) {
    const int size = count * oversample;
    std::vector<double> grid(size);
    for (int j = 0; j < size; ++j) grid[j] = ((j + 0.5) / size - 0.5) * window;
    return grid;
  };

  TpdGrids grids;
  grids.u_grid = axis(geom.n_h(), oversample_h);
  grids.v_grid = axis(geom.n_v(), oversample_v);

  int s = distance_levels > 0 ? distance_levels : std::max(geom.n_h(), geom.n_v());
  grids.invr_grid.resize(s);
  const double span = 1.0 / r_min - 1.0 / r_max;
  for (int i = 0; i < s; ++i)
    grids.invr_grid[i] = s == 1 ? 1.0 / r_min : 1.0 / r_max + span * i / (s - 1);
  return grids;
}

std::vector<double> alias_candidates(double value, const ArrayGeometry& geom) {
  const double period = geom.wavelength() / (2.0 * geom.spacing());
  std::vector<double> out;
  const int j_lo = static_cast<int>(std::ceil((-1.0 - value) / period - 1e-12));
  const int j_hi = static_cast<int>(std::floor((1.0 - value) / period + 1e-12));
  for (int j = j_lo; j <= j_hi; ++j) out.push_back(value + j * period);
  return out;
}

namespace {

struct AxisCandidates {
  std::vector<double> values;  // strongest first, multiplicity-filled to model_order
};

AxisCandidates estimate_axis(const MatC& rows, const ArrayGeometry& geom,
                             const std::vector<double>& grid, int model_order,
                             LineSpectrumAlgorithm algorithm, double multiplicity_threshold) {
  const int m = static_cast<int>(rows.cols());
  const double kd2 = 2.0 * geom.wavenumber() * geom.spacing();

  struct Cand {
    double value;
    double power;
    bool weak;
  };
  std::vector<Cand> cands;

  if (m == 1 || grid.size() == 1) {
    // degenerate axis (ULA): the only grid point
    cands.push_back({grid.empty() ? 0.0 : grid[grid.size() / 2], 1.0, false});
  } else if (algorithm == LineSpectrumAlgorithm::Omp) {
    MatC atoms(m, grid.size());
    const double scale = 1.0 / std::sqrt(double(m));
    for (std::size_t j = 0; j < grid.size(); ++j)
      for (int i = 0; i < m; ++i)
        atoms(i, static_cast<int>(j)) = std::polar(scale, kd2 * (i - 0.5 * (m - 1)) * grid[j]);
    const int k = std::min<int>(model_order, static_cast<int>(grid.size()));
    SompCore core = somp_core(rows.transpose(), atoms, k, {});
    for (std::size_t i = 0; i < core.selected.size(); ++i)
      cands.push_back({grid[core.selected[i]], core.coefficients.row(i).squaredNorm(), false});
  } else {
    std::vector<double> freq(grid.size());
    for (std::size_t j = 0; j < grid.size(); ++j) freq[j] = kd2 * grid[j];
    Music1dOptions opts;
    const double period = geom.wavelength() / (2.0 * geom.spacing());
    opts.circular = period <= 2.0 + 1e-12;
    std::vector<double> spectrum;
    auto peaks = music_1d(rows, freq, model_order, opts, &spectrum);
    for (const auto& p : peaks) cands.push_back({p.frequency / kd2, p.power, !p.prominent});
    // merged sources leave fewer strict peaks than paths; the skirts of the
    // blobs still rise far above the floor, so take the strongest remaining
    // above-floor cells before falling back to repeats
    int strong_count = 0;
    for (const auto& c : cands) strong_count += c.weak ? 0 : 1;
    if (strong_count < model_order) {
      std::vector<double> sorted_spec = spectrum;
      std::sort(sorted_spec.begin(), sorted_spec.end());
      const double floor_level =
          opts.prominence_factor * (sorted_spec.size() % 2
                                        ? sorted_spec[sorted_spec.size() / 2]
                                        : 0.5 * (sorted_spec[sorted_spec.size() / 2 - 1] +
                                                 sorted_spec[sorted_spec.size() / 2]));
      std::vector<int> order(grid.size());
      std::iota(order.begin(), order.end(), 0);
      std::stable_sort(order.begin(), order.end(),
                       [&](int a, int b) { return spectrum[a] > spectrum[b]; });
      for (int idx : order) {
        if (strong_count >= model_order) break;
        if (spectrum[idx] <= floor_level) break;
        bool taken = false;
        for (const auto& c : cands) taken |= c.value == grid[idx];
        if (taken) continue;
        cands.push_back({grid[idx], spectrum[idx], false});
        ++strong_count;
      }
      std::stable_sort(cands.begin(), cands.end(),
                       [](const Cand& a, const Cand& b) { return a.power > b.power; });
    }
  }

  std::stable_sort(cands.begin(), cands.end(),
                   [](const Cand& a, const Cand& b) { return a.power > b.power; });

  // drop weak candidates; repeat the strong ones so shared angles keep their
  // multiplicity for the pairing stage. The relative-power cut only makes
  // sense for fitted powers; pseudo-spectrum peaks carry a prominence flag
  // instead.
  const bool power_scaled = algorithm == LineSpectrumAlgorithm::Omp;
  std::vector<double> strong;
  for (const auto& c : cands) {
    if (c.weak) continue;
    if (power_scaled && !strong.empty() &&
        c.power < multiplicity_threshold * cands.front().power)
      continue;
    strong.push_back(c.value);
  }
  if (strong.empty()) strong.push_back(grid.empty() ? 0.0 : grid[grid.size() / 2]);

  AxisCandidates out;
  for (int i = 0; i < model_order; ++i) out.values.push_back(strong[i % strong.size()]);
  return out;
}

}  // namespace

AngleSets tpd_recover_angles(const TpdSequences& seqs, const ArrayGeometry& geom,
                             const TpdGrids& grids, int model_order,
                             LineSpectrumAlgorithm algorithm, double multiplicity_threshold) {
  // rows m >= 0 of the elevation sequence (the m < 0 half duplicates them)
  std::vector<int> p_rows, q_cols;
  for (int p = 0; p < geom.n_h(); ++p)
    if (geom.index_h(p) >= 0.0) p_rows.push_back(p);
  for (int q = 0; q < geom.n_v(); ++q)
    if (geom.index_v(q) >= 0.0) q_cols.push_back(q);

  MatC elev_rows(p_rows.size(), geom.n_v());
  for (std::size_t i = 0; i < p_rows.size(); ++i) elev_rows.row(i) = seqs.step2_elev.row(p_rows[i]);
  MatC azim_rows(q_cols.size(), geom.n_h());
  for (std::size_t i = 0; i < q_cols.size(); ++i)
    azim_rows.row(i) = seqs.step2_azim.col(q_cols[i]).transpose();

  AngleSets sets;
  sets.v_hat = estimate_axis(elev_rows, geom, grids.v_grid, model_order, algorithm,
                             multiplicity_threshold)
                   .values;
  sets.u_hat = estimate_axis(azim_rows, geom, grids.u_grid, model_order, algorithm,
                             multiplicity_threshold)
                   .values;
  return sets;
}

PairedAngles pair_and_disambiguate(const std::vector<double>& u_set,
                                   const std::vector<double>& v_set, const MatC& observations,
                                   const ArrayGeometry& geom, int model_order) {
  if (u_set.empty() || v_set.empty()) throw std::invalid_argument("empty candidate set");
  // canonical order makes the output independent of candidate ordering
  std::vector<double> us(u_set), vs(v_set);
  std::sort(us.begin(), us.end());
  std::sort(vs.begin(), vs.end());

  const double t = static_cast<double>(observations.cols());
  const double scale = 1.0 / std::sqrt(double(geom.size()));
  const auto beam_power = [&](double u, double v) {
    const VecC a = steering_planar(geom, u, v) * scale;
    return (observations.adjoint() * a).squaredNorm() / t;
  };

  const int nu = static_cast<int>(us.size());
  const int nv = static_cast<int>(vs.size());
  MatD score = MatD::Constant(nu, nv, kScoreSentinel);
  MatD best_u(nu, nv), best_v(nu, nv);
  for (int i = 0; i < nu; ++i) {
    const auto u_alias = alias_candidates(us[i], geom);
    for (int j = 0; j < nv; ++j) {
      const auto v_alias = alias_candidates(vs[j], geom);
      for (double ua : u_alias)
        for (double va : v_alias) {
          if (ua * ua + va * va > 1.0 + 1e-12) continue;  // outside the visible disk
          const double s = beam_power(ua, va);
          if (s > score(i, j)) {
            score(i, j) = s;
            best_u(i, j) = ua;
            best_v(i, j) = va;
          }
        }
    }
  }

  const Assignment asg = assign_max_score(score);
  struct Scored {
    double u, v, s;
  };
  std::vector<Scored> pairs;
  for (int i = 0; i < nu; ++i) {
    const int j = asg.row_to_col[i];
    if (j < 0 || score(i, j) <= kScoreSentinel / 2) continue;
    pairs.push_back({best_u(i, j), best_v(i, j), score(i, j)});
  }
  std::stable_sort(pairs.begin(), pairs.end(),
                   [](const Scored& a, const Scored& b) { return a.s > b.s; });

  PairedAngles out;
  out.flagged = static_cast<int>(pairs.size()) < model_order;
  for (const auto& p : pairs) {
    out.pairs.emplace_back(p.u, p.v);
    out.scores.push_back(p.s);
  }
  return out;
}

namespace {

// Analytic expectation of the step-3 sequence for a unit-power scatterer at
// (u, v, 1/invr), flattened and unit-normalized. invr = 0 is the far-field atom.
VecC step3_atom(const ArrayGeometry& geom, double u, double v, double invr) {
  const int ref = geom.flat(geom.n_h() / 2, geom.n_v() / 2);
  VecC a = invr <= 0.0 ? steering_planar(geom, u, v)
                       : steering_fresnel(geom, Scatterer{u, v, 1.0 / invr, 1.0});
  a *= std::conj(a(ref));
  return a / std::sqrt(double(geom.size()));
}

}  // namespace

std::vector<DistanceEstimate> tpd_recover_distance(const MatC& step3,
                                                   const std::vector<std::pair<double, double>>& pairs,
                                                   const ArrayGeometry& geom,
                                                   const std::vector<double>& invr_grid,
                                                   double far_field_margin) {
  if (invr_grid.empty()) throw std::invalid_argument("empty distance grid");
  const int n = geom.size();
  VecC residual = Eigen::Map<const VecC>(step3.data(), n);

  const auto best_match = [&](const std::pair<double, double>& pair, const VecC& target) {
    double best_score = -1.0;
    int best_idx = -1;
    for (std::size_t i = 0; i < invr_grid.size(); ++i) {
      const double s = std::abs(step3_atom(geom, pair.first, pair.second, invr_grid[i]).dot(target));
      if (s > best_score) {
        best_score = s;
        best_idx = static_cast<int>(i);
      }
    }
    const double far_score = std::abs(step3_atom(geom, pair.first, pair.second, 0.0).dot(target));
    return std::tuple<double, int, double>(best_score, best_idx, far_score);
  };

  // successive cancellation in descending matched-filter order (ties keep
  // the original pair order)
  std::vector<double> initial(pairs.size());
  for (std::size_t i = 0; i < pairs.size(); ++i) {
    const auto [finite_score, finite_idx, far_score] = best_match(pairs[i], residual);
    (void)finite_idx;
    initial[i] = std::max(finite_score, far_score);
  }
  std::vector<int> order(pairs.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](int a, int b) { return initial[a] > initial[b]; });

  std::vector<DistanceEstimate> out(pairs.size());
  for (int idx : order) {
    const auto [finite_score, finite_idx, far_score] = best_match(pairs[idx], residual);
    DistanceEstimate est;
    const bool far_field = finite_score < far_score * (1.0 + far_field_margin);
    if (!far_field) est.r = 1.0 / invr_grid[finite_idx];
    est.mf_power = far_field ? far_score : finite_score;
    out[idx] = est;

    const VecC atom = step3_atom(geom, pairs[idx].first, pairs[idx].second,
                                 far_field ? 0.0 : invr_grid[finite_idx]);
    residual -= atom * atom.dot(residual);
  }
  return out;
}

MatC estimate_atoms(const ArrayGeometry& geom, const std::vector<Estimate>& entries) {
  MatC atoms(geom.size(), entries.size());
  for (std::size_t i = 0; i < entries.size(); ++i) {
    const auto& e = entries[i];
    atoms.col(i) = std::isinf(e.r) ? steering_planar(geom, e.u, e.v)
                                   : steering_exact(geom, Scatterer{e.u, e.v, e.r, 1.0});
  }
  return atoms;
}

namespace {

// Least-squares power refit on the physical (exact-model) atoms; duplicate
// estimates from multiplicity filling make the gram singular, hence the ridge.
void refit_powers(EstimateSet& set, const MatC& observations, const ArrayGeometry& geom) {
  if (set.entries.empty()) return;
  const MatC atoms = estimate_atoms(geom, set.entries);
  MatC gram = atoms.adjoint() * atoms;
  gram.diagonal().array() += 1e-9 * gram.diagonal().real().maxCoeff();
  const MatC coef = Eigen::LDLT<MatC>(gram).solve(atoms.adjoint() * observations);
  for (std::size_t i = 0; i < set.entries.size(); ++i)
    set.entries[i].power = coef.row(i).squaredNorm() / double(observations.cols());
  sort_by_power(set.entries);
}

}  // namespace

EstimateSet tpd_estimate(const SnapshotSet& snapshots, const ArrayGeometry& geom, int model_order,
                         const TpdOptions& opts) {
  const TpdGrids grids = make_tpd_grids(geom, opts.oversample_h, opts.oversample_v, opts.r_min,
                                        opts.r_max, opts.distance_levels);
  const TpdSequences seqs = decompose(snapshots, geom);
  const AngleSets sets = tpd_recover_angles(seqs, geom, grids, model_order, opts.algorithm,
                                            opts.multiplicity_threshold);
  const PairedAngles paired =
      pair_and_disambiguate(sets.u_hat, sets.v_hat, snapshots.snapshots, geom, model_order);
  const auto distances =
      tpd_recover_distance(seqs.step3, paired.pairs, geom, grids.invr_grid, opts.far_field_margin);

  EstimateSet set;
  set.search_space_size = static_cast<long>(grids.u_grid.size() + grids.v_grid.size() +
                                            grids.invr_grid.size());
  set.degraded = paired.flagged;
  for (std::size_t i = 0; i < paired.pairs.size(); ++i)
    set.entries.push_back(
        {paired.pairs[i].first, paired.pairs[i].second, distances[i].r, distances[i].mf_power});
  refit_powers(set, snapshots.snapshots, geom);
  return set;
}

namespace {

double projection_energy(const MatC& atoms, const MatC& observations) {
  if (atoms.cols() == 0) return 0.0;
  MatC gram = atoms.adjoint() * atoms;
  gram.diagonal().array() += 1e-12 * std::max(1.0, gram.diagonal().real().maxCoeff());
  const MatC rhs = atoms.adjoint() * observations;
  const MatC coef = Eigen::LDLT<MatC>(gram).solve(rhs);
  return (rhs.conjugate().cwiseProduct(coef)).sum().real();
}

double golden_section_max(double lo, double hi, const std::function<double(double)>& f) {
  const double phi = 0.5 * (std::sqrt(5.0) - 1.0);
  double a = lo, b = hi;
  double x1 = b - phi * (b - a), x2 = a + phi * (b - a);
  double f1 = f(x1), f2 = f(x2);
  for (int it = 0; it < 40; ++it) {
    if (f1 < f2) {
      a = x1;
      x1 = x2;
      f1 = f2;
      x2 = a + phi * (b - a);
      f2 = f(x2);
    } else {
      b = x2;
      x2 = x1;
      f2 = f1;
      x1 = b - phi * (b - a);
      f1 = f(x1);
    }
  }
  return f1 > f2 ? x1 : x2;
}

}  // namespace

EstimateSet refine_offgrid(const EstimateSet& estimates, const MatC& observations,
                           const ArrayGeometry& geom, const RefineOptions& opts) {
  EstimateSet out = estimates;
  if (out.entries.empty()) return out;

  const auto objective = [&](const std::vector<Estimate>& entries) {
    return projection_energy(estimate_atoms(geom, entries), observations);
  };

  double current = objective(out.entries);
  for (int cycle = 0; cycle < opts.max_cycles; ++cycle) {
    const double cycle_start = current;
    for (std::size_t i = 0; i < out.entries.size(); ++i) {
      for (int axis = 0; axis < 3; ++axis) {
        const double cell = axis == 0 ? opts.cell_u : axis == 1 ? opts.cell_v : opts.cell_invr;
        if (cell <= 0.0) continue;
        Estimate& e = out.entries[i];
        double x0, lo, hi;
        if (axis == 0) {
          const double bound = std::sqrt(std::max(0.0, 1.0 - e.v * e.v));
          x0 = e.u;
          lo = std::max(e.u - cell, -bound);
          hi = std::min(e.u + cell, bound);
        } else if (axis == 1) {
          const double bound = std::sqrt(std::max(0.0, 1.0 - e.u * e.u));
          x0 = e.v;
          lo = std::max(e.v - cell, -bound);
          hi = std::min(e.v + cell, bound);
        } else {
          x0 = std::isinf(e.r) ? 0.0 : 1.0 / e.r;
          lo = std::max(0.0, x0 - cell);
          hi = x0 + cell;
        }
        if (hi <= lo) continue;
        const auto eval = [&](double x) {
          std::vector<Estimate> trial = out.entries;
          if (axis == 0)
            trial[i].u = x;
          else if (axis == 1)
            trial[i].v = x;
          else
            trial[i].r = x > 1e-12 ? 1.0 / x : std::numeric_limits<double>::infinity();
          return objective(trial);
        };
        const double best_x = golden_section_max(lo, hi, eval);
        const double best_val = eval(best_x);
        if (best_val > current * (1.0 + 1e-14) + 1e-300) {
          if (axis == 0)
            e.u = best_x;
          else if (axis == 1)
            e.v = best_x;
          else
            e.r = best_x > 1e-12 ? 1.0 / best_x : std::numeric_limits<double>::infinity();
          current = best_val;
        }
        (void)x0;
      }
    }
    if (current - cycle_start < opts.tolerance * std::max(cycle_start, 1e-300)) break;
  }
  refit_powers(out, observations, geom);
  return out;
}

const std::map<std::string, Solver>& method_registry() {
  static const std::map<std::string, Solver> registry = [] {
    std::map<std::string, Solver> reg;

    const auto need = [](const void* ptr, const char* what) {
      if (!ptr) throw std::invalid_argument(std::string("method context is missing ") + what);
    };

    const auto maybe_refine = [](EstimateSet set, const SnapshotSet& snaps,
                                 const MethodContext& ctx, double cell_u, double cell_v,
                                 double cell_invr) {
      if (!ctx.refine) return set;
      RefineOptions opts;
      opts.cell_u = cell_u;
      opts.cell_v = cell_v;
      opts.cell_invr = cell_invr;
      opts.max_cycles = ctx.refine_max_cycles;
      return refine_offgrid(set, snaps.snapshots, *ctx.geom, opts);
    };

    const auto dict_cells = [](const Dictionary& dict) {
      const double cu = 2.0 / double(dict.u_grid.size());
      const double cv = 2.0 / double(dict.v_grid.size());
      double cr = 0.0;
      if (dict.invr_levels.size() > 1) cr = dict.invr_levels[1] - dict.invr_levels[0];
      return std::array<double, 3>{cu, cv, cr};
    };

    reg["AD-OMP"] = [=](const SnapshotSet& snaps, const MethodContext& ctx) {
      need(ctx.ad, "the AD dictionary");
      EstimateSet set = omp(snaps.snapshots, *ctx.ad, ctx.model_order);
      set.method_tag = "AD-OMP";
      const auto c = dict_cells(*ctx.ad);
      return maybe_refine(std::move(set), snaps, ctx, c[0], c[1], 0.0);
    };
    reg["PD-OMP"] = [=](const SnapshotSet& snaps, const MethodContext& ctx) {
      need(ctx.pd, "the PD dictionary");
      EstimateSet set = omp(snaps.snapshots, *ctx.pd, ctx.model_order);
      set.method_tag = "PD-OMP";
      const auto c = dict_cells(*ctx.pd);
      return maybe_refine(std::move(set), snaps, ctx, c[0], c[1], c[2]);
    };
    reg["AD-MUSIC"] = [=](const SnapshotSet& snaps, const MethodContext& ctx) {
      need(ctx.ad, "the AD dictionary");
      EstimateSet set = music_grid(snaps.snapshots, *ctx.ad, ctx.model_order);
      set.method_tag = "AD-MUSIC";
      const auto c = dict_cells(*ctx.ad);
      return maybe_refine(std::move(set), snaps, ctx, c[0], c[1], 0.0);
    };
    reg["PD-MUSIC"] = [=](const SnapshotSet& snaps, const MethodContext& ctx) {
      need(ctx.pd, "the PD dictionary");
      EstimateSet set = music_grid(snaps.snapshots, *ctx.pd, ctx.model_order);
      set.method_tag = "PD-MUSIC";
      const auto c = dict_cells(*ctx.pd);
      return maybe_refine(std::move(set), snaps, ctx, c[0], c[1], c[2]);
    };
    reg["TPD-OMP"] = [=](const SnapshotSet& snaps, const MethodContext& ctx) {
      TpdOptions opts = ctx.tpd;
      opts.algorithm = LineSpectrumAlgorithm::Omp;
      EstimateSet set = tpd_estimate(snaps, *ctx.geom, ctx.model_order, opts);
      set.method_tag = "TPD-OMP";
      const TpdGrids grids = make_tpd_grids(*ctx.geom, opts.oversample_h, opts.oversample_v,
                                            opts.r_min, opts.r_max, opts.distance_levels);
      const double cu = grids.u_grid.size() > 1 ? grids.u_grid[1] - grids.u_grid[0] : 0.0;
      const double cv = grids.v_grid.size() > 1 ? grids.v_grid[1] - grids.v_grid[0] : 0.0;
      const double cr = grids.invr_grid.size() > 1 ? grids.invr_grid[1] - grids.invr_grid[0] : 0.0;
      return maybe_refine(std::move(set), snaps, ctx, cu, cv, cr);
    };
    reg["TPD-MUSIC"] = [=](const SnapshotSet& snaps, const MethodContext& ctx) {
      TpdOptions opts = ctx.tpd;
      opts.algorithm = LineSpectrumAlgorithm::Music;
      EstimateSet set = tpd_estimate(snaps, *ctx.geom, ctx.model_order, opts);
      set.method_tag = "TPD-MUSIC";
      const TpdGrids grids = make_tpd_grids(*ctx.geom, opts.oversample_h, opts.oversample_v,
                                            opts.r_min, opts.r_max, opts.distance_levels);
      const double cu = grids.u_grid.size() > 1 ? grids.u_grid[1] - grids.u_grid[0] : 0.0;
      const double cv = grids.v_grid.size() > 1 ? grids.v_grid[1] - grids.v_grid[0] : 0.0;
      const double cr = grids.invr_grid.size() > 1 ? grids.invr_grid[1] - grids.invr_grid[0] : 0.0;
      return maybe_refine(std::move(set), snaps, ctx, cu, cv, cr);
    };
    return reg;
  }();
  return registry;
}

}  // namespace nftk
