// SPDX-License-Identifier: Apache-2.0
//
// nftk -- near-field array channel toolkit

#include "nftk/evaluation.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <numeric>
#include <sstream>

#include "nftk/assignment.hpp"
#include "nftk/dictionary.hpp"
#include "nftk/svg.hpp"

namespace nftk {

MatchResult match_estimates(const std::vector<Scatterer>& truth, const EstimateSet& estimates,
                            double r_min) {
  if (estimates.entries.empty()) throw std::invalid_argument("empty estimate set");
  const int nt = static_cast<int>(truth.size());
  const int ne = static_cast<int>(estimates.entries.size());
  MatD cost(nt, ne);
  for (int i = 0; i < nt; ++i)
    for (int j = 0; j < ne; ++j) {
      const auto& e = estimates.entries[j];
      const double du = e.u - truth[i].u;
      const double dv = e.v - truth[i].v;
      const double e_invr = std::isinf(e.r) ? 0.0 : 1.0 / e.r;
      const double dr = (e_invr - 1.0 / truth[i].r) * r_min;
      cost(i, j) = du * du + dv * dv + dr * dr;
    }
  const Assignment asg = assign_min_cost(cost);
  MatchResult out;
  out.truth_to_estimate = asg.row_to_col;
  out.total_cost = asg.total;
  return out;
}

NmseReport nmse(const std::vector<Scatterer>& truth, const EstimateSet& estimates,
                const MatchResult& match, const ArrayGeometry& geom, const MatC& true_channel,
                double r_min, double r_max) {
  NmseReport rep;
  const double range_u2 = 4.0;  // u, v span [-1, 1]
  const double range_invr2 = 1.0 / (r_min * r_min);
  const double range_r = r_max > r_min ? r_max - r_min : r_max;

  double num_u = 0.0, num_v = 0.0, num_invr = 0.0, num_r = 0.0;
  double den_u = 0.0, den_v = 0.0, den_invr = 0.0, den_r = 0.0;
  for (std::size_t i = 0; i < truth.size(); ++i) {
    const int j = i < match.truth_to_estimate.size() ? match.truth_to_estimate[i] : -1;
    den_u += truth[i].u * truth[i].u;
    den_v += truth[i].v * truth[i].v;
    den_invr += 1.0 / (truth[i].r * truth[i].r);
    den_r += truth[i].r * truth[i].r;
    if (j < 0) {
      ++rep.misses;
      num_u += range_u2;
      num_v += range_u2;
      num_invr += range_invr2;
      num_r += range_r * range_r;
      continue;
    }
    const auto& e = estimates.entries[j];
    num_u += (e.u - truth[i].u) * (e.u - truth[i].u);
    num_v += (e.v - truth[i].v) * (e.v - truth[i].v);
    const double e_invr = std::isinf(e.r) ? 0.0 : 1.0 / e.r;
    num_invr += (e_invr - 1.0 / truth[i].r) * (e_invr - 1.0 / truth[i].r);
    const double dr = std::isinf(e.r) ? range_r : std::min(std::abs(e.r - truth[i].r), range_r);
    num_r += dr * dr;
  }
  const double count = std::max<std::size_t>(truth.size(), 1);
  const auto finish = [&](double num, double den, bool& absolute) {
    if (den > 0.0) return num / den;
    absolute = true;  // all-zero truth vector: report the absolute MSE
    return num / count;
  };
  rep.u = finish(num_u, den_u, rep.u_absolute);
  rep.v = finish(num_v, den_v, rep.v_absolute);
  rep.invr = finish(num_invr, den_invr, rep.invr_absolute);
  rep.r = finish(num_r, den_r, rep.r_absolute);

  const double h_norm2 = true_channel.squaredNorm();
  if (estimates.entries.empty() || h_norm2 == 0.0) {
    rep.channel = h_norm2 == 0.0 ? 0.0 : 1.0;
    return rep;
  }
  const MatC atoms = estimate_atoms(geom, estimates.entries);
  MatC gram = atoms.adjoint() * atoms;
  gram.diagonal().array() += 1e-9 * std::max(1.0, gram.diagonal().real().maxCoeff());
  const MatC coef = Eigen::LDLT<MatC>(gram).solve(atoms.adjoint() * true_channel);
  rep.channel = (true_channel - atoms * coef).squaredNorm() / h_norm2;
  return rep;
}

const std::vector<std::string>& sweep_metrics() {
  static const std::vector<std::string> metrics = {"nmse_u",  "nmse_v",       "nmse_invr",
                                                   "nmse_r",  "channel_nmse", "search_space"};
  return metrics;
}

namespace {

double metric_value(const TrialRecord& rec, const std::string& name) {
  if (name == "nmse_u") return rec.report.u;
  if (name == "nmse_v") return rec.report.v;
  if (name == "nmse_invr") return rec.report.invr;
  if (name == "nmse_r") return rec.report.r;
  if (name == "channel_nmse") return rec.report.channel;
  if (name == "search_space") return static_cast<double>(rec.search_space_size);
  throw std::invalid_argument("unknown metric " + name);
}

std::pair<int, int> parse_scenario_id(const std::string& id) {
  int point = 0, trial = 0;
  if (std::sscanf(id.c_str(), "%d:%d", &point, &trial) != 2)
    throw std::invalid_argument("unparseable scenario id " + id);
  return {point, trial};
}

Config apply_sweep_value(const Config& cfg, double value) {
  Config out = cfg;
  if (cfg.sweep_variable == "concentration") {
    out.concentration = value;
  } else if (cfg.sweep_variable == "distance") {
    out.r_min = out.r_max = value;
  } else {
    out.snr_db = value;
  }
  return out;
}

std::vector<ClusterSpec> make_cluster_specs(const Config& cfg, Rng& rng) {
  std::vector<ClusterSpec> specs;
  const double cos_cone = std::cos(cfg.center_cone_deg * kPi / 180.0);
  for (int c = 0; c < cfg.clusters; ++c) {
    const double w = rng.uniform(cos_cone, 1.0);
    const double phi = 2.0 * kPi * rng.uniform();
    const double sin_theta = std::sqrt(std::max(0.0, 1.0 - w * w));
    ClusterSpec spec;
    spec.center_direction = {sin_theta * std::cos(phi), sin_theta * std::sin(phi), w};
    spec.concentration = cfg.concentration;
    spec.scatterers_per_cluster = cfg.scatterers_per_cluster;
    spec.r_min = cfg.r_min;
    spec.r_max = cfg.r_max;
    spec.distance_jitter = cfg.distance_jitter;
    specs.push_back(spec);
  }
  return specs;
}

std::string format_double(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.12g", v);
  return buf;
}

}  // namespace

std::vector<SweepPointAggregate> aggregate_records(const Config& cfg,
                                                   const std::vector<TrialRecord>& records) {
  // canonical (point, method, trial) order so aggregation is independent of
  // the execution/record order
  std::vector<const TrialRecord*> sorted;
  sorted.reserve(records.size());
  for (const auto& r : records) sorted.push_back(&r);
  std::stable_sort(sorted.begin(), sorted.end(), [&](const TrialRecord* a, const TrialRecord* b) {
    const auto [pa, ta] = parse_scenario_id(a->scenario_id);
    const auto [pb, tb] = parse_scenario_id(b->scenario_id);
    if (pa != pb) return pa < pb;
    if (a->method_tag != b->method_tag) return a->method_tag < b->method_tag;
    return ta < tb;
  });

  std::vector<SweepPointAggregate> out;
  for (std::size_t pi = 0; pi < cfg.sweep_values.size(); ++pi) {
    for (const auto& method : cfg.methods) {
      SweepPointAggregate agg;
      agg.value = cfg.sweep_values[pi];
      agg.method = method;
      for (const auto& metric : sweep_metrics()) {
        double sum = 0.0;
        std::vector<double> values;
        for (const TrialRecord* rec : sorted) {
          if (rec->method_tag != method) continue;
          if (parse_scenario_id(rec->scenario_id).first != static_cast<int>(pi)) continue;
          values.push_back(metric_value(*rec, metric));
          sum += values.back();
        }
        if (values.empty()) continue;
        const double mean = sum / double(values.size());
        double var = 0.0;
        for (double x : values) var += (x - mean) * (x - mean);
        const double stderr_mean =
            values.size() > 1 ? std::sqrt(var / double(values.size() - 1) / double(values.size()))
                              : 0.0;
        agg.metrics[metric] = {mean, stderr_mean};
      }
      out.push_back(std::move(agg));
    }
  }
  return out;
}

std::string sweep_csv(const Config& cfg, const std::vector<SweepPointAggregate>& aggregates) {
  std::ostringstream os;
  os << "sweep_var,value,method,metric,mean,stderr,trials\n";
  for (const auto& agg : aggregates) {
    for (const auto& metric : sweep_metrics()) {
      const auto it = agg.metrics.find(metric);
      if (it == agg.metrics.end()) continue;
      os << cfg.sweep_variable << "," << format_double(agg.value) << "," << agg.method << ","
         << metric << "," << format_double(it->second.first) << ","
         << format_double(it->second.second) << "," << cfg.trials << "\n";
    }
  }
  return os.str();
}

SweepResult run_sweep(const Config& cfg) {
  if (!cfg.master_seed) throw config_error("sweep.master_seed is mandatory");
  if (cfg.sweep_values.empty()) throw config_error("sweep.values must not be empty");
  if (cfg.methods.empty()) throw config_error("sweep.methods must not be empty");
  const auto& registry = method_registry();
  for (const auto& tag : cfg.methods)
    if (!registry.count(tag)) throw config_error("unknown method tag: " + tag);

  const ArrayGeometry geom = cfg.geometry();
  const WaveModel model = cfg.model == "exact" ? WaveModel::ExactSpherical : WaveModel::Fresnel;

  bool need_ad = false, need_pd = false;
  for (const auto& tag : cfg.methods) {
    need_ad |= tag.rfind("AD-", 0) == 0;
    need_pd |= tag.rfind("PD-", 0) == 0;
  }
  const PdBounds pd_defaults = default_pd_bounds(geom, cfg.pd_beta);
  const double pd_r_min = cfg.pd_r_min.value_or(pd_defaults.r_min);
  const double pd_r_max = cfg.pd_r_max.value_or(pd_defaults.r_max);

  Dictionary ad, pd;
  if (need_ad) ad = build_ad_dictionary(geom, cfg.ad_oversample_h, cfg.ad_oversample_v);
  // the PD angle grid stays at the plain (O=1) AD grid so baselines compare
  // atom models, not grid densities
  if (need_pd) pd = build_pd_dictionary(geom, 1, 1, cfg.pd_beta, pd_r_min, pd_r_max);

  MethodContext ctx;
  ctx.geom = &geom;
  ctx.ad = need_ad ? &ad : nullptr;
  ctx.pd = need_pd ? &pd : nullptr;
  ctx.model_order = cfg.effective_model_order();
  ctx.refine = cfg.refine;
  ctx.tpd.oversample_h = 1;
  ctx.tpd.oversample_v = 1;
  ctx.tpd.r_min = cfg.tpd_r_min.value_or(pd_r_min);
  ctx.tpd.r_max = cfg.tpd_r_max.value_or(pd_r_max);
  ctx.tpd.distance_levels = cfg.tpd_distance_levels;

  SweepResult result;
  for (std::size_t pi = 0; pi < cfg.sweep_values.size(); ++pi) {
    const Config point_cfg = apply_sweep_value(cfg, cfg.sweep_values[pi]);
    for (int trial = 0; trial < cfg.trials; ++trial) {
      const std::uint64_t trial_seed = derive_seed(*cfg.master_seed, pi, trial);
      Rng center_rng(derive_seed(trial_seed, 101));
      const auto specs = make_cluster_specs(point_cfg, center_rng);
      const auto truth = sample_clusters(specs, derive_seed(trial_seed, 102));
      const std::uint64_t synth_seed = derive_seed(trial_seed, 103);
      const SnapshotSet snaps = synthesize_snapshots(geom, truth, point_cfg.snapshots,
                                                     point_cfg.snr_db, model, synth_seed);
      // same seed, noise disabled: identical gains, noise-free channel
      const MatC true_channel =
          synthesize_snapshots(geom, truth, point_cfg.snapshots,
                               std::numeric_limits<double>::infinity(), model, synth_seed)
              .snapshots;

      for (const auto& tag : cfg.methods) {
        const auto t0 = std::chrono::steady_clock::now();
        EstimateSet est = registry.at(tag)(snaps, ctx);
        const auto t1 = std::chrono::steady_clock::now();

        TrialRecord rec;
        rec.scenario_id = std::to_string(pi) + ":" + std::to_string(trial);
        rec.seed = trial_seed;
        rec.method_tag = tag;
        rec.search_space_size = est.search_space_size;
        rec.wall_ms = std::chrono::duration<double, std::milli>(t1 - t0).count();
        const MatchResult match = match_estimates(truth, est, point_cfg.r_min);
        rec.report = nmse(truth, est, match, geom, true_channel, point_cfg.r_min,
                          point_cfg.r_max);
        result.records.push_back(std::move(rec));
      }
    }
  }

  result.aggregates = aggregate_records(cfg, result.records);
  result.csv_text = sweep_csv(cfg, result.aggregates);

  if (!cfg.csv_path.empty() && cfg.csv_path != "-") {
    const std::filesystem::path csv_path(cfg.csv_path);
    if (csv_path.has_parent_path()) std::filesystem::create_directories(csv_path.parent_path());
    std::ofstream os(csv_path, std::ios::binary);
    if (!os) throw std::runtime_error("cannot write CSV to " + cfg.csv_path);
    os << result.csv_text;

    if (cfg.svg_dir != "-") {
      const std::filesystem::path svg_dir =
          cfg.svg_dir.empty() ? (csv_path.has_parent_path() ? csv_path.parent_path()
                                                            : std::filesystem::path("."))
                              : std::filesystem::path(cfg.svg_dir);
      std::filesystem::create_directories(svg_dir);
      for (const auto& metric : sweep_metrics()) {
        std::vector<SvgSeries> series;
        for (const auto& method : cfg.methods) {
          SvgSeries s;
          s.label = method;
          for (const auto& agg : result.aggregates) {
            if (agg.method != method) continue;
            const auto it = agg.metrics.find(metric);
            if (it == agg.metrics.end()) continue;
            s.x.push_back(agg.value);
            const bool db_scale = metric != "search_space";
            s.y.push_back(db_scale ? linear_to_db(std::max(it->second.first, 1e-30))
                                   : it->second.first);
          }
          series.push_back(std::move(s));
        }
        std::ofstream svg(svg_dir / (metric + ".svg"));
        const bool db_scale = metric != "search_space";
        write_svg_lineplot(svg, metric + " vs " + cfg.sweep_variable, cfg.sweep_variable,
                           db_scale ? metric + " (dB)" : metric, series);
      }
    }
  }
  return result;
}

ComplexityReport complexity_report(int n_h, int n_v, int oversample_h, int oversample_v,
                                   int pd_levels, int tpd_levels) {
  ComplexityReport rep;
  rep.ad = static_cast<long>(oversample_h) * n_h * oversample_v * n_v;
  rep.pd = rep.ad * (pd_levels + 1);
  rep.tpd = static_cast<long>(oversample_h) * n_h + static_cast<long>(oversample_v) * n_v +
            tpd_levels;
  rep.ordering_holds = rep.tpd < rep.ad && rep.ad < rep.pd;
  return rep;
}

double spearman_rho(const std::vector<double>& a, const std::vector<double>& b) {
  if (a.size() != b.size() || a.size() < 2)
    throw std::invalid_argument("spearman_rho needs two equal-length series");
  const auto ranks = [](const std::vector<double>& x) {
    const int n = static_cast<int>(x.size());
    std::vector<int> order(n);
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(), [&](int i, int j) { return x[i] < x[j]; });
    std::vector<double> rank(n);
    int i = 0;
    while (i < n) {
      int j = i;
      while (j + 1 < n && x[order[j + 1]] == x[order[i]]) ++j;
      const double avg = 0.5 * (i + j) + 1.0;  // average rank for ties
      for (int k = i; k <= j; ++k) rank[order[k]] = avg;
      i = j + 1;
    }
    return rank;
  };
  const auto ra = ranks(a), rb = ranks(b);
  const double n = static_cast<double>(a.size());
  double ma = 0.0, mb = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    ma += ra[i];
    mb += rb[i];
  }
  ma /= n;
  mb /= n;
  double num = 0.0, da = 0.0, db = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    num += (ra[i] - ma) * (rb[i] - mb);
    da += (ra[i] - ma) * (ra[i] - ma);
    db += (rb[i] - mb) * (rb[i] - mb);
  }
  if (da == 0.0 || db == 0.0) return 0.0;
  return num / std::sqrt(da * db);
}

}  // namespace nftk
