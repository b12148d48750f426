// SPDX-License-Identifier: Apache-2.0
//
// nftk -- near-field array channel toolkit

#include "nftk/config.hpp"

#include <fstream>
#include <set>
#include <sstream>

#include <json.hpp>

namespace nftk {

namespace {

using nlohmann::json;

void check_keys(const json& obj, const std::string& section, const std::set<std::string>& known) {
  for (const auto& [key, value] : obj.items()) {
    (void)value;
    if (!known.count(key))
      throw config_error("unknown key '" + key + "' in section '" + section + "'");
  }
}

template <typename T>
void read(const json& obj, const char* key, T& out) {
  if (obj.contains(key)) {
    try {
      out = obj.at(key).get<T>();
    } catch (const json::exception& e) {
      throw config_error(std::string("bad value for '") + key + "': " + e.what());
    }
  }
}

template <typename T>
void read_opt(const json& obj, const char* key, std::optional<T>& out) {
  if (obj.contains(key) && !obj.at(key).is_null()) {
    T value{};
    read(obj, key, value);
    out = value;
  }
}

}  // namespace

Config parse_config(const std::string& json_text) {
  json root;
  try {
    root = json::parse(json_text);
  } catch (const json::exception& e) {
    throw config_error(std::string("config is not valid JSON: ") + e.what());
  }
  if (!root.is_object()) throw config_error("config root must be an object");
  check_keys(root, "(root)", {"geometry", "scene", "signal", "dictionaries", "recovery", "sweep"});

  Config cfg;
  if (root.contains("geometry")) {
    const auto& g = root["geometry"];
    check_keys(g, "geometry", {"n_h", "n_v", "wavelength_m", "spacing_m"});
    read(g, "n_h", cfg.n_h);
    read(g, "n_v", cfg.n_v);
    read(g, "wavelength_m", cfg.wavelength);
    read(g, "spacing_m", cfg.spacing);
  }
  if (root.contains("scene")) {
    const auto& s = root["scene"];
    check_keys(s, "scene",
               {"clusters", "scatterers_per_cluster", "concentration", "distance_m",
                "center_cone_deg", "distance_jitter_m"});
    read(s, "clusters", cfg.clusters);
    read(s, "scatterers_per_cluster", cfg.scatterers_per_cluster);
    read(s, "concentration", cfg.concentration);
    if (s.contains("distance_m")) {
      const auto& d = s["distance_m"];
      if (d.is_number()) {
        cfg.r_min = cfg.r_max = d.get<double>();
      } else if (d.is_array() && d.size() == 2) {
        cfg.r_min = d[0].get<double>();
        cfg.r_max = d[1].get<double>();
      } else {
        throw config_error("scene.distance_m must be a number or [min, max]");
      }
    }
    read(s, "center_cone_deg", cfg.center_cone_deg);
    read(s, "distance_jitter_m", cfg.distance_jitter);
  }
  if (root.contains("signal")) {
    const auto& s = root["signal"];
    check_keys(s, "signal", {"snapshots", "snr_db", "model"});
    read(s, "snapshots", cfg.snapshots);
    read(s, "snr_db", cfg.snr_db);
    read(s, "model", cfg.model);
  }
  if (root.contains("dictionaries")) {
    const auto& d = root["dictionaries"];
    check_keys(d, "dictionaries",
               {"ad_oversampling", "pd_beta", "pd_r_min_m", "pd_r_max_m", "tpd_r_min_m",
                "tpd_r_max_m", "tpd_distance_levels"});
    if (d.contains("ad_oversampling")) {
      const auto& o = d["ad_oversampling"];
      if (!o.is_array() || o.size() != 2)
        throw config_error("dictionaries.ad_oversampling must be [O_h, O_v]");
      cfg.ad_oversample_h = o[0].get<int>();
      cfg.ad_oversample_v = o[1].get<int>();
    }
    read(d, "pd_beta", cfg.pd_beta);
    read_opt(d, "pd_r_min_m", cfg.pd_r_min);
    read_opt(d, "pd_r_max_m", cfg.pd_r_max);
    read_opt(d, "tpd_r_min_m", cfg.tpd_r_min);
    read_opt(d, "tpd_r_max_m", cfg.tpd_r_max);
    read(d, "tpd_distance_levels", cfg.tpd_distance_levels);
  }
  if (root.contains("recovery")) {
    const auto& r = root["recovery"];
    check_keys(r, "recovery", {"model_order", "refine"});
    read(r, "model_order", cfg.model_order);
    read(r, "refine", cfg.refine);
  }
  if (root.contains("sweep")) {
    const auto& s = root["sweep"];
    check_keys(s, "sweep",
               {"variable", "values", "trials", "methods", "master_seed", "csv_path", "svg_dir"});
    read(s, "variable", cfg.sweep_variable);
    read(s, "values", cfg.sweep_values);
    read(s, "trials", cfg.trials);
    read(s, "methods", cfg.methods);
    std::optional<std::uint64_t> seed;
    read_opt(s, "master_seed", seed);
    cfg.master_seed = seed;
    read(s, "csv_path", cfg.csv_path);
    read(s, "svg_dir", cfg.svg_dir);
  }

  // validation
  if (cfg.n_h < 1 || cfg.n_v < 1) throw config_error("geometry.n_h / n_v must be >= 1");
  if (cfg.wavelength <= 0.0) throw config_error("geometry.wavelength_m must be positive");
  if (cfg.spacing < 0.0) throw config_error("geometry.spacing_m must be positive");
  if (cfg.clusters < 1 || cfg.scatterers_per_cluster < 1)
    throw config_error("scene cluster counts must be >= 1");
  if (cfg.concentration <= 0.0) throw config_error("scene.concentration must be > 0");
  if (cfg.r_min <= 0.0 || cfg.r_max < cfg.r_min)
    throw config_error("scene.distance_m interval is invalid");
  if (cfg.center_cone_deg <= 0.0 || cfg.center_cone_deg > 90.0)
    throw config_error("scene.center_cone_deg must be in (0, 90]");
  if (cfg.snapshots < 1) throw config_error("signal.snapshots must be >= 1");
  if (cfg.model != "exact" && cfg.model != "fresnel")
    throw config_error("signal.model must be 'exact' or 'fresnel'");
  if (cfg.ad_oversample_h < 1 || cfg.ad_oversample_v < 1)
    throw config_error("dictionaries.ad_oversampling factors must be >= 1");
  if (cfg.pd_beta <= 0.0) throw config_error("dictionaries.pd_beta must be > 0");
  if (cfg.pd_r_min && *cfg.pd_r_min <= 0.0) throw config_error("dictionaries.pd_r_min_m must be > 0");
  if (cfg.trials < 1) throw config_error("sweep.trials must be >= 1");
  if (cfg.sweep_variable != "concentration" && cfg.sweep_variable != "distance" &&
      cfg.sweep_variable != "snr")
    throw config_error("sweep.variable must be concentration, distance, or snr");
  return cfg;
}

Config load_config_file(const std::string& path) {
  std::ifstream is(path);
  if (!is) throw config_error("cannot open config file: " + path);
  std::ostringstream buffer;
  buffer << is.rdbuf();
  return parse_config(buffer.str());
}

}  // namespace nftk
