// SPDX-License-Identifier: Apache-2.0
//
// nftk -- near-field array channel toolkit

#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "nftk/common.hpp"
#include "nftk/geometry.hpp"

namespace nftk {

/// Experiment configuration, loaded from a single JSON file. Unknown keys
/// are rejected so typos fail loudly. See tests/data and the README for
/// examples.
struct Config {
  // geometry
  int n_h = 16;
  int n_v = 16;
  double wavelength = 0.01;
  double spacing = 0.0;  // 0: lambda/2

  // scene
  int clusters = 3;
  int scatterers_per_cluster = 2;
  double concentration = 50.0;
  double r_min = 10.0;
  double r_max = 10.0;
  double center_cone_deg = 45.0;  // cluster centers drawn uniformly within this cone
  double distance_jitter = 0.0;

  // signal
  int snapshots = 100;
  double snr_db = 20.0;
  std::string model = "exact";  // exact | fresnel

  // dictionaries / grids
  int ad_oversample_h = 1;
  int ad_oversample_v = 1;
  double pd_beta = 1.5;  // kDefaultPdBeta
  std::optional<double> pd_r_min;  // default: snapped inverse-distance rings
  std::optional<double> pd_r_max;
  std::optional<double> tpd_r_min;  // default: the PD bounds
  std::optional<double> tpd_r_max;
  int tpd_distance_levels = 0;  // 0: max(n_h, n_v)

  // recovery
  int model_order = 0;  // 0: clusters * scatterers_per_cluster
  bool refine = false;

  // sweep
  std::string sweep_variable = "concentration";  // concentration | distance | snr
  std::vector<double> sweep_values;
  int trials = 1;
  std::vector<std::string> methods;
  std::optional<std::uint64_t> master_seed;  // mandatory for `sweep`
  std::string csv_path = "sweep.csv";
  std::string svg_dir;  // empty: next to the CSV

  ArrayGeometry geometry() const { return {n_h, n_v, wavelength, spacing}; }
  int effective_model_order() const {
    return model_order > 0 ? model_order : clusters * scatterers_per_cluster;
  }
};

/// Parses and validates; throws config_error with a useful message.
Config parse_config(const std::string& json_text);
Config load_config_file(const std::string& path);

}  // namespace nftk
