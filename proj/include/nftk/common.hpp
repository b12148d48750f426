// SPDX-License-Identifier: Apache-2.0
//
// nftk -- near-field array channel toolkit

#pragma once

#include <Eigen/Dense>
#include <complex>
#include <stdexcept>
#include <string>

namespace nftk {

using cplx = std::complex<double>;
using VecC = Eigen::VectorXcd;
using MatC = Eigen::MatrixXcd;
using VecD = Eigen::VectorXd;
using MatD = Eigen::MatrixXd;

inline constexpr double kPi = 3.14159265358979323846;

/// Thrown for malformed configuration files / CLI arguments (exit code 1).
class config_error : public std::runtime_error {
 public:
  explicit config_error(const std::string& what) : std::runtime_error(what) {}
};

inline double db_to_linear(double db) { return std::pow(10.0, db / 10.0); }
inline double linear_to_db(double lin) { return 10.0 * std::log10(lin); }

}  // namespace nftk
