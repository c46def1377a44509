#pragma once

#include <Eigen/Dense>
#include <random>
#include <string>
#include <utility>

#include "spectreg/errors.hpp"
#include "spectreg/mvar.hpp"

namespace spectreg::forward {

/// M x N forward matrix with sensor and source positions in meters.
struct Leadfield {
  Eigen::MatrixXd G;
  Eigen::MatrixX3d sensor_positions;
  Eigen::MatrixX3d source_positions;

  int sensors() const { return static_cast<int>(G.rows()); }
  int sources() const { return static_cast<int>(G.cols()); }
};

/// Active-pair configuration: the full N x T source array has nonzero rows
/// only at indices i and j.
struct SourceConfig {
  int i = -1;
  int j = -1;
  Eigen::MatrixXd full_x;
};

/// Sensors on a spherical cap of radius 0.11 m, sources quasi-uniform on a
/// sphere of radius 0.08 m. Each column is an inverse-square kernel of
/// sensor-source distance along a random tangential direction, scaled by a
/// per-source gain that keeps column norms within a narrow band.
Leadfield synth_leadfield(int m, int n, std::mt19937_64& rng);

/// Text format: see save_leadfield. Throws ParseError with a line number.
Leadfield load_leadfield(const std::string& path);

/// Line 1: "LEADFIELD v1 M N"; then M rows of G (N floats each), M sensor
/// xyz lines, N source xyz lines. Floats carry 17 significant digits.
void save_leadfield(const Leadfield& lf, const std::string& path);

/// Uniform draw from the pairs whose column-norm ratio lies within
/// [1/(1+tol), 1+tol] and whose positions are more than min_dist_m apart.
std::pair<int, int> place_pair(const Leadfield& lf, std::mt19937_64& rng,
                               double min_dist_m = 0.07,
                               double norm_ratio_tol = 0.1);

/// Scatters the pair into rows i and j of an otherwise zero N x T array.
SourceConfig embed_sources(const mvar::SourcePair& pair, int i, int j, int n);

/// y_clean = G * x.
Eigen::MatrixXd project(const Leadfield& lf, const Eigen::MatrixXd& x);

/// Noise standard deviation making the expected time-domain SNR (dB) of
/// y_clean + noise equal snr_x_db.
double alpha_for_snr(const Eigen::MatrixXd& y_clean, double snr_x_db);

/// Realized SNR in dB: 10 log10(sum_t ||y_clean(t)||^2 / sum_t ||noise(t)||^2).
/// Returns -inf when y_clean is identically zero.
double snr_x(const Eigen::MatrixXd& y_clean, const Eigen::MatrixXd& noise);

}  // namespace spectreg::forward
