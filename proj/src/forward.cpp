#include "spectreg/forward.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <numbers>
#include <sstream>
#include <vector>

namespace spectreg::forward {

namespace {

constexpr double kSensorRadius = 0.11;
constexpr double kSourceRadius = 0.08;
constexpr double kCapAngle = std::numbers::pi / 3.0;  // 60 degree cap

// Fibonacci spiral on a sphere band cos(theta) in [cos_lo, cos_hi].
Eigen::Vector3d spiral_point(int k, int count, double radius, double cos_hi,
                             double cos_lo) {
  const double golden = (1.0 + std::sqrt(5.0)) / 2.0;
  const double ct = cos_hi - (k + 0.5) / count * (cos_hi - cos_lo);
  const double st = std::sqrt(std::max(0.0, 1.0 - ct * ct));
  const double phi = 2.0 * std::numbers::pi * k / golden;
  return radius * Eigen::Vector3d(st * std::cos(phi), st * std::sin(phi), ct);
}

}  // namespace

Leadfield synth_leadfield(int m, int n, std::mt19937_64& rng) {
  if (m < 2 || n < 2)
    throw BadDimensions("synth_leadfield: need at least 2 sensors and 2 sources");
  Leadfield lf;
  lf.sensor_positions.resize(m, 3);
  lf.source_positions.resize(n, 3);
  lf.G.resize(m, n);
  for (int s = 0; s < m; ++s)
    lf.sensor_positions.row(s) =
        spiral_point(s, m, kSensorRadius, 1.0, std::cos(kCapAngle));
  for (int q = 0; q < n; ++q)
    lf.source_positions.row(q) = spiral_point(q, n, kSourceRadius, 1.0, -1.0);

  std::normal_distribution<double> normal(0.0, 1.0);
  std::uniform_real_distribution<double> unif(0.0, 1.0);
  for (int q = 0; q < n; ++q) {
    const Eigen::Vector3d pos = lf.source_positions.row(q);
    const Eigen::Vector3d radial = pos.normalized();
    Eigen::Vector3d tangential;
    do {
      const Eigen::Vector3d v(normal(rng), normal(rng), normal(rng));
      tangential = v - v.dot(radial) * radial;
    } while (tangential.norm() < 1e-8);
    tangential.normalize();
    for (int s = 0; s < m; ++s) {
      const Eigen::Vector3d d = lf.sensor_positions.row(s).transpose() - pos;
      const double dist = d.norm();
      lf.G(s, q) = d.dot(tangential) / (dist * dist * dist);
    }
    const double norm = lf.G.col(q).norm();
    if (norm == 0.0) throw Error("synth_leadfield: degenerate column");
    lf.G.col(q) *= (0.8 + 0.45 * unif(rng)) / norm;
  }
  return lf;
}

void save_leadfield(const Leadfield& lf, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw IoError("save_leadfield: cannot open " + path);
  const int m = lf.sensors();
  const int n = lf.sources();
  out << "LEADFIELD v1 " << m << " " << n << "\n";
  char buf[40];
  auto put = [&](double v, bool last) {
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    out << buf << (last ? "\n" : " ");
  };
  for (int r = 0; r < m; ++r)
    for (int c = 0; c < n; ++c) put(lf.G(r, c), c == n - 1);
  for (int r = 0; r < m; ++r)
    for (int c = 0; c < 3; ++c) put(lf.sensor_positions(r, c), c == 2);
  for (int r = 0; r < n; ++r)
    for (int c = 0; c < 3; ++c) put(lf.source_positions(r, c), c == 2);
  if (!out) throw IoError("save_leadfield: write failed for " + path);
}

namespace {

std::vector<double> parse_row(const std::string& line, int expected, int lineno) {
  std::istringstream ss(line);
  std::vector<double> vals;
  std::string tok;
  while (ss >> tok) {
    try {
      std::size_t used = 0;
      const double v = std::stod(tok, &used);
      if (used != tok.size()) throw std::invalid_argument(tok);
      vals.push_back(v);
    } catch (const std::exception&) {
      throw ParseError("line " + std::to_string(lineno) +
                       ": non-numeric token '" + tok + "'");
    }
  }
  if (static_cast<int>(vals.size()) != expected)
    throw ParseError("line " + std::to_string(lineno) + ": expected " +
                     std::to_string(expected) + " values, got " +
                     std::to_string(vals.size()));
  return vals;
}

}  // namespace

Leadfield load_leadfield(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("load_leadfield: cannot open " + path);
  std::string line;
  if (!std::getline(in, line)) throw ParseError("line 1: empty file");
  std::istringstream head(line);
  std::string magic, version;
  int m = 0, n = 0;
  if (!(head >> magic >> version >> m >> n) || magic != "LEADFIELD" ||
      version != "v1")
    throw ParseError("line 1: expected 'LEADFIELD v1 M N'");
  if (m < 2 || n < 2) throw DimensionMismatch("load_leadfield: M,N must be >= 2");

  Leadfield lf;
  lf.G.resize(m, n);
  lf.sensor_positions.resize(m, 3);
  lf.source_positions.resize(n, 3);
  int lineno = 1;
  auto next_row = [&](int expected) {
    while (std::getline(in, line)) {
      ++lineno;
      if (line.find_first_not_of(" \t\r") != std::string::npos)
        return parse_row(line, expected, lineno);
    }
    throw ParseError("line " + std::to_string(lineno + 1) +
                     ": unexpected end of file");
  };
  for (int r = 0; r < m; ++r) {
    const auto row = next_row(n);
    for (int c = 0; c < n; ++c) lf.G(r, c) = row[c];
  }
  for (int r = 0; r < m; ++r) {
    const auto row = next_row(3);
    for (int c = 0; c < 3; ++c) lf.sensor_positions(r, c) = row[c];
  }
  for (int r = 0; r < n; ++r) {
    const auto row = next_row(3);
    for (int c = 0; c < 3; ++c) lf.source_positions(r, c) = row[c];
  }
  return lf;
}

std::pair<int, int> place_pair(const Leadfield& lf, std::mt19937_64& rng,
                               double min_dist_m, double norm_ratio_tol) {
  const int n = lf.sources();
  const Eigen::VectorXd norms = lf.G.colwise().norm();
  const double hi = 1.0 + norm_ratio_tol;
  std::vector<std::pair<int, int>> feasible;
  for (int a = 0; a < n; ++a) {
    for (int b = a + 1; b < n; ++b) {
      const double ratio = norms(a) / norms(b);
      if (ratio < 1.0 / hi || ratio > hi) continue;
      const double dist =
          (lf.source_positions.row(a) - lf.source_positions.row(b)).norm();
      if (dist <= min_dist_m) continue;
      feasible.emplace_back(a, b);
    }
  }
  if (feasible.empty())
    throw NoFeasiblePair("place_pair: no pair satisfies the constraints");
  std::uniform_int_distribution<std::size_t> pick(0, feasible.size() - 1);
  return feasible[pick(rng)];
}

SourceConfig embed_sources(const mvar::SourcePair& pair, int i, int j, int n) {
  if (i < 0 || j < 0 || i >= n || j >= n || i == j)
    throw IndexOutOfRange("embed_sources: invalid indices (" +
                          std::to_string(i) + "," + std::to_string(j) + ") for n=" +
                          std::to_string(n));
  SourceConfig cfg;
  cfg.i = i;
  cfg.j = j;
  cfg.full_x = Eigen::MatrixXd::Zero(n, pair.samples.cols());
  cfg.full_x.row(i) = pair.samples.row(0);
  cfg.full_x.row(j) = pair.samples.row(1);
  return cfg;
}

Eigen::MatrixXd project(const Leadfield& lf, const Eigen::MatrixXd& x) {
  if (x.rows() != lf.sources())
    throw DimensionMismatch("project: x has " + std::to_string(x.rows()) +
                            " rows, leadfield has " +
                            std::to_string(lf.sources()) + " sources");
  return lf.G * x;
}

double alpha_for_snr(const Eigen::MatrixXd& y_clean, double snr_x_db) {
  const double energy = y_clean.squaredNorm();
  if (energy == 0.0) throw ZeroSignal("alpha_for_snr: y_clean is zero");
  const double mt = static_cast<double>(y_clean.rows()) * y_clean.cols();
  return std::sqrt(energy / (mt * std::pow(10.0, snr_x_db / 10.0)));
}

double snr_x(const Eigen::MatrixXd& y_clean, const Eigen::MatrixXd& noise) {
  const double noise_energy = noise.squaredNorm();
  if (noise_energy == 0.0) throw ZeroSignal("snr_x: noise is zero");
  const double signal_energy = y_clean.squaredNorm();
  if (signal_energy == 0.0) return -std::numeric_limits<double>::infinity();
  return 10.0 * std::log10(signal_energy / noise_energy);
}

}  // namespace spectreg::forward
