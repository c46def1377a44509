#pragma once

#include <Eigen/Dense>
#include <functional>
#include <utility>
#include <vector>

#include "spectreg/errors.hpp"
#include "spectreg/inverse.hpp"
#include "spectreg/spectra.hpp"

namespace spectreg::optimize {

/// Coarse-scan trace: sampled lambdas (strictly increasing) and objective
/// values.
struct LambdaCurve {
  std::vector<double> lambdas;
  std::vector<double> eps_values;
};

struct OptimResult {
  double lambda_star = 0.0;
  double eps_star = 0.0;
  int n_evals = 0;
  LambdaCurve curve;
  bool converged = false;
  bool boundary = false;  // coarse minimum sat at a bracket end
};

/// Bracket in log10 lambda, relative to s_max^2 = 1 scaling of the
/// leadfield; find_optimal_lambdas shifts it by 2*log10(s_max).
struct OptimConfig {
  double log10_lo = -8.0;
  double log10_hi = 2.0;
  int coarse_points = 60;
  double tol_log10 = 1e-3;
};

/// Geometric grid scan followed by golden-section refinement around the best
/// grid point. The objective receives lambda (not its log). Throws
/// NonFiniteObjective if f returns NaN or infinity.
OptimResult minimize_scalar(const std::function<double(double)>& f,
                            const OptimConfig& cfg);

/// eps_x(reconstruct(inv, y, lambda), x_true) evaluated through the SVD
/// basis; all lambda-independent quantities are folded at construction so
/// each call is O(rank).
class TimeSeriesError {
 public:
  TimeSeriesError(const inverse::RegularizedInverter& inv,
                  const Eigen::MatrixXd& y, const Eigen::MatrixXd& x_true);
  double operator()(double lambda) const;

 private:
  Eigen::VectorXd s_;
  Eigen::VectorXd energy_;   // per-component sum_t w^2, w = U^T y
  Eigen::VectorXd overlap_;  // per-component sum_t w * (V^T x_true)
  double true_energy_ = 0.0;
};

/// eps_s(welch(reconstruct(inv, y, lambda)), s_true) evaluated through the
/// SVD basis: welch commutes with the fixed mixing V, so the segment spectra
/// of U^T y are computed once and each call costs O(rank^2).
class SpectrumError {
 public:
  SpectrumError(const inverse::RegularizedInverter& inv,
                const Eigen::MatrixXd& y, const spectra::CrossSpectrum& s_true,
                const spectra::WelchConfig& welch_cfg);
  double operator()(double lambda) const;

 private:
  Eigen::VectorXd s_;
  Eigen::MatrixXd power_;    // sum_f |S_u(f)|^2 elementwise
  Eigen::MatrixXd overlap_;  // sum_f Re(S_u(f) conj(V^T S_true(f) V))
  double true_energy_ = 0.0;
};

/// Minimizes the two reconstruction errors over the same bracket (shifted by
/// the leadfield scale) and returns (result for eps_x, result for eps_s).
std::pair<OptimResult, OptimResult> find_optimal_lambdas(
    const inverse::RegularizedInverter& inv, const Eigen::MatrixXd& y,
    const Eigen::MatrixXd& x_true, const spectra::CrossSpectrum& s_true,
    const spectra::WelchConfig& welch_cfg, const OptimConfig& opt_cfg);

}  // namespace spectreg::optimize
