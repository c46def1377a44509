#pragma once

#include <Eigen/Dense>

#include "spectreg/errors.hpp"
#include "spectreg/spectra.hpp"

namespace spectreg::inverse {

/// Thin SVD of the leadfield, G = U diag(s) V^T, with singular values below
/// 1e-12 * s_max truncated. Immutable after construction; one factorization
/// serves every lambda.
struct RegularizedInverter {
  Eigen::MatrixXd U;   // M x r
  Eigen::VectorXd s;   // r, descending, all positive
  Eigen::MatrixXd V;   // N x r
  int rank = 0;
};

RegularizedInverter build_inverter(const Eigen::MatrixXd& G,
                                   double rel_truncation = 1e-12);

/// Tikhonov solution x_lambda(t) = V diag(s_i/(s_i^2+lambda)) U^T y(t).
Eigen::MatrixXd reconstruct(const RegularizedInverter& inv,
                            const Eigen::MatrixXd& y, double lambda);

/// Normalized time-series reconstruction error, in [0, 2].
double eps_x(const Eigen::MatrixXd& x_rec, const Eigen::MatrixXd& x_true);

/// Normalized cross-spectrum reconstruction error (Frobenius norms per
/// frequency), in [0, 2].
double eps_s(const spectra::CrossSpectrum& s_rec,
             const spectra::CrossSpectrum& s_true);

}  // namespace spectreg::inverse
