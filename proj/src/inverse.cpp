#include "spectreg/inverse.hpp"

#include <string>

namespace spectreg::inverse {

RegularizedInverter build_inverter(const Eigen::MatrixXd& G,
                                   double rel_truncation) {
  if (G.size() == 0 || !G.allFinite())
    throw SvdFailure("build_inverter: leadfield empty or non-finite");
  Eigen::BDCSVD<Eigen::MatrixXd> svd(G,
                                     Eigen::ComputeThinU | Eigen::ComputeThinV);
  const Eigen::VectorXd& sv = svd.singularValues();
  if (sv.size() == 0 || sv(0) <= 0.0)
    throw SvdFailure("build_inverter: zero matrix");
  int rank = 0;
  while (rank < sv.size() && sv(rank) > rel_truncation * sv(0)) ++rank;
  RegularizedInverter inv;
  inv.U = svd.matrixU().leftCols(rank);
  inv.V = svd.matrixV().leftCols(rank);
  inv.s = sv.head(rank);
  inv.rank = rank;
  return inv;
}

Eigen::MatrixXd reconstruct(const RegularizedInverter& inv,
                            const Eigen::MatrixXd& y, double lambda) {
  if (lambda < 0.0) throw Error("reconstruct: lambda must be nonnegative");
  if (y.rows() != inv.U.rows())
    throw DimensionMismatch("reconstruct: y has " + std::to_string(y.rows()) +
                            " rows, inverter expects " +
                            std::to_string(inv.U.rows()));
  const Eigen::VectorXd filter =
      inv.s.array() / (inv.s.array().square() + lambda);
  return inv.V * (filter.asDiagonal() * (inv.U.transpose() * y));
}

double eps_x(const Eigen::MatrixXd& x_rec, const Eigen::MatrixXd& x_true) {
  if (x_rec.rows() != x_true.rows() || x_rec.cols() != x_true.cols())
    throw ShapeMismatch("eps_x: shape mismatch");
  const double den = x_rec.squaredNorm() + x_true.squaredNorm();
  if (den == 0.0) throw BothZero("eps_x: both arguments are zero");
  return (x_rec - x_true).squaredNorm() / den;
}

double eps_s(const spectra::CrossSpectrum& s_rec,
             const spectra::CrossSpectrum& s_true) {
  if (s_rec.n_channels != s_true.n_channels || s_rec.n_freqs != s_true.n_freqs)
    throw ShapeMismatch("eps_s: shape mismatch");
  double num = 0.0, e_rec = 0.0, e_true = 0.0;
  for (int f = 0; f < s_rec.n_freqs; ++f) {
    num += (s_rec.data[f] - s_true.data[f]).squaredNorm();
    e_rec += s_rec.data[f].squaredNorm();
    e_true += s_true.data[f].squaredNorm();
  }
  const double den = e_rec + e_true;
  if (den == 0.0) throw BothZero("eps_s: both arguments are zero");
  return num / den;
}

}  // namespace spectreg::inverse
