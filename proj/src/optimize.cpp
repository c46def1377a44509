#include "spectreg/optimize.hpp"

#include <cmath>
#include <limits>

namespace spectreg::optimize {

namespace {

struct Tracker {
  const std::function<double(double)>& f;
  int n_evals = 0;
  double best_u = 0.0;
  double best_val = std::numeric_limits<double>::infinity();

  double eval(double u) {
    const double val = f(std::pow(10.0, u));
    ++n_evals;
    if (!std::isfinite(val))
      throw NonFiniteObjective("minimize_scalar: objective not finite at lambda=" +
                               std::to_string(std::pow(10.0, u)));
    if (val < best_val) {
      best_val = val;
      best_u = u;
    }
    return val;
  }
};

}  // namespace

OptimResult minimize_scalar(const std::function<double(double)>& f,
                            const OptimConfig& cfg) {
  if (cfg.log10_lo >= cfg.log10_hi)
    throw Error("minimize_scalar: empty bracket");
  if (cfg.coarse_points < 2)
    throw Error("minimize_scalar: need at least 2 coarse points");

  Tracker tr{f};
  OptimResult res;
  const int n = cfg.coarse_points;
  const double step = (cfg.log10_hi - cfg.log10_lo) / (n - 1);
  int best_idx = 0;
  double best_coarse = std::numeric_limits<double>::infinity();
  res.curve.lambdas.reserve(n);
  res.curve.eps_values.reserve(n);
  for (int k = 0; k < n; ++k) {
    const double u = cfg.log10_lo + k * step;
    const double val = tr.eval(u);
    res.curve.lambdas.push_back(std::pow(10.0, u));
    res.curve.eps_values.push_back(val);
    if (val < best_coarse) {
      best_coarse = val;
      best_idx = k;
    }
  }
  res.boundary = (best_idx == 0 || best_idx == n - 1);

  double a = cfg.log10_lo + std::max(0, best_idx - 1) * step;
  double b = cfg.log10_lo + std::min(n - 1, best_idx + 1) * step;
  const double inv_phi = (std::sqrt(5.0) - 1.0) / 2.0;
  double c = b - inv_phi * (b - a);
  double d = a + inv_phi * (b - a);
  double fc = tr.eval(c);
  double fd = tr.eval(d);
  int iter = 0;
  const int max_iter = 200;
  while (b - a > cfg.tol_log10 && iter++ < max_iter) {
    if (fc < fd) {
      b = d;
      d = c;
      fd = fc;
      c = b - inv_phi * (b - a);
      fc = tr.eval(c);
    } else {
      a = c;
      c = d;
      fc = fd;
      d = a + inv_phi * (b - a);
      fd = tr.eval(d);
    }
  }
  tr.eval(0.5 * (a + b));
  res.converged = (b - a) <= cfg.tol_log10;
  res.lambda_star = std::pow(10.0, tr.best_u);
  res.eps_star = tr.best_val;
  res.n_evals = tr.n_evals;
  return res;
}

TimeSeriesError::TimeSeriesError(const inverse::RegularizedInverter& inv,
                                 const Eigen::MatrixXd& y,
                                 const Eigen::MatrixXd& x_true) {
  if (y.rows() != inv.U.rows() || x_true.rows() != inv.V.rows() ||
      y.cols() != x_true.cols())
    throw DimensionMismatch("TimeSeriesError: inconsistent shapes");
  s_ = inv.s;
  const Eigen::MatrixXd w = inv.U.transpose() * y;
  const Eigen::MatrixXd q = inv.V.transpose() * x_true;
  energy_ = w.array().square().rowwise().sum();
  overlap_ = (w.array() * q.array()).rowwise().sum();
  true_energy_ = x_true.squaredNorm();
}

double TimeSeriesError::operator()(double lambda) const {
  const Eigen::ArrayXd filt = s_.array() / (s_.array().square() + lambda);
  const double rec_energy = (filt.square() * energy_.array()).sum();
  const double cross = (filt * overlap_.array()).sum();
  const double den = rec_energy + true_energy_;
  if (den == 0.0) throw BothZero("TimeSeriesError: zero data and truth");
  return (rec_energy - 2.0 * cross + true_energy_) / den;
}

SpectrumError::SpectrumError(const inverse::RegularizedInverter& inv,
                             const Eigen::MatrixXd& y,
                             const spectra::CrossSpectrum& s_true,
                             const spectra::WelchConfig& welch_cfg) {
  if (y.rows() != inv.U.rows())
    throw DimensionMismatch("SpectrumError: y rows mismatch");
  if (s_true.n_channels != inv.V.rows())
    throw DimensionMismatch("SpectrumError: spectrum channel mismatch");
  s_ = inv.s;
  const int r = inv.rank;
  const spectra::CrossSpectrum s_u =
      spectra::welch(inv.U.transpose() * y, welch_cfg);
  if (s_u.n_freqs != s_true.n_freqs)
    throw ShapeMismatch("SpectrumError: frequency count mismatch");
  const Eigen::MatrixXcd vc = inv.V.cast<std::complex<double>>();
  power_ = Eigen::MatrixXd::Zero(r, r);
  overlap_ = Eigen::MatrixXd::Zero(r, r);
  true_energy_ = 0.0;
  for (int f = 0; f < s_u.n_freqs; ++f) {
    const Eigen::MatrixXcd b = vc.adjoint() * s_true.data[f] * vc;
    power_ += s_u.data[f].cwiseAbs2();
    overlap_ += (s_u.data[f].array() * b.array().conjugate()).real().matrix();
    true_energy_ += s_true.data[f].squaredNorm();
  }
}

double SpectrumError::operator()(double lambda) const {
  const Eigen::ArrayXd filt = s_.array() / (s_.array().square() + lambda);
  const Eigen::VectorXd d = filt.matrix();
  const Eigen::VectorXd d2 = filt.square().matrix();
  const double rec_energy = d2.transpose() * power_ * d2;
  const double cross = d.transpose() * overlap_ * d;
  const double den = rec_energy + true_energy_;
  if (den == 0.0) throw BothZero("SpectrumError: zero data and truth");
  return (rec_energy - 2.0 * cross + true_energy_) / den;
}

std::pair<OptimResult, OptimResult> find_optimal_lambdas(
    const inverse::RegularizedInverter& inv, const Eigen::MatrixXd& y,
    const Eigen::MatrixXd& x_true, const spectra::CrossSpectrum& s_true,
    const spectra::WelchConfig& welch_cfg, const OptimConfig& opt_cfg) {
  OptimConfig shifted = opt_cfg;
  const double scale = 2.0 * std::log10(inv.s(0));
  shifted.log10_lo += scale;
  shifted.log10_hi += scale;
  const TimeSeriesError f_x(inv, y, x_true);
  const SpectrumError f_s(inv, y, s_true, welch_cfg);
  OptimResult rx = minimize_scalar(std::cref(f_x), shifted);
  OptimResult rs = minimize_scalar(std::cref(f_s), shifted);
  return {std::move(rx), std::move(rs)};
}

}  // namespace spectreg::optimize
