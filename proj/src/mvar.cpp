#include "spectreg/mvar.hpp"

#include <cmath>
#include <string>

namespace spectreg::mvar {

MvarModel sample_coefficients(double gamma, int order, std::mt19937_64& rng) {
  if (gamma <= 0.0) throw Error("sample_coefficients: gamma must be positive");
  if (order < 1) throw Error("sample_coefficients: order must be >= 1");
  std::normal_distribution<double> normal(0.0, gamma);
  MvarModel model;
  model.order = order;
  model.gamma = gamma;
  model.coeffs.resize(order);
  for (auto& a : model.coeffs) {
    a(0, 0) = normal(rng);
    a(0, 1) = 0.0;  // no coupling from channel 2 to channel 1
    a(1, 0) = normal(rng);
    a(1, 1) = normal(rng);
  }
  return model;
}

Eigen::MatrixXd companion_matrix(const MvarModel& model) {
  const int p = model.order;
  Eigen::MatrixXd c = Eigen::MatrixXd::Zero(2 * p, 2 * p);
  for (int k = 0; k < p; ++k) c.block<2, 2>(0, 2 * k) = model.coeffs[k];
  if (p > 1) c.block(2, 0, 2 * (p - 1), 2 * (p - 1)).setIdentity();
  return c;
}

bool is_stable(const MvarModel& model, double margin) {
  const Eigen::MatrixXd c = companion_matrix(model);
  const Eigen::VectorXcd eig = c.eigenvalues();
  double radius = 0.0;
  for (int i = 0; i < eig.size(); ++i) radius = std::max(radius, std::abs(eig(i)));
  return radius < 1.0 - margin;
}

Eigen::Matrix2Xd simulate(const MvarModel& model, int length, int burn_in,
                          std::mt19937_64& rng, double overflow_guard) {
  if (length < 1) throw Error("simulate: length must be positive");
  if (burn_in < 0) throw Error("simulate: burn_in must be nonnegative");
  const int p = model.order;
  const int total = burn_in + length;
  std::normal_distribution<double> normal(0.0, 1.0);
  Eigen::Matrix2Xd z = Eigen::Matrix2Xd::Zero(2, total);
  for (int t = 0; t < total; ++t) {
    Eigen::Vector2d acc(normal(rng), normal(rng));
    for (int k = 0; k < p; ++k) {
      const int past = t - k - 1;
      if (past >= 0) acc += model.coeffs[k] * z.col(past);
    }
    if (std::abs(acc(0)) > overflow_guard || std::abs(acc(1)) > overflow_guard)
      throw InstabilityDetected("simulate: sample magnitude exceeded " +
                                std::to_string(overflow_guard) + " at step " +
                                std::to_string(t));
    z.col(t) = acc;
  }
  return z.rightCols(length);
}

bool accept_pair(const Eigen::Matrix2Xd& z) {
  const double n1 = z.row(0).norm();
  const double n2 = z.row(1).norm();
  if (n1 == 0.0 || n2 == 0.0)
    throw ZeroSignal("accept_pair: channel with zero norm");
  return std::max(n1, n2) < 3.0 * std::min(n1, n2);
}

namespace {
double channel_std(const Eigen::RowVectorXd& x) {
  const double mean = x.mean();
  return std::sqrt((x.array() - mean).square().mean());
}
}  // namespace

SourcePair normalize_pair(const Eigen::Matrix2Xd& z) {
  const double s1 = channel_std(z.row(0));
  const double s2 = channel_std(z.row(1));
  if (s1 + s2 == 0.0) throw ZeroSignal("normalize_pair: both channels constant");
  SourcePair pair;
  pair.samples = z / (0.5 * (s1 + s2));
  return pair;
}

GeneratedPair generate_accepted(double gamma, int order, int length,
                                std::mt19937_64& rng, int burn_in,
                                int max_attempts) {
  for (int attempt = 1; attempt <= max_attempts; ++attempt) {
    MvarModel model = sample_coefficients(gamma, order, rng);
    if (!is_stable(model)) continue;
    Eigen::Matrix2Xd z;
    try {
      z = simulate(model, length, burn_in, rng);
    } catch (const InstabilityDetected&) {
      continue;  // marginally stable model blew past the guard
    }
    if (!accept_pair(z)) continue;
    GeneratedPair out;
    out.model = model;
    out.pair = normalize_pair(z);
    out.attempts = attempt;
    return out;
  }
  throw RejectionBudgetExceeded("generate_accepted: no accepted model in " +
                                std::to_string(max_attempts) + " attempts");
}

}  // namespace spectreg::mvar
