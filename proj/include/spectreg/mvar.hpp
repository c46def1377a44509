#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <random>
#include <vector>

#include "spectreg/errors.hpp"

namespace spectreg::mvar {

/// Order-P autoregressive model for a 2-channel pair with unidirectional
/// coupling from channel 1 to channel 2: the upper-right entry of every
/// coefficient matrix is zero.
struct MvarModel {
  int order = 0;
  std::vector<Eigen::Matrix2d> coeffs;
  double gamma = 0.0;
  std::uint64_t seed = 0;
};

/// Unit-normalized 2xT source pair: the mean of the two per-channel
/// standard deviations equals one after normalize_pair.
struct SourcePair {
  Eigen::Matrix2Xd samples;
  int model_id = -1;
  double complexity = 0.0;
};

/// Draws the three free coefficients of each lag from Normal(0, gamma^2).
/// The returned model is not necessarily stable.
MvarModel sample_coefficients(double gamma, int order, std::mt19937_64& rng);

/// 2P x 2P companion matrix of the model.
Eigen::MatrixXd companion_matrix(const MvarModel& model);

/// True iff every companion eigenvalue has modulus < 1 - margin.
bool is_stable(const MvarModel& model, double margin = 1e-6);

/// Runs the recursion from a zero state for burn_in + length steps with
/// i.i.d. standard normal innovations and returns the last `length` samples.
/// Throws InstabilityDetected if any sample exceeds overflow_guard.
Eigen::Matrix2Xd simulate(const MvarModel& model, int length, int burn_in,
                          std::mt19937_64& rng, double overflow_guard = 1e12);

/// Balance criterion: the larger channel l2-norm is strictly less than
/// 3 times the smaller one.
bool accept_pair(const Eigen::Matrix2Xd& z);

/// Divides both channels by the mean of their standard deviations.
SourcePair normalize_pair(const Eigen::Matrix2Xd& z);

struct GeneratedPair {
  MvarModel model;
  SourcePair pair;
  int attempts = 0;
};

/// Rejection-samples models until one is stable and its simulated pair is
/// balanced; returns the accepted model and the normalized pair.
GeneratedPair generate_accepted(double gamma, int order, int length,
                                std::mt19937_64& rng, int burn_in = 1000,
                                int max_attempts = 10000);

}  // namespace spectreg::mvar
