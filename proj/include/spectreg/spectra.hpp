#pragma once

#include <Eigen/Dense>
#include <complex>
#include <string>
#include <vector>

#include "spectreg/errors.hpp"

namespace spectreg::spectra {

enum class Window { rectangular, hann };

Window window_from_string(const std::string& name);
std::string to_string(Window w);

struct WelchConfig {
  int segment_length = 256;  // power of two
  double overlap_fraction = 0.5;
  Window window = Window::hann;
};

/// Frequency-indexed family of N x N Hermitian matrices, all L bins
/// (two-sided).
struct CrossSpectrum {
  int n_channels = 0;
  int n_freqs = 0;
  std::vector<Eigen::MatrixXcd> data;
};

/// Window sample w(t), t in [0, L).
double window_value(Window w, int t, int length);

/// Window power normalization W = (1/L) sum_t w(t)^2.
double window_norm(Window w, int length);

/// Hop size and segment count for a series of length T.
int hop_size(const WelchConfig& cfg);
int segment_count(int n_samples, const WelchConfig& cfg);

/// Welch cross-power spectrum: per-segment windowed DFT with 1/L
/// normalization, averaged with prefactor L/(P*W).
CrossSpectrum welch(const Eigen::MatrixXd& x, const WelchConfig& cfg);

/// Spectral complexity coefficient: mean over upper-triangle entries
/// (diagonal included) of the frequency-summed squared magnitudes.
double complexity(const CrossSpectrum& s);

/// Spectrum-domain SNR in dB with white sensor noise of std alpha:
/// 10 log10( sum_f ||G S(f) G^T||_F^2 / (N_f * M * alpha^4) ).
/// Returns -inf for an all-zero source spectrum.
double snr_s(const Eigen::MatrixXd& G, const CrossSpectrum& s_x, double alpha);

/// Spectrum-domain SNR predicted from the time-domain SNR alone:
/// 10 log10( T^2 M sum_f ||G S(f) G^T||_F^2 / (N_f (sum_t ||Gx(t)||^2)^2) )
/// + 2 * snr_x_db. Algebraically identical to snr_s with the calibrated alpha.
double predicted_snr_s(const Eigen::MatrixXd& G, const CrossSpectrum& s_x,
                       const Eigen::MatrixXd& x, double snr_x_db);

/// Sensor-level model spectrum G S(f) G^T + alpha^2 I.
CrossSpectrum model_spectrum(const Eigen::MatrixXd& G, const CrossSpectrum& s_x,
                             double alpha);

}  // namespace spectreg::spectra
