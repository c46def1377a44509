#include "spectreg/spectra.hpp"

#include <fftw3.h>

#include <cmath>
#include <limits>
#include <map>
#include <mutex>
#include <numbers>

namespace spectreg::spectra {

namespace {

bool is_pow2(int v) { return v > 0 && (v & (v - 1)) == 0; }

// Forward c2c plans per length, created once under a lock. Plans are built
// with FFTW_UNALIGNED so fftw_execute_dft accepts caller-owned buffers.
fftw_plan plan_for(int length) {
  static std::mutex mutex;
  static std::map<int, fftw_plan> cache;
  std::lock_guard<std::mutex> lock(mutex);
  auto it = cache.find(length);
  if (it != cache.end()) return it->second;
  std::vector<std::complex<double>> dummy(length);
  fftw_plan plan = fftw_plan_dft_1d(
      length, reinterpret_cast<fftw_complex*>(dummy.data()),
      reinterpret_cast<fftw_complex*>(dummy.data()), FFTW_FORWARD,
      FFTW_ESTIMATE | FFTW_UNALIGNED);
  cache.emplace(length, plan);
  return plan;
}

void fft_forward(std::vector<std::complex<double>>& in,
                 std::vector<std::complex<double>>& out) {
  fftw_execute_dft(plan_for(static_cast<int>(in.size())),
                   reinterpret_cast<fftw_complex*>(in.data()),
                   reinterpret_cast<fftw_complex*>(out.data()));
}

void validate(const WelchConfig& cfg) {
  if (!is_pow2(cfg.segment_length))
    throw Error("welch: segment_length must be a power of two");
  if (cfg.overlap_fraction < 0.0 || cfg.overlap_fraction >= 1.0)
    throw Error("welch: overlap_fraction must lie in [0, 1)");
}

}  // namespace

Window window_from_string(const std::string& name) {
  if (name == "rectangular") return Window::rectangular;
  if (name == "hann") return Window::hann;
  throw ParseError("unknown window '" + name + "'");
}

std::string to_string(Window w) {
  return w == Window::hann ? "hann" : "rectangular";
}

double window_value(Window w, int t, int length) {
  if (w == Window::rectangular) return 1.0;
  return 0.5 * (1.0 - std::cos(2.0 * std::numbers::pi * t / length));
}

double window_norm(Window w, int length) {
  double acc = 0.0;
  for (int t = 0; t < length; ++t) {
    const double v = window_value(w, t, length);
    acc += v * v;
  }
  return acc / length;
}

int hop_size(const WelchConfig& cfg) {
  validate(cfg);
  const int hop = static_cast<int>(
      std::llround(cfg.segment_length * (1.0 - cfg.overlap_fraction)));
  return std::max(1, hop);
}

int segment_count(int n_samples, const WelchConfig& cfg) {
  if (n_samples < cfg.segment_length)
    throw SegmentTooLong("welch: series shorter than one segment");
  return (n_samples - cfg.segment_length) / hop_size(cfg) + 1;
}

CrossSpectrum welch(const Eigen::MatrixXd& x, const WelchConfig& cfg) {
  validate(cfg);
  const int n = static_cast<int>(x.rows());
  const int t_total = static_cast<int>(x.cols());
  if (n == 0 || t_total == 0) throw EmptyInput("welch: empty input");
  const int len = cfg.segment_length;
  if (t_total < len) throw SegmentTooLong("welch: series shorter than one segment");
  const int hop = hop_size(cfg);
  const int n_seg = (t_total - len) / hop + 1;

  std::vector<double> w(len);
  for (int t = 0; t < len; ++t) w[t] = window_value(cfg.window, t, len);
  const double wnorm = window_norm(cfg.window, len);
  if (wnorm <= 0.0) throw Error("welch: window normalization is zero");

  CrossSpectrum s;
  s.n_channels = n;
  s.n_freqs = len;
  s.data.assign(len, Eigen::MatrixXcd::Zero(n, n));

  std::vector<std::complex<double>> in(len), out(len);
  Eigen::MatrixXcd xhat(n, len);
  for (int p = 0; p < n_seg; ++p) {
    const int offset = p * hop;
    for (int ch = 0; ch < n; ++ch) {
      for (int t = 0; t < len; ++t) in[t] = x(ch, offset + t) * w[t];
      fft_forward(in, out);
      for (int f = 0; f < len; ++f) xhat(ch, f) = out[f] / double(len);
    }
    for (int f = 0; f < len; ++f)
      s.data[f].noalias() += xhat.col(f) * xhat.col(f).adjoint();
  }
  const double scale = double(len) / (double(n_seg) * wnorm);
  for (auto& m : s.data) m *= scale;
  return s;
}

double complexity(const CrossSpectrum& s) {
  const int n = s.n_channels;
  double acc = 0.0;
  for (int j = 0; j < n; ++j)
    for (int k = j; k < n; ++k)
      for (int f = 0; f < s.n_freqs; ++f) acc += std::norm(s.data[f](j, k));
  return 2.0 / (double(n) * (n + 1)) * acc;
}

namespace {

double projected_energy(const Eigen::MatrixXd& G, const CrossSpectrum& s_x) {
  if (s_x.n_channels != G.cols())
    throw DimensionMismatch("spectrum has " + std::to_string(s_x.n_channels) +
                            " channels, leadfield has " +
                            std::to_string(G.cols()) + " columns");
  const Eigen::MatrixXcd gc = G.cast<std::complex<double>>();
  double acc = 0.0;
  for (const auto& m : s_x.data) acc += (gc * m * gc.transpose()).squaredNorm();
  return acc;
}

}  // namespace

double snr_s(const Eigen::MatrixXd& G, const CrossSpectrum& s_x, double alpha) {
  if (alpha <= 0.0) throw Error("snr_s: alpha must be positive");
  const double num = projected_energy(G, s_x);
  if (num == 0.0) return -std::numeric_limits<double>::infinity();
  const double den = double(s_x.n_freqs) * G.rows() * std::pow(alpha, 4);
  return 10.0 * std::log10(num / den);
}

double predicted_snr_s(const Eigen::MatrixXd& G, const CrossSpectrum& s_x,
                       const Eigen::MatrixXd& x, double snr_x_db) {
  const double signal_energy = (G * x).squaredNorm();
  if (signal_energy == 0.0) throw ZeroSignal("predicted_snr_s: Gx is zero");
  const double num = projected_energy(G, s_x);
  if (num == 0.0) return -std::numeric_limits<double>::infinity();
  const double t_sq = double(x.cols()) * x.cols();
  const double den = double(s_x.n_freqs) * signal_energy * signal_energy;
  return 10.0 * std::log10(t_sq * G.rows() * num / den) + 2.0 * snr_x_db;
}

CrossSpectrum model_spectrum(const Eigen::MatrixXd& G, const CrossSpectrum& s_x,
                             double alpha) {
  if (s_x.n_channels != G.cols())
    throw DimensionMismatch("model_spectrum: channel/column mismatch");
  const Eigen::MatrixXcd gc = G.cast<std::complex<double>>();
  const int m = static_cast<int>(G.rows());
  CrossSpectrum out;
  out.n_channels = m;
  out.n_freqs = s_x.n_freqs;
  out.data.reserve(s_x.data.size());
  const Eigen::MatrixXcd noise =
      alpha * alpha * Eigen::MatrixXcd::Identity(m, m);
  for (const auto& sf : s_x.data) out.data.push_back(gc * sf * gc.transpose() + noise);
  return out;
}

}  // namespace spectreg::spectra
