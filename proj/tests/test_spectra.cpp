#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <numbers>
#include <random>

#include "oracles.hpp"
#include "spectreg/forward.hpp"
#include "spectreg/mvar.hpp"
#include "spectreg/spectra.hpp"

using namespace spectreg;
using namespace spectreg::spectra;

namespace {

Eigen::MatrixXd random_series(int channels, int samples, std::mt19937_64& rng) {
  std::normal_distribution<double> normal;
  Eigen::MatrixXd x(channels, samples);
  for (int c = 0; c < samples; ++c)
    for (int r = 0; r < channels; ++r) x(r, c) = normal(rng);
  return x;
}

double rel_dev(const CrossSpectrum& a, const CrossSpectrum& b) {
  double num = 0.0, den = 0.0;
  for (int f = 0; f < a.n_freqs; ++f) {
    num += (a.data[f] - b.data[f]).squaredNorm();
    den += b.data[f].squaredNorm();
  }
  return std::sqrt(num / den);
}

}  // namespace

TEST_CASE("constant series, rectangular window, one segment") {
  WelchConfig cfg{16, 0.0, Window::rectangular};
  const auto s = welch(Eigen::MatrixXd::Ones(1, 16), cfg);
  CHECK(s.data[0](0, 0).real() == doctest::Approx(16.0));
  for (int f = 1; f < 16; ++f) CHECK(std::abs(s.data[f](0, 0)) < 1e-12);
}

TEST_CASE("zero input gives a zero spectrum") {
  WelchConfig cfg{8, 0.5, Window::hann};
  const auto s = welch(Eigen::MatrixXd::Zero(2, 64), cfg);
  for (const auto& m : s.data) CHECK(m.norm() == 0.0);
}

TEST_CASE("welch matches the naive DFT oracle") {
  std::mt19937_64 rng(5);
  for (Window w : {Window::rectangular, Window::hann}) {
    for (double overlap : {0.0, 0.5}) {
      WelchConfig cfg{32, overlap, w};
      const auto x = random_series(3, 200, rng);
      const auto fast = welch(x, cfg);
      const auto slow = oracles::naive_welch(x, cfg);
      CHECK(rel_dev(fast, slow) < 1e-10);
    }
  }
}

TEST_CASE("phase-lagged sinusoid pair against the oracle") {
  const int len = 64, bin = 5;
  Eigen::MatrixXd x(2, len);
  for (int t = 0; t < len; ++t) {
    const double phase = 2.0 * std::numbers::pi * bin * t / len;
    x(0, t) = std::cos(phase);
    x(1, t) = std::cos(phase - 0.7);
  }
  WelchConfig cfg{len, 0.0, Window::rectangular};
  const auto fast = welch(x, cfg);
  const auto slow = oracles::naive_welch(x, cfg);
  CHECK(rel_dev(fast, slow) < 1e-10);
  CHECK(std::arg(fast.data[bin](0, 1)) == doctest::Approx(0.7).epsilon(1e-9));
}

TEST_CASE("welch output is Hermitian with nonnegative real diagonals") {
  std::mt19937_64 rng(9);
  WelchConfig cfg{64, 0.5, Window::hann};
  const auto s = welch(random_series(4, 1000, rng), cfg);
  for (const auto& m : s.data) {
    CHECK((m - m.adjoint()).norm() / m.norm() < 1e-12);
    for (int d = 0; d < 4; ++d) {
      CHECK(std::abs(m(d, d).imag()) < 1e-12 * m.norm());
      CHECK(m(d, d).real() >= -1e-12 * m.norm());
    }
  }
}

TEST_CASE("welch input validation") {
  WelchConfig cfg{64, 0.5, Window::hann};
  CHECK_THROWS_AS(welch(Eigen::MatrixXd::Zero(2, 32), cfg), SegmentTooLong);
  WelchConfig bad{48, 0.5, Window::hann};
  CHECK_THROWS(welch(Eigen::MatrixXd::Zero(2, 64), bad));
}

TEST_CASE("complexity closed-form cases") {
  CrossSpectrum s;
  s.n_channels = 1;
  s.n_freqs = 1;
  s.data = {Eigen::MatrixXcd::Zero(1, 1)};
  CHECK(complexity(s) == 0.0);
  s.data[0](0, 0) = 2.0;
  CHECK(complexity(s) == doctest::Approx(4.0));
}

TEST_CASE("complexity is invariant under channel permutation") {
  std::mt19937_64 rng(15);
  WelchConfig cfg{32, 0.5, Window::hann};
  Eigen::MatrixXd x = random_series(3, 500, rng);
  const double c1 = complexity(welch(x, cfg));
  Eigen::MatrixXd perm(3, 500);
  perm << x.row(2), x.row(0), x.row(1);
  CHECK(complexity(welch(perm, cfg)) == doctest::Approx(c1).epsilon(1e-12));
}

TEST_CASE("complexity grows with MVAR richness on average") {
  std::mt19937_64 rng(23);
  WelchConfig cfg{256, 0.5, Window::hann};
  double lo = 0.0, hi = 0.0;
  const int reps = 4;
  for (int k = 0; k < reps; ++k) {
    lo += complexity(welch(
        mvar::generate_accepted(0.1, 5, 3000, rng, 500).pair.samples, cfg));
    hi += complexity(welch(
        mvar::generate_accepted(0.9, 5, 3000, rng, 500).pair.samples, cfg));
  }
  CHECK(hi / reps > lo / reps);
}

TEST_CASE("snr_s closed-form cases and oracle") {
  CrossSpectrum s;
  s.n_channels = 1;
  s.n_freqs = 1;
  s.data = {Eigen::MatrixXcd::Zero(1, 1)};
  const Eigen::MatrixXd g = Eigen::MatrixXd::Ones(1, 1);
  CHECK(std::isinf(snr_s(g, s, 0.5)));
  s.data[0](0, 0) = 0.25;  // alpha^2 with alpha = 0.5
  CHECK(snr_s(g, s, 0.5) == doctest::Approx(0.0).epsilon(1e-12));

  // brute-force check on a random small case
  std::mt19937_64 rng(31);
  WelchConfig cfg{16, 0.0, Window::rectangular};
  const auto x = random_series(3, 64, rng);
  const auto sx = welch(x, cfg);
  const Eigen::MatrixXd g2 = Eigen::MatrixXd::Random(4, 3);
  const double alpha = 0.7;
  double num = 0.0;
  for (int f = 0; f < sx.n_freqs; ++f) {
    const Eigen::MatrixXcd proj =
        g2.cast<std::complex<double>>() * sx.data[f] *
        g2.cast<std::complex<double>>().transpose();
    for (int a = 0; a < 4; ++a)
      for (int b = 0; b < 4; ++b) num += std::norm(proj(a, b));
  }
  const double expected =
      10.0 * std::log10(num / (16.0 * 4.0 * std::pow(alpha, 4.0)));
  CHECK(snr_s(g2, sx, alpha) == doctest::Approx(expected).epsilon(1e-12));
}

TEST_CASE("snr_s falls 40 dB per decade of alpha") {
  std::mt19937_64 rng(33);
  WelchConfig cfg{16, 0.0, Window::rectangular};
  const auto sx = welch(random_series(2, 64, rng), cfg);
  const Eigen::MatrixXd g = Eigen::MatrixXd::Random(3, 2);
  CHECK(snr_s(g, sx, 0.1) - snr_s(g, sx, 1.0) == doctest::Approx(40.0).epsilon(1e-9));
}

TEST_CASE("predicted_snr_s equals snr_s with the calibrated alpha") {
  std::mt19937_64 rng(37);
  WelchConfig cfg{32, 0.5, Window::hann};
  for (int k = 0; k < 100; ++k) {
    const int m = 2 + int(rng() % 4), n = 2 + int(rng() % 3);
    const auto x = random_series(n, 128, rng);
    const auto sx = welch(x, cfg);
    const Eigen::MatrixXd g = Eigen::MatrixXd::Random(m, n);
    std::uniform_real_distribution<double> snr_dist(-25.0, 10.0);
    const double target = snr_dist(rng);
    const double alpha = forward::alpha_for_snr(g * x, target);
    CHECK(std::abs(predicted_snr_s(g, sx, x, target) - snr_s(g, sx, alpha)) < 1e-9);
  }
}

TEST_CASE("predicted_snr_s shifts by 2x the time-domain SNR") {
  std::mt19937_64 rng(41);
  WelchConfig cfg{32, 0.5, Window::hann};
  const auto x = random_series(2, 128, rng);
  const auto sx = welch(x, cfg);
  const Eigen::MatrixXd g = Eigen::MatrixXd::Random(3, 2);
  CHECK(predicted_snr_s(g, sx, x, 10.0) - predicted_snr_s(g, sx, x, 0.0) ==
        doctest::Approx(20.0).epsilon(1e-12));
}

TEST_CASE("model_spectrum limits") {
  std::mt19937_64 rng(43);
  WelchConfig cfg{16, 0.0, Window::rectangular};
  const auto sx = welch(random_series(2, 64, rng), cfg);

  CrossSpectrum zero;
  zero.n_channels = 2;
  zero.n_freqs = 16;
  zero.data.assign(16, Eigen::MatrixXcd::Zero(2, 2));
  const Eigen::MatrixXd g = Eigen::MatrixXd::Random(3, 2);
  const auto noise_only = model_spectrum(g, zero, 0.5);
  for (const auto& m : noise_only.data)
    CHECK((m - 0.25 * Eigen::MatrixXcd::Identity(3, 3)).norm() < 1e-15);

  const auto ident = model_spectrum(Eigen::MatrixXd::Identity(2, 2), sx, 0.0);
  CHECK(rel_dev(ident, sx) < 1e-15);
}

TEST_CASE("sensor spectrum approaches the model spectrum for long series") {
  std::mt19937_64 rng(47);
  WelchConfig cfg{256, 0.5, Window::hann};
  const auto gen = mvar::generate_accepted(0.5, 5, 10000, rng, 1000);
  const Eigen::MatrixXd g = Eigen::MatrixXd::Random(4, 2);
  const Eigen::MatrixXd y_clean = g * gen.pair.samples;
  const double alpha = forward::alpha_for_snr(y_clean, 0.0);
  std::normal_distribution<double> normal(0.0, alpha);
  Eigen::MatrixXd y = y_clean;
  for (int c = 0; c < y.cols(); ++c)
    for (int r = 0; r < y.rows(); ++r) y(r, c) += normal(rng);
  const auto measured = welch(y, cfg);
  const auto modeled = model_spectrum(g, welch(gen.pair.samples, cfg), alpha);
  CHECK(rel_dev(measured, modeled) < 0.15);
}
