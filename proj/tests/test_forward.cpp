#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cstdio>
#include <fstream>
#include <random>

#include "spectreg/forward.hpp"
#include "spectreg/inverse.hpp"

using namespace spectreg;
using namespace spectreg::forward;

namespace {

struct TempFile {
  std::string path;
  explicit TempFile(const std::string& name) : path("/tmp/spectreg_" + name) {}
  ~TempFile() { std::remove(path.c_str()); }
};

}  // namespace

TEST_CASE("synth_leadfield is deterministic and has nonzero columns") {
  std::mt19937_64 r1(5), r2(5);
  const auto a = synth_leadfield(40, 80, r1);
  const auto b = synth_leadfield(40, 80, r2);
  CHECK(a.G == b.G);
  CHECK(a.G.colwise().norm().minCoeff() > 0.0);
  CHECK(a.sensor_positions.rows() == 40);
  CHECK(a.source_positions.rows() == 80);
}

TEST_CASE("synth_leadfield at MEG scale is ill-conditioned") {
  std::mt19937_64 rng(1);
  const auto lf = synth_leadfield(102, 274, rng);
  Eigen::BDCSVD<Eigen::MatrixXd> svd(lf.G);
  const auto& s = svd.singularValues();
  CHECK(s(0) / s(s.size() - 1) > 1e3);
}

TEST_CASE("synth_leadfield rejects degenerate dimensions") {
  std::mt19937_64 rng(1);
  CHECK_THROWS_AS(synth_leadfield(1, 10, rng), BadDimensions);
}

TEST_CASE("leadfield save/load round-trip") {
  std::mt19937_64 rng(2);
  Leadfield lf;
  lf.G = Eigen::MatrixXd::Random(3, 4);
  lf.sensor_positions = Eigen::MatrixX3d::Random(3, 3);
  lf.source_positions = Eigen::MatrixX3d::Random(4, 3);
  TempFile tmp("lf_roundtrip.txt");
  save_leadfield(lf, tmp.path);
  const auto back = load_leadfield(tmp.path);
  CHECK((back.G - lf.G).cwiseAbs().maxCoeff() == 0.0);
  CHECK((back.sensor_positions - lf.sensor_positions).cwiseAbs().maxCoeff() == 0.0);
  CHECK((back.source_positions - lf.source_positions).cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("leadfield loader reports malformed files") {
  TempFile tmp("lf_bad.txt");
  {
    std::ofstream out(tmp.path);
    out << "LEADFIELD v1 3 2\n1 2\n3 4\n";  // claims 3 rows, has 2
  }
  CHECK_THROWS_AS(load_leadfield(tmp.path), ParseError);
  {
    std::ofstream out(tmp.path);
    out << "LEADFIELD v1 2 2\n1 2\n3 oops\n";
  }
  try {
    load_leadfield(tmp.path);
    FAIL("expected ParseError");
  } catch (const ParseError& e) {
    CHECK(std::string(e.what()).find("oops") != std::string::npos);
  }
}

TEST_CASE("place_pair picks the only feasible pair") {
  Leadfield lf;
  lf.G = Eigen::MatrixXd::Ones(3, 2);
  lf.sensor_positions = Eigen::MatrixX3d::Zero(3, 3);
  lf.source_positions = Eigen::MatrixX3d::Zero(2, 3);
  lf.source_positions(1, 0) = 0.10;
  std::mt19937_64 rng(3);
  CHECK(place_pair(lf, rng) == std::pair<int, int>(0, 1));

  lf.source_positions(1, 0) = 0.01;  // too close
  CHECK_THROWS_AS(place_pair(lf, rng), NoFeasiblePair);
}

TEST_CASE("place_pair output always satisfies the constraints") {
  std::mt19937_64 rng(4);
  const auto lf = synth_leadfield(30, 274, rng);
  const Eigen::VectorXd norms = lf.G.colwise().norm();
  for (int k = 0; k < 20; ++k) {
    const auto [i, j] = place_pair(lf, rng);
    const double ratio = norms(i) / norms(j);
    CHECK(ratio >= 1.0 / 1.1);
    CHECK(ratio <= 1.1);
    CHECK((lf.source_positions.row(i) - lf.source_positions.row(j)).norm() > 0.07);
  }
}

TEST_CASE("embed_sources places the pair and zeros the rest") {
  mvar::SourcePair pair;
  pair.samples = Eigen::Matrix2Xd::Random(2, 50);
  const auto cfg = embed_sources(pair, 0, 2, 4);
  CHECK(cfg.full_x.row(1).isZero());
  CHECK(cfg.full_x.row(3).isZero());
  CHECK(cfg.full_x.row(0) == pair.samples.row(0));
  CHECK(cfg.full_x.row(2) == pair.samples.row(1));
  CHECK(cfg.full_x.squaredNorm() == doctest::Approx(pair.samples.squaredNorm()));
  CHECK_THROWS_AS(embed_sources(pair, 0, 4, 4), IndexOutOfRange);
  CHECK_THROWS_AS(embed_sources(pair, 1, 1, 4), IndexOutOfRange);
}

TEST_CASE("project matches a triple-loop multiply") {
  std::mt19937_64 rng(6);
  Leadfield lf;
  lf.G = Eigen::MatrixXd::Random(7, 5);
  lf.sensor_positions = Eigen::MatrixX3d::Zero(7, 3);
  lf.source_positions = Eigen::MatrixX3d::Zero(5, 3);
  const Eigen::MatrixXd x = Eigen::MatrixXd::Random(5, 11);
  const Eigen::MatrixXd y = project(lf, x);
  for (int r = 0; r < 7; ++r)
    for (int t = 0; t < 11; ++t) {
      double acc = 0.0;
      for (int c = 0; c < 5; ++c) acc += lf.G(r, c) * x(c, t);
      CHECK(y(r, t) == doctest::Approx(acc).epsilon(1e-12));
    }
  CHECK_THROWS_AS(project(lf, Eigen::MatrixXd::Zero(4, 11)), DimensionMismatch);
}

TEST_CASE("projection is linear") {
  std::mt19937_64 rng(8);
  const auto lf = synth_leadfield(10, 20, rng);
  const Eigen::MatrixXd x1 = Eigen::MatrixXd::Random(20, 30);
  const Eigen::MatrixXd x2 = Eigen::MatrixXd::Random(20, 30);
  const Eigen::MatrixXd lhs = project(lf, 2.0 * x1 - 3.0 * x2);
  const Eigen::MatrixXd rhs = 2.0 * project(lf, x1) - 3.0 * project(lf, x2);
  CHECK((lhs - rhs).norm() / rhs.norm() < 1e-12);
}

TEST_CASE("alpha_for_snr closed-form cases") {
  Eigen::MatrixXd y = Eigen::MatrixXd::Ones(4, 25);  // energy = M*T
  CHECK(alpha_for_snr(y, 0.0) == doctest::Approx(1.0));
  CHECK(alpha_for_snr(y, 20.0) == doctest::Approx(0.1));
  CHECK_THROWS_AS(alpha_for_snr(Eigen::MatrixXd::Zero(4, 25), 0.0), ZeroSignal);
}

TEST_CASE("snr_x basic values and sentinel") {
  const Eigen::MatrixXd a = Eigen::MatrixXd::Ones(2, 8);
  CHECK(snr_x(a, a) == doctest::Approx(0.0));
  CHECK(snr_x(10.0 * a, a) == doctest::Approx(20.0));
  CHECK(std::isinf(snr_x(0.0 * a, a)));
  CHECK(snr_x(0.0 * a, a) < 0.0);
  CHECK_THROWS_AS(snr_x(a, 0.0 * a), ZeroSignal);
}

TEST_CASE("calibrated noise realizes the target SNR") {
  std::mt19937_64 rng(10);
  const Eigen::MatrixXd y_clean = Eigen::MatrixXd::Random(6, 10000);
  std::normal_distribution<double> normal;
  for (double target : {-20.0, -5.0, 5.0}) {
    const double alpha = alpha_for_snr(y_clean, target);
    double mean_realized = 0.0;
    const int draws = 50;
    for (int k = 0; k < draws; ++k) {
      Eigen::MatrixXd noise(6, 10000);
      for (int c = 0; c < noise.cols(); ++c)
        for (int r = 0; r < noise.rows(); ++r) noise(r, c) = alpha * normal(rng);
      mean_realized += snr_x(y_clean, noise);
    }
    CHECK(std::abs(mean_realized / draws - target) < 0.1);
  }
}
