#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <complex>

#include <Eigen/Dense>

#include "gaussib/spectra.hpp"
#include "test_helpers.hpp"

using namespace gaussib;
using Catch::Approx;

TEST_CASE("frequency grid midpoints") {
  const FrequencyGrid grid(8);
  REQUIRE(grid.size() == 8);
  for (int k = 0; k < 8; ++k) {
    REQUIRE(grid.frequency(k) == Approx(-0.5 + (k + 0.5) / 8.0));
    REQUIRE(grid.frequency(k) > -0.5);
    REQUIRE(grid.frequency(k) < 0.5);
    if (k > 0) REQUIRE(grid.frequency(k) > grid.frequency(k - 1));
    // symmetric about zero
    REQUIRE(grid.frequency(k) == Approx(-grid.frequency(7 - k)));
  }
  const std::vector<double> ones(8, 1.0);
  REQUIRE(grid.integrate(ones) == Approx(1.0));
}

TEST_CASE("snr spectrum of independent pair is zero") {
  const FrequencyGrid grid(64);
  const BivariateSpectra src(Spectrum::constant(grid, 1.0), Spectrum::constant(grid, 1.0),
                             CrossSpectrum::zero(grid));
  const Spectrum gamma = snr_spectrum(src);
  for (int k = 0; k < 64; ++k) REQUIRE(gamma[k] == 0.0);
}

TEST_CASE("snr spectrum of constant-correlation pair") {
  const FrequencyGrid grid(64);
  const double rho = 0.6;
  const BivariateSpectra src(
      Spectrum::constant(grid, 1.0), Spectrum::constant(grid, 1.0),
      CrossSpectrum(grid, std::vector<std::complex<double>>(64, rho)));
  const Spectrum gamma = snr_spectrum(src);
  const double expected = rho * rho / (1.0 - rho * rho);
  for (int k = 0; k < 64; ++k) REQUIRE(gamma[k] == Approx(expected).epsilon(1e-12));
}

TEST_CASE("snr spectrum equals |H|^2 S_X / S_W for an AR(1) pair") {
  const FrequencyGrid grid(512);
  const Spectrum s_x = testing::ar1_spectrum(grid, 0.9, 0.19);
  const BivariateSpectra src = testing::direct_observation(s_x, 1.0);
  const Spectrum gamma = snr_spectrum(src);
  const LinearForm lf = to_linear_form(src);
  for (int k = 0; k < grid.size(); ++k) {
    // S_W = 1 here, so Gamma = S_X
    REQUIRE(gamma[k] == Approx(s_x[k]).epsilon(1e-12));
    const double via_form = lf.h_mag_sq[k] * s_x[k] / lf.s_w[k];
    REQUIRE(gamma[k] == Approx(via_form).epsilon(1e-10));
  }
}

TEST_CASE("nonpositive marginal under nonzero cross is rejected") {
  const FrequencyGrid grid(16);
  std::vector<double> s_x(16, 1.0);
  s_x[3] = 0.0;
  REQUIRE_THROWS_AS(
      BivariateSpectra(Spectrum(grid, s_x), Spectrum::constant(grid, 1.0),
                       CrossSpectrum(grid, std::vector<std::complex<double>>(16, 0.5))),
      NonPositiveSpectrum);
}

TEST_CASE("indefinite joint PSD is rejected") {
  const FrequencyGrid grid(16);
  REQUIRE_THROWS_AS(
      BivariateSpectra(Spectrum::constant(grid, 1.0), Spectrum::constant(grid, 1.0),
                       CrossSpectrum(grid, std::vector<std::complex<double>>(16, 1.5))),
      ModelError);
}

TEST_CASE("deterministic band is flagged and capped") {
  const FrequencyGrid grid(32);
  std::vector<std::complex<double>> cross(32, 0.5);
  cross[7] = 1.0;  // |S_XY|^2 == S_X S_Y there
  cross[24] = 1.0;
  const BivariateSpectra src(Spectrum::constant(grid, 1.0), Spectrum::constant(grid, 1.0),
                             CrossSpectrum(grid, cross));
  const std::vector<bool> det = deterministic_band(src);
  const Spectrum gamma = snr_spectrum(src);
  for (int k = 0; k < 32; ++k) {
    if (k == 7 || k == 24) {
      REQUIRE(det[k]);
      REQUIRE(gamma[k] >= 1e11);
      REQUIRE(std::isfinite(gamma[k]));
    } else {
      REQUIRE_FALSE(det[k]);
    }
  }
}

TEST_CASE("linear form trivia") {
  const FrequencyGrid grid(32);
  SECTION("zero cross") {
    const BivariateSpectra src(Spectrum::constant(grid, 2.0), Spectrum::constant(grid, 3.0),
                               CrossSpectrum::zero(grid));
    const LinearForm lf = to_linear_form(src);
    for (int k = 0; k < 32; ++k) {
      REQUIRE(lf.h_mag_sq[k] == 0.0);
      REQUIRE(lf.s_w[k] == Approx(3.0));
    }
  }
  SECTION("scalar rho model") {
    const double rho = 0.8;
    const BivariateSpectra src(
        Spectrum::constant(grid, 1.0), Spectrum::constant(grid, 1.0),
        CrossSpectrum(grid, std::vector<std::complex<double>>(32, rho)));
    const LinearForm lf = to_linear_form(src);
    for (int k = 0; k < 32; ++k) {
      REQUIRE(lf.h_mag_sq[k] == Approx(rho * rho).epsilon(1e-14));
      REQUIRE(lf.s_w[k] == Approx(1.0 - rho * rho).epsilon(1e-14));
    }
  }
}

TEST_CASE("linear form round trip on random models") {
  const FrequencyGrid grid(64);
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    const BivariateSpectra src = testing::random_bivariate(grid, seed, seed % 3 == 0);
    const LinearForm lf = to_linear_form(src);
    const Spectrum gamma = snr_spectrum(src);
    for (int k = 0; k < grid.size(); ++k) {
      const double rebuilt = lf.h_mag_sq[k] * src.s_x()[k] + lf.s_w[k];
      REQUIRE(rebuilt == Approx(src.s_y()[k]).epsilon(1e-12));
      const double via_form = lf.h_mag_sq[k] * src.s_x()[k] / lf.s_w[k];
      REQUIRE(gamma[k] == Approx(via_form).epsilon(1e-10));
    }
  }
}

TEST_CASE("toeplitz covariance of white noise") {
  const FrequencyGrid grid(256);
  const Eigen::MatrixXd cov = toeplitz_covariance(Spectrum::constant(grid, 2.5), 4);
  for (int i = 0; i < 4; ++i)
    for (int j = 0; j < 4; ++j)
      REQUIRE(cov(i, j) == Approx(i == j ? 2.5 : 0.0).margin(1e-12));
}

TEST_CASE("toeplitz covariance matches the AR(1) closed form") {
  const FrequencyGrid grid(4096);
  // a = 0.5, unit process variance: R[k] = 0.5^|k|
  const Eigen::MatrixXd cov = toeplitz_covariance(testing::ar1_spectrum(grid, 0.5, 0.75), 3);
  const double expect[3][3] = {{1.0, 0.5, 0.25}, {0.5, 1.0, 0.5}, {0.25, 0.5, 1.0}};
  for (int i = 0; i < 3; ++i)
    for (int j = 0; j < 3; ++j) REQUIRE(cov(i, j) == Approx(expect[i][j]).epsilon(1e-10));
}

TEST_CASE("toeplitz covariance n=1 is the variance") {
  const FrequencyGrid grid(512);
  const Spectrum s = testing::random_smooth_spectrum(grid, 5);
  const Eigen::MatrixXd cov = toeplitz_covariance(s, 1);
  REQUIRE(cov(0, 0) == Approx(s.integral()).epsilon(1e-12));
}

TEST_CASE("toeplitz covariance is positive semidefinite") {
  const FrequencyGrid grid(256);
  for (std::uint64_t seed = 0; seed < 10; ++seed) {
    const Spectrum s = testing::random_smooth_spectrum(grid, 100 + seed);
    const Eigen::MatrixXd cov = toeplitz_covariance(s, 24);
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(cov);
    REQUIRE(es.eigenvalues().minCoeff() >= -1e-9 * es.eigenvalues().maxCoeff());
  }
}

TEST_CASE("entropy power") {
  const FrequencyGrid grid(4096);
  SECTION("flat spectrum") {
    REQUIRE(entropy_power(Spectrum::constant(grid, 2.25)).value == Approx(2.25).epsilon(1e-12));
  }
  SECTION("AR(1) entropy power is the innovation variance") {
    const EntropyPower pe = entropy_power(testing::ar1_spectrum(grid, 0.9, 0.19));
    REQUIRE_FALSE(pe.zero_band);
    REQUIRE(pe.value == Approx(0.19).epsilon(1e-12));
  }
  SECTION("two-level spectrum gives the geometric mean") {
    std::vector<double> vals(grid.size());
    for (int k = 0; k < grid.size(); ++k)
      vals[k] = std::abs(grid.frequency(k)) < 0.25 ? 2.0 : 0.5;
    REQUIRE(entropy_power(Spectrum(grid, vals)).value == Approx(1.0).epsilon(1e-12));
  }
  SECTION("zero band flag") {
    std::vector<double> vals(grid.size(), 1.0);
    vals[5] = 0.0;
    const EntropyPower pe = entropy_power(Spectrum(grid, vals));
    REQUIRE(pe.zero_band);
    REQUIRE(pe.value == 0.0);
  }
}

TEST_CASE("entropy power is at most the total power") {
  const FrequencyGrid grid(512);
  for (std::uint64_t seed = 0; seed < 10; ++seed) {
    const Spectrum s = testing::random_smooth_spectrum(grid, 300 + seed);
    REQUIRE(entropy_power(s).value <= s.integral() + 1e-12);
  }
  // equality iff constant
  REQUIRE(entropy_power(Spectrum::constant(grid, 1.7)).value ==
          Approx(Spectrum::constant(grid, 1.7).integral()).epsilon(1e-12));
}

TEST_CASE("synthesized white path has unit variance") {
  const FrequencyGrid grid(512);
  const auto path = synthesize_path(Spectrum::constant(grid, 1.0), 1 << 20, 7);
  double var = 0.0;
  for (double v : path) var += v * v;
  var /= static_cast<double>(path.size());
  REQUIRE(var == Approx(1.0).epsilon(0.01));
}

TEST_CASE("synthesized AR(1) path has the right lag-1 correlation") {
  const FrequencyGrid grid(512);
  const auto path = synthesize_path(testing::ar1_spectrum(grid, 0.9, 0.19), 1 << 20, 8);
  double v0 = 0.0, v1 = 0.0;
  for (std::size_t i = 0; i + 1 < path.size(); ++i) {
    v0 += path[i] * path[i];
    v1 += path[i] * path[i + 1];
  }
  REQUIRE(v1 / v0 == Approx(0.9).epsilon(0.01));
}

TEST_CASE("synthesis is deterministic per seed") {
  const FrequencyGrid grid(128);
  const Spectrum s = testing::ar1_spectrum(grid, 0.5, 1.0);
  const auto a = synthesize_path(s, 4096, 42);
  const auto b = synthesize_path(s, 4096, 42);
  REQUIRE(a == b);
  const auto c = synthesize_path(s, 4096, 43);
  REQUIRE(a != c);
}

TEST_CASE("operations preserve even symmetry") {
  const FrequencyGrid grid(64);
  const int n = grid.size();
  for (std::uint64_t seed = 0; seed < 5; ++seed) {
    const BivariateSpectra src = testing::random_bivariate(grid, 700 + seed, true);
    const Spectrum gamma = snr_spectrum(src);
    const LinearForm lf = to_linear_form(src);
    for (int k = 0; k < n; ++k) {
      REQUIRE(gamma[k] == Approx(gamma[n - 1 - k]).epsilon(1e-12));
      REQUIRE(lf.h_mag_sq[k] == Approx(lf.h_mag_sq[n - 1 - k]).epsilon(1e-12));
      REQUIRE(lf.s_w[k] == Approx(lf.s_w[n - 1 - k]).epsilon(1e-12));
      const std::complex<double> conj_pair = std::conj(src.s_xy()[n - 1 - k]);
      REQUIRE(src.s_xy()[k].real() == Approx(conj_pair.real()).margin(1e-12));
      REQUIRE(src.s_xy()[k].imag() == Approx(conj_pair.imag()).margin(1e-12));
    }
  }
}
