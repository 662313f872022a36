#include <catch2/catch_amalgamated.hpp>

#include <cmath>

#include "gaussib/waterfill.hpp"
#include "test_helpers.hpp"

using namespace gaussib;
using Catch::Approx;

namespace {

Spectrum flat_gamma(const FrequencyGrid& grid, double level) {
  return Spectrum::constant(grid, level);
}

Spectrum half_band_gamma(const FrequencyGrid& grid, double level) {
  std::vector<double> vals(grid.size());
  for (int k = 0; k < grid.size(); ++k)
    vals[k] = std::abs(grid.frequency(k)) < 0.25 ? level : 0.0;
  return Spectrum(grid, std::move(vals));
}

}  // namespace

TEST_CASE("flat-spectrum water level matches the closed form") {
  const FrequencyGrid grid(4096);
  // theta = gamma 2^(-2C) for flat spectra
  REQUIRE(solve_theta(flat_gamma(grid, 3.0), 1.0) == Approx(0.75).epsilon(1e-9));
  REQUIRE(solve_theta(flat_gamma(grid, 5.0), 2.0) == Approx(5.0 / 16.0).epsilon(1e-9));
}

TEST_CASE("zero target returns the spectrum maximum") {
  const FrequencyGrid grid(256);
  const Spectrum gamma = testing::random_smooth_spectrum(grid, 3);
  REQUIRE(solve_theta(gamma, 0.0) == gamma.max_value());
}

TEST_CASE("half-band water level matches the analytic formula") {
  const FrequencyGrid grid(4096);
  // C = (1/4) log2(15/theta) = 1  =>  theta = 15/16
  REQUIRE(solve_theta(half_band_gamma(grid, 15.0), 1.0) == Approx(15.0 / 16.0).epsilon(1e-9));
}

TEST_CASE("flat-spectrum rate matches the scalar closed form") {
  const FrequencyGrid grid(4096);
  const WaterFillSolution sol = ib_rate(flat_gamma(grid, 3.0), 1.0);
  REQUIRE(sol.theta == Approx(0.75).epsilon(1e-9));
  // rho1^2 = gamma/(1+gamma) = 0.75, rho2^2 = 1 - 2^-2 = 0.75
  REQUIRE(sol.rate_bits == Approx(scalar_ib(0.75, 1.0)).margin(1e-9));
  REQUIRE(sol.bottleneck_bits == Approx(1.0).margin(1e-10));
}

TEST_CASE("zero bottleneck carries zero rate") {
  const FrequencyGrid grid(512);
  const WaterFillSolution sol = ib_rate(testing::random_smooth_spectrum(grid, 9), 0.0);
  REQUIRE(sol.rate_bits == 0.0);
  REQUIRE(sol.bottleneck_bits == 0.0);
}

TEST_CASE("half-band rate matches the analytic evaluation") {
  const FrequencyGrid grid(4096);
  const WaterFillSolution sol = ib_rate(half_band_gamma(grid, 15.0), 1.0);
  // R = (1/4) log2(16 / (1 + 15/16))
  REQUIRE(sol.rate_bits == Approx(0.25 * std::log2(16.0 / (1.0 + 15.0 / 16.0))).margin(1e-8));
}

TEST_CASE("distortion spectrum and active mask") {
  const FrequencyGrid grid(1024);
  const Spectrum gamma = testing::random_smooth_spectrum(grid, 17, 4.0);
  const WaterFillSolution sol = ib_rate(gamma, 0.8);
  double r_via_d = 0.0;
  for (int k = 0; k < grid.size(); ++k) {
    REQUIRE(sol.d_theta[k] == std::min(sol.theta, gamma[k]));
    REQUIRE(sol.active[k] == (gamma[k] > sol.theta));
    r_via_d += std::log2((1.0 + gamma[k]) / (1.0 + sol.d_theta[k]));
  }
  r_via_d *= 0.5 / grid.size();
  // equivalent D_theta form of the rate
  REQUIRE(sol.rate_bits == Approx(r_via_d).margin(1e-12));
  REQUIRE(sol.rate_bits <= sol.bottleneck_bits + 1e-12);
}

TEST_CASE("scalar IB closed form") {
  REQUIRE(scalar_ib(1.0, 1.0) == Approx(1.0).margin(1e-12));
  REQUIRE(scalar_ib(0.3, 0.0) == 0.0);
  REQUIRE(scalar_ib(0.5, 2.0) == Approx(-0.5 * std::log2(1.0 - 0.46875)).margin(1e-12));
}

TEST_CASE("vector IB on equal eigenvalues reduces to the flat case") {
  const VectorIbSolution sol = vector_ib(VectorIbInstance{{3.0, 3.0}}, 1.0);
  REQUIRE(sol.rate_bits == Approx(scalar_ib(0.75, 1.0)).margin(1e-10));
  REQUIRE(sol.theta == Approx(0.75).epsilon(1e-9));
}

TEST_CASE("vector IB with a single active component") {
  const VectorIbSolution sol = vector_ib(VectorIbInstance{{3.0, 0.0}}, 0.5);
  // (1/4) log2(3/theta) = 1/2  =>  theta = 3/4
  REQUIRE(sol.theta == Approx(0.75).epsilon(1e-9));
  REQUIRE(sol.rate_bits == Approx(0.25 * std::log2(4.0 / 1.75)).margin(1e-10));
  REQUIRE(sol.active[0]);
  REQUIRE_FALSE(sol.active[1]);
}

TEST_CASE("all-zero eigenvalues are unachievable") {
  REQUIRE_THROWS_AS(vector_ib(VectorIbInstance{{0.0, 0.0, 0.0}}, 0.5), UnachievableRate);
  const FrequencyGrid grid(64);
  REQUIRE_THROWS_AS(ib_rate(Spectrum::constant(grid, 0.0), 1.0), UnachievableRate);
}

TEST_CASE("vector IB is consistent with the scalar closed form") {
  for (double gamma : {0.5, 1.0, 3.0, 10.0}) {
    for (double c : {0.25, 1.0, 2.5}) {
      const VectorIbSolution sol = vector_ib(VectorIbInstance{{gamma, gamma, gamma}}, c);
      REQUIRE(sol.rate_bits == Approx(scalar_ib(gamma / (1.0 + gamma), c)).margin(1e-10));
    }
  }
}

TEST_CASE("rate is nondecreasing and concave in the bottleneck") {
  const FrequencyGrid grid(1024);
  const Spectrum gamma = snr_spectrum(testing::random_bivariate(grid, 77));
  std::vector<double> cs, rs;
  for (int i = 0; i <= 24; ++i) cs.push_back(0.25 * i);
  for (double c : cs) rs.push_back(ib_rate(gamma, c).rate_bits);
  double prev_slope = std::numeric_limits<double>::infinity();
  for (std::size_t i = 1; i < cs.size(); ++i) {
    REQUIRE(rs[i] >= rs[i - 1] - 1e-9);
    const double slope = (rs[i] - rs[i - 1]) / (cs[i] - cs[i - 1]);
    REQUIRE(slope <= prev_slope + 1e-9);
    prev_slope = slope;
    REQUIRE(rs[i] <= cs[i] + 1e-9);
  }
}

TEST_CASE("large bottleneck approaches the mutual information rate") {
  const FrequencyGrid grid(2048);
  const Spectrum gamma =
      snr_spectrum(testing::direct_observation(testing::ar1_spectrum(grid, 0.9, 0.19), 1.0));
  const WaterFillSolution sol = ib_rate(gamma, 30.0);
  REQUIRE(sol.rate_bits == Approx(mi_rate_bits(gamma)).margin(1e-6));
}
