#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <string>

#include "gaussib/model_io.hpp"
#include "gaussib/spectra.hpp"
#include "test_helpers.hpp"

using namespace gaussib;
using Catch::Approx;
using nlohmann::json;

TEST_CASE("rational spectrum evaluates the ARMA transfer function") {
  const json root = {
      {"grid_points", 512},
      {"s_x", {{"type", "rational"}, {"ar", {0.9}}, {"variance", 0.19}}},
      {"s_y", {{"type", "rational"}, {"variance", 2.0}}},
      {"s_xy", {{"type", "tabulated"}, {"values", json::array()}}}};
  json fixed = root;
  fixed["s_xy"]["values"] = std::vector<double>(512, 0.1);
  const BivariateSpectra src = model_io::parse_source_model(fixed);
  const Spectrum expect = testing::ar1_spectrum(src.grid(), 0.9, 0.19);
  for (int k = 0; k < src.grid().size(); ++k)
    REQUIRE(src.s_x()[k] == Approx(expect[k]).epsilon(1e-12));
}

TEST_CASE("linear form derives s_y and a real cross-spectrum") {
  const json root = {
      {"grid_points", 256},
      {"s_x", {{"type", "rational"}, {"variance", 3.0}}},
      {"s_xy",
       {{"type", "linear_form"},
        {"h", {{"type", "rational"}, {"variance", 1.0}}},
        {"s_w", {{"type", "rational"}, {"variance", 1.0}}}}}};
  const BivariateSpectra src = model_io::parse_source_model(root);
  const Spectrum gamma = snr_spectrum(src);
  for (int k = 0; k < src.grid().size(); ++k) {
    REQUIRE(src.s_y()[k] == Approx(4.0));
    REQUIRE(src.s_xy()[k].real() == Approx(3.0));
    REQUIRE(src.s_xy()[k].imag() == 0.0);
    REQUIRE(gamma[k] == Approx(3.0).epsilon(1e-12));
  }

  json bad = root;
  bad["s_y"] = {{"type", "rational"}, {"variance", 4.0}};
  REQUIRE_THROWS_AS(model_io::parse_source_model(bad), ConfigError);
}

TEST_CASE("tabulated cross-spectrum accepts [re, im] pairs") {
  const int n = 8;
  json values = json::array();
  for (int k = 0; k < n; ++k) {
    const double im = k < n / 2 ? 0.1 : -0.1;  // Hermitian: odd imaginary part
    values.push_back(json::array({0.3, im}));
  }
  const json root = {{"grid_points", n},
                     {"s_x", {{"type", "rational"}, {"variance", 1.0}}},
                     {"s_y", {{"type", "rational"}, {"variance", 1.0}}},
                     {"s_xy", {{"type", "tabulated"}, {"values", values}}}};
  const BivariateSpectra src = model_io::parse_source_model(root);
  REQUIRE(src.s_xy()[0] == std::complex<double>(0.3, 0.1));
  REQUIRE(src.s_xy()[n - 1] == std::complex<double>(0.3, -0.1));
}

TEST_CASE("grid override re-evaluates rational models") {
  const json root = {{"grid_points", 128},
                     {"s_x", {{"type", "rational"}, {"variance", 3.0}}},
                     {"s_xy",
                      {{"type", "linear_form"},
                       {"h", {{"type", "rational"}, {"variance", 1.0}}},
                       {"s_w", {{"type", "rational"}, {"variance", 1.0}}}}}};
  REQUIRE(model_io::parse_source_model(root).grid().size() == 128);
  REQUIRE(model_io::parse_source_model(root, 64).grid().size() == 64);
}

TEST_CASE("schema violations raise ConfigError with a field path") {
  json root = {{"grid_points", 16},
               {"s_x", {{"type", "rational"}, {"variance", 1.0}}},
               {"s_y", {{"type", "rational"}, {"variance", 1.0}}}};
  SECTION("missing cross-spectrum") {
    try {
      model_io::parse_source_model(root);
      FAIL("expected ConfigError");
    } catch (const ConfigError& e) {
      REQUIRE(std::string(e.what()).find("s_xy") != std::string::npos);
    }
  }
  SECTION("wrong tabulated length") {
    root["s_xy"] = {{"type", "tabulated"}, {"values", std::vector<double>(8, 0.0)}};
    REQUIRE_THROWS_AS(model_io::parse_source_model(root), ConfigError);
  }
  SECTION("unknown type") {
    root["s_xy"] = {{"type", "mystery"}};
    REQUIRE_THROWS_AS(model_io::parse_source_model(root), ConfigError);
  }
}

TEST_CASE("model invariant violations raise ModelError") {
  // |S_XY|^2 > S_X S_Y
  const json root = {{"grid_points", 16},
                     {"s_x", {{"type", "rational"}, {"variance", 1.0}}},
                     {"s_y", {{"type", "rational"}, {"variance", 1.0}}},
                     {"s_xy", {{"type", "tabulated"}, {"values", std::vector<double>(16, 2.0)}}}};
  REQUIRE_THROWS_AS(model_io::parse_source_model(root), ModelError);
}

TEST_CASE("malformed JSON files raise ConfigError") {
  REQUIRE_THROWS_AS(model_io::load_source_model("/nonexistent/path.json"), ConfigError);
}

TEST_CASE("shipped example models load and match their design values") {
  const std::string dir = GAUSSIB_MODELS_DIR;
  SECTION("flat") {
    const BivariateSpectra src = model_io::load_source_model(dir + "/flat.json");
    const Spectrum gamma = snr_spectrum(src);
    REQUIRE(src.grid().size() == 4096);
    for (int k = 0; k < gamma.size(); k += 511) REQUIRE(gamma[k] == Approx(3.0).epsilon(1e-12));
  }
  SECTION("ar1") {
    const BivariateSpectra src = model_io::load_source_model(dir + "/ar1.json");
    const Spectrum gamma = snr_spectrum(src);
    const Spectrum expect = testing::ar1_spectrum(src.grid(), 0.9, 0.19);
    for (int k = 0; k < gamma.size(); k += 255)
      REQUIRE(gamma[k] == Approx(expect[k]).epsilon(1e-10));
  }
  SECTION("halfband") {
    const BivariateSpectra src = model_io::load_source_model(dir + "/halfband.json");
    const Spectrum gamma = snr_spectrum(src);
    for (int k = 0; k < gamma.size(); ++k) {
      const double expect = std::abs(src.grid().frequency(k)) < 0.25 ? 15.0 : 0.0;
      REQUIRE(gamma[k] == Approx(expect).margin(1e-10));
    }
  }
}
