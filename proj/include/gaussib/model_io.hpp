#pragma once

#include <cmath>
#include <complex>
#include <fstream>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include <json.hpp>

#include "gaussib/errors.hpp"
#include "gaussib/spectra.hpp"

namespace gaussib {

/// Source-model JSON schema:
///   {
///     "grid_points": N,
///     "s_x": SPECTRUM, "s_y": SPECTRUM,
///     "s_xy": CROSS
///   }
/// SPECTRUM is {"type":"tabulated","values":[...]} or
///         {"type":"rational","ar":[a1,...],"ma":[b1,...],"variance":v}
/// with S(f) = v |1 + sum b_i e^{-j2pi f i}|^2 / |1 - sum a_i e^{-j2pi f i}|^2.
/// CROSS is a SPECTRUM (tabulated entries may be [re, im] pairs), or
///         {"type":"linear_form","h":SPECTRUM,"s_w":SPECTRUM}
/// describing Y = h * X + W with |H|^2 = h taken zero phase; then "s_y" must
/// be omitted (it is h*S_X + S_W).
namespace model_io {

using nlohmann::json;

namespace detail_io {

inline const json& require(const json& obj, const std::string& key, const std::string& path) {
  if (!obj.is_object() || !obj.contains(key))
    throw ConfigError("model: missing field " + path + "." + key);
  return obj.at(key);
}

inline std::vector<double> real_values(const json& arr, const std::string& path) {
  if (!arr.is_array()) throw ConfigError("model: " + path + " must be an array");
  std::vector<double> out;
  out.reserve(arr.size());
  for (const auto& v : arr) {
    if (!v.is_number()) throw ConfigError("model: " + path + " must hold numbers");
    out.push_back(v.get<double>());
  }
  return out;
}

inline std::vector<std::complex<double>> complex_values(const json& arr, const std::string& path) {
  if (!arr.is_array()) throw ConfigError("model: " + path + " must be an array");
  std::vector<std::complex<double>> out;
  out.reserve(arr.size());
  for (const auto& v : arr) {
    if (v.is_number()) {
      out.emplace_back(v.get<double>(), 0.0);
    } else if (v.is_array() && v.size() == 2 && v[0].is_number() && v[1].is_number()) {
      out.emplace_back(v[0].get<double>(), v[1].get<double>());
    } else {
      throw ConfigError("model: " + path + " entries must be numbers or [re, im] pairs");
    }
  }
  return out;
}

inline Spectrum parse_spectrum(const json& node, const FrequencyGrid& grid,
                               const std::string& path) {
  const std::string type = require(node, "type", path).get<std::string>();
  if (type == "tabulated") {
    std::vector<double> vals = real_values(require(node, "values", path), path + ".values");
    if (static_cast<int>(vals.size()) != grid.size())
      throw ConfigError("model: " + path + ".values length does not match grid_points");
    return Spectrum(grid, std::move(vals));
  }
  if (type == "rational") {
    std::vector<double> ar, ma;
    if (node.contains("ar")) ar = real_values(node.at("ar"), path + ".ar");
    if (node.contains("ma")) ma = real_values(node.at("ma"), path + ".ma");
    const double variance = require(node, "variance", path).get<double>();
    if (variance < 0.0) throw ConfigError("model: " + path + ".variance must be >= 0");
    std::vector<double> vals(grid.size());
    for (int k = 0; k < grid.size(); ++k) {
      const double f = grid.frequency(k);
      // numerator 1 + sum b_i e^{-j2pi f i}, denominator 1 - sum a_i e^{-j2pi f i}
      std::complex<double> num(1.0, 0.0), den(1.0, 0.0);
      for (std::size_t i = 0; i < ma.size(); ++i) {
        const double ang = -2.0 * M_PI * f * static_cast<double>(i + 1);
        num += ma[i] * std::complex<double>(std::cos(ang), std::sin(ang));
      }
      for (std::size_t i = 0; i < ar.size(); ++i) {
        const double ang = -2.0 * M_PI * f * static_cast<double>(i + 1);
        den -= ar[i] * std::complex<double>(std::cos(ang), std::sin(ang));
      }
      const double den_sq = std::norm(den);
      if (den_sq <= 0.0) throw ModelError("model: " + path + " has a pole on the unit circle");
      vals[k] = variance * std::norm(num) / den_sq;
    }
    return Spectrum(grid, std::move(vals));
  }
  throw ConfigError("model: " + path + ".type must be \"tabulated\" or \"rational\"");
}

}  // namespace detail_io

inline BivariateSpectra parse_source_model(const json& root,
                                           std::optional<int> grid_override = std::nullopt) {
  using detail_io::parse_spectrum;
  using detail_io::require;

  int grid_points = FrequencyGrid::kDefaultPoints;
  if (root.contains("grid_points")) {
    if (!root.at("grid_points").is_number_integer() || root.at("grid_points").get<int>() < 1)
      throw ConfigError("model: grid_points must be a positive integer");
    grid_points = root.at("grid_points").get<int>();
  }
  if (grid_override) grid_points = *grid_override;
  const FrequencyGrid grid(grid_points);

  const Spectrum s_x = parse_spectrum(require(root, "s_x", "model"), grid, "model.s_x");
  const json& cross = require(root, "s_xy", "model");
  const std::string cross_type = require(cross, "type", "model.s_xy").get<std::string>();

  if (cross_type == "linear_form") {
    if (root.contains("s_y"))
      throw ConfigError("model: s_y must be omitted when s_xy is a linear_form");
    const Spectrum h_sq = parse_spectrum(require(cross, "h", "model.s_xy"), grid, "model.s_xy.h");
    const Spectrum s_w =
        parse_spectrum(require(cross, "s_w", "model.s_xy"), grid, "model.s_xy.s_w");
    std::vector<double> s_y_vals(grid.size());
    std::vector<std::complex<double>> s_xy_vals(grid.size());
    for (int k = 0; k < grid.size(); ++k) {
      s_y_vals[k] = h_sq[k] * s_x[k] + s_w[k];
      s_xy_vals[k] = std::sqrt(h_sq[k]) * s_x[k];
    }
    return BivariateSpectra(s_x, Spectrum(grid, std::move(s_y_vals)),
                            CrossSpectrum(grid, std::move(s_xy_vals)));
  }

  const Spectrum s_y = parse_spectrum(require(root, "s_y", "model"), grid, "model.s_y");
  if (cross_type == "tabulated") {
    std::vector<std::complex<double>> vals = detail_io::complex_values(
        require(cross, "values", "model.s_xy"), "model.s_xy.values");
    if (static_cast<int>(vals.size()) != grid.size())
      throw ConfigError("model: model.s_xy.values length does not match grid_points");
    return BivariateSpectra(s_x, s_y, CrossSpectrum(grid, std::move(vals)));
  }
  if (cross_type == "rational") {
    const Spectrum mag_sq = parse_spectrum(cross, grid, "model.s_xy");
    std::vector<std::complex<double>> vals(grid.size());
    for (int k = 0; k < grid.size(); ++k) vals[k] = std::sqrt(mag_sq[k]);
    return BivariateSpectra(s_x, s_y, CrossSpectrum(grid, std::move(vals)));
  }
  throw ConfigError("model: model.s_xy.type must be tabulated, rational or linear_form");
}

inline BivariateSpectra load_source_model(const std::string& file_path,
                                          std::optional<int> grid_override = std::nullopt) {
  std::ifstream in(file_path);
  if (!in) throw ConfigError("model: cannot open file " + file_path);
  json root;
  try {
    in >> root;
  } catch (const json::parse_error& e) {
    throw ConfigError("model: malformed JSON in " + file_path + ": " + e.what());
  }
  return parse_source_model(root, grid_override);
}

}  // namespace model_io
}  // namespace gaussib
