#pragma once

#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include <json.hpp>

#include "gaussib/analysis.hpp"
#include "gaussib/channel.hpp"
#include "gaussib/compound.hpp"
#include "gaussib/dpcm.hpp"
#include "gaussib/errors.hpp"
#include "gaussib/model_io.hpp"
#include "gaussib/pf.hpp"
#include "gaussib/spectra.hpp"
#include "gaussib/waterfill.hpp"

namespace gaussib::cli {

using nlohmann::json;

constexpr int kSchemaVersion = 1;

struct RunConfig {
  std::string command;
  std::string model_path;   ///< source model, or PF instance for `pf`
  std::string output_path;  ///< empty writes to stdout
  std::optional<int> grid_points;
  double c = 1.0;
  double c1 = 1.0;
  double c2 = 1.0;
  int order = 64;
  std::uint64_t length = 1ULL << 20;
  std::uint64_t seed = 0;
  std::vector<int> sizes;
  std::vector<double> c_values;
  int restarts = 16;
  int saddle_members = 0;  ///< comib: run saddle_check with this family size
  int taps = 0;            ///< filters: also realize FIR taps
  int delay = 0;
  std::string taps_output;  ///< filters: taps JSON path (stdout if empty)
  std::string trace_csv;    ///< simulate: full loop-trace dump
};

namespace detail_cli {

/// Atomic write: temp file in the target directory, then rename.
inline void write_text(const std::string& path, const std::string& text) {
  if (path.empty()) {
    std::cout << text;
    return;
  }
  const std::filesystem::path target(path);
  const std::filesystem::path tmp = target.string() + ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw ConfigError("cannot open output file " + tmp.string());
    out << text;
  }
  std::filesystem::rename(tmp, target);
}

inline std::string format_double(double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

inline std::string emit_json(json j) {
  j["schema_version"] = kSchemaVersion;
  return j.dump(2) + "\n";
}

inline BivariateSpectra load_model(const RunConfig& cfg) {
  if (cfg.model_path.empty()) throw ConfigError("command requires --model");
  return model_io::load_source_model(cfg.model_path, cfg.grid_points);
}

inline json spectrum_stats(const Spectrum& s) {
  return json{{"min", s.values().empty() ? 0.0 : *std::min_element(s.values().begin(),
                                                                   s.values().end())},
              {"max", s.max_value()},
              {"integral", s.integral()}};
}

}  // namespace detail_cli

inline json run_ib_rate(const RunConfig& cfg) {
  const BivariateSpectra src = detail_cli::load_model(cfg);
  const Spectrum gamma = snr_spectrum(src);
  const WaterFillSolution sol = ib_rate(gamma, cfg.c);
  std::size_t active = 0;
  for (bool b : sol.active) active += b ? 1 : 0;
  const std::vector<bool> det = deterministic_band(src);
  std::size_t flagged = 0;
  for (bool b : det) flagged += b ? 1 : 0;
  return json{{"command", "ib-rate"},
              {"grid_points", src.grid().size()},
              {"c_target_bits", cfg.c},
              {"theta", sol.theta},
              {"bottleneck_bits", sol.bottleneck_bits},
              {"rate_bits", sol.rate_bits},
              {"active_fraction", static_cast<double>(active) / sol.active.size()},
              {"deterministic_points", flagged},
              {"snr_spectrum", detail_cli::spectrum_stats(gamma)}};
}

inline std::string run_sweep_csv(const RunConfig& cfg) {
  const BivariateSpectra src = detail_cli::load_model(cfg);
  const Spectrum gamma = snr_spectrum(src);
  std::string csv = "C_bits,theta,R_bits\n";
  for (double c : cfg.c_values) {
    const WaterFillSolution sol = ib_rate(gamma, c);
    csv += detail_cli::format_double(c) + "," + detail_cli::format_double(sol.theta) + "," +
           detail_cli::format_double(sol.rate_bits) + "\n";
  }
  return csv;
}

inline std::pair<std::string, json> run_filters(const RunConfig& cfg) {
  const BivariateSpectra src = detail_cli::load_model(cfg);
  const ForwardChannel ch = design_forward_channel(src, cfg.c);
  std::string csv = "f,omega_sq,g_sq,h1_sq\n";
  for (int k = 0; k < src.grid().size(); ++k) {
    csv += detail_cli::format_double(src.grid().frequency(k)) + "," +
           detail_cli::format_double(ch.omega_sq[k]) + "," +
           detail_cli::format_double(ch.g_sq[k]) + "," +
           detail_cli::format_double(ch.h1_sq[k]) + "\n";
  }
  json taps_json;
  if (cfg.taps > 0) {
    const FirRealization fir = realize_fir(ch, cfg.taps, cfg.delay);
    auto leg = [](const FirFilter& f) {
      return json{{"taps", f.taps}, {"delay", f.delay}, {"linf_error", f.linf_error}};
    };
    taps_json = json{{"command", "filters"},
                     {"grid_points", src.grid().size()},
                     {"theta", ch.theta},
                     {"whitening", leg(fir.whitening)},
                     {"shaping", leg(fir.shaping)},
                     {"prefilter", leg(fir.prefilter)},
                     {"postfilter", leg(fir.postfilter)},
                     {"total_delay", fir.total_delay}};
  }
  return {csv, taps_json};
}

inline json run_audit(const RunConfig& cfg) {
  const BivariateSpectra src = detail_cli::load_model(cfg);
  const ForwardChannel ch = design_forward_channel(src, cfg.c);
  const AuditReport audit = audit_rates(ch, src);
  // Wiener identity |G|^2 = |S_XY|^2/(S_X S_Y) over the grid.
  double wiener_err = 0.0;
  for (int k = 0; k < src.grid().size(); ++k) {
    const double prod = src.s_x()[k] * src.s_y()[k];
    if (prod <= 0.0) continue;
    wiener_err = std::max(wiener_err, std::abs(ch.g_sq[k] - std::norm(src.s_xy()[k]) / prod));
  }
  return json{{"command", "audit"},
              {"grid_points", src.grid().size()},
              {"c_target_bits", cfg.c},
              {"theta", ch.theta},
              {"c_achieved_bits", audit.c_bits},
              {"r_achieved_bits", audit.r_bits},
              {"r_target_bits", ch.solution.rate_bits},
              {"wiener_identity_max_error", wiener_err}};
}

inline json run_simulate(const RunConfig& cfg) {
  const BivariateSpectra src = detail_cli::load_model(cfg);
  LoopTrace trace;
  const EndToEndReport rep =
      end_to_end_rates(src, cfg.c, cfg.order, cfg.length, cfg.seed,
                       cfg.trace_csv.empty() ? nullptr : &trace);
  if (!cfg.trace_csv.empty()) {
    std::string csv = "n,u,u_hat,w,q,v,n_noise\n";
    for (std::size_t i = 0; i < trace.u.size(); ++i) {
      csv += std::to_string(i) + "," + detail_cli::format_double(trace.u[i]) + "," +
             detail_cli::format_double(trace.u_hat[i]) + "," +
             detail_cli::format_double(trace.w[i]) + "," +
             detail_cli::format_double(trace.q[i]) + "," +
             detail_cli::format_double(trace.v[i]) + "," +
             detail_cli::format_double(trace.n_noise[i]) + "\n";
    }
    detail_cli::write_text(cfg.trace_csv, csv);
  }
  return json{{"command", "simulate"},
              {"grid_points", src.grid().size()},
              {"c_target_bits", rep.c_target_bits},
              {"r_target_bits", rep.r_target_bits},
              {"theta", rep.theta},
              {"c_hat_bits", rep.c_hat_bits},
              {"c_se_bits", rep.c_se_bits},
              {"r_hat_bits", rep.r_hat_bits},
              {"r_hat_method", "spectral-audit-of-realized-chain"},
              {"r_se_bits", rep.r_se_bits},
              {"sigma_w_sq", rep.sigma_w_sq},
              {"sigma_l_sq", rep.predictor.sigma_l_sq},
              {"sigma_2l_sq", rep.sigma_2l_sq},
              {"predictor_gap", rep.predictor_gap},
              {"under_modeled", rep.under_modeled},
              {"fir_linf_error", rep.fir_linf_error},
              {"order", cfg.order},
              {"length", cfg.length},
              {"seed", cfg.seed},
              {"samples_used", rep.samples_used}};
}

inline json run_comib(const RunConfig& cfg) {
  const FrequencyGrid grid(cfg.grid_points.value_or(FrequencyGrid::kDefaultPoints));
  const CompoundSolution sol = construct_optimal(Spectrum::constant(grid, 1.0),
                                                 Spectrum::constant(grid, 1.0), cfg.c1, cfg.c2);
  json out{{"command", "comib"},
           {"grid_points", grid.size()},
           {"c1_bits", cfg.c1},
           {"c2_bits", cfg.c2},
           {"gamma", sol.gamma},
           {"lambda", sol.lambda},
           {"rate_bits", sol.rate_bits},
           {"audited_c1_bits", sol.audited_c1_bits},
           {"audited_c2_bits", sol.audited_c2_bits},
           {"audited_rate_bits", sol.audited_rate_bits}};
  if (cfg.saddle_members > 0) {
    const SaddleReport rep = saddle_check(cfg.c1, cfg.c2, cfg.saddle_members, grid.size());
    out["saddle_check"] = json{{"family_size", cfg.saddle_members},
                               {"white_value_bits", rep.white_value_bits},
                               {"min_side_margin", rep.min_side_margin},
                               {"max_side_margin", rep.max_side_margin},
                               {"white_optimal", rep.white_optimal}};
  }
  return out;
}

inline json run_pf(const RunConfig& cfg) {
  if (cfg.model_path.empty()) throw ConfigError("pf requires --instance");
  std::ifstream in(cfg.model_path);
  if (!in) throw ConfigError("pf: cannot open instance file " + cfg.model_path);
  json root;
  try {
    in >> root;
  } catch (const json::parse_error& e) {
    throw ConfigError(std::string("pf: malformed instance JSON: ") + e.what());
  }

  auto matrix_from = [](const json& j, const std::string& name) {
    if (!j.is_array() || j.empty()) throw ConfigError("pf: " + name + " must be a 2D array");
    const int rows = static_cast<int>(j.size());
    const int cols = static_cast<int>(j[0].size());
    Eigen::MatrixXd m(rows, cols);
    for (int i = 0; i < rows; ++i) {
      if (!j[i].is_array() || static_cast<int>(j[i].size()) != cols)
        throw ConfigError("pf: " + name + " must be rectangular");
      for (int k = 0; k < cols; ++k) m(i, k) = j[i][k].get<double>();
    }
    return m;
  };

  std::optional<PfInstance> inst;
  if (root.contains("psi")) {
    const std::vector<double> psi_vals = root.at("psi").get<std::vector<double>>();
    const int n = root.contains("n") ? root.at("n").get<int>()
                                     : static_cast<int>(psi_vals.size());
    Eigen::VectorXd psi(n);
    if (static_cast<int>(psi_vals.size()) != n)
      throw ConfigError("pf: psi length does not match n");
    for (int i = 0; i < n; ++i) psi[i] = psi_vals[static_cast<std::size_t>(i)];
    const Eigen::MatrixXd v2 = root.contains("v2") ? matrix_from(root.at("v2"), "v2")
                                                   : Eigen::MatrixXd::Identity(n, n);
    inst.emplace(n, psi, v2, cfg.c1);
  } else if (root.contains("sigma_y")) {
    inst = make_pf_instance(matrix_from(root.at("sigma_y"), "sigma_y"),
                            matrix_from(root.at("sigma_z"), "sigma_z"),
                            matrix_from(root.at("sigma_zy"), "sigma_zy"), cfg.c1);
  } else {
    throw ConfigError("pf: instance must provide psi or raw covariances sigma_y/sigma_z/sigma_zy");
  }

  const PfSolution sol = minimize_pf(*inst, cfg.restarts, cfg.seed);
  double constraint = 0.0;
  for (int i = 0; i < inst->n; ++i) constraint += -0.5 * std::log2(1.0 - sol.phi[i] * sol.phi[i]);
  constraint /= static_cast<double>(inst->n);

  std::vector<std::vector<double>> u1(inst->n, std::vector<double>(inst->n));
  for (int i = 0; i < inst->n; ++i)
    for (int j = 0; j < inst->n; ++j) u1[i][j] = sol.u1(i, j);
  return json{{"command", "pf"},
              {"n", inst->n},
              {"c1_bits", cfg.c1},
              {"restarts", cfg.restarts},
              {"seed", cfg.seed},
              {"value_bits", sol.value_bits},
              {"relaxed", true},
              {"constraint_bits", constraint},
              {"grad_norm", sol.grad_norm},
              {"restart_index", sol.restart_index},
              {"phi", std::vector<double>(sol.phi.data(), sol.phi.data() + sol.phi.size())},
              {"u1", u1}};
}

inline std::string run_szego_csv(const RunConfig& cfg) {
  const BivariateSpectra src = detail_cli::load_model(cfg);
  if (cfg.sizes.empty()) throw ConfigError("szego requires --sizes");
  const SzegoTable table = szego_convergence(src, cfg.sizes);
  std::string csv = "n,mi_per_symbol_bits,gap_bits\n";
  for (const SzegoRow& row : table.rows) {
    csv += std::to_string(row.n) + "," + detail_cli::format_double(row.mi_per_symbol_bits) +
           "," + detail_cli::format_double(row.gap_bits) + "\n";
  }
  return csv;
}

/// Dispatches a parsed configuration; returns the process exit code and
/// writes outputs (or a machine-readable error JSON on stderr).
inline int run(const RunConfig& cfg) {
  try {
    if (cfg.command == "ib-rate") {
      detail_cli::write_text(cfg.output_path, detail_cli::emit_json(run_ib_rate(cfg)));
    } else if (cfg.command == "sweep") {
      detail_cli::write_text(cfg.output_path, run_sweep_csv(cfg));
    } else if (cfg.command == "filters") {
      auto [csv, taps] = run_filters(cfg);
      detail_cli::write_text(cfg.output_path, csv);
      if (!taps.is_null()) detail_cli::write_text(cfg.taps_output, detail_cli::emit_json(taps));
    } else if (cfg.command == "audit") {
      detail_cli::write_text(cfg.output_path, detail_cli::emit_json(run_audit(cfg)));
    } else if (cfg.command == "simulate") {
      detail_cli::write_text(cfg.output_path, detail_cli::emit_json(run_simulate(cfg)));
    } else if (cfg.command == "comib") {
      detail_cli::write_text(cfg.output_path, detail_cli::emit_json(run_comib(cfg)));
    } else if (cfg.command == "pf") {
      detail_cli::write_text(cfg.output_path, detail_cli::emit_json(run_pf(cfg)));
    } else if (cfg.command == "szego") {
      detail_cli::write_text(cfg.output_path, run_szego_csv(cfg));
    } else {
      throw ConfigError("unknown command: " + cfg.command);
    }
    return 0;
  } catch (const ConfigError& e) {
    std::cerr << detail_cli::emit_json(
        json{{"error", {{"type", "ConfigError"}, {"message", e.what()}}}});
    return 2;
  } catch (const ModelError& e) {
    std::cerr << detail_cli::emit_json(
        json{{"error", {{"type", "ModelError"}, {"message", e.what()}}}});
    return 3;
  } catch (const Error& e) {
    std::cerr << detail_cli::emit_json(
        json{{"error", {{"type", "NumericError"}, {"message", e.what()}}}});
    return 4;
  } catch (const std::exception& e) {
    std::cerr << detail_cli::emit_json(
        json{{"error", {{"type", "InternalError"}, {"message", e.what()}}}});
    return 1;
  }
}

}  // namespace gaussib::cli
