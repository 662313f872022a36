#pragma once

#include <algorithm>
#include <cmath>
#include <utility>
#include <vector>

#include "gaussib/errors.hpp"
#include "gaussib/spectra.hpp"
#include "gaussib/waterfill.hpp"

namespace gaussib {

/// Closed-form compound (min-max) IB rate in bits:
///   R = -(1/2) log2[ 1 - (1 - 2^(-2 C1))(1 - 2^(-2 C2)) ].
inline double comib_rate(double c1_bits, double c2_bits) {
  if (c1_bits < 0.0 || c2_bits < 0.0) throw ConfigError("comib_rate: rates must be >= 0");
  const double a = 1.0 - std::exp2(-2.0 * c1_bits);
  const double b = 1.0 - std::exp2(-2.0 * c2_bits);
  return -0.5 * std::log2(1.0 - a * b) + 0.0;  // +0.0 normalizes -0
}

/// Closed-form construction of the optimal compound test channel plus an
/// audited flat-marginal realization.
///
/// h_sq, s_w, g_sq, s_v record the filter displays
///   |H|^2 = S_W = (1/(1+gamma)) S_Y/S_X,  |G|^2 = S_V = 1/(1+lambda)
/// evaluated verbatim on the supplied marginals.  The audited triple comes
/// from the normalized construction with unit-flat marginals, SNR spectrum
/// identically gamma and compression SNR identically lambda, where the white
/// optimum is exactly verifiable.
struct CompoundSolution {
  double c1_bits = 0.0;
  double c2_bits = 0.0;
  double gamma = 0.0;   ///< 2^(2 C1) - 1
  double lambda = 0.0;  ///< 2^(2 C2) - 1
  double rate_bits = 0.0;
  Spectrum h_sq, g_sq, s_w, s_v;
  double audited_c1_bits = 0.0;
  double audited_c2_bits = 0.0;
  double audited_rate_bits = 0.0;
};

inline CompoundSolution construct_optimal(const Spectrum& s_x, const Spectrum& s_y,
                                          double c1_bits, double c2_bits) {
  if (!(s_x.grid() == s_y.grid()))
    throw ModelError("construct_optimal: marginals must share one grid");
  const int n = s_x.size();
  for (int k = 0; k < n; ++k)
    if (s_x[k] <= 0.0 || s_y[k] <= 0.0)
      throw NonPositiveSpectrum("construct_optimal: marginals must be positive");

  const double gamma = std::exp2(2.0 * c1_bits) - 1.0;
  const double lambda = std::exp2(2.0 * c2_bits) - 1.0;

  std::vector<double> h_sq(n);
  for (int k = 0; k < n; ++k) h_sq[k] = s_y[k] / (s_x[k] * (1.0 + gamma));

  CompoundSolution sol{c1_bits,
                       c2_bits,
                       gamma,
                       lambda,
                       comib_rate(c1_bits, c2_bits),
                       Spectrum(s_x.grid(), h_sq),
                       Spectrum::constant(s_x.grid(), 1.0 / (1.0 + lambda)),
                       Spectrum(s_x.grid(), h_sq),
                       Spectrum::constant(s_x.grid(), 1.0 / (1.0 + lambda))};

  // Normalized flat construction: unit marginals, cross-spectrum rho1 with
  // rho1^2 = gamma/(1+gamma); compression Z = g Y + V with unit-variance Z.
  const double rho1 = std::sqrt(gamma / (1.0 + gamma));
  const FrequencyGrid& grid = s_x.grid();
  const BivariateSpectra flat(Spectrum::constant(grid, 1.0), Spectrum::constant(grid, 1.0),
                              CrossSpectrum(grid, std::vector<std::complex<double>>(
                                                      static_cast<std::size_t>(n), rho1)));
  sol.audited_c1_bits = mi_rate_bits(snr_spectrum(flat));

  const double g_sq_norm = lambda / (1.0 + lambda);
  const double s_v_norm = 1.0 / (1.0 + lambda);
  double c2_acc = 0.0, r_acc = 0.0;
  for (int k = 0; k < n; ++k) {
    c2_acc += std::log1p(g_sq_norm * 1.0 / s_v_norm);
    const double cross_sq = g_sq_norm * rho1 * rho1;
    const double s_z = g_sq_norm + s_v_norm;  // = 1
    r_acc += std::log1p(cross_sq / (s_z - cross_sq));
  }
  const double scale = 1.0 / (2.0 * static_cast<double>(n) * detail::kLn2);
  sol.audited_c2_bits = c2_acc * scale;
  sol.audited_rate_bits = r_acc * scale;
  return sol;
}

/// Grid certificate that the white spectrum is a saddle point.
struct SaddleMember {
  double level_a = 0.0;  ///< SNR level (min side) or water level (max side) on |f| < 1/4
  double level_b = 0.0;  ///< same on the outer band
  double value_bits = 0.0;
};

struct SaddleReport {
  double white_value_bits = 0.0;
  std::vector<SaddleMember> min_side;  ///< IB value per source family member
  std::vector<SaddleMember> max_side;  ///< attained rate per compression allocation
  double min_side_margin = 0.0;        ///< min over members of (value - white)
  double max_side_margin = 0.0;        ///< min over members of (white - value)
  bool white_optimal = false;          ///< both margins >= -1e-9
};

/// Checks, over two-band families of size m, that the white SNR spectrum
/// minimizes the IB value among sources with MI rate exactly C1 (min player)
/// and that the flat allocation maximizes the attained rate among two-band
/// bottleneck splits of total rate C2 (max player).
inline SaddleReport saddle_check(double c1_bits, double c2_bits, int family_size,
                                 int grid_points = FrequencyGrid::kDefaultPoints) {
  if (family_size < 1) throw ConfigError("saddle_check: family_size must be >= 1");
  const FrequencyGrid grid(grid_points);
  const int n = grid.size();

  SaddleReport rep;
  rep.white_value_bits = comib_rate(c1_bits, c2_bits);

  // Min player: sources with half-band SNR levels (gamma_a, gamma_b) tied by
  // (1/4)log2(1+gamma_a) + (1/4)log2(1+gamma_b) = C1; t = 1/2 is white.
  for (int j = 0; j < family_size; ++j) {
    const double t = family_size == 1
                         ? 0.5
                         : 0.5 - 0.4 * static_cast<double>(j) / (family_size - 1.0);
    const double gamma_a = std::exp2(4.0 * c1_bits * t) - 1.0;
    const double gamma_b = std::exp2(4.0 * c1_bits * (1.0 - t)) - 1.0;
    std::vector<double> vals(n);
    for (int k = 0; k < n; ++k)
      vals[k] = std::abs(grid.frequency(k)) < 0.25 ? gamma_a : gamma_b;
    double value = 0.0;
    if (gamma_a > 0.0 || gamma_b > 0.0)
      value = ib_rate(Spectrum(grid, std::move(vals)), c2_bits).rate_bits;
    rep.min_side.push_back(SaddleMember{gamma_a, gamma_b, value});
  }

  // Max player: white source at level gamma, two-band water levels
  // (theta_a, theta_b) with per-band rates C2 s and C2(1-s); s = 1/2 is flat.
  const double gamma = std::exp2(2.0 * c1_bits) - 1.0;
  for (int j = 0; j < family_size; ++j) {
    const double s = family_size == 1
                         ? 0.5
                         : 0.5 - 0.4 * static_cast<double>(j) / (family_size - 1.0);
    const double theta_a = gamma * std::exp2(-4.0 * c2_bits * s);
    const double theta_b = gamma * std::exp2(-4.0 * c2_bits * (1.0 - s));
    const double value =
        gamma > 0.0 ? 0.25 * (std::log2((1.0 + gamma) / (1.0 + theta_a)) +
                              std::log2((1.0 + gamma) / (1.0 + theta_b)))
                    : 0.0;
    rep.max_side.push_back(SaddleMember{theta_a, theta_b, value});
  }

  double min_margin = std::numeric_limits<double>::infinity();
  for (const auto& mem : rep.min_side)
    min_margin = std::min(min_margin, mem.value_bits - rep.white_value_bits);
  double max_margin = std::numeric_limits<double>::infinity();
  for (const auto& mem : rep.max_side)
    max_margin = std::min(max_margin, rep.white_value_bits - mem.value_bits);

  rep.min_side_margin = min_margin;
  rep.max_side_margin = max_margin;
  rep.white_optimal = min_margin >= -1e-9 && max_margin >= -1e-9;
  return rep;
}

}  // namespace gaussib
