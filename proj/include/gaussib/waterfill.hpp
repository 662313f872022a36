#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <span>
#include <vector>

#include "gaussib/errors.hpp"
#include "gaussib/spectra.hpp"

namespace gaussib {

/// Eigenvalues of the SNR covariance matrix for the vector IB problem.
struct VectorIbInstance {
  std::vector<double> gammas;
};

/// Water-filling solution over a tabulated SNR spectrum.
struct WaterFillSolution {
  double theta = 0.0;            ///< water level
  double bottleneck_bits = 0.0;  ///< C = (1/2) int log2[Gamma/theta]+ df
  double rate_bits = 0.0;        ///< R = (1/2) int log2[(1+Gamma)/(1+theta)]+ df
  Spectrum d_theta;              ///< distortion spectrum min(theta, Gamma)
  std::vector<bool> active;      ///< Gamma(f) > theta
};

/// Water-filling solution over SNR eigenvalues.
struct VectorIbSolution {
  double theta = 0.0;
  double bottleneck_bits = 0.0;
  double rate_bits = 0.0;
  std::vector<double> d_theta;
  std::vector<bool> active;
};

namespace detail {

constexpr double kLn2 = std::numbers::ln2;

/// log of [x]+ = max{1, x} applied to Gamma/theta, in log space.
inline double bottleneck_nats(std::span<const double> gammas, double log_theta) {
  double acc = 0.0;
  for (double g : gammas)
    if (g > 0.0) acc += std::max(0.0, std::log(g) - log_theta);
  return 0.5 * acc / static_cast<double>(gammas.size());
}

inline double rate_nats(std::span<const double> gammas, double theta) {
  double acc = 0.0;
  const double log1p_theta = std::log1p(theta);
  for (double g : gammas) acc += std::max(0.0, std::log1p(g) - log1p_theta);
  return 0.5 * acc / static_cast<double>(gammas.size());
}

/// Water level solving (1/2n) sum log[gamma_i/theta]+ = c_target by bisection
/// in log theta.  The bracket [min+Gamma * 2^(-2 c n), max Gamma] always
/// contains the solution: at the low end even a single point carries the whole
/// rate budget, at the high end the rate is zero.
inline double solve_theta_impl(std::span<const double> gammas, double c_target_bits) {
  if (c_target_bits < 0.0) throw ConfigError("solve_theta: c_target must be >= 0");
  const std::size_t n = gammas.size();
  if (n == 0) throw ConfigError("solve_theta: empty instance");

  double gamma_max = 0.0;
  double gamma_min_pos = std::numeric_limits<double>::infinity();
  for (double g : gammas) {
    gamma_max = std::max(gamma_max, g);
    if (g > 0.0) gamma_min_pos = std::min(gamma_min_pos, g);
  }
  if (gamma_max <= 0.0)
    throw UnachievableRate("solve_theta: SNR spectrum is identically zero");
  if (c_target_bits == 0.0) return gamma_max;

  const double c_nats = c_target_bits * kLn2;
  double log_lo = std::log(gamma_min_pos) - 2.0 * c_nats * static_cast<double>(n);
  double log_hi = std::log(gamma_max);
  const double tol = 1e-10 * std::max(c_nats, 1e-30);

  double log_theta = 0.5 * (log_lo + log_hi);
  for (int iter = 0; iter < 200; ++iter) {
    log_theta = 0.5 * (log_lo + log_hi);
    const double c = bottleneck_nats(gammas, log_theta);
    if (std::abs(c - c_nats) <= tol) return std::exp(log_theta);
    if (c > c_nats)
      log_lo = log_theta;
    else
      log_hi = log_theta;
  }
  // The bracket is tiny by now; accept if the constraint is met to a looser
  // relative tolerance, otherwise report failure.
  const double c = bottleneck_nats(gammas, log_theta);
  if (std::abs(c - c_nats) <= 1e-8 * std::max(c_nats, 1.0)) return std::exp(log_theta);
  throw ConvergenceFailure("solve_theta: bisection did not meet tolerance in 200 iterations");
}

struct CoreSolution {
  double theta;
  double c_bits;
  double r_bits;
  std::vector<double> d_theta;
  std::vector<bool> active;
};

inline CoreSolution solve_core(std::span<const double> gammas, double c_target_bits) {
  CoreSolution out;
  out.theta = solve_theta_impl(gammas, c_target_bits);
  out.c_bits = bottleneck_nats(gammas, std::log(out.theta)) / kLn2;
  out.r_bits = rate_nats(gammas, out.theta) / kLn2;
  out.d_theta.resize(gammas.size());
  out.active.resize(gammas.size());
  for (std::size_t i = 0; i < gammas.size(); ++i) {
    out.d_theta[i] = std::min(out.theta, gammas[i]);
    out.active[i] = gammas[i] > out.theta;
  }
  return out;
}

}  // namespace detail

/// Water level for a tabulated SNR spectrum at bottleneck rate c_target
/// (bits/sample).
inline double solve_theta(const Spectrum& gamma, double c_target_bits) {
  return detail::solve_theta_impl(gamma.values(), c_target_bits);
}

inline double solve_theta(const VectorIbInstance& inst, double c_target_bits) {
  return detail::solve_theta_impl(inst.gammas, c_target_bits);
}

/// Process IB rate: R(C) = (1/2) int log[(1+Gamma)/(1+theta)]+ df with theta
/// chosen so that (1/2) int log[Gamma/theta]+ df = C.
inline WaterFillSolution ib_rate(const Spectrum& gamma, double c_target_bits) {
  detail::CoreSolution core = detail::solve_core(gamma.values(), c_target_bits);
  return WaterFillSolution{core.theta, core.c_bits, core.r_bits,
                           Spectrum(gamma.grid(), std::move(core.d_theta)),
                           std::move(core.active)};
}

inline WaterFillSolution ib_rate(const BivariateSpectra& src, double c_target_bits) {
  return ib_rate(snr_spectrum(src), c_target_bits);
}

/// Vector Gaussian IB over SNR eigenvalues, normalized per dimension.
inline VectorIbSolution vector_ib(const VectorIbInstance& inst, double c_target_bits) {
  for (double g : inst.gammas)
    if (!(g >= 0.0)) throw ConfigError("vector_ib: eigenvalues must be >= 0");
  detail::CoreSolution core = detail::solve_core(inst.gammas, c_target_bits);
  return VectorIbSolution{core.theta, core.c_bits, core.r_bits, std::move(core.d_theta),
                          std::move(core.active)};
}

/// Scalar Gaussian IB closed form: R = (1/2) log2 1/(1 - rho1^2 rho2^2) with
/// rho2^2 = 1 - 2^(-2 C2).  Oracle for flat-spectrum instances.
inline double scalar_ib(double rho1_sq, double c2_bits) {
  if (rho1_sq < 0.0 || rho1_sq > 1.0) throw ConfigError("scalar_ib: rho1_sq must be in [0,1]");
  if (c2_bits < 0.0) throw ConfigError("scalar_ib: c2 must be >= 0");
  const double rho2_sq = 1.0 - std::exp2(-2.0 * c2_bits);
  return -0.5 * std::log2(1.0 - rho1_sq * rho2_sq);
}

/// Mutual information rate (1/2) int log2(1 + Gamma(f)) df — the C -> infinity
/// limit of the IB rate.
inline double mi_rate_bits(const Spectrum& gamma) {
  double acc = 0.0;
  for (double g : gamma.values()) acc += std::log1p(g);
  return 0.5 * acc / (static_cast<double>(gamma.size()) * detail::kLn2);
}

}  // namespace gaussib
