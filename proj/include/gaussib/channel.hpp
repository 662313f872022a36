#pragma once

#include <algorithm>
#include <cmath>
#include <span>
#include <utility>
#include <vector>

#include "gaussib/detail/fft.hpp"
#include "gaussib/errors.hpp"
#include "gaussib/spectra.hpp"
#include "gaussib/waterfill.hpp"

namespace gaussib {

/// Frequency-domain forward realization of the optimal test channel:
/// Z = h2 * (h1 * g * omega * Y + N), N ~ N(0, theta).
///
/// The postfilter is the conjugate of the prefilter, so |H2|^2 = h1_sq and is
/// not stored separately.
struct ForwardChannel {
  Spectrum omega_sq;  ///< |Omega|^2 = 1/S_W (noise whitening)
  Spectrum g_sq;      ///< |G|^2 = Gamma/(1+Gamma) (shaping; root Wiener filter)
  Spectrum h1_sq;     ///< prefilter; 1 - theta/Gamma on the active band, else 0
  double theta;       ///< AWGN variance = water level
  WaterFillSolution solution;
};

/// One FIR leg of the realization.
struct FirFilter {
  std::vector<double> taps;
  int delay = 0;
  double linf_error = 0.0;  ///< max over grid of | |H(f)| - target magnitude |
};

struct FirRealization {
  FirFilter whitening;
  FirFilter shaping;
  FirFilter prefilter;
  FirFilter postfilter;  ///< time-reversed prefilter
  int total_delay = 0;
};

/// Spectral audit of a realized channel: the bottleneck and IB rates actually
/// carried by the chain, computed from the chain responses alone.
struct AuditReport {
  double c_bits = 0.0;
  double r_bits = 0.0;
};

inline ForwardChannel design_forward_channel(const BivariateSpectra& src, double c_target_bits) {
  const Spectrum gamma = snr_spectrum(src);
  const LinearForm lf = to_linear_form(src);
  WaterFillSolution wf = ib_rate(gamma, c_target_bits);

  const int n = src.grid().size();
  std::vector<double> omega_sq(n, 0.0), g_sq(n, 0.0), h1_sq(n, 0.0);
  for (int k = 0; k < n; ++k) {
    omega_sq[k] = lf.s_w[k] > 0.0 ? 1.0 / lf.s_w[k] : 0.0;
    g_sq[k] = gamma[k] / (1.0 + gamma[k]);
    h1_sq[k] = wf.active[k] ? 1.0 - wf.theta / gamma[k] : 0.0;
  }
  const double theta = wf.theta;
  return ForwardChannel{Spectrum(src.grid(), std::move(omega_sq)),
                        Spectrum(src.grid(), std::move(g_sq)),
                        Spectrum(src.grid(), std::move(h1_sq)), theta, std::move(wf)};
}

/// MI rates through a chain with squared magnitude response t_sq(f) from Y to
/// the AWGN input:
///   C = (1/2) int log( (t_sq S_Y + theta) / theta )
///   R = (1/2) int log( 1 + Gamma_XZ ),
/// where Gamma_XZ is the SNR spectrum of the pair (X, Z); the postfilter
/// cancels wherever the chain carries signal.
inline AuditReport audit_rates_with_response(std::span<const double> t_sq, double theta,
                                             const BivariateSpectra& src) {
  const int n = src.grid().size();
  double c_acc = 0.0, r_acc = 0.0;
  for (int k = 0; k < n; ++k) {
    const double sig = t_sq[k] * src.s_y()[k];
    c_acc += std::log1p(sig / theta);
    const double cross_sq = t_sq[k] * std::norm(src.s_xy()[k]);
    const double denom = src.s_x()[k] * (sig + theta) - cross_sq;
    if (cross_sq > 0.0) r_acc += std::log1p(cross_sq / denom);
  }
  const double scale = 1.0 / (2.0 * static_cast<double>(n) * detail::kLn2);
  return AuditReport{c_acc * scale, r_acc * scale};
}

/// Spectral audit of the designed channel, |T|^2 = |H1 G Omega|^2.
inline AuditReport audit_rates(const ForwardChannel& ch, const BivariateSpectra& src) {
  const int n = src.grid().size();
  std::vector<double> t_sq(n);
  for (int k = 0; k < n; ++k) t_sq[k] = ch.h1_sq[k] * ch.g_sq[k] * ch.omega_sq[k];
  return audit_rates_with_response(t_sq, ch.theta, src);
}

namespace detail {

inline FirFilter design_fir(const Spectrum& target_mag_sq, int num_taps, int delay) {
  const std::size_t n = static_cast<std::size_t>(target_mag_sq.size());
  const std::size_t m = next_pow2(std::max<std::size_t>(8 * n, 64));
  std::vector<double> root(target_mag_sq.values());
  for (double& v : root) v = std::sqrt(v);
  const std::vector<double> root_dft = resample_to_dft_grid(root, m);
  const std::vector<double> ideal = zero_phase_taps(root_dft);

  FirFilter out;
  out.delay = delay;
  out.taps.resize(num_taps);
  for (int k = 0; k < num_taps; ++k) {
    const long long idx = ((k - delay) % static_cast<long long>(m) + static_cast<long long>(m)) %
                          static_cast<long long>(m);
    out.taps[k] = ideal[static_cast<std::size_t>(idx)];
  }
  const std::vector<double> mags = fir_magnitudes_on_grid(out.taps, n);
  double err = 0.0;
  for (std::size_t k = 0; k < n; ++k) err = std::max(err, std::abs(mags[k] - root[k]));
  out.linf_error = err;
  return out;
}

}  // namespace detail

/// FIR realization of the whole chain with `num_taps` taps per filter and a
/// delay of `delay` samples per causal leg.  Each magnitude target is factored
/// as a zero-phase root spectrum, inverse-transformed, shifted and truncated;
/// the postfilter is the time reverse of the prefilter.
inline FirRealization realize_fir(const ForwardChannel& ch, int num_taps, int delay) {
  if (num_taps < 1) throw ConfigError("realize_fir: need at least one tap");
  if (delay < 0 || delay >= num_taps) throw ConfigError("realize_fir: need 0 <= delay < taps");

  FirRealization out;
  out.whitening = detail::design_fir(ch.omega_sq, num_taps, delay);
  out.shaping = detail::design_fir(ch.g_sq, num_taps, delay);
  out.prefilter = detail::design_fir(ch.h1_sq, num_taps, delay);

  out.postfilter.taps.assign(out.prefilter.taps.rbegin(), out.prefilter.taps.rend());
  out.postfilter.delay = num_taps - 1 - delay;
  out.postfilter.linf_error = out.prefilter.linf_error;

  out.total_delay = 3 * delay + out.postfilter.delay;
  return out;
}

}  // namespace gaussib
