#pragma once

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstddef>
#include <span>
#include <vector>

#include <unsupported/Eigen/FFT>

namespace gaussib::detail {

inline std::size_t next_pow2(std::size_t n) {
  std::size_t p = 1;
  while (p < n) p <<= 1;
  return p;
}

inline std::vector<std::complex<double>> fft(const std::vector<std::complex<double>>& x) {
  Eigen::FFT<double> plan;
  std::vector<std::complex<double>> out;
  plan.fwd(out, x);
  return out;
}

inline std::vector<std::complex<double>> ifft(const std::vector<std::complex<double>>& x) {
  Eigen::FFT<double> plan;
  std::vector<std::complex<double>> out;
  plan.inv(out, x);
  return out;
}

/// Linear convolution of two real sequences via one zero-padded FFT.
inline std::vector<double> fft_convolve(std::span<const double> a, std::span<const double> b) {
  const std::size_t out_len = a.size() + b.size() - 1;
  const std::size_t m = next_pow2(out_len);
  std::vector<std::complex<double>> fa(m), fb(m);
  for (std::size_t i = 0; i < a.size(); ++i) fa[i] = a[i];
  for (std::size_t i = 0; i < b.size(); ++i) fb[i] = b[i];
  fa = fft(fa);
  fb = fft(fb);
  for (std::size_t i = 0; i < m; ++i) fa[i] *= fb[i];
  fa = ifft(fa);
  std::vector<double> out(out_len);
  for (std::size_t i = 0; i < out_len; ++i) out[i] = fa[i].real();
  return out;
}

/// Samples of a tabulated even spectrum at the DFT frequencies j/m, j = 0..m-1.
///
/// The tabulated values live on the midpoint grid f_k = -1/2 + (k+1/2)/n;
/// sampling interpolates linearly in frequency with periodic wrap-around.
inline std::vector<double> resample_to_dft_grid(std::span<const double> values, std::size_t m) {
  const std::size_t n = values.size();
  std::vector<double> out(m);
  for (std::size_t j = 0; j < m; ++j) {
    double f = static_cast<double>(j) / static_cast<double>(m);
    if (f >= 0.5) f -= 1.0;
    // Fractional index into the midpoint grid; periodic in [0, n).
    double pos = (f + 0.5) * static_cast<double>(n) - 0.5;
    if (pos < 0.0) pos += static_cast<double>(n);
    const std::size_t k0 = static_cast<std::size_t>(pos) % n;
    const std::size_t k1 = (k0 + 1) % n;
    const double w = pos - std::floor(pos);
    out[j] = (1.0 - w) * values[k0] + w * values[k1];
  }
  return out;
}

/// Minimum-phase impulse response with |H(f)|^2 = s via the real cepstrum:
/// IFFT of (1/2)log s, causal fold, FFT, exp.  `s_dft` holds samples of the
/// target spectrum on the DFT grid (length a power of two, all > 0).
inline std::vector<double> minimum_phase_taps(const std::vector<double>& s_dft) {
  const std::size_t m = s_dft.size();
  std::vector<std::complex<double>> half_log(m);
  for (std::size_t j = 0; j < m; ++j) half_log[j] = 0.5 * std::log(s_dft[j]);
  std::vector<std::complex<double>> cep = ifft(half_log);

  std::vector<std::complex<double>> folded(m, 0.0);
  folded[0] = cep[0];
  for (std::size_t k = 1; k < m / 2; ++k) folded[k] = 2.0 * cep[k];
  folded[m / 2] = cep[m / 2];

  std::vector<std::complex<double>> h_min = fft(folded);
  for (auto& v : h_min) v = std::exp(v);
  std::vector<std::complex<double>> taps_c = ifft(h_min);

  std::vector<double> taps(m);
  for (std::size_t k = 0; k < m; ++k) taps[k] = taps_c[k].real();
  return taps;
}

/// Zero-phase impulse response (real, even in n modulo m) with frequency
/// response `a_dft` (real, even samples on the DFT grid).
inline std::vector<double> zero_phase_taps(const std::vector<double>& a_dft) {
  const std::size_t m = a_dft.size();
  std::vector<std::complex<double>> freq(m);
  for (std::size_t j = 0; j < m; ++j) freq[j] = a_dft[j];
  std::vector<std::complex<double>> taps_c = ifft(freq);
  std::vector<double> taps(m);
  for (std::size_t k = 0; k < m; ++k) taps[k] = taps_c[k].real();
  return taps;
}

/// |H(f_k)| of an FIR at every midpoint-grid frequency, k = 0..n-1.
///
/// The midpoints f_k = (2k+1-n)/(2n) are the odd bins of a DFT whose size is
/// a multiple of 2n, so one transform evaluates the whole grid.
inline std::vector<double> fir_magnitudes_on_grid(std::span<const double> taps, std::size_t n) {
  const std::size_t two_n = 2 * n;
  const std::size_t mult = (taps.size() + two_n - 1) / two_n;
  const std::size_t m = two_n * std::max<std::size_t>(mult, 1);
  std::vector<std::complex<double>> padded(m, 0.0);
  for (std::size_t k = 0; k < taps.size(); ++k) padded[k] = taps[k];
  const std::vector<std::complex<double>> freq = fft(padded);
  const std::size_t stride = m / two_n;
  std::vector<double> mags(n);
  for (std::size_t k = 0; k < n; ++k) {
    const long long num = 2 * static_cast<long long>(k) + 1 - static_cast<long long>(n);
    const long long bin = ((num % static_cast<long long>(two_n)) + static_cast<long long>(two_n)) %
                          static_cast<long long>(two_n);
    mags[k] = std::abs(freq[static_cast<std::size_t>(bin) * stride]);
  }
  return mags;
}

}  // namespace gaussib::detail
