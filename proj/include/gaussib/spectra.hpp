#pragma once

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstdint>
#include <numeric>
#include <span>
#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "gaussib/detail/fft.hpp"
#include "gaussib/detail/random.hpp"
#include "gaussib/errors.hpp"

namespace gaussib {

/// Uniform midpoint grid on (-1/2, 1/2): f_k = -1/2 + (k+1/2)/n.
///
/// All integrals over frequency are midpoint-rule sums (1/n) * sum(values),
/// which is spectrally accurate for smooth periodic integrands and keeps the
/// water-filling band boundaries away from the endpoints.
class FrequencyGrid {
 public:
  static constexpr int kDefaultPoints = 4096;

  explicit FrequencyGrid(int n_points = kDefaultPoints) : n_(n_points) {
    if (n_points < 1) throw ConfigError("FrequencyGrid: n_points must be >= 1");
    freqs_.resize(n_);
    for (int k = 0; k < n_; ++k)
      freqs_[k] = -0.5 + (static_cast<double>(k) + 0.5) / static_cast<double>(n_);
  }

  int size() const { return n_; }
  double frequency(int k) const { return freqs_[k]; }
  const std::vector<double>& frequencies() const { return freqs_; }

  double integrate(std::span<const double> values) const {
    double acc = 0.0;
    for (double v : values) acc += v;
    return acc / static_cast<double>(n_);
  }

  friend bool operator==(const FrequencyGrid& a, const FrequencyGrid& b) {
    return a.n_ == b.n_;
  }

 private:
  int n_;
  std::vector<double> freqs_;
};

/// Real nonnegative power spectral density tabulated on a FrequencyGrid.
/// Real processes have even spectra: values[k] == values[n-1-k].
class Spectrum {
 public:
  Spectrum(FrequencyGrid grid, std::vector<double> values)
      : grid_(std::move(grid)), values_(std::move(values)) {
    if (static_cast<int>(values_.size()) != grid_.size())
      throw ConfigError("Spectrum: value count does not match grid");
    for (double v : values_)
      if (!(v >= 0.0)) throw ModelError("Spectrum: values must be nonnegative");
  }

  static Spectrum constant(const FrequencyGrid& grid, double level) {
    return Spectrum(grid, std::vector<double>(grid.size(), level));
  }

  const FrequencyGrid& grid() const { return grid_; }
  int size() const { return grid_.size(); }
  double operator[](int k) const { return values_[k]; }
  const std::vector<double>& values() const { return values_; }

  double integral() const { return grid_.integrate(values_); }
  double max_value() const { return *std::max_element(values_.begin(), values_.end()); }

 private:
  FrequencyGrid grid_;
  std::vector<double> values_;
};

/// Complex cross power spectral density; Hermitian symmetry
/// values[k] == conj(values[n-1-k]) for real processes.
class CrossSpectrum {
 public:
  CrossSpectrum(FrequencyGrid grid, std::vector<std::complex<double>> values)
      : grid_(std::move(grid)), values_(std::move(values)) {
    if (static_cast<int>(values_.size()) != grid_.size())
      throw ConfigError("CrossSpectrum: value count does not match grid");
  }

  static CrossSpectrum zero(const FrequencyGrid& grid) {
    return CrossSpectrum(grid, std::vector<std::complex<double>>(grid.size(), 0.0));
  }

  const FrequencyGrid& grid() const { return grid_; }
  int size() const { return grid_.size(); }
  std::complex<double> operator[](int k) const { return values_[k]; }
  const std::vector<std::complex<double>>& values() const { return values_; }

 private:
  FrequencyGrid grid_;
  std::vector<std::complex<double>> values_;
};

/// Bivariate stationary Gaussian source model (S_X, S_Y, S_XY) on one grid.
class BivariateSpectra {
 public:
  BivariateSpectra(Spectrum s_x, Spectrum s_y, CrossSpectrum s_xy)
      : s_x_(std::move(s_x)), s_y_(std::move(s_y)), s_xy_(std::move(s_xy)) {
    if (!(s_x_.grid() == s_y_.grid()) || !(s_x_.grid() == s_xy_.grid()))
      throw ModelError("BivariateSpectra: spectra must share one grid");
    const int n = s_x_.size();
    for (int k = 0; k < n; ++k) {
      const double cross2 = std::norm(s_xy_[k]);
      if (cross2 > 0.0 && (s_x_[k] <= 0.0 || s_y_[k] <= 0.0))
        throw NonPositiveSpectrum(
            "BivariateSpectra: marginal spectrum nonpositive where cross-spectrum is nonzero");
      const double bound = s_x_[k] * s_y_[k];
      if (cross2 > bound * (1.0 + 1e-12) + 1e-300)
        throw ModelError("BivariateSpectra: |S_XY|^2 exceeds S_X*S_Y (joint PSD indefinite)");
    }
  }

  const FrequencyGrid& grid() const { return s_x_.grid(); }
  const Spectrum& s_x() const { return s_x_; }
  const Spectrum& s_y() const { return s_y_; }
  const CrossSpectrum& s_xy() const { return s_xy_; }

 private:
  Spectrum s_x_;
  Spectrum s_y_;
  CrossSpectrum s_xy_;
};

/// Equivalent observation model Y = h * X + W: |H(f)|^2 and the noise PSD.
struct LinearForm {
  Spectrum h_mag_sq;
  Spectrum s_w;
};

namespace detail {

/// Relative degeneracy threshold: grid points with
/// S_X*S_Y - |S_XY|^2 <= kDeterministicEps * S_X*S_Y are flagged
/// deterministic and their SNR is capped at |S_XY|^2 / (eps * S_X*S_Y).
constexpr double kDeterministicEps = 1e-12;

}  // namespace detail

/// True at grid points where the observation noise is (numerically) zero, so
/// the SNR spectrum is treated as infinite and capped.
inline std::vector<bool> deterministic_band(const BivariateSpectra& src) {
  const int n = src.grid().size();
  std::vector<bool> flags(n, false);
  for (int k = 0; k < n; ++k) {
    const double cross2 = std::norm(src.s_xy()[k]);
    if (cross2 == 0.0) continue;
    const double prod = src.s_x()[k] * src.s_y()[k];
    flags[k] = (prod - cross2) <= detail::kDeterministicEps * prod;
  }
  return flags;
}

/// SNR spectrum Gamma(f) = |S_XY|^2 / (S_X S_Y - |S_XY|^2).
///
/// Deterministic points (see deterministic_band) get the capped value
/// |S_XY|^2 / (eps * S_X S_Y); everything downstream stays finite.
inline Spectrum snr_spectrum(const BivariateSpectra& src) {
  const int n = src.grid().size();
  std::vector<double> gamma(n, 0.0);
  for (int k = 0; k < n; ++k) {
    const double cross2 = std::norm(src.s_xy()[k]);
    if (cross2 == 0.0) continue;
    const double prod = src.s_x()[k] * src.s_y()[k];
    const double denom = std::max(prod - cross2, detail::kDeterministicEps * prod);
    gamma[k] = cross2 / denom;
  }
  return Spectrum(src.grid(), std::move(gamma));
}

/// Filters the source into Y = h * X + W form:
/// |H|^2 = |S_XY|^2 / S_X^2,  S_W = S_Y - |S_XY|^2 / S_X.
inline LinearForm to_linear_form(const BivariateSpectra& src) {
  const int n = src.grid().size();
  std::vector<double> h_sq(n, 0.0);
  std::vector<double> s_w(n, 0.0);
  for (int k = 0; k < n; ++k) {
    const double cross2 = std::norm(src.s_xy()[k]);
    if (cross2 == 0.0) {
      s_w[k] = src.s_y()[k];
      continue;
    }
    h_sq[k] = cross2 / (src.s_x()[k] * src.s_x()[k]);
    s_w[k] = std::max(src.s_y()[k] - cross2 / src.s_x()[k], 0.0);
  }
  return LinearForm{Spectrum(src.grid(), std::move(h_sq)), Spectrum(src.grid(), std::move(s_w))};
}

/// Autocovariance R[k] = integral of S(f) e^{j2pi k f} df for k = 0..max_lag,
/// by the midpoint rule (real by even symmetry).
inline std::vector<double> autocovariance(const Spectrum& s, int max_lag) {
  const int n = s.size();
  std::vector<double> r(max_lag + 1, 0.0);
  for (int lag = 0; lag <= max_lag; ++lag) {
    double acc = 0.0;
    for (int m = 0; m < n; ++m)
      acc += s[m] * std::cos(2.0 * M_PI * lag * s.grid().frequency(m));
    r[lag] = acc / static_cast<double>(n);
  }
  return r;
}

/// n-by-n Toeplitz covariance with entries R[i-j] from the spectrum.
inline Eigen::MatrixXd toeplitz_covariance(const Spectrum& s, int n) {
  if (n < 1) throw ConfigError("toeplitz_covariance: n must be >= 1");
  const std::vector<double> r = autocovariance(s, n - 1);
  Eigen::MatrixXd cov(n, n);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) cov(i, j) = r[std::abs(i - j)];
  return cov;
}

/// exp( integral of log S ), the one-step prediction MMSE from the infinite
/// past.  `zero_band` is set when S vanishes somewhere on the grid, in which
/// case the entropy power is exactly 0.
struct EntropyPower {
  double value = 0.0;
  bool zero_band = false;
};

inline EntropyPower entropy_power(const Spectrum& s) {
  const int n = s.size();
  double acc = 0.0;
  for (int k = 0; k < n; ++k) {
    if (s[k] <= 0.0) return EntropyPower{0.0, true};
    acc += std::log(s[k]);
  }
  return EntropyPower{std::exp(acc / static_cast<double>(n)), false};
}

/// Stationary Gaussian sample path with population PSD s, deterministic per
/// seed.  Realization: minimum-phase spectral factorization (real cepstrum on
/// an FFT grid >= 8x the spectrum grid) driving unit white Gaussian noise;
/// the first filter-length outputs are discarded so the returned samples are
/// exactly stationary.
inline std::vector<double> synthesize_path(const Spectrum& s, std::size_t length,
                                           std::uint64_t seed) {
  if (length < 1) throw ConfigError("synthesize_path: length must be >= 1");
  const std::size_t fft_size =
      detail::next_pow2(std::max<std::size_t>(8 * static_cast<std::size_t>(s.size()), 64));

  // Floor the spectrum to keep the log-cepstrum finite (documented bias for
  // spectra with zero bands).
  const double floor_level = 1e-12 * std::max(s.max_value(), 0.0);
  std::vector<double> floored = s.values();
  if (floor_level <= 0.0) throw ModelError("synthesize_path: spectrum is identically zero");
  for (double& v : floored) v = std::max(v, floor_level);

  const std::vector<double> s_dft = detail::resample_to_dft_grid(floored, fft_size);
  const std::vector<double> taps = detail::minimum_phase_taps(s_dft);

  const std::size_t burn = taps.size();
  std::vector<double> noise(length + burn);
  detail::GaussianSource gauss(seed);
  for (double& v : noise) v = gauss();

  std::vector<double> full = detail::fft_convolve(noise, taps);
  // Outputs from index burn-1 on depend on full filter support only.
  std::vector<double> path(full.begin() + static_cast<std::ptrdiff_t>(burn - 1),
                           full.begin() + static_cast<std::ptrdiff_t>(burn - 1 + length));
  return path;
}

}  // namespace gaussib
