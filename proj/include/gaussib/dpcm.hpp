#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <numeric>
#include <span>
#include <utility>
#include <vector>

#include "gaussib/channel.hpp"
#include "gaussib/detail/random.hpp"
#include "gaussib/errors.hpp"
#include "gaussib/spectra.hpp"

namespace gaussib {

/// Optimal linear predictor of U_n from the L past noisy outputs V_{n-L}^{n-1},
/// V = U + N with N white of variance theta.
struct PredictorSolution {
  int order = 0;
  std::vector<double> coeffs;  ///< a_1 .. a_L
  double sigma_l_sq = 0.0;     ///< prediction MMSE
};

/// One run of the prediction loop; all sequences share one length.
struct LoopTrace {
  std::vector<double> u;        ///< input
  std::vector<double> u_hat;    ///< prediction
  std::vector<double> w;        ///< prediction error u - u_hat
  std::vector<double> q;        ///< AWGN channel output w + n
  std::vector<double> v;        ///< reconstruction u_hat + q
  std::vector<double> n_noise;  ///< injected noise
  double theta = 0.0;
};

namespace detail {

/// Levinson recursion for T x = b with T the symmetric positive definite
/// Toeplitz matrix T_ij = t[|i-j|].
inline std::vector<double> levinson_solve(std::span<const double> t, std::span<const double> b) {
  const std::size_t n = b.size();
  if (t.size() < n || n == 0) throw ConfigError("levinson_solve: bad dimensions");
  if (t[0] <= 0.0) throw SingularSystem("levinson_solve: nonpositive diagonal");

  std::vector<double> x(n), y(n);
  x[0] = b[0] / t[0];
  if (n == 1) return x;
  y[0] = -t[1] / t[0];

  for (std::size_t k = 1; k < n; ++k) {
    // beta_k = t0 + r_k' y,  r_k = (t1..tk)
    double beta = t[0];
    for (std::size_t i = 1; i <= k; ++i) beta += t[i] * y[i - 1];
    if (beta <= 0.0) throw SingularSystem("levinson_solve: matrix not positive definite");

    double dot_x = 0.0;  // r_k' J x
    for (std::size_t i = 1; i <= k; ++i) dot_x += t[i] * x[k - i];
    const double mu = (b[k] - dot_x) / beta;
    for (std::size_t i = 0; i < k; ++i) x[i] += mu * y[k - 1 - i];
    x[k] = mu;

    if (k + 1 < n) {
      double dot_y = 0.0;  // r_k' J y
      for (std::size_t i = 1; i <= k; ++i) dot_y += t[i] * y[k - i];
      const double alpha = -(t[k + 1] + dot_y) / beta;
      for (std::size_t i = 0; i < k / 2; ++i) {
        const double yi = y[i] + alpha * y[k - 1 - i];
        y[k - 1 - i] += alpha * y[i];
        y[i] = yi;
      }
      if (k % 2 == 1) y[k / 2] += alpha * y[k / 2];
      y[k] = alpha;
    }
  }
  return x;
}

}  // namespace detail

/// Solves the noisy-prediction normal equations
///   (R_U[|i-j|] + theta 1{i=j}) a = R_U[1..L]
/// and returns the coefficients with sigma_L^2 = R_U[0] - a' r.
inline PredictorSolution noisy_predictor(const Spectrum& s_u, double theta, int order) {
  if (order < 1) throw ConfigError("noisy_predictor: order must be >= 1");
  if (!(theta > 0.0)) throw ConfigError("noisy_predictor: theta must be > 0");

  const std::vector<double> r_u = autocovariance(s_u, order);
  std::vector<double> t(r_u.begin(), r_u.begin() + order);
  t[0] += theta;
  const std::vector<double> rhs(r_u.begin() + 1, r_u.begin() + 1 + order);

  PredictorSolution sol;
  sol.order = order;
  sol.coeffs = detail::levinson_solve(t, rhs);

  // Residual check of the normal equations.
  double res = 0.0, scale = std::max(1.0, std::abs(rhs.empty() ? 0.0 : rhs[0]));
  for (int i = 0; i < order; ++i) {
    double acc = -rhs[i];
    for (int j = 0; j < order; ++j) acc += t[std::abs(i - j)] * sol.coeffs[j];
    res = std::max(res, std::abs(acc));
    scale = std::max(scale, std::abs(rhs[i]));
  }
  if (res > 1e-10 * scale)
    throw SingularSystem("noisy_predictor: normal-equation residual exceeds tolerance");

  double reduction = 0.0;
  for (int i = 0; i < order; ++i) reduction += sol.coeffs[i] * r_u[i + 1];
  sol.sigma_l_sq = std::max(r_u[0] - reduction, 0.0);
  return sol;
}

/// Runs the prediction loop
///   u_hat_n = sum a_i v_{n-i},  w = u - u_hat,  q = w + noise,  v = u_hat + q
/// with noise ~ N(0, theta) drawn from the seed.  Past outputs before the
/// start are taken as zero.
inline LoopTrace run_loop(std::span<const double> u, const PredictorSolution& predictor,
                          double theta, std::uint64_t seed) {
  const std::size_t len = u.size();
  if (len <= static_cast<std::size_t>(predictor.order))
    throw ConfigError("run_loop: input shorter than predictor order");

  LoopTrace tr;
  tr.theta = theta;
  tr.u.assign(u.begin(), u.end());
  tr.u_hat.resize(len);
  tr.w.resize(len);
  tr.q.resize(len);
  tr.v.resize(len);
  tr.n_noise.resize(len);

  detail::GaussianSource gauss(seed);
  const double noise_std = std::sqrt(theta);
  const int order = predictor.order;
  for (std::size_t n = 0; n < len; ++n) {
    double pred = 0.0;
    for (int i = 1; i <= order; ++i) {
      if (n >= static_cast<std::size_t>(i)) pred += predictor.coeffs[i - 1] * tr.v[n - i];
    }
    tr.u_hat[n] = pred;
    tr.w[n] = tr.u[n] - pred;
    tr.n_noise[n] = noise_std * gauss();
    tr.q[n] = tr.w[n] + tr.n_noise[n];
    tr.v[n] = tr.u_hat[n] + tr.q[n];
  }
  return tr;
}

/// max |v - u - n| over the trace; exactly the DPCM error identity.
inline double loop_identity_residual(const LoopTrace& tr) {
  double res = 0.0;
  for (std::size_t n = 0; n < tr.u.size(); ++n)
    res = std::max(res, std::abs(tr.v[n] - tr.u[n] - tr.n_noise[n]));
  return res;
}

/// Monte-Carlo estimate of the rates carried by the full predictive chain.
struct EndToEndReport {
  double c_hat_bits = 0.0;  ///< (1/2) log2(1 + sigma_w^2/theta), empirical
  double r_hat_bits = 0.0;  ///< audited spectral value under the realized FIR chain
  double c_se_bits = 0.0;   ///< batch-means standard error of c_hat
  double r_se_bits = 0.0;   ///< 0 by construction (r_hat is not sampled)
  double sigma_w_sq = 0.0;
  double theta = 0.0;
  double c_target_bits = 0.0;
  double r_target_bits = 0.0;
  PredictorSolution predictor;
  double sigma_2l_sq = 0.0;      ///< MMSE at twice the order, for convergence report
  double predictor_gap = 0.0;    ///< relative gap (sigma_L^2 - sigma_2L^2)/sigma_2L^2
  bool under_modeled = false;    ///< gap > 1e-3: order L is too small for this source
  double fir_linf_error = 0.0;
  std::size_t samples_used = 0;
};

namespace detail {

struct BatchStats {
  double mean = 0.0;
  double se = 0.0;
};

/// Mean of x with a batch-means standard error (population mean of the
/// underlying process is zero by construction; x holds squared samples).
inline BatchStats batch_mean(std::span<const double> x, int batches) {
  BatchStats st;
  const std::size_t len = x.size();
  for (double v : x) st.mean += v;
  st.mean /= static_cast<double>(len);
  const std::size_t bsize = len / static_cast<std::size_t>(batches);
  if (bsize < 2) return st;
  double var_acc = 0.0;
  for (int b = 0; b < batches; ++b) {
    double m = 0.0;
    for (std::size_t i = 0; i < bsize; ++i) m += x[static_cast<std::size_t>(b) * bsize + i];
    m /= static_cast<double>(bsize);
    var_acc += (m - st.mean) * (m - st.mean);
  }
  st.se = std::sqrt(var_acc / (static_cast<double>(batches) * (batches - 1.0)));
  return st;
}

}  // namespace detail

/// Builds the forward chain (whitening, shaping, prefilter as FIRs), runs the
/// prediction loop on a synthesized observation path and estimates the rates.
/// When trace_out is given, the steady-state part of the loop trace is copied
/// into it.
inline EndToEndReport end_to_end_rates(const BivariateSpectra& src, double c_target_bits,
                                       int order, std::size_t length, std::uint64_t seed,
                                       LoopTrace* trace_out = nullptr) {
  constexpr int kTaps = 512;
  constexpr int kDelay = kTaps / 2;

  const ForwardChannel ch = design_forward_channel(src, c_target_bits);
  const FirRealization fir = realize_fir(ch, kTaps, kDelay);

  std::vector<double> chain = detail::fft_convolve(fir.whitening.taps, fir.shaping.taps);
  chain = detail::fft_convolve(chain, fir.prefilter.taps);

  // Spectrum of the realized prefiltered process U on the model grid.
  const int n = src.grid().size();
  const std::vector<double> chain_mag =
      detail::fir_magnitudes_on_grid(chain, static_cast<std::size_t>(n));
  std::vector<double> s_u_vals(n), t_sq(n);
  for (int k = 0; k < n; ++k) {
    t_sq[k] = chain_mag[k] * chain_mag[k];
    s_u_vals[k] = t_sq[k] * src.s_y()[k];
  }
  const Spectrum s_u(src.grid(), std::move(s_u_vals));

  EndToEndReport rep;
  rep.theta = ch.theta;
  rep.c_target_bits = ch.solution.bottleneck_bits;
  rep.r_target_bits = ch.solution.rate_bits;
  rep.fir_linf_error = std::max({fir.whitening.linf_error, fir.shaping.linf_error,
                                 fir.prefilter.linf_error});

  rep.predictor = noisy_predictor(s_u, ch.theta, order);
  rep.sigma_2l_sq = noisy_predictor(s_u, ch.theta, 2 * order).sigma_l_sq;
  rep.predictor_gap = rep.sigma_2l_sq > 0.0
                          ? (rep.predictor.sigma_l_sq - rep.sigma_2l_sq) / rep.sigma_2l_sq
                          : 0.0;
  rep.under_modeled = rep.predictor_gap > 1e-3;

  const std::size_t burn =
      std::max<std::size_t>(8 * static_cast<std::size_t>(order),
                            chain.size() + static_cast<std::size_t>(fir.total_delay));
  const std::size_t path_len = length + burn + chain.size();
  const std::vector<double> y = synthesize_path(src.s_y(), path_len, detail::mix_seed(seed, 0));
  std::vector<double> u_full = detail::fft_convolve(y, chain);
  // Steady-state samples only.
  std::vector<double> u(u_full.begin() + static_cast<std::ptrdiff_t>(chain.size() - 1),
                        u_full.begin() + static_cast<std::ptrdiff_t>(chain.size() - 1 + length + burn));

  const LoopTrace tr = run_loop(u, rep.predictor, ch.theta, detail::mix_seed(seed, 1));
  if (trace_out != nullptr) {
    auto tail = [burn](const std::vector<double>& x) {
      return std::vector<double>(x.begin() + static_cast<std::ptrdiff_t>(burn), x.end());
    };
    *trace_out = LoopTrace{tail(tr.u), tail(tr.u_hat), tail(tr.w),
                           tail(tr.q), tail(tr.v),     tail(tr.n_noise), tr.theta};
  }

  std::vector<double> w_sq(tr.w.begin() + static_cast<std::ptrdiff_t>(burn), tr.w.end());
  for (double& v : w_sq) v *= v;
  const detail::BatchStats st = detail::batch_mean(w_sq, 32);
  rep.sigma_w_sq = st.mean;
  rep.samples_used = w_sq.size();

  rep.c_hat_bits = 0.5 * std::log2(1.0 + rep.sigma_w_sq / ch.theta);
  rep.c_se_bits = st.se / (2.0 * detail::kLn2 * (ch.theta + rep.sigma_w_sq));

  rep.r_hat_bits = audit_rates_with_response(t_sq, ch.theta, src).r_bits;
  rep.r_se_bits = 0.0;
  return rep;
}

}  // namespace gaussib
