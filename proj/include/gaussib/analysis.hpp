#pragma once

#include <algorithm>
#include <cmath>
#include <functional>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "gaussib/errors.hpp"
#include "gaussib/spectra.hpp"
#include "gaussib/waterfill.hpp"

namespace gaussib {

/// Jointly Gaussian vector pair; the constructor checks the joint covariance
/// is positive semidefinite up to a 1e-9 relative tolerance.
struct GaussianVectorPair {
  Eigen::MatrixXd sigma_x, sigma_y, sigma_xy;

  GaussianVectorPair(Eigen::MatrixXd sx, Eigen::MatrixXd sy, Eigen::MatrixXd sxy)
      : sigma_x(std::move(sx)), sigma_y(std::move(sy)), sigma_xy(std::move(sxy)) {
    const int n = static_cast<int>(sigma_x.rows());
    const int m = static_cast<int>(sigma_y.rows());
    if (sigma_x.cols() != n || sigma_y.cols() != m || sigma_xy.rows() != n ||
        sigma_xy.cols() != m)
      throw ConfigError("GaussianVectorPair: inconsistent dimensions");
    Eigen::MatrixXd joint(n + m, n + m);
    joint << sigma_x, sigma_xy, sigma_xy.transpose(), sigma_y;
    joint = 0.5 * (joint + joint.transpose());
    const double scale = std::max(joint.diagonal().maxCoeff(), 1e-300);
    const Eigen::MatrixXd jittered =
        joint + 1e-9 * scale * Eigen::MatrixXd::Identity(n + m, n + m);
    if (Eigen::LLT<Eigen::MatrixXd>(jittered).info() != Eigen::Success)
      throw ModelError("GaussianVectorPair: joint covariance is not positive semidefinite");
  }
};

namespace detail {

inline double logdet_spd(const Eigen::MatrixXd& m, const char* what) {
  const Eigen::MatrixXd sym = 0.5 * (m + m.transpose());
  Eigen::LLT<Eigen::MatrixXd> llt(sym);
  if (llt.info() != Eigen::Success) throw SingularNoise(std::string(what) + ": not positive definite");
  double acc = 0.0;
  const auto& l = llt.matrixLLT();
  for (int i = 0; i < sym.rows(); ++i) acc += std::log(l(i, i));
  return 2.0 * acc;
}

}  // namespace detail

/// Exact Gaussian mutual information in bits,
/// I(X;Y) = (1/2) log |Sigma_Y| / |Sigma_W| with Sigma_W the Schur complement.
inline double gaussian_mi(const GaussianVectorPair& pair) {
  Eigen::LLT<Eigen::MatrixXd> llt_x(0.5 * (pair.sigma_x + pair.sigma_x.transpose()));
  if (llt_x.info() != Eigen::Success)
    throw SingularNoise("gaussian_mi: Sigma_X not positive definite");
  const Eigen::MatrixXd schur =
      pair.sigma_y - pair.sigma_xy.transpose() * llt_x.solve(pair.sigma_xy);
  const double logdet_y = detail::logdet_spd(pair.sigma_y, "gaussian_mi: Sigma_Y");
  const double logdet_w = detail::logdet_spd(schur, "gaussian_mi: Sigma_W");
  return 0.5 * (logdet_y - logdet_w) / detail::kLn2;
}

/// Cross-covariance Toeplitz block (Sigma_XY)_{ij} = R_XY[j - i] with
/// R_XY[k] = int S_XY(f) e^{j 2 pi k f} df (real for Hermitian cross-spectra).
inline Eigen::MatrixXd cross_toeplitz(const CrossSpectrum& s_xy, int n) {
  const int grid_n = s_xy.size();
  std::vector<double> r(2 * n - 1);  // lags -(n-1) .. n-1
  for (int lag = -(n - 1); lag <= n - 1; ++lag) {
    double acc = 0.0;
    for (int m = 0; m < grid_n; ++m) {
      const double ang = 2.0 * M_PI * lag * s_xy.grid().frequency(m);
      acc += s_xy[m].real() * std::cos(ang) - s_xy[m].imag() * std::sin(ang);
    }
    r[static_cast<std::size_t>(lag + n - 1)] = acc / static_cast<double>(grid_n);
  }
  Eigen::MatrixXd out(n, n);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) out(i, j) = r[static_cast<std::size_t>(j - i + n - 1)];
  return out;
}

struct SzegoRow {
  int n = 0;
  double mi_per_symbol_bits = 0.0;
  double gap_bits = 0.0;  ///< |spectral MI rate - per-symbol MI|
};

struct SzegoTable {
  double spectral_mi_bits = 0.0;  ///< (1/2) int log2(1 + Gamma) df
  std::vector<SzegoRow> rows;
};

/// Per-symbol Toeplitz mutual information against the spectral limit for each
/// block size.
inline SzegoTable szego_convergence(const BivariateSpectra& src, const std::vector<int>& sizes) {
  SzegoTable table;
  table.spectral_mi_bits = mi_rate_bits(snr_spectrum(src));
  for (int n : sizes) {
    if (n < 1) throw ConfigError("szego_convergence: sizes must be >= 1");
    GaussianVectorPair pair(toeplitz_covariance(src.s_x(), n), toeplitz_covariance(src.s_y(), n),
                            cross_toeplitz(src.s_xy(), n));
    const double per_symbol = gaussian_mi(pair) / static_cast<double>(n);
    table.rows.push_back(SzegoRow{n, per_symbol, std::abs(table.spectral_mi_bits - per_symbol)});
  }
  return table;
}

struct MeasureEquivalence {
  std::vector<double> d;      ///< singular values of the normalized correlation matrix
  std::vector<double> gamma;  ///< eigenvalues of the SNR matrix
  double max_mismatch = 0.0;  ///< max |gamma_i - d_i^2/(1-d_i^2)| / (1+gamma_i)
};

/// Computes both covariance measures (normalized correlation singular values
/// and SNR eigenvalues) and their normalized mismatch, sorted descending.
inline MeasureEquivalence measure_equivalence(const GaussianVectorPair& pair) {
  const int n = static_cast<int>(pair.sigma_x.rows());

  auto inv_sqrt = [](const Eigen::MatrixXd& m, const char* what) {
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(0.5 * (m + m.transpose()));
    if (es.eigenvalues().minCoeff() <= 0.0)
      throw SingularNoise(std::string(what) + ": not positive definite");
    return Eigen::MatrixXd(es.eigenvectors() *
                           es.eigenvalues().cwiseSqrt().cwiseInverse().asDiagonal() *
                           es.eigenvectors().transpose());
  };

  const Eigen::MatrixXd cor =
      inv_sqrt(pair.sigma_x, "measure_equivalence: Sigma_X") * pair.sigma_xy *
      inv_sqrt(pair.sigma_y, "measure_equivalence: Sigma_Y");
  Eigen::JacobiSVD<Eigen::MatrixXd> svd(cor);
  Eigen::VectorXd d = svd.singularValues();

  for (int i = 0; i < n; ++i)
    if (d[i] >= 1.0 - 1e-12)
      throw SingularNoise("measure_equivalence: correlation at or above one");

  // SNR matrix: Sigma_W^{-1/2} K Sigma_X K' Sigma_W^{-1/2}, K = Sigma_XY' Sigma_X^{-1}.
  Eigen::LLT<Eigen::MatrixXd> llt_x(0.5 * (pair.sigma_x + pair.sigma_x.transpose()));
  if (llt_x.info() != Eigen::Success)
    throw SingularNoise("measure_equivalence: Sigma_X not positive definite");
  const Eigen::MatrixXd quad = pair.sigma_xy.transpose() * llt_x.solve(pair.sigma_xy);
  const Eigen::MatrixXd sigma_w = pair.sigma_y - quad;
  const Eigen::MatrixXd w_inv_sqrt = inv_sqrt(sigma_w, "measure_equivalence: Sigma_W");
  const Eigen::MatrixXd snr = w_inv_sqrt * quad * w_inv_sqrt;

  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(0.5 * (snr + snr.transpose()));
  Eigen::VectorXd gamma = es.eigenvalues();

  MeasureEquivalence out;
  out.d.assign(d.data(), d.data() + d.size());
  out.gamma.assign(gamma.data(), gamma.data() + gamma.size());
  std::sort(out.d.begin(), out.d.end(), std::greater<double>());
  std::sort(out.gamma.begin(), out.gamma.end(), std::greater<double>());

  const std::size_t count = std::min(out.d.size(), out.gamma.size());
  for (std::size_t i = 0; i < count; ++i) {
    const double mapped = out.d[i] * out.d[i] / (1.0 - out.d[i] * out.d[i]);
    out.max_mismatch =
        std::max(out.max_mismatch, std::abs(out.gamma[i] - mapped) / (1.0 + out.gamma[i]));
  }
  return out;
}

/// Central finite differences against a supplied analytic gradient; returns
/// the max relative component error.
inline double grad_check(const std::function<double(const Eigen::VectorXd&)>& f,
                         const Eigen::VectorXd& point, const Eigen::VectorXd& analytic_grad,
                         double h) {
  if (h < 1e-7 || h > 1e-4) throw ConfigError("grad_check: h must be in [1e-7, 1e-4]");
  double worst = 0.0;
  Eigen::VectorXd x = point;
  for (int i = 0; i < point.size(); ++i) {
    x[i] = point[i] + h;
    const double fp = f(x);
    x[i] = point[i] - h;
    const double fm = f(x);
    x[i] = point[i];
    const double fd = (fp - fm) / (2.0 * h);
    const double denom = std::max({1.0, std::abs(fd), std::abs(analytic_grad[i])});
    worst = std::max(worst, std::abs(fd - analytic_grad[i]) / denom);
  }
  return worst;
}

}  // namespace gaussib
