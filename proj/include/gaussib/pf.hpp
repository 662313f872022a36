#pragma once

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdint>
#include <cstdlib>
#include <limits>
#include <numeric>
#include <string>
#include <thread>
#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "gaussib/detail/random.hpp"
#include "gaussib/errors.hpp"

namespace gaussib {

/// Relaxed vector Gaussian Privacy Funnel instance: minimize over orthogonal
/// U1 and singular values {phi_i}
///   -(1/2n) log2 det(I - U1' Phi^2 U1 V2' Psi^2 V2)
/// subject to -(1/2n) sum log2(1 - phi_i^2) = C1.
struct PfInstance {
  int n = 0;
  Eigen::VectorXd psi;  ///< singular values of the normalized Z-Y cross-covariance
  Eigen::MatrixXd v2;
  double c1_bits = 0.0;

  PfInstance(int dim, Eigen::VectorXd psi_in, Eigen::MatrixXd v2_in, double c1)
      : n(dim), psi(std::move(psi_in)), v2(std::move(v2_in)), c1_bits(c1) {
    if (n < 1 || psi.size() != n || v2.rows() != n || v2.cols() != n)
      throw ConfigError("PfInstance: inconsistent dimensions");
    for (int i = 0; i < n; ++i)
      if (psi[i] < 0.0 || psi[i] >= 1.0)
        throw ModelError("PfInstance: singular values must lie in [0, 1)");
    if ((v2.transpose() * v2 - Eigen::MatrixXd::Identity(n, n)).cwiseAbs().maxCoeff() > 1e-10)
      throw ModelError("PfInstance: v2 is not orthogonal");
    if (c1_bits < 0.0) throw ConfigError("PfInstance: c1 must be >= 0");
  }
};

struct PfSolution {
  Eigen::MatrixXd u1;
  Eigen::VectorXd phi;
  double value_bits = 0.0;
  double grad_norm = 0.0;    ///< stationarity residual at the returned point
  int restart_index = -1;    ///< which restart produced the best point
};

namespace pf_detail {

inline Eigen::MatrixXd psi_quadratic(const PfInstance& inst) {
  return inst.v2.transpose() * inst.psi.array().square().matrix().asDiagonal() * inst.v2;
}

}  // namespace pf_detail

/// Objective value in bits; throws SingularArgument when the determinant
/// argument is not positive definite (some phi_i psi_j at or above 1).
inline double pf_objective(const PfInstance& inst, const Eigen::MatrixXd& u1,
                           const Eigen::VectorXd& phi) {
  const Eigen::MatrixXd a = u1.transpose() * phi.array().square().matrix().asDiagonal() * u1;
  const Eigen::MatrixXd m =
      Eigen::MatrixXd::Identity(inst.n, inst.n) - a * pf_detail::psi_quadratic(inst);
  Eigen::PartialPivLU<Eigen::MatrixXd> lu(m);
  const double det = lu.determinant();
  if (!(det > 0.0)) throw SingularArgument("pf_objective: det(I - A B) <= 0");
  return -std::log2(det) / (2.0 * static_cast<double>(inst.n)) + 0.0;
}

namespace pf_detail {

inline int thread_count() {
  if (const char* env = std::getenv("GAUSSIB_THREADS")) {
    const int v = std::atoi(env);
    if (v >= 1) return v;
  }
  const unsigned hw = std::thread::hardware_concurrency();
  return hw == 0 ? 1 : static_cast<int>(hw);
}

/// Euclidean projection of v onto the simplex {r >= 0, sum r = total}.
inline Eigen::VectorXd project_simplex(Eigen::VectorXd v, double total) {
  const int n = static_cast<int>(v.size());
  std::vector<double> sorted(v.data(), v.data() + n);
  std::sort(sorted.begin(), sorted.end(), std::greater<double>());
  double cum = 0.0, tau = 0.0;
  int support = 0;
  for (int i = 0; i < n; ++i) {
    cum += sorted[i];
    const double t = (cum - total) / static_cast<double>(i + 1);
    if (sorted[i] - t > 0.0) {
      tau = t;
      support = i + 1;
    }
  }
  (void)support;
  for (int i = 0; i < n; ++i) v[i] = std::max(v[i] - tau, 0.0);
  return v;
}

inline Eigen::VectorXd phi_from_rates(const Eigen::VectorXd& rates) {
  return (1.0 - (-2.0 * rates.array() * M_LN2).exp()).sqrt().matrix();
}

/// QR retraction onto the orthogonal group with positive diagonal R.
inline Eigen::MatrixXd retract(const Eigen::MatrixXd& m) {
  Eigen::HouseholderQR<Eigen::MatrixXd> qr(m);
  Eigen::MatrixXd q = qr.householderQ();
  const Eigen::MatrixXd r = qr.matrixQR().triangularView<Eigen::Upper>();
  for (int i = 0; i < m.cols(); ++i)
    if (r(i, i) < 0.0) q.col(i) = -q.col(i);
  return q;
}

struct PfGradients {
  double value_bits = 0.0;
  Eigen::MatrixXd riem_u;   ///< tangent-space gradient at u1
  Eigen::VectorXd grad_r;   ///< Euclidean gradient in the rate coordinates
};

inline PfGradients evaluate(const PfInstance& inst, const Eigen::MatrixXd& b,
                            const Eigen::MatrixXd& u1, const Eigen::VectorXd& rates) {
  const int n = inst.n;
  const Eigen::VectorXd phi_sq = (1.0 - (-2.0 * M_LN2 * rates.array()).exp()).matrix();
  const Eigen::MatrixXd a = u1.transpose() * phi_sq.asDiagonal() * u1;
  const Eigen::MatrixXd m = Eigen::MatrixXd::Identity(n, n) - a * b;

  Eigen::PartialPivLU<Eigen::MatrixXd> lu(m);
  const double det = lu.determinant();
  if (!(det > 0.0)) throw SingularArgument("pf: det(I - A B) <= 0 during optimization");
  const Eigen::MatrixXd m_inv = lu.inverse();

  PfGradients out;
  const double c = 1.0 / (2.0 * static_cast<double>(n) * M_LN2);
  out.value_bits = -std::log2(det) / (2.0 * static_cast<double>(n)) + 0.0;

  // dF/dPhi2_ii = c (U1 B M^-1 U1')_ii ; chain rule through phi^2 = 1-2^(-2r).
  const Eigen::MatrixXd core = u1 * (b * m_inv) * u1.transpose();
  out.grad_r.resize(n);
  for (int i = 0; i < n; ++i)
    out.grad_r[i] = c * core(i, i) * 2.0 * M_LN2 * (1.0 - phi_sq[i]);

  // Euclidean gradient in U1, then projection onto the tangent space.
  const Eigen::MatrixXd g_u =
      c * phi_sq.asDiagonal() * u1 * (b * m_inv + m_inv.transpose() * b);
  const Eigen::MatrixXd utg = u1.transpose() * g_u;
  out.riem_u = g_u - u1 * (0.5 * (utg + utg.transpose()));
  return out;
}

struct RestartResult {
  PfSolution sol;
  bool converged = false;
};

inline RestartResult run_restart(const PfInstance& inst, const Eigen::MatrixXd& b,
                                 Eigen::MatrixXd u1, Eigen::VectorXd rates, int max_iters) {
  const double total = static_cast<double>(inst.n) * inst.c1_bits;
  double step = 1.0;
  PfGradients g = evaluate(inst, b, u1, rates);

  double residual = std::numeric_limits<double>::infinity();
  for (int iter = 0; iter < max_iters; ++iter) {
    const Eigen::VectorXd r_test = project_simplex(rates - g.grad_r, total);
    residual = std::sqrt(g.riem_u.squaredNorm() + (rates - r_test).squaredNorm());
    if (residual <= 1e-6) break;

    bool accepted = false;
    for (int ls = 0; ls < 60; ++ls) {
      const Eigen::MatrixXd u_new = retract(u1 - step * g.riem_u);
      const Eigen::VectorXd r_new = project_simplex(rates - step * g.grad_r, total);
      const double decrease = (u_new - u1).squaredNorm() + (r_new - rates).squaredNorm();
      PfGradients g_new;
      bool ok = true;
      try {
        g_new = evaluate(inst, b, u_new, r_new);
      } catch (const SingularArgument&) {
        ok = false;
      }
      if (ok && g_new.value_bits <= g.value_bits - 1e-4 * decrease / std::max(step, 1e-12)) {
        u1 = u_new;
        rates = r_new;
        g = g_new;
        step = std::min(step * 1.5, 1e3);
        accepted = true;
        break;
      }
      step *= 0.5;
    }
    if (!accepted) break;  // step collapsed; residual re-checked below
  }

  const Eigen::VectorXd r_test = project_simplex(rates - g.grad_r, total);
  residual = std::sqrt(g.riem_u.squaredNorm() + (rates - r_test).squaredNorm());

  RestartResult out;
  out.sol.u1 = u1;
  out.sol.phi = phi_from_rates(rates);
  out.sol.value_bits = g.value_bits;
  out.sol.grad_norm = residual;
  out.converged = residual <= 1e-6;
  return out;
}

}  // namespace pf_detail

/// Minimizes the relaxed PF objective over the rate simplex and the orthogonal
/// group with `restarts` seeded starts (projected gradient + QR retraction).
/// Throws ConvergenceFailure when no restart meets the 1e-6 stationarity
/// tolerance within the iteration cap.
inline PfSolution minimize_pf(const PfInstance& inst, int restarts = 16,
                              std::uint64_t seed = 0, int max_iters = 10000) {
  if (restarts < 1) throw ConfigError("minimize_pf: restarts must be >= 1");
  const int n = inst.n;
  const double total = static_cast<double>(n) * inst.c1_bits;
  const Eigen::MatrixXd b = pf_detail::psi_quadratic(inst);

  std::vector<pf_detail::RestartResult> results(restarts);
  std::atomic<int> next{0};
  const int workers = std::min(pf_detail::thread_count(), restarts);

  auto work = [&]() {
    for (;;) {
      const int idx = next.fetch_add(1);
      if (idx >= restarts) return;
      Eigen::MatrixXd u1;
      Eigen::VectorXd rates(n);
      if (idx == 0) {
        u1 = Eigen::MatrixXd::Identity(n, n);
        rates.setConstant(total / static_cast<double>(n));
      } else {
        detail::GaussianSource gauss(detail::mix_seed(seed, static_cast<std::uint64_t>(idx)));
        Eigen::MatrixXd m(n, n);
        for (int i = 0; i < n; ++i)
          for (int j = 0; j < n; ++j) m(i, j) = gauss();
        u1 = pf_detail::retract(m);
        for (int i = 0; i < n; ++i) rates[i] = std::abs(gauss());
        const double sum = rates.sum();
        rates = sum > 0.0 ? Eigen::VectorXd(rates * (total / sum))
                          : Eigen::VectorXd::Constant(n, total / static_cast<double>(n));
      }
      results[idx] = pf_detail::run_restart(inst, b, u1, rates, max_iters);
    }
  };

  std::vector<std::thread> pool;
  for (int i = 1; i < workers; ++i) pool.emplace_back(work);
  work();
  for (auto& t : pool) t.join();

  int best = -1;
  for (int i = 0; i < restarts; ++i) {
    if (!results[i].converged) continue;
    if (best < 0 || results[i].sol.value_bits < results[best].sol.value_bits) best = i;
  }
  if (best < 0)
    throw ConvergenceFailure("minimize_pf: no restart reached the gradient tolerance");
  PfSolution sol = results[best].sol;
  sol.restart_index = best;
  return sol;
}

/// Builds (psi, V2) from raw covariances via the SVD of
/// Sigma_Z^{-1/2} Sigma_ZY Sigma_Y^{-1/2}.
inline PfInstance make_pf_instance(const Eigen::MatrixXd& sigma_y, const Eigen::MatrixXd& sigma_z,
                                   const Eigen::MatrixXd& sigma_zy, double c1_bits) {
  const int n = static_cast<int>(sigma_y.rows());
  if (sigma_y.cols() != n || sigma_z.rows() != n || sigma_z.cols() != n ||
      sigma_zy.rows() != n || sigma_zy.cols() != n)
    throw ConfigError("make_pf_instance: covariances must be square of one size");

  auto inv_sqrt = [](const Eigen::MatrixXd& m) {
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(0.5 * (m + m.transpose()));
    if (es.eigenvalues().minCoeff() <= 0.0)
      throw ModelError("make_pf_instance: covariance not positive definite");
    return Eigen::MatrixXd(es.eigenvectors() *
                           es.eigenvalues().cwiseSqrt().cwiseInverse().asDiagonal() *
                           es.eigenvectors().transpose());
  };

  const Eigen::MatrixXd normalized = inv_sqrt(sigma_z) * sigma_zy * inv_sqrt(sigma_y);
  Eigen::JacobiSVD<Eigen::MatrixXd> svd(normalized, Eigen::ComputeFullU | Eigen::ComputeFullV);
  return PfInstance(n, svd.singularValues(), svd.matrixV(), c1_bits);
}

}  // namespace gaussib
