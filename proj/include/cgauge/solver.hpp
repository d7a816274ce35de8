#pragma once

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <vector>

#include "cgauge/errors.hpp"

namespace cgauge {

struct Spectrum {
  Eigen::VectorXd eigenvalues; // ascending; full for dense, extremal only
                               // for the iterative path
  Eigen::VectorXd ground;
};

namespace detail {

// Lanczos with full reorthogonalization, lowest eigenpair.
inline void lanczos_ground(const Eigen::MatrixXd &H, double &e0,
                           Eigen::VectorXd &v0, int max_iter) {
  const int dim = static_cast<int>(H.rows());
  Eigen::VectorXd q = Eigen::VectorXd::Constant(dim, 1.0);
  q.normalize();
  std::vector<Eigen::VectorXd> Q{q};
  std::vector<double> alpha, beta;
  for (int it = 0; it < std::min(dim, max_iter); ++it) {
    Eigen::VectorXd w = H * Q.back();
    const double a = Q.back().dot(w);
    alpha.push_back(a);
    for (const auto &qi : Q)
      w -= qi.dot(w) * qi;
    for (const auto &qi : Q) // second pass for stability
      w -= qi.dot(w) * qi;
    const double b = w.norm();
    // tridiagonal eigenproblem of the current Krylov space
    const int m = static_cast<int>(alpha.size());
    Eigen::MatrixXd T = Eigen::MatrixXd::Zero(m, m);
    for (int i = 0; i < m; ++i) {
      T(i, i) = alpha[i];
      if (i + 1 < m)
        T(i, i + 1) = T(i + 1, i) = beta[i];
    }
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(T);
    e0 = es.eigenvalues()[0];
    const Eigen::VectorXd s = es.eigenvectors().col(0);
    if (b < 1e-13 || std::abs(b * s[m - 1]) < 1e-12 || m == dim) {
      v0 = Eigen::VectorXd::Zero(dim);
      for (int i = 0; i < m; ++i)
        v0 += s[i] * Q[i];
      v0.normalize();
      return;
    }
    beta.push_back(b);
    Q.push_back(w / b);
  }
  throw solver_error("lanczos_ground: no convergence", -1.0);
}

} // namespace detail

// Dense full spectrum up to dimension 2000; Lanczos ground pair beyond.
// Residual contract: ||H v0 - e0 v0|| <= 1e-10 ||H||.
inline Spectrum diagonalize(const Eigen::MatrixXd &H, int max_iter = 500) {
  const int dim = static_cast<int>(H.rows());
  if (dim < 1)
    throw config_error("diagonalize: empty matrix");
  Spectrum sp;
  if (dim <= 2000) {
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(H);
    sp.eigenvalues = es.eigenvalues();
    sp.ground = es.eigenvectors().col(0);
  } else {
    double e0 = 0.0;
    detail::lanczos_ground(H, e0, sp.ground, max_iter);
    sp.eigenvalues = Eigen::VectorXd::Constant(1, e0);
  }
  const double res = (H * sp.ground - sp.eigenvalues[0] * sp.ground).norm();
  const double scale = H.norm();
  if (scale > 0.0 && res > 1e-10 * scale)
    throw solver_error("diagonalize: residual above tolerance", res);
  return sp;
}

} // namespace cgauge
