#pragma once

#include <algorithm>
#include <cmath>
#include <vector>

#include "cgauge/errors.hpp"
#include "cgauge/kernel.hpp"

namespace cgauge {

struct QuadratureSettings {
  double ball_factor = 0.3;   // singular-ball radius as a fraction of R
  double cutoff_factor = 50.0; // radial cutoff R_max = cutoff_factor * R
  int level = 1;               // refinement level (node counts scale with it)
  double tol = 1e-6;           // requested relative tolerance on T entries
};

namespace detail {

// Gauss-Legendre nodes/weights on [-1,1] by Newton iteration on P_n.
inline void gauss_legendre(int n, std::vector<double> &x,
                           std::vector<double> &w) {
  x.resize(n);
  w.resize(n);
  for (int i = 0; i < (n + 1) / 2; ++i) {
    double z = std::cos(M_PI * (i + 0.75) / (n + 0.5));
    double pp = 0.0;
    for (int it = 0; it < 100; ++it) {
      double p1 = 1.0, p2 = 0.0;
      for (int j = 0; j < n; ++j) {
        const double p3 = p2;
        p2 = p1;
        p1 = ((2.0 * j + 1.0) * z * p2 - j * p3) / (j + 1.0);
      }
      pp = n * (z * p1 - p2) / (z * z - 1.0);
      const double dz = p1 / pp;
      z -= dz;
      if (std::abs(dz) < 1e-15)
        break;
    }
    x[i] = -z;
    x[n - 1 - i] = z;
    w[i] = 2.0 / ((1.0 - z * z) * pp * pp);
    w[n - 1 - i] = w[i];
  }
}

// Pointwise dipole kernel K(y) = (3 y^y^ - I)/|y|^3.
inline Mat3 dipole_kernel(const Vec3 &y) {
  const double s = y.norm();
  const Vec3 sh = y / s;
  return (3.0 * (sh * sh.transpose()) - Mat3::Identity()) / (s * s * s);
}

struct KernelQuadrature {
  double R;
  Vec3 nhat;   // from r_j towards r_i
  Vec3 t1, t2; // completes an orthonormal frame
  double rho;  // singular-ball radius
  double rmax;

  KernelQuadrature(const Vec3 &r, const QuadratureSettings &cfg) {
    R = r.norm();
    nhat = r / R;
    // axis least aligned with nhat seeds the transverse frame
    int ax = 0;
    for (int k = 1; k < 3; ++k)
      if (std::abs(nhat[k]) < std::abs(nhat[ax]))
        ax = k;
    t1 = nhat.cross(Vec3::Unit(ax)).normalized();
    t2 = nhat.cross(t1);
    rho = cfg.ball_factor * R;
    rmax = cfg.cutoff_factor * R;
  }

  Vec3 direction(double mu, double phi) const {
    const double st = std::sqrt(std::max(0.0, 1.0 - mu * mu));
    return mu * nhat + st * (std::cos(phi) * t1 + std::sin(phi) * t2);
  }

  // G = int dx (1/|r_i - x|) K(x - r_j), principal value at x = r_j,
  // assembled from three smooth pieces. Frame: r_j at origin, r_i = R*nhat.
  Mat3 integral(int level) const {
    const int ns = 6 * level + 6;
    const int nmu = 10 * level + 10;
    const int nphi = 2 * nmu;
    std::vector<double> gx, gw;
    gauss_legendre(ns, gx, gw);
    std::vector<double> ax, aw;
    gauss_legendre(nmu, ax, aw);
    const double dphi = 2.0 * M_PI / nphi;
    const Vec3 ri = R * nhat;

    Mat3 G = Mat3::Zero();

    // Piece A: ball |x| < rho about the r_j singularity. The 1/R part of
    // 1/|r_i - x| integrates against K to exactly zero over any such ball,
    // so only the smooth remainder [1/u - 1/R] is quadratured.
    for (int is = 0; is < ns; ++is) {
      const double s = 0.5 * rho * (gx[is] + 1.0);
      const double ws = 0.5 * rho * gw[is];
      for (int im = 0; im < nmu; ++im) {
        for (int ip = 0; ip < nphi; ++ip) {
          const Vec3 sh = direction(ax[im], ip * dphi);
          const Vec3 x = s * sh;
          const double u = (ri - x).norm();
          // s^2 * (1/u - 1/R) * K(s*sh); K carries 1/s^3
          G += (ws * aw[im] * dphi) * (s * s) * (1.0 / u - 1.0 / R) *
               dipole_kernel(x);
        }
      }
    }

    // Piece B: ball |x - r_i| < rho; integrand u*K(x) is smooth there.
    for (int is = 0; is < ns; ++is) {
      const double u = 0.5 * rho * (gx[is] + 1.0);
      const double wu = 0.5 * rho * gw[is];
      for (int im = 0; im < nmu; ++im) {
        for (int ip = 0; ip < nphi; ++ip) {
          const Vec3 x = ri + u * direction(ax[im], ip * dphi);
          G += (wu * aw[im] * dphi) * u * dipole_kernel(x);
        }
      }
    }

    // Piece C: shells rho < |x| < rmax minus the ball about r_i. The
    // excluded spherical cap around nhat is handled exactly through the
    // s-dependent upper limit on mu = cos(theta).
    std::vector<double> edges;
    {
      const double base[] = {0.45, 0.6, 0.8, 0.9,  0.95, 1.0, 1.05,
                             1.1,  1.2, 1.6, 2.0, 3.0,  5.0};
      edges.push_back(rho / R);
      edges.push_back(1.0 - rho / R);
      edges.push_back(1.0 + rho / R);
      for (double e : base)
        edges.push_back(e);
      double g = 5.0;
      while (g < rmax / R) {
        g *= 1.7;
        edges.push_back(std::min(g, rmax / R));
      }
      for (double &e : edges)
        e *= R;
      std::sort(edges.begin(), edges.end());
      edges.erase(std::unique(edges.begin(), edges.end()), edges.end());
    }
    for (std::size_t pe = 0; pe + 1 < edges.size(); ++pe) {
      const double slo = edges[pe], shi = edges[pe + 1];
      if (shi <= rho || slo >= rmax)
        continue;
      for (int is = 0; is < ns; ++is) {
        const double s = 0.5 * (shi + slo) + 0.5 * (shi - slo) * gx[is];
        const double ws = 0.5 * (shi - slo) * gw[is];
        double mu_up = 1.0;
        if (s > R - rho && s < R + rho)
          mu_up = (s * s + R * R - rho * rho) / (2.0 * s * R);
        // two mu panels, denser near the excluded cap
        const double split = mu_up - 0.3 * (mu_up + 1.0);
        const double panels[2][2] = {{-1.0, split}, {split, mu_up}};
        for (const auto &pan : panels) {
          const double half = 0.5 * (pan[1] - pan[0]);
          const double mid = 0.5 * (pan[1] + pan[0]);
          for (int im = 0; im < nmu; ++im) {
            const double mu = mid + half * ax[im];
            const double wmu = half * aw[im];
            for (int ip = 0; ip < nphi; ++ip) {
              const Vec3 x = s * direction(mu, ip * dphi);
              const double u = (ri - x).norm();
              G += (ws * wmu * dphi) * (s * s) * (1.0 / u) * dipole_kernel(x);
            }
          }
        }
      }
    }
    return G;
  }
};

} // namespace detail

// Numerically evaluates T(r) = I/R - (1/4pi) * int dx (1/|r_i-x|)
// grad grad (1/|x-r_j|) with the derivatives taken at the integration
// point (SourcePoint reading flips the sign of the integral term).
// Serves as the oracle for kernel_closed(TransverseLiteral).
inline PairKernel
kernel_quadrature(const Vec3 &r, const QuadratureSettings &cfg = {},
                  InnerGradient reading = InnerGradient::IntegrationPoint) {
  const double R = r.norm();
  if (R == 0.0)
    throw degenerate_configuration_error("kernel_quadrature: zero separation");
  const Vec3 nhat = r / R;

  detail::KernelQuadrature q(r, cfg);
  const Mat3 G_coarse = q.integral(cfg.level);
  const Mat3 G_fine = q.integral(cfg.level + 1);

  const double sgn = (reading == InnerGradient::IntegrationPoint) ? -1.0 : 1.0;
  Mat3 T = Mat3::Identity() / R + sgn / (4.0 * M_PI) * G_fine;
  T = 0.5 * (T + T.transpose().eval());

  const double scale = T.cwiseAbs().maxCoeff();
  const double refine =
      (G_fine - G_coarse).cwiseAbs().maxCoeff() / (4.0 * M_PI * scale);
  // convergence is judged on the refinement change; the estimate also
  // carries the radial-truncation tail bound
  if (refine > cfg.tol)
    throw convergence_error("kernel_quadrature: not converged", refine);
  const double tail = 0.5 * std::pow(R / q.rmax, 3) / (R * scale);
  const double est = refine + tail;

  PairKernel k;
  k.T = T;
  k.R = R;
  const double nTn = nhat.dot(T * nhat);
  k.a = 0.5 * (T.trace() - nTn);
  k.b = nTn - k.a;
  k.estimated_error = est;
  return k;
}

} // namespace cgauge
