#pragma once

#include <cmath>
#include <utility>
#include <vector>

#include "cgauge/kernel.hpp"
#include "cgauge/particles.hpp"
#include "cgauge/units.hpp"

namespace cgauge {

// Sum over unordered pairs of e_i e_j / R_ij.
inline double coulomb_energy(const ParticleSet &ps) {
  double e = 0.0;
  for (int i = 0; i < ps.n(); ++i)
    for (int j = i + 1; j < ps.n(); ++j) {
      const double R = (ps.position[i] - ps.position[j]).norm();
      if (R == 0.0)
        throw degenerate_configuration_error(
            "coulomb_energy: coincident particles");
      e += ps.charge[i] * ps.charge[j] / R;
    }
  return e;
}

// -(e_i e_j)/(2 c^2 m_i m_j R) * [p_i.p_j + (p_i.n)(p_j.n)]
inline double darwin_pair_term(int i, int j, const ParticleSet &ps,
                               const UnitSystem &u) {
  const Vec3 nhat = pair_unit_vector(ps.position[i], ps.position[j]);
  const double R = (ps.position[i] - ps.position[j]).norm();
  const Vec3 &pi = ps.momentum[i];
  const Vec3 &pj = ps.momentum[j];
  const double bracket = pi.dot(pj) + pi.dot(nhat) * pj.dot(nhat);
  return -ps.charge[i] * ps.charge[j] /
         (2.0 * u.c * u.c * ps.mass[i] * ps.mass[j] * R) * bracket;
}

// Kinetic + Coulomb + model-dependent 1/c^2 pair sum. All models share the
// form -sum_{i>j} (e_i e_j / c^2 m_i m_j) p_i . T(r_ij) . p_j, with the
// Darwin factor 1/2 folded into its kernel.
inline double h_total(const ParticleSet &ps, const HamiltonianModel &model,
                      const UnitSystem &u) {
  double H = 0.0;
  for (int i = 0; i < ps.n(); ++i)
    H += ps.momentum[i].squaredNorm() / (2.0 * ps.mass[i]);
  H += coulomb_energy(ps);
  if (model.tag == ModelTag::CoulombOnly)
    return H;
  double alpha, beta;
  kernel_coefficients(model.tag, model.reading, alpha, beta);
  for (int i = 0; i < ps.n(); ++i)
    for (int j = i + 1; j < ps.n(); ++j) {
      const Vec3 d = ps.position[i] - ps.position[j];
      const double R = d.norm();
      const Vec3 nhat = d / R;
      const double g = ps.charge[i] * ps.charge[j] /
                       (u.c * u.c * ps.mass[i] * ps.mass[j]);
      const Vec3 &pi = ps.momentum[i];
      const Vec3 &pj = ps.momentum[j];
      H -= g * (alpha * pi.dot(pj) +
                beta * pi.dot(nhat) * pj.dot(nhat)) /
           R;
    }
  return H;
}

struct PhaseGradients {
  std::vector<Vec3> dH_dr;
  std::vector<Vec3> dH_dp;
};

// Exact analytic gradients of h_total (closed-form kernels only).
inline PhaseGradients gradients(const ParticleSet &ps,
                                const HamiltonianModel &model,
                                const UnitSystem &u) {
  if (model.eval == KernelEval::Quadrature)
    throw unsupported_mode_error(
        "gradients: quadrature kernels are not differentiable paths");
  const int N = ps.n();
  PhaseGradients g;
  g.dH_dr.assign(N, Vec3::Zero());
  g.dH_dp.assign(N, Vec3::Zero());
  for (int i = 0; i < N; ++i)
    g.dH_dp[i] = ps.momentum[i] / ps.mass[i];

  double alpha = 0.0, beta = 0.0;
  kernel_coefficients(model.tag, model.reading, alpha, beta);

  for (int i = 0; i < N; ++i)
    for (int j = i + 1; j < N; ++j) {
      const Vec3 d = ps.position[i] - ps.position[j];
      const double R = d.norm();
      if (R == 0.0)
        throw degenerate_configuration_error("gradients: coincident particles");
      const Vec3 nhat = d / R;
      const double ee = ps.charge[i] * ps.charge[j];

      // Coulomb force
      const Vec3 fc = -ee / (R * R) * nhat;
      g.dH_dr[i] += fc;
      g.dH_dr[j] -= fc;

      if (model.tag == ModelTag::CoulombOnly)
        continue;

      const double gij = ee / (u.c * u.c * ps.mass[i] * ps.mass[j]);
      const Vec3 &pi = ps.momentum[i];
      const Vec3 &pj = ps.momentum[j];
      const double di = pi.dot(nhat), dj = pj.dot(nhat);

      // V = -gij [alpha p_i.p_j + beta d_i d_j] / R
      g.dH_dp[i] -= gij * (alpha * pj + beta * dj * nhat) / R;
      g.dH_dp[j] -= gij * (alpha * pi + beta * di * nhat) / R;

      const Vec3 pi_t = pi - di * nhat; // (I - nn) p_i
      const Vec3 pj_t = pj - dj * nhat;
      const Vec3 dV_dri =
          -gij * (-(alpha * pi.dot(pj) + beta * di * dj) / (R * R) * nhat +
                  beta / (R * R) * (dj * pi_t + di * pj_t));
      g.dH_dr[i] += dV_dri;
      g.dH_dr[j] -= dV_dri;
    }
  return g;
}

} // namespace cgauge
