#pragma once

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <string>
#include <vector>

#include "cgauge/hamiltonian.hpp"

namespace cgauge {

enum class IntegratorMethod { RK4, RK45 };

struct IntegratorConfig {
  IntegratorMethod method = IntegratorMethod::RK45;
  double dt = 1e-3;      // initial (RK45) or fixed (RK4) step
  double tol = 1e-10;    // local error tolerance (adaptive only)
  double t_end = 1.0;
  int record_every = 1;  // snapshot stride over accepted steps

  void validate() const {
    if (!(dt > 0.0) || !(tol > 0.0) || !(t_end > 0.0) || record_every < 1)
      throw config_error("IntegratorConfig: dt, tol, t_end must be positive");
  }
};

struct Trajectory {
  std::vector<double> times;
  std::vector<ParticleSet> snapshots;
  HamiltonianModel model;
  long accepted_steps = 0;
};

struct ConservationReport {
  double energy_drift = 0.0;
  double momentum_drift = 0.0;
  double angular_momentum_drift = 0.0;
};

// Hamilton flow: rdot_i = dH/dp_i, pdot_i = -dH/dr_i.
struct PhaseFlow {
  std::vector<Vec3> rdot, pdot;
};

inline PhaseFlow hamilton_rhs(const ParticleSet &ps,
                              const HamiltonianModel &model,
                              const UnitSystem &u) {
  const PhaseGradients g = gradients(ps, model, u);
  PhaseFlow f;
  f.rdot = g.dH_dp;
  f.pdot.resize(g.dH_dr.size());
  for (std::size_t i = 0; i < g.dH_dr.size(); ++i)
    f.pdot[i] = -g.dH_dr[i];
  return f;
}

namespace detail {

inline std::vector<double> pack(const ParticleSet &ps) {
  std::vector<double> y(6 * ps.n());
  for (int i = 0; i < ps.n(); ++i) {
    for (int k = 0; k < 3; ++k) {
      y[6 * i + k] = ps.position[i][k];
      y[6 * i + 3 + k] = ps.momentum[i][k];
    }
  }
  return y;
}

inline void unpack(const std::vector<double> &y, ParticleSet &ps) {
  for (int i = 0; i < ps.n(); ++i) {
    for (int k = 0; k < 3; ++k) {
      ps.position[i][k] = y[6 * i + k];
      ps.momentum[i][k] = y[6 * i + 3 + k];
    }
  }
}

inline std::vector<double> rhs(const std::vector<double> &y, ParticleSet &work,
                               const HamiltonianModel &model,
                               const UnitSystem &u) {
  unpack(y, work);
  const PhaseFlow f = hamilton_rhs(work, model, u);
  std::vector<double> dy(y.size());
  for (int i = 0; i < work.n(); ++i) {
    for (int k = 0; k < 3; ++k) {
      dy[6 * i + k] = f.rdot[i][k];
      dy[6 * i + 3 + k] = f.pdot[i][k];
    }
  }
  return dy;
}

inline double min_pair_distance(const ParticleSet &ps) {
  double d = std::numeric_limits<double>::infinity();
  for (int i = 0; i < ps.n(); ++i)
    for (int j = i + 1; j < ps.n(); ++j)
      d = std::min(d, (ps.position[i] - ps.position[j]).norm());
  return d;
}

inline void check_collision(const ParticleSet &ps, double t) {
  if (min_pair_distance(ps) < 1e-9)
    throw collision_error("integrate: particle collision at t=" +
                              std::to_string(t),
                          t);
}

// Dormand-Prince 5(4) tableau.
struct DP45 {
  static constexpr double c2 = 1.0 / 5, c3 = 3.0 / 10, c4 = 4.0 / 5,
                          c5 = 8.0 / 9;
  // stage coefficients
  static constexpr double a21 = 1.0 / 5;
  static constexpr double a31 = 3.0 / 40, a32 = 9.0 / 40;
  static constexpr double a41 = 44.0 / 45, a42 = -56.0 / 15, a43 = 32.0 / 9;
  static constexpr double a51 = 19372.0 / 6561, a52 = -25360.0 / 2187,
                          a53 = 64448.0 / 6561, a54 = -212.0 / 729;
  static constexpr double a61 = 9017.0 / 3168, a62 = -355.0 / 33,
                          a63 = 46732.0 / 5247, a64 = 49.0 / 176,
                          a65 = -5103.0 / 18656;
  static constexpr double b1 = 35.0 / 384, b3 = 500.0 / 1113, b4 = 125.0 / 192,
                          b5 = -2187.0 / 6784, b6 = 11.0 / 84;
  // embedded 4th-order weights
  static constexpr double e1 = 5179.0 / 57600, e3 = 7571.0 / 16695,
                          e4 = 393.0 / 640, e5 = -92097.0 / 339200,
                          e6 = 187.0 / 2100, e7 = 1.0 / 40;
};

} // namespace detail

// Integrates Hamilton's equations. Snapshots are recorded at accepted steps
// subsampled by record_every (the initial and final states always included).
// When record_times is nonempty the integrator lands exactly on those times
// and records only there (used to re-integrate on another trajectory's grid).
inline Trajectory integrate(const ParticleSet &ps0,
                            const HamiltonianModel &model, const UnitSystem &u,
                            const IntegratorConfig &cfg,
                            const std::vector<double> &record_times = {}) {
  cfg.validate();
  ps0.validate();
  u.validate();

  Trajectory traj;
  traj.model = model;
  ParticleSet work = ps0;
  std::vector<double> y = detail::pack(ps0);
  double t = 0.0;

  const bool on_grid = !record_times.empty();
  std::size_t next_rec = 0;
  const double t_end = on_grid ? record_times.back() : cfg.t_end;

  auto record = [&](double time) {
    detail::unpack(y, work);
    traj.times.push_back(time);
    traj.snapshots.push_back(work);
  };
  if (on_grid) {
    if (record_times.front() == 0.0) {
      record(0.0);
      ++next_rec;
    }
  } else {
    record(0.0);
  }

  if (cfg.method == IntegratorMethod::RK4) {
    long step = 0;
    while (t < t_end - 1e-15 * t_end) {
      double h = cfg.dt;
      double t_target = t + h;
      if (on_grid && next_rec < record_times.size() &&
          record_times[next_rec] < t_target + 1e-15)
        t_target = record_times[next_rec];
      if (t_target > t_end)
        t_target = t_end;
      h = t_target - t;

      const auto k1 = detail::rhs(y, work, model, u);
      std::vector<double> tmp(y.size());
      for (std::size_t i = 0; i < y.size(); ++i)
        tmp[i] = y[i] + 0.5 * h * k1[i];
      const auto k2 = detail::rhs(tmp, work, model, u);
      for (std::size_t i = 0; i < y.size(); ++i)
        tmp[i] = y[i] + 0.5 * h * k2[i];
      const auto k3 = detail::rhs(tmp, work, model, u);
      for (std::size_t i = 0; i < y.size(); ++i)
        tmp[i] = y[i] + h * k3[i];
      const auto k4 = detail::rhs(tmp, work, model, u);
      for (std::size_t i = 0; i < y.size(); ++i)
        y[i] += h / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]);
      t = t_target;
      ++step;
      ++traj.accepted_steps;
      detail::unpack(y, work);
      detail::check_collision(work, t);
      if (on_grid) {
        if (next_rec < record_times.size() &&
            std::abs(t - record_times[next_rec]) <= 1e-12 * (1.0 + t)) {
          record(t);
          ++next_rec;
        }
      } else if (step % cfg.record_every == 0 || t >= t_end - 1e-15 * t_end) {
        record(t);
      }
    }
    return traj;
  }

  // RK45 (Dormand-Prince) with standard step-size control.
  using T = detail::DP45;
  double h = cfg.dt;
  long step = 0;
  std::vector<double> k1, k2, k3, k4, k5, k6, k7, tmp(y.size()), y5(y.size());
  k1 = detail::rhs(y, work, model, u);
  while (t < t_end * (1.0 - 1e-15)) {
    if (h < 1e-14) {
      // a vanishing step with near-coincident particles is the approach to
      // the point-charge singularity, not generic stiffness
      detail::unpack(y, work);
      if (detail::min_pair_distance(work) < 1e-6)
        throw collision_error("integrate: particle collision at t=" +
                                  std::to_string(t),
                              t);
      throw stiffness_error("integrate: step size underflow at t=" +
                            std::to_string(t));
    }
    bool hit_record = false;
    double t_target = t + h;
    if (on_grid && next_rec < record_times.size() &&
        record_times[next_rec] <= t_target) {
      t_target = record_times[next_rec];
      hit_record = true;
    }
    if (t_target >= t_end) {
      t_target = t_end;
      hit_record = on_grid && next_rec < record_times.size() &&
                   record_times[next_rec] >= t_end;
    }
    const double hs = t_target - t;

    auto stage = [&](const std::vector<double> &coefs,
                     const std::vector<const std::vector<double> *> &ks) {
      for (std::size_t i = 0; i < y.size(); ++i) {
        double acc = y[i];
        for (std::size_t s = 0; s < ks.size(); ++s)
          acc += hs * coefs[s] * (*ks[s])[i];
        tmp[i] = acc;
      }
      return detail::rhs(tmp, work, model, u);
    };
    k2 = stage({T::a21}, {&k1});
    k3 = stage({T::a31, T::a32}, {&k1, &k2});
    k4 = stage({T::a41, T::a42, T::a43}, {&k1, &k2, &k3});
    k5 = stage({T::a51, T::a52, T::a53, T::a54}, {&k1, &k2, &k3, &k4});
    k6 = stage({T::a61, T::a62, T::a63, T::a64, T::a65},
               {&k1, &k2, &k3, &k4, &k5});
    for (std::size_t i = 0; i < y.size(); ++i)
      y5[i] = y[i] + hs * (T::b1 * k1[i] + T::b3 * k3[i] + T::b4 * k4[i] +
                           T::b5 * k5[i] + T::b6 * k6[i]);
    k7 = detail::rhs(y5, work, model, u);

    double err = 0.0;
    for (std::size_t i = 0; i < y.size(); ++i) {
      const double y4 = y[i] + hs * (T::e1 * k1[i] + T::e3 * k3[i] +
                                     T::e4 * k4[i] + T::e5 * k5[i] +
                                     T::e6 * k6[i] + T::e7 * k7[i]);
      // error-per-unit-step control: the local error is held below
      // tol * hs, bounding the accumulated drift by ~ tol * t_end instead
      // of tol * (number of steps). The additive term floors the scale at
      // roundoff so grid-landing micro-steps are not rejected spuriously.
      const double mag = 1.0 + std::max(std::abs(y[i]), std::abs(y5[i]));
      const double sc = cfg.tol * hs * mag + 1e-16 * mag;
      const double d = (y5[i] - y4) / sc;
      err += d * d;
    }
    err = std::sqrt(err / static_cast<double>(y.size()));

    if (err <= 1.0) {
      y.swap(y5);
      k1.swap(k7); // FSAL
      t = t_target;
      ++step;
      ++traj.accepted_steps;
      detail::unpack(y, work);
      detail::check_collision(work, t);
      if (on_grid) {
        if (hit_record) {
          record(t);
          ++next_rec;
        }
      } else if (step % cfg.record_every == 0 || t >= t_end * (1.0 - 1e-15)) {
        record(t);
      }
    }
    // with per-unit-step control the estimate scales as h^4
    const double fac =
        std::clamp(0.9 * std::pow(std::max(err, 1e-10), -0.25), 0.2, 5.0);
    h = hs * fac;
  }
  return traj;
}

// Drifts of H, P = sum p_i and L = sum r_i x p_i along a trajectory,
// with H re-evaluated by h_total at each snapshot.
inline ConservationReport conservation_report(const Trajectory &traj,
                                              const UnitSystem &u) {
  if (traj.snapshots.size() < 2)
    throw config_error("conservation_report: need at least 2 snapshots");
  ConservationReport rep;
  const double H0 = h_total(traj.snapshots.front(), traj.model, u);
  Vec3 P0 = Vec3::Zero(), L0 = Vec3::Zero();
  for (int i = 0; i < traj.snapshots.front().n(); ++i) {
    P0 += traj.snapshots.front().momentum[i];
    L0 += traj.snapshots.front().position[i].cross(
        traj.snapshots.front().momentum[i]);
  }
  const double hscale = std::max(std::abs(H0), 1e-300);
  for (const auto &ps : traj.snapshots) {
    const double H = h_total(ps, traj.model, u);
    Vec3 P = Vec3::Zero(), L = Vec3::Zero();
    for (int i = 0; i < ps.n(); ++i) {
      P += ps.momentum[i];
      L += ps.position[i].cross(ps.momentum[i]);
    }
    rep.energy_drift = std::max(rep.energy_drift, std::abs(H - H0) / hscale);
    rep.momentum_drift = std::max(rep.momentum_drift, (P - P0).norm());
    rep.angular_momentum_drift =
        std::max(rep.angular_momentum_drift, (L - L0).norm());
  }
  return rep;
}

struct DivergenceSeries {
  std::vector<double> times;
  std::vector<double> distance; // per-time max over particles
  std::vector<double> envelope; // monotone-nondecreasing
};

inline DivergenceSeries trajectory_divergence(const Trajectory &a,
                                              const Trajectory &b) {
  if (a.times.size() != b.times.size())
    throw alignment_error("trajectory_divergence: mismatched grids");
  for (std::size_t k = 0; k < a.times.size(); ++k)
    if (std::abs(a.times[k] - b.times[k]) > 1e-12 * (1.0 + a.times[k]))
      throw alignment_error("trajectory_divergence: mismatched grids");
  DivergenceSeries s;
  s.times = a.times;
  double env = 0.0;
  for (std::size_t k = 0; k < a.times.size(); ++k) {
    double d = 0.0;
    for (int i = 0; i < a.snapshots[k].n(); ++i)
      d = std::max(d, (a.snapshots[k].position[i] - b.snapshots[k].position[i])
                          .norm());
    env = std::max(env, d);
    s.distance.push_back(d);
    s.envelope.push_back(env);
  }
  return s;
}

// CSV columns: t, then per particle rx,ry,rz,px,py,pz. 17 significant digits.
inline void write_trajectory_csv(const Trajectory &traj, std::ostream &os) {
  os << "t";
  for (int i = 0; i < traj.snapshots.front().n(); ++i)
    os << ",r" << i << "x,r" << i << "y,r" << i << "z,p" << i << "x,p" << i
       << "y,p" << i << "z";
  os << "\n";
  char buf[32];
  auto put = [&](double v) {
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    os << buf;
  };
  for (std::size_t k = 0; k < traj.times.size(); ++k) {
    put(traj.times[k]);
    const auto &ps = traj.snapshots[k];
    for (int i = 0; i < ps.n(); ++i)
      for (int c = 0; c < 2; ++c) {
        const Vec3 &v = (c == 0) ? ps.position[i] : ps.momentum[i];
        for (int d = 0; d < 3; ++d) {
          os << ",";
          put(v[d]);
        }
      }
    os << "\n";
  }
}

} // namespace cgauge
