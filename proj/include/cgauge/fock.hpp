#pragma once

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <map>
#include <optional>
#include <vector>

#include "cgauge/errors.hpp"
#include "cgauge/particles.hpp"
#include "cgauge/units.hpp"

namespace cgauge {

using IVec3 = Eigen::Vector3i;

struct BoxGeometry {
  double L = 2.0 * M_PI;
  double volume() const { return L * L * L; }
  void validate() const {
    if (!(L > 0.0))
      throw config_error("BoxGeometry: L must be positive");
  }
};

struct CouplingToggles {
  bool include_coulomb = true;
  bool include_current_current = true;
  double c = 137.036;
  double e = 1.0;
  double m = 1.0;
  void validate() const {
    if (!(c > 0.0) || !(m > 0.0))
      throw config_error("CouplingToggles: c and m must be positive");
  }
};

// Plane-wave spin-orbital: k = 2 pi n / L, spin in {+1,-1}.
struct Mode {
  IVec3 n;
  int spin; // +1 or -1
  Vec3 k(const BoxGeometry &g) const {
    return 2.0 * M_PI / g.L * n.cast<double>();
  }
};

inline bool mode_less(const Mode &a, const Mode &b) {
  for (int d = 0; d < 3; ++d)
    if (a.n[d] != b.n[d])
      return a.n[d] < b.n[d];
  return a.spin < b.spin;
}

// All modes with max-norm(n) <= n_max, in the canonical lexicographic order
// on (n, spin) that fixes the fermionic sign convention.
struct ModeTable {
  int n_max = 0;
  std::vector<Mode> modes;

  explicit ModeTable(int n_max_ = 0) : n_max(n_max_) {
    for (int x = -n_max; x <= n_max; ++x)
      for (int y = -n_max; y <= n_max; ++y)
        for (int z = -n_max; z <= n_max; ++z)
          for (int s : {-1, 1})
            modes.push_back({IVec3(x, y, z), s});
  }

  int size() const { return static_cast<int>(modes.size()); }

  // -1 if n lies outside the cutoff
  int index(const IVec3 &n, int spin) const {
    for (int d = 0; d < 3; ++d)
      if (n[d] < -n_max || n[d] > n_max)
        return -1;
    const int w = 2 * n_max + 1;
    const int cell = ((n[0] + n_max) * w + (n[1] + n_max)) * w + (n[2] + n_max);
    return 2 * cell + (spin > 0 ? 1 : 0);
  }
};

// Occupied mode indices in canonical (ascending) order; Pauli exclusion is
// structural. Creation/annihilation signs are counted from that order.
struct FockState {
  std::vector<int> occ;

  bool operator<(const FockState &o) const { return occ < o.occ; }
  bool operator==(const FockState &o) const { return occ == o.occ; }

  // Returns the fermionic sign, or 0 if the mode is absent.
  int annihilate(int mode) {
    const auto it = std::lower_bound(occ.begin(), occ.end(), mode);
    if (it == occ.end() || *it != mode)
      return 0;
    const int pos = static_cast<int>(it - occ.begin());
    occ.erase(it);
    return (pos % 2 == 0) ? 1 : -1;
  }

  // Returns the fermionic sign, or 0 if the mode is already occupied.
  int create(int mode) {
    const auto it = std::lower_bound(occ.begin(), occ.end(), mode);
    if (it != occ.end() && *it == mode)
      return 0;
    const int pos = static_cast<int>(it - occ.begin());
    occ.insert(it, mode);
    return (pos % 2 == 0) ? 1 : -1;
  }
};

// Applies a+_{k,s} a+_{p,s'} a_{p+q,s'} a_{k-q,s} (right to left).
// Null result when any annihilated mode is absent, any created mode is
// already occupied, or any leg falls outside the cutoff.
inline std::optional<std::pair<int, FockState>>
apply_pair_operator(const FockState &state, const ModeTable &table,
                    const IVec3 &k, int spin_k, const IVec3 &p, int spin_p,
                    const IVec3 &q) {
  const int i_ann1 = table.index(k - q, spin_k);
  const int i_ann2 = table.index(p + q, spin_p);
  const int i_cre1 = table.index(p, spin_p);
  const int i_cre2 = table.index(k, spin_k);
  if (i_ann1 < 0 || i_ann2 < 0 || i_cre1 < 0 || i_cre2 < 0)
    return std::nullopt;
  FockState s = state;
  int sign = s.annihilate(i_ann1);
  if (sign == 0)
    return std::nullopt;
  int t = s.annihilate(i_ann2);
  if (t == 0)
    return std::nullopt;
  sign *= t;
  t = s.create(i_cre1);
  if (t == 0)
    return std::nullopt;
  sign *= t;
  t = s.create(i_cre2);
  if (t == 0)
    return std::nullopt;
  sign *= t;
  return std::make_pair(sign, std::move(s));
}

struct SectorBasis {
  BoxGeometry geom;
  ModeTable table{0};
  std::vector<FockState> states;
  std::map<FockState, int> index;
  int N = 0;
  std::optional<IVec3> P_total;   // integer-triple total momentum
  std::optional<int> twice_sz;    // 2 * total spin projection

  int dimension() const { return static_cast<int>(states.size()); }

  int find(const FockState &s) const {
    const auto it = index.find(s);
    return it == index.end() ? -1 : it->second;
  }
};

inline IVec3 state_momentum(const FockState &s, const ModeTable &t) {
  IVec3 p = IVec3::Zero();
  for (int m : s.occ)
    p += t.modes[m].n;
  return p;
}

inline int state_twice_sz(const FockState &s, const ModeTable &t) {
  int sz = 0;
  for (int m : s.occ)
    sz += t.modes[m].spin;
  return sz;
}

// All Pauli-allowed N-mode combinations within the cutoff matching the
// sector labels, in deterministic lexicographic order.
inline SectorBasis
enumerate_sector_basis(const BoxGeometry &geom, int n_max, int N,
                       std::optional<IVec3> P_total = std::nullopt,
                       std::optional<int> twice_sz = std::nullopt,
                       int capacity = 20000) {
  geom.validate();
  if (N < 0 || n_max < 0)
    throw config_error("enumerate_sector_basis: N and n_max must be >= 0");
  SectorBasis basis;
  basis.geom = geom;
  basis.table = ModeTable(n_max);
  basis.N = N;
  basis.P_total = P_total;
  basis.twice_sz = twice_sz;

  const int M = basis.table.size();
  std::vector<int> pick;
  pick.reserve(N);
  auto emit = [&]() {
    FockState s{pick};
    if (P_total && state_momentum(s, basis.table) != *P_total)
      return;
    if (twice_sz && state_twice_sz(s, basis.table) != *twice_sz)
      return;
    if (basis.dimension() >= capacity)
      throw capacity_error("enumerate_sector_basis: dimension above cap");
    basis.index.emplace(s, basis.dimension());
    basis.states.push_back(std::move(s));
  };
  // depth-first over ascending index combinations
  std::vector<int> stack;
  auto rec = [&](auto &&self, int start) -> void {
    if (static_cast<int>(pick.size()) == N) {
      emit();
      return;
    }
    const int need = N - static_cast<int>(pick.size());
    for (int m = start; m <= M - need; ++m) {
      pick.push_back(m);
      self(self, m + 1);
      pick.pop_back();
    }
  };
  rec(rec, 0);
  return basis;
}

// (1/2) * 4 pi e^2 / (Omega q^2), the discrete Coulomb coefficient attached
// to the a+_{k,s} a+_{p,s'} a_{p+q,s'} a_{k-q,s} operator string.
inline double coulomb_coefficient(const IVec3 &q, const BoxGeometry &geom,
                                  const CouplingToggles &tog) {
  if (q == IVec3::Zero())
    throw excluded_transfer_error("coulomb_coefficient: q = 0 excluded "
                                  "(uniform neutralizing background)");
  const Vec3 qp = 2.0 * M_PI / geom.L * q.cast<double>();
  return 0.5 * 4.0 * M_PI * tog.e * tog.e / (geom.volume() * qp.squaredNorm());
}

// -(e^2 hbar^2/(m^2 c^2 Omega)) * (2 pi/q^2) * (k.p - (q.k)(q.p)/q^2)
inline double current_current_coefficient(const IVec3 &k, const IVec3 &p,
                                          const IVec3 &q,
                                          const BoxGeometry &geom,
                                          const CouplingToggles &tog,
                                          const UnitSystem &u) {
  if (q == IVec3::Zero())
    throw excluded_transfer_error("current_current_coefficient: q = 0 excluded");
  const double f = 2.0 * M_PI / geom.L;
  const Vec3 kp = f * k.cast<double>();
  const Vec3 pp = f * p.cast<double>();
  const Vec3 qp = f * q.cast<double>();
  const double q2 = qp.squaredNorm();
  const double bracket = kp.dot(pp) - qp.dot(kp) * qp.dot(pp) / q2;
  return -(tog.e * tog.e * u.hbar * u.hbar) /
         (tog.m * tog.m * tog.c * tog.c * geom.volume()) * (2.0 * M_PI / q2) *
         bracket;
}

// Kinetic diagonal with minimal substitution: (hbar k - (e/c) A_ext)^2 / 2m
// summed over occupied modes. The interaction coefficients are deliberately
// left untouched (their modification would enter only at order 1/c^3).
inline Eigen::VectorXd kinetic_diagonal(const SectorBasis &basis,
                                        const CouplingToggles &tog,
                                        const UnitSystem &u,
                                        const Vec3 &A_ext = Vec3::Zero()) {
  Eigen::VectorXd diag(basis.dimension());
  for (int s = 0; s < basis.dimension(); ++s) {
    double E = 0.0;
    for (int m : basis.states[s].occ) {
      const Vec3 hk = u.hbar * basis.table.modes[m].k(basis.geom) -
                      (tog.e / tog.c) * A_ext;
      E += hk.squaredNorm() / (2.0 * tog.m);
    }
    diag[s] = E;
  }
  return diag;
}

// Assembles H on the sector: kinetic diagonal plus the Coulomb and
// current-current pair terms over all (k,p,q != 0) with all four legs inside
// the cutoff. Exactly Hermitian by construction (real, symmetrized).
inline Eigen::MatrixXd assemble_hamiltonian(const SectorBasis &basis,
                                            const CouplingToggles &tog,
                                            const UnitSystem &u,
                                            const Vec3 &A_ext = Vec3::Zero()) {
  tog.validate();
  u.validate();
  if (basis.dimension() == 0)
    throw config_error("assemble_hamiltonian: empty basis");
  const int dim = basis.dimension();
  Eigen::MatrixXd H = Eigen::MatrixXd::Zero(dim, dim);
  H.diagonal() = kinetic_diagonal(basis, tog, u, A_ext);

  if (!tog.include_coulomb && !tog.include_current_current)
    return H;

  const int n_max = basis.table.n_max;
  const int qr = 2 * n_max;
  for (int col = 0; col < dim; ++col) {
    const FockState &s = basis.states[col];
    const int no = static_cast<int>(s.occ.size());
    for (int ia = 0; ia < no; ++ia) {
      for (int ib = 0; ib < no; ++ib) {
        if (ia == ib)
          continue;
        const Mode &A = basis.table.modes[s.occ[ia]]; // (k-q, s)
        const Mode &B = basis.table.modes[s.occ[ib]]; // (p+q, s')
        for (int qx = -qr; qx <= qr; ++qx)
          for (int qy = -qr; qy <= qr; ++qy)
            for (int qz = -qr; qz <= qr; ++qz) {
              const IVec3 q(qx, qy, qz);
              if (q == IVec3::Zero())
                continue;
              const IVec3 k = A.n + q;
              const IVec3 p = B.n - q;
              const auto res = apply_pair_operator(s, basis.table, k, A.spin,
                                                   p, B.spin, q);
              if (!res)
                continue;
              const int row = basis.find(res->second);
              if (row < 0)
                continue; // leaves the sector (cannot happen; see tests)
              double coeff = 0.0;
              if (tog.include_coulomb)
                coeff += coulomb_coefficient(q, basis.geom, tog);
              if (tog.include_current_current)
                coeff += current_current_coefficient(k, p, q, basis.geom, tog,
                                                     u);
              H(row, col) += res->first * coeff;
            }
      }
    }
  }
  // coefficients are real and the term list is conjugation-symmetric; make
  // the matrix bitwise symmetric
  for (int i = 0; i < dim; ++i)
    for (int j = i + 1; j < dim; ++j) {
      const double v = 0.5 * (H(i, j) + H(j, i));
      H(i, j) = v;
      H(j, i) = v;
    }
  return H;
}

// <j(x)> for a sector state: paramagnetic (e hbar/m Omega) sum k <n_k>
// plus the diamagnetic -(e^2/mc) <density> A_ext term. Within a fixed
// total-momentum sector the observable is x-independent.
inline Vec3 current_density_expectation(const Eigen::VectorXd &v,
                                        const SectorBasis &basis,
                                        const Vec3 & /*x*/, const Vec3 &A_ext,
                                        const CouplingToggles &tog,
                                        const UnitSystem &u) {
  if (std::abs(v.norm() - 1.0) > 1e-10)
    throw normalization_error("current_density_expectation: state vector "
                              "not normalized");
  const double Omega = basis.geom.volume();
  Vec3 j = Vec3::Zero();
  double nbar = 0.0;
  for (int s = 0; s < basis.dimension(); ++s) {
    const double w = v[s] * v[s];
    for (int m : basis.states[s].occ)
      j += w * (tog.e * u.hbar / (tog.m * Omega)) *
           basis.table.modes[m].k(basis.geom);
    nbar += w * static_cast<double>(basis.states[s].occ.size());
  }
  j -= (tog.e * tog.e / (tog.m * tog.c)) * (nbar / Omega) * A_ext;
  return j;
}

} // namespace cgauge
