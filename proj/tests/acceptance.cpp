// Acceptance gate: runs every primary criterion at its stated tolerance and
// prints exactly one PASS/FAIL line per criterion. Exit code is the number
// of failed criteria.
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <random>
#include <sstream>
#include <string>
#include <sys/wait.h>

#include "cgauge/dynamics.hpp"
#include "cgauge/qed.hpp"
#include "cgauge/quadrature.hpp"
#include "cgauge/solver.hpp"
#include "oracles.hpp"

namespace fs = std::filesystem;
using namespace cgauge;

namespace {

int failures = 0;

std::string sci(double v) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.3e", v);
  return buf;
}


void criterion(int id, const std::string &name,
               const std::function<bool(std::string &)> &body) {
  std::string detail;
  bool ok = false;
  try {
    ok = body(detail);
  } catch (const std::exception &e) {
    detail = std::string("exception: ") + e.what();
  }
  std::printf("[%s] criterion %d: %s%s%s\n", ok ? "PASS" : "FAIL", id,
              name.c_str(), detail.empty() ? "" : " -- ", detail.c_str());
  if (!ok)
    ++failures;
}

ParticleSet orbit_pair(double c_light, double a = 1.0) {
  (void)c_light;
  ParticleSet ps;
  ps.mass = {1.0, 1.0};
  ps.charge = {1.0, -1.0};
  ps.position = {Vec3(a / 2, 0, 0), Vec3(-a / 2, 0, 0)};
  const double omega = std::sqrt(1.0 / (0.5 * a * a * a));
  const double v = omega * a / 2.0;
  ps.momentum = {Vec3(0, v, 0), Vec3(0, -v, 0)};
  return ps;
}

} // namespace

int main() {
  // 1. Photon-exchange amplitude vs momentum-space coefficient.
  criterion(1, "QED path equivalence over 100+ lattice triples (<= 1e-10)",
            [](std::string &detail) {
              BoxGeometry geom;
              UnitSystem u;
              CouplingToggles cp;
              const auto rep = equivalence_report(250, 90210, geom, u, cp);
              detail = "max_rel_diff=" + sci(rep.max_rel_diff);
              return rep.samples >= 100 && rep.max_rel_diff <= 1e-10;
            });

  // 2. Transverse completeness of the polarization pair.
  criterion(2, "polarization completeness over 1000 random q (1e-14)",
            [](std::string &detail) {
              std::mt19937_64 rng(4711);
              std::uniform_int_distribution<int> d(-8, 8);
              double worst = 0.0;
              int done = 0;
              while (done < 1000) {
                const IVec3 q(d(rng), d(rng), d(rng));
                if (q == IVec3::Zero())
                  continue;
                const Vec3 qhat = q.cast<double>().normalized();
                const Mat3 gap = polarization_sum(q) -
                                 (Mat3::Identity() - qhat * qhat.transpose());
                worst = std::max(worst, gap.cwiseAbs().maxCoeff());
                ++done;
              }
              detail = "max_entry_gap=" + sci(worst);
              return worst <= 1e-14;
            });

  // 3. Closed-form transverse kernel vs 3D quadrature on a 5x5 grid.
  criterion(3, "kernel oracle agreement on 5x5 (R, direction) grid (1e-5)",
            [](std::string &detail) {
              const double radii[5] = {0.5, 0.8, 1.0, 1.7, 3.0};
              const Vec3 dirs[5] = {Vec3(1, 0, 0), Vec3(0, 1, 0),
                                    Vec3(1, 1, 1), Vec3(0.2, -1.0, 0.4),
                                    Vec3(-0.7, 0.3, 1.1)};
              HamiltonianModel lit;
              lit.tag = ModelTag::TransverseLiteral;
              double worst = 0.0;
              for (double R : radii)
                for (const Vec3 &d : dirs) {
                  const Vec3 r = R * d.normalized();
                  const PairKernel q = kernel_quadrature(r);
                  const PairKernel c = kernel_closed(lit, r);
                  worst = std::max(worst,
                                   (q.T - c.T).cwiseAbs().maxCoeff() /
                                       c.T.cwiseAbs().maxCoeff());
                }
              // Darwin-reading kernel is (I + nn)/2R exactly
              HamiltonianModel dw;
              dw.tag = ModelTag::Darwin;
              const Vec3 rd(0, 0, 2.0);
              const Mat3 expect =
                  (Mat3::Identity() + Vec3::UnitZ() * Vec3::UnitZ().transpose()) /
                  4.0;
              const bool darwin_exact =
                  (kernel_closed(dw, rd).T - expect).cwiseAbs().maxCoeff() ==
                  0.0;
              detail = "max_rel_gap=" + sci(worst) +
                       (darwin_exact ? ", darwin exact" : ", darwin NOT exact");
              return worst <= 1e-5 && darwin_exact;
            });

  // 4. Darwin vs transverse-bracket discrepancy artifact with error bars.
  criterion(4, "Darwin-vs-transverse discrepancy artifact with error bars",
            [](std::string &detail) {
              fs::create_directories("acceptance_artifacts");
              std::ofstream csv(
                  "acceptance_artifacts/darwin_vs_transverse.csv",
                  std::ios::binary);
              csv << "R,a_darwin,b_darwin,a_transverse,b_transverse,"
                     "delta_a,delta_b,quadrature_error\n";
              HamiltonianModel dw, lit;
              dw.tag = ModelTag::Darwin;
              lit.tag = ModelTag::TransverseLiteral;
              bool nonzero = false, resolved = true;
              for (double R : {0.5, 1.0, 2.0, 4.0}) {
                const Vec3 r(R, 0, 0);
                const PairKernel kd = kernel_closed(dw, r);
                const PairKernel kq = kernel_quadrature(r);
                const double da = kq.a - kd.a, db = kq.b - kd.b;
                char line[320];
                std::snprintf(line, sizeof(line),
                              "%.17g,%.17g,%.17g,%.17g,%.17g,%.17g,%.17g,"
                              "%.17g\n",
                              R, kd.a, kd.b, kq.a, kq.b, da, db,
                              kq.estimated_error);
                csv << line;
                // findings must clear their own quadrature error bars
                const double bar =
                    kq.estimated_error * std::abs(kq.T.cwiseAbs().maxCoeff());
                if (std::abs(da) > bar && std::abs(db) > bar)
                  nonzero = true;
                else
                  resolved = false;
              }
              detail = "acceptance_artifacts/darwin_vs_transverse.csv";
              return csv.good() && nonzero && resolved;
            });

  // 5. Conservation over long adaptive two-body runs, every model.
  criterion(5, "two-body conservation, 1e4+ accepted RK45 steps, all models",
            [](std::string &detail) {
              UnitSystem u;
              u.c = 10.0;
              double worst_e = 0.0, worst_p = 0.0;
              long min_steps = std::numeric_limits<long>::max();
              for (ModelTag tag :
                   {ModelTag::CoulombOnly, ModelTag::Darwin,
                    ModelTag::TransverseLiteral,
                    ModelTag::TransverseProjection}) {
                IntegratorConfig cfg;
                cfg.tol = 1e-10;
                cfg.t_end = 500.0;
                cfg.record_every = 20;
                const Trajectory tr =
                    integrate(orbit_pair(u.c), {tag}, u, cfg);
                const auto rep = conservation_report(tr, u);
                worst_e = std::max(worst_e, rep.energy_drift);
                worst_p = std::max(worst_p, rep.momentum_drift);
                min_steps = std::min(min_steps, tr.accepted_steps);
              }
              detail = "steps>=" + std::to_string(min_steps) +
                       ", energy_drift=" + sci(worst_e) +
                       ", momentum_drift=" + sci(worst_p);
              return min_steps >= 10000 && worst_e <= 1e-7 && worst_p <= 1e-9;
            });

  // 6. Analytic gradients vs central finite differences.
  criterion(6, "gradients vs finite differences, 20 configs/model (1e-6)",
            [](std::string &detail) {
              std::mt19937_64 rng(2024);
              UnitSystem u;
              u.c = 7.0;
              double worst = 0.0;
              for (ModelTag tag :
                   {ModelTag::CoulombOnly, ModelTag::Darwin,
                    ModelTag::TransverseLiteral,
                    ModelTag::TransverseProjection}) {
                for (int rep = 0; rep < 20; ++rep) {
                  const ParticleSet ps = oracles::random_particles(3, rng);
                  const auto an = gradients(ps, {tag}, u);
                  const auto fd =
                      oracles::finite_difference_gradients(ps, {tag}, u);
                  for (int i = 0; i < ps.n(); ++i) {
                    const double s =
                        std::max({fd.dH_dr[i].norm(), fd.dH_dp[i].norm(), 1.0});
                    worst = std::max(
                        worst, (an.dH_dr[i] - fd.dH_dr[i]).norm() / s);
                    worst = std::max(
                        worst, (an.dH_dp[i] - fd.dH_dp[i]).norm() / s);
                  }
                }
              }
              detail = "max_rel_gap=" + sci(worst);
              return worst <= 1e-6;
            });

  // 7. Structural guarantees of the second-quantized assembly.
  criterion(7, "quantum structural suite (Hermiticity, N<=1, blocks, oracle)",
            [](std::string &detail) {
              BoxGeometry geom;
              UnitSystem u;
              u.c = 4.0;
              CouplingToggles tog;
              tog.c = 4.0;

              // exact Hermiticity + N <= 1 sectors purely kinetic
              bool ok = true;
              for (int N : {0, 1}) {
                if (N == 0)
                  continue; // no states to assemble in the vacuum sector
                const SectorBasis b = enumerate_sector_basis(geom, 1, N);
                const Eigen::MatrixXd H = assemble_hamiltonian(b, tog, u);
                ok = ok && (H - H.transpose()).cwiseAbs().maxCoeff() == 0.0;
                Eigen::MatrixXd off = H;
                off.diagonal().setZero();
                ok = ok && off.cwiseAbs().maxCoeff() == 0.0;
              }

              const SectorBasis full = enumerate_sector_basis(
                  geom, 1, 2, std::nullopt, std::nullopt, 2000);
              const Eigen::MatrixXd Hf = assemble_hamiltonian(full, tog, u);
              ok = ok && (Hf - Hf.transpose()).cwiseAbs().maxCoeff() == 0.0;
              for (int i = 0; ok && i < full.dimension(); ++i)
                for (int j = 0; ok && j < full.dimension(); ++j)
                  if (Hf(i, j) != 0.0 &&
                      (state_momentum(full.states[i], full.table) !=
                           state_momentum(full.states[j], full.table) ||
                       state_twice_sz(full.states[i], full.table) !=
                           state_twice_sz(full.states[j], full.table)))
                    ok = false;

              // N = 2 spectra vs the first-quantized antisymmetrized oracle
              double worst = 0.0;
              for (int sz : {0, 2}) {
                const SectorBasis b =
                    enumerate_sector_basis(geom, 1, 2, IVec3::Zero(), sz);
                const Eigen::MatrixXd H = assemble_hamiltonian(b, tog, u);
                const Eigen::MatrixXd O =
                    oracles::first_quantized_two_body(b, tog, u);
                const Eigen::VectorXd ev = diagonalize(H).eigenvalues;
                const Eigen::VectorXd eo = diagonalize(O).eigenvalues;
                worst = std::max(worst, (ev - eo).cwiseAbs().maxCoeff());
              }
              detail = "spectrum_gap=" + sci(worst);
              return ok && worst <= 1e-12;
            });

  // 8. 1/c^2 scaling of the current-current effects.
  criterion(8, "1/c^2 scaling: c -> 2c shrinks shifts and amplitudes by 4",
            [](std::string &detail) {
              BoxGeometry geom;
              UnitSystem u;
              CouplingToggles tog;
              const SectorBasis basis =
                  enumerate_sector_basis(geom, 1, 2, IVec3::Zero(), 0);
              auto shift = [&](double c) {
                UnitSystem uc = u;
                uc.c = c;
                CouplingToggles t = tog;
                t.c = c;
                t.include_current_current = true;
                const double on =
                    diagonalize(assemble_hamiltonian(basis, t, uc))
                        .eigenvalues[0];
                t.include_current_current = false;
                const double off =
                    diagonalize(assemble_hamiltonian(basis, t, uc))
                        .eigenvalues[0];
                return on - off;
              };
              const double rq = shift(20.0) / shift(40.0);

              CouplingToggles cp;
              auto amp = [&](double c) {
                UnitSystem uc = u;
                uc.c = c;
                CouplingToggles cc = cp;
                cc.c = c;
                return photon_exchange_amplitude(IVec3(2, -1, 0),
                                                 IVec3(1, 1, 1),
                                                 IVec3(0, 1, -1), geom, uc, cc)
                    .value;
              };
              const double ra = amp(20.0) / amp(40.0);
              detail = "quantum_ratio=" + sci(rq) +
                       ", qed_ratio=" + sci(ra);
              return std::abs(rq - 4.0) <= 0.04 && std::abs(ra - 4.0) <= 0.04;
            });

  // 9. Byte-identical artifacts across repeated CLI runs.
  criterion(9, "determinism: repeated CLI runs are byte-identical",
            [](std::string &detail) {
              const fs::path base =
                  fs::temp_directory_path() / "cgauge_acceptance";
              fs::remove_all(base);
              const fs::path a = base / "a", b = base / "b";
              fs::create_directories(a);
              fs::create_directories(b);
              auto run = [&](const fs::path &out, const char *fix) {
                const std::string cmd = std::string(CGAUGE_BIN) +
                                        " run --config " + CGAUGE_FIXTURES +
                                        "/" + fix + " --out " + out.string() +
                                        " >/dev/null 2>&1";
                const int rc = std::system(cmd.c_str());
                return rc != -1 && WIFEXITED(rc) && WEXITSTATUS(rc) == 0;
              };
              for (const char *fix :
                   {"qed_verify.json", "quantum_sector.json",
                    "classical_orbit.json"})
                if (!run(a, fix) || !run(b, fix)) {
                  detail = std::string("run failed for ") + fix;
                  return false;
                }
              int files = 0;
              for (const auto &e : fs::recursive_directory_iterator(a)) {
                if (!e.is_regular_file())
                  continue;
                ++files;
                const fs::path rel = fs::relative(e.path(), a);
                std::ifstream fa(e.path(), std::ios::binary);
                std::ifstream fb(b / rel, std::ios::binary);
                std::ostringstream sa, sb;
                sa << fa.rdbuf();
                sb << fb.rdbuf();
                if (sa.str() != sb.str() || sa.str().empty()) {
                  detail = "mismatch in " + rel.string();
                  return false;
                }
              }
              detail = std::to_string(files) + " artifacts compared";
              return files >= 5;
            });

  if (failures == 0)
    std::printf("all 9 acceptance criteria passed\n");
  else
    std::printf("%d acceptance criteria FAILED\n", failures);
  return failures;
}
