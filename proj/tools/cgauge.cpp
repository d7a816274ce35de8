// cgauge: batch front-end for the 1/c^2 electromagnetic-coupling laboratory.
//
// Subcommands:
//   run      execute the single mode section of a JSON config
//   compare  integrate two classical models from shared initial conditions
//
// Exit codes: 0 success (all checks passing), 1 check/runtime failure,
// 2 configuration error. Artifacts land in <out>/<run-name>/; run-name
// defaults to the config stem. Timing goes to stdout only, never into
// artifacts, so repeated runs stay byte-identical.

#include <CLI11.hpp>
#include <chrono>
#include <cinttypes>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <json.hpp>
#include <optional>
#include <sstream>
#include <string>

#include "cgauge/dynamics.hpp"
#include "cgauge/fock.hpp"
#include "cgauge/qed.hpp"
#include "cgauge/quadrature.hpp"
#include "cgauge/solver.hpp"

namespace fs = std::filesystem;
using nlohmann::json;
using namespace cgauge;

namespace {

struct CliOptions {
  std::string config_path;
  std::string out_dir = "out";
  std::optional<std::uint64_t> seed;
  int threads = 1;
};

// Thrown for anything that is the config author's fault; carries a
// line-anchored message.
struct usage_error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

std::string fmt17(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

// 1-based line of the first occurrence of a quoted key in the raw text;
// 0 when absent.
int key_line(const std::string &raw, const std::string &key) {
  const std::string needle = "\"" + key + "\"";
  const auto pos = raw.find(needle);
  if (pos == std::string::npos)
    return 0;
  return 1 + static_cast<int>(std::count(raw.begin(), raw.begin() + pos, '\n'));
}

int byte_to_line(const std::string &raw, std::size_t byte) {
  byte = std::min(byte, raw.size());
  return 1 + static_cast<int>(std::count(raw.begin(), raw.begin() + byte, '\n'));
}

json load_config(const std::string &path, std::string &raw) {
  std::ifstream in(path, std::ios::binary);
  if (!in)
    throw usage_error(path + ": cannot open config");
  std::ostringstream ss;
  ss << in.rdbuf();
  raw = ss.str();
  try {
    return json::parse(raw);
  } catch (const json::parse_error &e) {
    throw usage_error(path + ":" + std::to_string(byte_to_line(raw, e.byte)) +
                      ": " + e.what());
  }
}

std::string mode_of(const json &cfg, const std::string &path,
                    const std::string &raw) {
  static const char *modes[] = {"classical", "quantum", "qed", "kernel"};
  std::vector<std::string> present;
  for (const char *m : modes)
    if (cfg.contains(m))
      present.push_back(m);
  if (present.size() == 1)
    return present.front();
  if (present.empty())
    throw usage_error(path + ":1: no mode section (expected exactly one of "
                             "classical, quantum, qed, kernel)");
  throw usage_error(path + ":" +
                    std::to_string(key_line(raw, present[1])) +
                    ": multiple mode sections (" + present[0] + " and " +
                    present[1] + "); exactly one is allowed");
}

UnitSystem parse_units(const json &cfg) {
  UnitSystem u;
  if (cfg.contains("units")) {
    const json &j = cfg.at("units");
    u.c = j.value("c", u.c);
    u.hbar = j.value("hbar", u.hbar);
  }
  u.validate();
  return u;
}

Vec3 parse_vec3(const json &j) {
  if (!j.is_array() || j.size() != 3)
    throw usage_error("expected a 3-component array");
  return Vec3(j[0].get<double>(), j[1].get<double>(), j[2].get<double>());
}

IVec3 parse_ivec3(const json &j) {
  if (!j.is_array() || j.size() != 3)
    throw usage_error("expected a 3-component integer array");
  return IVec3(j[0].get<int>(), j[1].get<int>(), j[2].get<int>());
}

ModelTag parse_tag(const std::string &s) {
  if (s == "coulomb")
    return ModelTag::CoulombOnly;
  if (s == "darwin")
    return ModelTag::Darwin;
  if (s == "transverse_literal")
    return ModelTag::TransverseLiteral;
  if (s == "transverse_projection")
    return ModelTag::TransverseProjection;
  throw usage_error("unknown model tag '" + s + "'");
}

HamiltonianModel parse_model(const json &j) {
  HamiltonianModel m;
  if (j.is_string())
    m.tag = parse_tag(j.get<std::string>());
  else {
    m.tag = parse_tag(j.at("tag").get<std::string>());
    const std::string reading = j.value("reading", "integration_point");
    if (reading == "integration_point")
      m.reading = InnerGradient::IntegrationPoint;
    else if (reading == "source_point")
      m.reading = InnerGradient::SourcePoint;
    else
      throw usage_error("unknown reading '" + reading + "'");
  }
  return m;
}

ParticleSet parse_particles(const json &j) {
  ParticleSet ps;
  for (const json &p : j) {
    ps.mass.push_back(p.at("m").get<double>());
    ps.charge.push_back(p.at("e").get<double>());
    ps.position.push_back(parse_vec3(p.at("r")));
    ps.momentum.push_back(parse_vec3(p.at("p")));
  }
  ps.validate();
  return ps;
}

IntegratorConfig parse_integrator(const json &j) {
  IntegratorConfig cfg;
  const std::string method = j.value("method", "rk45");
  if (method == "rk45")
    cfg.method = IntegratorMethod::RK45;
  else if (method == "rk4")
    cfg.method = IntegratorMethod::RK4;
  else
    throw usage_error("unknown integrator method '" + method + "'");
  cfg.dt = j.value("dt", cfg.dt);
  cfg.tol = j.value("tol", cfg.tol);
  cfg.t_end = j.value("t_end", cfg.t_end);
  cfg.record_every = j.value("record_every", cfg.record_every);
  cfg.validate();
  return cfg;
}

json conservation_json(const ConservationReport &rep) {
  return {{"energy_drift", rep.energy_drift},
          {"momentum_drift", rep.momentum_drift},
          {"angular_momentum_drift", rep.angular_momentum_drift}};
}

void write_text(const fs::path &p, const std::string &text) {
  std::ofstream out(p, std::ios::binary);
  out << text;
  if (!out)
    throw std::runtime_error("cannot write " + p.string());
}

void write_report(const fs::path &dir, const json &report) {
  write_text(dir / "report.json", report.dump(2) + "\n");
}

// ---------------------------------------------------------------------------

int run_classical(const json &cfg, const UnitSystem &u, const fs::path &dir) {
  const json &j = cfg.at("classical");
  const ParticleSet ps = parse_particles(j.at("particles"));
  const HamiltonianModel model = parse_model(j.at("model"));
  const IntegratorConfig icfg = parse_integrator(j.value("integrator", json::object()));

  const Trajectory tr = integrate(ps, model, u, icfg);
  {
    std::ofstream csv(dir / "trajectory.csv", std::ios::binary);
    write_trajectory_csv(tr, csv);
  }
  const ConservationReport rep = conservation_report(tr, u);
  json report = {{"inputs", cfg},
                 {"outputs",
                  {{"accepted_steps", tr.accepted_steps},
                   {"snapshots", tr.snapshots.size()},
                   {"conservation", conservation_json(rep)},
                   {"files", {"trajectory.csv"}}}}};
  report["checks"] = json::object();
  write_report(dir, report);
  return 0;
}

int run_quantum(const json &cfg, const UnitSystem &u, const fs::path &dir) {
  const json &j = cfg.at("quantum");
  BoxGeometry geom;
  geom.L = j.value("L", geom.L);
  const int n_max = j.at("n_max").get<int>();
  const int N = j.at("N").get<int>();
  std::optional<IVec3> P;
  if (j.contains("P_total") && !j.at("P_total").is_null())
    P = parse_ivec3(j.at("P_total"));
  std::optional<int> sz;
  if (j.contains("Sz") && !j.at("Sz").is_null())
    sz = j.at("Sz").get<int>(); // twice the spin projection

  CouplingToggles tog;
  tog.c = u.c;
  if (j.contains("toggles")) {
    const json &t = j.at("toggles");
    tog.include_coulomb = t.value("include_coulomb", true);
    tog.include_current_current = t.value("include_current_current", true);
    tog.e = t.value("e", tog.e);
    tog.m = t.value("m", tog.m);
  }
  Vec3 A_ext = Vec3::Zero();
  if (j.contains("A_ext"))
    A_ext = parse_vec3(j.at("A_ext"));

  const SectorBasis basis =
      enumerate_sector_basis(geom, n_max, N, P, sz, j.value("capacity", 20000));
  const Eigen::MatrixXd H = assemble_hamiltonian(basis, tog, u, A_ext);
  const Spectrum sp = diagonalize(H);

  {
    std::ofstream csv(dir / "spectrum.csv", std::ios::binary);
    csv << "index,eigenvalue\n";
    for (int i = 0; i < sp.eigenvalues.size(); ++i)
      csv << i << "," << fmt17(sp.eigenvalues[i]) << "\n";
  }
  const double e0 = sp.eigenvalues[0];
  const double gap =
      sp.eigenvalues.size() > 1 ? sp.eigenvalues[1] - e0 : 0.0;
  json sector = {{"N", N},
                 {"n_max", n_max},
                 {"P", P ? json({(*P)[0], (*P)[1], (*P)[2]}) : json()},
                 {"Sz", sz ? json(*sz) : json()}};
  json report = {{"inputs", cfg},
                 {"sector", sector},
                 {"toggles",
                  {{"include_coulomb", tog.include_coulomb},
                   {"include_current_current", tog.include_current_current},
                   {"e", tog.e},
                   {"m", tog.m},
                   {"c", tog.c}}},
                 {"dimension", basis.dimension()},
                 {"e0", e0},
                 {"gap", gap},
                 {"outputs", {{"files", {"spectrum.csv"}}}}};
  write_report(dir, report);
  return 0;
}

int run_qed(const json &cfg, const UnitSystem &u, const fs::path &dir,
            const std::optional<std::uint64_t> &seed_override) {
  const json &j = cfg.at("qed");
  const int samples = j.value("samples", 100);
  std::uint64_t seed = j.value("seed", std::uint64_t(1));
  if (seed_override)
    seed = *seed_override;
  const double threshold = j.value("threshold", 1e-10);
  HReading reading = HReading::TwoPiHbar;
  if (j.value("h_reading", "2*pi*hbar") == std::string("hbar"))
    reading = HReading::PlainHbar;

  CouplingToggles cp;
  cp.c = u.c;
  cp.e = j.value("e", cp.e);
  cp.m = j.value("m", cp.m);
  BoxGeometry geom;
  geom.L = j.value("L", geom.L);

  const EquivalenceReport rep =
      equivalence_report(samples, seed, geom, u, cp, reading,
                         j.value("n_range", 3));
  json report = {{"samples", rep.samples},
                 {"seed", rep.seed},
                 {"max_rel_diff", rep.max_rel_diff},
                 {"mean_rel_diff", rep.mean_rel_diff},
                 {"convention", rep.convention},
                 {"h_reading", rep.h_reading}};
  write_report(dir, report);
  return rep.max_rel_diff <= threshold ? 0 : 1;
}

int run_kernel(const json &cfg, const fs::path &dir) {
  const json &j = cfg.at("kernel");
  std::vector<double> radii;
  for (const json &r : j.at("R"))
    radii.push_back(r.get<double>());
  std::vector<Vec3> directions;
  for (const json &d : j.at("directions"))
    directions.push_back(parse_vec3(d).normalized());
  QuadratureSettings qs;
  if (j.contains("quadrature")) {
    const json &q = j.at("quadrature");
    qs.ball_factor = q.value("ball_factor", qs.ball_factor);
    qs.cutoff_factor = q.value("cutoff_factor", qs.cutoff_factor);
    qs.level = q.value("level", qs.level);
    qs.tol = q.value("tol", qs.tol);
  }
  std::vector<InnerGradient> readings;
  const std::string want = j.value("reading", "both");
  if (want == "integration_point" || want == "both")
    readings.push_back(InnerGradient::IntegrationPoint);
  if (want == "source_point" || want == "both")
    readings.push_back(InnerGradient::SourcePoint);
  if (readings.empty())
    throw usage_error("kernel.reading must be integration_point, "
                      "source_point, or both");

  double max_gap = 0.0;
  std::ofstream csv(dir / "kernel.csv", std::ios::binary);
  csv << "R,nx,ny,nz,reading,a,b,closed_a,closed_b,quadrature_error\n";
  for (double R : radii)
    for (const Vec3 &n : directions)
      for (InnerGradient reading : readings) {
        const Vec3 r = R * n;
        const PairKernel q = kernel_quadrature(r, qs, reading);
        HamiltonianModel m;
        m.tag = ModelTag::TransverseLiteral;
        m.reading = reading;
        const PairKernel c = kernel_closed(m, r);
        max_gap = std::max(max_gap, (q.T - c.T).cwiseAbs().maxCoeff() /
                                        c.T.cwiseAbs().maxCoeff());
        csv << fmt17(R) << "," << fmt17(n[0]) << "," << fmt17(n[1]) << ","
            << fmt17(n[2]) << ","
            << (reading == InnerGradient::IntegrationPoint
                    ? "integration_point"
                    : "source_point")
            << "," << fmt17(q.a) << "," << fmt17(q.b) << "," << fmt17(c.a)
            << "," << fmt17(c.b) << "," << fmt17(q.estimated_error) << "\n";
      }
  csv.close();

  const double bound = j.value("agreement_bound", 1e-5);
  json report = {{"inputs", cfg},
                 {"outputs", {{"files", {"kernel.csv"}}}},
                 {"checks",
                  {{"max_relative_gap", max_gap},
                   {"agreement_bound", bound},
                   {"closed_matches_quadrature", max_gap <= bound}}}};
  write_report(dir, report);
  return max_gap <= bound ? 0 : 1;
}

int run_compare(const json &cfg, const UnitSystem &u, const fs::path &dir) {
  const json &j = cfg.at("classical");
  if (!j.contains("models") || !j.at("models").is_array() ||
      j.at("models").size() != 2)
    throw usage_error("compare needs classical.models with exactly two "
                      "entries");
  const ParticleSet ps = parse_particles(j.at("particles"));
  const HamiltonianModel m0 = parse_model(j.at("models")[0]);
  const HamiltonianModel m1 = parse_model(j.at("models")[1]);
  const IntegratorConfig icfg =
      parse_integrator(j.value("integrator", json::object()));

  const Trajectory a = integrate(ps, m0, u, icfg);
  const Trajectory b = integrate(ps, m1, u, icfg, a.times);
  const DivergenceSeries div = trajectory_divergence(a, b);
  {
    std::ofstream csv(dir / "divergence.csv", std::ios::binary);
    csv << "t,distance,envelope\n";
    for (std::size_t k = 0; k < div.times.size(); ++k)
      csv << fmt17(div.times[k]) << "," << fmt17(div.distance[k]) << ","
          << fmt17(div.envelope[k]) << "\n";
  }
  json report = {{"inputs", cfg},
                 {"outputs",
                  {{"files", {"divergence.csv"}},
                   {"final_divergence", div.envelope.back()},
                   {"conservation",
                    {conservation_json(conservation_report(a, u)),
                     conservation_json(conservation_report(b, u))}}}}};
  report["checks"] = json::object();
  write_report(dir, report);
  return 0;
}

int dispatch(const std::string &verb, const CliOptions &opt) {
  std::string raw;
  const json cfg = load_config(opt.config_path, raw);
  const std::string mode = mode_of(cfg, opt.config_path, raw);
  if (verb == "compare" && mode != "classical")
    throw usage_error(opt.config_path + ":" + std::to_string(key_line(raw, mode)) +
                      ": compare requires a classical section");

  const UnitSystem u = parse_units(cfg);
  const std::string run_name =
      cfg.value("name", fs::path(opt.config_path).stem().string());
  const fs::path dir = fs::path(opt.out_dir) / run_name;
  fs::create_directories(dir);

  if (verb == "compare")
    return run_compare(cfg, u, dir);
  if (mode == "classical")
    return run_classical(cfg, u, dir);
  if (mode == "quantum")
    return run_quantum(cfg, u, dir);
  if (mode == "qed")
    return run_qed(cfg, u, dir, opt.seed);
  return run_kernel(cfg, dir);
}

} // namespace

int main(int argc, char **argv) {
  CLI::App app{"1/c^2 electromagnetic-coupling laboratory"};
  app.require_subcommand(1);

  CliOptions opt;
  std::uint64_t seed_value = 0;
  bool seed_set = false;
  auto add_common = [&](CLI::App *sub) {
    sub->add_option("--config", opt.config_path, "JSON scenario config")
        ->envname("CGAUGE_CONFIG")
        ->required();
    sub->add_option("--out", opt.out_dir, "output directory root")
        ->envname("CGAUGE_OUT");
    sub->add_option("--seed", seed_value, "override the sampling seed")
        ->envname("CGAUGE_SEED")
        ->each([&](const std::string &) { seed_set = true; });
    sub->add_option("--threads", opt.threads, "worker threads")
        ->envname("CGAUGE_THREADS");
  };
  CLI::App *run = app.add_subcommand("run", "execute one config");
  CLI::App *cmp = app.add_subcommand("compare", "integrate two models");
  add_common(run);
  add_common(cmp);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError &e) {
    return app.exit(e) ? 2 : 0;
  }
  if (seed_set)
    opt.seed = seed_value;

  const auto t0 = std::chrono::steady_clock::now();
  int status = 0;
  try {
    status = dispatch(run->parsed() ? "run" : "compare", opt);
  } catch (const usage_error &e) {
    std::cerr << "config error: " << e.what() << "\n";
    return 2;
  } catch (const config_error &e) {
    std::cerr << "config error: " << e.what() << "\n";
    return 2;
  } catch (const json::exception &e) {
    std::cerr << "config error: " << opt.config_path << ": " << e.what()
              << "\n";
    return 2;
  } catch (const std::exception &e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  const auto ms = std::chrono::duration_cast<std::chrono::milliseconds>(
                      std::chrono::steady_clock::now() - t0)
                      .count();
  // stdout only; timing never enters artifacts
  std::cout << "elapsed_ms=" << ms << " status=" << status << "\n";
  return status;
}
