// Exercises the installed binary through std::system; CGAUGE_BIN and
// CGAUGE_FIXTURES are injected by the build.
#include <catch2/catch_amalgamated.hpp>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <sys/wait.h>

namespace fs = std::filesystem;

namespace {

int run_cmd(const std::string &cmd) {
  const int rc = std::system((cmd + " >/dev/null 2>&1").c_str());
  REQUIRE(rc != -1);
  return WIFEXITED(rc) ? WEXITSTATUS(rc) : -1;
}

std::string slurp(const fs::path &p) {
  std::ifstream in(p, std::ios::binary);
  REQUIRE(in.good());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

fs::path fresh_dir(const std::string &tag) {
  const fs::path d = fs::temp_directory_path() / ("cgauge_cli_" + tag);
  fs::remove_all(d);
  fs::create_directories(d);
  return d;
}

const std::string bin = CGAUGE_BIN;
const std::string fixtures = CGAUGE_FIXTURES;

} // namespace

TEST_CASE("qed fixture passes and writes the report", "[cli]") {
  const fs::path out = fresh_dir("qed");
  CHECK(run_cmd(bin + " run --config " + fixtures + "/qed_verify.json --out " +
                out.string()) == 0);
  const std::string report = slurp(out / "qed_verify" / "report.json");
  CHECK(report.find("\"max_rel_diff\"") != std::string::npos);
  CHECK(report.find("\"axis-cross\"") != std::string::npos);
  CHECK(report.find("\"samples\": 100") != std::string::npos);
}

TEST_CASE("artifacts are byte-identical across runs", "[cli]") {
  const fs::path a = fresh_dir("det_a"), b = fresh_dir("det_b");
  for (const char *fix :
       {"qed_verify.json", "quantum_sector.json", "classical_orbit.json"}) {
    CHECK(run_cmd(bin + " run --config " + fixtures + "/" + fix + " --out " +
                  a.string()) == 0);
    CHECK(run_cmd(bin + " run --config " + fixtures + "/" + fix + " --out " +
                  b.string()) == 0);
  }
  for (const auto &entry : fs::recursive_directory_iterator(a)) {
    if (!entry.is_regular_file())
      continue;
    const fs::path rel = fs::relative(entry.path(), a);
    INFO(rel.string());
    CHECK(slurp(entry.path()) == slurp(b / rel));
  }
}

TEST_CASE("two mode sections are rejected with exit 2", "[cli]") {
  const fs::path out = fresh_dir("invalid");
  CHECK(run_cmd(bin + " run --config " + fixtures +
                "/invalid_two_modes.json --out " + out.string()) == 2);
}

TEST_CASE("missing and malformed configs exit 2", "[cli]") {
  const fs::path out = fresh_dir("missing");
  CHECK(run_cmd(bin + " run --config " + out.string() +
                "/no_such_file.json --out " + out.string()) == 2);
  const fs::path bad = out / "bad.json";
  std::ofstream(bad) << "{ \"qed\": { broken\n";
  CHECK(run_cmd(bin + " run --config " + bad.string() + " --out " +
                out.string()) == 2);
}

TEST_CASE("quantum fixture emits a sector spectrum", "[cli]") {
  const fs::path out = fresh_dir("quantum");
  CHECK(run_cmd(bin + " run --config " + fixtures +
                "/quantum_sector.json --out " + out.string()) == 0);
  const std::string csv = slurp(out / "quantum_sector" / "spectrum.csv");
  CHECK(csv.rfind("index,eigenvalue\n", 0) == 0);
  const std::string report = slurp(out / "quantum_sector" / "report.json");
  CHECK(report.find("\"dimension\": 27") != std::string::npos);
}

TEST_CASE("compare produces a populated divergence series", "[cli]") {
  const fs::path out = fresh_dir("compare");
  CHECK(run_cmd(bin + " compare --config " + fixtures +
                "/compare_darwin_transverse.json --out " + out.string()) == 0);
  const std::string csv =
      slurp(out / "compare_darwin_transverse" / "divergence.csv");
  CHECK(csv.rfind("t,distance,envelope\n", 0) == 0);
  // last envelope entry is nonzero: the models genuinely disagree at c = 10
  const auto last_line_start = csv.rfind('\n', csv.size() - 2);
  const std::string last = csv.substr(last_line_start + 1);
  const auto second_comma = last.rfind(',');
  CHECK(std::stod(last.substr(second_comma + 1)) > 1e-6);
}

TEST_CASE("identical models diverge by exactly zero", "[cli]") {
  const fs::path out = fresh_dir("same");
  const fs::path cfg = out / "same_models.json";
  std::ofstream(cfg) << R"({
    "name": "same_models",
    "units": {"c": 10.0},
    "classical": {
      "particles": [
        {"m": 1.0, "e": 1.0, "r": [0.5, 0, 0], "p": [0, 0.7, 0]},
        {"m": 1.0, "e": -1.0, "r": [-0.5, 0, 0], "p": [0, -0.7, 0]}
      ],
      "models": [{"tag": "darwin"}, {"tag": "darwin"}],
      "integrator": {"t_end": 2.0, "record_every": 10}
    }
  })";
  CHECK(run_cmd(bin + " compare --config " + cfg.string() + " --out " +
                out.string()) == 0);
  std::istringstream csv(slurp(out / "same_models" / "divergence.csv"));
  std::string line;
  std::getline(csv, line); // header
  while (std::getline(csv, line)) {
    const auto c1 = line.find(','); // t,distance,envelope
    const auto c2 = line.find(',', c1 + 1);
    CHECK(line.substr(c1 + 1, c2 - c1 - 1) == "0");
  }
}

TEST_CASE("Coulomb vs Darwin at enormous c stays within 1e-10", "[cli]") {
  const fs::path out = fresh_dir("bigc");
  const fs::path cfg = out / "big_c.json";
  std::ofstream(cfg) << R"({
    "name": "big_c",
    "units": {"c": 1e12},
    "classical": {
      "particles": [
        {"m": 1.0, "e": 1.0, "r": [0.5, 0, 0], "p": [0, 0.7, 0]},
        {"m": 1.0, "e": -1.0, "r": [-0.5, 0, 0], "p": [0, -0.7, 0]}
      ],
      "models": [{"tag": "coulomb"}, {"tag": "darwin"}],
      "integrator": {"t_end": 2.0, "record_every": 10}
    }
  })";
  CHECK(run_cmd(bin + " compare --config " + cfg.string() + " --out " +
                out.string()) == 0);
  std::istringstream csv(slurp(out / "big_c" / "divergence.csv"));
  std::string line;
  std::getline(csv, line);
  while (std::getline(csv, line)) {
    const auto c2 = line.rfind(',');
    CHECK(std::stod(line.substr(c2 + 1)) <= 1e-10);
  }
}
