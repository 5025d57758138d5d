#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <sstream>

#include "gwflow/cli_io.hpp"

using namespace gwflow;

namespace {

std::string slurp(const std::filesystem::path& p) {
  std::ifstream is(p, std::ios::binary);
  std::stringstream ss;
  ss << is.rdbuf();
  return ss.str();
}

std::vector<std::string> violations_of(const std::string& text) {
  try {
    ExperimentConfig c = parse_config(text);
    validate_config(c);
  } catch (const ConfigError& e) {
    return e.violations();
  }
  return {};
}

bool mentions(const std::vector<std::string>& v, const std::string& what) {
  for (const auto& s : v) {
    if (s.find(what) != std::string::npos) return true;
  }
  return false;
}

std::filesystem::path scratch(const std::string& name) {
  auto p = std::filesystem::temp_directory_path() / ("gwflow_cli_" + name);
  std::filesystem::remove_all(p);
  return p;
}

}  // namespace

TEST_CASE("fnv1a64 reference values") {
  CHECK(fnv1a64("") == 0xcbf29ce484222325ULL);
  CHECK(fnv1a64("a") == 0xaf63dc4c8601ec8cULL);
  CHECK(fnv1a64("foobar") == 0x85944171f73967e8ULL);
}

TEST_CASE("config defaults and comments") {
  const auto c = parse_config(R"({
    // growth speed run
    "experiment": "equilibrium",
    "slope": {"rho1": 0.3, "rho2": -0.5}
  })");
  CHECK(c.kind == ExperimentKind::Equilibrium);
  CHECK(c.T == 40.0);
  CHECK(c.slope.rho1 == 0.3);
  CHECK(c.radii == std::vector<int>{4, 8, 16});
  const auto h = parse_config("{}", ExperimentKind::Hydro);
  CHECK(h.n_list == std::vector<int>{10, 20, 40, 80});
  CHECK(h.domain.M == 1.0);
}

TEST_CASE("config errors carry field paths") {
  CHECK(mentions(violations_of(R"({"experiment": "simulate", "domain": {"Q": 1}})"), "domain.Q: unknown key"));
  CHECK(mentions(violations_of(R"({"experiment": "simulate", "slope": {"rho2": 0.5}})"), "slope.rho2"));
  CHECK(mentions(violations_of(R"({"experiment": "simulate", "replicas": 0})"), "replicas"));
  CHECK(mentions(violations_of(R"({"experiment": "hydro", "n_list": [20, 10]})"), "n_list"));
  CHECK(mentions(violations_of(R"({"experiment": "pde", "pde": {"cfl": 1.5}})"), "pde.cfl"));
  CHECK(mentions(violations_of(R"({"experiment": "equilibrium", "replicas": 5})"), "at least 10"));
  CHECK(mentions(violations_of(R"({"experiment": "equilibrium", "equilibrium": {"radii": [4, 64]}})"),
                 "equilibrium.radii"));
  CHECK(mentions(violations_of(R"({"experiment": "fly"})"), "experiment"));
  CHECK(mentions(violations_of(R"({"experiment": "simulate", "T": "long"})"), "T: expected a number"));
  CHECK(mentions(violations_of("{ not json"), "document"));
  const auto many = violations_of(R"({"experiment": "simulate", "T": -1, "burn_in": -2, "zzz": 0})");
  CHECK(many.size() == 3);
  CHECK_THROWS_AS(parse_config(R"({"experiment": "pde"})", ExperimentKind::Hydro), ConfigError);
  CHECK(violations_of(R"({"experiment": "axioms"})").empty());
}

TEST_CASE("serialization round trip") {
  auto c = parse_config(R"({"experiment": "hydro", "seed": 18446744073709551615, "n_list": [10, 20],
                            "profile": {"kind": "wedge", "period": 4}, "domain": {"M": 0.5, "N": 2},
                            "hydro": {"seeds": [1, 2, 3], "reference": "hopf-lax"}})");
  CHECK(c.seed == 18446744073709551615ULL);
  const std::string once = serialize_config(c);
  const std::string twice = serialize_config(parse_config(once));
  CHECK(once == twice);
  CHECK(fnv1a64(once) == fnv1a64(twice));
  c.seed = 2;
  CHECK(fnv1a64(serialize_config(c)) != fnv1a64(once));
}

TEST_CASE("runs write deterministic outputs and a manifest") {
  auto c = parse_config(R"({"experiment": "lis-bound", "seed": 9, "lis": {"replicas": 2000}})");
  const auto a = scratch("a"), b = scratch("b");
  const RunManifest ma = run(c, a);
  const RunManifest mb = run(c, b, "tail.csv");
  CHECK_FALSE(ma.incomplete);
  CHECK(ma.checks_passed);
  CHECK(ma.outputs == std::vector<std::string>{"lis_tail.csv"});
  CHECK(mb.outputs == std::vector<std::string>{"tail.csv"});
  CHECK(slurp(a / "lis_tail.csv") == slurp(b / "tail.csv"));
  CHECK(ma.config_hash == mb.config_hash);
  const std::string manifest = slurp(a / "manifest.json");
  CHECK(manifest.find("\"incomplete\": false") != std::string::npos);
  CHECK(manifest.find(ma.config_hash) != std::string::npos);
  std::filesystem::remove_all(a);
  std::filesystem::remove_all(b);
}

TEST_CASE("simulate run") {
  auto c = parse_config(R"({"experiment": "simulate", "T": 3, "domain": {"M": 8, "N": 6},
                            "simulate": {"snapshots": [1, 2]}})");
  const auto dir = scratch("sim");
  const RunManifest m = run(c, dir);
  CHECK(m.checks_passed);
  const std::string summary = slurp(dir / "summary.csv");
  CHECK(summary.rfind("t,h00,kinks,antikinks,effective_creations\n0,", 0) == 0);
  CHECK(std::count(summary.begin(), summary.end(), '\n') == 5);
  CHECK(std::filesystem::file_size(dir / "events.ndjson") > 0);
  std::filesystem::remove_all(dir);
}
