#include <CLI11.hpp>
#include <json.hpp>

#include <fstream>
#include <iostream>
#include <sstream>

#include "gwflow/cli_io.hpp"

namespace {

struct Overrides {
  std::string config;
  std::optional<std::uint64_t> seed;
  std::string out;
  std::optional<int> threads;
  bool check = false;
  std::vector<double> rho;
  std::vector<double> torus;
  std::optional<double> burn;
  std::optional<int> replicas;
  std::optional<double> T;
  std::vector<int> n_list;
};

void add_options(CLI::App* cmd, Overrides& o) {
  cmd->add_option("--config", o.config, "JSON configuration file")->check(CLI::ExistingFile);
  cmd->add_option("--seed", o.seed, "master seed");
  cmd->add_option("--out", o.out, "output directory, or a .csv path for the primary table");
  cmd->add_option("--threads", o.threads, "worker threads (default: GWFLOW_THREADS or 1)");
  cmd->add_flag("--check", o.check, "exit with status 3 when an acceptance check fails");
  cmd->add_option("--rho", o.rho, "slope rho1,rho2")->delimiter(',')->expected(2);
  cmd->add_option("--torus", o.torus, "torus half-sizes M,N")->delimiter(',')->expected(2);
  cmd->add_option("--burn", o.burn, "burn-in time");
  cmd->add_option("--replicas", o.replicas, "independent replicas");
  cmd->add_option("--T", o.T, "time horizon");
  cmd->add_option("--n", o.n_list, "scaling parameters")->delimiter(',');
}

nlohmann::json build_document(const Overrides& o) {
  nlohmann::json doc = nlohmann::json::object();
  if (!o.config.empty()) {
    std::ifstream is(o.config);
    std::stringstream ss;
    ss << is.rdbuf();
    doc = nlohmann::json::parse(ss.str(), nullptr, true, true);
  }
  if (o.seed) doc["seed"] = *o.seed;
  if (o.threads) doc["threads"] = *o.threads;
  if (!o.rho.empty()) {
    doc["slope"]["rho1"] = o.rho[0];
    doc["slope"]["rho2"] = o.rho[1];
  }
  if (!o.torus.empty()) {
    doc["domain"]["kind"] = "torus";
    doc["domain"]["M"] = o.torus[0];
    doc["domain"]["N"] = static_cast<std::int64_t>(o.torus[1]);
  }
  if (o.burn) doc["burn_in"] = *o.burn;
  if (o.replicas) doc["replicas"] = *o.replicas;
  if (o.T) doc["T"] = *o.T;
  if (!o.n_list.empty()) doc["n_list"] = o.n_list;
  return doc;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Gates-Westcott growth: simulation, equilibrium statistics and hydrodynamic limits"};
  app.require_subcommand(1);
  Overrides o;
  std::optional<gwflow::ExperimentKind> kind;
  for (auto k : {gwflow::ExperimentKind::Simulate, gwflow::ExperimentKind::Hydro, gwflow::ExperimentKind::Equilibrium,
                 gwflow::ExperimentKind::Pde, gwflow::ExperimentKind::LisBound, gwflow::ExperimentKind::Axioms}) {
    auto* cmd = app.add_subcommand(gwflow::kind_name(k));
    add_options(cmd, o);
    cmd->callback([&kind, k] { kind = k; });
  }
  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? 0 : 2;
  }

  gwflow::ExperimentConfig config;
  try {
    config = gwflow::parse_config(build_document(o).dump(), kind);
    gwflow::validate_config(config);
  } catch (const nlohmann::json::exception& e) {
    std::cerr << "config: " << e.what() << '\n';
    return 2;
  } catch (const gwflow::ConfigError& e) {
    std::cerr << e.what() << '\n';
    return 2;
  }

  std::filesystem::path dir = o.out.empty() ? std::filesystem::path(config.output) : std::filesystem::path(o.out);
  std::string main_csv;
  if (dir.extension() == ".csv") {
    main_csv = dir.filename().string();
    dir = dir.has_parent_path() ? dir.parent_path() : std::filesystem::path(".");
  }

  gwflow::RunManifest m;
  try {
    m = gwflow::run(config, dir, main_csv);
  } catch (const gwflow::ConfigError& e) {
    std::cerr << e.what() << '\n';
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
  for (const auto& c : m.checks) std::cout << c << '\n';
  std::cout << "outputs:";
  for (const auto& f : m.outputs) std::cout << ' ' << (dir / f).string();
  std::cout << ' ' << (dir / "manifest.json").string() << '\n';
  return o.check && !m.checks_passed ? 3 : 0;
}
