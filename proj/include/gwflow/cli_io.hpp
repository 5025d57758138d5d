#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "gwflow/equilibrium.hpp"
#include "gwflow/hj_solver.hpp"
#include "gwflow/hydro_harness.hpp"

namespace gwflow {

enum class ExperimentKind { Simulate, Hydro, Equilibrium, Pde, LisBound, Axioms };

const char* kind_name(ExperimentKind k);
std::optional<ExperimentKind> parse_kind(const std::string& s);

struct DomainSpec {
  bool torus = true;
  double M = 50.0;
  std::int64_t N = 50;
  double a = -10.0, b = 10.0;
  std::int64_t c = -10, d = 10;
};

struct ProfileSpec {
  std::string kind = "affine";  // affine | sinusoid | wedge
  double offset = 0.0;
  double amplitude = 0.0;
  double kx = 0.0;
  double ky = 0.0;
  double slope_below = -0.5;
  double slope_above = -0.25;
  double period = 4.0;
};

struct Tolerances {
  double speed_rel = 0.05;
  double density_rel = 0.05;
  double var_time_ratio = 4.0;
  double kink_slack = 2.0;
  double hydro_final = 0.08;
  double linear_abs = 1e-12;
};

struct ExperimentConfig {
  ExperimentKind kind = ExperimentKind::Simulate;
  std::uint64_t seed = 1;
  int replicas = 10;
  int threads = 0;
  std::string output = "out";
  double T = 10.0;
  std::vector<int> n_list{1};
  double burn_in = 100.0;
  DomainSpec domain;
  Slope slope{0.0, -0.5};
  ProfileSpec profile;
  Tolerances tolerances;

  // simulate
  std::vector<double> snapshots;
  // equilibrium
  std::vector<int> radii{4, 8, 16};  // default: 4, 8, ... up to min(M, N) / 2
  int count_replicas = 20;
  KernelParams kernel{1.0, 0.5, -0.5, 1.0, 1.0};
  int structure_max = 40;
  // hydro
  double R = 1.0;
  SampleGrid grid;
  std::vector<std::uint64_t> hydro_seeds{1};
  Reference reference = Reference::Auto;
  int pde_cells = 128;
  // pde
  GridSpec pde_grid{64, 64, 1.0, 1.0};
  SchemeParams scheme;
  // lis-bound
  double lis_area = 1.0;
  int lis_kmax = 15;
  std::int64_t lis_replicas = 100000;
  // axioms
  AxiomOptions axioms;

  /// The continuous profile: the slope's affine function unless a profile
  /// section says otherwise.
  ContinuousProfile profile_function() const;
};

/// Every violation, each prefixed with the path of the offending field.
class ConfigError : public std::runtime_error {
 public:
  explicit ConfigError(std::vector<std::string> violations);
  const std::vector<std::string>& violations() const { return violations_; }

 private:
  std::vector<std::string> violations_;
};

/// JSON document (comments allowed). Unknown keys are errors. `kind`
/// supplies the experiment when the document omits it and must agree
/// with it otherwise.
ExperimentConfig parse_config(const std::string& text, std::optional<ExperimentKind> kind = {});
/// Cross-field checks (slope/torus fit, CFL, horizon, radii); throws ConfigError.
void validate_config(const ExperimentConfig& config);
/// Normalized JSON with every default filled in.
std::string serialize_config(const ExperimentConfig& config);

std::uint64_t fnv1a64(const std::string& bytes);

struct RunManifest {
  std::string config_hash;
  std::string code_version;
  std::string experiment;
  std::uint64_t seed = 0;
  std::vector<std::uint64_t> replica_seeds;
  double wall_clock_s = 0.0;
  std::vector<std::string> outputs;
  bool incomplete = true;
  std::vector<std::string> checks;  // "PASS ..." / "FAIL ..."
  bool checks_passed = true;
};

/// Runs the experiment, writing CSV/NDJSON outputs and manifest.json under
/// out_dir. The manifest is written first with incomplete = true and
/// rewritten last. `main_csv` renames the primary CSV output.
RunManifest run(const ExperimentConfig& config, const std::filesystem::path& out_dir,
                const std::string& main_csv = {});

std::string code_version();

}  // namespace gwflow
