#pragma once

#include <cstdint>
#include <memory>
#include <string>
#include <vector>

#include "gwflow/growth_dynamics.hpp"
#include "gwflow/hj_solver.hpp"
#include "gwflow/profile.hpp"

namespace gwflow {

/// S_n(s, t, f)(x, y) = h(n x, floor(n y), n (t - s); phi_n^f, tau_{ns} omega) / n.
class RescaledField {
 public:
  RescaledField(std::shared_ptr<const Trajectory> traj, int n, double s = 0.0);

  int n() const { return n_; }
  double s() const { return s_; }
  const Trajectory& trajectory() const { return *traj_; }
  /// Latest macroscopic time t that can be queried.
  double t_max() const;

  /// S_n(s, t, f)(x, y); throws std::out_of_range outside the simulated box.
  double operator()(double x, double y, double t) const;

 private:
  std::shared_ptr<const Trajectory> traj_;
  int n_;
  double s_;
};

/// traj must start from discretize(f, n, .); its creations are reused.
RescaledField rescale(std::shared_ptr<const Trajectory> traj, int n);
/// S_n(s, ., f) from the same creations, restarted at absolute time n s.
RescaledField rescale(const Trajectory& traj, int n, double s, const std::vector<double>& snapshot_times = {});

struct SampleGrid {
  int nx = 33;
  int ny = 33;
  int nt = 9;
};

enum class Reference { Auto, Exact, HopfLax, Pde };

/// Macroscopic torus [-M, M) x [-N, N); the microscopic one is (n M, n N).
struct ConvergenceSetup {
  ContinuousProfile f;
  double M = 1.0;
  double N = 1.0;
  std::vector<int> n_list{10, 20, 40, 80};
  double T = 1.0;
  double R = 1.0;
  std::vector<std::uint64_t> seeds{1};
  SampleGrid grid;
  Reference reference = Reference::Auto;
  int pde_cells = 128;  // per unit length
};

struct ConvergenceRow {
  int n = 0;
  std::uint64_t seed = 0;
  double sup_error = 0.0;
  double runtime_s = 0.0;
};

struct ConvergenceReport {
  std::vector<ConvergenceRow> rows;
  std::vector<int> n;
  std::vector<double> error;  // mean over seeds of the sup error
  double fitted_exponent = 0.0;  // slope of log error against log n
  std::string reference;
  bool strictly_decreasing() const;
};

/// Throws std::invalid_argument on a bad setup (n_list not ascending, torus
/// not fitting the slope, box larger than the torus, ...).
void check_setup(const ConvergenceSetup& setup);
ConvergenceReport convergence_experiment(const ConvergenceSetup& setup, int threads = 1);

struct PropertyCheck {
  std::string name;
  int n = 0;
  std::int64_t checks = 0;
  std::int64_t failures = 0;
  bool passed = true;
  std::string detail;
};

struct PropertyReport {
  std::vector<PropertyCheck> checks;
  bool all_passed() const;
};

struct AxiomOptions {
  std::vector<int> sizes{10, 20};
  int seeds = 5;
  double T = 1.0;
  int shift = 7;
  /// Height-difference modulus is checked at this n (0 disables it).
  int modulus_n = 0;
};

/// Translation invariance, monotone coupling, Markov split (exact);
/// locality and linear compatibility (statistical); time monotonicity of
/// S_n; optionally the height-difference modulus.
PropertyReport axiom_suite(std::uint64_t seed, const AxiomOptions& options = {});

}  // namespace gwflow
