#pragma once

#include <cmath>
#include <complex>
#include <cstdint>
#include <numbers>
#include <vector>

#include "gwflow/height_lattice.hpp"

namespace gwflow {

struct Slope {
  double rho1 = 0.0;
  double rho2 = 0.0;
};

/// v(rho) = (1/pi) sqrt(pi^2 rho1^2 + 4 sin^2(pi rho2)).
template <class S>
S speed(S rho1, S rho2) {
  using std::sin;
  using std::sqrt;
  constexpr double pi = std::numbers::pi;
  const S s = sin(pi * rho2);
  return sqrt(pi * pi * rho1 * rho1 + 4.0 * s * s) / pi;
}
inline double speed(const Slope& rho) { return speed(rho.rho1, rho.rho2); }

struct KernelParams {
  double eta_s = 1.0;
  double eta_a = 0.0;
  double rho2 = -0.5;
  double eta_plus = 1.0;
  double eta_minus = 1.0;

  /// Throws std::invalid_argument naming the offending field.
  void check() const;
};

std::complex<double> dispersion(double k, const KernelParams& params);

/// Infinite-volume occupation kernel S(x', y'; x, y).
std::complex<double> kernel(double xp, std::int64_t yp, double x, std::int64_t y, const KernelParams& params);

enum class StepSign { Plus, Minus };  // Plus: antikink-antikink, Minus: kink-kink

/// Covariance between steps of one type at the origin and at (x, y).
double structure_function(double x, std::int64_t y, const KernelParams& params, StepSign sign);

// ---------------------------------------------------------------- simulation side

struct StationarySetup {
  Slope rho;
  double M = 50.0;
  std::int64_t N = 50;
  double t_burn = 100.0;
};

/// Linear field of slope rho on the torus (M, N) evolved for t_burn.
HeightField burn_in_stationary(const StationarySetup& setup, std::uint64_t seed);

struct GrowthEstimate {
  double speed_estimate = 0.0;
  double speed_std_error = 0.0;
  std::vector<double> times;
  std::vector<double> mean_dh;  // mean of h(0,0,t) - h(0,0,0)
  std::vector<double> var_dh;
  double kink_density = 0.0;
  double antikink_density = 0.0;
  int replicas = 0;
};

/// Independent burn-ins followed by fresh growth over [0, T]; times form the
/// grid T/32, T/16, ..., T. Densities are averaged over the grid times.
GrowthEstimate measure_growth(const StationarySetup& setup, double T, int replicas, std::uint64_t seed,
                              int threads = 1);

struct CountMoments {
  int R = 0;
  double mean_kinks = 0.0;
  double var_kinks = 0.0;
  double mean_antikinks = 0.0;
  double var_antikinks = 0.0;
  std::int64_t samples = 0;
  double area() const { return 2.0 * R * (2.0 * R + 1.0); }
};

/// Moments of the kink and antikink counts in [-R, R] x {-R..R} around a few
/// centres and times per stationary replica.
std::vector<CountMoments> kink_count_variance(const StationarySetup& setup, const std::vector<int>& radii,
                                              int replicas, std::uint64_t seed, int threads = 1);
CountMoments kink_count_variance(const StationarySetup& setup, int R, int replicas, std::uint64_t seed,
                                 int threads = 1);

}  // namespace gwflow
