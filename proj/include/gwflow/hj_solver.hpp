#pragma once

#include <Eigen/Core>

#include <functional>

#include "gwflow/equilibrium.hpp"
#include "gwflow/profile.hpp"

namespace gwflow {

struct SchemeParams {
  double sigma_x = 1.0;
  double sigma_y = 2.0;
  double cfl = 0.4;
};

struct GridSpec {
  int nx = 64;
  int ny = 64;
  double Lx = 1.0;
  double Ly = 1.0;
};

/// u(x, y) = rho . (x, y) + w(x, y) with w periodic on the cell
/// [-Lx/2, Lx/2) x [-Ly/2, Ly/2), sampled at x_i = -Lx/2 + i dx.
struct GridSolution {
  Slope background;
  Eigen::ArrayXXd periodic_part;  // (nx, ny)
  double Lx = 1.0, Ly = 1.0;
  double dx = 1.0, dy = 1.0;
  double t = 0.0;
  int steps = 0;
  // Range of the discrete forward difference d_y u seen during the run.
  double dyu_min = 0.0, dyu_max = 0.0;

  int nx() const { return static_cast<int>(periodic_part.rows()); }
  int ny() const { return static_cast<int>(periodic_part.cols()); }
  double x(int i) const { return -0.5 * Lx + i * dx; }
  double y(int j) const { return -0.5 * Ly + j * dy; }
  double at(int i, int j) const { return background.rho1 * x(i) + background.rho2 * y(j) + periodic_part(i, j); }
  /// Bilinear interpolation of w plus the exact background, anywhere in the plane.
  double operator()(double x, double y) const;
};

/// Lax-Friedrichs flux for the growth equation d_t u = v(grad u):
/// v(mean p, mean q) + (sx/2)(p+ - p-) + (sy/2)(q+ - q-).
/// Non-increasing in p-, q- and non-decreasing in p+, q+ when sx, sy bound
/// the Lipschitz constants of v, so u + dt H is a monotone update.
double numerical_hamiltonian(double pm, double pp, double qm, double qp, const SchemeParams& params = {});

/// Samples f on the grid, splitting off the affine background. Throws
/// std::invalid_argument if f - rho . (x, y) is not (Lx, Ly)-periodic.
GridSolution sample_initial(const ContinuousProfile& f, const GridSpec& grid);

GridSolution solve(const ContinuousProfile& initial, double T, const GridSpec& grid, const SchemeParams& params = {});
/// Continues from a grid state for a further time T.
GridSolution solve(const GridSolution& from, double T, const SchemeParams& params = {});

/// vhat(q) = v(0, q) = (2/pi)|sin(pi q)|, concave on [-1, 0].
double vhat(double q);
/// L(a) = sup_{q in [-1, 0]} (a q + vhat(q)).
double vhat_lagrangian(double a);

/// u(y, t) = inf_z { g(z) + t L((y - z) / t) } for d_t u = vhat(d_y u) with
/// d_y g in [-1, 0].
double hopf_lax_1d(const std::function<double(double)>& g, double t, double y);
/// Same for a profile that does not depend on x; throws otherwise.
double hopf_lax_1d(const ContinuousProfile& f, double t, double y);

}  // namespace gwflow
