#include "gwflow/hj_solver.hpp"

#include <boost/math/tools/minima.hpp>

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <stdexcept>
#include <string>

namespace gwflow {

namespace {

constexpr double kPi = std::numbers::pi;

void check_params(const SchemeParams& p) {
  if (!(p.sigma_x >= 1.0)) throw std::invalid_argument("scheme: sigma_x must be >= 1 (Lipschitz bound of v in rho1)");
  if (!(p.sigma_y >= 2.0)) throw std::invalid_argument("scheme: sigma_y must be >= 2 (Lipschitz bound of v in rho2)");
  if (!(p.cfl > 0.0 && p.cfl <= 1.0)) throw std::invalid_argument("scheme: cfl must lie in (0, 1]");
}

int wrap(int i, int n) {
  i %= n;
  return i < 0 ? i + n : i;
}

/// Minimizer of a function on [lo, hi] to near machine precision.
template <class F>
std::pair<double, double> minimize(F&& f, double lo, double hi) {
  const auto r = boost::math::tools::brent_find_minima(f, lo, hi, std::numeric_limits<double>::digits / 2 + 4);
  return r;
}

}  // namespace

double GridSolution::operator()(double xq, double yq) const {
  const double fx = (xq + 0.5 * Lx) / dx;
  const double fy = (yq + 0.5 * Ly) / dy;
  const double ix = std::floor(fx);
  const double iy = std::floor(fy);
  const double ax = fx - ix;
  const double ay = fy - iy;
  const int i0 = wrap(static_cast<int>(ix), nx());
  const int j0 = wrap(static_cast<int>(iy), ny());
  const int i1 = wrap(i0 + 1, nx());
  const int j1 = wrap(j0 + 1, ny());
  const auto& w = periodic_part;
  const double wv = (1 - ax) * (1 - ay) * w(i0, j0) + ax * (1 - ay) * w(i1, j0) + (1 - ax) * ay * w(i0, j1) +
                    ax * ay * w(i1, j1);
  return background.rho1 * xq + background.rho2 * yq + wv;
}

double numerical_hamiltonian(double pm, double pp, double qm, double qp, const SchemeParams& params) {
  return speed(0.5 * (pm + pp), 0.5 * (qm + qp)) + 0.5 * params.sigma_x * (pp - pm) + 0.5 * params.sigma_y * (qp - qm);
}

GridSolution sample_initial(const ContinuousProfile& f, const GridSpec& grid) {
  if (grid.nx < 2 || grid.ny < 2) throw std::invalid_argument("grid: need at least 2 points per direction");
  if (!(grid.Lx > 0.0 && grid.Ly > 0.0)) throw std::invalid_argument("grid: cell lengths must be positive");
  GridSolution s;
  s.Lx = grid.Lx;
  s.Ly = grid.Ly;
  s.dx = grid.Lx / grid.nx;
  s.dy = grid.Ly / grid.ny;
  if (const auto* a = std::get_if<AffineProfile>(&f.kind())) {
    s.background = {a->rho1, a->rho2};
  } else if (const auto* sn = std::get_if<SinusoidProfile>(&f.kind())) {
    s.background = {sn->rho1, sn->rho2};
  } else {
    s.background = {(f(0.5 * grid.Lx, 0.0) - f(-0.5 * grid.Lx, 0.0)) / grid.Lx,
                    (f(0.0, 0.5 * grid.Ly) - f(0.0, -0.5 * grid.Ly)) / grid.Ly};
  }
  const double r1 = s.background.rho1, r2 = s.background.rho2;
  for (int a = 0; a < 7; ++a) {
    for (int b = 0; b < 7; ++b) {
      const double x = (a / 7.0 - 0.37) * grid.Lx;
      const double y = (b / 7.0 - 0.41) * grid.Ly;
      const double v = f(x, y);
      const double tol = 1e-9 * (1.0 + std::abs(v));
      if (std::abs(f(x + grid.Lx, y) - v - r1 * grid.Lx) > tol || std::abs(f(x, y + grid.Ly) - v - r2 * grid.Ly) > tol) {
        throw std::invalid_argument("initial datum " + f.describe() + " is not affine plus (" + std::to_string(grid.Lx) +
                                    ", " + std::to_string(grid.Ly) + ")-periodic");
      }
    }
  }
  s.periodic_part.resize(grid.nx, grid.ny);
  for (int i = 0; i < grid.nx; ++i) {
    for (int j = 0; j < grid.ny; ++j) s.periodic_part(i, j) = f(s.x(i), s.y(j)) - r1 * s.x(i) - r2 * s.y(j);
  }
  s.dyu_min = std::numeric_limits<double>::infinity();
  s.dyu_max = -std::numeric_limits<double>::infinity();
  for (int i = 0; i < grid.nx; ++i) {
    for (int j = 0; j < grid.ny; ++j) {
      const double q = r2 + (s.periodic_part(i, wrap(j + 1, grid.ny)) - s.periodic_part(i, j)) / s.dy;
      s.dyu_min = std::min(s.dyu_min, q);
      s.dyu_max = std::max(s.dyu_max, q);
    }
  }
  return s;
}

GridSolution solve(const GridSolution& from, double T, const SchemeParams& params) {
  check_params(params);
  if (!(T >= 0.0)) throw std::invalid_argument("solve: T must be non-negative");
  GridSolution s = from;
  if (T == 0.0) return s;
  const int nx = s.nx(), ny = s.ny();
  const double dt_max = params.cfl * std::min(s.dx, s.dy) / (params.sigma_x + params.sigma_y);
  const int n = static_cast<int>(std::ceil(T / dt_max - 1e-9));
  const double dt = T / n;
  if (dt * (params.sigma_x / s.dx + params.sigma_y / s.dy) > 1.0) throw std::invalid_argument("solve: CFL violated");
  const double r1 = s.background.rho1, r2 = s.background.rho2;
  Eigen::ArrayXXd next(nx, ny);
  for (int k = 0; k < n; ++k) {
    const Eigen::ArrayXXd& w = s.periodic_part;
    for (int j = 0; j < ny; ++j) {
      const int jm = wrap(j - 1, ny), jp = wrap(j + 1, ny);
      for (int i = 0; i < nx; ++i) {
        const int im = wrap(i - 1, nx), ip = wrap(i + 1, nx);
        const double c = w(i, j);
        const double pm = r1 + (c - w(im, j)) / s.dx;
        const double pp = r1 + (w(ip, j) - c) / s.dx;
        const double qm = r2 + (c - w(i, jm)) / s.dy;
        const double qp = r2 + (w(i, jp) - c) / s.dy;
        next(i, j) = c + dt * numerical_hamiltonian(pm, pp, qm, qp, params);
        s.dyu_min = std::min(s.dyu_min, qp);
        s.dyu_max = std::max(s.dyu_max, qp);
      }
    }
    s.periodic_part.swap(next);
  }
  s.t += T;
  s.steps += n;
  return s;
}

GridSolution solve(const ContinuousProfile& initial, double T, const GridSpec& grid, const SchemeParams& params) {
  return solve(sample_initial(initial, grid), T, params);
}

double vhat(double q) { return 2.0 / kPi * std::abs(std::sin(kPi * q)); }

double vhat_lagrangian(double a) {
  // a q + vhat(q) is concave on [-1, 0].
  const auto r = minimize([a](double q) { return -(a * q + vhat(q)); }, -1.0, 0.0);
  double best = -r.second;
  best = std::max({best, vhat(0.0), -a + vhat(-1.0)});
  return best;
}

double hopf_lax_1d(const std::function<double(double)>& g, double t, double y) {
  if (t < 0.0) throw std::invalid_argument("hopf_lax_1d: negative time");
  if (t == 0.0) return g(y);
  // Minimizers satisfy |y - z| <= t sup|vhat'| = 2 t.
  auto obj = [&](double z) { return g(z) + t * vhat_lagrangian((y - z) / t); };
  constexpr int kGrid = 2000;
  const double lo = y - 2.0 * t;
  const double h = 4.0 * t / kGrid;
  int best = 0;
  double best_v = obj(lo);
  for (int k = 1; k <= kGrid; ++k) {
    const double v = obj(lo + k * h);
    if (v < best_v) {
      best_v = v;
      best = k;
    }
  }
  const double a = lo + std::max(best - 1, 0) * h;
  const double b = lo + std::min(best + 1, kGrid) * h;
  const auto r = minimize(obj, a, b);
  return std::min(best_v, r.second);
}

double hopf_lax_1d(const ContinuousProfile& f, double t, double y) {
  if (!f.y_only()) throw std::invalid_argument("hopf_lax_1d: datum " + f.describe() + " depends on x");
  return hopf_lax_1d([&f](double z) { return f(0.0, z); }, t, y);
}

}  // namespace gwflow
