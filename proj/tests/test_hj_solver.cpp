#include <doctest.h>

#include <cmath>
#include <numbers>
#include <random>

#include "gwflow/hj_solver.hpp"
#include "gwflow/polymer_oracle.hpp"

using namespace gwflow;

namespace {
constexpr double kPi = std::numbers::pi;

double max_diff(const GridSolution& a, const GridSolution& b) {
  return (a.periodic_part - b.periodic_part).abs().maxCoeff();
}
}  // namespace

TEST_CASE("numerical hamiltonian consistency") {
  CHECK(numerical_hamiltonian(0.0, 0.0, -0.5, -0.5) == doctest::Approx(2.0 / kPi).epsilon(1e-15));
  std::mt19937_64 gen(4);
  std::uniform_real_distribution<double> P(-2.0, 2.0), Q(-1.0, 0.0);
  for (int k = 0; k < 100; ++k) {
    const double p = P(gen), q = Q(gen);
    CHECK(numerical_hamiltonian(p, p, q, q) == speed(p, q));
  }
}

TEST_CASE("numerical hamiltonian monotone pattern") {
  std::mt19937_64 gen(5);
  std::uniform_real_distribution<double> P(-2.0, 2.0), Q(-1.2, 0.2);
  const double h = 1e-6;
  int bad = 0;
  for (int k = 0; k < 2000; ++k) {
    const double a = P(gen), b = P(gen), c = Q(gen), d = Q(gen);
    const double H = numerical_hamiltonian(a, b, c, d);
    if (numerical_hamiltonian(a + h, b, c, d) > H + 1e-15) ++bad;
    if (numerical_hamiltonian(a, b + h, c, d) < H - 1e-15) ++bad;
    if (numerical_hamiltonian(a, b, c + h, d) > H + 1e-15) ++bad;
    if (numerical_hamiltonian(a, b, c, d + h) < H - 1e-15) ++bad;
  }
  CHECK(bad == 0);
}

TEST_CASE("affine data is reproduced exactly") {
  for (auto [r1, r2] : {std::pair{0.0, -0.5}, {0.3, -0.2}, {-1.2, -0.9}, {0.0, 0.0}}) {
    const auto f = ContinuousProfile::affine(r1, r2, 0.25);
    const GridSpec g{24, 20, 2.0, 3.0};
    for (double T : {0.1, 1.0, 2.7}) {
      const auto u = solve(f, T, g);
      double err = 0.0;
      for (int i = 0; i < g.nx; ++i) {
        for (int j = 0; j < g.ny; ++j) err = std::max(err, std::abs(u.at(i, j) - f(u.x(i), u.y(j)) - T * speed(r1, r2)));
      }
      CHECK(err <= 1e-12);
      CHECK(u.t == T);
    }
  }
  const auto zero = solve(ContinuousProfile{}, 5.0, GridSpec{8, 8, 1.0, 1.0});
  CHECK(zero.periodic_part.abs().maxCoeff() == 0.0);
}

TEST_CASE("interpolation") {
  const SinusoidProfile s{0.2, -0.3, 0.1, 2 * kPi, 2 * kPi};
  const auto u = sample_initial(ContinuousProfile(s), GridSpec{64, 64, 1.0, 1.0});
  CHECK(u(u.x(5), u.y(9)) == doctest::Approx(u.at(5, 9)).epsilon(1e-14));
  CHECK(u(u.x(5) + 3.0, u.y(9)) == doctest::Approx(u.at(5, 9) + 0.6).epsilon(1e-12));
  CHECK(std::abs(u(0.123, 0.456) - ContinuousProfile(s)(0.123, 0.456)) < 0.01);
}

TEST_CASE("self convergence on the sinusoid") {
  const SinusoidProfile s{0.0, -0.5, 0.1, 2 * kPi, 0.0};
  const int ns[] = {16, 32, 64, 128};
  std::vector<GridSolution> u;
  for (int n : ns) u.push_back(solve(ContinuousProfile(s), 0.5, GridSpec{n, n, 1.0, 1.0}));
  std::vector<double> e;
  for (int k = 0; k < 3; ++k) {
    double m = 0.0;
    for (int i = 0; i < ns[k]; ++i) {
      for (int j = 0; j < ns[k]; ++j) m = std::max(m, std::abs(u[k].at(i, j) - u[k + 1].at(2 * i, 2 * j)));
    }
    e.push_back(m);
  }
  CHECK(e[0] / e[1] >= 1.8);
  CHECK(e[1] / e[2] >= 1.8);
}

TEST_CASE("vhat lagrangian matches the closed form") {
  for (double a = -3.0; a <= 3.0; a += 0.0625) {
    double exact;
    if (a >= 2.0) {
      exact = 0.0;
    } else if (a <= -2.0) {
      exact = -a;
    } else {
      exact = (std::sqrt(4.0 - a * a) - a * std::acos(a / 2.0)) / kPi;
    }
    CHECK(vhat_lagrangian(a) == doctest::Approx(exact).epsilon(1e-10).scale(1.0));
  }
}

TEST_CASE("hopf lax on linear and wedge data") {
  for (double r2 : {-0.1, -0.5, -0.75}) {
    const auto g = ContinuousProfile::affine(0.0, r2);
    for (double y : {-1.0, 0.3}) CHECK(hopf_lax_1d(g, 0.8, y) == doctest::Approx(r2 * y + 0.8 * vhat(r2)).epsilon(1e-9));
  }
  const auto w = ContinuousProfile::y_wedge(-0.5, -0.25, 4.0);
  for (double y : {-1.5, 0.0, 0.7}) {
    CHECK(hopf_lax_1d(w, 0.0, y) == w(0.0, y));
    CHECK(std::abs(hopf_lax_1d(w, 1e-4, y) - w(0.0, y)) <= 2e-4);
  }
  // Rarefaction fan at the convex corner: u(0, t) = t sup_q {vhat(q)} over q in [-1/2, -1/4].
  CHECK(hopf_lax_1d(w, 1.0, 0.0) == doctest::Approx(vhat(-0.5)).epsilon(1e-9));
  CHECK_THROWS_AS(hopf_lax_1d(ContinuousProfile::affine(1.0, -0.5), 1.0, 0.0), std::invalid_argument);
}

TEST_CASE("wedge against hopf lax") {
  const auto f = ContinuousProfile::y_wedge(-0.5, -0.25, 4.0);
  const auto u = solve(f, 1.0, GridSpec{4, 128, 1.0, 4.0});
  const double dt = 1.0 / u.steps;
  double err = 0.0;
  for (int j = 0; j < u.ny(); ++j) err = std::max(err, std::abs(u.at(0, j) - hopf_lax_1d(f, 1.0, u.y(j))));
  CHECK(err <= 2.0 * (u.dy + dt));
  CHECK(u.dyu_min >= -0.5 - 1e-12);
  CHECK(u.dyu_max <= -0.25 + 1e-12);
}

TEST_CASE("scheme properties") {
  const GridSpec g{48, 48, 4.0, 4.0};
  const SinusoidProfile s{0.1, -0.4, 0.05, kPi / 2, kPi / 2};
  const GridSolution a = sample_initial(ContinuousProfile(s), g);

  SUBCASE("monotone") {
    std::mt19937_64 gen(9);
    std::uniform_real_distribution<double> U(0.0, 0.05);
    for (int trial = 0; trial < 5; ++trial) {
      GridSolution b = a;
      for (int i = 0; i < g.nx; ++i) {
        for (int j = 0; j < g.ny; ++j) b.periodic_part(i, j) += U(gen);
      }
      const auto ua = solve(a, 0.7);
      const auto ub = solve(b, 0.7);
      CHECK((ub.periodic_part - ua.periodic_part).minCoeff() >= 0.0);
    }
  }
  SUBCASE("vertical translation") {
    GridSolution b = a;
    b.periodic_part += 3.0;
    const auto ua = solve(a, 0.7);
    const auto ub = solve(b, 0.7);
    CHECK((ub.periodic_part - ua.periodic_part - 3.0).abs().maxCoeff() <= 1e-13);
  }
  SUBCASE("semigroup") {
    const auto one = solve(a, 1.0);
    const auto two = solve(solve(a, 0.4), 0.6);
    CHECK(max_diff(one, two) <= 0.1 * g.Lx / g.nx);
    CHECK(two.t == doctest::Approx(1.0));
  }
  SUBCASE("finite speed of propagation") {
    const GridSpec big{128, 128, 8.0, 8.0};
    const GridSolution c = sample_initial(ContinuousProfile::affine(0.2, -0.4), big);
    GridSolution d = c;
    for (int i = 0; i < big.nx; ++i) {
      for (int j = 0; j < big.ny; ++j) {
        const double r = std::hypot(c.x(i), c.y(j));
        if (r < 0.5) d.periodic_part(i, j) += 0.3 * (0.5 - r);
      }
    }
    const double T = 1.0;
    const auto uc = solve(c, T);
    const auto ud = solve(d, T);
    double cone2 = 0.0, far = 0.0;
    for (int i = 0; i < big.nx; ++i) {
      for (int j = 0; j < big.ny; ++j) {
        const double x = std::abs(c.x(i)), y = std::abs(c.y(j));
        const double diff = std::abs(uc.at(i, j) - ud.at(i, j));
        if (x > 0.5 + 2.0 * T || y > 0.5 + 4.0 * T) cone2 = std::max(cone2, diff);
        if (std::hypot(x, y) > 0.5 + kLocalityAlpha * T) far = std::max(far, diff);
      }
    }
    CHECK(cone2 <= 1e-12);
    CHECK(far <= 1e-12);
  }
}

TEST_CASE("solver input validation") {
  const GridSpec g{8, 8, 1.0, 1.0};
  PiecewiseLinearProfile wedge{PiecewiseLinearProfile::Combine::Max, {{0.0, -0.25, 0.0}, {0.0, -0.5, 0.0}}};
  CHECK_THROWS_WITH_AS(solve(ContinuousProfile(wedge), 1.0, g), doctest::Contains("periodic"), std::invalid_argument);
  CHECK_THROWS_AS(solve(ContinuousProfile{}, 1.0, g, SchemeParams{1.0, 2.0, 1.5}), std::invalid_argument);
  CHECK_THROWS_AS(solve(ContinuousProfile{}, 1.0, g, SchemeParams{0.5, 2.0, 0.4}), std::invalid_argument);
  CHECK_THROWS_AS(solve(ContinuousProfile{}, -1.0, g), std::invalid_argument);
}
