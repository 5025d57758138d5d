#include <doctest.h>

#include <cmath>
#include <numbers>

#include "gwflow/equilibrium.hpp"
#include "gwflow/growth_dynamics.hpp"
#include "gwflow/quadrature.hpp"

using namespace gwflow;

namespace {
constexpr double kPi = std::numbers::pi;
const KernelParams kRep{1.0, 0.5, -0.5, 1.0, 1.0};
}  // namespace

TEST_CASE("speed closed form") {
  CHECK(speed(Slope{0.0, -0.5}) == doctest::Approx(2.0 / kPi).epsilon(1e-15));
  CHECK(speed(Slope{0.0, -0.5}) == doctest::Approx(0.6366198).epsilon(1e-7));
  CHECK(speed(Slope{1.0, -0.5}) == doctest::Approx(1.18545).epsilon(1e-5));
  CHECK(speed(Slope{0.0, -1.0}) == doctest::Approx(0.0).epsilon(1e-15));
  for (double r1 : {-2.0, -0.3, 0.0, 0.7}) {
    CHECK(speed(Slope{r1, 0.0}) == doctest::Approx(std::abs(r1)));
    CHECK(std::abs(speed(Slope{r1, -1.0}) - std::abs(r1)) < 1e-12);
    CHECK(speed(Slope{r1, -0.3}) == speed(Slope{-r1, -0.3}));
  }
}

TEST_CASE("speed lipschitz bounds on a grid") {
  const double h = 1e-3;
  double s1 = 0.0, s2 = 0.0;
  for (double r1 = -2.0; r1 <= 2.0; r1 += 0.01) {
    for (double r2 = -1.0; r2 <= 0.0; r2 += 0.01) {
      s1 = std::max(s1, std::abs(speed(r1 + h, r2) - speed(r1, r2)) / h);
      s2 = std::max(s2, std::abs(speed(r1, r2 + h) - speed(r1, r2)) / h);
    }
  }
  CHECK(s1 <= 1.0 + 1e-9);
  CHECK(s2 <= 2.0 + 1e-9);
  CHECK(s2 > 1.9);
}

TEST_CASE("dispersion") {
  const KernelParams p{1.3, 0.4, -0.5, 1.0, 1.0};
  CHECK(dispersion(0.0, p) == std::complex<double>(-1.3, 0.0));
  CHECK(std::abs(dispersion(kPi / 2, p) - std::complex<double>(0.0, 0.4)) < 1e-15);
  for (double k : {0.1, 1.0, 2.5}) CHECK(std::abs(dispersion(-k, p) - std::conj(dispersion(k, p))) < 1e-15);
}

TEST_CASE("quadrature absolute tolerance") {
  QuadratureResult info;
  const double v = integrate([](double x) { return std::cos(40.0 * x); }, 0.0, 3.0, 1e-12, kPi / 40, &info);
  CHECK(std::abs(v - std::sin(120.0) / 40.0) < 1e-12);
  CHECK(info.error <= 1e-12);
  const auto c = integrate([](double x) { return std::exp(std::complex<double>(0.0, 3.0 * x)); }, 0.0, 1.0);
  CHECK(std::abs(c - std::complex<double>(std::sin(3.0) / 3.0, (1.0 - std::cos(3.0)) / 3.0)) < 1e-12);
}

TEST_CASE("kernel diagonal is the occupation density") {
  for (double r2 : {-0.1, -0.5, -0.8}) {
    KernelParams p = kRep;
    p.rho2 = r2;
    const auto k = kernel(1.5, 3, 1.5, 3, p);
    CHECK(std::abs(k - std::complex<double>(-r2, 0.0)) < 1e-10);
  }
}

TEST_CASE("kernel on a vertical line has the sinc form") {
  KernelParams p = kRep;
  p.rho2 = -0.37;
  const double theta = kPi * 0.37;
  for (int y = 1; y <= 200; y += 7) {
    const auto k = kernel(0.0, y, 0.0, 0, p);
    CHECK(std::abs(k - std::sin(y * theta) / (kPi * y)) < 1e-10);
    CHECK(std::abs(k) * y <= 1.0 / kPi + 1e-12);
  }
}

TEST_CASE("kernel decays exponentially in x'-x") {
  KernelParams p{1.0, 0.0, -0.3, 1.0, 1.0};
  const double rate = std::cos(0.3 * kPi);
  const double k20 = std::abs(kernel(20.0, 0, 0.0, 0, p));
  const double k40 = std::abs(kernel(40.0, 0, 0.0, 0, p));
  const double k80 = std::abs(kernel(80.0, 0, 0.0, 0, p));
  CHECK(k40 < k20);
  CHECK(k80 <= std::exp(-rate * 80.0));
  const double est = (std::log(k40) - std::log(k80)) / 40.0;
  CHECK(est == doctest::Approx(rate).epsilon(0.05));
}

TEST_CASE("kernel negative branch") {
  // x' < x with theta = pi/2: -(1/2pi) int_{pi/2}^{3pi/2} exp(-dx cos k) dk = -(1/2pi) int e^{-|dx| |cos|}.
  KernelParams p{1.0, 0.0, -0.5, 1.0, 1.0};
  const auto neg = kernel(0.0, 0, 2.0, 0, p);
  const auto pos = kernel(2.0, 0, 0.0, 0, p);
  CHECK(std::abs(neg + pos) < 1e-10);
  CHECK(std::abs(neg.imag()) < 1e-12);
}

TEST_CASE("structure function reference values") {
  // Independent evaluation with adaptive quadrature in double precision.
  CHECK(structure_function(10.0, 0, kRep, StepSign::Plus) == doctest::Approx(-0.0009696449924011415).epsilon(1e-8));
  CHECK(structure_function(8.0, 0, kRep, StepSign::Minus) == doctest::Approx(-0.0010286084679249864).epsilon(1e-8));
  CHECK(structure_function(5.0, 0, kRep, StepSign::Plus) == doctest::Approx(-0.0023506071519902925).epsilon(1e-8));
  CHECK(structure_function(35.0, 0, kRep, StepSign::Minus) == doctest::Approx(-7.832011854781083e-05).epsilon(1e-7));
  CHECK_THROWS_AS(structure_function(0.0, 0, kRep, StepSign::Plus), std::invalid_argument);
}

TEST_CASE("structure function symmetry and axis") {
  for (double x : {0.5, 3.0, 12.0}) {
    for (int y : {-4, 0, 5}) {
      CHECK(structure_function(x, y, kRep, StepSign::Plus) == structure_function(-x, -y, kRep, StepSign::Plus));
      CHECK(structure_function(x, y, kRep, StepSign::Minus) == structure_function(-x, -y, kRep, StepSign::Minus));
    }
  }
  // x = 0: A = 2 sin(m theta)/m, B = -2 sin(m theta)/m (theta = pi/2).
  for (int y = 5; y <= 40; y += 5) {
    const double m = y + 1.0;
    const double a = 2.0 * std::sin(m * kPi / 2) / m;
    const double b = (std::sin(m * 3 * kPi / 2) - std::sin(m * kPi / 2)) / m;
    CHECK(structure_function(0.0, y, kRep, StepSign::Plus) ==
          doctest::Approx(a * b / (4 * kPi * kPi)).epsilon(1e-9).scale(1e-12));
    CHECK(std::abs(structure_function(0.0, y, kRep, StepSign::Plus)) * y * y <= 4.0 / (4 * kPi * kPi) + 1e-9);
  }
}

TEST_CASE("structure function octave envelope is flat") {
  for (auto sign : {StepSign::Plus, StepSign::Minus}) {
    double lo = 1e300, hi = 0.0;
    for (int start : {5, 10, 20}) {
      double env = 0.0;
      for (int x = start; x <= 2 * start; ++x) {
        env = std::max(env, std::abs(structure_function(x, 0, kRep, sign)) * x * x);
      }
      lo = std::min(lo, env);
      hi = std::max(hi, env);
    }
    CHECK(hi / lo < 1.1);
  }
}

TEST_CASE("kernel params validation") {
  KernelParams p = kRep;
  p.eta_s = 0.0;
  CHECK_THROWS_WITH_AS(p.check(), doctest::Contains("eta_s"), std::invalid_argument);
  p = kRep;
  p.rho2 = 0.0;
  CHECK_THROWS_WITH_AS(p.check(), doctest::Contains("rho2"), std::invalid_argument);
}

TEST_CASE("burn-in conserves windings") {
  const StationarySetup s{{0.25, -0.5}, 8.0, 6, 5.0};
  const HeightField f0 = linear_field(0.25, -0.5, 1, 8.0, 6);
  const HeightField f = burn_in_stationary(s, 11);
  CHECK(f.p == f0.p);
  CHECK(f.q == f0.q);
  CHECK(validate(f).ok());
  const auto a = realized_slope(f);
  CHECK(a.rho1 == doctest::Approx(0.25));
  CHECK(a.rho2 == doctest::Approx(-0.5));
  CHECK_FALSE(f == f0);
  CHECK(burn_in_stationary(StationarySetup{{0.25, -0.5}, 8.0, 6, 0.0}, 11) == f0);
}

TEST_CASE("burn-in density plateau") {
  const StationarySetup s{{0.0, -0.5}, 50.0, 50, 100.0};
  const HeightField f = burn_in_stationary(s, 3);
  Simulator sim(f);
  auto density = [&] {
    const auto [k, a] = sim.count_steps(Fixed::from_int(-50), Fixed::from_int(50), -50, 49);
    return static_cast<double>(k + a) / (100.0 * 100.0);
  };
  const double d0 = density();
  auto omega = sample_creations(99, f.domain, 10.0);
  sim.advance(Fixed::grid(10.0), omega.points);
  const double d1 = density();
  CHECK(std::abs(d1 - d0) / d0 < 0.05);
  CHECK(d0 == doctest::Approx(2.0 / kPi).epsilon(0.05));
}

TEST_CASE("measure_growth guards and degenerate slope") {
  const StationarySetup s{{0.0, 0.0}, 6.0, 4, 2.0};
  CHECK_THROWS_WITH_AS(measure_growth(s, 4.0, 9, 1), doctest::Contains("at least 10"), std::invalid_argument);
  const auto g = measure_growth(s, 4.0, 10, 1);
  CHECK(g.speed_estimate == 0.0);
  CHECK(g.kink_density == 0.0);
  CHECK(g.antikink_density == 0.0);
  REQUIRE(g.times.size() == 6);
  CHECK(g.times.front() == doctest::Approx(4.0 / 32));
  CHECK(g.times.back() == 4.0);
}

TEST_CASE("measure_growth small torus") {
  const StationarySetup s{{0.3, -0.5}, 10.0, 10, 20.0};
  const auto g = measure_growth(s, 8.0, 10, 5);
  CHECK(g.antikink_density - g.kink_density == doctest::Approx(0.3).epsilon(1e-12));
  CHECK(g.speed_estimate > 0.0);
  for (std::size_t i = 1; i < g.mean_dh.size(); ++i) CHECK(g.mean_dh[i] >= g.mean_dh[i - 1]);
  const auto again = measure_growth(s, 8.0, 10, 5, 3);
  CHECK(again.mean_dh == g.mean_dh);
  CHECK(again.var_dh == g.var_dh);
}

TEST_CASE("kink_count_variance") {
  const StationarySetup s{{0.0, -0.5}, 16.0, 16, 10.0};
  CHECK_THROWS_AS(kink_count_variance(s, 9, 4, 1), std::invalid_argument);
  const auto m = kink_count_variance(s, std::vector<int>{2, 4, 8}, 4, 1);
  REQUIRE(m.size() == 3);
  CHECK(m[0].samples == 4 * 4 * 4);
  for (const auto& c : m) {
    CHECK(c.mean_kinks > 0.0);
    CHECK(c.var_kinks > 0.0);
  }
  CHECK(m[2].mean_kinks > m[0].mean_kinks);
  const auto single = kink_count_variance(s, 4, 4, 1);
  CHECK(single.mean_kinks == m[1].mean_kinks);
  CHECK(single.var_antikinks == m[1].var_antikinks);
}
