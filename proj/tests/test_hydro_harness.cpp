#include <doctest.h>

#include <cmath>
#include <memory>

#include "gwflow/hydro_harness.hpp"

using namespace gwflow;

TEST_CASE("rescaled field at time zero tracks the profile") {
  const auto f = ContinuousProfile::affine(0.3, -0.5, 0.1);
  for (int n : {10, 40}) {
    const TorusDomain d{Fixed::grid(2.0 * n), 2 * n};
    const HeightField phi = discretize(f, n, d);
    const auto traj = std::make_shared<const Trajectory>(evolve(phi, sample_creations(3, d, 0.5 * n), 0.5 * n));
    const RescaledField S = rescale(traj, n);
    for (double x : {-1.3, 0.0, 0.77}) {
      for (double y : {-0.9, 0.0, 0.41}) {
        CHECK(std::abs(S(x, y, 0.0) - f(x, y)) <= 2.0 / n);
        CHECK(S(x, y, 0.5) >= S(x, y, 0.25));
      }
    }
    CHECK(S.t_max() == doctest::Approx(0.5));
    CHECK_THROWS_AS(S(0.0, 0.0, 0.6), std::out_of_range);
    CHECK_THROWS_AS(S(0.0, 0.0, -0.1), std::out_of_range);

    const RescaledField later = rescale(*traj, n, 0.2);
    CHECK(later(0.2, 0.1, 0.2) == S(0.2, 0.1, 0.0));
    CHECK_THROWS_AS(later(0.0, 0.0, 0.1), std::out_of_range);
    CHECK(later.t_max() == doctest::Approx(0.5));
  }
}

TEST_CASE("convergence experiment on linear data") {
  ConvergenceSetup s;
  s.f = ContinuousProfile::affine(0.0, -0.5);
  s.n_list = {10, 20, 40};
  s.R = 0.5;
  s.seeds = {1, 2};
  s.grid = {9, 9, 5};
  const ConvergenceReport rep = convergence_experiment(s);
  CHECK(rep.reference == "exact");
  CHECK(rep.rows.size() == 6);
  CHECK(rep.n == std::vector<int>{10, 20, 40});
  CHECK(rep.strictly_decreasing());
  CHECK(rep.fitted_exponent < -0.5);
  CHECK(rep.error.back() < 0.1);

  const ConvergenceReport again = convergence_experiment(s, 2);
  for (std::size_t i = 0; i < rep.rows.size(); ++i) CHECK(again.rows[i].sup_error == rep.rows[i].sup_error);
}

TEST_CASE("convergence setup validation") {
  ConvergenceSetup s;
  s.n_list = {20, 10};
  CHECK_THROWS_WITH_AS(check_setup(s), doctest::Contains("n_list"), std::invalid_argument);
  s.n_list = {10};
  s.N = 0.55;
  CHECK_THROWS_AS(check_setup(s), std::invalid_argument);
  s.N = 1.0;
  s.f = ContinuousProfile::affine(0.1, -0.5);
  s.reference = Reference::HopfLax;
  CHECK_THROWS_WITH_AS(check_setup(s), doctest::Contains("hopf-lax"), std::invalid_argument);
  s.reference = Reference::Auto;
  CHECK_NOTHROW(check_setup(s));
}

TEST_CASE("axiom suite at small sizes") {
  AxiomOptions opt;
  opt.sizes = {10};
  opt.seeds = 2;
  const PropertyReport rep = axiom_suite(11, opt);
  CHECK(rep.checks.size() >= 6);
  for (const auto& c : rep.checks) {
    INFO(c.name << ": " << c.detail);
    CHECK(c.passed);
    CHECK(c.checks > 0);
  }
  CHECK(rep.all_passed());
}
