#include <cmath>
#include <sstream>

#include <doctest.h>
#include "gwflow/growth_dynamics.hpp"
#include "gwflow/rng.hpp"
#include "naive_dynamics.hpp"

using namespace gwflow;

namespace {

HeightField one_row_window(std::vector<Step> steps, std::int64_t anchor, int a, int b) {
  HeightField f = HeightField::flat(WindowDomain{Fixed::from_int(a), Fixed::from_int(b), 0, 2});
  f.rows[0].anchor = anchor;
  f.rows[1] = Row{std::move(steps), anchor};
  f.rows[2].anchor = anchor - 1;
  return f;
}

}  // namespace

TEST_CASE("sample_creations basics") {
  const Domain torus = TorusDomain{Fixed::from_int(100), 5};
  CHECK(sample_creations(1, torus, 0.0).points.empty());
  const auto a = sample_creations(42, torus, 1.0);
  const auto b = sample_creations(42, torus, 1.0);
  CHECK(a.points == b.points);
  for (const auto& c : a.points) {
    CHECK(c.x >= Fixed::from_int(-100));
    CHECK(c.x < Fixed::from_int(100));
    CHECK(c.y >= -5);
    CHECK(c.y <= 4);
  }
  double sum = 0.0;
  for (std::uint64_t s = 0; s < 200; ++s) sum += static_cast<double>(sample_creations(s, torus, 1.0).points.size());
  CHECK(std::abs(sum / 200 - 4000.0) <= 3.0 * std::sqrt(4000.0) / std::sqrt(200.0) * 3.0);
  CHECK(std::abs(sum / 200 - 4000.0) <= 3.0 * std::sqrt(4000.0));
  CHECK_THROWS(sample_creations(1, WindowDomain{Fixed::from_int(1), Fixed::from_int(1), 0, 0}, 1.0));
}

TEST_CASE("periodize arithmetic") {
  CreationSet w;
  w.points = {{Fixed::from_double(10.5), 0, Fixed::from_int(1)},
              {Fixed::from_double(-3.25), 2, Fixed::from_int(2)},
              {Fixed::from_double(1.0), 4, Fixed::from_int(3)}};
  const auto p = periodize(w, Fixed::from_int(10), 4);
  CHECK(p.points[0].x == Fixed::from_double(-9.5));
  CHECK(p.points[0].y == 0);
  CHECK(p.points[1].x == Fixed::from_double(-3.25));
  CHECK(p.points[1].y == 2);
  CHECK(p.points[2].y == -4);
}

TEST_CASE("flat field never accepts a creation") {
  const Domain d = TorusDomain{Fixed::from_int(10), 5};
  const auto f = HeightField::flat(d, 3);
  const auto omega = sample_creations(5, d, 4.0);
  const auto tr = evolve(f, omega, 4.0);
  for (const auto& c : tr.creations.points) CHECK(c.status == CreationStatus::Rejected);
  CHECK(tr.snapshots.back().field == f);
}

TEST_CASE("kink and antikink annihilate at (1, 1)") {
  const auto f = one_row_window({{Fixed::from_int(0), StepType::Kink}, {Fixed::from_int(2), StepType::Antikink}}, 0,
                                -5, 5);
  REQUIRE(validate(f).ok());
  CreationSet none;
  none.domain = f.domain;
  none.horizon = Fixed::from_int(3);
  const auto tr = evolve(f, none, 3.0, {0.5});
  REQUIRE(tr.annihilations.size() == 1);
  CHECK(tr.annihilations[0].x == Fixed::from_int(1));
  CHECK(tr.annihilations[0].t == Fixed::from_int(1));
  CHECK(tr.snapshots.back().field.row(1).steps.empty());
  CHECK(tr.snapshots.back().field.row(1).anchor == 0);
  CHECK(height_at(tr, 1.0, 1, 0.5) == -1);
  CHECK(height_at(tr, 0.4, 1, 0.5) == 0);
  CHECK(height_at(tr, 1.0, 1, 1.0) == 0);
}

TEST_CASE("single effective creation on the half-occupied torus") {
  const auto f = linear_field(0.0, -0.5, 1, 10, 10);
  // row y has h = floor(-y/2): an odd y sits one below y - 1 and level with y + 1
  std::int64_t y = 1;
  REQUIRE(eval_height(f, 0.0, y - 1) - eval_height(f, 0.0, y) == 1);
  REQUIRE(eval_height(f, 0.0, y) == eval_height(f, 0.0, y + 1));
  CreationSet w;
  w.domain = f.domain;
  w.horizon = Fixed::from_int(2);
  w.points = {{Fixed::from_int(3), y, Fixed::from_int(1)}, {Fixed::from_int(3), 0, Fixed::from_int(1)}};
  std::sort(w.points.begin(), w.points.end(), creation_before);
  const auto tr = evolve(f, w, 2.0);
  CHECK(tr.creations.points[0].status == CreationStatus::Rejected);  // y = 0 is below nothing
  CHECK(tr.creations.points[1].status == CreationStatus::Effective);
  const std::int64_t h0 = eval_height(f, 3.0, y);
  CHECK(height_at(tr, 3.0, y, 0.9) == h0);
  CHECK(height_at(tr, 3.0, y, 1.0) == h0 + 1);
  CHECK(height_at(tr, 3.0, y, 2.0) == h0 + 1);
  CHECK(height_at(tr, 3.4, y, 1.5) == h0 + 1);
  CHECK(height_at(tr, 4.6, y, 1.5) == h0);
  CHECK(height_at(tr, 2.6, y, 1.5) == h0 + 1);
  CHECK(height_at(tr, 2.5, y, 1.5) == h0 + 1);
  CHECK(height_at(tr, 2.4999, y, 1.5) == h0);
  CHECK(height_at(tr, 3.5, y, 1.5) == h0 + 1);
  CHECK(height_at(tr, 3.5001, y, 1.5) == h0);
}

TEST_CASE("island on an empty row closes around the torus") {
  const auto f = linear_field(0.0, -0.5, 1, 4, 2);
  CreationSet w;
  w.domain = f.domain;
  w.horizon = Fixed::from_int(10);
  w.points = {{Fixed::from_int(1), 1, Fixed::from_int(1)}};
  const auto tr = evolve(f, w, 10.0, {4.0, 6.0});
  REQUIRE(tr.creations.points[0].status == CreationStatus::Effective);
  REQUIRE(tr.annihilations.size() == 1);
  CHECK(tr.annihilations[0].t == Fixed::from_int(5));
  CHECK(tr.annihilations[0].x == Fixed::from_int(-3));
  CHECK(tr.snapshots.back().field.row(1).steps.empty());
  CHECK(tr.snapshots.back().field.row(1).anchor == f.row(1).anchor + 1);
  CHECK(validate(tr.snapshots[1].field).ok());
}

TEST_CASE("simulator matches the naive reference dynamics") {
  for (std::uint64_t seed = 1; seed <= 12; ++seed) {
    const double rho1 = seed % 3 == 0 ? 0.0 : (seed % 3 == 1 ? 0.25 : -0.5);
    const double rho2 = seed % 2 ? -0.5 : -0.25;
    const auto f = linear_field(rho1, rho2, 1, 6, 4);
    const auto omega = sample_creations(seed, f.domain, 6.0);
    const auto tr = evolve(f, omega, 6.0, {1.5, 3.0, 4.5});

    naive::Torus ref(f);
    std::size_t next = 0;
    Rng rng(seed * 977);
    for (const auto& snap : tr.snapshots) {
      while (next < tr.creations.points.size() && tr.creations.points[next].t <= snap.t) {
        const auto& c = tr.creations.points[next];
        ref.advance_to(c.t.to_double());
        const bool ok = ref.create(c.x.to_double(), c.y);
        CHECK(ok == (c.status == CreationStatus::Effective));
        ++next;
      }
      ref.advance_to(snap.t.to_double());
      CHECK(validate(snap.field).ok());
      const FieldIndex idx(snap.field);
      for (std::int64_t y = -4; y < 4; ++y) {
        for (const auto& s : ref.lines[static_cast<std::size_t>(y + 4)].s) {
          CHECK(idx.height(Fixed::from_double(s.x), y) == ref.h(s.x, y));
        }
        for (int i = 0; i < 20; ++i) {
          const double x = rng.uniform(-9.0, 9.0);
          CHECK(idx.height(Fixed::from_double(x), y) == ref.h(x, y));
        }
      }
    }
    CHECK(static_cast<long long>(tr.annihilations.size()) == ref.annihilations);
  }
}

TEST_CASE("height_at agrees with snapshots and is monotone in time") {
  const auto f = linear_field(0.3, -0.5, 1, 10, 5);
  const auto omega = sample_creations(9, f.domain, 8.0);
  const auto tr = evolve(f, omega, 8.0, {2.0, 4.0, 6.0});
  const auto dense = evolve(f, omega, 8.0, {1.0, 2.0, 3.0, 4.0, 5.0, 6.0, 7.0});
  Rng rng(3);
  for (int i = 0; i < 200; ++i) {
    const double x = rng.uniform(-10, 10);
    const auto y = static_cast<std::int64_t>(rng.below(10)) - 5;
    std::int64_t prev = height_at(tr, x, y, 0.0);
    CHECK(prev == eval_height(f, x, y));
    for (int k = 1; k <= 7; ++k) {
      const std::int64_t h = height_at(tr, x, y, k);
      CHECK(h >= prev);
      CHECK(h == eval_height(dense.snapshots[static_cast<std::size_t>(k)].field, x, y));
      prev = h;
    }
  }
}

TEST_CASE("vertical translation, monotone coupling and Markov split") {
  for (std::uint64_t seed = 100; seed < 104; ++seed) {
    const auto f = linear_field(0.25, -0.5, 1, 20, 20);
    const auto omega = sample_creations(seed, f.domain, 6.0);
    const auto base = evolve(f, omega, 6.0).snapshots.back().field;
    const auto up = evolve(f.shifted(7), omega, 6.0).snapshots.back().field;
    CHECK(up == base.shifted(7));
    const auto hi = evolve(f.shifted(3), omega, 6.0).snapshots.back().field;
    const FieldIndex ib(base), ih(hi);
    for (int i = -40; i < 40; ++i) {
      for (std::int64_t y = -20; y < 20; y += 3) CHECK(ib.height(Fixed::from_double(i * 0.5 + 0.125), y) <= ih.height(Fixed::from_double(i * 0.5 + 0.125), y));
    }
    const auto [one, two] = run_markov_split(f, omega, 3.0, 6.0);
    CHECK(one == two);
    const auto [a0, b0] = run_markov_split(f, omega, 0.0, 6.0);
    CHECK(a0 == b0);
    const auto [a1, b1] = run_markov_split(f, omega, 6.0, 6.0);
    CHECK(a1 == b1);
  }
}

TEST_CASE("windings are conserved") {
  const auto f = linear_field(-0.35, -0.3, 1, 10, 10);
  const auto tr = evolve(f, sample_creations(17, f.domain, 10.0), 10.0, {5.0});
  for (const auto& s : tr.snapshots) {
    CHECK(validate(s.field).ok());
    CHECK(s.field.p == f.p);
    CHECK(s.field.q == f.q);
  }
}

TEST_CASE("window mode keeps the window closed") {
  const auto f = discretize(ContinuousProfile::affine(0.2, -0.5), 1,
                            WindowDomain{Fixed::from_int(-15), Fixed::from_int(15), -6, 6});
  const auto omega = sample_creations(4, f.domain, 5.0);
  const auto tr = evolve(f, omega, 5.0, {2.5});
  for (const auto& s : tr.snapshots) CHECK(validate(s.field).ok());
  for (const auto& c : tr.creations.points) {
    if (c.y == -6 || c.y == 6) CHECK(c.status == CreationStatus::Rejected);
  }
}

TEST_CASE("event log is ordered ndjson") {
  const auto f = linear_field(0.0, -0.5, 1, 5, 3);
  const auto tr = evolve(f, sample_creations(2, f.domain, 3.0), 3.0);
  std::stringstream ss;
  write_events_ndjson(ss, tr);
  std::string line;
  int n = 0;
  while (std::getline(ss, line)) {
    CHECK(line.front() == '{');
    ++n;
  }
  CHECK(n >= static_cast<int>(tr.creations.points.size()));
}
