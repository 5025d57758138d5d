#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <queue>
#include <span>
#include <vector>

#include "gwflow/fixed.hpp"
#include "gwflow/height_lattice.hpp"

namespace gwflow {

enum class CreationStatus : std::uint8_t { Pending, Effective, Rejected };

struct Creation {
  Fixed x;
  std::int64_t y = 0;
  Fixed t;
  CreationStatus status = CreationStatus::Pending;
  friend bool operator==(const Creation&, const Creation&) = default;
};

inline bool creation_before(const Creation& a, const Creation& b) {
  if (a.t != b.t) return a.t < b.t;
  if (a.y != b.y) return a.y < b.y;
  return a.x < b.x;
}

struct CreationSet {
  std::vector<Creation> points;  // sorted by (t, y, x)
  double intensity = 2.0;
  Domain domain;
  std::uint64_t seed = 0;
  Fixed t_start;  // points live in (t_start, horizon]
  Fixed horizon;
};

/// Poisson points of intensity 2 on the domain x (0, T].
CreationSet sample_creations(std::uint64_t seed, const Domain& domain, double T);
/// Same on (t0, t1]. Row streams depend on (seed, y) only.
CreationSet sample_creations(std::uint64_t seed, const Domain& domain, Fixed t0, Fixed t1);

/// Wraps every point into [-M, M) x {-N..N-1}.
CreationSet periodize(const CreationSet& omega, Fixed M, std::int64_t N);

/// Points shifted back in time by s and restricted to t > 0.
CreationSet time_shift(const CreationSet& omega, Fixed s);

struct Annihilation {
  Fixed x;
  std::int64_t y = 0;
  Fixed t;
};

struct Snapshot {
  Fixed t;
  HeightField field;
};

struct Trajectory {
  HeightField initial;
  Fixed t_end;
  CreationSet creations;  // statuses resolved for t <= t_end
  std::vector<Annihilation> annihilations;
  std::vector<Snapshot> snapshots;  // includes t = 0
};

/// Exact event-driven state of the dynamics. Positions and times are fixed
/// point: kinks are stored by c = x - t, antikinks by c = x + t.
class Simulator {
 public:
  explicit Simulator(const HeightField& initial, Fixed t0 = Fixed{});
  /// Only row y is loaded; use with replay().
  Simulator(const HeightField& initial, Fixed t0, std::int64_t only_row);

  Fixed now() const { return now_; }
  bool torus() const { return torus_; }

  /// Processes every collision with time <= t, then the creations in `batch`
  /// (sorted, all with time in (now, t]) in order, then collisions up to t.
  /// Creation statuses are written back.
  void advance(Fixed t, std::span<Creation> batch);
  void advance(Fixed t) { advance(t, {}); }

  /// Like advance() but every creation in `effective` is inserted without
  /// checking the neighbouring rows.
  void replay(Fixed t, std::span<const Creation> effective);

  std::int64_t height(Fixed x, std::int64_t y) const;
  HeightField snapshot() const;

  void set_log_annihilations(bool on) { log_annihilations_ = on; }
  const std::vector<Annihilation>& annihilations() const { return annihilations_; }

  struct Counters {
    std::uint64_t creations = 0;
    std::uint64_t effective = 0;
    std::uint64_t annihilations = 0;
    std::uint64_t boundary_dropped = 0;  // window mode: creations on the first/last row
  };
  const Counters& counters() const { return counters_; }

  /// Kinks and antikinks with current position in [x0, x1) on rows y0..y1.
  std::pair<std::int64_t, std::int64_t> count_steps(Fixed x0, Fixed x1, std::int64_t y0, std::int64_t y1) const;

 private:
  struct SimStep {
    std::int64_t c;
    std::int64_t h_right;
    std::uint64_t id;
    StepType type;
  };
  struct SimRow {
    std::vector<SimStep> steps;
    std::int64_t flat = 0;  // torus: height of an empty row; window: height left of all steps
  };
  struct Collision {
    std::int64_t t;
    std::int64_t row;
    std::int64_t kink_c;
    std::uint64_t kink;
    std::uint64_t anti;
    bool operator>(const Collision& o) const {
      if (t != o.t) return t > o.t;
      if (row != o.row) return row > o.row;
      return kink > o.kink;
    }
  };
  struct Locate {
    std::int64_t lap;   // torus lap of the query
    std::ptrdiff_t i;   // last step counted at the query point, -1 if none
    std::int64_t xr;    // query position reduced to lap 0
  };

  std::int64_t pos(const SimStep& s) const { return s.type == StepType::Kink ? s.c + now_.ticks() : s.c - now_.ticks(); }
  std::int64_t row_index(std::int64_t y, std::int64_t* lift) const;
  Locate locate(const SimRow& row, std::int64_t x) const;
  std::int64_t row_height(const SimRow& row, std::int64_t x) const;
  bool has_step_at(const SimRow& row, const Locate& loc) const;
  void schedule(std::int64_t r, std::size_t left, std::size_t right);
  void run_collisions(std::int64_t t);
  void apply_creation(Creation& c);
  void insert_pair(std::int64_t r, Fixed x);
  void load(const HeightField& initial, std::optional<std::int64_t> only_row);

  bool torus_ = true;
  std::int64_t P_ = 0;  // torus period in ticks
  std::int64_t p_ = 0, q_ = 0;
  std::int64_t y_min_ = 0;
  Domain domain_;
  Fixed now_;
  std::vector<SimRow> rows_;
  std::uint64_t next_id_ = 1;
  std::priority_queue<Collision, std::vector<Collision>, std::greater<>> heap_;
  bool log_annihilations_ = false;
  std::vector<Annihilation> annihilations_;
  Counters counters_;
};

/// Runs the dynamics from time 0 to t_end using the creations in (0, t_end].
/// Snapshots are taken at t = 0, at every requested time, and at t_end.
Trajectory evolve(const HeightField& initial, const CreationSet& omega, double t_end,
                  const std::vector<double>& snapshot_times = {});
Trajectory evolve(const HeightField& initial, const CreationSet& omega, Fixed t_end,
                  const std::vector<Fixed>& snapshot_times);

/// Exact h(x, y, t) by replaying row y from the latest snapshot at or before t.
std::int64_t height_at(const Trajectory& traj, Fixed x, std::int64_t y, Fixed t);
inline std::int64_t height_at(const Trajectory& traj, double x, std::int64_t y, double t) {
  return height_at(traj, Fixed::from_double(x), y, Fixed::grid(t));
}

/// Effective creations of row y with time in (0, t].
std::vector<Creation> effective_creations(const Trajectory& traj, std::int64_t y, Fixed t);

/// (one-shot evolve to t, evolve to s then restart with the shifted creations).
std::pair<HeightField, HeightField> run_markov_split(const HeightField& initial, const CreationSet& omega, double s,
                                                     double t);

void write_events_ndjson(std::ostream& os, const Trajectory& traj);

}  // namespace gwflow
