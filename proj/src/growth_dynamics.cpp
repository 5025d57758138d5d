#include "gwflow/growth_dynamics.hpp"

#include <algorithm>
#include <cstdio>
#include <ostream>
#include <stdexcept>

#include "gwflow/rng.hpp"

namespace gwflow {

namespace {

std::int64_t ceil_div2(std::int64_t v) { return -floor_div(-v, 2); }

struct Extent {
  Fixed lo, hi;
  std::int64_t y0, y1;
  bool torus;
};

Extent extent_of(const Domain& d) {
  if (const auto* t = std::get_if<TorusDomain>(&d)) return {-t->M, t->M, -t->N, t->N - 1, true};
  const auto& w = std::get<WindowDomain>(d);
  return {w.a, w.b, w.c, w.d, false};
}

}  // namespace

// ---------------------------------------------------------------- creations

CreationSet sample_creations(std::uint64_t seed, const Domain& domain, Fixed t0, Fixed t1) {
  CreationSet out;
  out.domain = domain;
  out.seed = seed;
  out.t_start = t0;
  out.horizon = t1;
  const Extent e = extent_of(domain);
  const double width = (e.hi - e.lo).to_double();
  if (!(width > 0.0)) throw std::invalid_argument("sample_creations: zero-length domain");
  if (!(t0 < t1)) return out;
  const double rate = out.intensity * width;
  const double lo = e.lo.to_double();
  const double hi = e.hi.to_double();
  const double T0 = t0.to_double();
  const double T1 = t1.to_double();
  for (std::int64_t y = e.y0; y <= e.y1; ++y) {
    Rng rng(row_seed(seed, y));
    double t = T0 + rng.exponential(rate);
    while (t <= T1) {
      Fixed x = Fixed::grid(rng.uniform(lo, hi));
      if (e.torus && x >= e.hi) x -= (e.hi - e.lo);
      const Fixed tf = Fixed::grid(t);
      if (tf > t0 && tf <= t1) out.points.push_back({x, y, tf, CreationStatus::Pending});
      t += rng.exponential(rate);
    }
  }
  std::sort(out.points.begin(), out.points.end(), creation_before);
  return out;
}

CreationSet sample_creations(std::uint64_t seed, const Domain& domain, double T) {
  if (T < 0.0) throw std::invalid_argument("sample_creations: negative horizon");
  return sample_creations(seed, domain, Fixed{}, Fixed::grid(T));
}

CreationSet periodize(const CreationSet& omega, Fixed M, std::int64_t N) {
  CreationSet out = omega;
  out.domain = TorusDomain{M, N};
  const Fixed P = 2 * M;
  for (auto& c : out.points) {
    c.x = c.x - lap_index(c.x, -M, P) * P;
    c.y = c.y - floor_div(c.y + N, 2 * N) * (2 * N);
  }
  std::sort(out.points.begin(), out.points.end(), creation_before);
  return out;
}

CreationSet time_shift(const CreationSet& omega, Fixed s) {
  CreationSet out;
  out.domain = omega.domain;
  out.seed = omega.seed;
  out.intensity = omega.intensity;
  out.t_start = Fixed{};
  out.horizon = omega.horizon - s;
  for (const auto& c : omega.points) {
    if (c.t > s) out.points.push_back({c.x, c.y, c.t - s, CreationStatus::Pending});
  }
  return out;
}

// ---------------------------------------------------------------- simulator

Simulator::Simulator(const HeightField& initial, Fixed t0) : now_(t0) { load(initial, std::nullopt); }

Simulator::Simulator(const HeightField& initial, Fixed t0, std::int64_t only_row) : now_(t0) {
  load(initial, only_row);
}

void Simulator::load(const HeightField& initial, std::optional<std::int64_t> only_row) {
  domain_ = initial.domain;
  torus_ = initial.torus();
  if (torus_) P_ = initial.period().ticks();
  p_ = initial.p;
  q_ = initial.q;
  y_min_ = initial.y_min();
  rows_.assign(initial.rows.size(), SimRow{});
  const Fixed ref = initial.x_ref();
  for (std::int64_t y = initial.y_min(); y <= initial.y_max(); ++y) {
    if (only_row && *only_row != y) continue;
    const Row& src = initial.row(y);
    SimRow& dst = rows_[static_cast<std::size_t>(y - y_min_)];
    std::int64_t h = src.anchor;
    for (const auto& s : src.steps) {
      if (s.x == ref && s.type == StepType::Antikink) --h;
    }
    dst.flat = h;
    dst.steps.reserve(src.steps.size() + 16);
    for (const auto& s : src.steps) {
      h += step_sign(s.type);
      const std::int64_t c = s.type == StepType::Kink ? s.x.ticks() - now_.ticks() : s.x.ticks() + now_.ticks();
      dst.steps.push_back({c, h, next_id_++, s.type});
    }
  }
  for (std::size_t r = 0; r < rows_.size(); ++r) {
    const auto& st = rows_[r].steps;
    const std::size_t k = st.size();
    for (std::size_t i = 0; i < k; ++i) {
      const std::size_t j = i + 1 < k ? i + 1 : 0;
      if (!torus_ && i + 1 >= k) break;
      if (st[i].type == StepType::Kink && st[j].type == StepType::Antikink) {
        schedule(static_cast<std::int64_t>(r), i, j);
      }
    }
  }
}

std::int64_t Simulator::row_index(std::int64_t y, std::int64_t* lift) const {
  const auto rows = static_cast<std::int64_t>(rows_.size());
  if (torus_) {
    const std::int64_t k = floor_div(y - y_min_, rows);
    if (lift) *lift = -q_ * k;
    return y - y_min_ - k * rows;
  }
  if (y < y_min_ || y >= y_min_ + rows) throw std::out_of_range("row outside window");
  if (lift) *lift = 0;
  return y - y_min_;
}

Simulator::Locate Simulator::locate(const SimRow& row, std::int64_t x) const {
  Locate loc{0, -1, x};
  const auto& st = row.steps;
  if (st.empty()) return loc;
  if (torus_) {
    loc.lap = floor_div(x - pos(st.front()), P_);
    loc.xr = x - loc.lap * P_;
  }
  const std::int64_t xr = loc.xr;
  const auto it = std::partition_point(st.begin(), st.end(), [&](const SimStep& s) {
    const std::int64_t ps = pos(s);
    return ps < xr || (ps == xr && s.type == StepType::Antikink);
  });
  loc.i = (it - st.begin()) - 1;
  return loc;
}

std::int64_t Simulator::row_height(const SimRow& row, std::int64_t x) const {
  const auto& st = row.steps;
  if (st.empty()) return row.flat;
  const Locate loc = locate(row, x);
  if (!torus_) return loc.i >= 0 ? st[static_cast<std::size_t>(loc.i)].h_right : row.flat;
  const std::int64_t base = loc.i >= 0 ? st[static_cast<std::size_t>(loc.i)].h_right : st.back().h_right - p_;
  return base + loc.lap * p_;
}

bool Simulator::has_step_at(const SimRow& row, const Locate& loc) const {
  const auto& st = row.steps;
  if (loc.i >= 0 && pos(st[static_cast<std::size_t>(loc.i)]) == loc.xr) return true;
  const auto next = static_cast<std::size_t>(loc.i + 1);
  return next < st.size() && pos(st[next]) == loc.xr;
}

std::int64_t Simulator::height(Fixed x, std::int64_t y) const {
  std::int64_t lift = 0;
  const std::int64_t r = row_index(y, &lift);
  return row_height(rows_[static_cast<std::size_t>(r)], x.ticks()) + lift;
}

void Simulator::schedule(std::int64_t r, std::size_t left, std::size_t right) {
  const auto& st = rows_[static_cast<std::size_t>(r)].steps;
  const SimStep& k = st[left];
  const SimStep& a = st[right];
  const std::int64_t lap = right <= left ? 1 : 0;
  const std::int64_t tc = ceil_div2(a.c + lap * P_ - k.c);
  heap_.push({tc, r, k.c, k.id, a.id});
}

void Simulator::run_collisions(std::int64_t t) {
  while (!heap_.empty() && heap_.top().t <= t) {
    const Collision ev = heap_.top();
    heap_.pop();
    SimRow& row = rows_[static_cast<std::size_t>(ev.row)];
    auto& st = row.steps;
    const std::size_t k = st.size();
    // The kink sits at kink_c + t; only the colliding pair can be out of order.
    const std::int64_t xk = ev.kink_c + ev.t;
    const std::int64_t now = now_.ticks();
    now_ = Fixed::from_ticks(ev.t);
    auto it = std::partition_point(st.begin(), st.end(), [&](const SimStep& s) { return pos(s) < xk - 2; });
    std::size_t l = k;
    for (; it != st.end() && pos(*it) <= xk + 2; ++it) {
      if (it->id == ev.kink) {
        l = static_cast<std::size_t>(it - st.begin());
        break;
      }
    }
    now_ = Fixed::from_ticks(now);
    if (l == k) continue;
    std::size_t r = l + 1;
    if (r == k) {
      if (!torus_) continue;
      r = 0;
    }
    if (st[r].id != ev.anti || r == l) continue;

    now_ = Fixed::from_ticks(std::max(now_.ticks(), ev.t));
    ++counters_.annihilations;
    if (log_annihilations_) {
      std::int64_t x = pos(st[l]);
      if (torus_) {
        const std::int64_t M = P_ / 2;
        x -= floor_div(x + M, P_) * P_;
      }
      annihilations_.push_back({Fixed::from_ticks(x), ev.row + y_min_, now_});
    }
    if (torus_) row.flat = st[r].h_right;
    if (r == l + 1) {
      st.erase(st.begin() + static_cast<std::ptrdiff_t>(l), st.begin() + static_cast<std::ptrdiff_t>(l + 2));
    } else {
      st.pop_back();
      st.erase(st.begin());
      l = st.size();  // the pair straddled the seam
    }
    const std::size_t n = st.size();
    if (n == 0) continue;
    std::size_t pred, succ;
    if (torus_) {
      pred = (l + n - 1) % n;
      succ = l % n;
    } else {
      if (l == 0 || l >= n) continue;
      pred = l - 1;
      succ = l;
    }
    if (st[pred].type == StepType::Kink && st[succ].type == StepType::Antikink) schedule(ev.row, pred, succ);
  }
}

void Simulator::insert_pair(std::int64_t r, Fixed x) {
  SimRow& row = rows_[static_cast<std::size_t>(r)];
  auto& st = row.steps;
  const Locate loc = locate(row, x.ticks());
  std::int64_t H;
  if (loc.i >= 0) {
    H = st[static_cast<std::size_t>(loc.i)].h_right;
  } else if (torus_ && !st.empty()) {
    H = st.back().h_right - p_;
  } else {
    H = row.flat;
  }
  const std::int64_t t = now_.ticks();
  const auto at = static_cast<std::size_t>(loc.i + 1);
  const SimStep a{loc.xr + t, H + 1, next_id_++, StepType::Antikink};
  const SimStep k{loc.xr - t, H, next_id_++, StepType::Kink};
  st.insert(st.begin() + static_cast<std::ptrdiff_t>(at), {a, k});
  const std::size_t n = st.size();
  if (torus_) {
    const std::size_t left = (at + n - 1) % n;
    const std::size_t right = (at + 2) % n;
    if (st[left].type == StepType::Kink) schedule(r, left, at);
    if (st[right].type == StepType::Antikink) schedule(r, at + 1, right);
  } else {
    if (at > 0 && st[at - 1].type == StepType::Kink) schedule(r, at - 1, at);
    if (at + 2 < n && st[at + 2].type == StepType::Antikink) schedule(r, at + 1, at + 2);
  }
}

void Simulator::apply_creation(Creation& c) {
  ++counters_.creations;
  std::int64_t lift_down = 0, lift_up = 0;
  const std::int64_t r = row_index(c.y, nullptr);
  if (!torus_ && (c.y == y_min_ || c.y == y_min_ + static_cast<std::int64_t>(rows_.size()) - 1)) {
    ++counters_.boundary_dropped;
    c.status = CreationStatus::Rejected;
    return;
  }
  const SimRow& row = rows_[static_cast<std::size_t>(r)];
  const std::int64_t x = c.x.ticks();
  const std::int64_t h = row_height(row, x);
  const std::int64_t rd = row_index(c.y - 1, &lift_down);
  if (row_height(rows_[static_cast<std::size_t>(rd)], x) + lift_down - h != 1) {
    c.status = CreationStatus::Rejected;
    return;
  }
  const std::int64_t ru = row_index(c.y + 1, &lift_up);
  if (h - (row_height(rows_[static_cast<std::size_t>(ru)], x) + lift_up) != 0) {
    c.status = CreationStatus::Rejected;
    return;
  }
  if (!row.steps.empty() && has_step_at(row, locate(row, x))) {
    c.status = CreationStatus::Rejected;
    return;
  }
  c.status = CreationStatus::Effective;
  ++counters_.effective;
  insert_pair(r, c.x);
}

void Simulator::advance(Fixed t, std::span<Creation> batch) {
  if (t < now_) throw std::invalid_argument("Simulator::advance: time goes backwards");
  for (auto& c : batch) {
    if (c.t < now_) throw std::invalid_argument("Simulator::advance: creation in the past");
    if (c.t > t) throw std::invalid_argument("Simulator::advance: creation beyond target time");
    run_collisions(c.t.ticks());
    now_ = c.t;
    apply_creation(c);
  }
  run_collisions(t.ticks());
  now_ = t;
}

void Simulator::replay(Fixed t, std::span<const Creation> effective) {
  if (t < now_) throw std::invalid_argument("Simulator::replay: time goes backwards");
  for (const auto& c : effective) {
    if (c.t < now_ || c.t > t) throw std::invalid_argument("Simulator::replay: creation outside the interval");
    run_collisions(c.t.ticks());
    now_ = c.t;
    insert_pair(row_index(c.y, nullptr), c.x);
  }
  run_collisions(t.ticks());
  now_ = t;
}

HeightField Simulator::snapshot() const {
  HeightField f;
  f.domain = domain_;
  f.p = p_;
  f.q = q_;
  f.rows.resize(rows_.size());
  const Extent e = extent_of(domain_);
  for (std::size_t r = 0; r < rows_.size(); ++r) {
    const SimRow& row = rows_[r];
    Row& out = f.rows[r];
    if (row.steps.empty()) {
      out.anchor = row.flat;
      continue;
    }
    if (torus_) {
      std::vector<Step> steps;
      steps.reserve(row.steps.size());
      for (const auto& s : row.steps) steps.push_back({Fixed::from_ticks(pos(s)), s.type});
      if (steps.back().x.ticks() >= steps.front().x.ticks() + P_) {
        throw std::logic_error("snapshot: row spans more than one period");
      }
      out = rotate_row(steps, row.steps.back().h_right - p_, e.lo, Fixed::from_ticks(P_), p_);
    } else {
      std::int64_t left = row.flat;
      for (const auto& s : row.steps) {
        const Fixed x = Fixed::from_ticks(pos(s));
        if (x < e.lo) {
          left = s.h_right;
        } else if (x <= e.hi) {
          out.steps.push_back({x, s.type});
        }
      }
      out.anchor = left;
      for (const auto& s : out.steps) {
        if (s.x == e.lo && s.type == StepType::Antikink) ++out.anchor;
      }
    }
  }
  return f;
}

std::pair<std::int64_t, std::int64_t> Simulator::count_steps(Fixed x0, Fixed x1, std::int64_t y0,
                                                             std::int64_t y1) const {
  std::int64_t kinks = 0, antikinks = 0;
  const std::int64_t a = x0.ticks();
  const std::int64_t b = x1.ticks();
  for (std::int64_t y = y0; y <= y1; ++y) {
    const SimRow& row = rows_[static_cast<std::size_t>(row_index(y, nullptr))];
    for (const auto& s : row.steps) {
      const std::int64_t x = pos(s);
      std::int64_t n;
      if (torus_) {
        n = -floor_div(-(b - x), P_) + floor_div(-(a - x), P_);  // ceil((b-x)/P) - ceil((a-x)/P)
      } else {
        n = (x >= a && x < b) ? 1 : 0;
      }
      (s.type == StepType::Kink ? kinks : antikinks) += n;
    }
  }
  return {kinks, antikinks};
}

// ---------------------------------------------------------------- trajectories

Trajectory evolve(const HeightField& initial, const CreationSet& omega, Fixed t_end,
                  const std::vector<Fixed>& snapshot_times) {
  const auto rep = validate(initial);
  if (!rep.ok()) throw std::invalid_argument("evolve: invalid initial field\n" + rep.summary());
  if (!(omega.domain == initial.domain)) throw std::invalid_argument("evolve: creation domain differs from field");
  if (omega.horizon < t_end || omega.t_start > Fixed{}) {
    throw std::invalid_argument("evolve: creations do not cover [0, t_end]");
  }
  if (t_end < Fixed{}) throw std::invalid_argument("evolve: negative t_end");

  Trajectory traj;
  traj.initial = initial;
  traj.t_end = t_end;
  traj.creations = omega;
  for (auto& c : traj.creations.points) c.status = CreationStatus::Pending;

  std::vector<Fixed> times;
  for (Fixed s : snapshot_times) {
    if (s < Fixed{} || s > t_end) throw std::invalid_argument("evolve: snapshot time outside [0, t_end]");
    times.push_back(s);
  }
  times.push_back(Fixed{});
  times.push_back(t_end);
  std::sort(times.begin(), times.end());
  times.erase(std::unique(times.begin(), times.end()), times.end());

  Simulator sim(initial, Fixed{});
  sim.set_log_annihilations(true);
  auto& pts = traj.creations.points;
  std::size_t next = 0;
  while (next < pts.size() && pts[next].t <= Fixed{}) ++next;
  for (Fixed s : times) {
    std::size_t end = next;
    while (end < pts.size() && pts[end].t <= s) ++end;
    sim.advance(s, std::span<Creation>(pts.data() + next, end - next));
    next = end;
    traj.snapshots.push_back({s, sim.snapshot()});
  }
  traj.annihilations = sim.annihilations();
  std::sort(traj.annihilations.begin(), traj.annihilations.end(), [](const Annihilation& a, const Annihilation& b) {
    if (a.t != b.t) return a.t < b.t;
    if (a.y != b.y) return a.y < b.y;
    return a.x < b.x;
  });
  return traj;
}

Trajectory evolve(const HeightField& initial, const CreationSet& omega, double t_end,
                  const std::vector<double>& snapshot_times) {
  std::vector<Fixed> times;
  for (double s : snapshot_times) times.push_back(Fixed::grid(s));
  return evolve(initial, omega, Fixed::grid(t_end), times);
}

std::vector<Creation> effective_creations(const Trajectory& traj, std::int64_t y, Fixed t) {
  std::vector<Creation> out;
  for (const auto& c : traj.creations.points) {
    if (c.t > t) break;
    if (c.y == y && c.status == CreationStatus::Effective) out.push_back(c);
  }
  return out;
}

std::int64_t height_at(const Trajectory& traj, Fixed x, std::int64_t y, Fixed t) {
  if (t < Fixed{} || t > traj.t_end) throw std::out_of_range("height_at: time outside the trajectory");
  const Snapshot* base = &traj.snapshots.front();
  for (const auto& s : traj.snapshots) {
    if (s.t <= t) base = &s;
  }
  const HeightField& f = base->field;
  std::int64_t lift = 0;
  std::int64_t yr = y;
  if (f.torus()) {
    const std::int64_t rows = f.row_count();
    const std::int64_t k = floor_div(y - f.y_min(), rows);
    lift = -f.q * k;
    yr = y - k * rows;
  } else {
    const auto& w = std::get<WindowDomain>(f.domain);
    if (y < w.c || y > w.d || x < w.a || x > w.b) throw std::out_of_range("height_at: point outside window");
  }
  if (base->t == t) return eval_height(f, x, yr) + lift;
  std::vector<Creation> eff;
  for (const auto& c : traj.creations.points) {
    if (c.t > t) break;
    if (c.t > base->t && c.y == yr && c.status == CreationStatus::Effective) eff.push_back(c);
  }
  Simulator sim(f, base->t, yr);
  sim.replay(t, eff);
  return sim.height(x, yr) + lift;
}

std::pair<HeightField, HeightField> run_markov_split(const HeightField& initial, const CreationSet& omega, double s,
                                                     double t) {
  const Fixed S = Fixed::grid(s);
  const Fixed T = Fixed::grid(t);
  if (S < Fixed{} || T < S) throw std::invalid_argument("run_markov_split: need 0 <= s <= t");
  const Trajectory one = evolve(initial, omega, T, {});
  const Trajectory first = evolve(initial, omega, S, {});
  const Trajectory second = evolve(first.snapshots.back().field, time_shift(omega, S), T - S, {});
  return {one.snapshots.back().field, second.snapshots.back().field};
}

void write_events_ndjson(std::ostream& os, const Trajectory& traj) {
  struct Line {
    Fixed t;
    std::int64_t y;
    Fixed x;
    int kind;  // 0 creation, 1 annihilation
    bool effective;
  };
  std::vector<Line> lines;
  for (const auto& c : traj.creations.points) {
    if (c.status != CreationStatus::Pending) lines.push_back({c.t, c.y, c.x, 0, c.status == CreationStatus::Effective});
  }
  for (const auto& a : traj.annihilations) lines.push_back({a.t, a.y, a.x, 1, false});
  std::stable_sort(lines.begin(), lines.end(), [](const Line& a, const Line& b) {
    if (a.t != b.t) return a.t < b.t;
    if (a.y != b.y) return a.y < b.y;
    if (a.x != b.x) return a.x < b.x;
    return a.kind < b.kind;
  });
  char buf[256];
  for (const auto& l : lines) {
    if (l.kind == 0) {
      std::snprintf(buf, sizeof buf, "{\"t\":%.17g,\"kind\":\"creation\",\"x\":%.17g,\"y\":%lld,\"effective\":%s}\n",
                    l.t.to_double(), l.x.to_double(), static_cast<long long>(l.y), l.effective ? "true" : "false");
    } else {
      std::snprintf(buf, sizeof buf, "{\"t\":%.17g,\"kind\":\"annihilation\",\"x\":%.17g,\"y\":%lld}\n",
                    l.t.to_double(), l.x.to_double(), static_cast<long long>(l.y));
    }
    os << buf;
  }
}

}  // namespace gwflow
