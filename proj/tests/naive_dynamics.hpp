#pragma once

// Straightforward reference dynamics in doubles on a torus. Every value that
// occurs is a dyadic rational well inside double precision, so results are
// exact and comparable with the fixed-point simulator.

#include <algorithm>
#include <cmath>
#include <limits>
#include <vector>

#include "gwflow/growth_dynamics.hpp"

namespace naive {

struct S {
  double x;
  bool kink;
};

struct Line {
  std::vector<S> s;  // sorted in [-M, M)
  long long left;    // height just left of -M
};

class Torus {
 public:
  Torus(const gwflow::HeightField& f) {
    const auto& d = std::get<gwflow::TorusDomain>(f.domain);
    M = d.M.to_double();
    N = d.N;
    p = f.p;
    q = f.q;
    for (const auto& r : f.rows) {
      Line l;
      l.left = r.anchor;
      for (const auto& st : r.steps) {
        if (st.x.to_double() == -M && st.type == gwflow::StepType::Antikink) --l.left;
        l.s.push_back({st.x.to_double(), st.type == gwflow::StepType::Kink});
      }
      lines.push_back(l);
    }
  }

  long long h(double x, long long y) const {
    long long k = static_cast<long long>(std::floor(static_cast<double>(y + N) / (2.0 * N)));
    const long long yr = y - k * 2 * N;
    double lap = std::floor((x + M) / (2 * M));
    const double xr = x - lap * 2 * M;
    const Line& l = lines[static_cast<std::size_t>(yr + N)];
    long long v = l.left;
    for (const auto& s : l.s) {
      if (s.kink ? s.x < xr : s.x <= xr) v += s.kink ? -1 : 1;
    }
    return v + static_cast<long long>(lap) * p - q * k;
  }

  // Earliest collision time from now over all rows, +inf if none.
  double next_collision() const {
    double best = std::numeric_limits<double>::infinity();
    for (const auto& l : lines) {
      const std::size_t n = l.s.size();
      for (std::size_t i = 0; i < n; ++i) {
        const std::size_t j = (i + 1) % n;
        if (!l.s[i].kink || l.s[j].kink) continue;
        double gap = l.s[j].x - l.s[i].x;
        if (j <= i) gap += 2 * M;
        best = std::min(best, gap / 2);
      }
    }
    return best;
  }

  void move(double dt) {
    for (auto& l : lines) {
      // annihilate pairs that meet exactly after dt
      const std::size_t n = l.s.size();
      std::vector<bool> dead(n, false);
      for (std::size_t i = 0; i < n; ++i) {
        const std::size_t j = (i + 1) % n;
        if (!l.s[i].kink || l.s[j].kink || dead[i] || dead[j]) continue;
        double gap = l.s[j].x - l.s[i].x;
        if (j <= i) gap += 2 * M;
        if (gap == 2 * dt) {
          dead[i] = dead[j] = true;
          ++annihilations;
        }
      }
      std::vector<S> keep;
      for (std::size_t i = 0; i < n; ++i) {
        if (dead[i]) {
          // a dead step still crosses the seam before it vanishes
          S s = l.s[i];
          s.x += s.kink ? dt : -dt;
          if (s.x >= M || s.x < -M) ++l.left;
          continue;
        }
        S s = l.s[i];
        s.x += s.kink ? dt : -dt;
        if (s.x >= M) {
          s.x -= 2 * M;
          ++l.left;
        } else if (s.x < -M) {
          s.x += 2 * M;
          ++l.left;
        }
        keep.push_back(s);
      }
      std::sort(keep.begin(), keep.end(), [](const S& a, const S& b) {
        return a.x < b.x || (a.x == b.x && !a.kink && b.kink);
      });
      l.s = keep;
    }
    now += dt;
  }

  void advance_to(double t) {
    for (;;) {
      const double c = next_collision();
      if (now + c > t) break;
      move(c);
    }
    move(t - now);
  }

  bool create(double x, long long y) {
    const long long hy = h(x, y);
    if (h(x, y - 1) - hy != 1 || hy - h(x, y + 1) != 0) return false;
    Line& l = lines[static_cast<std::size_t>(y + N)];
    for (const auto& s : l.s) {
      if (s.x == x) return false;
    }
    l.s.push_back({x, false});
    l.s.push_back({x, true});
    std::sort(l.s.begin(), l.s.end(), [](const S& a, const S& b) {
      return a.x < b.x || (a.x == b.x && !a.kink && b.kink);
    });
    return true;
  }

  double M;
  long long N, p, q;
  double now = 0.0;
  long long annihilations = 0;
  std::vector<Line> lines;
};

}  // namespace naive
