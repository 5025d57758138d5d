#include "gwflow/polymer_oracle.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <stdexcept>

#include "gwflow/rng.hpp"

namespace gwflow {

std::size_t longest_light_chain(std::vector<PlanarPoint> pts) {
  // (a, b) = (t - x, t + x): the light order becomes the product order.
  std::vector<std::pair<double, double>> ab;
  ab.reserve(pts.size());
  for (const auto& p : pts) ab.emplace_back(p.t - p.x, p.t + p.x);
  std::sort(ab.begin(), ab.end());
  ab.erase(std::unique(ab.begin(), ab.end()), ab.end());
  std::vector<double> tails;
  for (const auto& [a, b] : ab) {
    const auto it = std::upper_bound(tails.begin(), tails.end(), b);
    if (it == tails.end()) {
      tails.push_back(b);
    } else {
      *it = b;
    }
  }
  return tails.size();
}

LightRectangle::LightRectangle(PlanarPoint bottom, PlanarPoint top) : bottom_(bottom), top_(top) {
  if (std::abs(top.x - bottom.x) > top.t - bottom.t) throw std::invalid_argument("light_rectangle: diagonal is not timelike");
}

double LightRectangle::area() const {
  const double dt = top_.t - bottom_.t;
  const double dx = top_.x - bottom_.x;
  return (dt * dt - dx * dx) / 2.0;
}

bool LightRectangle::contains(const PlanarPoint& p) const {
  return std::abs(p.x - top_.x) <= top_.t - p.t && std::abs(p.x - bottom_.x) <= p.t - bottom_.t;
}

PlanarPoint LightRectangle::left() const {
  const double a = ((top_.t - bottom_.t) - (top_.x - bottom_.x)) / 2.0;
  return {bottom_.x - a, bottom_.t + a};
}

PlanarPoint LightRectangle::right() const {
  const double b = ((top_.t - bottom_.t) + (top_.x - bottom_.x)) / 2.0;
  return {bottom_.x + b, bottom_.t + b};
}

LightRectangle light_rectangle(PlanarPoint bottom, PlanarPoint top) { return LightRectangle(bottom, top); }

std::int64_t variational_height(const RowIndex& row, const std::vector<PlanarPoint>& effective, double x, double t) {
  if (t < 0.0) throw std::invalid_argument("variational_height: negative time");
  const double lo = x - t;
  const double hi = x + t;
  std::vector<PlanarPoint> cone;
  for (const auto& p : effective) {
    if (p.t > 0.0 && std::abs(p.x - x) <= t - p.t) cone.push_back(p);
  }
  std::vector<double> zs{lo, hi};
  row.for_each_step(Fixed::from_double(lo), Fixed::from_double(hi) + Fixed::from_ticks(1),
                    [&](const Step& s) { zs.push_back(s.x.to_double()); });
  for (const auto& p : cone) {
    zs.push_back(std::max(lo, p.x - p.t));
    zs.push_back(std::min(hi, p.x + p.t));
  }
  std::sort(zs.begin(), zs.end());
  zs.erase(std::unique(zs.begin(), zs.end()), zs.end());
  const std::size_t n = zs.size();
  for (std::size_t i = 0; i + 1 < n; ++i) zs.push_back(0.5 * (zs[i] + zs[i + 1]));

  std::int64_t best = INT64_MIN;
  std::vector<PlanarPoint> inside;
  for (double z : zs) {
    inside.clear();
    for (const auto& p : cone) {
      if (std::abs(p.x - z) <= p.t) inside.push_back(p);
    }
    const auto v = row.height(Fixed::from_double(z)) + static_cast<std::int64_t>(longest_light_chain(inside));
    best = std::max(best, v);
  }
  return best;
}

std::int64_t variational_height(const Trajectory& traj, double x, std::int64_t y, double t) {
  const HeightField& f = traj.initial;
  const FieldIndex index(f);
  std::int64_t lift = 0;
  const RowIndex& row = index.row(y, &lift);
  std::int64_t yr = y;
  if (f.torus()) {
    const std::int64_t rows = f.row_count();
    yr = y - floor_div(y - f.y_min(), rows) * rows;
  }
  std::vector<PlanarPoint> pts;
  const double P = f.torus() ? f.period().to_double() : 0.0;
  for (const auto& c : traj.creations.points) {
    if (c.t.to_double() > t) break;
    if (c.y != yr || c.status != CreationStatus::Effective) continue;
    const double cx = c.x.to_double();
    const double ct = c.t.to_double();
    if (!f.torus()) {
      pts.push_back({cx, ct});
      continue;
    }
    const double span = t - ct;
    const auto j0 = static_cast<std::int64_t>(std::floor((x - span - cx) / P));
    const auto j1 = static_cast<std::int64_t>(std::ceil((x + span - cx) / P));
    for (std::int64_t j = j0; j <= j1; ++j) pts.push_back({cx + static_cast<double>(j) * P, ct});
  }
  return variational_height(row, pts, x, t) + lift;
}

double chain_tail_bound(double area, int k) {
  if (k <= 0) throw std::invalid_argument("chain_tail_bound: k must be positive");
  if (area < 0.0) throw std::invalid_argument("chain_tail_bound: negative area");
  const double e2 = std::numbers::e * std::numbers::e;
  return std::pow(2.0 * e2 * area / (static_cast<double>(k) * k), k);
}

double corollary_bound(double leb, double v, int k) {
  if (k <= 0) throw std::invalid_argument("corollary_bound: k must be positive");
  const double e2 = std::numbers::e * std::numbers::e;
  return 2.0 * leb * std::pow(4.0 * e2 * v * v / (static_cast<double>(k) * k), k);
}

double SpaceTimeRegion::leb() const {
  if (kind == Kind::Box) return (x1 - x0) * T;
  return 2.0 * R * T + T * T;
}

bool SpaceTimeRegion::contains(const PlanarPoint& p) const {
  if (p.t < 0.0 || p.t > T) return false;
  if (kind == Kind::Box) return p.x >= x0 && p.x <= x1;
  return std::abs(p.x - center) <= R + (T - p.t);
}

double SpaceTimeRegion::xmin() const { return kind == Kind::Box ? x0 : center - R - T; }
double SpaceTimeRegion::xmax() const { return kind == Kind::Box ? x1 : center + R + T; }

bool has_row_chain(const std::vector<std::vector<PlanarPoint>>& rows, const std::vector<std::int64_t>& seq) {
  if (seq.empty()) throw std::invalid_argument("has_row_chain: empty row sequence");
  auto pts_of = [&](std::int64_t y) -> const std::vector<PlanarPoint>& { return rows[static_cast<std::size_t>(y)]; };
  std::vector<PlanarPoint> reach = pts_of(seq[0]);
  for (std::size_t i = 1; i < seq.size() && !reach.empty(); ++i) {
    const bool same_row = seq[i] == seq[i - 1];
    std::vector<PlanarPoint> next;
    for (const auto& q : pts_of(seq[i])) {
      for (const auto& p : reach) {
        if (light_before(p, q) && !(same_row && p == q)) {
          next.push_back(q);
          break;
        }
      }
    }
    reach = std::move(next);
  }
  return !reach.empty();
}

ChainEstimate estimate_chain_probability(const SpaceTimeRegion& region, const std::vector<std::int64_t>& rows,
                                         std::int64_t replicas, std::uint64_t seed) {
  if (rows.empty()) throw std::invalid_argument("estimate_chain_probability: empty row sequence");
  if (replicas <= 0) throw std::invalid_argument("estimate_chain_probability: replicas must be positive");
  for (std::size_t i = 1; i < rows.size(); ++i) {
    if (std::abs(rows[i] - rows[i - 1]) > 1) throw std::invalid_argument("estimate_chain_probability: rows must be adjacent");
  }
  const auto [ymin, ymax] = std::minmax_element(rows.begin(), rows.end());
  std::vector<std::int64_t> local(rows.size());
  for (std::size_t i = 0; i < rows.size(); ++i) local[i] = rows[i] - *ymin;
  const auto nrows = static_cast<std::size_t>(*ymax - *ymin + 1);
  const double w = region.xmax() - region.xmin();
  const double mean = 2.0 * w * region.T;
  std::int64_t hits = 0;
  std::vector<std::vector<PlanarPoint>> pts(nrows);
  for (std::int64_t r = 0; r < replicas; ++r) {
    Rng rng(derive_seed(seed, static_cast<std::uint64_t>(r)));
    for (auto& row : pts) {
      row.clear();
      if (region.T <= 0.0 || w <= 0.0) continue;
      const std::uint64_t n = rng.poisson(mean);
      for (std::uint64_t i = 0; i < n; ++i) {
        const PlanarPoint p{rng.uniform(region.xmin(), region.xmax()), rng.uniform(0.0, region.T)};
        if (region.contains(p)) row.push_back(p);
      }
    }
    if (has_row_chain(pts, local)) ++hits;
  }
  const double p = static_cast<double>(hits) / static_cast<double>(replicas);
  return {p, std::sqrt(std::max(p * (1.0 - p), 0.0) / static_cast<double>(replicas)), hits, replicas};
}

std::vector<double> lis_tail_monte_carlo(double area, int kmax, std::int64_t replicas, std::uint64_t seed) {
  const double side = std::sqrt(2.0 * area);  // (a, b) square of side s has area s^2 / 2
  std::vector<std::int64_t> count(static_cast<std::size_t>(kmax) + 1, 0);
  std::vector<PlanarPoint> pts;
  for (std::int64_t r = 0; r < replicas; ++r) {
    Rng rng(derive_seed(seed, static_cast<std::uint64_t>(r)));
    const std::uint64_t n = rng.poisson(2.0 * area);
    pts.clear();
    for (std::uint64_t i = 0; i < n; ++i) {
      const double a = rng.uniform(0.0, side);
      const double b = rng.uniform(0.0, side);
      pts.push_back({(b - a) / 2.0, (a + b) / 2.0});
    }
    const auto L = static_cast<int>(longest_light_chain(pts));
    for (int k = 1; k <= std::min(L, kmax); ++k) ++count[static_cast<std::size_t>(k)];
  }
  std::vector<double> out(static_cast<std::size_t>(kmax));
  for (int k = 1; k <= kmax; ++k) {
    out[static_cast<std::size_t>(k - 1)] = static_cast<double>(count[static_cast<std::size_t>(k)]) / static_cast<double>(replicas);
  }
  return out;
}

}  // namespace gwflow
