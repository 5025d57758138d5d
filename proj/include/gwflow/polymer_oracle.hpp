#pragma once

#include <cstdint>
#include <vector>

#include "gwflow/growth_dynamics.hpp"
#include "gwflow/height_lattice.hpp"

namespace gwflow {

struct PlanarPoint {
  double x;
  double t;
  friend bool operator==(const PlanarPoint&, const PlanarPoint&) = default;
};

/// (x', t') follows (x, t) when t' - t >= |x' - x|.
inline bool light_before(const PlanarPoint& a, const PlanarPoint& b) { return b.t - a.t >= std::abs(b.x - a.x); }

/// Longest chain under the light order, O(n log n).
std::size_t longest_light_chain(std::vector<PlanarPoint> pts);

/// Rectangle with diagonal (z, s) -> (x, t) and sides parallel to t = +-x.
class LightRectangle {
 public:
  LightRectangle(PlanarPoint bottom, PlanarPoint top);
  const PlanarPoint& bottom() const { return bottom_; }
  const PlanarPoint& top() const { return top_; }
  double area() const;
  bool contains(const PlanarPoint& p) const;
  /// Left and right corners.
  PlanarPoint left() const;
  PlanarPoint right() const;

 private:
  PlanarPoint bottom_, top_;
};

LightRectangle light_rectangle(PlanarPoint bottom, PlanarPoint top);

/// sup_z { phi(z) + L(effective in R_{(z,0),(x,t)}) } over the finite candidate set.
/// `row` must read the initial row with torus lifting already applied; the
/// effective points must include any lifted copies that can matter.
std::int64_t variational_height(const RowIndex& row, const std::vector<PlanarPoint>& effective, double x, double t);

/// Same, reading row y of the trajectory's initial field and its effective
/// creations (lifted periodically on the torus).
std::int64_t variational_height(const Trajectory& traj, double x, std::int64_t y, double t);

/// (2 e^2 area / k^2)^k
double chain_tail_bound(double area, int k);
/// 2 leb (4 e^2 v^2 / k^2)^k
double corollary_bound(double leb, double v, int k);

constexpr double kLocalityAlpha = 13.316806913608666;  // sqrt(24) e

/// Space-time region used for chain-probability estimates.
struct SpaceTimeRegion {
  enum class Kind { Box, Trapezoid };
  Kind kind = Kind::Box;
  double x0 = 0.0, x1 = 0.0;  // Box: [x0, x1] x [0, T]
  double center = 0.0, R = 0.0;  // Trapezoid: |u - center| <= R + (T - r), r in [0, T]
  double T = 0.0;

  static SpaceTimeRegion box(double x0, double x1, double T) { return {Kind::Box, x0, x1, 0.0, 0.0, T}; }
  static SpaceTimeRegion trapezoid(double center, double R, double T) {
    return {Kind::Trapezoid, 0.0, 0.0, center, R, T};
  }
  double leb() const;
  double v() const { return T; }
  bool contains(const PlanarPoint& p) const;
  double xmin() const;
  double xmax() const;
};

/// Does a light path collect one point of rows[0], then rows[1], ...?
bool has_row_chain(const std::vector<std::vector<PlanarPoint>>& rows, const std::vector<std::int64_t>& row_sequence);

struct ChainEstimate {
  double probability;
  double std_error;
  std::int64_t hits;
  std::int64_t replicas;
};

ChainEstimate estimate_chain_probability(const SpaceTimeRegion& region, const std::vector<std::int64_t>& rows,
                                         std::int64_t replicas, std::uint64_t seed);

/// Empirical P(L >= k), k = 1..kmax, for intensity-2 points in a light
/// square of the given area.
std::vector<double> lis_tail_monte_carlo(double area, int kmax, std::int64_t replicas, std::uint64_t seed);

}  // namespace gwflow
