#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include "gwflow/fixed.hpp"
#include "gwflow/profile.hpp"

namespace gwflow {

/// Antikink sorts before Kink at a shared position: an (Antikink, Kink) pair
/// at one x is a spike whose value is the common higher height.
enum class StepType : std::uint8_t { Antikink, Kink };

inline int step_sign(StepType t) { return t == StepType::Antikink ? +1 : -1; }
inline char step_code(StepType t) { return t == StepType::Antikink ? 'A' : 'K'; }

struct Step {
  Fixed x;
  StepType type = StepType::Kink;
  friend bool operator==(const Step&, const Step&) = default;
};

inline bool step_before(const Step& a, const Step& b) {
  return a.x < b.x || (a.x == b.x && a.type < b.type);
}

/// One horizontal line. `anchor` is the height at the reference point (the
/// left domain edge), read upper-semi-continuously.
struct Row {
  std::vector<Step> steps;
  std::int64_t anchor = 0;
  friend bool operator==(const Row&, const Row&) = default;
};

/// [-M, M) x {-N, ..., N-1} with h(x + 2M, y) = h(x, y) + p and
/// h(x, y + 2N) = h(x, y) - q.
struct TorusDomain {
  Fixed M;
  std::int64_t N = 0;
  friend bool operator==(const TorusDomain&, const TorusDomain&) = default;
};

/// [a, b] x {c, ..., d}.
struct WindowDomain {
  Fixed a, b;
  std::int64_t c = 0, d = 0;
  friend bool operator==(const WindowDomain&, const WindowDomain&) = default;
};

using Domain = std::variant<TorusDomain, WindowDomain>;

struct HeightField {
  Domain domain;
  std::int64_t p = 0;  // torus only
  std::int64_t q = 0;  // torus only
  std::vector<Row> rows;

  bool torus() const { return std::holds_alternative<TorusDomain>(domain); }
  std::int64_t y_min() const;
  std::int64_t y_max() const;
  Fixed x_ref() const;
  Fixed period() const;  // torus: 2M
  std::int64_t row_count() const { return y_max() - y_min() + 1; }

  Row& row(std::int64_t y) { return rows[static_cast<std::size_t>(y - y_min())]; }
  const Row& row(std::int64_t y) const { return rows[static_cast<std::size_t>(y - y_min())]; }

  static HeightField flat(const Domain& domain, std::int64_t height = 0);

  /// Adds m to every height.
  HeightField shifted(std::int64_t m) const;

  friend bool operator==(const HeightField&, const HeightField&) = default;
};

/// Fast lookups on one row: prefix heights plus torus lifting.
class RowIndex {
 public:
  RowIndex() = default;
  RowIndex(const Row& row, Fixed x_ref, std::optional<Fixed> period, std::int64_t p);

  std::int64_t height(Fixed x) const;
  std::int64_t left_plateau() const { return left_; }
  /// Steps with position in [lo, hi), lifted across periods on the torus.
  template <class F>
  void for_each_step(Fixed lo, Fixed hi, F&& f) const;

 private:
  std::int64_t height_in_cell(Fixed x) const;
  std::vector<Step> steps_;
  std::vector<std::int64_t> after_;  // height right after step i (exclusive of later steps)
  std::int64_t left_ = 0;
  Fixed x_ref_;
  std::optional<Fixed> period_;
  std::int64_t p_ = 0;
};

template <class F>
void RowIndex::for_each_step(Fixed lo, Fixed hi, F&& f) const {
  if (!period_) {
    for (const auto& s : steps_) {
      if (s.x >= lo && s.x < hi) f(s);
    }
    return;
  }
  if (steps_.empty() || !(lo < hi)) return;
  const std::int64_t first = lap_index(lo, x_ref_, *period_);
  const std::int64_t last = lap_index(hi, x_ref_, *period_);
  for (std::int64_t j = first; j <= last; ++j) {
    const Fixed shift = j * *period_;
    for (const auto& s : steps_) {
      const Fixed x = s.x + shift;
      if (x >= lo && x < hi) f(Step{x, s.type});
    }
  }
}

/// Row lookups for a whole field, including the vertical lift on the torus.
class FieldIndex {
 public:
  explicit FieldIndex(const HeightField& field);
  std::int64_t height(Fixed x, std::int64_t y) const;
  const RowIndex& row(std::int64_t y, std::int64_t* lift) const;
  const HeightField& field() const { return *field_; }

 private:
  const HeightField* field_;
  std::vector<RowIndex> rows_;
};

struct Violation {
  enum class Kind { VerticalGradient, Unsorted, Winding, OutOfDomain, Shape };
  Kind kind;
  std::int64_t y = 0;
  double x = 0.0;
  std::string detail;
};

struct ValidationReport {
  std::vector<Violation> violations;
  bool ok() const { return violations.empty(); }
  std::string summary() const;
};

ValidationReport validate(const HeightField& field);

/// Upper-semi-continuous height. Throws std::out_of_range outside a window.
std::int64_t eval_height(const HeightField& field, Fixed x, std::int64_t y);
inline std::int64_t eval_height(const HeightField& field, double x, std::int64_t y) {
  return eval_height(field, Fixed::from_double(x), y);
}

/// Builds a row from steps sorted on [s, s + period) with height `before`
/// just left of s, re-anchored so that the cell starts at lo.
Row rotate_row(const std::vector<Step>& steps, std::int64_t before, Fixed lo, Fixed period, std::int64_t p);

/// max(a, b) pointwise; both fields need the same domain (and windings on the torus).
HeightField pointwise_max(const HeightField& a, const HeightField& b);

/// Discretization of n f(x/n, y/n) on a microscopic domain.
HeightField discretize(const ContinuousProfile& f, int n, const Domain& domain);

struct RealizedSlope {
  double rho1;
  double rho2;
};

/// Linear field of slope rho on the torus (nM, nN).
HeightField linear_field(double rho1, double rho2, int n, double M, std::int64_t N);
RealizedSlope realized_slope(const HeightField& field);

struct Box {
  double x0, x1;
  std::int64_t y0, y1;
};

struct GradientStats {
  std::int64_t kinks = 0;
  std::int64_t antikinks = 0;
  double occupation = 0.0;
};

/// Steps in [x0, x1) x {y0..y1} by type; occupation is the length-weighted
/// fraction of (x, y) in the box with h(x, y+1) - h(x, y) = -1.
GradientStats gradient_stats(const HeightField& field, const Box& region);

void write_ndjson(std::ostream& os, const HeightField& field);
HeightField read_ndjson(std::istream& is);

}  // namespace gwflow
