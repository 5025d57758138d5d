#include "gwflow/height_lattice.hpp"

#include <algorithm>
#include <cmath>
#include <istream>
#include <ostream>
#include <sstream>
#include <stdexcept>

#include "json.hpp"

namespace gwflow {

std::int64_t HeightField::y_min() const {
  if (const auto* t = std::get_if<TorusDomain>(&domain)) return -t->N;
  return std::get<WindowDomain>(domain).c;
}

std::int64_t HeightField::y_max() const {
  if (const auto* t = std::get_if<TorusDomain>(&domain)) return t->N - 1;
  return std::get<WindowDomain>(domain).d;
}

Fixed HeightField::x_ref() const {
  if (const auto* t = std::get_if<TorusDomain>(&domain)) return -t->M;
  return std::get<WindowDomain>(domain).a;
}

Fixed HeightField::period() const {
  if (const auto* t = std::get_if<TorusDomain>(&domain)) return 2 * t->M;
  throw std::logic_error("period() on a window domain");
}

HeightField HeightField::flat(const Domain& domain, std::int64_t height) {
  HeightField f;
  f.domain = domain;
  f.rows.assign(static_cast<std::size_t>(f.row_count()), Row{{}, height});
  return f;
}

HeightField HeightField::shifted(std::int64_t m) const {
  HeightField out = *this;
  for (auto& r : out.rows) r.anchor += m;
  return out;
}

// ---------------------------------------------------------------- RowIndex

RowIndex::RowIndex(const Row& row, Fixed x_ref, std::optional<Fixed> period, std::int64_t p)
    : steps_(row.steps), x_ref_(x_ref), period_(period), p_(p) {
  std::int64_t at_ref = 0;
  for (const auto& s : steps_) {
    if (s.x == x_ref && s.type == StepType::Antikink) ++at_ref;
  }
  left_ = row.anchor - at_ref;
  after_.resize(steps_.size());
  std::int64_t h = left_;
  for (std::size_t i = 0; i < steps_.size(); ++i) {
    h += step_sign(steps_[i].type);
    after_[i] = h;
  }
}

std::int64_t RowIndex::height_in_cell(Fixed x) const {
  const auto it = std::partition_point(steps_.begin(), steps_.end(), [x](const Step& s) {
    return s.x < x || (s.x == x && s.type == StepType::Antikink);
  });
  const auto i = static_cast<std::size_t>(it - steps_.begin());
  return i == 0 ? left_ : after_[i - 1];
}

std::int64_t RowIndex::height(Fixed x) const {
  if (!period_) return height_in_cell(x);
  const std::int64_t j = lap_index(x, x_ref_, *period_);
  return height_in_cell(x - j * *period_) + j * p_;
}

FieldIndex::FieldIndex(const HeightField& field) : field_(&field) {
  std::optional<Fixed> period;
  if (field.torus()) period = field.period();
  rows_.reserve(field.rows.size());
  for (const auto& r : field.rows) rows_.emplace_back(r, field.x_ref(), period, field.p);
}

const RowIndex& FieldIndex::row(std::int64_t y, std::int64_t* lift) const {
  const std::int64_t lo = field_->y_min();
  if (field_->torus()) {
    const std::int64_t rows = field_->row_count();
    const std::int64_t k = floor_div(y - lo, rows);
    if (lift) *lift = -field_->q * k;
    return rows_[static_cast<std::size_t>(y - lo - k * rows)];
  }
  if (y < lo || y > field_->y_max()) throw std::out_of_range("row outside window");
  if (lift) *lift = 0;
  return rows_[static_cast<std::size_t>(y - lo)];
}

std::int64_t FieldIndex::height(Fixed x, std::int64_t y) const {
  if (const auto* w = std::get_if<WindowDomain>(&field_->domain)) {
    if (x < w->a || x > w->b) throw std::out_of_range("x outside window");
  }
  std::int64_t lift = 0;
  const RowIndex& r = row(y, &lift);
  return r.height(x) + lift;
}

std::int64_t eval_height(const HeightField& field, Fixed x, std::int64_t y) {
  return FieldIndex(field).height(x, y);
}

// ---------------------------------------------------------------- validate

std::string ValidationReport::summary() const {
  std::ostringstream os;
  for (const auto& v : violations) os << "y=" << v.y << " x=" << v.x << ": " << v.detail << "\n";
  return os.str();
}

namespace {

Fixed midpoint(Fixed a, Fixed b) { return Fixed::from_ticks(a.ticks() + (b.ticks() - a.ticks()) / 2); }

// Sorted distinct breakpoints of two rows within [lo, hi).
std::vector<Fixed> breakpoints(const RowIndex& r1, const RowIndex& r2, Fixed lo, Fixed hi) {
  std::vector<Fixed> pts;
  auto push = [&](const Step& s) { pts.push_back(s.x); };
  r1.for_each_step(lo, hi, push);
  r2.for_each_step(lo, hi, push);
  std::sort(pts.begin(), pts.end());
  pts.erase(std::unique(pts.begin(), pts.end()), pts.end());
  return pts;
}

}  // namespace

ValidationReport validate(const HeightField& field) {
  ValidationReport rep;
  auto add = [&](Violation::Kind k, std::int64_t y, double x, std::string msg) {
    rep.violations.push_back({k, y, x, std::move(msg)});
  };

  Fixed lo, hi;
  if (const auto* t = std::get_if<TorusDomain>(&field.domain)) {
    if (t->M <= Fixed{} || t->N <= 0) {
      add(Violation::Kind::Shape, 0, 0.0, "torus dimensions must be positive");
      return rep;
    }
    lo = -t->M;
    hi = t->M;
  } else {
    const auto& w = std::get<WindowDomain>(field.domain);
    if (w.b < w.a || w.d < w.c) {
      add(Violation::Kind::Shape, 0, 0.0, "empty window");
      return rep;
    }
    lo = w.a;
    hi = w.b;
  }
  if (static_cast<std::int64_t>(field.rows.size()) != field.row_count()) {
    add(Violation::Kind::Shape, 0, 0.0, "row count does not match domain");
    return rep;
  }

  bool rows_ok = true;
  for (std::int64_t y = field.y_min(); y <= field.y_max(); ++y) {
    const Row& r = field.row(y);
    std::int64_t net = 0;
    for (std::size_t i = 0; i < r.steps.size(); ++i) {
      const Step& s = r.steps[i];
      net += step_sign(s.type);
      const bool inside = field.torus() ? (s.x >= lo && s.x < hi) : (s.x >= lo && s.x <= hi);
      if (!inside) {
        add(Violation::Kind::OutOfDomain, y, s.x.to_double(), "step outside the domain");
        rows_ok = false;
      }
      if (i > 0 && !step_before(r.steps[i - 1], s)) {
        add(Violation::Kind::Unsorted, y, s.x.to_double(), "steps not strictly ordered");
        rows_ok = false;
      }
    }
    if (field.torus() && net != field.p) {
      add(Violation::Kind::Winding, y, 0.0,
          "row winding " + std::to_string(net) + " differs from p=" + std::to_string(field.p));
    }
  }
  if (!rows_ok) return rep;

  const FieldIndex index(field);
  const std::int64_t last = field.torus() ? field.y_max() : field.y_max() - 1;
  for (std::int64_t y = field.y_min(); y <= last; ++y) {
    std::int64_t lift0 = 0, lift1 = 0;
    const RowIndex& r0 = index.row(y, &lift0);
    const RowIndex& r1 = index.row(y + 1, &lift1);
    auto check = [&](Fixed x) {
      const std::int64_t d = (r1.height(x) + lift1) - (r0.height(x) + lift0);
      if (d != 0 && d != -1) {
        add(Violation::Kind::VerticalGradient, y, x.to_double(),
            "h(x,y+1)-h(x,y)=" + std::to_string(d));
        return false;
      }
      return true;
    };
    const auto pts = breakpoints(r0, r1, lo, field.torus() ? hi : hi + Fixed::from_ticks(1));
    std::vector<Fixed> probes;
    probes.push_back(lo);
    for (std::size_t i = 0; i < pts.size(); ++i) {
      probes.push_back(pts[i]);
      const Fixed next = i + 1 < pts.size() ? pts[i + 1] : (field.torus() ? pts[0] + (hi - lo) : hi);
      probes.push_back(midpoint(pts[i], next));
    }
    if (!pts.empty()) probes.push_back(midpoint(lo, pts[0]));
    probes.push_back(field.torus() ? midpoint(lo, hi) : hi);
    for (Fixed x : probes) {
      if (!check(x)) break;
    }
  }
  return rep;
}

// ---------------------------------------------------------------- rotate

Row rotate_row(const std::vector<Step>& steps, std::int64_t before, Fixed lo, Fixed period, std::int64_t p) {
  if (steps.empty()) return Row{{}, before};
  const Fixed s = steps.front().x;
  const std::int64_t j = lap_index(lo, s, period);
  const Fixed split = lo - j * period;
  std::int64_t left = before;
  std::vector<Step> head, tail;
  for (const auto& st : steps) {
    if (st.x < split) {
      left += step_sign(st.type);
      tail.push_back({st.x + (j + 1) * period, st.type});
    } else {
      head.push_back({st.x + j * period, st.type});
    }
  }
  Row out;
  out.steps = std::move(head);
  out.steps.insert(out.steps.end(), tail.begin(), tail.end());
  left += j * p;
  out.anchor = left;
  for (const auto& st : out.steps) {
    if (st.x == lo && st.type == StepType::Antikink) ++out.anchor;
  }
  return out;
}

// ---------------------------------------------------------------- discretize

namespace {

constexpr double kTraceTol = 1e-12;
constexpr long kTraceCap = 50'000'000;
constexpr double kMinStep = 1e-6;

struct Crossing {
  double x;
  int dir;  // +1 reached hi, -1 reached lo
};

// g restricted to one row, in microscopic coordinates; `mirror` evaluates g(-x).
struct RowFunction {
  const ContinuousProfile* f;
  int n;
  double y;
  bool mirror;
  std::optional<ContinuousProfile::RowLines> lines;
  double lipschitz;

  double operator()(double x) const {
    const double xx = mirror ? -x : x;
    return n * (*f)(xx / n, y / n);
  }
};

RowFunction make_row_function(const ContinuousProfile& f, int n, std::int64_t y, bool mirror) {
  RowFunction g{&f, n, static_cast<double>(y), mirror, f.lines_at(static_cast<double>(y) / n), f.lipschitz_x()};
  if (g.lines) {
    for (auto& l : g.lines->lines) {
      l.intercept *= n;
      if (mirror) l.slope = -l.slope;
    }
  }
  return g;
}

// First x >= s where a single line reaches >= hi (up) or <= lo (down).
std::optional<double> line_first(const ContinuousProfile::Line& l, double s, double level, bool up) {
  const double v = l.slope * s + l.intercept;
  if (up ? v >= level : v <= level) return s;
  if (up ? l.slope > 0 : l.slope < 0) return (level - l.intercept) / l.slope;
  return std::nullopt;
}

// First x >= s where every line satisfies the condition.
std::optional<double> lines_all_first(const std::vector<ContinuousProfile::Line>& lines, double s, double level,
                                      bool up) {
  double lower = s;
  double upper = INFINITY;
  for (const auto& l : lines) {
    // up: slope*x + b >= level ; down: slope*x + b <= level
    const double sl = up ? l.slope : -l.slope;
    const double rhs = up ? level - l.intercept : l.intercept - level;  // sl * x >= rhs
    if (sl == 0.0) {
      if (0.0 < rhs) return std::nullopt;
    } else if (sl > 0) {
      lower = std::max(lower, rhs / sl);
    } else {
      upper = std::min(upper, rhs / sl);
    }
  }
  if (lower <= upper) return lower;
  return std::nullopt;
}

std::optional<double> lines_any_first(const std::vector<ContinuousProfile::Line>& lines, double s, double level,
                                      bool up) {
  std::optional<double> best;
  for (const auto& l : lines) {
    if (auto x = line_first(l, s, level, up)) best = best ? std::min(*best, *x) : *x;
  }
  return best;
}

std::optional<Crossing> first_crossing(const RowFunction& g, double s, double lo, double hi, double limit) {
  if (g.lines) {
    using Combine = PiecewiseLinearProfile::Combine;
    const bool is_max = g.lines->combine == Combine::Max;
    const auto& ls = g.lines->lines;
    std::optional<double> up = is_max ? lines_any_first(ls, s, hi, true) : lines_all_first(ls, s, hi, true);
    std::optional<double> down = is_max ? lines_all_first(ls, s, lo, false) : lines_any_first(ls, s, lo, false);
    std::optional<Crossing> c;
    if (up && *up <= limit) c = Crossing{*up, +1};
    if (down && *down <= limit && (!c || *down < c->x)) c = Crossing{*down, -1};
    return c;
  }
  if (g.lipschitz <= 0.0) {
    const double v = g(s);
    if (v >= hi) return Crossing{s, +1};
    if (v <= lo) return Crossing{s, -1};
    return std::nullopt;
  }
  double x = s;
  for (long it = 0; it < kTraceCap; ++it) {
    const double v = g(x);
    const double gap_up = hi - v;
    const double gap_down = v - lo;
    if (gap_up <= kTraceTol) return Crossing{x, +1};
    if (gap_down <= kTraceTol) return Crossing{x, -1};
    const double step = std::min(gap_up, gap_down) / g.lipschitz;
    if (step >= kMinStep) {
      x += step;
      if (x > limit) return std::nullopt;
      continue;
    }
    // Near-tangent approach: fixed step, then bisect if a level was passed.
    const double xn = x + kMinStep;
    const double vn = g(xn);
    if (vn >= hi || vn <= lo) {
      const int dir = vn >= hi ? +1 : -1;
      double a = x, b = xn;
      while (b - a > kTraceTol) {
        const double m = 0.5 * (a + b);
        if (m <= a || m >= b) break;
        const double vm = g(m);
        if ((dir > 0 && vm >= hi) || (dir < 0 && vm <= lo)) {
          b = m;
        } else {
          a = m;
        }
      }
      if (b > limit) return std::nullopt;
      return Crossing{b, dir};
    }
    x = xn;
    if (x > limit) return std::nullopt;
  }
  throw std::runtime_error("discretize: crossing search did not converge");
}

struct Sweep {
  std::vector<std::pair<double, std::int64_t>> points;  // (X_i, value on [X_i, X_{i+1}))
};

// Inductive construction forward from s with integer reference value phi.
Sweep sweep(const RowFunction& g, double s, std::int64_t phi, double limit) {
  Sweep out;
  out.points.emplace_back(s, phi);
  double x = s;
  for (;;) {
    const auto c = first_crossing(g, x, static_cast<double>(phi - 1), static_cast<double>(phi + 1), limit);
    if (!c) break;
    phi += c->dir;
    x = c->x;
    out.points.emplace_back(x, phi);
  }
  return out;
}

StepType type_of(std::int64_t left, std::int64_t right) {
  if (right == left + 1) return StepType::Antikink;
  if (right == left - 1) return StepType::Kink;
  throw std::runtime_error("discretize: non-unit jump");
}

Row window_row(const ContinuousProfile& f, int n, std::int64_t y, Fixed a, Fixed b) {
  const RowFunction fwd = make_row_function(f, n, y, false);
  const RowFunction bwd = make_row_function(f, n, y, true);
  const auto phi0 = static_cast<std::int64_t>(std::floor(fwd(0.0) + kTraceTol));
  const double right_end = std::max(b.to_double(), 0.0);
  const double left_end = std::max(-a.to_double(), 0.0);
  const Sweep right = sweep(fwd, 0.0, phi0, right_end);
  const Sweep left = sweep(bwd, 0.0, phi0, left_end);

  std::vector<Step> steps;
  std::int64_t left_value = left.points.back().second;
  for (std::size_t i = left.points.size() - 1; i >= 1; --i) {
    const Fixed x = Fixed::grid(-left.points[i].first);
    steps.push_back({x, type_of(left.points[i].second, left.points[i - 1].second)});
  }
  for (std::size_t i = 1; i < right.points.size(); ++i) {
    const Fixed x = Fixed::grid(right.points[i].first);
    steps.push_back({x, type_of(right.points[i - 1].second, right.points[i].second)});
  }
  Row row;
  for (const auto& s : steps) {
    if (s.x < a) {
      left_value += step_sign(s.type);
    } else if (s.x <= b) {
      row.steps.push_back(s);
    }
  }
  std::sort(row.steps.begin(), row.steps.end(), step_before);
  row.anchor = left_value;
  for (const auto& s : row.steps) {
    if (s.x == a && s.type == StepType::Antikink) ++row.anchor;
  }
  return row;
}

Row torus_row(const ContinuousProfile& f, int n, std::int64_t y, Fixed M, std::int64_t p) {
  const RowFunction g = make_row_function(f, n, y, false);
  const Fixed period = 2 * M;
  const double P = period.to_double();
  const double g0 = g(0.0);
  const auto fl = static_cast<std::int64_t>(std::floor(g0));
  const auto start = first_crossing(g, 0.0, static_cast<double>(fl), static_cast<double>(fl + 1), P);
  if (!start) {
    if (p != 0) throw std::runtime_error("discretize: row never meets an integer but p != 0");
    return Row{{}, fl};
  }
  const Fixed x0 = Fixed::grid(start->x);
  const std::int64_t phi0 = start->dir > 0 ? fl + 1 : fl;
  const Fixed end = x0 + period;
  const Sweep sw = sweep(g, start->x, phi0, start->x + P);

  std::vector<Step> steps;
  std::int64_t last = phi0;
  for (std::size_t i = 1; i < sw.points.size(); ++i) {
    const Fixed x = Fixed::grid(sw.points[i].first);
    if (x >= end) break;
    steps.push_back({x, type_of(last, sw.points[i].second)});
    last = sw.points[i].second;
  }
  const std::int64_t before = last - p;
  if (before != phi0) steps.insert(steps.begin(), Step{x0, type_of(before, phi0)});
  std::sort(steps.begin(), steps.end(), step_before);
  if (steps.empty()) return Row{{}, phi0};
  // rotate_row wants the value just left of the first step.
  return rotate_row(steps, before, -M, period, p);
}

}  // namespace

HeightField discretize(const ContinuousProfile& f, int n, const Domain& domain) {
  if (n <= 0) throw std::invalid_argument("discretize: n must be positive");
  HeightField out;
  out.domain = domain;
  if (const auto* t = std::get_if<TorusDomain>(&domain)) {
    const double P = (2 * t->M).to_double();
    const double xs[] = {0.0, 0.5 * P};
    double pr = 0.0;
    for (double x : xs) {
      pr = n * (f((x + P) / n, 0.0) - f(x / n, 0.0));
      if (std::abs(pr - std::round(pr)) > 1e-6) {
        throw std::invalid_argument("discretize: profile is not periodic-compatible with the torus in x");
      }
    }
    out.p = std::llround(pr);
    const double H = 2.0 * static_cast<double>(t->N);
    const double qr = -n * (f(0.0, (H - t->N) / n) - f(0.0, -static_cast<double>(t->N) / n));
    if (std::abs(qr - std::round(qr)) > 1e-6) {
      throw std::invalid_argument("discretize: profile is not periodic-compatible with the torus in y");
    }
    out.q = std::llround(qr);
    for (std::int64_t y = -t->N; y < t->N; ++y) out.rows.push_back(torus_row(f, n, y, t->M, out.p));
  } else {
    const auto& w = std::get<WindowDomain>(domain);
    for (std::int64_t y = w.c; y <= w.d; ++y) out.rows.push_back(window_row(f, n, y, w.a, w.b));
  }
  return out;
}

// ---------------------------------------------------------------- linear field

HeightField pointwise_max(const HeightField& a, const HeightField& b) {
  if (!(a.domain == b.domain)) throw std::invalid_argument("pointwise_max: domains differ");
  if (a.torus() && (a.p != b.p || a.q != b.q)) throw std::invalid_argument("pointwise_max: windings differ");
  const FieldIndex ia(a), ib(b);
  HeightField out = a;
  const Fixed ref = a.x_ref();
  for (std::int64_t y = a.y_min(); y <= a.y_max(); ++y) {
    const auto& ra = a.row(y).steps;
    const auto& rb = b.row(y).steps;
    std::vector<Fixed> xs;
    for (const auto& s : ra) xs.push_back(s.x);
    for (const auto& s : rb) xs.push_back(s.x);
    std::sort(xs.begin(), xs.end());
    xs.erase(std::unique(xs.begin(), xs.end()), xs.end());
    auto counts = [](const std::vector<Step>& steps, Fixed x) {
      std::int64_t up = 0, down = 0;
      auto it = std::lower_bound(steps.begin(), steps.end(), x, [](const Step& s, Fixed v) { return s.x < v; });
      for (; it != steps.end() && it->x == x; ++it) (it->type == StepType::Antikink ? up : down) += 1;
      return std::pair{up, down};
    };
    Row row;
    row.anchor = std::max(ia.height(ref, y), ib.height(ref, y));
    for (Fixed x : xs) {
      const std::int64_t ha = ia.height(x, y), hb = ib.height(x, y);
      const auto [ua, da] = counts(ra, x);
      const auto [ub, db] = counts(rb, x);
      const std::int64_t at = std::max(ha, hb);
      const std::int64_t left = std::max(ha - ua, hb - ub);
      const std::int64_t right = std::max(ha - da, hb - db);
      for (std::int64_t k = left; k < at; ++k) row.steps.push_back({x, StepType::Antikink});
      for (std::int64_t k = right; k < at; ++k) row.steps.push_back({x, StepType::Kink});
    }
    out.row(y) = std::move(row);
  }
  return out;
}

HeightField linear_field(double rho1, double rho2, int n, double M, std::int64_t N) {
  if (n <= 0 || M <= 0.0 || N <= 0) throw std::invalid_argument("linear_field: sizes must be positive");
  if (rho2 < -1.0 || rho2 > 0.0) throw std::invalid_argument("linear_field: rho2 must lie in [-1, 0]");
  const Fixed Mm = Fixed::grid(M * n);
  const std::int64_t Nn = N * n;
  const double width = 2.0 * Mm.to_double();
  const std::int64_t p = std::llround(width * rho1);
  const std::int64_t q = std::llround(-2.0 * static_cast<double>(Nn) * rho2);
  if (std::abs(p / width - rho1) > 1.0 / width || std::abs(-q / (2.0 * Nn) - rho2) > 1.0 / (2.0 * Nn)) {
    throw std::invalid_argument("linear_field: torus too small to realize the slope");
  }

  HeightField out;
  out.domain = TorusDomain{Mm, Nn};
  out.p = p;
  out.q = q;
  // h(x, y) = floor(g), g = p (x + Mm) / W + base(y), base = (-p Nn - q y) / (2 Nn), W = 2 Mm.
  const std::int64_t den = 2 * Nn;
  const std::int64_t ap = std::abs(p);
  const auto W = static_cast<__int128>((2 * Mm).ticks());
  for (std::int64_t y = -Nn; y < Nn; ++y) {
    Row row;
    const std::int64_t num = -p * Nn - q * y;
    row.anchor = floor_div(num, den);
    // Level L is met at offset |L den - num| / (den |p|) * W from -Mm.
    const std::int64_t first = p > 0 ? -floor_div(-num, den) : floor_div(num, den);
    for (std::int64_t i = 0; i < ap; ++i) {
      const std::int64_t L = p > 0 ? first + i : first - i;
      const __int128 gap = p > 0 ? static_cast<__int128>(L) * den - num : num - static_cast<__int128>(L) * den;
      const auto off = static_cast<std::int64_t>(gap * W / (static_cast<__int128>(den) * ap));
      row.steps.push_back({-Mm + Fixed::from_ticks(off - (off & 1)), p > 0 ? StepType::Antikink : StepType::Kink});
    }
    out.rows.push_back(std::move(row));
  }
  return out;
}

RealizedSlope realized_slope(const HeightField& field) {
  const auto& t = std::get<TorusDomain>(field.domain);
  return {static_cast<double>(field.p) / (2 * t.M).to_double(), -static_cast<double>(field.q) / (2.0 * t.N)};
}

// ---------------------------------------------------------------- stats

GradientStats gradient_stats(const HeightField& field, const Box& region) {
  GradientStats st;
  const FieldIndex index(field);
  const Fixed x0 = Fixed::from_double(region.x0);
  const Fixed x1 = Fixed::from_double(region.x1);
  if (!(x0 < x1) || region.y1 < region.y0) return st;
  if (!field.torus()) {
    const auto& w = std::get<WindowDomain>(field.domain);
    if (x0 < w.a || x1 > w.b || region.y0 < w.c || region.y1 > w.d) {
      throw std::out_of_range("gradient_stats: region outside window");
    }
  }
  double occupied = 0.0;
  for (std::int64_t y = region.y0; y <= region.y1; ++y) {
    std::int64_t lift0 = 0;
    const RowIndex& r0 = index.row(y, &lift0);
    r0.for_each_step(x0, x1, [&](const Step& s) { ++(s.type == StepType::Kink ? st.kinks : st.antikinks); });
    if (!field.torus() && y + 1 > field.y_max()) continue;
    std::int64_t lift1 = 0;
    const RowIndex& r1 = index.row(y + 1, &lift1);
    auto pts = breakpoints(r0, r1, x0, x1);
    pts.insert(pts.begin(), x0);
    pts.push_back(x1);
    for (std::size_t i = 0; i + 1 < pts.size(); ++i) {
      if (!(pts[i] < pts[i + 1])) continue;
      const Fixed m = midpoint(pts[i], pts[i + 1]);
      if ((r1.height(m) + lift1) - (r0.height(m) + lift0) == -1) occupied += (pts[i + 1] - pts[i]).to_double();
    }
  }
  st.occupation = occupied / ((x1 - x0).to_double() * static_cast<double>(region.y1 - region.y0 + 1));
  return st;
}

// ---------------------------------------------------------------- NDJSON

void write_ndjson(std::ostream& os, const HeightField& field) {
  nlohmann::json head;
  if (const auto* t = std::get_if<TorusDomain>(&field.domain)) {
    head["domain"] = {{"kind", "torus"}, {"M", t->M.to_double()}, {"N", t->N}};
    head["p"] = field.p;
    head["q"] = field.q;
  } else {
    const auto& w = std::get<WindowDomain>(field.domain);
    head["domain"] = {{"kind", "window"}, {"a", w.a.to_double()}, {"b", w.b.to_double()}, {"c", w.c}, {"d", w.d}};
  }
  os << head.dump() << "\n";
  for (std::int64_t y = field.y_min(); y <= field.y_max(); ++y) {
    const Row& r = field.row(y);
    nlohmann::json line;
    line["y"] = y;
    line["anchor"] = r.anchor;
    auto steps = nlohmann::json::array();
    for (const auto& s : r.steps) steps.push_back({s.x.to_double(), std::string(1, step_code(s.type))});
    line["steps"] = std::move(steps);
    os << line.dump() << "\n";
  }
}

HeightField read_ndjson(std::istream& is) {
  std::string text;
  if (!std::getline(is, text)) throw std::runtime_error("field snapshot: missing header");
  const auto head = nlohmann::json::parse(text);
  HeightField field;
  const auto& d = head.at("domain");
  if (d.at("kind") == "torus") {
    field.domain = TorusDomain{Fixed::from_double(d.at("M").get<double>()), d.at("N").get<std::int64_t>()};
    field.p = head.at("p").get<std::int64_t>();
    field.q = head.at("q").get<std::int64_t>();
  } else {
    field.domain = WindowDomain{Fixed::from_double(d.at("a").get<double>()), Fixed::from_double(d.at("b").get<double>()),
                                d.at("c").get<std::int64_t>(), d.at("d").get<std::int64_t>()};
  }
  field.rows.assign(static_cast<std::size_t>(field.row_count()), Row{});
  for (std::int64_t i = 0; i < field.row_count(); ++i) {
    if (!std::getline(is, text)) throw std::runtime_error("field snapshot: truncated");
    const auto line = nlohmann::json::parse(text);
    const auto y = line.at("y").get<std::int64_t>();
    if (y < field.y_min() || y > field.y_max()) throw std::runtime_error("field snapshot: row outside domain");
    Row& r = field.row(y);
    r.anchor = line.at("anchor").get<std::int64_t>();
    for (const auto& s : line.at("steps")) {
      const auto code = s.at(1).get<std::string>();
      if (code != "A" && code != "K") throw std::runtime_error("field snapshot: bad step type");
      r.steps.push_back({Fixed::from_double(s.at(0).get<double>()), code == "A" ? StepType::Antikink : StepType::Kink});
    }
  }
  return field;
}

}  // namespace gwflow
