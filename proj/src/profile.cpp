#include "gwflow/profile.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>
#include <stdexcept>

namespace gwflow {

namespace {

template <class... Ts>
struct Overloaded : Ts... {
  using Ts::operator()...;
};
template <class... Ts>
Overloaded(Ts...) -> Overloaded<Ts...>;

double eval_affine(const AffineProfile& a, double x, double y) { return a.rho1 * x + a.rho2 * y + a.offset; }

// Index k and reduced y such that y = reduced + k * period, reduced in [-period/2, period/2).
std::pair<double, double> reduce_y(double y, double period) {
  const double k = std::floor((y + 0.5 * period) / period);
  return {k, y - k * period};
}

}  // namespace

ContinuousProfile ContinuousProfile::y_wedge(double slope_below, double slope_above, double period) {
  auto cell = std::make_shared<const ContinuousProfile>(PiecewiseLinearProfile{
      PiecewiseLinearProfile::Combine::Max, {AffineProfile{0.0, slope_below, 0.0}, AffineProfile{0.0, slope_above, 0.0}}});
  return PeriodicYProfile{std::move(cell), period};
}

double ContinuousProfile::operator()(double x, double y) const {
  return std::visit(
      Overloaded{
          [&](const AffineProfile& a) { return eval_affine(a, x, y); },
          [&](const SinusoidProfile& s) {
            return s.rho1 * x + s.rho2 * y + s.amplitude * std::sin(s.kx * x + s.ky * y);
          },
          [&](const PiecewiseLinearProfile& p) {
            if (p.pieces.empty()) throw std::invalid_argument("piecewise-linear profile without pieces");
            double best = eval_affine(p.pieces.front(), x, y);
            for (const auto& piece : p.pieces) {
              const double v = eval_affine(piece, x, y);
              best = p.combine == PiecewiseLinearProfile::Combine::Max ? std::max(best, v) : std::min(best, v);
            }
            return best;
          },
          [&](const PeriodicYProfile& p) {
            const auto [k, reduced] = reduce_y(y, p.period);
            const double drop = (*p.cell)(x, 0.5 * p.period) - (*p.cell)(x, -0.5 * p.period);
            return (*p.cell)(x, reduced) + k * drop;
          },
          [&](const CallableProfile& c) { return c.f(x, y); },
      },
      kind_);
}

double ContinuousProfile::lipschitz_x() const {
  return std::visit(Overloaded{
                        [](const AffineProfile& a) { return std::abs(a.rho1); },
                        [](const SinusoidProfile& s) { return std::abs(s.rho1) + std::abs(s.amplitude * s.kx); },
                        [](const PiecewiseLinearProfile& p) {
                          double l = 0.0;
                          for (const auto& piece : p.pieces) l = std::max(l, std::abs(piece.rho1));
                          return l;
                        },
                        [](const PeriodicYProfile& p) { return p.cell->lipschitz_x(); },
                        [](const CallableProfile& c) { return c.lipschitz_x; },
                    },
                    kind_);
}

bool ContinuousProfile::y_only() const {
  return std::visit(Overloaded{
                        [](const AffineProfile& a) { return a.rho1 == 0.0; },
                        [](const SinusoidProfile& s) { return s.rho1 == 0.0 && (s.amplitude == 0.0 || s.kx == 0.0); },
                        [](const PiecewiseLinearProfile& p) {
                          return std::all_of(p.pieces.begin(), p.pieces.end(),
                                             [](const AffineProfile& a) { return a.rho1 == 0.0; });
                        },
                        [](const PeriodicYProfile& p) { return p.cell->y_only(); },
                        [](const CallableProfile& c) { return c.lipschitz_x == 0.0; },
                    },
                    kind_);
}

std::optional<ContinuousProfile::RowLines> ContinuousProfile::lines_at(double y) const {
  using Combine = PiecewiseLinearProfile::Combine;
  return std::visit(
      Overloaded{
          [&](const AffineProfile& a) -> std::optional<RowLines> {
            return RowLines{Combine::Max, {Line{a.rho1, a.rho2 * y + a.offset}}};
          },
          [&](const SinusoidProfile& s) -> std::optional<RowLines> {
            if (s.amplitude == 0.0 || s.kx == 0.0) {
              return RowLines{Combine::Max,
                              {Line{s.rho1, s.rho2 * y + s.amplitude * std::sin(s.ky * y)}}};
            }
            return std::nullopt;
          },
          [&](const PiecewiseLinearProfile& p) -> std::optional<RowLines> {
            RowLines out{p.combine, {}};
            for (const auto& piece : p.pieces) out.lines.push_back({piece.rho1, piece.rho2 * y + piece.offset});
            return out;
          },
          [&](const PeriodicYProfile& p) -> std::optional<RowLines> {
            const auto [k, reduced] = reduce_y(y, p.period);
            auto inner = p.cell->lines_at(reduced);
            if (!inner) return std::nullopt;
            const double drop0 = (*p.cell)(0.0, 0.5 * p.period) - (*p.cell)(0.0, -0.5 * p.period);
            const double drop1 = (*p.cell)(1.0, 0.5 * p.period) - (*p.cell)(1.0, -0.5 * p.period);
            if (std::abs(drop0 - drop1) > 1e-12) {
              throw std::invalid_argument("periodic-in-y profile: vertical drop depends on x");
            }
            for (auto& line : inner->lines) line.intercept += k * drop0;
            return inner;
          },
          [&](const CallableProfile&) -> std::optional<RowLines> { return std::nullopt; },
      },
      kind_);
}

std::string ContinuousProfile::describe() const {
  std::ostringstream os;
  std::visit(Overloaded{
                 [&](const AffineProfile& a) { os << "affine(" << a.rho1 << "," << a.rho2 << "," << a.offset << ")"; },
                 [&](const SinusoidProfile& s) {
                   os << "sinusoid(" << s.rho1 << "," << s.rho2 << "," << s.amplitude << "," << s.kx << "," << s.ky
                      << ")";
                 },
                 [&](const PiecewiseLinearProfile& p) {
                   os << (p.combine == PiecewiseLinearProfile::Combine::Max ? "max" : "min") << "[";
                   for (std::size_t i = 0; i < p.pieces.size(); ++i) {
                     if (i) os << ";";
                     os << p.pieces[i].rho1 << "," << p.pieces[i].rho2 << "," << p.pieces[i].offset;
                   }
                   os << "]";
                 },
                 [&](const PeriodicYProfile& p) { os << "periodic_y(" << p.cell->describe() << "," << p.period << ")"; },
                 [&](const CallableProfile&) { os << "callable"; },
             },
             kind_);
  return os.str();
}

}  // namespace gwflow
