#pragma once

#include <functional>
#include <memory>
#include <optional>
#include <string>
#include <type_traits>
#include <variant>
#include <vector>

namespace gwflow {

/// rho1 * x + rho2 * y + offset
struct AffineProfile {
  double rho1 = 0.0;
  double rho2 = 0.0;
  double offset = 0.0;
};

/// rho1 * x + rho2 * y + amplitude * sin(kx * x + ky * y)
struct SinusoidProfile {
  double rho1 = 0.0;
  double rho2 = 0.0;
  double amplitude = 0.0;
  double kx = 0.0;
  double ky = 0.0;
};

/// Pointwise max or min of affine pieces.
struct PiecewiseLinearProfile {
  enum class Combine { Max, Min };
  Combine combine = Combine::Max;
  std::vector<AffineProfile> pieces;
};

class ContinuousProfile;

/// Periodic extension in y of a cell profile defined on [-period/2, period/2):
/// f(x, y + period) = f(x, y) + drop, with drop = cell(x, period/2) - cell(x, -period/2).
struct PeriodicYProfile {
  std::shared_ptr<const ContinuousProfile> cell;
  double period = 0.0;
};

/// Arbitrary callable; the discretizer needs a bound on |df/dx|.
struct CallableProfile {
  std::function<double(double, double)> f;
  double lipschitz_x = 0.0;
};

/// A continuous profile f(x, y) from the closed algebra the discretizer and
/// the PDE solver understand.
class ContinuousProfile {
 public:
  using Kind = std::variant<AffineProfile, SinusoidProfile, PiecewiseLinearProfile, PeriodicYProfile,
                            CallableProfile>;

  ContinuousProfile() : kind_(AffineProfile{}) {}
  template <class T>
    requires std::is_constructible_v<Kind, T&&>
  ContinuousProfile(T&& kind) : kind_(std::forward<T>(kind)) {}  // NOLINT(google-explicit-constructor)

  static ContinuousProfile affine(double rho1, double rho2, double offset = 0.0) {
    return AffineProfile{rho1, rho2, offset};
  }
  /// max(slope_below * y, slope_above * y) periodized in y with the given period.
  static ContinuousProfile y_wedge(double slope_below, double slope_above, double period);

  double operator()(double x, double y) const;

  const Kind& kind() const { return kind_; }

  /// Upper bound on |df/dx|.
  double lipschitz_x() const;

  /// True when f does not depend on x.
  bool y_only() const;

  /// Rows restricted to x: g(x) = a*x + b pieces when the profile is piecewise
  /// linear in x at this y, std::nullopt otherwise.
  struct Line {
    double slope;
    double intercept;
  };
  struct RowLines {
    PiecewiseLinearProfile::Combine combine;
    std::vector<Line> lines;
  };
  std::optional<RowLines> lines_at(double y) const;

  std::string describe() const;

 private:
  Kind kind_;
};

}  // namespace gwflow
