#include "gwflow/equilibrium.hpp"

#include <algorithm>
#include <stdexcept>
#include <string>

#include "gwflow/growth_dynamics.hpp"
#include "gwflow/parallel.hpp"
#include "gwflow/quadrature.hpp"
#include "gwflow/rng.hpp"

namespace gwflow {

namespace {

constexpr double kPi = std::numbers::pi;
constexpr double kChunk = 10.0;

double panel_width(double dx, double eta_a, double m) { return kPi / std::max(1.0, std::abs(dx * eta_a) + std::abs(m)); }

/// Integral of exp(a eps(k) + i m k) over [lo, hi].
std::complex<double> branch(double a, double m, double lo, double hi, const KernelParams& p, double tol) {
  auto f = [&](double k) { return std::exp(a * dispersion(k, p) + std::complex<double>(0.0, m * k)); };
  return integrate(f, lo, hi, tol, panel_width(a, p.eta_a, m));
}

/// Runs sim from its current time to t1 with creation chunks seeded by
/// derive_seed(seed, chunk index).
void run_chunked(Simulator& sim, const Domain& domain, std::uint64_t seed, double t1, std::uint64_t& chunk) {
  while (sim.now() < Fixed::grid(t1)) {
    const Fixed a = sim.now();
    const Fixed b = std::min(Fixed::grid(a.to_double() + kChunk), Fixed::grid(t1));
    auto omega = sample_creations(derive_seed(seed, chunk++), domain, a, b);
    sim.advance(b, omega.points);
  }
}

Simulator burned_in(const StationarySetup& s, std::uint64_t seed, std::uint64_t& chunk) {
  if (!(s.rho.rho2 >= -1.0 && s.rho.rho2 <= 0.0)) throw std::invalid_argument("stationary setup: rho2 must lie in [-1, 0]");
  if (s.t_burn < 0.0) throw std::invalid_argument("stationary setup: negative t_burn");
  const HeightField f0 = linear_field(s.rho.rho1, s.rho.rho2, 1, s.M, s.N);
  Simulator sim(f0);
  run_chunked(sim, f0.domain, seed, s.t_burn, chunk);
  return sim;
}

struct Moments {
  double sum = 0.0;
  double sum2 = 0.0;
  std::int64_t n = 0;
  void add(double v) {
    sum += v;
    sum2 += v * v;
    ++n;
  }
  double mean() const { return n ? sum / n : 0.0; }
  double var() const { return n > 1 ? (sum2 - sum * sum / n) / (n - 1) : 0.0; }
};

}  // namespace

void KernelParams::check() const {
  if (!(eta_s > 0.0)) throw std::invalid_argument("kernel params: eta_s must be positive");
  if (!std::isfinite(eta_a)) throw std::invalid_argument("kernel params: eta_a must be finite");
  if (!(rho2 > -1.0 && rho2 < 0.0)) throw std::invalid_argument("kernel params: rho2 must lie strictly inside (-1, 0)");
  if (!(eta_plus > 0.0)) throw std::invalid_argument("kernel params: eta_plus must be positive");
  if (!(eta_minus > 0.0)) throw std::invalid_argument("kernel params: eta_minus must be positive");
}

std::complex<double> dispersion(double k, const KernelParams& p) {
  return {-p.eta_s * std::cos(k), p.eta_a * std::sin(k)};
}

std::complex<double> kernel(double xp, std::int64_t yp, double x, std::int64_t y, const KernelParams& params) {
  params.check();
  const double theta = kPi * std::abs(params.rho2);
  const double dx = xp - x;
  const auto dy = static_cast<double>(yp - y);
  if (dx >= 0.0) return branch(dx, dy, -theta, theta, params, 1e-11) / (2.0 * kPi);
  return -branch(dx, dy, theta, 2.0 * kPi - theta, params, 1e-11) / (2.0 * kPi);
}

double structure_function(double x, std::int64_t y, const KernelParams& params, StepSign sign) {
  params.check();
  if (x == 0.0 && y == 0) throw std::invalid_argument("structure_function: undefined at the origin");
  const double theta = kPi * std::abs(params.rho2);
  const double ax = std::abs(x);
  const double m = (x >= 0.0 ? 1.0 : -1.0) * static_cast<double>(y) + (sign == StepSign::Plus ? 1.0 : -1.0);
  const double eta = sign == StepSign::Plus ? params.eta_plus : params.eta_minus;
  const std::complex<double> A = branch(ax, m, -theta, theta, params, 1e-12);
  const std::complex<double> B = branch(-ax, m, theta, 2.0 * kPi - theta, params, 1e-12);
  return (eta * eta / (4.0 * kPi * kPi) * A * B).real();
}

HeightField burn_in_stationary(const StationarySetup& setup, std::uint64_t seed) {
  std::uint64_t chunk = 0;
  return burned_in(setup, seed, chunk).snapshot();
}

GrowthEstimate measure_growth(const StationarySetup& setup, double T, int replicas, std::uint64_t seed, int threads) {
  if (replicas < 10) {
    throw std::invalid_argument("measure_growth: " + std::to_string(replicas) +
                                " replicas is too few for a variance estimate; use at least 10 (100 recommended)");
  }
  if (!(T > 0.0)) throw std::invalid_argument("measure_growth: T must be positive");
  GrowthEstimate out;
  out.replicas = replicas;
  for (int k = 5; k >= 0; --k) out.times.push_back(std::ldexp(T, -k));
  const std::size_t nt = out.times.size();

  struct Sample {
    std::vector<double> dh;
    double kinks = 0.0;
    double antikinks = 0.0;
  };
  std::vector<Sample> samples(static_cast<std::size_t>(replicas));
  const double area = 4.0 * setup.M * static_cast<double>(setup.N);
  parallel_for(replicas, resolve_threads(threads), [&](int r) {
    std::uint64_t chunk = 0;
    const std::uint64_t rseed = derive_seed(seed, static_cast<std::uint64_t>(r));
    Simulator sim = burned_in(setup, rseed, chunk);
    const Fixed Mf = Fixed::grid(setup.M);
    const Fixed t0 = sim.now();
    const std::int64_t h0 = sim.height(Fixed{}, 0);
    Sample& s = samples[static_cast<std::size_t>(r)];
    for (double t : out.times) {
      run_chunked(sim, TorusDomain{Mf, setup.N}, rseed, (t0 + Fixed::grid(t)).to_double(), chunk);
      s.dh.push_back(static_cast<double>(sim.height(Fixed{}, 0) - h0));
      const auto [k, a] = sim.count_steps(-Mf, Mf, -setup.N, setup.N - 1);
      s.kinks += static_cast<double>(k) / area / static_cast<double>(nt);
      s.antikinks += static_cast<double>(a) / area / static_cast<double>(nt);
    }
  });

  Moments sp;
  for (std::size_t i = 0; i < nt; ++i) {
    Moments m;
    for (const auto& s : samples) m.add(s.dh[i]);
    out.mean_dh.push_back(m.mean());
    out.var_dh.push_back(m.var());
  }
  for (const auto& s : samples) {
    sp.add(s.dh.back() / T);
    out.kink_density += s.kinks / replicas;
    out.antikink_density += s.antikinks / replicas;
  }
  out.speed_estimate = sp.mean();
  out.speed_std_error = std::sqrt(sp.var() / replicas);
  return out;
}

std::vector<CountMoments> kink_count_variance(const StationarySetup& setup, const std::vector<int>& radii, int replicas,
                                              std::uint64_t seed, int threads) {
  if (replicas < 2) throw std::invalid_argument("kink_count_variance: need at least 2 replicas");
  for (int R : radii) {
    if (R <= 0 || 2.0 * R > std::min(setup.M, static_cast<double>(setup.N))) {
      throw std::invalid_argument("kink_count_variance: R = " + std::to_string(R) +
                                  " must satisfy 0 < R <= min(M, N) / 2");
    }
  }
  constexpr int kTimes = 4;
  constexpr double kGap = 10.0;
  const Fixed Mf = Fixed::grid(setup.M);
  const std::int64_t cy[2] = {0, setup.N};
  const Fixed cx[2] = {Fixed{}, Mf};

  // counts[r][time][centre][radius] = (kinks, antikinks)
  using Counts = std::vector<std::pair<std::int64_t, std::int64_t>>;
  std::vector<std::vector<Counts>> counts(static_cast<std::size_t>(replicas));
  parallel_for(replicas, resolve_threads(threads), [&](int r) {
    std::uint64_t chunk = 0;
    const std::uint64_t rseed = derive_seed(seed, static_cast<std::uint64_t>(r));
    Simulator sim = burned_in(setup, rseed, chunk);
    const Fixed t0 = sim.now();
    auto& mine = counts[static_cast<std::size_t>(r)];
    for (int k = 0; k < kTimes; ++k) {
      run_chunked(sim, TorusDomain{Mf, setup.N}, rseed, t0.to_double() + k * kGap, chunk);
      for (const Fixed x : cx) {
        for (const std::int64_t y : cy) {
          Counts c;
          for (int R : radii) {
            const Fixed fr = Fixed::from_int(R);
            c.push_back(sim.count_steps(x - fr, x + fr, y - R, y + R));
          }
          mine.push_back(std::move(c));
        }
      }
    }
  });

  std::vector<CountMoments> out;
  for (std::size_t j = 0; j < radii.size(); ++j) {
    Moments mk, ma;
    for (const auto& rep : counts) {
      for (const auto& c : rep) {
        mk.add(static_cast<double>(c[j].first));
        ma.add(static_cast<double>(c[j].second));
      }
    }
    out.push_back({radii[j], mk.mean(), mk.var(), ma.mean(), ma.var(), mk.n});
  }
  return out;
}

CountMoments kink_count_variance(const StationarySetup& setup, int R, int replicas, std::uint64_t seed, int threads) {
  return kink_count_variance(setup, std::vector<int>{R}, replicas, seed, threads).front();
}

}  // namespace gwflow
