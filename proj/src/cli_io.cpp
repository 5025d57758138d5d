#include "gwflow/cli_io.hpp"

#include <json.hpp>

#include <chrono>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <set>
#include <sstream>

#include "gwflow/growth_dynamics.hpp"
#include "gwflow/parallel.hpp"
#include "gwflow/polymer_oracle.hpp"
#include "gwflow/rng.hpp"

#ifndef GWFLOW_VERSION
#define GWFLOW_VERSION "0.0.0"
#endif

namespace gwflow {

using nlohmann::json;

namespace {

constexpr std::pair<ExperimentKind, const char*> kKinds[] = {
    {ExperimentKind::Simulate, "simulate"}, {ExperimentKind::Hydro, "hydro"},   {ExperimentKind::Equilibrium, "equilibrium"},
    {ExperimentKind::Pde, "pde"},           {ExperimentKind::LisBound, "lis-bound"}, {ExperimentKind::Axioms, "axioms"}};

constexpr std::pair<Reference, const char*> kReferences[] = {
    {Reference::Auto, "auto"}, {Reference::Exact, "exact"}, {Reference::HopfLax, "hopf-lax"}, {Reference::Pde, "pde"}};

/// Walks one JSON object, recording type errors and unknown keys by path.
class Reader {
 public:
  Reader(const json* j, std::string path, std::vector<std::string>& errors)
      : j_(j), path_(std::move(path)), errors_(&errors) {}

  std::string at(const char* key) const { return path_.empty() ? key : path_ + "." + key; }

  const json* find(const char* key) {
    seen_.insert(key);
    if (!j_) return nullptr;
    auto it = j_->find(key);
    return it == j_->end() ? nullptr : &*it;
  }

  void get(const char* key, double& out) {
    if (const json* v = find(key)) {
      if (v->is_number()) {
        out = v->get<double>();
      } else {
        error(key, "expected a number");
      }
    }
  }
  void get(const char* key, int& out) {
    std::int64_t v = out;
    get(key, v);
    if (v < INT32_MIN || v > INT32_MAX) {
      error(key, "out of range");
    } else {
      out = static_cast<int>(v);
    }
  }
  void get(const char* key, std::int64_t& out) {
    if (const json* v = find(key)) {
      if (v->is_number_integer()) {
        out = v->get<std::int64_t>();
      } else {
        error(key, "expected an integer");
      }
    }
  }
  void get(const char* key, std::uint64_t& out) {
    if (const json* v = find(key)) {
      if (v->is_number_unsigned()) {
        out = v->get<std::uint64_t>();
      } else {
        error(key, "expected a non-negative integer");
      }
    }
  }
  void get(const char* key, std::string& out) {
    if (const json* v = find(key)) {
      if (v->is_string()) {
        out = v->get<std::string>();
      } else {
        error(key, "expected a string");
      }
    }
  }
  template <class T>
  void get(const char* key, std::vector<T>& out) {
    if (const json* v = find(key)) {
      if (!v->is_array()) {
        error(key, "expected an array");
        return;
      }
      std::vector<T> tmp;
      for (const auto& e : *v) {
        bool ok;
        if constexpr (std::is_same_v<T, double>) {
          ok = e.is_number();
        } else if constexpr (std::is_same_v<T, std::uint64_t>) {
          ok = e.is_number_unsigned();
        } else {
          ok = e.is_number_integer();
        }
        if (!ok) {
          error(key, "array has an element of the wrong type");
          return;
        }
        tmp.push_back(e.get<T>());
      }
      out = std::move(tmp);
    }
  }

  Reader section(const char* key) {
    const json* v = find(key);
    if (v && !v->is_object()) {
      error(key, "expected an object");
      v = nullptr;
    }
    return Reader(v, at(key), *errors_);
  }

  void error(const char* key, const std::string& what) { errors_->push_back(at(key) + ": " + what); }

  void finish() {
    if (!j_) return;
    for (const auto& [k, v] : j_->items()) {
      if (!seen_.count(k)) errors_->push_back((path_.empty() ? k : path_ + "." + k) + ": unknown key");
    }
  }

 private:
  const json* j_;
  std::string path_;
  std::vector<std::string>* errors_;
  std::set<std::string> seen_;
};

template <class T>
bool ascending(const std::vector<T>& v) {
  for (std::size_t i = 1; i < v.size(); ++i) {
    if (!(v[i - 1] < v[i])) return false;
  }
  return true;
}

std::string fmt(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

class Csv {
 public:
  Csv(const std::filesystem::path& path, const std::vector<std::string>& header) : os_(path) {
    if (!os_) throw std::runtime_error("cannot write " + path.string());
    row_strings(header);
  }
  template <class... A>
  void row(const A&... values) {
    std::vector<std::string> cells{cell(values)...};
    row_strings(cells);
  }

 private:
  static std::string cell(double v) { return fmt(v); }
  static std::string cell(const std::string& v) { return v; }
  static std::string cell(const char* v) { return v; }
  template <class I>
    requires std::is_integral_v<I>
  static std::string cell(I v) { return std::to_string(v); }
  void row_strings(const std::vector<std::string>& cells) {
    for (std::size_t i = 0; i < cells.size(); ++i) os_ << (i ? "," : "") << cells[i];
    os_ << '\n';
  }
  std::ofstream os_;
};

Domain micro_domain(const ExperimentConfig& c) {
  if (c.domain.torus) return TorusDomain{Fixed::grid(c.domain.M), c.domain.N};
  return WindowDomain{Fixed::grid(c.domain.a), Fixed::grid(c.domain.b), c.domain.c, c.domain.d};
}

json manifest_json(const RunManifest& m, const ExperimentConfig& c, const std::vector<std::string>& notes) {
  json j;
  j["config_hash"] = m.config_hash;
  j["code_version"] = m.code_version;
  j["experiment"] = m.experiment;
  j["seed"] = m.seed;
  j["replica_seeds"] = m.replica_seeds;
  j["wall_clock_s"] = m.wall_clock_s;
  j["outputs"] = m.outputs;
  j["incomplete"] = m.incomplete;
  j["checks"] = m.checks;
  j["checks_passed"] = m.checks_passed;
  j["notes"] = notes;
  j["config"] = json::parse(serialize_config(c));
  return j;
}

}  // namespace

const char* kind_name(ExperimentKind k) {
  for (const auto& [kind, name] : kKinds) {
    if (kind == k) return name;
  }
  return "?";
}

std::optional<ExperimentKind> parse_kind(const std::string& s) {
  for (const auto& [kind, name] : kKinds) {
    if (s == name) return kind;
  }
  return std::nullopt;
}

ConfigError::ConfigError(std::vector<std::string> violations)
    : std::runtime_error([&] {
        std::string s = "invalid configuration:";
        for (const auto& v : violations) s += "\n  " + v;
        return s;
      }()),
      violations_(std::move(violations)) {}

ContinuousProfile ExperimentConfig::profile_function() const {
  if (profile.kind == "sinusoid") {
    return SinusoidProfile{slope.rho1, slope.rho2, profile.amplitude, profile.kx, profile.ky};
  }
  if (profile.kind == "wedge") return ContinuousProfile::y_wedge(profile.slope_below, profile.slope_above, profile.period);
  return ContinuousProfile::affine(slope.rho1, slope.rho2, profile.offset);
}

ExperimentConfig parse_config(const std::string& text, std::optional<ExperimentKind> fallback) {
  json doc;
  try {
    doc = json::parse(text, nullptr, true, true);
  } catch (const json::parse_error& e) {
    throw ConfigError({std::string("document: ") + e.what()});
  }
  std::vector<std::string> errs;
  if (!doc.is_object()) throw ConfigError({"document: expected an object"});
  ExperimentConfig c;
  Reader top(&doc, "", errs);

  std::string kind;
  top.get("experiment", kind);
  if (kind.empty() && fallback) {
    c.kind = *fallback;
  } else if (kind.empty()) {
    errs.push_back("experiment: required (simulate | hydro | equilibrium | pde | lis-bound | axioms)");
  } else if (auto k = parse_kind(kind)) {
    c.kind = *k;
    if (fallback && *fallback != *k) {
      errs.push_back("experiment: document says '" + kind + "' but '" + kind_name(*fallback) + "' was requested");
    }
  } else {
    errs.push_back("experiment: unknown kind '" + kind + "'");
  }
  switch (c.kind) {
    case ExperimentKind::Hydro:
      c.domain.M = 1.0;
      c.domain.N = 1;
      c.T = 1.0;
      c.n_list = {10, 20, 40, 80};
      break;
    case ExperimentKind::Equilibrium: c.T = 40.0; break;
    case ExperimentKind::Pde: c.T = 1.0; break;
    default: break;
  }
  top.get("seed", c.seed);
  top.get("replicas", c.replicas);
  top.get("threads", c.threads);
  top.get("output", c.output);
  top.get("T", c.T);
  top.get("n_list", c.n_list);
  top.get("burn_in", c.burn_in);
  if (c.replicas < 1) errs.push_back("replicas: must be at least 1");
  if (c.threads < 0) errs.push_back("threads: must be >= 0 (0 = GWFLOW_THREADS or 1)");
  if (!(c.T > 0.0)) errs.push_back("T: must be positive");
  if (c.burn_in < 0.0) errs.push_back("burn_in: must be >= 0");
  if (c.n_list.empty()) errs.push_back("n_list: must not be empty");
  for (int n : c.n_list) {
    if (n <= 0) {
      errs.push_back("n_list: entries must be positive");
      break;
    }
  }
  if (!ascending(c.n_list)) errs.push_back("n_list: must be in strictly ascending order");

  {
    Reader d = top.section("domain");
    std::string dk = "torus";
    d.get("kind", dk);
    if (dk != "torus" && dk != "window") errs.push_back("domain.kind: expected 'torus' or 'window'");
    c.domain.torus = dk != "window";
    d.get("M", c.domain.M);
    d.get("N", c.domain.N);
    d.get("a", c.domain.a);
    d.get("b", c.domain.b);
    d.get("c", c.domain.c);
    d.get("d", c.domain.d);
    if (c.domain.torus && !(c.domain.M > 0.0)) errs.push_back("domain.M: must be positive");
    if (c.domain.torus && c.domain.N <= 0) errs.push_back("domain.N: must be positive");
    if (!c.domain.torus && !(c.domain.a < c.domain.b)) errs.push_back("domain.b: must exceed domain.a");
    if (!c.domain.torus && c.domain.d < c.domain.c) errs.push_back("domain.d: must be >= domain.c");
    d.finish();
  }
  {
    Reader s = top.section("slope");
    s.get("rho1", c.slope.rho1);
    s.get("rho2", c.slope.rho2);
    if (!(c.slope.rho2 >= -1.0 && c.slope.rho2 <= 0.0)) errs.push_back("slope.rho2: must lie in [-1, 0]");
    if (!std::isfinite(c.slope.rho1)) errs.push_back("slope.rho1: must be finite");
    s.finish();
  }
  {
    Reader p = top.section("profile");
    p.get("kind", c.profile.kind);
    p.get("offset", c.profile.offset);
    p.get("amplitude", c.profile.amplitude);
    p.get("kx", c.profile.kx);
    p.get("ky", c.profile.ky);
    p.get("slope_below", c.profile.slope_below);
    p.get("slope_above", c.profile.slope_above);
    p.get("period", c.profile.period);
    if (c.profile.kind != "affine" && c.profile.kind != "sinusoid" && c.profile.kind != "wedge") {
      errs.push_back("profile.kind: expected affine | sinusoid | wedge");
    }
    if (c.profile.kind == "wedge") {
      if (!(c.profile.period > 0.0)) errs.push_back("profile.period: must be positive");
      for (double s : {c.profile.slope_below, c.profile.slope_above}) {
        if (!(s >= -1.0 && s <= 0.0)) {
          errs.push_back("profile.slope_below/slope_above: must lie in [-1, 0]");
          break;
        }
      }
    }
    if (c.profile.kind == "sinusoid") {
      const double lo = c.slope.rho2 - std::abs(c.profile.amplitude * c.profile.ky);
      const double hi = c.slope.rho2 + std::abs(c.profile.amplitude * c.profile.ky);
      if (lo < -1.0 || hi > 0.0) errs.push_back("profile.amplitude: y-slopes leave [-1, 0]");
    }
    p.finish();
  }
  {
    Reader t = top.section("tolerances");
    t.get("speed_rel", c.tolerances.speed_rel);
    t.get("density_rel", c.tolerances.density_rel);
    t.get("var_time_ratio", c.tolerances.var_time_ratio);
    t.get("kink_slack", c.tolerances.kink_slack);
    t.get("hydro_final", c.tolerances.hydro_final);
    t.get("linear_abs", c.tolerances.linear_abs);
    for (double v : {c.tolerances.speed_rel, c.tolerances.density_rel, c.tolerances.var_time_ratio,
                     c.tolerances.kink_slack, c.tolerances.hydro_final, c.tolerances.linear_abs}) {
      if (!(v > 0.0)) {
        errs.push_back("tolerances: every tolerance must be positive");
        break;
      }
    }
    t.finish();
  }
  {
    Reader s = top.section("simulate");
    s.get("snapshots", c.snapshots);
    if (!ascending(c.snapshots)) errs.push_back("simulate.snapshots: must be in ascending order");
    s.finish();
  }
  {
    Reader e = top.section("equilibrium");
    if (e.find("radii")) {
      e.get("radii", c.radii);
    } else {
      c.radii.clear();
      for (int R = 4; 2.0 * R <= std::min(c.domain.M, static_cast<double>(c.domain.N)); R *= 2) c.radii.push_back(R);
      if (c.radii.empty()) c.radii.push_back(1);
    }
    e.get("count_replicas", c.count_replicas);
    e.get("structure_max", c.structure_max);
    Reader k = e.section("kernel");
    k.get("eta_s", c.kernel.eta_s);
    k.get("eta_a", c.kernel.eta_a);
    k.get("rho2", c.kernel.rho2);
    k.get("eta_plus", c.kernel.eta_plus);
    k.get("eta_minus", c.kernel.eta_minus);
    try {
      c.kernel.check();
    } catch (const std::invalid_argument& ex) {
      errs.push_back(std::string("equilibrium.") + ex.what());
    }
    k.finish();
    if (c.radii.empty() || !ascending(c.radii) || c.radii.front() <= 0) {
      errs.push_back("equilibrium.radii: must be positive and strictly ascending");
    }
    if (c.count_replicas < 2) errs.push_back("equilibrium.count_replicas: must be at least 2");
    if (c.structure_max < 1) errs.push_back("equilibrium.structure_max: must be at least 1");
    e.finish();
  }
  {
    Reader h = top.section("hydro");
    h.get("R", c.R);
    h.get("seeds", c.hydro_seeds);
    h.get("pde_cells", c.pde_cells);
    std::string ref = "auto";
    h.get("reference", ref);
    bool found = false;
    for (const auto& [r, name] : kReferences) {
      if (ref == name) {
        c.reference = r;
        found = true;
      }
    }
    if (!found) errs.push_back("hydro.reference: expected auto | exact | hopf-lax | pde");
    Reader g = h.section("grid");
    g.get("nx", c.grid.nx);
    g.get("ny", c.grid.ny);
    g.get("nt", c.grid.nt);
    g.finish();
    if (!(c.R > 0.0)) errs.push_back("hydro.R: must be positive");
    if (c.hydro_seeds.empty()) errs.push_back("hydro.seeds: must not be empty");
    if (c.grid.nx < 1 || c.grid.ny < 1 || c.grid.nt < 2) errs.push_back("hydro.grid: need nx, ny >= 1 and nt >= 2");
    if (c.pde_cells < 4) errs.push_back("hydro.pde_cells: must be at least 4");
    h.finish();
  }
  {
    Reader p = top.section("pde");
    p.get("nx", c.pde_grid.nx);
    p.get("ny", c.pde_grid.ny);
    p.get("Lx", c.pde_grid.Lx);
    p.get("Ly", c.pde_grid.Ly);
    p.get("sigma_x", c.scheme.sigma_x);
    p.get("sigma_y", c.scheme.sigma_y);
    p.get("cfl", c.scheme.cfl);
    if (c.pde_grid.nx < 2 || c.pde_grid.ny < 2) errs.push_back("pde.nx/ny: need at least 2 points");
    if (!(c.pde_grid.Lx > 0.0 && c.pde_grid.Ly > 0.0)) errs.push_back("pde.Lx/Ly: must be positive");
    if (!(c.scheme.cfl > 0.0 && c.scheme.cfl <= 1.0)) errs.push_back("pde.cfl: must lie in (0, 1]");
    if (c.scheme.sigma_x < 1.0) errs.push_back("pde.sigma_x: must be >= 1 for a monotone scheme");
    if (c.scheme.sigma_y < 2.0) errs.push_back("pde.sigma_y: must be >= 2 for a monotone scheme");
    p.finish();
  }
  {
    Reader l = top.section("lis");
    l.get("area", c.lis_area);
    l.get("kmax", c.lis_kmax);
    l.get("replicas", c.lis_replicas);
    if (!(c.lis_area > 0.0)) errs.push_back("lis.area: must be positive");
    if (c.lis_kmax < 1) errs.push_back("lis.kmax: must be at least 1");
    if (c.lis_replicas < 1) errs.push_back("lis.replicas: must be at least 1");
    l.finish();
  }
  {
    Reader a = top.section("axioms");
    a.get("sizes", c.axioms.sizes);
    a.get("seeds", c.axioms.seeds);
    a.get("T", c.axioms.T);
    a.get("shift", c.axioms.shift);
    a.get("modulus_n", c.axioms.modulus_n);
    if (c.axioms.sizes.empty() || !ascending(c.axioms.sizes)) errs.push_back("axioms.sizes: must be strictly ascending");
    for (int n : c.axioms.sizes) {
      if (n <= 0 || n % 2 != 0) {
        errs.push_back("axioms.sizes: entries must be positive and even");
        break;
      }
    }
    if (c.axioms.seeds < 1) errs.push_back("axioms.seeds: must be at least 1");
    if (!(c.axioms.T > 0.0)) errs.push_back("axioms.T: must be positive");
    if (c.axioms.modulus_n < 0 || c.axioms.modulus_n % 2 != 0) errs.push_back("axioms.modulus_n: must be even and >= 0");
    a.finish();
  }
  top.finish();
  if (!errs.empty()) throw ConfigError(std::move(errs));
  return c;
}

void validate_config(const ExperimentConfig& c) {
  std::vector<std::string> errs;
  const ContinuousProfile f = c.profile_function();
  switch (c.kind) {
    case ExperimentKind::Simulate:
      try {
        const auto phi = discretize(f, c.n_list.front(), micro_domain(c));
        (void)phi;
      } catch (const std::exception& e) {
        errs.push_back(std::string("profile: ") + e.what());
      }
      break;
    case ExperimentKind::Equilibrium:
      if (!c.domain.torus) errs.push_back("domain.kind: equilibrium runs on a torus");
      if (c.replicas < 10) errs.push_back("replicas: growth estimates need at least 10 replicas");
      try {
        (void)linear_field(c.slope.rho1, c.slope.rho2, 1, c.domain.M, c.domain.N);
      } catch (const std::exception& e) {
        errs.push_back(std::string("slope: ") + e.what());
      }
      for (int R : c.radii) {
        if (2.0 * R > std::min(c.domain.M, static_cast<double>(c.domain.N))) {
          errs.push_back("equilibrium.radii: R = " + std::to_string(R) + " exceeds min(M, N) / 2");
        }
      }
      break;
    case ExperimentKind::Hydro: {
      if (!c.domain.torus) errs.push_back("domain.kind: hydro runs on a torus");
      ConvergenceSetup s{f, c.domain.M, static_cast<double>(c.domain.N), c.n_list, c.T, c.R, c.hydro_seeds, c.grid,
                         c.reference, c.pde_cells};
      try {
        check_setup(s);
      } catch (const std::exception& e) {
        errs.push_back(std::string("hydro: ") + e.what());
      }
      break;
    }
    case ExperimentKind::Pde:
      try {
        (void)solve(f, 0.0, c.pde_grid, c.scheme);
      } catch (const std::exception& e) {
        errs.push_back(std::string("pde: ") + e.what());
      }
      break;
    case ExperimentKind::LisBound:
    case ExperimentKind::Axioms: break;
  }
  if (!errs.empty()) throw ConfigError(std::move(errs));
}

std::string serialize_config(const ExperimentConfig& c) {
  json j;
  j["experiment"] = kind_name(c.kind);
  j["seed"] = c.seed;
  j["replicas"] = c.replicas;
  j["threads"] = c.threads;
  j["output"] = c.output;
  j["T"] = c.T;
  j["n_list"] = c.n_list;
  j["burn_in"] = c.burn_in;
  if (c.domain.torus) {
    j["domain"] = {{"kind", "torus"}, {"M", c.domain.M}, {"N", c.domain.N}};
  } else {
    j["domain"] = {{"kind", "window"}, {"a", c.domain.a}, {"b", c.domain.b}, {"c", c.domain.c}, {"d", c.domain.d}};
  }
  j["slope"] = {{"rho1", c.slope.rho1}, {"rho2", c.slope.rho2}};
  j["profile"] = {{"kind", c.profile.kind},           {"offset", c.profile.offset},
                  {"amplitude", c.profile.amplitude}, {"kx", c.profile.kx},
                  {"ky", c.profile.ky},               {"slope_below", c.profile.slope_below},
                  {"slope_above", c.profile.slope_above}, {"period", c.profile.period}};
  const auto& t = c.tolerances;
  j["tolerances"] = {{"speed_rel", t.speed_rel},     {"density_rel", t.density_rel}, {"var_time_ratio", t.var_time_ratio},
                     {"kink_slack", t.kink_slack},   {"hydro_final", t.hydro_final}, {"linear_abs", t.linear_abs}};
  j["simulate"] = {{"snapshots", c.snapshots}};
  j["equilibrium"] = {{"radii", c.radii},
                      {"count_replicas", c.count_replicas},
                      {"structure_max", c.structure_max},
                      {"kernel",
                       {{"eta_s", c.kernel.eta_s},
                        {"eta_a", c.kernel.eta_a},
                        {"rho2", c.kernel.rho2},
                        {"eta_plus", c.kernel.eta_plus},
                        {"eta_minus", c.kernel.eta_minus}}}};
  std::string ref;
  for (const auto& [r, name] : kReferences) {
    if (r == c.reference) ref = name;
  }
  j["hydro"] = {{"R", c.R},
                {"seeds", c.hydro_seeds},
                {"reference", ref},
                {"pde_cells", c.pde_cells},
                {"grid", {{"nx", c.grid.nx}, {"ny", c.grid.ny}, {"nt", c.grid.nt}}}};
  j["pde"] = {{"nx", c.pde_grid.nx},          {"ny", c.pde_grid.ny},          {"Lx", c.pde_grid.Lx}, {"Ly", c.pde_grid.Ly},
              {"sigma_x", c.scheme.sigma_x}, {"sigma_y", c.scheme.sigma_y}, {"cfl", c.scheme.cfl}};
  j["lis"] = {{"area", c.lis_area}, {"kmax", c.lis_kmax}, {"replicas", c.lis_replicas}};
  j["axioms"] = {{"sizes", c.axioms.sizes},
                 {"seeds", c.axioms.seeds},
                 {"T", c.axioms.T},
                 {"shift", c.axioms.shift},
                 {"modulus_n", c.axioms.modulus_n}};
  return j.dump(2);
}

std::uint64_t fnv1a64(const std::string& bytes) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char ch : bytes) {
    h ^= ch;
    h *= 0x100000001b3ULL;
  }
  return h;
}

std::string code_version() { return GWFLOW_VERSION; }

RunManifest run(const ExperimentConfig& c, const std::filesystem::path& out, const std::string& main_csv) {
  validate_config(c);
  const auto start = std::chrono::steady_clock::now();
  std::filesystem::create_directories(out);
  RunManifest m;
  {
    char buf[20];
    std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(fnv1a64(serialize_config(c))));
    m.config_hash = buf;
  }
  m.code_version = code_version();
  m.experiment = kind_name(c.kind);
  m.seed = c.seed;
  std::vector<std::string> notes;
  auto write_manifest = [&] {
    std::ofstream os(out / "manifest.json");
    os << manifest_json(m, c, notes).dump(2) << '\n';
  };
  write_manifest();

  auto path = [&](const std::string& name, bool primary = false) {
    const std::string file = primary && !main_csv.empty() ? main_csv : name;
    m.outputs.push_back(file);
    return out / file;
  };
  auto check = [&](bool ok, const std::string& what) {
    m.checks.push_back(std::string(ok ? "PASS " : "FAIL ") + what);
    m.checks_passed = m.checks_passed && ok;
  };
  const int threads = resolve_threads(c.threads);
  const ContinuousProfile f = c.profile_function();

  switch (c.kind) {
    case ExperimentKind::Simulate: {
      const int n = c.n_list.front();
      const Domain d = micro_domain(c);
      const HeightField phi = discretize(f, n, d);
      const CreationSet omega = sample_creations(c.seed, d, c.T);
      const Trajectory traj = evolve(phi, omega, c.T, c.snapshots);
      Csv csv(path("summary.csv", true), {"t", "h00", "kinks", "antikinks", "effective_creations"});
      for (const auto& s : traj.snapshots) {
        const GradientStats st = gradient_stats(
            s.field, c.domain.torus ? Box{-c.domain.M, c.domain.M, -c.domain.N, c.domain.N - 1}
                                    : Box{c.domain.a, c.domain.b, c.domain.c, c.domain.d});
        std::int64_t eff = 0;
        for (const auto& p : traj.creations.points) eff += p.t <= s.t && p.status == CreationStatus::Effective;
        const bool origin = c.domain.torus || (c.domain.a <= 0.0 && c.domain.b >= 0.0 && c.domain.c <= 0 && c.domain.d >= 0);
        csv.row(s.t.to_double(), origin ? eval_height(s.field, Fixed{}, 0) : std::int64_t{0}, st.kinks, st.antikinks, eff);
      }
      {
        std::ofstream ev(path("events.ndjson"));
        write_events_ndjson(ev, traj);
      }
      {
        std::ofstream ff(path("final_field.ndjson"));
        write_ndjson(ff, traj.snapshots.back().field);
      }
      check(validate(traj.snapshots.back().field).ok(), "final field is admissible");
      break;
    }
    case ExperimentKind::Equilibrium: {
      const StationarySetup setup{c.slope, c.domain.M, c.domain.N, c.burn_in};
      for (int r = 0; r < c.replicas; ++r) m.replica_seeds.push_back(derive_seed(c.seed, static_cast<std::uint64_t>(r)));
      const GrowthEstimate g = measure_growth(setup, c.T, c.replicas, c.seed, threads);
      {
        Csv csv(path("growth.csv", true), {"t", "mean_h00", "var_h00"});
        for (std::size_t i = 0; i < g.times.size(); ++i) csv.row(g.times[i], g.mean_dh[i], g.var_dh[i]);
      }
      const double v = speed(c.slope);
      {
        Csv csv(path("summary.csv"), {"quantity", "value"});
        csv.row("speed_estimate", g.speed_estimate);
        csv.row("speed_std_error", g.speed_std_error);
        csv.row("speed_closed_form", v);
        csv.row("kink_density", g.kink_density);
        csv.row("antikink_density", g.antikink_density);
      }
      const std::uint64_t count_seed = derive_seed(c.seed, 0xc0057);
      const auto counts = kink_count_variance(setup, c.radii, c.count_replicas, count_seed, threads);
      {
        Csv csv(path("counts.csv"), {"R", "sign", "mean_counts", "var_counts"});
        for (const auto& cm : counts) {
          csv.row(cm.R, "+", cm.mean_antikinks, cm.var_antikinks);
          csv.row(cm.R, "-", cm.mean_kinks, cm.var_kinks);
        }
      }
      {
        Csv csv(path("structure.csv"), {"x", "y", "S_plus", "S_minus"});
        for (int x = 1; x <= c.structure_max; ++x) {
          csv.row(double(x), std::int64_t{0}, structure_function(x, 0, c.kernel, StepSign::Plus),
                  structure_function(x, 0, c.kernel, StepSign::Minus));
        }
        for (int y = 1; y <= c.structure_max; ++y) {
          csv.row(0.0, std::int64_t{y}, structure_function(0.0, y, c.kernel, StepSign::Plus),
                  structure_function(0.0, y, c.kernel, StepSign::Minus));
        }
      }
      const double tol = c.tolerances.density_rel;
      if (v > 0.0) {
        check(std::abs(g.speed_estimate - v) / v <= c.tolerances.speed_rel,
              "speed " + fmt(g.speed_estimate) + " vs v(rho) " + fmt(v));
        const double sum = g.kink_density + g.antikink_density;
        check(std::abs(sum - v) / v <= tol, "kink + antikink density " + fmt(sum) + " vs v(rho)");
      }
      if (c.slope.rho1 != 0.0) {
        const double diff = g.antikink_density - g.kink_density;
        check(std::abs(diff - c.slope.rho1) <= tol * std::abs(c.slope.rho1),
              "antikink - kink density " + fmt(diff) + " vs rho1");
      }
      const double vr = g.var_dh.back() / g.var_dh[g.var_dh.size() - 3];
      check(vr <= c.tolerances.var_time_ratio, "Var(h00, T) / Var(h00, T/4) = " + fmt(vr));
      if (counts.size() >= 2) {
        const auto& lo = counts.front();
        const auto& hi = counts.back();
        const double allowed = lo.var_kinks / (lo.R * double(lo.R)) * std::log(double(hi.R)) / std::log(double(lo.R)) *
                               c.tolerances.kink_slack;
        const double got = hi.var_kinks / (hi.R * double(hi.R));
        check(got <= allowed, "kink variance / R^2 at R = " + std::to_string(hi.R) + ": " + fmt(got) + " <= " + fmt(allowed));
      }
      break;
    }
    case ExperimentKind::Hydro: {
      ConvergenceSetup s{f, c.domain.M, static_cast<double>(c.domain.N), c.n_list, c.T, c.R, c.hydro_seeds, c.grid,
                         c.reference, c.pde_cells};
      m.replica_seeds = c.hydro_seeds;
      const ConvergenceReport rep = convergence_experiment(s, threads);
      {
        Csv csv(path("report.csv", true), {"n", "seed", "sup_error"});
        for (const auto& r : rep.rows) {
          csv.row(r.n, r.seed, r.sup_error);
          notes.push_back("runtime_s n=" + std::to_string(r.n) + " seed=" + std::to_string(r.seed) + ": " +
                          fmt(r.runtime_s));
        }
      }
      {
        Csv csv(path("trend.csv"), {"n", "mean_sup_error"});
        for (std::size_t i = 0; i < rep.n.size(); ++i) csv.row(rep.n[i], rep.error[i]);
      }
      notes.push_back("reference: " + rep.reference + ", fitted exponent " + fmt(rep.fitted_exponent));
      check(rep.strictly_decreasing(), "sup errors strictly decreasing in n");
      if (std::holds_alternative<AffineProfile>(f.kind())) {
        check(rep.error.back() <= c.tolerances.hydro_final,
              "final error " + fmt(rep.error.back()) + " <= " + fmt(c.tolerances.hydro_final));
      }
      break;
    }
    case ExperimentKind::Pde: {
      const GridSolution u = solve(f, c.T, c.pde_grid, c.scheme);
      {
        auto p = path("pde_grid.csv", true);
        std::ofstream os(p);
        os << "# n_x=" << u.nx() << " n_y=" << u.ny() << " L_x=" << fmt(u.Lx) << " L_y=" << fmt(u.Ly)
           << " t=" << fmt(u.t) << " rho1=" << fmt(u.background.rho1) << " rho2=" << fmt(u.background.rho2) << '\n';
        os << "x,y,u\n";
        for (int j = 0; j < u.ny(); ++j) {
          for (int i = 0; i < u.nx(); ++i) os << fmt(u.x(i)) << ',' << fmt(u.y(j)) << ',' << fmt(u.at(i, j)) << '\n';
        }
      }
      notes.push_back("d_y u range [" + fmt(u.dyu_min) + ", " + fmt(u.dyu_max) + "]");
      check(u.dyu_min >= -1.0 - 1e-9 && u.dyu_max <= 1e-9, "discrete d_y u stays in [-1, 0]");
      if (std::holds_alternative<AffineProfile>(f.kind())) {
        double err = 0.0;
        for (int i = 0; i < u.nx(); ++i) {
          for (int j = 0; j < u.ny(); ++j) err = std::max(err, std::abs(u.at(i, j) - f(u.x(i), u.y(j)) - c.T * speed(c.slope)));
        }
        check(err <= c.tolerances.linear_abs, "affine datum reproduced, error " + fmt(err));
      }
      break;
    }
    case ExperimentKind::LisBound: {
      const auto emp = lis_tail_monte_carlo(c.lis_area, c.lis_kmax, c.lis_replicas, c.seed);
      Csv csv(path("lis_tail.csv", true), {"k", "empirical", "bound"});
      bool ok = true;
      for (int k = 1; k <= c.lis_kmax; ++k) {
        const double b = chain_tail_bound(c.lis_area, k);
        csv.row(k, emp[static_cast<std::size_t>(k - 1)], b);
        ok = ok && emp[static_cast<std::size_t>(k - 1)] <= b;
      }
      check(ok, "empirical P(L >= k) <= (2 e^2 area / k^2)^k for k = 1.." + std::to_string(c.lis_kmax));
      break;
    }
    case ExperimentKind::Axioms: {
      const PropertyReport rep = axiom_suite(c.seed, c.axioms);
      Csv csv(path("axioms.csv", true), {"property", "n", "checks", "failures", "passed"});
      for (const auto& p : rep.checks) {
        csv.row(p.name, p.n, p.checks, p.failures, p.passed ? 1 : 0);
        if (!p.detail.empty()) notes.push_back(p.name + " n=" + std::to_string(p.n) + ": " + p.detail);
        check(p.passed, p.name + " n=" + std::to_string(p.n));
      }
      break;
    }
  }
  m.wall_clock_s = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  m.incomplete = false;
  write_manifest();
  return m;
}

}  // namespace gwflow
