#include "orthodeg/cli/config.hpp"

#include "orthodeg/inequalities.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <functional>
#include <numbers>
#include <sstream>

namespace orthodeg::cli {

LineError::LineError(int line, const std::string& what)
    : ParseError("line " + std::to_string(line) + ": " + what), line_(line) {}

bool ExperimentConfig::wants(const std::string& part) const {
  return parts.empty() || std::find(parts.begin(), parts.end(), part) != parts.end();
}

namespace {

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return "";
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

std::vector<std::string> split(const std::string& s) {
  std::vector<std::string> out;
  std::stringstream ss(s);
  std::string item;
  while (std::getline(ss, item, ',')) out.push_back(trim(item));
  if (!s.empty() && s.back() == ',') out.push_back("");
  return out;
}

double to_double(const std::string& s) {
  if (s == "pi") return std::numbers::pi;
  double v = 0.0;
  const auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc() || p != s.data() + s.size()) throw InvalidArgument("expected a number, got '" + s + "'");
  return v;
}

// Accepts "2*pi/3"-style multiples of pi besides plain numbers.
double to_angle(const std::string& s) {
  const auto star = s.find("*pi");
  const auto slash = s.find("pi/");
  if (star != std::string::npos || slash != std::string::npos || s == "pi") {
    double num = 1.0, den = 1.0;
    if (star != std::string::npos) num = to_double(s.substr(0, star));
    const auto sl = s.rfind('/');
    if (sl != std::string::npos && sl > s.find("pi")) den = to_double(s.substr(sl + 1));
    const std::string core = s.substr(star != std::string::npos ? star + 1 : 0, 2);
    if (core != "pi") throw InvalidArgument("expected an angle, got '" + s + "'");
    return num * std::numbers::pi / den;
  }
  return to_double(s);
}

long long to_int(const std::string& s) {
  long long v = 0;
  const auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc() || p != s.data() + s.size()) throw InvalidArgument("expected an integer, got '" + s + "'");
  return v;
}

bool to_bool(const std::string& s) {
  if (s == "true" || s == "1" || s == "yes") return true;
  if (s == "false" || s == "0" || s == "no") return false;
  throw InvalidArgument("expected a boolean, got '" + s + "'");
}

std::vector<double> to_doubles(const std::string& s) {
  std::vector<double> v;
  for (const std::string& x : split(s)) v.push_back(to_double(x));
  return v;
}

std::vector<int> to_ints(const std::string& s) {
  std::vector<int> v;
  for (const std::string& x : split(s)) v.push_back(static_cast<int>(to_int(x)));
  return v;
}

Eigen::VectorXd to_vector(const std::string& s) {
  const std::vector<double> v = to_doubles(s);
  return Eigen::Map<const Eigen::VectorXd>(v.data(), static_cast<Eigen::Index>(v.size()));
}

using Setter = std::function<void(ExperimentConfig&, const std::string&)>;

struct KeySpec {
  std::string help;
  Setter set;
};

const std::map<std::string, KeySpec>& key_table() {
  static const std::map<std::string, KeySpec> table = {
      {"experiment", {"experiment id", [](auto& c, auto& v) { c.experiment = v; }}},
      {"experiment.parts", {"subset of check groups", [](auto& c, auto& v) { c.parts = split(v); }}},
      {"domain.d", {"dimension d", [](auto& c, auto& v) { c.d = static_cast<int>(to_int(v)); }}},
      {"domain.n", {"number of weighted axes n", [](auto& c, auto& v) { c.n = static_cast<int>(to_int(v)); }}},
      {"domain.L", {"box half-width L", [](auto& c, auto& v) { c.L = to_double(v); }}},
      {"grid.cells", {"cells per axis (one value or d values)", [](auto& c, auto& v) { c.cells = to_ints(v); }}},
      {"grid.grading", {"auto | uniform | geometric", [](auto& c, auto& v) { c.grading = v; }}},
      {"grid.ratio", {"geometric grading ratio", [](auto& c, auto& v) { c.ratio = to_double(v); }}},
      {"grid.refinements", {"cells per axis of the refinement ladder", [](auto& c, auto& v) { c.refinements = to_ints(v); }}},
      {"weight.a", {"exponents a_i", [](auto& c, auto& v) { c.a = to_vector(v); }}},
      {"weight.eps", {"regularization eps_i", [](auto& c, auto& v) { c.eps = to_vector(v); }}},
      {"weight.supersingular", {"allow a_i <= -1", [](auto& c, auto& v) { c.supersingular = to_bool(v); }}},
      {"coefficients.preset", {"identity | smooth_block | a_theta | random", [](auto& c, auto& v) { c.coefficients = v; }}},
      {"coefficients.theta", {"angle of A_theta", [](auto& c, auto& v) { c.theta = to_angle(v); }}},
      {"data.preset", {"manufactured | homogeneous | u_theta", [](auto& c, auto& v) { c.data = v; }}},
      {"solver.tol", {"relative residual tolerance", [](auto& c, auto& v) { c.tol = to_double(v); }}},
      {"seed", {"master seed", [](auto& c, auto& v) { c.seed = static_cast<std::uint64_t>(to_int(v)); }}},
      {"output.dir", {"output directory", [](auto& c, auto& v) { c.out_dir = v; }}},
      {"stability.eps", {"eps sweep", [](auto& c, auto& v) { c.sweep_eps = to_doubles(v); }}},
      {"stability.alpha", {"Holder exponent", [](auto& c, auto& v) { c.alpha = to_double(v); }}},
      {"stability.radii", {"corner sweep radii", [](auto& c, auto& v) { c.corner_radii = to_doubles(v); }}},
      {"homotopy.base", {"first eps of the schedule", [](auto& c, auto& v) { c.homotopy_base = to_double(v); }}},
      {"homotopy.steps", {"positive entries of the schedule", [](auto& c, auto& v) { c.homotopy_steps = static_cast<int>(to_int(v)); }}},
      {"homotopy.tol_conv", {"relative convergence tolerance", [](auto& c, auto& v) { c.tol_conv = to_double(v); }}},
      {"inequalities.members", {"test family size", [](auto& c, auto& v) { c.members = static_cast<int>(to_int(v)); }}},
      {"inequalities.calibration", {"calibration family size", [](auto& c, auto& v) { c.calibration = static_cast<int>(to_int(v)); }}},
      {"inequalities.eps", {"eps grid of the sweeps", [](auto& c, auto& v) { c.ineq_eps = to_doubles(v); }}},
      {"inequalities.hardy_a", {"exponents of the Hardy sweep", [](auto& c, auto& v) { c.hardy_a = to_doubles(v); }}},
      {"inequalities.q", {"Sobolev exponent", [](auto& c, auto& v) { c.q = to_double(v); }}},
      {"liouville.sizes", {"box half-widths", [](auto& c, auto& v) { c.liouville_sizes = to_doubles(v); }}},
      {"liouville.matrices", {"random admissible matrices", [](auto& c, auto& v) { c.matrices = static_cast<int>(to_int(v)); }}},
      {"doubling.samples", {"samples per exponent draw", [](auto& c, auto& v) { c.samples = static_cast<int>(to_int(v)); }}},
      {"doubling.head", {"samples in the reference head", [](auto& c, auto& v) { c.head = static_cast<int>(to_int(v)); }}},
      {"doubling.draws", {"random exponent draws", [](auto& c, auto& v) { c.draws = static_cast<int>(to_int(v)); }}},
      {"reflection.a", {"exponents of the reflection check", [](auto& c, auto& v) { c.reflection_a = to_doubles(v); }}},
  };
  return table;
}

void fail(const std::string& what) { throw ValidationError(what); }

std::string num(double v) {
  std::ostringstream s;
  s << v;
  return s.str();
}

const std::map<std::string, std::vector<std::string>>& part_table() {
  static const std::map<std::string, std::vector<std::string>> t = {
      {"convergence", {"rates", "reflection"}},
      {"closed_forms", {"u_theta", "psi", "phi"}},
      {"inequalities", {"hardy", "trace", "poincare", "poincare_wirtinger", "sobolev", "l1_ckn", "exponents"}},
      {"liouville", {"random", "control"}},
  };
  return t;
}

}  // namespace

const std::map<std::string, std::string>& config_keys() {
  static const std::map<std::string, std::string> keys = [] {
    std::map<std::string, std::string> k;
    for (const auto& [name, spec] : key_table()) k[name] = spec.help;
    return k;
  }();
  return keys;
}

ExperimentConfig parse_config(const std::string& text) {
  ExperimentConfig cfg;
  std::istringstream in(text);
  std::string raw;
  int line = 0;
  while (std::getline(in, raw)) {
    ++line;
    const auto hash = raw.find('#');
    const std::string s = trim(hash == std::string::npos ? raw : raw.substr(0, hash));
    if (s.empty()) continue;
    const auto eq = s.find('=');
    if (eq == std::string::npos) throw LineError(line, "expected 'key = value'");
    const std::string key = trim(s.substr(0, eq)), value = trim(s.substr(eq + 1));
    if (key.empty()) throw LineError(line, "empty key");
    if (value.empty()) throw LineError(line, "empty value for '" + key + "'");
    const auto it = key_table().find(key);
    if (it == key_table().end()) throw LineError(line, "unknown key '" + key + "'");
    if (cfg.explicit_keys.count(key)) throw LineError(line, "duplicate key '" + key + "'");
    try {
      it->second.set(cfg, value);
    } catch (const InvalidArgument& e) {
      throw LineError(line, key + ": " + e.what());
    }
    cfg.explicit_keys.insert(key);
    cfg.echo.emplace_back(key, value);
  }
  validate(cfg);
  return cfg;
}

void validate(ExperimentConfig& c) {
  const auto& ids = experiment_ids();
  if (c.experiment.empty()) fail("experiment: missing");
  if (std::find(ids.begin(), ids.end(), c.experiment) == ids.end()) fail("experiment: unknown id '" + c.experiment + "'");

  const auto pt = part_table().find(c.experiment);
  for (const std::string& p : c.parts) {
    if (pt == part_table().end() || std::find(pt->second.begin(), pt->second.end(), p) == pt->second.end())
      fail("experiment.parts: '" + p + "' is not a check group of " + c.experiment);
  }

  if (c.d < 1 || c.d > 3) fail("domain.d must lie in {1, 2, 3}");
  if (c.n < 1 || c.n > c.d) fail("domain.n must lie in {1, ..., d}");
  if (!(c.L > 0.0)) fail("domain.L must be positive");

  if (c.a.size() == 0) c.a = Eigen::VectorXd::Ones(c.n);
  if (c.eps.size() == 0) c.eps = Eigen::VectorXd::Zero(c.n);
  if (c.a.size() != c.n) fail("weight.a must have n = " + std::to_string(c.n) + " entries");
  if (c.eps.size() != c.n) fail("weight.eps must have n = " + std::to_string(c.n) + " entries");
  for (int i = 0; i < c.n; ++i) {
    if (!(c.eps[i] >= 0.0 && c.eps[i] <= 1.0)) fail("weight.eps: entries must lie in [0, 1]");
    if (c.a[i] <= -1.0 && !c.supersingular) fail("weight.a: a_i ≤ −1 requires weight.supersingular = true");
  }
  if (c.supersingular && c.experiment != "inequalities") {
    fail("weight.supersingular: only the inequalities experiment accepts a_i ≤ −1");
  }

  if (c.grading != "auto" && c.grading != "uniform" && c.grading != "geometric")
    fail("grid.grading must be auto, uniform or geometric");
  if (!(c.ratio > 0.0 && c.ratio < 1.0)) fail("grid.ratio must lie in (0, 1)");
  if (!c.cells.empty()) {
    if (c.cells.size() != 1 && static_cast<int>(c.cells.size()) != c.d) fail("grid.cells needs 1 or d values");
    for (int k : c.cells)
      if (k < 2) fail("grid.cells: at least 2 cells per axis");
  }
  if (c.refinements.size() < 2) fail("grid.refinements needs at least two levels");
  for (std::size_t j = 0; j < c.refinements.size(); ++j) {
    if (c.refinements[j] < 2) fail("grid.refinements: at least 2 cells per axis");
    if (j > 0 && c.refinements[j] <= c.refinements[j - 1]) fail("grid.refinements must increase");
  }

  const std::vector<std::string> presets = {"identity", "smooth_block", "a_theta", "random"};
  if (std::find(presets.begin(), presets.end(), c.coefficients) == presets.end())
    fail("coefficients.preset: unknown preset '" + c.coefficients + "'");
  if (c.coefficients == "a_theta") {
    if (c.d != 2 || c.n != 2) fail("coefficients.preset = a_theta needs d = n = 2");
    if (!(c.theta > 0.0 && c.theta < std::numbers::pi)) fail("coefficients.theta must lie in (0, pi)");
  }
  if (c.coefficients == "random" && c.experiment != "liouville")
    fail("coefficients.preset = random is a liouville preset");

  if (!(c.tol > 0.0 && c.tol <= 1e-2)) fail("solver.tol must lie in (0, 1e-2]");

  const std::string& e = c.experiment;
  if (e == "convergence" || e == "stability0" || e == "stability1" || e == "homotopy") {
    std::vector<std::string> ok = {"manufactured"};
    if (e == "homotopy") ok.push_back("homogeneous");
    if (e == "stability0" || e == "stability1") ok.push_back("u_theta");
    if (std::find(ok.begin(), ok.end(), c.data) == ok.end())
      fail("data.preset: '" + c.data + "' is not available for " + e);
    if (c.data == "manufactured" && c.coefficients != "identity")
      fail("data.preset = manufactured is built for coefficients.preset = identity");
    if (c.data == "homogeneous" && c.coefficients != "identity" && c.coefficients != "smooth_block")
      fail("data.preset = homogeneous needs coefficients.preset identity or smooth_block");
    if (c.data == "u_theta") {
      if (c.coefficients != "a_theta") fail("data.preset = u_theta needs coefficients.preset = a_theta");
      if (c.a.cwiseAbs().maxCoeff() != 0.0 || c.eps.maxCoeff() != 0.0)
        fail("data.preset = u_theta needs a = 0 and eps = 0");
    } else if (c.d != 2 || c.n != 1) {
      fail("data.preset = " + c.data + " is defined for d = 2, n = 1");
    }
  }
  if (e == "stability0" || e == "stability1") {
    if (c.sweep_eps.size() < 2) fail("stability.eps needs at least two values");
    for (double v : c.sweep_eps)
      if (!(v >= 0.0 && v <= 1.0)) fail("stability.eps: entries must lie in [0, 1]");
    for (double r : c.corner_radii)
      if (!(r > 0.0 && r <= c.L)) fail("stability.radii must lie in (0, L]");
  }
  if (c.has("stability.alpha") && !(c.alpha > 0.0 && c.alpha < 1.0)) fail("stability.alpha must lie in (0, 1)");
  if (e == "homotopy") {
    if (!(c.homotopy_base > 0.0 && c.homotopy_base <= 1.0)) fail("homotopy.base must lie in (0, 1]");
    if (c.homotopy_steps < 1) fail("homotopy.steps must be positive");
    if (!(c.tol_conv > 0.0)) fail("homotopy.tol_conv must be positive");
  }
  if (e == "inequalities") {
    if (c.d > 2) fail("inequalities: ball quadrature supports d <= 2");
    if (c.members < 1 || c.calibration < 1) fail("inequalities: family sizes must be positive");
    if (c.ineq_eps.empty()) fail("inequalities.eps must not be empty");
    for (double v : c.ineq_eps)
      if (!(v >= 0.0 && v <= 1.0)) fail("inequalities.eps: entries must lie in [0, 1]");
    for (double v : c.hardy_a)
      if (v <= -1.0) fail("inequalities.hardy_a: a_i ≤ −1 is outside the Hardy sweep");
    if (c.has("inequalities.q")) {
      const double cap = critical_exponent(c.d, c.a);
      if (!(c.q >= 2.0) || !std::isfinite(c.q) || c.q > cap) {
        fail("inequalities.q = " + num(c.q) + " violates the Sobolev exponent cap: need 2 ≤ q ≤ 2*_a = " +
             (std::isfinite(cap) ? num(cap) : std::string("inf")));
      }
    }
    if (c.a.minCoeff() <= -1.0 && c.d != 1) fail("weight.a: a_i ≤ −1 is supported for d = 1 only");
  }
  if (e == "liouville") {
    if (c.liouville_sizes.empty()) fail("liouville.sizes must not be empty");
    for (double v : c.liouville_sizes)
      if (!(v > 0.0)) fail("liouville.sizes must be positive");
    if (c.matrices < 1) fail("liouville.matrices must be positive");
    if (c.d == c.n && c.coefficients == "random") fail("liouville: random matrices need d > n");
  }
  if (e == "doubling") {
    if (c.draws < 1 || c.head < 1 || c.samples <= c.head) fail("doubling: need draws >= 1 and samples > head >= 1");
  }
  for (double v : c.reflection_a)
    if (v <= -1.0) fail("reflection.a: a_i ≤ −1 is not admissible");
}

}  // namespace orthodeg::cli
