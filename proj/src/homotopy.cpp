#include "orthodeg/homotopy.hpp"

#include <algorithm>
#include <cmath>
#include <future>
#include <limits>
#include <ostream>

namespace orthodeg {

HomotopySchedule HomotopySchedule::geometric(int n, double base, int steps, std::vector<int> pinned) {
  require(n >= 1 && steps >= 1 && base > 0.0 && base <= 1.0, "HomotopySchedule: bad geometric parameters");
  HomotopySchedule s;
  for (int k = 0; k < steps; ++k) {
    Eigen::VectorXd e = Eigen::VectorXd::Constant(n, base * std::ldexp(1.0, -k));
    for (int i : pinned) e[i] = 0.0;
    s.eps.push_back(e);
  }
  s.eps.push_back(Eigen::VectorXd::Zero(n));
  return s;
}

void HomotopySchedule::validate(int n) const {
  require(eps.size() >= 2, "HomotopySchedule: need at least two entries");
  double prev = std::numeric_limits<double>::infinity();
  for (const Eigen::VectorXd& e : eps) {
    require(e.size() == n, "HomotopySchedule: entry size must equal n");
    require(e.minCoeff() >= 0.0 && e.maxCoeff() <= 1.0, "HomotopySchedule: entries must lie in [0, 1]");
    const double m = e.maxCoeff();
    require(m < prev || m == 0.0, "HomotopySchedule: max norm must decrease strictly until it reaches 0");
    prev = m;
  }
  require(eps.back().maxCoeff() == 0.0, "HomotopySchedule: last entry must be zero");
}

double reweight_factor(const WeightSpec& spec, const Eigen::VectorXd& eps, const Point& z, double p) {
  double f = 1.0;
  for (int i = 0; i < spec.n(); ++i) {
    const double ap = std::max(spec.a(i), 0.0);
    if (ap == 0.0 || eps[i] == 0.0) continue;
    const double y = z[spec.axis(i)];
    f *= std::pow(y * y / (eps[i] * eps[i] + y * y), ap / (2.0 * p));
  }
  return f;
}

std::pair<ScalarField, VectorField> reweight_data(const ScalarField& f, const VectorField& F, const WeightSpec& spec,
                                                  const Eigen::VectorXd& eps, double p, double q) {
  require(p >= 2.0 && q >= 2.0, "reweight_data: need p, q >= 2");
  require(eps.size() == spec.n(), "reweight_data: eps size must equal n");
  ScalarField fk;
  VectorField Fk;
  if (f) {
    fk = ScalarField([=](const Point& z, const Point& in) { return reweight_factor(spec, eps, z, p) * f(z, in); });
  }
  if (F) {
    Fk = VectorField([=](const Point& z, const Point& in) -> Point {
      return reweight_factor(spec, eps, z, q) * F(z, in);
    });
  }
  return {fk, Fk};
}

Cutoff::Cutoff(Point c, double r_, double r_outer_) : center(std::move(c)), r(r_), r_outer(r_outer_) {
  require(r > 0.0 && r < r_outer, "Cutoff: need 0 < r < r_outer");
}

double Cutoff::value(const Point& z) const {
  const double s = (z - center).norm();
  if (s <= r) return 1.0;
  if (s >= r_outer) return 0.0;
  const double t = (s - r) / (r_outer - r);
  return 1.0 - t * t * t * (10.0 - 15.0 * t + 6.0 * t * t);
}

Point Cutoff::gradient(const Point& z) const {
  const Point dz = z - center;
  const double s = dz.norm();
  if (s <= r || s >= r_outer) return Point::Zero(z.size());
  const double t = (s - r) / (r_outer - r);
  const double dxi = -30.0 * t * t * (1.0 - t) * (1.0 - t) / (r_outer - r);
  return dxi * dz / s;
}

LocalizedProblem cutoff_localize(const SmoothFunction& u, const CoefficientField& A, const VectorField& F,
                                 const Cutoff& xi) {
  LocalizedProblem out;
  out.u.value = [u, xi](const Point& z) { return xi.value(z) * u.value(z); };
  out.u.gradient = [u, xi](const Point& z) -> Point {
    return xi.value(z) * u.gradient(z) + u.value(z) * xi.gradient(z);
  };
  out.g = ScalarField([u, A, F, xi](const Point& z) {
    const Point gx = xi.gradient(z);
    double v = -(A(z) * u.gradient(z)).dot(gx);
    if (F) v -= F(z).dot(gx);
    return v;
  });
  out.G = VectorField([u, A, xi](const Point& z) -> Point { return -u.value(z) * (A(z) * xi.gradient(z)); });
  return out;
}

std::pair<ScalarField, VectorField> cutoff_localize(const ScalarField& f, const VectorField& F, const Cutoff& xi) {
  ScalarField fl;
  VectorField Fl;
  if (f) fl = ScalarField([f, xi](const Point& z, const Point& in) { return xi.value(z) * f(z, in); });
  if (F) Fl = VectorField([F, xi](const Point& z, const Point& in) -> Point { return xi.value(z) * F(z, in); });
  return {fl, Fl};
}

namespace {

double h1(const WeightedNorms& w) { return std::hypot(w.L2, w.H1_semi); }

}  // namespace

HomotopyReport run_homotopy(const ProblemData& data, const HomotopySchedule& schedule,
                            std::shared_ptr<const TensorGrid> grid, const HomotopyOptions& options) {
  const WeightSpec& spec = data.spec;
  const int n = spec.n(), d = spec.d();
  schedule.validate(n);
  const double L = grid->L();
  require(options.k_fraction > 0.0 && options.k_fraction < 1.0, "run_homotopy: k_fraction must lie in (0, 1)");

  HomotopyReport rep;
  rep.K = grid->bounds();
  for (int i = 0; i < n; ++i) rep.K.lo[spec.axis(i)] = std::max(rep.K.lo[spec.axis(i)], options.k_fraction * L);

  const std::size_t m = schedule.size();
  std::vector<ProblemData> problems(m);
  for (std::size_t k = 0; k < m; ++k) {
    ProblemData pk = data;
    pk.spec = spec.with_eps(schedule.eps[k]);
    if (options.reweight) std::tie(pk.f, pk.F) = reweight_data(data.f, data.F, spec, schedule.eps[k], data.p, data.q);
    problems[k] = std::move(pk);
  }

  std::vector<DiscreteField> fields(m);
  std::vector<SolveReport> reports(m);
  auto solve_one = [&](std::size_t k) {
    fields[k] = solve_problem(grid, problems[k], options.solve_tol, &reports[k]);
    if (!reports[k].converged) {
      throw SolverFailure("run_homotopy: solve did not converge at eps_max = " +
                          std::to_string(schedule.eps[k].maxCoeff()));
    }
  };
  if (options.threads > 1) {
    for (std::size_t start = 0; start < m; start += options.threads) {
      std::vector<std::future<void>> jobs;
      for (std::size_t k = start; k < std::min(m, start + options.threads); ++k)
        jobs.push_back(std::async(std::launch::async, solve_one, k));
      for (auto& j : jobs) j.get();
    }
  } else {
    for (std::size_t k = 0; k < m; ++k) solve_one(k);
  }

  const DiscreteField& u0 = fields.back();
  const WeightSpec limit = spec.with_eps(schedule.eps.back());
  rep.limit_H1_K = h1(weighted_norms(u0, limit, rep.K));
  const bool homogeneous = !data.f && !data.F;
  const Box inner = OrthantBox(d, n, L).half_box();
  const WeightedNorms limit_box = weighted_norms(u0, limit, grid->bounds());
  const double limit_energy = limit_box.H1_semi * limit_box.H1_semi + limit_box.L2 * limit_box.L2 / (L * L);

  double worst_residual = 0.0;
  for (std::size_t k = 0; k < m; ++k) {
    HomotopyRow row;
    row.eps_max = schedule.eps[k].maxCoeff();
    row.solve = reports[k];
    row.energy_norm = h1(weighted_norms(fields[k], problems[k].spec, grid->bounds()));
    DiscreteField diff = fields[k];
    diff.values -= u0.values;
    row.diff_H1_K = h1(weighted_norms(diff, limit, rep.K));
    if (homogeneous) {
      const double local = weighted_norms(fields[k], problems[k].spec, inner).H1_semi;
      row.energy_ratio = limit_energy > 0.0 ? local * local / limit_energy : 0.0;
    } else {
      row.energy_ratio = std::numeric_limits<double>::quiet_NaN();
    }
    row.residual = weak_residual(fields[k], problems[k]);
    worst_residual = std::max(worst_residual, row.residual);
    rep.rows.push_back(row);
  }
  rep.limit_residual = rep.rows.back().residual;

  // Differences of the positive-eps entries.
  std::vector<double> tail;
  for (const HomotopyRow& row : rep.rows)
    if (row.eps_max > 0.0) tail.push_back(row.diff_H1_K);
  const double scale = std::max(rep.limit_H1_K, 1e-300);
  if (tail.empty()) {
    rep.eventually_decreasing = true;
    rep.converged = true;
  } else {
    const std::size_t from = tail.size() / 2;
    rep.eventually_decreasing = true;
    for (std::size_t j = from + 1; j < tail.size(); ++j)
      if (tail[j] > tail[j - 1] + 10.0 * options.solve_tol * scale) rep.eventually_decreasing = false;
    rep.converged = tail.back() <= options.tol_conv * scale + 10.0 * options.solve_tol * scale;
  }

  double first = 0.0;
  rep.energy_uniform = true;
  for (std::size_t k = 0; k < m; ++k) {
    if (k < 3) {
      first = std::max(first, rep.rows[k].energy_norm);
    } else if (rep.rows[k].energy_norm > 1.1 * first) {
      rep.energy_uniform = false;
    }
  }
  const double floor = 1e-12 * std::max(1.0, u0.values.cwiseAbs().maxCoeff());
  rep.limit_is_solution = rep.limit_residual <= 10.0 * worst_residual + floor;
  rep.pass = rep.eventually_decreasing && rep.converged && rep.energy_uniform && rep.limit_is_solution;
  return rep;
}

void write_homotopy_csv(std::ostream& out, const HomotopyReport& report) {
  out << "eps_max,energy_norm,diff_H1_K,energy_ratio\n";
  out.precision(12);
  for (const HomotopyRow& r : report.rows)
    out << r.eps_max << ',' << r.energy_norm << ',' << r.diff_H1_K << ',' << r.energy_ratio << '\n';
}

}  // namespace orthodeg
