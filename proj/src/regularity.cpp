#include "orthodeg/regularity.hpp"

#include <algorithm>
#include <cmath>
#include <random>

namespace orthodeg {

namespace {

// Per-axis node index range [first, last] of the grid nodes in `region`.
struct IndexBox {
  std::array<int, 3> first{};
  std::array<int, 3> last{};
  int count = 1;
};

IndexBox index_box(const TensorGrid& grid, const Box& region) {
  require(region.dim() == grid.d(), "region dimension does not match the grid");
  const double tol = 1e-12 * grid.L();
  IndexBox ib;
  for (int k = 0; k < grid.d(); ++k) {
    const Eigen::VectorXd& c = grid.axis(k);
    int f = -1, l = -1;
    for (int j = 0; j < c.size(); ++j) {
      if (c[j] >= region.lo[k] - tol && c[j] <= region.hi[k] + tol) {
        if (f < 0) f = j;
        l = j;
      }
    }
    if (f < 0) throw EmptyRegion("no grid node lies in the region");
    ib.first[k] = f;
    ib.last[k] = l;
    ib.count *= l - f + 1;
  }
  return ib;
}

SeminormReport seminorm_core(const TensorGrid& grid, const Eigen::MatrixXd& vals, const Box& region, double alpha,
                             std::uint64_t seed, int samples_per_band) {
  require(alpha > 0.0 && alpha <= 1.0, "holder_seminorm: alpha must lie in (0, 1]");
  const IndexBox ib = index_box(grid, region);
  if (ib.count < 2) throw EmptyRegion("holder_seminorm: region holds fewer than two nodes");
  const int d = grid.d();

  std::vector<int> nodes;
  nodes.reserve(ib.count);
  {
    std::array<int, 3> m = ib.first;
    for (int c = 0; c < ib.count; ++c) {
      nodes.push_back(grid.node_index(m));
      for (int k = 0; k < d; ++k) {
        if (++m[k] <= ib.last[k]) break;
        m[k] = ib.first[k];
      }
    }
  }
  std::vector<Point> pts(grid.num_nodes());
  for (int idx : nodes) pts[idx] = grid.node(idx);

  SeminormReport rep;
  rep.alpha = alpha;
  rep.region = region;
  auto visit = [&](int a, int b) {
    const double dist = (pts[a] - pts[b]).norm();
    if (dist == 0.0) return;
    const double q = (vals.row(a) - vals.row(b)).norm() / std::pow(dist, alpha);
    if (q > rep.value) {
      rep.value = q;
      rep.node_a = a;
      rep.node_b = b;
    }
  };

  if (ib.count <= kExhaustiveNodes) {
    rep.mode = PairSampling::exhaustive;
    for (std::size_t i = 0; i < nodes.size(); ++i)
      for (std::size_t j = i + 1; j < nodes.size(); ++j) visit(nodes[i], nodes[j]);
    if (rep.node_a < 0) {
      rep.node_a = nodes[0];
      rep.node_b = nodes[1];
    }
    return rep;
  }

  rep.mode = PairSampling::stratified;
  for (int idx : nodes) {
    auto m = grid.node_multi(idx);
    for (int k = 0; k < d; ++k) {
      if (m[k] == ib.last[k]) continue;
      auto w = m;
      ++w[k];
      visit(idx, grid.node_index(w));
    }
  }
  double diam = 0.0, hmin = INFINITY;
  for (int k = 0; k < d; ++k) {
    const Eigen::VectorXd& c = grid.axis(k);
    diam += std::pow(c[ib.last[k]] - c[ib.first[k]], 2);
    for (int j = ib.first[k]; j < ib.last[k]; ++j) hmin = std::min(hmin, c[j + 1] - c[j]);
  }
  diam = std::sqrt(diam);
  std::mt19937_64 rng(seed);
  std::uniform_int_distribution<std::size_t> pick(0, nodes.size() - 1);
  for (double hi = diam; hi >= hmin; hi *= 0.5) {
    const double lo = 0.5 * hi;
    int hits = 0;
    for (long attempt = 0; hits < samples_per_band && attempt < 4L * samples_per_band; ++attempt) {
      const int a = nodes[pick(rng)];
      std::array<int, 3> w{};
      for (int k = 0; k < d; ++k) {
        const Eigen::VectorXd& c = grid.axis(k);
        const double z = pts[a][k];
        const auto* begin = c.data() + ib.first[k];
        const auto* end = c.data() + ib.last[k] + 1;
        const int l = static_cast<int>(std::lower_bound(begin, end, z - hi) - c.data());
        const int r = static_cast<int>(std::upper_bound(begin, end, z + hi) - c.data()) - 1;
        w[k] = std::uniform_int_distribution<int>(l, r)(rng);
      }
      const int b = grid.node_index(w);
      const double dist = (pts[a] - pts[b]).norm();
      if (dist < lo || dist > hi) continue;
      ++hits;
      visit(a, b);
    }
  }
  return rep;
}

Eigen::MatrixXd stack(const std::vector<DiscreteField>& u) {
  require(!u.empty(), "holder_seminorm: no components");
  Eigen::MatrixXd vals(u[0].values.size(), static_cast<Eigen::Index>(u.size()));
  for (std::size_t c = 0; c < u.size(); ++c) {
    require(u[c].grid == u[0].grid, "holder_seminorm: components must share a grid");
    vals.col(static_cast<Eigen::Index>(c)) = u[c].values;
  }
  return vals;
}

double lp_of_field(const TensorGrid& grid, const WeightSpec& spec, const std::function<double(const Point&)>& g,
                   double p) {
  std::vector<int> all(grid.num_cells());
  for (int c = 0; c < grid.num_cells(); ++c) all[c] = c;
  return weighted_lp(grid, spec, all, g, p);
}

double median(std::vector<double> v) {
  std::sort(v.begin(), v.end());
  const std::size_t n = v.size();
  return n % 2 ? v[n / 2] : 0.5 * (v[n / 2 - 1] + v[n / 2]);
}

}  // namespace

SeminormReport holder_seminorm(const DiscreteField& u, const Box& region, double alpha, std::uint64_t seed,
                               int samples_per_band) {
  return seminorm_core(*u.grid, u.values, region, alpha, seed, samples_per_band);
}

SeminormReport holder_seminorm(const std::vector<DiscreteField>& u, const Box& region, double alpha,
                               std::uint64_t seed, int samples_per_band) {
  return seminorm_core(*u.at(0).grid, stack(u), region, alpha, seed, samples_per_band);
}

double boundary_flux(const DiscreteField& u, const CoefficientField& A, const VectorField& F, int i,
                     const Box& region) {
  const TensorGrid& grid = *u.grid;
  require(i >= 0 && i < grid.n(), "boundary_flux: axis must be weighted");
  const int k = grid.d() - grid.n() + i;
  const std::vector<DiscreteField> grad = gradient_recover(u);
  const double tol = 1e-12 * grid.L();
  double out = 0.0;
  for (int idx = 0; idx < grid.num_nodes(); ++idx) {
    if (!grid.tag(idx).on_sigma(i)) continue;
    const Point z = grid.node(idx);
    if (!region.contains(z, tol)) continue;
    Point g(grid.d());
    for (int j = 0; j < grid.d(); ++j) g[j] = grad[j].values[idx];
    Point inside = z;
    inside[k] += tol;
    double flux = (A(z, inside) * g)[k];
    if (F) flux += F(z, inside)[k];
    out = std::max(out, std::abs(flux));
  }
  return out;
}

double boundary_flux(const DiscreteField& u, const CoefficientField& A, const VectorField& F, int i) {
  return boundary_flux(u, A, F, i, u.grid->bounds());
}

double linf_bound_ratio(const DiscreteField& u, const ProblemData& data, const Box& inner) {
  const TensorGrid& grid = *u.grid;
  const double D = grid.d() + data.spec.a_plus_sum();
  if (!(data.p > 0.5 * D) || !(data.q > D)) {
    throw InvalidArgument("linf_bound_ratio: need p > (d + <a+>)/2 and q > d + <a+>");
  }
  double sup = 0.0;
  for (int idx : restrict_subregion(grid, inner)) sup = std::max(sup, std::abs(u.values[idx]));
  double den = weighted_norms(u, data.spec, grid.bounds(), data.p).L2;
  if (data.f) den += lp_of_field(grid, data.spec, [&](const Point& z) { return data.f(z); }, data.p);
  if (data.F) den += lp_of_field(grid, data.spec, [&](const Point& z) { return data.F(z).norm(); }, data.q);
  require(den > 0.0, "linf_bound_ratio: zero normalizer");
  return sup / den;
}

std::string to_string(Verdict v) {
  switch (v) {
    case Verdict::pass:
      return "PASS";
    case Verdict::fail:
      return "FAIL";
    case Verdict::invalid_region:
      return "INVALID_REGION";
  }
  return "FAIL";
}

Verdict spread_verdict(const std::vector<double>& values, double* max_out, double* median_out) {
  require(!values.empty(), "spread_verdict: empty sequence");
  const double mx = *std::max_element(values.begin(), values.end());
  const double md = median(values);
  if (max_out) *max_out = mx;
  if (median_out) *median_out = md;
  return mx <= kStabilitySlack * md ? Verdict::pass : Verdict::fail;
}

bool touches_outer_boundary(const TensorGrid& grid, const Box& inner) {
  const Box b = grid.bounds();
  const double tol = 1e-12 * grid.L();
  for (int k = 0; k < grid.d(); ++k) {
    if (inner.hi[k] >= b.hi[k] - tol) return true;
    const bool lower_outer = !grid.weighted(k) || grid.reflected(k);
    if (lower_outer && inner.lo[k] <= b.lo[k] + tol) return true;
  }
  return false;
}

StabilityResult stability_sweep(const std::function<ProblemData(double)>& problem,
                                std::shared_ptr<const TensorGrid> grid, const std::vector<double>& eps,
                                double alpha, int order, const Box& inner, double tol) {
  require(order == 0 || order == 1, "stability_sweep: order must be 0 or 1");
  require(!eps.empty(), "stability_sweep: empty eps list");
  StabilityResult out;
  out.alpha = alpha;
  out.order = order;
  if (touches_outer_boundary(*grid, inner)) {
    out.verdict = Verdict::invalid_region;
    return out;
  }
  std::vector<double> ratios;
  for (double e : eps) {
    const ProblemData data = problem(e);
    StabilityRow row;
    row.eps = e;
    const DiscreteField u = solve_problem(grid, data, tol, &row.solve);
    if (!row.solve.converged) throw SolverFailure("stability_sweep: solver did not converge at eps = " + std::to_string(e));
    row.seminorm = order == 0 ? holder_seminorm(u, inner, alpha).value
                              : holder_seminorm(gradient_recover(u), inner, alpha).value;
    row.normalizer = weighted_norms(u, data.spec, grid->bounds(), data.p).L2;
    if (data.f) row.normalizer += lp_of_field(*grid, data.spec, [&](const Point& z) { return data.f(z); }, data.p);
    if (data.F) {
      row.normalizer += lp_of_field(*grid, data.spec, [&](const Point& z) { return data.F(z).norm(); }, data.q);
    }
    row.ratio = row.seminorm / row.normalizer;
    ratios.push_back(row.ratio);
    out.rows.push_back(row);
  }
  out.verdict = spread_verdict(ratios, &out.max_ratio, &out.median_ratio);
  return out;
}

CornerResult corner_sweep(const DiscreteField& u, const std::vector<double>& radii, double alpha, int order,
                          int cells) {
  require(order == 0 || order == 1, "corner_sweep: order must be 0 or 1");
  const TensorGrid& grid = *u.grid;
  CornerResult out;
  std::vector<double> values;
  for (double r : radii) {
    // v(z) = u(r z) - u(0), so [D^order u]_alpha = [D^order v]_alpha / r^(order + alpha).
    const DiscreteField v = blowup_rescale(u, {Point::Zero(grid.d()), r, 0.0, 1.0}, cells);
    const Box unit = v.grid->bounds();
    const double s = order == 0 ? holder_seminorm(v, unit, alpha).value
                                : holder_seminorm(gradient_recover(v), unit, alpha).value;
    const double value = s / std::pow(r, order + alpha);
    out.rows.push_back({r, value});
    values.push_back(value);
  }
  out.verdict = spread_verdict(values, &out.max_value, &out.median_value);
  return out;
}

DiscreteField blowup_rescale(const DiscreteField& u, const RescaleSpec& rs, int cells) {
  require(rs.r > 0.0 && rs.M > 0.0, "blowup_rescale: need r > 0 and M > 0");
  require(cells >= 2, "blowup_rescale: need at least two cells");
  const TensorGrid& grid = *u.grid;
  const int d = grid.d();
  require(rs.center.size() == d, "blowup_rescale: center dimension");
  const Box b = grid.bounds();
  const double tol = 1e-12 * grid.L();
  std::vector<Eigen::VectorXd> coords;
  for (int k = 0; k < d; ++k) {
    const double lo = grid.weighted(k) && rs.center[k] == 0.0 ? 0.0 : -1.0;
    if (rs.center[k] + rs.r * lo < b.lo[k] - tol || rs.center[k] + rs.r > b.hi[k] + tol) {
      throw OutOfDomain("blowup_rescale: rescaled box leaves the domain");
    }
    coords.push_back(Eigen::VectorXd::LinSpaced(cells + 1, lo, 1.0));
  }
  auto out_grid = std::make_shared<const TensorGrid>(grid.n(), 1.0, std::move(coords));
  const double u0 = u(rs.center);
  const double scale = 1.0 / (rs.M * std::pow(rs.r, rs.alpha));
  Eigen::VectorXd v(out_grid->num_nodes());
  for (int idx = 0; idx < out_grid->num_nodes(); ++idx) {
    Point z = rs.center + rs.r * out_grid->node(idx);
    for (int k = 0; k < d; ++k) z[k] = std::clamp(z[k], b.lo[k], b.hi[k]);
    v[idx] = (u(z) - u0) * scale;
  }
  return DiscreteField(out_grid, std::move(v));
}

}  // namespace orthodeg
