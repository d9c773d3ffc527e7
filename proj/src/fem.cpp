#include "orthodeg/fem.hpp"

#include "orthodeg/quadrature.hpp"

#include <algorithm>
#include <array>
#include <chrono>
#include <cmath>
#include <limits>
#include <ostream>
#include <thread>

namespace orthodeg {

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) {
  return std::chrono::duration<double>(Clock::now() - t0).count();
}

// One-dimensional cell integrals  I[v][m][dm][n][dn] = int rho^a N_v B_m B_n dt
// where B is the hat N (d = 0) or its derivative (d = 1).
struct AxisTable {
  double I[2][2][2][2][2];
  // sum over n of I[v][m][dm][n][0]: the table without the third factor.
  double S[2][2][2];
};

using Poly = std::array<double, 4>;

Poly mul(const Poly& p, const Poly& q) {
  Poly r{0, 0, 0, 0};
  for (int i = 0; i < 4; ++i)
    for (int j = 0; i + j < 4; ++j) r[i + j] += p[i] * q[j];
  return r;
}

AxisTable make_table(const Eigen::VectorXd& mu, double h) {
  const Poly N[2] = {{1, -1, 0, 0}, {0, 1, 0, 0}};
  const Poly D[2] = {{-1 / h, 0, 0, 0}, {1 / h, 0, 0, 0}};
  AxisTable t{};
  for (int v = 0; v < 2; ++v)
    for (int m = 0; m < 2; ++m)
      for (int dm = 0; dm < 2; ++dm) {
        t.S[v][m][dm] = 0.0;
        for (int n = 0; n < 2; ++n)
          for (int dn = 0; dn < 2; ++dn) {
            const Poly p = mul(mul(N[v], dm ? D[m] : N[m]), dn ? D[n] : N[n]);
            double s = 0.0;
            for (int k = 0; k < 4; ++k) s += p[k] * mu[k];
            t.I[v][m][dm][n][dn] = s;
            if (dn == 0) t.S[v][m][dm] += s;
          }
      }
  return t;
}

std::vector<std::vector<AxisTable>> axis_tables(const TensorGrid& grid, const WeightSpec& spec) {
  require(spec.d() == grid.d() && spec.n() == grid.n(), "weight does not match the grid");
  std::vector<std::vector<AxisTable>> tables(grid.d());
  for (int k = 0; k < grid.d(); ++k) {
    const int i = spec.weighted_index(k);
    const Eigen::VectorXd& c = grid.axis(k);
    for (int j = 0; j + 1 < c.size(); ++j) {
      const double l = c[j], r = c[j + 1], h = r - l;
      Eigen::VectorXd mu(4);
      if (i < 0) {
        for (int p = 0; p < 4; ++p) mu[p] = h / (p + 1);
      } else {
        mu = local_moments(spec.a(i), spec.eps(i), l, r, 3);
      }
      tables[k].push_back(make_table(mu, h));
    }
  }
  return tables;
}

void check_integrable(const WeightSpec& spec) {
  for (int i = 0; i < spec.n(); ++i) {
    if (spec.eps(i) == 0.0 && spec.a(i) <= -1.0) {
      throw DivergentIntegral("weight exponent a_" + std::to_string(i + 1) +
                              " <= -1 is not integrable without regularization");
    }
  }
}

// Vertex value of a field seen from inside the cell. A non-finite vertex
// value (data singular on a face) is replaced by a value just inside.
template <typename Value, typename Fn>
Value vertex_value(const Fn& fn, const Point& z, const Point& center) {
  Value v = fn(z, center);
  bool finite;
  if constexpr (std::is_same_v<Value, double>) {
    finite = std::isfinite(v);
  } else {
    finite = v.allFinite();
  }
  if (finite) return v;
  const Point w = z + 1e-9 * (center - z);
  return fn(w, center);
}

struct CellData {
  std::array<int, 8> idx{};
  int verts = 0;
};

CellData cell_vertices(const TensorGrid& grid, int c) {
  CellData cd;
  cd.verts = 1 << grid.d();
  for (int v = 0; v < cd.verts; ++v) cd.idx[v] = grid.cell_vertex(c, v);
  return cd;
}

}  // namespace

DiscreteField::DiscreteField(std::shared_ptr<const TensorGrid> g, Eigen::VectorXd v)
    : grid(std::move(g)), values(std::move(v)) {
  require(grid && values.size() == grid->num_nodes(), "DiscreteField: length must equal the node count");
}

int DiscreteField::locate(const Point& z, const Point& inside) const {
  std::array<int, 3> m{0, 0, 0};
  for (int k = 0; k < grid->d(); ++k) {
    const Eigen::VectorXd& c = grid->axis(k);
    const int last = static_cast<int>(c.size()) - 2;
    auto it = std::upper_bound(c.data(), c.data() + c.size(), z[k]);
    int j = static_cast<int>(it - c.data()) - 1;
    if (j >= 0 && j <= last + 1 && c[j] == z[k] && inside[k] < z[k]) --j;
    m[k] = std::clamp(j, 0, last);
  }
  int cell = 0, stride = 1;
  for (int k = 0; k < grid->d(); ++k) {
    cell += m[k] * stride;
    stride *= grid->cells_on_axis(k);
  }
  return cell;
}

double DiscreteField::operator()(const Point& z) const {
  const int c = locate(z, z);
  const Box b = grid->cell_box(c);
  double s = 0.0;
  for (int v = 0; v < (1 << grid->d()); ++v) {
    double w = 1.0;
    for (int k = 0; k < grid->d(); ++k) {
      const double t = (z[k] - b.lo[k]) / (b.hi[k] - b.lo[k]);
      w *= (v >> k) & 1 ? t : 1.0 - t;
    }
    s += w * values[grid->cell_vertex(c, v)];
  }
  return s;
}

Point DiscreteField::gradient(int c, const Point& z) const {
  const Box b = grid->cell_box(c);
  const int d = grid->d();
  Point g = Point::Zero(d);
  for (int v = 0; v < (1 << d); ++v) {
    const double u = values[grid->cell_vertex(c, v)];
    for (int p = 0; p < d; ++p) {
      double w = 1.0;
      for (int k = 0; k < d; ++k) {
        const double h = b.hi[k] - b.lo[k];
        const double t = (z[k] - b.lo[k]) / h;
        const bool up = (v >> k) & 1;
        w *= k == p ? (up ? 1.0 : -1.0) / h : (up ? t : 1.0 - t);
      }
      g[p] += w * u;
    }
  }
  return g;
}

std::vector<DiscreteField> gradient_recover(const DiscreteField& u) {
  const TensorGrid& grid = *u.grid;
  const int d = grid.d(), verts = 1 << d, N = grid.num_nodes();
  std::vector<Eigen::VectorXd> g(d, Eigen::VectorXd::Zero(N));
  Eigen::VectorXd vol = Eigen::VectorXd::Zero(N);
  for (int c = 0; c < grid.num_cells(); ++c) {
    const Box b = grid.cell_box(c);
    const double v = (b.hi - b.lo).prod();
    for (int m = 0; m < verts; ++m) {
      const int idx = grid.cell_vertex(c, m);
      const Point gc = u.gradient(c, grid.node(idx));
      for (int k = 0; k < d; ++k) g[k][idx] += v * gc[k];
      vol[idx] += v;
    }
  }
  std::vector<DiscreteField> out;
  for (int k = 0; k < d; ++k) out.emplace_back(u.grid, g[k].cwiseQuotient(vol));
  return out;
}

DiscreteField interpolate(std::shared_ptr<const TensorGrid> grid, const std::function<double(const Point&)>& g) {
  Eigen::VectorXd v(grid->num_nodes());
  for (int i = 0; i < grid->num_nodes(); ++i) v[i] = g(grid->node(i));
  return DiscreteField(std::move(grid), std::move(v));
}

LinearSystem assemble(const TensorGrid& grid, const ProblemData& data, const AssemblyOptions& options) {
  const auto t0 = Clock::now();
  check_integrable(data.spec);
  require(data.A.d == grid.d(), "assemble: coefficient dimension does not match the grid");
  const auto tables = axis_tables(grid, data.spec);
  const int d = grid.d();
  const int N = grid.num_nodes();
  const int verts = 1 << d;
  const bool has_drift = static_cast<bool>(data.drift);

  auto work = [&](int c0, int c1, std::vector<Eigen::Triplet<double>>& trips,
                  std::vector<std::pair<int, double>>& b) {
    std::array<Mat, 8> Av;
    std::array<double, 8> fv{};
    std::array<Point, 8> Fv, bv;
    for (int c = c0; c < c1; ++c) {
      const auto cm = grid.cell_multi(c);
      const CellData cd = cell_vertices(grid, c);
      const Point center = grid.cell_center(c);
      const AxisTable* T[3];
      for (int k = 0; k < d; ++k) T[k] = &tables[k][cm[k]];
      for (int v = 0; v < verts; ++v) {
        const Point z = grid.node(cd.idx[v]);
        Av[v] = vertex_value<Mat>(data.A.A, z, center);
        fv[v] = data.f ? vertex_value<double>(data.f, z, center) : 0.0;
        Fv[v] = data.F ? vertex_value<Point>(data.F, z, center) : Point::Zero(d);
        if (has_drift) bv[v] = vertex_value<Point>(data.drift, z, center);
      }
      for (int m = 0; m < verts; ++m) {
        double load = 0.0;
        for (int v = 0; v < verts; ++v) {
          double prod = 1.0;
          for (int k = 0; k < d; ++k) prod *= T[k]->S[(v >> k) & 1][(m >> k) & 1][0];
          load += fv[v] * prod;
          for (int p = 0; p < d; ++p) {
            if (Fv[v][p] == 0.0) continue;
            double pr = 1.0;
            for (int k = 0; k < d; ++k) pr *= T[k]->S[(v >> k) & 1][(m >> k) & 1][p == k];
            load -= Fv[v][p] * pr;
          }
        }
        b.emplace_back(cd.idx[m], load);
        for (int n = 0; n < verts; ++n) {
          double kmn = 0.0;
          for (int v = 0; v < verts; ++v) {
            for (int p = 0; p < d; ++p)
              for (int q = 0; q < d; ++q) {
                const double a = Av[v](p, q);
                if (a == 0.0) continue;
                double pr = 1.0;
                for (int k = 0; k < d; ++k)
                  pr *= T[k]->I[(v >> k) & 1][(m >> k) & 1][p == k][(n >> k) & 1][q == k];
                kmn += a * pr;
              }
            if (has_drift) {
              for (int q = 0; q < d; ++q) {
                if (bv[v][q] == 0.0) continue;
                double pr = 1.0;
                for (int k = 0; k < d; ++k) pr *= T[k]->I[(v >> k) & 1][(m >> k) & 1][0][(n >> k) & 1][q == k];
                kmn += bv[v][q] * pr;
              }
            }
          }
          trips.emplace_back(cd.idx[m], cd.idx[n], kmn);
        }
      }
    }
  };

  const int cells = grid.num_cells();
  const int threads = std::clamp(options.threads, 1, std::max(1, cells));
  std::vector<std::vector<Eigen::Triplet<double>>> trips(threads);
  std::vector<std::vector<std::pair<int, double>>> loads(threads);
  if (threads == 1) {
    work(0, cells, trips[0], loads[0]);
  } else {
    std::vector<std::thread> pool;
    for (int t = 0; t < threads; ++t) {
      const int c0 = static_cast<int>(static_cast<long>(cells) * t / threads);
      const int c1 = static_cast<int>(static_cast<long>(cells) * (t + 1) / threads);
      pool.emplace_back(work, c0, c1, std::ref(trips[t]), std::ref(loads[t]));
    }
    for (auto& th : pool) th.join();
  }
  std::vector<Eigen::Triplet<double>> all;
  for (auto& t : trips) all.insert(all.end(), t.begin(), t.end());

  LinearSystem sys;
  sys.K.resize(N, N);
  sys.K.setFromTriplets(all.begin(), all.end());
  sys.b = Eigen::VectorXd::Zero(N);
  for (const auto& l : loads)
    for (const auto& [i, v] : l) sys.b[i] += v;
  sys.constrained.assign(N, 0);
  const SparseMatrix Kt = sys.K.transpose();
  const double scale = sys.K.coeffs().cwiseAbs().maxCoeff();
  const SparseMatrix diff = sys.K - Kt;
  const double asym = diff.nonZeros() ? diff.coeffs().cwiseAbs().maxCoeff() : 0.0;
  sys.symmetric = !has_drift && asym <= 1e-12 * scale;
  sys.assembly_seconds = seconds_since(t0);
  return sys;
}

void impose_dirichlet(LinearSystem& sys, const TensorGrid& grid, const ScalarField& g) {
  const int N = grid.num_nodes();
  Eigen::VectorXd gv = Eigen::VectorXd::Zero(N);
  sys.constrained.assign(N, 0);
  for (int i = 0; i < N; ++i) {
    if (!grid.tag(i).outer) continue;
    sys.constrained[i] = 1;
    const Point z = grid.node(i);
    gv[i] = g ? g(z) : 0.0;
  }
  for (int r = 0; r < sys.K.outerSize(); ++r) {
    for (SparseMatrix::InnerIterator it(sys.K, r); it; ++it) {
      const int c = static_cast<int>(it.col());
      if (sys.constrained[r]) {
        it.valueRef() = r == c ? 1.0 : 0.0;
      } else if (sys.constrained[c]) {
        sys.b[r] -= it.value() * gv[c];
        it.valueRef() = 0.0;
      }
    }
  }
  for (int i = 0; i < N; ++i)
    if (sys.constrained[i]) sys.b[i] = gv[i];
  sys.K.prune(0.0);
}

namespace {

void pcg(const LinearSystem& sys, Eigen::VectorXd& x, double tol, int max_iter, SolveReport& rep) {
  const SparseMatrix& K = sys.K;
  const Eigen::VectorXd inv_diag = K.diagonal().cwiseInverse();
  const double bnorm = sys.b.norm();
  Eigen::VectorXd r = sys.b - K * x;
  if (r.norm() <= tol * bnorm) {
    rep.converged = true;
    return;
  }
  Eigen::VectorXd z = inv_diag.cwiseProduct(r);
  Eigen::VectorXd p = z;
  double rz = r.dot(z);
  const double kscale = K.coeffs().cwiseAbs().maxCoeff();
  for (int it = 1; it <= max_iter; ++it) {
    const Eigen::VectorXd Ap = K * p;
    const double pAp = p.dot(Ap);
    if (!(pAp > std::numeric_limits<double>::epsilon() * kscale * p.squaredNorm())) {
      rep.breakdown = true;
      rep.iterations = it;
      return;
    }
    const double alpha = rz / pAp;
    x += alpha * p;
    r -= alpha * Ap;
    rep.iterations = it;
    if (r.norm() <= tol * bnorm) {
      rep.converged = true;
      return;
    }
    z = inv_diag.cwiseProduct(r);
    const double rz_new = r.dot(z);
    p = z + (rz_new / rz) * p;
    rz = rz_new;
  }
}

void bicgstab(const LinearSystem& sys, Eigen::VectorXd& x, double tol, int max_iter, SolveReport& rep) {
  const SparseMatrix& K = sys.K;
  const Eigen::VectorXd inv_diag = K.diagonal().cwiseInverse();
  const double bnorm = sys.b.norm();
  Eigen::VectorXd r = sys.b - K * x;
  if (r.norm() <= tol * bnorm) {
    rep.converged = true;
    return;
  }
  const Eigen::VectorXd r0 = r;
  const int N = static_cast<int>(x.size());
  Eigen::VectorXd v = Eigen::VectorXd::Zero(N), p = Eigen::VectorXd::Zero(N);
  double rho = 1.0, alpha = 1.0, omega = 1.0;
  const double tiny = std::numeric_limits<double>::min() / std::numeric_limits<double>::epsilon();
  for (int it = 1; it <= max_iter; ++it) {
    rep.iterations = it;
    const double rho_new = r0.dot(r);
    if (std::abs(rho_new) <= tiny || !std::isfinite(rho_new)) {
      rep.breakdown = true;
      return;
    }
    p = r + (rho_new / rho) * (alpha / omega) * (p - omega * v);
    const Eigen::VectorXd ph = inv_diag.cwiseProduct(p);
    v = K * ph;
    const double r0v = r0.dot(v);
    if (std::abs(r0v) <= tiny) {
      rep.breakdown = true;
      return;
    }
    alpha = rho_new / r0v;
    const Eigen::VectorXd s = r - alpha * v;
    if (s.norm() <= tol * bnorm) {
      x += alpha * ph;
      rep.converged = true;
      return;
    }
    const Eigen::VectorXd sh = inv_diag.cwiseProduct(s);
    const Eigen::VectorXd t = K * sh;
    const double tt = t.squaredNorm();
    if (tt <= tiny) {
      rep.breakdown = true;
      return;
    }
    omega = t.dot(s) / tt;
    x += alpha * ph + omega * sh;
    r = s - omega * t;
    if (r.norm() <= tol * bnorm) {
      rep.converged = true;
      return;
    }
    if (omega == 0.0) {
      rep.breakdown = true;
      return;
    }
    rho = rho_new;
  }
}

}  // namespace

SolveReport solve(const LinearSystem& sys, Eigen::VectorXd& x, double tol, int max_iter) {
  const auto t0 = Clock::now();
  const int N = static_cast<int>(sys.b.size());
  if (x.size() != N) x = Eigen::VectorXd::Zero(N);
  if (max_iter <= 0) max_iter = 20 * N;
  SolveReport rep;
  rep.symmetric = sys.symmetric;
  rep.assembly_seconds = sys.assembly_seconds;
  const double bnorm = sys.b.norm();
  if (bnorm == 0.0) {
    x.setZero();
    rep.converged = true;
  } else if ((sys.K.diagonal().array() <= 0.0).any() && sys.symmetric) {
    rep.breakdown = true;
  } else if (sys.symmetric) {
    pcg(sys, x, tol, max_iter, rep);
  } else {
    bicgstab(sys, x, tol, max_iter, rep);
  }
  rep.residual = bnorm == 0.0 ? 0.0 : (sys.b - sys.K * x).norm() / bnorm;
  if (rep.converged && rep.residual > tol) rep.converged = rep.residual <= 1.5 * tol;
  rep.solve_seconds = seconds_since(t0);
  return rep;
}

DiscreteField solve_problem(std::shared_ptr<const TensorGrid> grid, const ProblemData& data, double tol,
                            SolveReport* report, const AssemblyOptions& options) {
  LinearSystem sys = assemble(*grid, data, options);
  impose_dirichlet(sys, *grid, data.dirichlet);
  Eigen::VectorXd x;
  const SolveReport rep = solve(sys, x, tol);
  if (report) *report = rep;
  return DiscreteField(std::move(grid), std::move(x));
}

// ---------------------------------------------------------------------------

namespace {

QuadRule axis_rule(const WeightSpec& spec, int k, double l, double r, int points) {
  const int i = spec.weighted_index(k);
  if (i < 0 || spec.a(i) == 0.0) return gauss_legendre(points).mapped(l, r);
  return weighted_rule(spec.a(i), spec.eps(i), l, r, points);
}

CellRule tensor_rule(const std::vector<QuadRule>& rules) {
  const int d = static_cast<int>(rules.size());
  CellRule out;
  std::array<int, 3> idx{0, 0, 0};
  while (true) {
    Point z(d);
    double w = 1.0;
    for (int k = 0; k < d; ++k) {
      z[k] = rules[k].nodes[idx[k]];
      w *= rules[k].weights[idx[k]];
    }
    out.points.push_back(z);
    out.weights.push_back(w);
    int k = 0;
    while (k < d && ++idx[k] == rules[k].size()) idx[k++] = 0;
    if (k == d) break;
  }
  return out;
}

}  // namespace

CellRule cell_rule(const TensorGrid& grid, const WeightSpec& spec, int cell, int points) {
  const Box b = grid.cell_box(cell);
  std::vector<QuadRule> rules;
  for (int k = 0; k < grid.d(); ++k) rules.push_back(axis_rule(spec, k, b.lo[k], b.hi[k], points));
  return tensor_rule(rules);
}

std::vector<int> cells_in(const TensorGrid& grid, const Box& region) {
  const double tol = 1e-12 * grid.L();
  std::vector<int> out;
  for (int c = 0; c < grid.num_cells(); ++c) {
    const Box b = grid.cell_box(c);
    if (region.contains(b.lo, tol) && region.contains(b.hi, tol)) out.push_back(c);
  }
  return out;
}

WeightedNorms weighted_norms(const DiscreteField& u, const WeightSpec& spec, const Box& region, double p) {
  const TensorGrid& grid = *u.grid;
  check_integrable(spec);
  const auto tables = axis_tables(grid, spec);
  const int d = grid.d(), verts = 1 << d;
  double l2 = 0.0, h1 = 0.0;
  const std::vector<int> cells = cells_in(grid, region);
  for (int c : cells) {
    const auto cm = grid.cell_multi(c);
    const CellData cd = cell_vertices(grid, c);
    for (int m = 0; m < verts; ++m)
      for (int n = 0; n < verts; ++n) {
        const double um_un = u.values[cd.idx[m]] * u.values[cd.idx[n]];
        double mass = 1.0;
        for (int k = 0; k < d; ++k) {
          const AxisTable& T = tables[k][cm[k]];
          const int mk = (m >> k) & 1, nk = (n >> k) & 1;
          mass *= T.I[0][mk][0][nk][0] + T.I[1][mk][0][nk][0];
        }
        l2 += um_un * mass;
        for (int q = 0; q < d; ++q) {
          double st = 1.0;
          for (int k = 0; k < d; ++k) {
            const AxisTable& T = tables[k][cm[k]];
            const int mk = (m >> k) & 1, nk = (n >> k) & 1;
            st *= T.I[0][mk][q == k][nk][q == k] + T.I[1][mk][q == k][nk][q == k];
          }
          h1 += um_un * st;
        }
      }
  }
  WeightedNorms out;
  out.L2 = std::sqrt(std::max(l2, 0.0));
  out.H1_semi = std::sqrt(std::max(h1, 0.0));
  out.Lp = weighted_lp(grid, spec, cells, [&u](const Point& z) { return u(z); }, p);
  for (int idx = 0; idx < grid.num_nodes(); ++idx)
    if (region.contains(grid.node(idx), 1e-12 * grid.L())) out.Linf = std::max(out.Linf, std::abs(u.values[idx]));
  return out;
}

double weighted_lp(const TensorGrid& grid, const WeightSpec& spec, const std::vector<int>& cells,
                   const std::function<double(const Point&)>& g, double p, int points) {
  double s = 0.0;
  for (int c : cells) {
    const CellRule rule = cell_rule(grid, spec, c, points);
    for (std::size_t j = 0; j < rule.points.size(); ++j) s += rule.weights[j] * std::pow(std::abs(g(rule.points[j])), p);
  }
  return std::pow(s, 1.0 / p);
}

ErrorNorms weighted_error(const DiscreteField& u, const SmoothFunction& exact, const WeightSpec& spec,
                          const Box& region, int points) {
  const TensorGrid& grid = *u.grid;
  double l2 = 0.0, h1 = 0.0;
  for (int c : cells_in(grid, region)) {
    const CellRule rule = cell_rule(grid, spec, c, points);
    for (std::size_t j = 0; j < rule.points.size(); ++j) {
      const Point& z = rule.points[j];
      const double e = u(z) - exact.value(z);
      l2 += rule.weights[j] * e * e;
      if (exact.gradient) h1 += rule.weights[j] * (u.gradient(c, z) - exact.gradient(z)).squaredNorm();
    }
  }
  return {std::sqrt(l2), std::sqrt(h1)};
}

// ---------------------------------------------------------------------------

double Bump::value(const Point& z) const {
  double v = 1.0;
  for (int k = 0; k < z.size(); ++k) {
    const double t = (z[k] - center[k]) / radius[k];
    if (std::abs(t) >= 1.0) return 0.0;
    v *= std::pow(1.0 - t * t, 4);
  }
  return v;
}

Point Bump::gradient(const Point& z) const {
  const int d = static_cast<int>(z.size());
  Point g = Point::Zero(d);
  std::array<double, 3> val{}, der{};
  for (int k = 0; k < d; ++k) {
    const double t = (z[k] - center[k]) / radius[k];
    if (std::abs(t) >= 1.0) return g;
    const double s = 1.0 - t * t;
    val[k] = s * s * s * s;
    der[k] = -8.0 * t * s * s * s / radius[k];
  }
  for (int p = 0; p < d; ++p) {
    double w = der[p];
    for (int k = 0; k < d; ++k)
      if (k != p) w *= val[k];
    g[p] = w;
  }
  return g;
}

std::vector<Bump> bump_family(const Box& domain, const WeightSpec& spec, int per_axis, bool include_sigma) {
  require(per_axis >= 1, "bump_family: need at least one bump per axis");
  const int d = domain.dim();
  std::vector<std::vector<double>> centers(d);
  Point radius(d);
  for (int k = 0; k < d; ++k) {
    const double lo = domain.lo[k], hi = domain.hi[k];
    radius[k] = (hi - lo) / (per_axis + 1);
    if (include_sigma && spec.weighted_index(k) >= 0 && lo == 0.0) centers[k].push_back(0.0);
    for (int j = 0; j < per_axis; ++j) centers[k].push_back(lo + (j + 1) * radius[k]);
  }
  std::vector<Bump> out;
  std::array<std::size_t, 3> idx{0, 0, 0};
  while (true) {
    Bump b{Point(d), radius};
    for (int k = 0; k < d; ++k) b.center[k] = centers[k][idx[k]];
    out.push_back(b);
    int k = 0;
    while (k < d && ++idx[k] == centers[k].size()) idx[k++] = 0;
    if (k == d) break;
  }
  return out;
}

namespace {

double residual_integrand(const SmoothFunction& u, const ProblemData& data, const Point& z, double phi,
                          const Point& dphi) {
  const Point du = u.gradient(z);
  double s = (data.A(z) * du).dot(dphi);
  if (data.drift) s += data.drift(z).dot(du) * phi;
  if (data.f) s -= data.f(z) * phi;
  if (data.F) s += data.F(z).dot(dphi);
  return s;
}

}  // namespace

double weak_residual(const SmoothFunction& u, const ProblemData& data, const std::vector<Bump>& tests,
                     int subdivisions, int points) {
  const int d = data.spec.d();
  double worst = 0.0;
  for (const Bump& b : tests) {
    std::vector<QuadRule> rules(d);
    for (int k = 0; k < d; ++k) {
      double lo = b.center[k] - b.radius[k], hi = b.center[k] + b.radius[k];
      if (data.spec.weighted_index(k) >= 0 && b.center[k] >= 0.0) lo = std::max(lo, 0.0);
      std::vector<double> nodes, weights;
      for (int s = 0; s < subdivisions; ++s) {
        const double l = lo + (hi - lo) * s / subdivisions, r = lo + (hi - lo) * (s + 1) / subdivisions;
        const QuadRule q = axis_rule(data.spec, k, l, r, points);
        nodes.insert(nodes.end(), q.nodes.data(), q.nodes.data() + q.size());
        weights.insert(weights.end(), q.weights.data(), q.weights.data() + q.size());
      }
      rules[k].nodes = Eigen::Map<Eigen::VectorXd>(nodes.data(), static_cast<Eigen::Index>(nodes.size()));
      rules[k].weights = Eigen::Map<Eigen::VectorXd>(weights.data(), static_cast<Eigen::Index>(weights.size()));
    }
    const CellRule rule = tensor_rule(rules);
    double acc = 0.0;
    for (std::size_t j = 0; j < rule.points.size(); ++j) {
      const Point& z = rule.points[j];
      acc += rule.weights[j] * residual_integrand(u, data, z, b.value(z), b.gradient(z));
    }
    worst = std::max(worst, std::abs(acc));
  }
  return worst;
}

double weak_residual(const SmoothFunction& u, const ProblemData& data, const TensorGrid& grid, int points) {
  const int d = grid.d(), verts = 1 << d;
  Eigen::VectorXd r = Eigen::VectorXd::Zero(grid.num_nodes());
  for (int c = 0; c < grid.num_cells(); ++c) {
    const CellData cd = cell_vertices(grid, c);
    const Box box = grid.cell_box(c);
    const CellRule rule = cell_rule(grid, data.spec, c, points);
    for (std::size_t j = 0; j < rule.points.size(); ++j) {
      const Point& z = rule.points[j];
      for (int m = 0; m < verts; ++m) {
        double phi = 1.0;
        Point dphi(d);
        for (int p = 0; p < d; ++p) {
          double w = 1.0;
          for (int k = 0; k < d; ++k) {
            const double h = box.hi[k] - box.lo[k];
            const double t = (z[k] - box.lo[k]) / h;
            const bool up = (m >> k) & 1;
            w *= k == p ? (up ? 1.0 : -1.0) / h : (up ? t : 1.0 - t);
          }
          dphi[p] = w;
        }
        for (int k = 0; k < d; ++k) {
          const double t = (z[k] - box.lo[k]) / (box.hi[k] - box.lo[k]);
          phi *= (m >> k) & 1 ? t : 1.0 - t;
        }
        r[cd.idx[m]] += rule.weights[j] * residual_integrand(u, data, z, phi, dphi);
      }
    }
  }
  double worst = 0.0;
  for (int i = 0; i < grid.num_nodes(); ++i)
    if (!grid.tag(i).outer) worst = std::max(worst, std::abs(r[i]));
  return worst;
}

double weak_residual(const DiscreteField& u, const ProblemData& data) {
  const TensorGrid& grid = *u.grid;
  const LinearSystem sys = assemble(grid, data);
  const Eigen::VectorXd r = sys.K * u.values - sys.b;
  double worst = 0.0;
  for (int i = 0; i < grid.num_nodes(); ++i)
    if (!grid.tag(i).outer) worst = std::max(worst, std::abs(r[i]));
  return worst;
}

void write_system(std::ostream& out, const LinearSystem& sys) {
  out.precision(17);
  for (int r = 0; r < sys.K.outerSize(); ++r)
    for (SparseMatrix::InnerIterator it(sys.K, r); it; ++it) out << r << ' ' << it.col() << ' ' << it.value() << '\n';
}

}  // namespace orthodeg
