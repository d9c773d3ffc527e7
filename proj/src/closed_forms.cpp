#include "orthodeg/closed_forms.hpp"

#include "orthodeg/quadrature.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <numbers>

namespace orthodeg {

Point u_theta_gradient(double theta, double y1, double y2) {
  if (!(theta > 0.0 && theta < std::numbers::pi)) throw OutOfDomain("u_theta: theta must lie in (0, pi)");
  const double c = std::cos(theta), s = std::sin(theta);
  const double xi = y1 + y2 * c, eta = y2 * s;
  const double R = std::hypot(xi, eta);
  if (R == 0.0) throw SingularPoint("u_theta: gradient is not defined at the origin");
  const double k = std::numbers::pi / theta;
  const double phi = std::atan2(eta, xi);
  const double rk = k * std::pow(R, k - 1.0);
  const double u_xi = rk * std::cos((k - 1.0) * phi);
  const double u_eta = -rk * std::sin((k - 1.0) * phi);
  Point g(2);
  g << u_xi, c * u_xi + s * u_eta;
  return g;
}

ClosedFormSolution u_theta_solution(double theta) {
  if (!(theta > 0.0 && theta < std::numbers::pi)) throw OutOfDomain("u_theta: theta must lie in (0, pi)");
  ClosedFormSolution sol;
  sol.id = "u_theta";
  sol.fn.value = [theta](const Point& z) { return u_theta(theta, z[0], z[1]); };
  sol.fn.gradient = [theta](const Point& z) { return u_theta_gradient(theta, z[0], z[1]); };
  sol.growth = std::numbers::pi / theta;
  return sol;
}

// ---------------------------------------------------------------------------
// psi recursion

namespace {

// Legendre values P_0..P_{m-1} at x.
Eigen::VectorXd legendre_values(double x, int m) {
  Eigen::VectorXd P(m);
  P[0] = 1.0;
  if (m > 1) P[1] = x;
  for (int n = 1; n + 1 < m; ++n) P[n + 1] = ((2 * n + 1) * x * P[n] - n * P[n - 1]) / (n + 1);
  return P;
}

// int_{-1}^{x} of the Legendre series with coefficients c.
double legendre_antiderivative(const Eigen::VectorXd& c, double x) {
  const int m = static_cast<int>(c.size());
  const Eigen::VectorXd P = legendre_values(x, m + 1);
  double s = c[0] * (x + 1.0);
  for (int n = 1; n < m; ++n) s += c[n] * (P[n + 1] - P[n - 1]) / (2 * n + 1);
  return s;
}

struct LegendreBasis {
  const QuadRule* rule;
  Eigen::MatrixXd P;  // P(n, j) = P_n(x_j)

  explicit LegendreBasis(int N) : rule(&gauss_legendre(N)), P(N, N) {
    for (int j = 0; j < N; ++j) P.col(j) = legendre_values(rule->nodes[j], N);
  }
  Eigen::VectorXd coefficients(const Eigen::VectorXd& f) const {
    Eigen::VectorXd c = P * rule->weights.cwiseProduct(f);
    for (int n = 0; n < c.size(); ++n) c[n] *= 0.5 * (2 * n + 1);
    return c;
  }
};

struct PsiPanel {
  double l = 0.0, r = 0.0;
  bool special = false;     // [0, r] with eps = 0: monomial representation
  Eigen::VectorXd coef;     // Legendre coefficients of the outer integrand, or monomial fit
  double base = 0.0;        // psi(l)
};

class PsiLevel {
 public:
  PsiLevel(std::vector<PsiPanel> panels, double a) : panels_(std::move(panels)), a_(a) {}

  double operator()(double t) const {
    t = std::abs(t);
    auto it = std::upper_bound(panels_.begin(), panels_.end(), t,
                               [](double v, const PsiPanel& p) { return v < p.r; });
    if (it == panels_.end()) --it;
    const PsiPanel& p = *it;
    if (p.special) {
      const double u = t / p.r;
      double s = 0.0;
      for (int k = 0; k < p.coef.size(); ++k) s += p.coef[k] * std::pow(u, k + 2) / ((a_ + k + 1) * (k + 2));
      return p.r * p.r * s;
    }
    const double half = 0.5 * (p.r - p.l), mid = 0.5 * (p.r + p.l);
    return p.base + half * legendre_antiderivative(p.coef, (t - mid) / half);
  }

 private:
  std::vector<PsiPanel> panels_;
  double a_;
};

std::vector<std::pair<double, double>> psi_panels(double T, double eps, int refine) {
  std::vector<std::pair<double, double>> base;
  double hi = T;
  if (eps == 0.0) {
    for (int k = 0; k < 12; ++k, hi *= 0.5) base.emplace_back(0.5 * hi, hi);
  } else {
    while (hi > 0.5 * eps) {
      base.emplace_back(0.5 * hi, hi);
      hi *= 0.5;
    }
  }
  base.emplace_back(0.0, hi);
  std::reverse(base.begin(), base.end());
  std::vector<std::pair<double, double>> out;
  const int parts = 1 << refine;
  for (auto [l, r] : base)
    for (int j = 0; j < parts; ++j) out.emplace_back(l + (r - l) * j / parts, l + (r - l) * (j + 1) / parts);
  return out;
}

std::function<double(double)> psi_build(double a, double eps, int ell, double T, int refine) {
  std::function<double(double)> prev = [](double) { return 1.0; };
  if (ell == 0) return prev;
  constexpr int N = 20, M = 8;
  const LegendreBasis basis(N);
  const auto spans = psi_panels(T, eps, refine);
  for (int level = 1; level <= ell; ++level) {
    std::vector<PsiPanel> panels;
    double I0 = 0.0, P0 = 0.0;
    for (auto [l, r] : spans) {
      PsiPanel p;
      p.l = l;
      p.r = r;
      if (l == 0.0 && eps == 0.0) {
        // g(t) ~ sum c_k (t/r)^k; then int_0^s t^a g = r^(a+1) sum c_k u^(a+k+1)/(a+k+1)
        // and the outer integrand t^-a I(t) is a polynomial in u.
        Eigen::MatrixXd V(M, M);
        Eigen::VectorXd g(M);
        for (int j = 0; j < M; ++j) {
          const double u = 0.5 * (1.0 - std::cos(std::numbers::pi * (j + 0.5) / M));
          g[j] = prev(u * r);
          for (int k = 0; k < M; ++k) V(j, k) = std::pow(u, k);
        }
        p.special = true;
        p.coef = V.colPivHouseholderQr().solve(g);
        double inner = 0.0, outer = 0.0;
        for (int k = 0; k < M; ++k) {
          inner += p.coef[k] / (a + k + 1);
          outer += p.coef[k] / ((a + k + 1) * (k + 2));
        }
        I0 = std::pow(r, a + 1) * inner;
        P0 = r * r * outer;
      } else {
        const double half = 0.5 * (r - l), mid = 0.5 * (r + l);
        Eigen::VectorXd f(N), t(N);
        for (int j = 0; j < N; ++j) {
          t[j] = mid + half * basis.rule->nodes[j];
          f[j] = rho_power(t[j], a, eps) * prev(t[j]);
        }
        const Eigen::VectorXd cf = basis.coefficients(f);
        Eigen::VectorXd h(N);
        for (int j = 0; j < N; ++j) {
          const double I = I0 + half * legendre_antiderivative(cf, basis.rule->nodes[j]);
          h[j] = I / rho_power(t[j], a, eps);
        }
        p.coef = basis.coefficients(h);
        p.base = P0;
        I0 += half * 2.0 * cf[0];
        P0 += half * 2.0 * p.coef[0];
      }
      panels.push_back(std::move(p));
    }
    prev = PsiLevel(std::move(panels), a);
  }
  return prev;
}

}  // namespace

Eigen::VectorXd psi_recursion(double a, double eps, int ell, const Eigen::VectorXd& taus, double rel_tol) {
  require(ell >= 0, "psi_recursion: ell must be nonnegative");
  require(eps >= 0.0, "psi_recursion: eps must be nonnegative");
  if (eps == 0.0 && a <= -1.0) throw DivergentIntegral("psi_recursion: a <= -1 with eps = 0 diverges");
  Eigen::VectorXd out = Eigen::VectorXd::Ones(taus.size());
  if (ell == 0 || taus.size() == 0) return out;
  const double T = taus.cwiseAbs().maxCoeff();
  if (T == 0.0) return Eigen::VectorXd::Zero(taus.size());
  Eigen::VectorXd last;
  for (int refine = 0; refine <= 6; ++refine) {
    const auto psi = psi_build(a, eps, ell, T, refine);
    for (Eigen::Index j = 0; j < taus.size(); ++j) out[j] = psi(taus[j]);
    if (refine > 0) {
      const double scale = std::max(out.cwiseAbs().maxCoeff(), 1e-300);
      if ((out - last).cwiseAbs().maxCoeff() <= rel_tol * scale) return out;
    }
    last = out;
  }
  return out;
}

// ---------------------------------------------------------------------------

double weighted_second_derivative(const std::function<double(double)>& u, double a, double eps, double y) {
  const double h = 1e-2 * std::clamp(std::max(std::abs(y), eps), 1e-2, 1.0);
  auto d1 = [&](double s) { return (u(y + s) - u(y - s)) / (2.0 * s); };
  auto d2 = [&](double s) { return (u(y + s) - 2.0 * u(y) + u(y - s)) / (s * s); };
  const double up = (4.0 * d1(0.5 * h) - d1(h)) / 3.0;
  const double upp = (4.0 * d2(0.5 * h) - d2(h)) / 3.0;
  if (a == 0.0) return upp;
  if (eps == 0.0 && y == 0.0) {
    if (std::abs(up) > 1e-6 * std::max(1.0, std::abs(u(y)))) {
      throw SingularPoint("weighted_second_derivative: u'(0) != 0 on the degenerate axis");
    }
    return (1.0 + a) * upp;
  }
  return upp + a * y / (eps * eps + y * y) * up;
}

Eigen::VectorXd weighted_second_derivative(const Eigen::VectorXd& y, const Eigen::VectorXd& u, double a, double eps) {
  require(y.size() == u.size() && y.size() >= 3, "weighted_second_derivative: need matching nodes and values");
  const Eigen::Index N = y.size();
  Eigen::VectorXd w = Eigen::VectorXd::Constant(N, std::numeric_limits<double>::quiet_NaN());
  auto rho = [&](double t) { return rho_power(t, a, eps); };
  for (Eigen::Index j = 1; j + 1 < N; ++j) {
    const double hp = y[j + 1] - y[j], hm = y[j] - y[j - 1];
    const double fp = rho(0.5 * (y[j + 1] + y[j])) * (u[j + 1] - u[j]) / hp;
    const double fm = rho(0.5 * (y[j] + y[j - 1])) * (u[j] - u[j - 1]) / hm;
    w[j] = (fp - fm) / (0.5 * (hp + hm)) / rho(y[j]);
  }
  if (y[0] == 0.0) {
    // Even extension: the two half-cell fluxes at 0 are equal and opposite,
    // and in the limit the stencil reads (1 + a) u''(0).
    const double h = y[1];
    w[0] = eps == 0.0 ? (1.0 + a) * 2.0 * (u[1] - u[0]) / (h * h)
                      : 2.0 * rho(0.5 * h) * (u[1] - u[0]) / h / h / rho(0.0);
  }
  return w;
}

// ---------------------------------------------------------------------------

PhiResult phi_characteristic(double a, const std::function<double(double)>& h, const Eigen::VectorXd& taus) {
  if (a <= -1.0) throw DivergentIntegral("phi_characteristic: a <= -1 is not integrable at 0");
  const Eigen::Index n = taus.size();
  PhiResult out;
  out.phi.resize(n);
  out.quotient.resize(n);
  out.lower.resize(n);
  out.upper.resize(n);
  const double T = n ? taus.cwiseAbs().maxCoeff() : 0.0;

  auto integral = [&](double tau, int pieces) {
    double s = 0.0;
    for (int j = 0; j < pieces; ++j) {
      const QuadRule q = weighted_rule(a, 0.0, tau * j / pieces, tau * (j + 1) / pieces, 16);
      for (int i = 0; i < q.size(); ++i) s += q.weights[i] / h(q.nodes[i]);
    }
    return (1.0 + a) * s;
  };

  double inv_min = 1.0 / h(0.0), inv_max = inv_min;
  for (int j = 0; j <= 2000; ++j) {
    const double v = 1.0 / h(T * j / 2000.0);
    inv_min = std::min(inv_min, v);
    inv_max = std::max(inv_max, v);
  }
  for (Eigen::Index j = 0; j < n; ++j) {
    const double t = std::abs(taus[j]);
    double val = 0.0;
    if (t > 0.0) {
      double prev = integral(t, 2);
      for (int pieces = 4; pieces <= 256; pieces *= 2) {
        val = integral(t, pieces);
        if (std::abs(val - prev) <= 1e-14 * std::abs(val)) break;
        prev = val;
      }
    }
    out.phi[j] = taus[j] < 0.0 ? -val : val;
    out.quotient[j] = t > 0.0 ? val / std::pow(t, a + 1.0) : 1.0 / h(0.0);
    out.lower[j] = inv_min * std::pow(t, a + 1.0);
    out.upper[j] = inv_max * std::pow(t, a + 1.0);
  }
  out.bounds_ok = true;
  for (Eigen::Index j = 0; j < n; ++j) {
    const double m = std::abs(out.phi[j]);
    if (m < out.lower[j] * (1 - 1e-12) || m > out.upper[j] * (1 + 1e-12)) out.bounds_ok = false;
  }
  std::vector<Eigen::Index> order(n);
  for (Eigen::Index j = 0; j < n; ++j) order[j] = j;
  std::sort(order.begin(), order.end(), [&](auto i, auto k) { return taus[i] < taus[k]; });
  for (Eigen::Index j = 1; j < n; ++j) {
    const double dt = taus[order[j]] - taus[order[j - 1]];
    if (dt > 0.0) {
      out.quotient_lipschitz =
          std::max(out.quotient_lipschitz, std::abs(out.quotient[order[j]] - out.quotient[order[j - 1]]) / dt);
    }
  }
  return out;
}

// ---------------------------------------------------------------------------

Eigen::VectorXd g_quotient(const std::function<double(const Point&)>& u, int k, const std::vector<Point>& points,
                           double even_tol) {
  Eigen::VectorXd out(points.size());
  for (std::size_t j = 0; j < points.size(); ++j) {
    const Point& z = points[j];
    Point zm = z;
    zm[k] = -z[k];
    const double u0 = u(z);
    if (std::abs(u0 - u(zm)) > even_tol * std::max(1.0, std::abs(u0))) {
      throw EvennessViolation("g_quotient: function is not even in the quotient coordinate");
    }
    const double y = z[k];
    auto shifted = [&](double s) {
      Point w = z;
      w[k] += s;
      return u(w);
    };
    if (y == 0.0) {
      const double h = 1e-3;
      out[j] = 2.0 * (shifted(h) - u0) / (h * h);
    } else {
      const double h = 1e-4 * std::max(1.0, std::abs(y));
      auto d1 = [&](double s) { return (shifted(s) - shifted(-s)) / (2.0 * s); };
      out[j] = (4.0 * d1(0.5 * h) - d1(h)) / 3.0 / y;
    }
  }
  return out;
}

DiscreteField g_quotient(const DiscreteField& u, int k, double even_tol) {
  const TensorGrid& grid = *u.grid;
  require(k >= grid.d() - grid.n() && k < grid.d(), "g_quotient: axis must be weighted");
  const double scale = std::max(1.0, u.values.cwiseAbs().maxCoeff());
  if (grid.reflected(k)) {
    for (int i = 0; i < grid.num_nodes(); ++i) {
      Point zm = grid.node(i);
      zm[k] = -zm[k];
      if (std::abs(u.values[i] - u(zm)) > even_tol * scale) {
        throw EvennessViolation("g_quotient: discrete field is not even in the quotient coordinate");
      }
    }
  }
  const std::vector<DiscreteField> grad = gradient_recover(u);
  Eigen::VectorXd g(grid.num_nodes());
  const Eigen::VectorXd& c = grid.axis(k);
  for (int i = 0; i < grid.num_nodes(); ++i) {
    auto m = grid.node_multi(i);
    const double y = c[m[k]];
    if (y != 0.0) {
      g[i] = grad[k].values[i] / y;
      continue;
    }
    const double h = c[m[k] + 1];
    const double u0 = u.values[i];
    ++m[k];
    g[i] = 2.0 * (u.values[grid.node_index(m)] - u0) / (h * h);
  }
  return DiscreteField(u.grid, std::move(g));
}

// ---------------------------------------------------------------------------

GrowthFit growth_exponent_fit(const std::function<double(const Point&)>& u, const std::vector<Point>& rays,
                              const std::vector<double>& radii) {
  require(!rays.empty() && radii.size() >= 2, "growth_exponent_fit: need rays and at least two radii");
  const auto [rmin, rmax] = std::minmax_element(radii.begin(), radii.end());
  require(*rmin > 0.0 && *rmax / *rmin >= 100.0 * (1 - 1e-12), "growth_exponent_fit: radii must span two decades");
  std::vector<double> X, Y;
  for (double R : radii) {
    double m = 0.0;
    for (const Point& dir : rays) m = std::max(m, std::abs(u(R * dir / dir.norm())));
    if (m > 0.0 && std::isfinite(m)) {
      X.push_back(std::log(R));
      Y.push_back(std::log(m));
    }
  }
  if (X.size() < 2) throw DegenerateFit("growth_exponent_fit: u vanishes on all rays");
  const Eigen::Index n = static_cast<Eigen::Index>(X.size());
  Eigen::MatrixXd D(n, 2);
  Eigen::VectorXd y(n);
  for (Eigen::Index j = 0; j < n; ++j) {
    D(j, 0) = 1.0;
    D(j, 1) = X[j];
    y[j] = Y[j];
  }
  const Eigen::Vector2d beta = D.colPivHouseholderQr().solve(y);
  GrowthFit fit;
  fit.gamma = beta[1];
  fit.residual = std::sqrt((D * beta - y).squaredNorm() / n);
  return fit;
}

// ---------------------------------------------------------------------------

double AffineData::operator()(const Point& z) const {
  const Eigen::Index m = beta.size(), n = delta.size();
  double s = c0;
  for (Eigen::Index j = 0; j < m; ++j) s += beta[j] * z[j];
  for (Eigen::Index i = 0; i < n; ++i) s += delta[i] * z[m + i];
  return s;
}

AffineData consistent_affine(const Mat& A, int n, const Eigen::VectorXd& beta, double c0) {
  const int d = static_cast<int>(A.rows()), m = d - n;
  require(beta.size() == m, "consistent_affine: beta must have d - n entries");
  AffineData out;
  out.beta = beta;
  out.c0 = c0;
  const Eigen::MatrixXd S = A.block(m, m, n, n);
  const Eigen::MatrixXd R = A.block(m, 0, n, m);
  out.delta = m == 0 ? Eigen::VectorXd::Zero(n) : Eigen::VectorXd(-S.fullPivLu().solve(R * beta));
  return out;
}

LiouvilleProbe affine_liouville_probe(const CoefficientField& A, const WeightSpec& spec, const AffineData& data,
                                      const std::vector<double>& Ls, int cells, double tol) {
  const int d = A.d, n = A.n, m = d - n;
  LiouvilleProbe probe;
  {
    Point grad(d);
    for (int j = 0; j < m; ++j) grad[j] = data.beta[j];
    for (int i = 0; i < n; ++i) grad[m + i] = data.delta[i];
    const Point flux = A(Point::Zero(d)) * grad;
    for (int i = 0; i < n; ++i) probe.flux = std::max(probe.flux, std::abs(flux[m + i]));
  }
  probe.reproduced = true;
  for (double L : Ls) {
    auto grid = std::make_shared<const TensorGrid>(build_grid(OrthantBox(d, n, L), {std::vector<int>(d, cells)}));
    ProblemData pd;
    pd.spec = spec;
    pd.A = A;
    pd.dirichlet = ScalarField([data](const Point& z) { return data(z); });
    LiouvilleRun run;
    run.L = L;
    const DiscreteField u = solve_problem(grid, pd, std::max(1e-2 * tol, 1e-14), &run.solve);
    for (int i = 0; i < grid->num_nodes(); ++i)
      run.max_diff = std::max(run.max_diff, std::abs(u.values[i] - data(grid->node(i))));
    run.threshold = 10.0 * tol * std::max(1.0, u.values.cwiseAbs().maxCoeff());
    run.reproduced = run.solve.converged && run.max_diff <= run.threshold;
    probe.reproduced = probe.reproduced && run.reproduced;
    probe.runs.push_back(run);
  }
  return probe;
}

}  // namespace orthodeg
