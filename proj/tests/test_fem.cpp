#include "orthodeg/fem.hpp"

#include <Eigen/Dense>
#include <gtest/gtest.h>

#include <cmath>
#include <sstream>

using namespace orthodeg;

namespace {

Eigen::VectorXd vec(std::initializer_list<double> v) {
  Eigen::VectorXd out(v.size());
  int i = 0;
  for (double x : v) out[i++] = x;
  return out;
}

std::shared_ptr<const TensorGrid> grid_ptr(int d, int n, double L, std::vector<int> cells,
                                           Grading g = Grading::uniform) {
  return std::make_shared<const TensorGrid>(build_grid(OrthantBox(d, n, L), {std::move(cells), g, 0.7}));
}

ProblemData problem(const WeightSpec& spec) {
  ProblemData pd;
  pd.spec = spec;
  pd.A = identity_coefficients(spec.d(), spec.n());
  return pd;
}

// u* = x^2 + y^2 with weight |y|^a (eps) on the last axis, A = I.
ProblemData manufactured(double a, double eps) {
  ProblemData pd = problem(WeightSpec(2, vec({a}), vec({eps})));
  pd.f = ScalarField([a, eps](const Point& z) {
    const double y = z[1];
    return -(4.0 + 2.0 * a * y * y / (eps * eps + y * y == 0.0 ? 1.0 : eps * eps + y * y));
  });
  pd.dirichlet = ScalarField([](const Point& z) { return z[0] * z[0] + z[1] * z[1]; });
  return pd;
}

SmoothFunction manufactured_exact() {
  return {[](const Point& z) { return z[0] * z[0] + z[1] * z[1]; },
          [](const Point& z) -> Point { return 2.0 * z; }};
}

}  // namespace

TEST(Assemble, OneDimensionalStiffness) {
  const auto g = grid_ptr(1, 1, 1.0, {2});
  const LinearSystem sys = assemble(*g, problem(WeightSpec(1, vec({0}), vec({0}))));
  Eigen::MatrixXd expect(3, 3);
  expect << 1, -1, 0, -1, 2, -1, 0, -1, 1;
  expect *= 2.0;
  EXPECT_LT((Eigen::MatrixXd(sys.K) - expect).cwiseAbs().maxCoeff(), 1e-14);
  EXPECT_TRUE(sys.symmetric);
}

TEST(Assemble, WeightedFirstEntry) {
  for (double L : {0.3, 1.0, 4.0}) {
    const auto g = grid_ptr(1, 1, L, {2});
    const LinearSystem sys = assemble(*g, problem(WeightSpec::degenerate(1, vec({1}))));
    EXPECT_NEAR(sys.K.coeff(0, 0), 0.5, 1e-14);
  }
}

TEST(Assemble, ConstantsInKernelAndSymmetry) {
  for (auto spec : {WeightSpec(3, vec({0.5, -0.4}), vec({0, 0.2})), WeightSpec::degenerate(2, vec({2.0, -0.7}))}) {
    const auto g = grid_ptr(spec.d(), spec.n(), 1.0, std::vector<int>(spec.d(), 3), Grading::geometric);
    ProblemData pd = problem(spec);
    if (spec.d() == 2) pd.A = a_theta(2.0);
    const LinearSystem sys = assemble(*g, pd);
    const Eigen::VectorXd ones = Eigen::VectorXd::Ones(g->num_nodes());
    EXPECT_LT((sys.K * ones).cwiseAbs().maxCoeff(), 1e-13);
    const SparseMatrix diff = sys.K - SparseMatrix(sys.K.transpose());
    EXPECT_LE(diff.coeffs().cwiseAbs().maxCoeff(), 1e-12 * sys.K.coeffs().cwiseAbs().maxCoeff());
  }
  EXPECT_THROW(assemble(*grid_ptr(1, 1, 1.0, {2}), problem(WeightSpec(1, vec({-1.2}), vec({0}), true))),
               DivergentIntegral);
}

TEST(Assemble, NonsymmetricBlockUsesBiCgStab) {
  const auto g = grid_ptr(2, 1, 1.0, {6, 6});
  ProblemData pd = problem(WeightSpec::degenerate(2, vec({0.5})));
  pd.A = smooth_block(2, 1, 4);
  pd.f = constant_field(1.0);
  pd.dirichlet = constant_field(0.0);
  LinearSystem sys = assemble(*g, pd);
  EXPECT_FALSE(sys.symmetric);
  impose_dirichlet(sys, *g, pd.dirichlet);
  Eigen::VectorXd x;
  const SolveReport rep = solve(sys, x, 1e-12);
  EXPECT_TRUE(rep.converged);
  EXPECT_FALSE(rep.symmetric);
  EXPECT_LE(rep.residual, 1e-12);
}

TEST(Dirichlet, PositiveDefinite) {
  const auto g = grid_ptr(1, 1, 1.0, {2});
  LinearSystem sys = assemble(*g, problem(WeightSpec(1, vec({0}), vec({0}))));
  impose_dirichlet(sys, *g, constant_field(0.0));
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(Eigen::MatrixXd(sys.K));
  EXPECT_GT(es.eigenvalues().minCoeff(), 0.0);
  EXPECT_EQ(sys.constrained, (std::vector<char>{0, 0, 1}));
}

TEST(Dirichlet, AffineReproduced) {
  const auto g = grid_ptr(2, 1, 1.0, {4, 4});
  ProblemData pd = problem(WeightSpec::degenerate(2, vec({1})));
  pd.dirichlet = ScalarField([](const Point& z) { return z[0]; });
  SolveReport rep;
  const DiscreteField u = solve_problem(g, pd, 1e-13, &rep);
  ASSERT_TRUE(rep.converged);
  for (int i = 0; i < g->num_nodes(); ++i) EXPECT_NEAR(u.values[i], g->node(i)[0], 1e-12);
}

TEST(Solve, SingularSystemDetected) {
  const auto g = grid_ptr(1, 1, 1.0, {4});
  ProblemData pd = problem(WeightSpec(1, vec({0}), vec({0})));
  pd.f = constant_field(1.0);
  const LinearSystem sys = assemble(*g, pd);
  Eigen::VectorXd x;
  const SolveReport rep = solve(sys, x, 1e-12);
  EXPECT_FALSE(rep.converged);
}

TEST(Solve, IdentitySystem) {
  LinearSystem sys;
  sys.K.resize(4, 4);
  sys.K.setIdentity();
  sys.b = vec({1, 2, 3, 4});
  Eigen::VectorXd x;
  const SolveReport rep = solve(sys, x, 1e-14);
  EXPECT_TRUE(rep.converged);
  EXPECT_LE(rep.iterations, 1);
  EXPECT_LT((x - sys.b).norm(), 1e-15);
}

TEST(Solve, OneDimensionalNodalExactness) {
  for (double L : {1.0, 2.0}) {
    const auto g = grid_ptr(1, 1, L, {8});
    ProblemData pd = problem(WeightSpec(1, vec({0}), vec({0})));
    pd.f = constant_field(-2.0);
    pd.dirichlet = ScalarField([](const Point& z) { return z[0] * z[0]; });
    SolveReport rep;
    const DiscreteField u = solve_problem(g, pd, 1e-14, &rep);
    // Independent oracle: dense solve of the same tridiagonal system.
    LinearSystem sys = assemble(*g, pd);
    impose_dirichlet(sys, *g, pd.dirichlet);
    const Eigen::VectorXd direct = Eigen::MatrixXd(sys.K).fullPivLu().solve(sys.b);
    for (int i = 0; i < g->num_nodes(); ++i) {
      const double y = g->node(i)[0];
      EXPECT_NEAR(u.values[i], y * y, 1e-12);
      EXPECT_NEAR(direct[i], y * y, 1e-12);
    }
  }
}

TEST(Solve, ManufacturedConvergence) {
  std::vector<double> err;
  for (int N : {8, 16, 32}) {
    const auto g = grid_ptr(2, 1, 1.0, {N, N});
    SolveReport rep;
    ProblemData pd = manufactured(1.0, 0.0);
    const DiscreteField u = solve_problem(g, pd, 1e-12, &rep);
    ASSERT_TRUE(rep.converged);
    err.push_back(weighted_error(u, manufactured_exact(), pd.spec, g->bounds()).L2);
  }
  EXPECT_GE(std::log2(err[0] / err[1]), 1.8);
  EXPECT_GE(std::log2(err[1] / err[2]), 1.8);
}

TEST(Solve, RegularizedManufactured) {
  std::vector<double> err;
  for (int N : {8, 16, 32}) {
    const auto g = grid_ptr(2, 1, 1.0, {N, N});
    ProblemData pd = manufactured(-0.5, 0.1);
    const DiscreteField u = solve_problem(g, pd, 1e-12);
    err.push_back(weighted_error(u, manufactured_exact(), pd.spec, g->bounds()).L2);
  }
  EXPECT_GE(std::log2(err[1] / err[2]), 1.8);
}

TEST(Solve, DriftTerm) {
  // -div(w grad u) + w b.grad u = w f with b = (1, 0): f = -6 + 2x.
  std::vector<double> err;
  for (int N : {8, 16}) {
    const auto g = grid_ptr(2, 1, 1.0, {N, N});
    ProblemData pd = manufactured(1.0, 0.0);
    pd.drift = VectorField([](const Point&) { return Point(Eigen::Vector2d(1.0, 0.0)); });
    pd.f = ScalarField([](const Point& z) { return -6.0 + 2.0 * z[0]; });
    SolveReport rep;
    const DiscreteField u = solve_problem(g, pd, 1e-12, &rep);
    EXPECT_FALSE(rep.symmetric);
    ASSERT_TRUE(rep.converged);
    err.push_back(weighted_error(u, manufactured_exact(), pd.spec, g->bounds()).L2);
  }
  EXPECT_GE(std::log2(err[0] / err[1]), 1.8);
}

TEST(Norms, Examples) {
  const auto g = grid_ptr(1, 1, 1.0, {4});
  const WeightSpec w1 = WeightSpec::degenerate(1, vec({1}));
  const WeightSpec w0 = WeightSpec::degenerate(1, vec({0}));
  const DiscreteField one = interpolate(g, [](const Point&) { return 1.0; });
  const DiscreteField y = interpolate(g, [](const Point& z) { return z[0]; });
  EXPECT_NEAR(weighted_norms(one, w1, g->bounds()).L2, std::sqrt(0.5), 1e-14);
  EXPECT_NEAR(weighted_norms(y, w0, g->bounds()).H1_semi, 1.0, 1e-14);
  EXPECT_NEAR(weighted_norms(y, w1, g->bounds()).H1_semi, std::sqrt(0.5), 1e-14);
  // Lp of y with weight t: (int t^5)^(1/4) = 6^(-1/4)
  EXPECT_NEAR(weighted_norms(y, w1, g->bounds(), 4.0).Lp, std::pow(6.0, -0.25), 1e-12);
  EXPECT_DOUBLE_EQ(weighted_norms(y, w1, g->bounds()).Linf, 1.0);
}

TEST(Norms, CellRulesReproduceMass) {
  const WeightSpec spec(2, vec({-0.6}), vec({0.0}));
  const auto g = grid_ptr(2, 1, 1.0, {3, 5}, Grading::geometric);
  double s = 0.0;
  for (int c = 0; c < g->num_cells(); ++c)
    for (double w : cell_rule(*g, spec, c).weights) s += w;
  EXPECT_NEAR(s, weight_mass(spec, g->bounds()), 1e-11);
}

TEST(WeakResidual, QuadraticProfile) {
  for (double a : {-0.5, 0.5, 2.0}) {
    ProblemData pd = problem(WeightSpec::degenerate(1, vec({a})));
    pd.f = constant_field(-2.0 * (1.0 + a));
    const SmoothFunction u{[](const Point& z) { return z[0] * z[0]; },
                           [](const Point& z) -> Point { return 2.0 * z; }};
    const Box dom = OrthantBox(1, 1, 1.0).box();
    EXPECT_LE(weak_residual(u, pd, bump_family(dom, pd.spec, 4, true)), 1e-12) << a;
    EXPECT_LE(weak_residual(u, pd, *grid_ptr(1, 1, 1.0, {6})), 1e-12) << a;
    // The wrong forcing is detected.
    pd.f = constant_field(-2.0);
    EXPECT_GT(weak_residual(u, pd, bump_family(dom, pd.spec, 4, true)), 1e-3) << a;
  }
}

TEST(WeakResidual, DiscreteSolution) {
  const auto g = grid_ptr(2, 1, 1.0, {8, 8});
  ProblemData pd = manufactured(1.0, 0.0);
  LinearSystem raw = assemble(*g, pd);
  const DiscreteField u = solve_problem(g, pd, 1e-12);
  EXPECT_LE(weak_residual(u, pd), 1e-10 * std::max(1.0, raw.b.cwiseAbs().maxCoeff()));
}

TEST(Reflection, OrthantMatchesMirroredSolve) {
  for (double a : {0.5, 1.0}) {
    const auto g = grid_ptr(2, 1, 1.0, {6, 6});
    ProblemData pd = problem(WeightSpec::degenerate(2, vec({a})));
    pd.A = smooth_block(2, 1, 9);
    pd.f = ScalarField([](const Point& z) { return std::cos(z[0]) + z[1]; });
    pd.F = VectorField([](const Point& z) { return Point(Eigen::Vector2d(z[1], z[1] * z[0])); });
    pd.dirichlet = ScalarField([](const Point& z) { return z[0] * z[1]; });
    const double tol = 1e-13;
    const DiscreteField u = solve_problem(g, pd, tol);

    auto rg = std::make_shared<const TensorGrid>(reflect_grid(*g, 0));
    const ReflectedData r = reflect_coefficients(pd.A, pd.f, pd.F, 0);
    ProblemData rp = pd;
    rp.A = r.A;
    rp.f = r.f;
    rp.F = r.F;
    rp.dirichlet = ScalarField([](const Point& z) { return z[0] * std::abs(z[1]); });
    SolveReport rep;
    const DiscreteField ur = solve_problem(rg, rp, tol, &rep);
    ASSERT_TRUE(rep.converged);
    double diff = 0.0;
    for (int i = 0; i < g->num_nodes(); ++i) diff = std::max(diff, std::abs(u.values[i] - ur(g->node(i))));
    EXPECT_LE(diff, 10 * tol * std::max(1.0, u.values.cwiseAbs().maxCoeff())) << a;
  }
}

TEST(SystemDump, CoordinateFormat) {
  const auto g = grid_ptr(1, 1, 1.0, {2});
  const LinearSystem sys = assemble(*g, problem(WeightSpec(1, vec({0}), vec({0}))));
  std::stringstream ss;
  write_system(ss, sys);
  int r, c, lines = 0;
  double v;
  while (ss >> r >> c >> v) ++lines;
  EXPECT_EQ(lines, 7);
}
