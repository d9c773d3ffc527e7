#include "orthodeg/homotopy.hpp"

#include <Eigen/Dense>
#include <gtest/gtest.h>

#include <cmath>
#include <random>
#include <sstream>

using namespace orthodeg;

namespace {

Eigen::VectorXd vec(std::initializer_list<double> v) {
  Eigen::VectorXd out(v.size());
  int i = 0;
  for (double x : v) out[i++] = x;
  return out;
}

Point pt(std::initializer_list<double> v) { return Point(vec(v)); }

std::shared_ptr<const TensorGrid> grid2d(int N, Grading g = Grading::uniform) {
  return std::make_shared<const TensorGrid>(build_grid(OrthantBox(2, 1, 1.0), {{N, N}, g, 0.7}));
}

}  // namespace

TEST(Schedule, GeometricDefault) {
  const HomotopySchedule s = HomotopySchedule::geometric(2, 0.4, 5, {1});
  ASSERT_EQ(s.size(), 6u);
  EXPECT_DOUBLE_EQ(s.eps[0][0], 0.4);
  EXPECT_DOUBLE_EQ(s.eps[4][0], 0.025);
  EXPECT_EQ(s.eps[2][1], 0.0);
  EXPECT_EQ(s.eps.back().maxCoeff(), 0.0);
  EXPECT_NO_THROW(s.validate(2));
}

TEST(Schedule, Validation) {
  HomotopySchedule s;
  s.eps = {vec({0.1})};
  EXPECT_THROW(s.validate(1), InvalidArgument);
  s.eps = {vec({0.1}), vec({0.2}), vec({0.0})};
  EXPECT_THROW(s.validate(1), InvalidArgument);
  s.eps = {vec({0.1}), vec({0.05})};
  EXPECT_THROW(s.validate(1), InvalidArgument);
  s.eps = {vec({1.5}), vec({0.0})};
  EXPECT_THROW(s.validate(1), InvalidArgument);
  s.eps = {vec({0.0}), vec({0.0})};
  EXPECT_NO_THROW(s.validate(1));
}

TEST(Reweight, Examples) {
  const WeightSpec spec = WeightSpec::degenerate(1, vec({2.0}));
  EXPECT_NEAR(reweight_factor(spec, vec({1.0}), pt({1.0}), 2.0), std::sqrt(0.5), 1e-15);
  EXPECT_EQ(reweight_factor(spec, vec({0.0}), pt({0.3}), 2.0), 1.0);
  EXPECT_EQ(reweight_factor(spec, vec({0.5}), pt({0.0}), 2.0), 0.0);
  const WeightSpec neg = WeightSpec::degenerate(1, vec({-0.5}));
  for (double y : {0.0, 0.1, 1.0}) EXPECT_EQ(reweight_factor(neg, vec({0.7}), pt({y}), 2.0), 1.0);

  const auto [fk, Fk] = reweight_data(constant_field(3.0), VectorField([](const Point&) { return Point(pt({2.0})); }),
                                      spec, vec({1.0}), 2.0, 4.0);
  EXPECT_NEAR(fk(pt({1.0})), 3.0 * std::sqrt(0.5), 1e-14);
  EXPECT_NEAR(Fk(pt({1.0}))[0], 2.0 * std::pow(0.5, 0.25), 1e-14);
  EXPECT_THROW(reweight_data(constant_field(1.0), VectorField(), spec, vec({1.0}), 1.5, 2.0), InvalidArgument);
}

TEST(Reweight, FactorNeverExceedsOne) {
  std::mt19937_64 rng(5);
  std::uniform_real_distribution<double> u(-1.0, 1.0), e(0.0, 1.0), a(-0.9, 3.0);
  for (int t = 0; t < 200; ++t) {
    const WeightSpec spec = WeightSpec::degenerate(3, vec({a(rng), a(rng)}));
    const double f = reweight_factor(spec, vec({e(rng), e(rng)}), pt({u(rng), u(rng), u(rng)}), 2.0 + 3 * e(rng));
    EXPECT_GE(f, 0.0);
    EXPECT_LE(f, 1.0);
  }
}

TEST(Cutoff, Examples) {
  const Cutoff xi(pt({0.0, 0.0}), 0.5, 1.0);
  EXPECT_EQ(xi.value(pt({0.3, 0.2})), 1.0);
  EXPECT_EQ(xi.value(pt({1.0, 0.5})), 0.0);
  EXPECT_EQ(xi.gradient(pt({1.0, 0.5})).norm(), 0.0);
  EXPECT_THROW(Cutoff(pt({0.0}), 1.0, 1.0), InvalidArgument);
  double worst = 0.0;
  for (int j = 0; j <= 1000; ++j) {
    const Point z = pt({0.5 + 0.5 * j / 1000.0, 0.0});
    worst = std::max(worst, xi.gradient(z).norm());
    const double h = 1e-6;
    const double fd = (xi.value(z + pt({h, 0.0})) - xi.value(z - pt({h, 0.0}))) / (2 * h);
    EXPECT_NEAR(xi.gradient(z)[0], fd, 1e-6);
  }
  EXPECT_LE(worst, 2.0 / 0.5);
}

TEST(Cutoff, CommutatorData) {
  const Cutoff xi(pt({0.0, 0.0}), 0.3, 0.8);
  SmoothFunction one{[](const Point&) { return 1.0; }, [](const Point&) -> Point { return Point::Zero(2); }};
  const LocalizedProblem loc = cutoff_localize(one, identity_coefficients(2, 1), VectorField(), xi);
  for (const Point& z : {pt({0.5, 0.1}), pt({0.1, 0.6}), pt({0.0, 0.2}), pt({0.9, 0.9})}) {
    EXPECT_EQ(loc.g(z), 0.0);
    EXPECT_NEAR((loc.G(z) + xi.gradient(z)).norm(), 0.0, 1e-15);
    EXPECT_DOUBLE_EQ(loc.u.value(z), xi.value(z));
  }
  const auto [fl, Fl] = cutoff_localize(constant_field(2.0), VectorField(), xi);
  EXPECT_EQ(fl(pt({0.9, 0.0})), 0.0);
  EXPECT_EQ(fl(pt({0.1, 0.0})), 2.0);
  EXPECT_FALSE(static_cast<bool>(Fl));
}

TEST(RunHomotopy, AffineDataIsEpsIndependent) {
  ProblemData pd;
  pd.spec = WeightSpec::degenerate(2, vec({1.0}));
  pd.A = identity_coefficients(2, 1);
  pd.dirichlet = ScalarField([](const Point& z) { return z[0]; });
  const HomotopyReport r = run_homotopy(pd, HomotopySchedule::geometric(1), grid2d(8));
  for (const auto& row : r.rows) EXPECT_LE(row.diff_H1_K, 1e-8);
  EXPECT_TRUE(r.pass);
}

TEST(RunHomotopy, RepeatedZerosGiveIdenticalSolves) {
  ProblemData pd;
  pd.spec = WeightSpec::degenerate(2, vec({1.0}));
  pd.A = identity_coefficients(2, 1);
  pd.f = constant_field(-4.0);
  pd.dirichlet = ScalarField([](const Point& z) { return z[1] * z[1]; });
  HomotopySchedule s;
  s.eps = {vec({0.0}), vec({0.0})};
  const HomotopyReport r = run_homotopy(pd, s, grid2d(8));
  EXPECT_EQ(r.rows[0].diff_H1_K, 0.0);
  EXPECT_TRUE(r.pass);
}

TEST(RunHomotopy, ManufacturedConvergesToLimit) {
  // u* = y^2 at eps = 0 with a = 1.
  ProblemData pd;
  pd.spec = WeightSpec::degenerate(2, vec({1.0}));
  pd.A = identity_coefficients(2, 1);
  pd.f = constant_field(-4.0);
  pd.dirichlet = ScalarField([](const Point& z) { return z[1] * z[1]; });
  HomotopyOptions opt;
  opt.threads = 2;
  const HomotopyReport r = run_homotopy(pd, HomotopySchedule::geometric(1), grid2d(32), opt);
  ASSERT_EQ(r.rows.size(), 6u);
  for (std::size_t k = 1; k + 1 < r.rows.size(); ++k) EXPECT_LT(r.rows[k].diff_H1_K, r.rows[k - 1].diff_H1_K);
  EXPECT_LE(r.rows[4].diff_H1_K, 0.05 * r.limit_H1_K);
  EXPECT_TRUE(r.energy_uniform);
  EXPECT_TRUE(r.limit_is_solution);
  EXPECT_TRUE(r.pass);
  EXPECT_TRUE(std::isnan(r.rows[0].energy_ratio));

  std::ostringstream csv;
  write_homotopy_csv(csv, r);
  EXPECT_EQ(csv.str().substr(0, csv.str().find('\n')), "eps_max,energy_norm,diff_H1_K,energy_ratio");
}

TEST(RunHomotopy, HomogeneousEnergyRatioBounded) {
  ProblemData pd;
  pd.spec = WeightSpec::degenerate(2, vec({0.5}));
  pd.A = smooth_block(2, 1, 3);
  pd.dirichlet = ScalarField([](const Point& z) { return std::cos(z[0]) + z[1] * z[1]; });
  const HomotopyReport r = run_homotopy(pd, HomotopySchedule::geometric(1), grid2d(16));
  double lo = INFINITY, hi = 0.0;
  for (const auto& row : r.rows) {
    lo = std::min(lo, row.energy_ratio);
    hi = std::max(hi, row.energy_ratio);
  }
  EXPECT_GT(lo, 0.0);
  EXPECT_LE(hi, 2.0 * lo);
  EXPECT_TRUE(r.energy_uniform);
}
