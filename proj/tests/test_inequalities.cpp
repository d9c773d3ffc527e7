#include "orthodeg/inequalities.hpp"
#include "orthodeg/quadrature.hpp"

#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <numbers>
#include <numeric>
#include <random>
#include <sstream>

using namespace orthodeg;

namespace {

constexpr double kPi = std::numbers::pi;

Eigen::VectorXd vec(std::initializer_list<double> v) {
  Eigen::VectorXd out(v.size());
  int i = 0;
  for (double x : v) out[i++] = x;
  return out;
}

Point pt(std::initializer_list<double> v) { return Point(vec(v)); }

SmoothFunction constant(int d, double c) {
  return {[c](const Point&) { return c; }, [d](const Point&) -> Point { return Point::Zero(d); }};
}

SmoothFunction scaled(const SmoothFunction& u, double lambda, double shift = 0.0) {
  return {[=](const Point& z) { return lambda * u.value(z) + shift; },
          [=](const Point& z) -> Point { return lambda * u.gradient(z); }};
}

// (1 - |z|^2)^2 on the unit ball.
SmoothFunction bump(int d, double R = 1.0) {
  return {[R](const Point& z) {
            const double t = 1.0 - z.squaredNorm() / (R * R);
            return t > 0.0 ? t * t : 0.0;
          },
          [R, d](const Point& z) -> Point {
            const double t = 1.0 - z.squaredNorm() / (R * R);
            return t > 0.0 ? Point(-4.0 * t / (R * R) * z) : Point(Point::Zero(d));
          }};
}

}  // namespace

TEST(BallRule, MassesAgainstPolarClosedForms) {
  // |y|^a on the unit disk: 2 sqrt(pi) Gamma((a+1)/2) / (Gamma(a/2+1) (a+2)).
  for (double a : {-0.5, 0.0, 1.0, 2.5}) {
    const double exact = 2.0 * std::sqrt(kPi) * std::tgamma(0.5 * (a + 1)) / std::tgamma(0.5 * a + 1) / (a + 2);
    EXPECT_NEAR(ball_rule(WeightSpec::degenerate(2, vec({a})), 1.0).mass(), exact, 1e-11 * exact) << a;
  }
  // |x|^0.5 |y|^-0.5 on a disk of radius 2: sqrt(2) pi R^2.
  EXPECT_NEAR(ball_rule(WeightSpec::degenerate(2, vec({0.5, -0.5})), 2.0).mass(), 4.0 * std::sqrt(2.0) * kPi, 1e-10);
  // Sphere |z| = r with |y|: 4 r^2.
  EXPECT_NEAR(sphere_rule(WeightSpec::degenerate(2, vec({1.0})), 0.5).mass(), 1.0, 1e-12);
  EXPECT_THROW(ball_rule(WeightSpec::degenerate(3, vec({1.0})), 1.0), InvalidArgument);
}

TEST(BallRule, RegularizedMassMatchesAdaptive) {
  for (double eps : {0.01, 0.3, 1.0})
    for (double a : {-0.7, 1.0, 2.0}) {
      const WeightSpec spec = WeightSpec::degenerate(2, vec({a})).with_eps(eps);
      const double exact = integrate_adaptive(
          [&](double t) {
            const double s = std::sin(t), c = std::cos(t);
            return 2.0 * std::pow(eps * eps + s * s, 0.5 * a) * c * c;
          },
          -kPi / 2, kPi / 2, 1e-13);
      EXPECT_NEAR(ball_rule(spec, 1.0).mass(), exact, 1e-9 * exact) << eps << ' ' << a;
    }
}

TEST(BoxRule, ProductOfAxisMasses) {
  const WeightSpec spec = WeightSpec::degenerate(2, vec({0.5})).with_eps(0.2);
  const Box box{pt({-1.0, -0.5}), pt({1.0, 2.0})};
  EXPECT_NEAR(box_rule(spec, box).mass(), weight_mass(spec, box), 1e-10);
}

TEST(Exponents, Examples) {
  EXPECT_EQ(critical_exponent(2, std::vector<Rational>{Rational(2)}), Rational(4));
  EXPECT_EQ(critical_exponent(3, std::vector<Rational>{Rational(2)}), Rational(10, 3));
  EXPECT_THROW(critical_exponent(1, std::vector<Rational>{Rational(1)}), InvalidArgument);
  EXPECT_TRUE(std::isinf(critical_exponent(2, vec({-0.5}))));
  EXPECT_NO_THROW(check_sobolev_exponent(2, vec({2.0}), 4.0));
  EXPECT_THROW(check_sobolev_exponent(2, vec({2.0}), 4.5), InvalidArgument);
  EXPECT_THROW(check_sobolev_exponent(2, vec({2.0}), 1.5), InvalidArgument);
  EXPECT_NO_THROW(check_sobolev_exponent(2, vec({0.0}), 100.0));
}

TEST(Exponents, RandomRationalCheck) {
  std::mt19937_64 rng(17);
  std::uniform_int_distribution<int> dd(1, 3), num(-5, 12), den(1, 6);
  int checked = 0;
  while (checked < 10) {
    const int d = dd(rng);
    const int n = std::uniform_int_distribution<int>(1, d)(rng);
    std::vector<Rational> a;
    std::int64_t Dn = d, Dd = 1;
    for (int i = 0; i < n; ++i) {
      const std::int64_t p = num(rng), q = den(rng);
      a.emplace_back(p, q);
      if (p > 0) {
        Dn = Dn * q + p * Dd;
        Dd *= q;
      }
    }
    if (Dn <= 2 * Dd) continue;
    std::int64_t en = 2 * Dn, ed = Dn - 2 * Dd;
    const std::int64_t g = std::gcd(en, ed);
    const Rational got = critical_exponent(d, a);
    EXPECT_EQ(got.num, en / g);
    EXPECT_EQ(got.den, ed / g);
    ++checked;
  }
}

TEST(Trace, Examples) {
  EXPECT_NEAR(trace_ratio(constant(1, 1.0), WeightSpec::degenerate(1, vec({0.0})), 1.0, 1.0), 1.0, 1e-13);
  EXPECT_NEAR(trace_ratio(constant(2, 1.0), WeightSpec::degenerate(2, vec({1.0})), 1.0, 1.0), 3.0, 1e-11);
}

TEST(Trace, EpsSpreadBounded) {
  const TestFunctionFamily fam = make_family(FamilyKind::oscillatory, 2, 1.0, 5, 3, false);
  for (const SmoothFunction& u : fam.members) {
    double lo = INFINITY, hi = 0.0;
    for (double eps : {0.0, 0.25, 0.5, 1.0}) {
      const double r = trace_ratio(u, WeightSpec::degenerate(2, vec({1.0})).with_eps(eps), 0.5, 1.0);
      lo = std::min(lo, r);
      hi = std::max(hi, r);
    }
    EXPECT_LE(hi, 10.0 * lo);
  }
}

TEST(Hardy, Examples) {
  EXPECT_NEAR(hardy_ratio(constant(1, 1.0), WeightSpec::degenerate(1, vec({1.0})), 0, 1.0), 0.125, 1e-13);
  EXPECT_DOUBLE_EQ(hardy_constant(1.0), 0.25);
  EXPECT_DOUBLE_EQ(hardy_constant(-0.5), 0.0625);
  // Odd in y with a > 0.
  const SmoothFunction odd{[](const Point& z) { return z[1] * (2.0 - z[0]); },
                           [](const Point& z) -> Point { return pt({-z[1], 2.0 - z[0]}); }};
  const double r = hardy_ratio(odd, WeightSpec::degenerate(2, vec({1.5})), 0, 1.0);
  EXPECT_GT(r, 0.0);
  EXPECT_LE(r, 1.0);
}

TEST(Hardy, SupersingularNeedsVanishing) {
  const WeightSpec spec(1, vec({-2.0}), vec({0.0}), true);
  // u = (|y| - 0.2)^2 for |y| > 0.2, zero inside.
  const SmoothFunction u{[](const Point& z) {
                           const double t = std::abs(z[0]) - 0.2;
                           return t > 0.0 ? t * t : 0.0;
                         },
                         [](const Point& z) -> Point {
                           const double t = std::abs(z[0]) - 0.2;
                           return pt({t > 0.0 ? 2.0 * t * (z[0] > 0 ? 1.0 : -1.0) : 0.0});
                         }};
  EXPECT_THROW(hardy_ratio(u, spec, 0, 1.0), DivergentIntegral);
  const double r = hardy_ratio(u, spec, 0, 1.0, 0.2);
  EXPECT_GT(r, 0.0);
  EXPECT_LE(r, 1.0);
  EXPECT_THROW(hardy_ratio(constant(1, 1.0), spec, 0, 1.0, 0.2), InvalidArgument);
}

TEST(Hardy, AdversarialNearMinusOne) {
  // Profiles concentrating at Sigma as a -> -1.
  for (double a : {-0.9, -0.99}) {
    for (double delta : {0.1, 0.01, 0.001}) {
      const SmoothFunction u{[delta](const Point& z) { return 1.0 / (1.0 + std::abs(z[0]) / delta); },
                             [delta](const Point& z) -> Point {
                               const double s = 1.0 + std::abs(z[0]) / delta;
                               return pt({-(z[0] > 0 ? 1.0 : -1.0) / (delta * s * s)});
                             }};
      const double r = hardy_ratio(u, WeightSpec::degenerate(1, vec({a})), 0, 1.0);
      EXPECT_LE(r, 1.05) << a << ' ' << delta;
      EXPECT_GT(r, 0.0);
    }
  }
}

TEST(Hardy, SplineSweep) {
  const TestFunctionFamily fam = make_family(FamilyKind::random_spline, 2, 1.0, 50, 11);
  for (double a : {-0.5, 0.5, 1.0, 2.0}) {
    const WeightSpec base = WeightSpec::degenerate(2, vec({a}));
    const InequalityVerdict v = sweep(
        "hardy", [&](const SmoothFunction& u, double eps) { return hardy_ratio(u, base.with_eps(eps), 0, 1.0); }, fam,
        {0.0, 0.1, 0.5, 1.0}, 1.0, 4);
    EXPECT_TRUE(v.pass) << a << ' ' << v.max_ratio;
    EXPECT_EQ(v.ratios.rows(), 50);
  }
}

TEST(Poincare, Examples) {
  const WeightSpec spec = WeightSpec::degenerate(2, vec({0.0}));
  const SmoothFunction u = bump(2, 0.5);
  // Support inside B_1 with the narrow bump.
  const double r = poincare_ratio(u, spec, 1.0);
  EXPECT_LT(r, 1.0);
  EXPECT_NEAR(poincare_ratio(scaled(u, 10.0), spec, 1.0), r, 1e-12 * r);
  EXPECT_THROW(poincare_ratio(constant(2, 1.0), spec, 1.0), InvalidArgument);
  double lo = INFINITY, hi = 0.0;
  for (double eps : {0.0, 0.25, 0.5, 1.0}) {
    const double v = poincare_ratio(bump(2), WeightSpec::degenerate(2, vec({1.5})).with_eps(eps), 1.0);
    lo = std::min(lo, v);
    hi = std::max(hi, v);
  }
  EXPECT_LE(hi, 10.0 * lo);
  EXPECT_LE(hi, 1.0);
}

TEST(Sobolev, RatiosAndCrossCheck) {
  const WeightSpec spec = WeightSpec::degenerate(2, vec({2.0}));
  const SmoothFunction u = bump(2);
  EXPECT_THROW(sobolev_ratio(u, spec, 4.5, 1.0), InvalidArgument);
  EXPECT_GT(sobolev_ratio(u, spec, 4.0, 1.0), 0.0);
  // q = 2 is the unscaled Poincare quotient.
  const double p = poincare_ratio(u, spec, 1.0) * std::sqrt(2.0) / hardy_constant(2.0);
  EXPECT_NEAR(sobolev_ratio(u, spec, 2.0, 1.0), p, 1e-12 * p);
}

TEST(L1Ckn, Examples) {
  const SmoothFunction u = bump(1);
  EXPECT_THROW(l1_ckn_ratio(u, 1.0, 0.0, 3.0, 1.0), InvalidArgument);
  EXPECT_THROW(l1_ckn_ratio(u, 1.0, 0.0, 0.5, 1.0), InvalidArgument);
  for (double eps : {0.0, 0.5, 1.0}) {
    const double r = l1_ckn_ratio(u, 1.0, eps, 2.0, 1.0);
    EXPECT_TRUE(std::isfinite(r));
    EXPECT_GT(r, 0.0);
  }
  // a = 0, q = 1: int |u| = 16/15 = int |y| |u'|.
  EXPECT_NEAR(l1_ckn_ratio(u, 0.0, 0.0, 1.0, 1.0), 1.0, 1e-12);
}

TEST(PoincareWirtinger, Examples) {
  const WeightSpec spec = WeightSpec::degenerate(1, vec({1.0}));
  EXPECT_EQ(poincare_wirtinger_ratio(constant(1, 3.0), spec, 1.0), 0.0);
  const SmoothFunction lin{[](const Point& z) { return z[0]; }, [](const Point&) -> Point { return pt({1.0}); }};
  EXPECT_NEAR(poincare_wirtinger_ratio(lin, spec, 1.0), 1.0 / 18.0, 1e-13);
  EXPECT_NEAR(poincare_wirtinger_ratio(scaled(lin, 1.0, 5.0), spec, 1.0), 1.0 / 18.0, 1e-12);
  EXPECT_THROW(poincare_wirtinger_ratio(lin, spec.with_eps(0.1), 1.0), InvalidArgument);
  const SmoothFunction u = make_family(FamilyKind::oscillatory, 2, 1.0, 1, 4, false).members[0];
  const WeightSpec s2 = WeightSpec::degenerate(2, vec({0.5}));
  EXPECT_NEAR(poincare_wirtinger_ratio(scaled(u, 1.0, -2.0), s2, 1.0), poincare_wirtinger_ratio(u, s2, 1.0), 1e-11);
}

TEST(Ratios, Homogeneity) {
  const SmoothFunction u = make_family(FamilyKind::random_spline, 2, 1.0, 1, 21).members[0];
  const SmoothFunction u1 = make_family(FamilyKind::poly_times_bump, 1, 1.0, 1, 22).members[0];
  const WeightSpec spec = WeightSpec::degenerate(2, vec({1.0})).with_eps(0.1);
  const WeightSpec s0 = WeightSpec::degenerate(2, vec({1.0}));
  const std::vector<std::function<double(const SmoothFunction&)>> ratios = {
      [&](const SmoothFunction& v) { return trace_ratio(v, spec, 0.5, 1.0); },
      [&](const SmoothFunction& v) { return hardy_ratio(v, spec, 0, 1.0); },
      [&](const SmoothFunction& v) { return poincare_ratio(v, spec, 1.0); },
      [&](const SmoothFunction& v) { return sobolev_ratio(v, spec, 3.0, 1.0); },
      [&](const SmoothFunction& v) { return poincare_wirtinger_ratio(v, s0, 1.0); },
  };
  for (const auto& ratio : ratios) {
    const double r = ratio(u);
    for (double lambda : {10.0, 0.01}) EXPECT_NEAR(ratio(scaled(u, lambda)), r, 1e-12 * r);
  }
  const double r = l1_ckn_ratio(u1, 0.5, 0.2, 3.0, 1.0);
  for (double lambda : {10.0, 0.01}) EXPECT_NEAR(l1_ckn_ratio(scaled(u1, lambda), 0.5, 0.2, 3.0, 1.0), r, 1e-12 * r);
}

TEST(Ratios, WeightedL2MonotoneInEps) {
  const TestFunctionFamily fam = make_family(FamilyKind::random_spline, 2, 1.0, 20, 8);
  const WeightSpec base = WeightSpec::degenerate(2, vec({1.5}));
  std::vector<PointRule> rules;
  for (double eps : {0.0, 0.1, 0.5, 1.0}) rules.push_back(ball_rule(base.with_eps(eps), 1.0));
  for (const SmoothFunction& u : fam.members) {
    double prev = 0.0;
    for (const PointRule& B : rules) {
      const double v = B.integrate([&](const Point& z) { return u.value(z) * u.value(z); });
      EXPECT_GE(v, prev * (1.0 - 1e-12));
      prev = v;
    }
  }
}

TEST(Families, CompactAndGradientsMatchFiniteDifferences) {
  for (FamilyKind k : {FamilyKind::tensor_bump, FamilyKind::poly_times_bump, FamilyKind::oscillatory,
                       FamilyKind::random_spline}) {
    const TestFunctionFamily fam = make_family(k, 2, 1.5, 4, 9);
    EXPECT_EQ(fam.name, to_string(k));
    for (const SmoothFunction& u : fam.members) {
      EXPECT_EQ(u.value(pt({1.5, 0.0})), 0.0);
      EXPECT_EQ(u.value(pt({1.2, 1.2})), 0.0);
      for (const Point& z : {pt({0.3, 0.2}), pt({-0.7, 0.1}), pt({0.05, -0.9})}) {
        const double h = 1e-6;
        for (int j = 0; j < 2; ++j) {
          Point e = Point::Zero(2);
          e[j] = h;
          const double fd = (u.value(z + e) - u.value(z - e)) / (2 * h);
          EXPECT_NEAR(u.gradient(z)[j], fd, 1e-6 * std::max(1.0, std::abs(fd))) << fam.name;
        }
      }
    }
  }
  const TestFunctionFamily a = calibration_family(2, 1.0, 5, 20), b = calibration_family(2, 1.0, 5, 20);
  EXPECT_EQ(a.members.size(), 20u);
  EXPECT_EQ(a.members[7].value(pt({0.1, 0.2})), b.members[7].value(pt({0.1, 0.2})));
}

TEST(Sweep, ConstantFamilyPassesAfterCalibration) {
  const WeightSpec base = WeightSpec::degenerate(2, vec({1.0}));
  const RatioFn ratio = [&](const SmoothFunction& u, double eps) {
    return trace_ratio(u, base.with_eps(eps), 1.0, 1.0);
  };
  TestFunctionFamily fam{"constant", {constant(2, 1.0), constant(2, -2.0)}};
  const double c = calibrate(ratio, fam);
  EXPECT_NEAR(c, 1.2 * 3.0, 1e-10);
  const InequalityVerdict v = sweep("trace", ratio, fam, {0.0, 0.25, 0.5, 1.0}, c);
  EXPECT_TRUE(v.pass);
  std::ostringstream csv;
  write_inequality_csv(csv, v);
  const std::string text = csv.str();
  EXPECT_EQ(text.substr(0, text.find('\n')), "inequality,member,eps,ratio");
  EXPECT_EQ(std::count(text.begin(), text.end(), '\n'), 9);
}

TEST(Sweep, CalibratedPoincareAndSobolev) {
  const TestFunctionFamily cal = calibration_family(2, 1.0, 101, 40);
  const TestFunctionFamily test = calibration_family(2, 1.0, 202, 40);
  const WeightSpec base = WeightSpec::degenerate(2, vec({1.0}));
  const double q = critical_exponent(2, base.a());
  const RatioFn sob = [&](const SmoothFunction& u, double eps) {
    return sobolev_ratio(u, base.with_eps(eps), q, 1.0);
  };
  const InequalityVerdict v = sweep("sobolev", sob, test, {0.0, 0.25, 0.5, 1.0}, calibrate(sob, cal), 4);
  EXPECT_TRUE(v.pass) << v.max_ratio << " vs " << v.constant;
}
