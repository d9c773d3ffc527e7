#pragma once

#include "orthodeg/types.hpp"
#include "orthodeg/weights.hpp"

#include <Eigen/Core>

#include <cstdint>
#include <functional>
#include <iosfwd>
#include <string>
#include <vector>

namespace orthodeg {

/// Quadrature nodes with weights that already contain the weight function.
struct PointRule {
  std::vector<Point> points;
  std::vector<double> weights;

  template <typename F>
  double integrate(F&& g) const {
    double s = 0.0;
    for (std::size_t j = 0; j < points.size(); ++j) s += weights[j] * g(points[j]);
    return s;
  }
  double mass() const;
};

/// Full ball of radius R about the origin (d <= 2; polar coordinates in
/// d = 2 with Gauss-Jacobi factors at the axes when eps_i = 0 and graded
/// pieces when eps_i > 0).
PointRule ball_rule(const WeightSpec& spec, double R, int points = 8);
/// Sphere |z| = r with surface measure (two points in d = 1).
PointRule sphere_rule(const WeightSpec& spec, double r, int points = 10);
/// Axis-aligned box; weighted axes may straddle 0.
PointRule box_rule(const WeightSpec& spec, const Box& box, int pieces = 8, int points = 10);

// ---------------------------------------------------------------------------
// Exponents

struct Rational {
  std::int64_t num = 0;
  std::int64_t den = 1;

  Rational() = default;
  Rational(std::int64_t n, std::int64_t d = 1);
  double value() const { return static_cast<double>(num) / static_cast<double>(den); }
  friend Rational operator+(Rational a, Rational b);
  friend Rational operator-(Rational a, Rational b);
  friend Rational operator*(Rational a, Rational b);
  friend Rational operator/(Rational a, Rational b);
  friend bool operator==(Rational a, Rational b) { return a.num == b.num && a.den == b.den; }
  friend bool operator<(Rational a, Rational b);
};

/// 2 (d + <a+>) / (d + <a+> - 2); throws InvalidArgument when d + <a+> <= 2.
Rational critical_exponent(int d, const std::vector<Rational>& a);
/// Same in floating point; +inf when d + <a+> <= 2.
double critical_exponent(int d, const Eigen::VectorXd& a);
/// Throws InvalidArgument unless 2 <= q <= 2*_a (q finite when d + <a+> <= 2).
void check_sobolev_exponent(int d, const Eigen::VectorXd& a, double q);

// ---------------------------------------------------------------------------
// Ratios LHS / RHS

/// Branch constant: 1/4 for a > 0, ((a + 1)/2)^2 for a <= 0.
double hardy_constant(double a);

/// int_{|z|=r} w u^2 / (r int_{B_R} w |grad u|^2 + r^-1 int_{B_R} w u^2).
double trace_ratio(const SmoothFunction& u, const WeightSpec& spec, double r, double R);

/// c int_{B_R} w u^2 / (R^-1 int_{dB_R} w y_i^2 u^2 + int_{B_R} w y_i^2 (d_i u)^2)
/// with the regularized factor eps_i^2 + y_i^2 in place of y_i^2.
/// For a_i <= -1 (d = 1 only) u must vanish on |y| < vanish, which then
/// bounds the domain of integration.
double hardy_ratio(const SmoothFunction& u, const WeightSpec& spec, int i, double R, double vanish = 0.0);

/// c(a)/sqrt(1 + R^2) int w u^2 / int w |grad u|^2 for u vanishing on
/// |z| = R, with c(a) the smallest Hardy branch constant over the axes.
double poincare_ratio(const SmoothFunction& u, const WeightSpec& spec, double R);

/// |u|_{L^q,w}^2 / |grad u|_{L^2,w}^2 over B_R for u vanishing on |z| = R.
double sobolev_ratio(const SmoothFunction& u, const WeightSpec& spec, double q, double R);

/// 1-D: (int rho^a |u|^q)^{1/q} / int rho^{(1+a)/q} |u'| on (-R, R).
/// Requires q >= 1 and q a <= 1 + a.
double l1_ckn_ratio(const SmoothFunction& u, double a, double eps, double q, double R);

/// int w |u - <u>|^2 / (R^2 int w |grad u|^2) on (-R, R)^{d-n} x (0, R)^n,
/// eps = 0 only, <u> the weighted mean.
double poincare_wirtinger_ratio(const SmoothFunction& u, const WeightSpec& spec, double R);

// ---------------------------------------------------------------------------
// Families and sweeps

enum class FamilyKind { tensor_bump, poly_times_bump, oscillatory, random_spline };
std::string to_string(FamilyKind k);

struct TestFunctionFamily {
  std::string name;
  std::vector<SmoothFunction> members;
};

/// Members are multiplied by (1 - |z|^2/R^2)^2_+ when `compact` (C^1, zero
/// with zero gradient on |z| = R); tensor bumps are always compact.
TestFunctionFamily make_family(FamilyKind kind, int d, double R, int count, std::uint64_t seed, bool compact = true);

/// Fixed calibration set: equal shares of the four kinds, `count` in total.
TestFunctionFamily calibration_family(int d, double R, std::uint64_t seed, int count = 200, bool compact = true);

using RatioFn = std::function<double(const SmoothFunction& u, double eps)>;

inline constexpr double kCalibrationFactor = 1.2;
inline constexpr double kSweepSlack = 0.05;

/// 1.2 x max ratio over the family at eps = 0.
double calibrate(const RatioFn& ratio, const TestFunctionFamily& family);

struct InequalityVerdict {
  std::string id;
  std::string family;
  std::vector<double> eps_grid;
  Eigen::MatrixXd ratios;  // member x eps
  double max_ratio = 0.0;
  double constant = 0.0;
  bool pass = false;       // max_ratio <= constant (1 + kSweepSlack)
};

InequalityVerdict sweep(const std::string& id, const RatioFn& ratio, const TestFunctionFamily& family,
                        const std::vector<double>& eps_grid, double constant, int threads = 1);

/// CSV: inequality,member,eps,ratio
void write_inequality_csv(std::ostream& out, const InequalityVerdict& v);

}  // namespace orthodeg
