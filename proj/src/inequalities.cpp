#include "orthodeg/inequalities.hpp"

#include "orthodeg/quadrature.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <future>
#include <limits>
#include <map>
#include <memory>
#include <mutex>
#include <numbers>
#include <numeric>
#include <ostream>
#include <random>

namespace orthodeg {

double PointRule::mass() const { return std::accumulate(weights.begin(), weights.end(), 0.0); }

namespace {

constexpr double kPi = std::numbers::pi;

// 1-D composite rule; `div` holds the algebraic factor already folded into w.
struct Rule1 {
  std::vector<double> x, w, div;
};

Rule1 composite(double l, double r, double beta, double alpha, double grade_l, double grade_r, int pieces,
                int points) {
  std::vector<double> br;
  for (int j = 0; j <= pieces; ++j) br.push_back(l + (r - l) * j / pieces);
  const double w0 = (r - l) / pieces;
  if (grade_l > 0.0)
    for (double w = 0.5 * w0; w > grade_l && br.size() < 200; w *= 0.5) br.push_back(l + w);
  if (grade_r > 0.0)
    for (double w = 0.5 * w0; w > grade_r && br.size() < 400; w *= 0.5) br.push_back(r - w);
  std::sort(br.begin(), br.end());
  Rule1 out;
  for (std::size_t p = 0; p + 1 < br.size(); ++p) {
    const double pl = br[p], pr = br[p + 1];
    const double b = p == 0 ? beta : 0.0;
    const double a = p + 2 == br.size() ? alpha : 0.0;
    if (b == 0.0 && a == 0.0) {
      const QuadRule q = gauss_legendre(points).mapped(pl, pr);
      for (int j = 0; j < q.size(); ++j) {
        out.x.push_back(q.nodes[j]);
        out.w.push_back(q.weights[j]);
        out.div.push_back(1.0);
      }
    } else {
      const QuadRule q = jacobi_on(points, pl, pr, b, a);
      for (int j = 0; j < q.size(); ++j) {
        const double t = q.nodes[j];
        out.x.push_back(t);
        out.w.push_back(q.weights[j]);
        out.div.push_back(std::pow(t - pl, b) * std::pow(pr - t, a));
      }
    }
  }
  return out;
}

struct PolarAxes {
  double sing[2] = {0.0, 0.0};   // Gauss-Jacobi exponent per coordinate
  double layer[2] = {0.0, 0.0};  // eps of a graded layer per coordinate (0: none)
};

PolarAxes polar_axes(const WeightSpec& spec) {
  PolarAxes ax;
  for (int i = 0; i < spec.n(); ++i) {
    const int k = spec.axis(i);
    if (spec.a(i) == 0.0) continue;
    if (spec.eps(i) == 0.0) {
      ax.sing[k] = spec.a(i);
    } else {
      ax.layer[k] = spec.eps(i);
    }
  }
  return ax;
}

// Quadrants of the circle with the axis behavior at both ends; sin vanishes
// at even multiples of pi/2 (coordinate 1), cos at odd ones (coordinate 0).
void append_circle(PointRule& out, const WeightSpec& spec, const PolarAxes& ax, double rho, double w_rho,
                   double div_rho, double jac, int points) {
  for (int q = 0; q < 4; ++q) {
    const double l = q * kPi / 2, r = l + kPi / 2;
    const int kl = q % 2 == 0 ? 1 : 0, kr = 1 - kl;
    auto grade = [&](int k) {
      const double g = ax.layer[k] > 0.0 ? 0.5 * ax.layer[k] / rho : 0.0;
      return g < kPi / 8 ? g : 0.0;
    };
    const Rule1 ang = composite(l, r, ax.sing[kl], ax.sing[kr], grade(kl), grade(kr), 4, points);
    for (std::size_t j = 0; j < ang.x.size(); ++j) {
      Point z(2);
      z << rho * std::cos(ang.x[j]), rho * std::sin(ang.x[j]);
      const double w = w_rho * ang.w[j] * eval_weight_at(spec, z) * jac / (div_rho * ang.div[j]);
      out.points.push_back(z);
      out.weights.push_back(w);
    }
  }
}

PointRule interval_rule(double a, double eps, double l, double r, int pieces, int points) {
  PointRule out;
  for (int p = 0; p < pieces; ++p) {
    const double pl = l + (r - l) * p / pieces, pr = l + (r - l) * (p + 1) / pieces;
    const QuadRule q = weighted_rule(a, eps, pl, pr, points);
    for (int j = 0; j < q.size(); ++j) {
      Point z(1);
      z << q.nodes[j];
      out.points.push_back(z);
      out.weights.push_back(q.weights[j]);
    }
  }
  return out;
}

// Rules are reused across the members of a family.
std::mutex cache_mutex;
std::map<std::vector<double>, std::shared_ptr<const PointRule>> cache;

template <typename Build>
const PointRule& cached(std::vector<double> key, Build&& build) {
  {
    std::lock_guard<std::mutex> lock(cache_mutex);
    auto it = cache.find(key);
    if (it != cache.end()) return *it->second;
  }
  auto rule = std::make_shared<const PointRule>(build());
  std::lock_guard<std::mutex> lock(cache_mutex);
  if (cache.size() > 512) cache.clear();
  return *cache.emplace(std::move(key), std::move(rule)).first->second;
}

std::vector<double> key_of(double tag, const WeightSpec& spec, std::initializer_list<double> extra) {
  std::vector<double> k{tag, static_cast<double>(spec.d())};
  for (int i = 0; i < spec.n(); ++i) {
    k.push_back(spec.a(i));
    k.push_back(spec.eps(i));
  }
  k.insert(k.end(), extra);
  return k;
}

double sq(double x) { return x * x; }

void check_integrable(const WeightSpec& spec) {
  for (int i = 0; i < spec.n(); ++i)
    if (spec.a(i) <= -1.0 && spec.eps(i) == 0.0) throw DivergentIntegral("weight is not integrable across Sigma");
}

}  // namespace

PointRule ball_rule(const WeightSpec& spec, double R, int points) {
  require(R > 0.0, "ball_rule: R must be positive");
  check_integrable(spec);
  if (spec.d() == 1) return interval_rule(spec.a(0), spec.eps(0), -R, R, 8, points);
  if (spec.d() != 2) throw InvalidArgument("ball quadrature supports d <= 2");
  const PolarAxes ax = polar_axes(spec);
  double grade = 0.0;
  for (double e : ax.layer)
    if (e > 0.0) grade = grade > 0.0 ? std::min(grade, 0.5 * e) : 0.5 * e;
  const Rule1 rad = composite(0.0, R, 1.0 + ax.sing[0] + ax.sing[1], 0.0, grade, 0.0, 8, points);
  PointRule out;
  for (std::size_t j = 0; j < rad.x.size(); ++j)
    append_circle(out, spec, ax, rad.x[j], rad.w[j], rad.div[j], rad.x[j], points);
  return out;
}

PointRule sphere_rule(const WeightSpec& spec, double r, int points) {
  require(r > 0.0, "sphere_rule: r must be positive");
  PointRule out;
  if (spec.d() == 1) {
    for (double s : {-r, r}) {
      Point z(1);
      z << s;
      out.points.push_back(z);
      out.weights.push_back(eval_weight_at(spec, z));
    }
    return out;
  }
  if (spec.d() != 2) throw InvalidArgument("sphere quadrature supports d <= 2");
  append_circle(out, spec, polar_axes(spec), r, 1.0, 1.0, r, points);
  return out;
}

PointRule box_rule(const WeightSpec& spec, const Box& box, int pieces, int points) {
  require(box.dim() == spec.d(), "box_rule: dimension mismatch");
  check_integrable(spec);
  std::vector<PointRule> axes;
  for (int k = 0; k < spec.d(); ++k) {
    const int i = spec.weighted_index(k);
    axes.push_back(interval_rule(i >= 0 ? spec.a(i) : 0.0, i >= 0 ? spec.eps(i) : 0.0, box.lo[k], box.hi[k], pieces,
                                 points));
  }
  PointRule out;
  std::vector<std::size_t> idx(spec.d(), 0);
  while (true) {
    Point z(spec.d());
    double w = 1.0;
    for (int k = 0; k < spec.d(); ++k) {
      z[k] = axes[k].points[idx[k]][0];
      w *= axes[k].weights[idx[k]];
    }
    out.points.push_back(z);
    out.weights.push_back(w);
    int k = 0;
    for (; k < spec.d(); ++k) {
      if (++idx[k] < axes[k].points.size()) break;
      idx[k] = 0;
    }
    if (k == spec.d()) break;
  }
  return out;
}

// ---------------------------------------------------------------------------

Rational::Rational(std::int64_t n, std::int64_t d) : num(n), den(d) {
  require(d != 0, "Rational: zero denominator");
  if (den < 0) {
    num = -num;
    den = -den;
  }
  const std::int64_t g = std::gcd(num < 0 ? -num : num, den);
  if (g > 1) {
    num /= g;
    den /= g;
  }
}

Rational operator+(Rational a, Rational b) { return Rational(a.num * b.den + b.num * a.den, a.den * b.den); }
Rational operator-(Rational a, Rational b) { return Rational(a.num * b.den - b.num * a.den, a.den * b.den); }
Rational operator*(Rational a, Rational b) { return Rational(a.num * b.num, a.den * b.den); }
Rational operator/(Rational a, Rational b) { return Rational(a.num * b.den, a.den * b.num); }
bool operator<(Rational a, Rational b) { return a.num * b.den < b.num * a.den; }

Rational critical_exponent(int d, const std::vector<Rational>& a) {
  Rational D(d);
  for (const Rational& ai : a)
    if (Rational(0) < ai) D = D + ai;
  if (!(Rational(2) < D)) throw InvalidArgument("critical exponent needs d + <a+> > 2");
  return Rational(2) * D / (D - Rational(2));
}

double critical_exponent(int d, const Eigen::VectorXd& a) {
  const double D = d + a.cwiseMax(0.0).sum();
  return D > 2.0 ? 2.0 * D / (D - 2.0) : std::numeric_limits<double>::infinity();
}

void check_sobolev_exponent(int d, const Eigen::VectorXd& a, double q) {
  const double cap = critical_exponent(d, a);
  if (!(q >= 2.0) || !std::isfinite(q) || q > cap * (1.0 + 1e-14)) {
    throw InvalidArgument("Sobolev exponent q = " + std::to_string(q) + " outside [2, 2*_a] with 2*_a = " +
                          std::to_string(cap));
  }
}

double hardy_constant(double a) { return a > 0.0 ? 0.25 : sq(0.5 * (a + 1.0)); }

double trace_ratio(const SmoothFunction& u, const WeightSpec& spec, double r, double R) {
  require(r > 0.0 && r <= R, "trace_ratio: need 0 < r <= R");
  const PointRule& S = cached(key_of(1, spec, {r}), [&] { return sphere_rule(spec, r, 16); });
  const PointRule& B = cached(key_of(2, spec, {R}), [&] { return ball_rule(spec, R); });
  const double lhs = S.integrate([&](const Point& z) { return sq(u.value(z)); });
  double grad = 0.0, val = 0.0;
  for (std::size_t j = 0; j < B.points.size(); ++j) {
    grad += B.weights[j] * u.gradient(B.points[j]).squaredNorm();
    val += B.weights[j] * sq(u.value(B.points[j]));
  }
  return lhs / (r * grad + val / r);
}

double hardy_ratio(const SmoothFunction& u, const WeightSpec& spec, int i, double R, double vanish) {
  require(i >= 0 && i < spec.n(), "hardy_ratio: axis must be weighted");
  require(R > 0.0, "hardy_ratio: R must be positive");
  const int k = spec.axis(i);
  const double e2 = sq(spec.eps(i));
  const double c = hardy_constant(spec.a(i));
  auto shift = [&](const Point& z) { return e2 + sq(z[k]); };

  if (spec.a(i) <= -1.0 && spec.eps(i) == 0.0) {
    if (spec.d() != 1) throw InvalidArgument("hardy_ratio: the supersingular branch supports d = 1");
    if (!(vanish > 0.0 && vanish < R)) {
      throw DivergentIntegral("hardy_ratio: a <= -1 needs u vanishing near Sigma (vanish > 0)");
    }
    const double scale = std::max(std::abs(u.value(Point::Constant(1, R))), 1.0);
    for (int j = 0; j <= 64; ++j) {
      Point z(1);
      z << vanish * (2.0 * j / 64 - 1.0);
      if (std::abs(u.value(z)) > 1e-12 * scale) throw InvalidArgument("hardy_ratio: u does not vanish near Sigma");
    }
    double lhs = 0.0, rhs = 0.0;
    for (double sgn : {-1.0, 1.0}) {
      const QuadRule q = gauss_legendre(20);
      for (int p = 0; p < 16; ++p) {
        const double pl = vanish + (R - vanish) * p / 16, pr = vanish + (R - vanish) * (p + 1) / 16;
        const QuadRule m = q.mapped(pl, pr);
        for (int j = 0; j < m.size(); ++j) {
          Point z(1);
          z << sgn * m.nodes[j];
          const double w = m.weights[j] * eval_weight_at(spec, z);
          lhs += w * sq(u.value(z));
          rhs += w * shift(z) * sq(u.gradient(z)[0]);
        }
      }
      Point z(1);
      z << sgn * R;
      rhs += eval_weight_at(spec, z) * shift(z) * sq(u.value(z)) / R;
    }
    return c * lhs / rhs;
  }

  const PointRule& B = cached(key_of(2, spec, {R}), [&] { return ball_rule(spec, R); });
  const PointRule& S = cached(key_of(1, spec, {R}), [&] { return sphere_rule(spec, R, 16); });
  double lhs = 0.0, rhs = 0.0;
  for (std::size_t j = 0; j < B.points.size(); ++j) {
    const Point& z = B.points[j];
    lhs += B.weights[j] * sq(u.value(z));
    rhs += B.weights[j] * shift(z) * sq(u.gradient(z)[k]);
  }
  rhs += S.integrate([&](const Point& z) { return shift(z) * sq(u.value(z)); }) / R;
  return c * lhs / rhs;
}

namespace {

void require_vanishing_on_sphere(const SmoothFunction& u, const WeightSpec& spec, double R, const PointRule& B,
                                 const char* who) {
  const PointRule S = sphere_rule(spec.with_a(Eigen::VectorXd::Zero(spec.n())), R, 8);
  double inside = 0.0, edge = 0.0;
  for (const Point& z : B.points) inside = std::max(inside, std::abs(u.value(z)));
  for (const Point& z : S.points) edge = std::max(edge, std::abs(u.value(z)));
  if (edge > 1e-10 * std::max(inside, 1e-300)) {
    throw InvalidArgument(std::string(who) + ": u must vanish on the sphere |z| = R");
  }
}

}  // namespace

double poincare_ratio(const SmoothFunction& u, const WeightSpec& spec, double R) {
  const PointRule& B = cached(key_of(2, spec, {R}), [&] { return ball_rule(spec, R); });
  require_vanishing_on_sphere(u, spec, R, B, "poincare_ratio");
  double c = INFINITY;
  for (int i = 0; i < spec.n(); ++i) c = std::min(c, hardy_constant(spec.a(i)));
  double val = 0.0, grad = 0.0;
  for (std::size_t j = 0; j < B.points.size(); ++j) {
    val += B.weights[j] * sq(u.value(B.points[j]));
    grad += B.weights[j] * u.gradient(B.points[j]).squaredNorm();
  }
  return c / std::sqrt(1.0 + R * R) * val / grad;
}

double sobolev_ratio(const SmoothFunction& u, const WeightSpec& spec, double q, double R) {
  check_sobolev_exponent(spec.d(), spec.a(), q);
  const PointRule& B = cached(key_of(2, spec, {R}), [&] { return ball_rule(spec, R); });
  require_vanishing_on_sphere(u, spec, R, B, "sobolev_ratio");
  double lq = 0.0, grad = 0.0;
  for (std::size_t j = 0; j < B.points.size(); ++j) {
    lq += B.weights[j] * std::pow(std::abs(u.value(B.points[j])), q);
    grad += B.weights[j] * u.gradient(B.points[j]).squaredNorm();
  }
  return std::pow(lq, 2.0 / q) / grad;
}

double l1_ckn_ratio(const SmoothFunction& u, double a, double eps, double q, double R) {
  if (!(q >= 1.0) || q * a > 1.0 + a + 1e-14) {
    throw InvalidArgument("l1_ckn_ratio: need q >= 1 and q a <= 1 + a");
  }
  require(eps >= 0.0 && (a > -1.0 || eps > 0.0), "l1_ckn_ratio: weight not integrable");
  const double b = (1.0 + a) / q;
  const PointRule& L =
      cached({3, a, eps, R}, [&] { return interval_rule(a, eps, -R, R, 16, 12); });
  const PointRule& G =
      cached({4, b, eps, R}, [&] { return interval_rule(b, eps, -R, R, 16, 12); });
  const double lhs = L.integrate([&](const Point& z) { return std::pow(std::abs(u.value(z)), q); });
  const double rhs = G.integrate([&](const Point& z) { return std::abs(u.gradient(z)[0]); });
  return std::pow(lhs, 1.0 / q) / rhs;
}

double poincare_wirtinger_ratio(const SmoothFunction& u, const WeightSpec& spec, double R) {
  if (spec.eps().size() && spec.eps().maxCoeff() != 0.0) {
    throw InvalidArgument("poincare_wirtinger_ratio: defined for eps = 0 only");
  }
  Box box{Point(spec.d()), Point(spec.d())};
  for (int k = 0; k < spec.d(); ++k) {
    box.lo[k] = spec.weighted_index(k) >= 0 ? 0.0 : -R;
    box.hi[k] = R;
  }
  const PointRule& B =
      cached(key_of(5, spec, {R}), [&] { return box_rule(spec, box, 8, 10); });
  const double mass = weight_mass(spec, box);
  const double mean = B.integrate([&](const Point& z) { return u.value(z); }) / mass;
  const double var = B.integrate([&](const Point& z) { return sq(u.value(z) - mean); });
  const double grad = B.integrate([&](const Point& z) { return u.gradient(z).squaredNorm(); });
  if (grad == 0.0) return 0.0;
  return var / (R * R * grad);
}

// ---------------------------------------------------------------------------

std::string to_string(FamilyKind k) {
  switch (k) {
    case FamilyKind::tensor_bump:
      return "tensor_bump";
    case FamilyKind::poly_times_bump:
      return "poly_times_bump";
    case FamilyKind::oscillatory:
      return "oscillatory";
    case FamilyKind::random_spline:
      return "random_spline";
  }
  return "unknown";
}

namespace {

// Cubic B-spline on [-2, 2] and its derivative.
double bspline(double s) {
  s = std::abs(s);
  if (s >= 2.0) return 0.0;
  if (s >= 1.0) return std::pow(2.0 - s, 3) / 6.0;
  return (4.0 - 6.0 * s * s + 3.0 * s * s * s) / 6.0;
}

double bspline_d(double s) {
  const double sg = s < 0.0 ? -1.0 : 1.0;
  s = std::abs(s);
  if (s >= 2.0) return 0.0;
  if (s >= 1.0) return -sg * 0.5 * std::pow(2.0 - s, 2);
  return sg * (-2.0 * s + 1.5 * s * s);
}

// (1 - |z|^2/R^2)^2_+ when on.
struct Envelope {
  double R = 1.0;
  bool on = true;

  double value(const Point& z) const {
    if (!on) return 1.0;
    const double t = 1.0 - z.squaredNorm() / (R * R);
    return t > 0.0 ? t * t : 0.0;
  }
  Point gradient(const Point& z) const {
    if (!on) return Point::Zero(z.size());
    const double t = 1.0 - z.squaredNorm() / (R * R);
    return t > 0.0 ? Point(-4.0 * t / (R * R) * z) : Point(Point::Zero(z.size()));
  }
};

SmoothFunction times_envelope(std::function<double(const Point&)> f, std::function<Point(const Point&)> g,
                              Envelope env) {
  SmoothFunction out;
  out.value = [f, env](const Point& z) { return f(z) * env.value(z); };
  out.gradient = [f, g, env](const Point& z) -> Point { return g(z) * env.value(z) + f(z) * env.gradient(z); };
  return out;
}

SmoothFunction make_member(FamilyKind kind, int d, double R, std::mt19937_64& rng, bool compact) {
  std::uniform_real_distribution<double> U(-1.0, 1.0);
  std::normal_distribution<double> N(0.0, 1.0);
  const Envelope env{R, compact};
  switch (kind) {
    case FamilyKind::tensor_bump: {
      Point c(d), w(d);
      Point dir(d);
      for (int k = 0; k < d; ++k) dir[k] = N(rng);
      dir /= std::max(dir.norm(), 1e-12);
      c = 0.5 * R * std::abs(U(rng)) * dir;
      const double room = (R - c.norm()) / std::sqrt(static_cast<double>(d));
      for (int k = 0; k < d; ++k) w[k] = room * (0.3 + 0.7 * std::abs(U(rng)));
      SmoothFunction out;
      out.value = [c, w](const Point& z) {
        double v = 1.0;
        for (int k = 0; k < z.size(); ++k) {
          const double t = 1.0 - sq((z[k] - c[k]) / w[k]);
          v *= t > 0.0 ? t * t : 0.0;
        }
        return v;
      };
      out.gradient = [c, w](const Point& z) -> Point {
        const int dd = static_cast<int>(z.size());
        Point f(dd), df(dd);
        for (int k = 0; k < dd; ++k) {
          const double s = (z[k] - c[k]) / w[k];
          const double t = 1.0 - s * s;
          f[k] = t > 0.0 ? t * t : 0.0;
          df[k] = t > 0.0 ? -4.0 * t * s / w[k] : 0.0;
        }
        Point g(dd);
        for (int k = 0; k < dd; ++k) {
          double v = df[k];
          for (int j = 0; j < dd; ++j)
            if (j != k) v *= f[j];
          g[k] = v;
        }
        return g;
      };
      return out;
    }
    case FamilyKind::poly_times_bump: {
      // Monomials of total degree <= 3.
      std::vector<std::array<int, 3>> powers;
      for (int i = 0; i <= 3; ++i)
        for (int j = 0; j <= (d > 1 ? 3 - i : 0); ++j)
          for (int k = 0; k <= (d > 2 ? 3 - i - j : 0); ++k) powers.push_back({i, j, k});
      std::vector<double> coef(powers.size());
      for (double& c : coef) c = N(rng) / std::pow(R, 0.0);
      auto mono = [](const Point& z, const std::array<int, 3>& p) {
        double v = 1.0;
        for (int k = 0; k < z.size(); ++k) v *= std::pow(z[k], p[k]);
        return v;
      };
      auto f = [powers, coef, mono](const Point& z) {
        double v = 0.0;
        for (std::size_t m = 0; m < powers.size(); ++m) v += coef[m] * mono(z, powers[m]);
        return v;
      };
      auto g = [powers, coef](const Point& z) -> Point {
        Point out = Point::Zero(z.size());
        for (std::size_t m = 0; m < powers.size(); ++m) {
          for (int k = 0; k < z.size(); ++k) {
            if (powers[m][k] == 0) continue;
            double v = coef[m] * powers[m][k] * std::pow(z[k], powers[m][k] - 1);
            for (int j = 0; j < z.size(); ++j)
              if (j != k) v *= std::pow(z[j], powers[m][j]);
            out[k] += v;
          }
        }
        return out;
      };
      return times_envelope(f, g, env);
    }
    case FamilyKind::oscillatory: {
      Point kv(d);
      for (int k = 0; k < d; ++k) kv[k] = 6.0 * U(rng) / R;
      const double phase = kPi * U(rng);
      auto f = [kv, phase](const Point& z) { return std::sin(kv.dot(z) + phase); };
      auto g = [kv, phase](const Point& z) -> Point { return std::cos(kv.dot(z) + phase) * kv; };
      return times_envelope(f, g, env);
    }
    case FamilyKind::random_spline: {
      static constexpr int K = 6;
      const double h = 2.0 * R / K;
      int total = 1;
      for (int k = 0; k < d; ++k) total *= K + 1;
      std::vector<double> coef(total);
      for (double& c : coef) c = N(rng);
      auto eval = [coef, h, R, d](const Point& z, Point* grad) {
        // Only the (at most 4 per axis) basis functions active at z.
        std::array<std::array<double, K + 1>, 3> B{}, dB{};
        std::array<int, 3> lo{}, hi{};
        for (int k = 0; k < d; ++k) {
          const double t = (z[k] + R) / h;
          lo[k] = std::max(0, static_cast<int>(std::floor(t)) - 1);
          hi[k] = std::min(K, static_cast<int>(std::floor(t)) + 2);
          for (int j = lo[k]; j <= hi[k]; ++j) {
            B[k][j] = bspline(t - j);
            dB[k][j] = bspline_d(t - j) / h;
          }
        }
        for (int k = d; k < 3; ++k) lo[k] = hi[k] = 0;
        double v = 0.0;
        if (grad) *grad = Point::Zero(d);
        for (int i0 = lo[0]; i0 <= hi[0]; ++i0)
          for (int i1 = lo[1]; i1 <= hi[1]; ++i1)
            for (int i2 = lo[2]; i2 <= hi[2]; ++i2) {
              const std::array<int, 3> m{i0, i1, i2};
              int c = 0;
              for (int k = d - 1; k >= 0; --k) c = c * (K + 1) + m[k];
              double prod = coef[c];
              for (int k = 0; k < d; ++k) prod *= B[k][m[k]];
              v += prod;
              if (grad) {
                for (int k = 0; k < d; ++k) {
                  double p = coef[c] * dB[k][m[k]];
                  for (int j = 0; j < d; ++j)
                    if (j != k) p *= B[j][m[j]];
                  (*grad)[k] += p;
                }
              }
            }
        return v;
      };
      auto f = [eval](const Point& z) { return eval(z, nullptr); };
      auto g = [eval](const Point& z) -> Point {
        Point out;
        eval(z, &out);
        return out;
      };
      return times_envelope(f, g, env);
    }
  }
  throw InvalidArgument("make_member: unknown family kind");
}

}  // namespace

TestFunctionFamily make_family(FamilyKind kind, int d, double R, int count, std::uint64_t seed, bool compact) {
  require(d >= 1 && d <= 3 && count >= 1 && R > 0.0, "make_family: bad parameters");
  std::mt19937_64 rng(seed);
  TestFunctionFamily fam;
  fam.name = to_string(kind);
  for (int j = 0; j < count; ++j) fam.members.push_back(make_member(kind, d, R, rng, compact));
  return fam;
}

TestFunctionFamily calibration_family(int d, double R, std::uint64_t seed, int count, bool compact) {
  TestFunctionFamily fam;
  fam.name = "calibration";
  const FamilyKind kinds[] = {FamilyKind::tensor_bump, FamilyKind::poly_times_bump, FamilyKind::oscillatory,
                              FamilyKind::random_spline};
  std::mt19937_64 rng(seed);
  for (int j = 0; j < count; ++j) fam.members.push_back(make_member(kinds[j % 4], d, R, rng, compact));
  return fam;
}

double calibrate(const RatioFn& ratio, const TestFunctionFamily& family) {
  require(!family.members.empty(), "calibrate: empty family");
  double worst = 0.0;
  for (const SmoothFunction& u : family.members) worst = std::max(worst, ratio(u, 0.0));
  return kCalibrationFactor * worst;
}

InequalityVerdict sweep(const std::string& id, const RatioFn& ratio, const TestFunctionFamily& family,
                        const std::vector<double>& eps_grid, double constant, int threads) {
  require(!family.members.empty(), "sweep: empty family");
  require(!eps_grid.empty(), "sweep: empty eps grid");
  InequalityVerdict v;
  v.id = id;
  v.family = family.name;
  v.eps_grid = eps_grid;
  v.constant = constant;
  const int M = static_cast<int>(family.members.size()), E = static_cast<int>(eps_grid.size());
  v.ratios.resize(M, E);
  auto column = [&](int e) {
    for (int m = 0; m < M; ++m) v.ratios(m, e) = ratio(family.members[m], eps_grid[e]);
  };
  if (threads > 1) {
    std::vector<std::future<void>> jobs;
    for (int e = 0; e < E; ++e) jobs.push_back(std::async(std::launch::async, column, e));
    for (auto& j : jobs) j.get();
  } else {
    for (int e = 0; e < E; ++e) column(e);
  }
  v.max_ratio = v.ratios.maxCoeff();
  v.pass = v.max_ratio <= constant * (1.0 + kSweepSlack);
  return v;
}

void write_inequality_csv(std::ostream& out, const InequalityVerdict& v) {
  out << "inequality,member,eps,ratio\n";
  out.precision(12);
  for (Eigen::Index m = 0; m < v.ratios.rows(); ++m)
    for (Eigen::Index e = 0; e < v.ratios.cols(); ++e)
      out << v.id << ',' << m << ',' << v.eps_grid[e] << ',' << v.ratios(m, e) << '\n';
}

}  // namespace orthodeg
