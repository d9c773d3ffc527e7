#include "orthodeg/quadrature.hpp"

#include <Eigen/Eigenvalues>

#include <algorithm>
#include <cmath>
#include <map>
#include <mutex>

namespace orthodeg {

QuadRule QuadRule::mapped(double l, double r) const {
  QuadRule out;
  const double half = 0.5 * (r - l), mid = 0.5 * (r + l);
  out.nodes = (mid + half * nodes.array()).matrix();
  out.weights = half * weights;
  return out;
}

namespace {

// Golub-Welsch from the three-term recurrence: Jacobi matrix with diagonal
// `alpha` and off-diagonal `beta`, zeroth moment mu0.
QuadRule golub_welsch(const Eigen::VectorXd& diag, const Eigen::VectorXd& offdiag, double mu0) {
  const int n = static_cast<int>(diag.size());
  Eigen::MatrixXd J = Eigen::MatrixXd::Zero(n, n);
  J.diagonal() = diag;
  for (int i = 0; i + 1 < n; ++i) J(i, i + 1) = J(i + 1, i) = offdiag[i];
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(J);
  QuadRule rule;
  rule.nodes = es.eigenvalues();
  rule.weights = mu0 * es.eigenvectors().row(0).array().square().matrix().transpose();
  return rule;
}

}  // namespace

const QuadRule& gauss_legendre(int points) {
  static std::mutex mutex;
  static std::map<int, QuadRule> cache;
  std::lock_guard lock(mutex);
  auto it = cache.find(points);
  if (it != cache.end()) return it->second;
  require(points >= 1, "gauss_legendre: need at least one point");
  Eigen::VectorXd diag = Eigen::VectorXd::Zero(points);
  Eigen::VectorXd off(std::max(points - 1, 0));
  for (int k = 1; k < points; ++k) off[k - 1] = k / std::sqrt(4.0 * k * k - 1.0);
  QuadRule rule = golub_welsch(diag, off, 2.0);
  // Symmetrize against eigen-solver round-off.
  for (int i = 0; i < points / 2; ++i) {
    const int j = points - 1 - i;
    const double x = 0.5 * (rule.nodes[j] - rule.nodes[i]);
    const double w = 0.5 * (rule.weights[i] + rule.weights[j]);
    rule.nodes[i] = -x;
    rule.nodes[j] = x;
    rule.weights[i] = rule.weights[j] = w;
  }
  if (points % 2 == 1) rule.nodes[points / 2] = 0.0;
  return cache.emplace(points, std::move(rule)).first->second;
}

QuadRule gauss_jacobi(int points, double alpha, double beta) {
  require(alpha > -1.0 && beta > -1.0, "gauss_jacobi: exponents must exceed -1");
  require(points >= 1, "gauss_jacobi: need at least one point");
  Eigen::VectorXd diag(points), off(std::max(points - 1, 0));
  const double ab = alpha + beta;
  for (int k = 0; k < points; ++k) {
    const double t = 2.0 * k + ab;
    if (k == 0) {
      diag[k] = (beta - alpha) / (ab + 2.0);
    } else {
      diag[k] = (beta * beta - alpha * alpha) / (t * (t + 2.0));
    }
  }
  for (int k = 1; k < points; ++k) {
    const double t = 2.0 * k + ab;
    const double num = 4.0 * k * (k + alpha) * (k + beta) * (k + ab);
    const double den = t * t * (t + 1.0) * (t - 1.0);
    off[k - 1] = std::sqrt(num / den);
  }
  const double mu0 = std::exp((ab + 1.0) * std::log(2.0) + std::lgamma(alpha + 1.0) +
                              std::lgamma(beta + 1.0) - std::lgamma(ab + 2.0));
  return golub_welsch(diag, off, mu0);
}

QuadRule jacobi_on(int points, double l, double r, double beta_at_l, double alpha_at_r) {
  QuadRule ref = gauss_jacobi(points, alpha_at_r, beta_at_l);
  const double half = 0.5 * (r - l);
  QuadRule out = ref.mapped(l, r);
  // (r - t)^alpha (t - l)^beta = half^(alpha+beta) (1-x)^alpha (1+x)^beta
  out.weights = ref.weights * (half * std::pow(half, alpha_at_r + beta_at_l));
  return out;
}

namespace {

Eigen::VectorXd gl_apply(const std::function<Eigen::VectorXd(double)>& f, int m, double l, double r,
                         int points) {
  const QuadRule& ref = gauss_legendre(points);
  const double half = 0.5 * (r - l), mid = 0.5 * (r + l);
  Eigen::VectorXd acc = Eigen::VectorXd::Zero(m);
  for (int i = 0; i < ref.size(); ++i) acc += ref.weights[i] * f(mid + half * ref.nodes[i]);
  return half * acc;
}

Eigen::VectorXd adapt(const std::function<Eigen::VectorXd(double)>& f, int m, double l, double r,
                      const Eigen::VectorXd& coarse, double abs_tol, int depth) {
  const Eigen::VectorXd fine = gl_apply(f, m, l, r, 20);
  if (depth <= 0 || (fine - coarse).cwiseAbs().maxCoeff() <= abs_tol) return fine;
  const double mid = 0.5 * (l + r);
  const Eigen::VectorXd left = gl_apply(f, m, l, mid, 10);
  const Eigen::VectorXd right = gl_apply(f, m, mid, r, 10);
  return adapt(f, m, l, mid, left, 0.5 * abs_tol, depth - 1) +
         adapt(f, m, mid, r, right, 0.5 * abs_tol, depth - 1);
}

}  // namespace

Eigen::VectorXd integrate_adaptive(const std::function<Eigen::VectorXd(double)>& f, int components,
                                   double l, double r, double rel_tol, int max_depth) {
  if (r == l) return Eigen::VectorXd::Zero(components);
  const Eigen::VectorXd coarse = gl_apply(f, components, l, r, 10);
  // Scale estimate from a rule on a graded partition, so narrow features
  // near an endpoint are not missed by the first guess.
  Eigen::VectorXd scale = gl_apply(f, components, l, r, 40).cwiseAbs();
  const double abs_tol = rel_tol * std::max(scale.maxCoeff(), 1e-300);
  return adapt(f, components, l, r, coarse, abs_tol, max_depth);
}

double integrate_adaptive(const std::function<double(double)>& f, double l, double r, double rel_tol,
                          int max_depth) {
  auto g = [&f](double t) {
    Eigen::VectorXd v(1);
    v[0] = f(t);
    return v;
  };
  return integrate_adaptive(g, 1, l, r, rel_tol, max_depth)[0];
}

namespace {

// Splits [l, r] (0 <= l < r) into pieces whose width is at most half their
// distance to zero or half of `floor_width`, whichever is larger. The
// innermost piece may touch zero. Pieces are returned left to right.
std::vector<std::pair<double, double>> graded_pieces(double l, double r, double floor_width,
                                                     int max_levels = 200) {
  std::vector<std::pair<double, double>> pieces;
  double hi = r;
  for (int level = 0;; ++level) {
    if (hi - l <= 0.5 * std::max(l, floor_width) || level >= max_levels) {
      pieces.emplace_back(l, hi);
      break;
    }
    const double lo = std::max(l, hi * (2.0 / 3.0));
    pieces.emplace_back(lo, hi);
    if (lo <= l) break;
    hi = lo;
  }
  std::reverse(pieces.begin(), pieces.end());
  return pieces;
}

// Rule for rho_eps^a on [l, r] with 0 <= l < r.
void append_positive_rule(std::vector<double>& nodes, std::vector<double>& weights, double a,
                          double eps, double l, double r, int points) {
  if (a == 0.0) {
    const QuadRule q = gauss_legendre(points).mapped(l, r);
    for (int i = 0; i < q.size(); ++i) {
      nodes.push_back(q.nodes[i]);
      weights.push_back(q.weights[i]);
    }
    return;
  }
  if (eps == 0.0) {
    if (l == 0.0) {
      const QuadRule q = jacobi_on(points, 0.0, r, a, 0.0);
      for (int i = 0; i < q.size(); ++i) {
        nodes.push_back(q.nodes[i]);
        weights.push_back(q.weights[i]);
      }
      return;
    }
    for (auto [p, q] : graded_pieces(l, r, 0.0)) {
      const QuadRule g = gauss_legendre(points).mapped(p, q);
      for (int i = 0; i < g.size(); ++i) {
        nodes.push_back(g.nodes[i]);
        weights.push_back(g.weights[i] * std::pow(g.nodes[i], a));
      }
    }
    return;
  }
  for (auto [p, q] : graded_pieces(l, r, 0.5 * eps)) {
    const QuadRule g = gauss_legendre(points).mapped(p, q);
    for (int i = 0; i < g.size(); ++i) {
      const double t = g.nodes[i];
      nodes.push_back(t);
      weights.push_back(g.weights[i] * std::pow(eps * eps + t * t, 0.5 * a));
    }
  }
}

}  // namespace

QuadRule weighted_rule(double a, double eps, double l, double r, int points) {
  require(r > l, "weighted_rule: empty interval");
  if (eps == 0.0 && a <= -1.0 && l <= 0.0 && r >= 0.0) {
    throw DivergentIntegral("weight |t|^a with a <= -1 is not integrable across t = 0");
  }
  std::vector<double> nodes, weights;
  QuadRule out;
  if (l < 0.0) {
    const double hi = std::min(r, 0.0);
    std::vector<double> n2, w2;
    append_positive_rule(n2, w2, a, eps, -hi == 0.0 ? 0.0 : -hi, -l, points);
    for (int i = static_cast<int>(n2.size()) - 1; i >= 0; --i) {
      nodes.push_back(-n2[i]);
      weights.push_back(w2[i]);
    }
  }
  if (r > 0.0) append_positive_rule(nodes, weights, a, eps, std::max(l, 0.0), r, points);
  out.nodes = Eigen::Map<Eigen::VectorXd>(nodes.data(), static_cast<Eigen::Index>(nodes.size()));
  out.weights = Eigen::Map<Eigen::VectorXd>(weights.data(), static_cast<Eigen::Index>(weights.size()));
  return out;
}

namespace {

// Exact integral of t^(a+k) over [l, r], 0 <= l < r.
double power_integral(double e, double l, double r) {
  if (e == -1.0) return std::log(r / l);
  if (l == 0.0) {
    if (e <= -1.0) throw DivergentIntegral("integral of t^e with e <= -1 diverges at t = 0");
    return std::pow(r, e + 1.0) / (e + 1.0);
  }
  return (std::pow(r, e + 1.0) - std::pow(l, e + 1.0)) / (e + 1.0);
}

// Local moments on [l, r] with 0 <= l < r.
Eigen::VectorXd local_moments_positive(double a, double eps, double l, double r, int kmax) {
  const double h = r - l;
  Eigen::VectorXd mu(kmax + 1);
  if (a == 0.0) {
    for (int k = 0; k <= kmax; ++k) mu[k] = h / (k + 1);
    return mu;
  }
  if (eps == 0.0) {
    if (l < h) {
      // Binomial expansion of ((t - l)/h)^k; cancellation is bounded by
      // (1 + l/h)^k < 2^k here.
      for (int k = 0; k <= kmax; ++k) {
        double acc = 0.0, binom = 1.0;
        for (int j = 0; j <= k; ++j) {
          if (j > 0) binom = binom * (k - j + 1) / j;
          const double lpow = std::pow(-l, k - j);
          if (lpow == 0.0) continue;
          acc += binom * lpow * power_integral(a + j, l, r);
        }
        mu[k] = acc / std::pow(h, k);
      }
      return mu;
    }
    // t^a is analytic on [l, r] with its branch point at distance >= h from
    // the interval; 24 Gauss points reach round-off.
    const QuadRule q = gauss_legendre(24).mapped(l, r);
    mu.setZero();
    for (int i = 0; i < q.size(); ++i) {
      const double w = q.weights[i] * std::pow(q.nodes[i], a);
      const double s = (q.nodes[i] - l) / h;
      double sk = 1.0;
      for (int k = 0; k <= kmax; ++k, sk *= s) mu[k] += w * sk;
    }
    return mu;
  }
  auto integrand = [&](double t) {
    Eigen::VectorXd v(kmax + 1);
    const double w = std::pow(eps * eps + t * t, 0.5 * a);
    const double s = (t - l) / h;
    double sk = 1.0;
    for (int k = 0; k <= kmax; ++k, sk *= s) v[k] = w * sk;
    return v;
  };
  mu.setZero();
  for (auto [p, q] : graded_pieces(l, r, eps)) {
    mu += integrate_adaptive(integrand, kmax + 1, p, q, 1e-12, 20);
  }
  return mu;
}

}  // namespace

Eigen::VectorXd local_moments(double a, double eps, double l, double r, int kmax) {
  require(r > l, "local_moments: empty interval");
  if (l >= 0.0) return local_moments_positive(a, eps, l, r, kmax);
  if (eps == 0.0 && a <= -1.0 && r >= 0.0) {
    throw DivergentIntegral("weight |t|^a with a <= -1 is not integrable across t = 0");
  }
  // Split at zero and re-expand the local variable of each half.
  const double h = r - l;
  Eigen::VectorXd mu = Eigen::VectorXd::Zero(kmax + 1);
  auto accumulate = [&](double p, double q, bool mirrored) {
    // Moments of s' over [p, q] (in |t|) mapped back to s on [l, r].
    const Eigen::VectorXd m = local_moments_positive(a, eps, p, q, kmax);
    const double w = q - p;
    // s = (t - l)/h with t = mirrored ? -(p + w s') : (p + w s').
    const double c0 = mirrored ? (-p - l) / h : (p - l) / h;
    const double c1 = mirrored ? -w / h : w / h;
    for (int k = 0; k <= kmax; ++k) {
      double acc = 0.0, binom = 1.0;
      for (int j = 0; j <= k; ++j) {
        if (j > 0) binom = binom * (k - j + 1) / j;
        acc += binom * std::pow(c0, k - j) * std::pow(c1, j) * m[j];
      }
      mu[k] += acc;
    }
  };
  const double neg_hi = std::min(r, 0.0);
  accumulate(-neg_hi, -l, true);
  if (r > 0.0) accumulate(0.0, r, false);
  return mu;
}

double cell_moment_1d(double a, double eps, double l, double r, std::span<const double> poly) {
  require(r > l && l >= 0.0, "cell_moment_1d: need 0 <= l < r");
  if (eps == 0.0 && a <= -1.0 && l == 0.0) {
    throw DivergentIntegral("cell_moment_1d: a <= -1 with eps = 0 diverges at t = 0");
  }
  if (poly.empty()) return 0.0;
  if (eps == 0.0) {
    double acc = 0.0;
    for (std::size_t k = 0; k < poly.size(); ++k) {
      if (poly[k] != 0.0) acc += poly[k] * power_integral(a + static_cast<double>(k), l, r);
    }
    return acc;
  }
  auto f = [&](double t) {
    double p = 0.0;
    for (std::size_t k = poly.size(); k-- > 0;) p = p * t + poly[k];
    return std::pow(eps * eps + t * t, 0.5 * a) * p;
  };
  double acc = 0.0;
  for (auto [p, q] : graded_pieces(l, r, eps)) acc += integrate_adaptive(f, p, q, 1e-12, 20);
  return acc;
}

}  // namespace orthodeg
