#pragma once

#include "orthodeg/types.hpp"

#include <Eigen/Core>

#include <functional>
#include <span>
#include <vector>

namespace orthodeg {

/// Nodes and weights of a one-dimensional rule.
struct QuadRule {
  Eigen::VectorXd nodes;
  Eigen::VectorXd weights;

  int size() const { return static_cast<int>(nodes.size()); }
  /// Affine image of a rule on [-1, 1] onto [l, r].
  QuadRule mapped(double l, double r) const;
};

/// Gauss-Legendre rule on [-1, 1] (Golub-Welsch). Rules are cached.
const QuadRule& gauss_legendre(int points);

/// Gauss-Jacobi rule on [-1, 1] for the weight (1 - x)^alpha (1 + x)^beta.
QuadRule gauss_jacobi(int points, double alpha, double beta);

/// Rule on [l, r] for the weight (t - l)^beta (r - t)^alpha; the returned
/// weights include the weight function.
QuadRule jacobi_on(int points, double l, double r, double beta_at_l, double alpha_at_r);

/// Adaptive Gauss-Legendre integration: an interval is accepted when the
/// 10- and 20-point rules agree to rel_tol relative to the running total, and
/// is otherwise bisected, up to max_depth levels.
double integrate_adaptive(const std::function<double(double)>& f, double l, double r,
                          double rel_tol = 1e-12, int max_depth = 20);

/// Vector-valued variant; convergence is judged on the max-norm.
Eigen::VectorXd integrate_adaptive(const std::function<Eigen::VectorXd(double)>& f, int components,
                                   double l, double r, double rel_tol = 1e-12, int max_depth = 20);

/// Integral of (eps^2 + t^2)^(a/2) p(t) over [l, r], 0 <= l < r, where p has
/// monomial coefficients poly[0] + poly[1] t + ... . Exact for eps = 0;
/// adaptive Gauss-Legendre otherwise.
double cell_moment_1d(double a, double eps, double l, double r, std::span<const double> poly);

/// Local moments mu_k = integral over [l, r] of rho_eps(t)^a s^k dt with
/// s = (t - l) / (r - l), k = 0..kmax. Intervals may have l < 0 < r.
Eigen::VectorXd local_moments(double a, double eps, double l, double r, int kmax);

/// Composite rule whose weights already contain rho_eps(t)^a, accurate for
/// smooth integrands on [l, r] (l and r of any sign). Pieces touching t = 0
/// use Gauss-Jacobi when eps = 0 and are graded geometrically toward t = 0
/// when eps > 0.
QuadRule weighted_rule(double a, double eps, double l, double r, int points = 10);

}  // namespace orthodeg
