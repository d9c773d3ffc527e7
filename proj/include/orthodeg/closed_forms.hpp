#pragma once

#include "orthodeg/coefficients.hpp"
#include "orthodeg/fem.hpp"
#include "orthodeg/types.hpp"

#include <Eigen/Core>

#include <functional>
#include <string>
#include <vector>

namespace orthodeg {

/// Closed-form entire solution with its declared growth exponent.
struct ClosedFormSolution {
  std::string id;
  SmoothFunction fn;
  double growth = 0.0;
};

/// R^k cos(k phi) with k = pi/theta, xi = y1 + y2 cos(theta),
/// eta = y2 sin(theta), R = |(xi, eta)|, phi = atan2(eta, xi).
template <typename Scalar>
Scalar u_theta(double theta, Scalar y1, Scalar y2) {
  using std::atan2;
  using std::cos;
  using std::pow;
  const Scalar xi = y1 + y2 * Scalar(std::cos(theta));
  const Scalar eta = y2 * Scalar(std::sin(theta));
  const double k = 3.14159265358979323846 / theta;
  const Scalar r2 = xi * xi + eta * eta;
  if (r2 == Scalar(0)) return Scalar(0);
  return pow(r2, Scalar(0.5 * k)) * cos(Scalar(k) * atan2(eta, xi));
}

/// Gradient of u_theta in (y1, y2); throws SingularPoint at the origin.
Point u_theta_gradient(double theta, double y1, double y2);

/// u_theta as a closed-form solution on d = n = 2.
ClosedFormSolution u_theta_solution(double theta);

/// psi_0 = 1, psi_l(t) = int_0^t rho^-a(s) int_0^s rho^a(r) psi_{l-1}(r) dr ds,
/// evaluated at |tau| (psi_l is even). Panel Legendre integration refined
/// until successive refinements agree to rel_tol.
Eigen::VectorXd psi_recursion(double a, double eps, int ell, const Eigen::VectorXd& taus, double rel_tol = 1e-10);

/// w = rho^-a d/dy (rho^a du/dy) = u'' + a y/(eps^2 + y^2) u' for a callable,
/// by Richardson-extrapolated central differences. At y = 0 with eps = 0 the
/// middle term is replaced by its limit a u''(0) when u'(0) = 0.
double weighted_second_derivative(const std::function<double(double)>& u, double a, double eps, double y);

/// Conservative three-point stencil on nodal data; entries without a
/// stencil (outer endpoints) are NaN. A first node at y = 0 uses the even
/// extension.
Eigen::VectorXd weighted_second_derivative(const Eigen::VectorXd& y, const Eigen::VectorXd& u, double a, double eps);

struct PhiResult {
  Eigen::VectorXd phi;        // Phi(tau)
  Eigen::VectorXd quotient;   // Phi / (tau |tau|^a); 1 at tau = 0 when h(0) = 1
  Eigen::VectorXd lower;      // (min 1/h) |tau|^(a+1)
  Eigen::VectorXd upper;      // (max 1/h) |tau|^(a+1)
  double quotient_lipschitz = 0.0;  // max first difference quotient of `quotient`
  bool bounds_ok = false;
};

/// Phi(tau) = (1 + a) int_0^tau |s|^a / h(s) ds, odd by construction.
PhiResult phi_characteristic(double a, const std::function<double(double)>& h, const Eigen::VectorXd& taus);

/// G u = (d u / d y_k) / y_k for u even in coordinate k; on {y_k = 0} the
/// limit 2 (u(h) - u(0)) / h^2. Evenness is checked at every point.
Eigen::VectorXd g_quotient(const std::function<double(const Point&)>& u, int k, const std::vector<Point>& points,
                           double even_tol = 1e-10);

/// Nodal G u of a discrete field along axis k, from the recovered gradient
/// off the face and the one-sided second difference on it.
DiscreteField g_quotient(const DiscreteField& u, int k, double even_tol = 1e-8);

struct GrowthFit {
  double gamma = 0.0;
  double residual = 0.0;  // rms of the log-log fit
};

/// Least-squares slope of log max_rays |u(R dir)| against log R.
GrowthFit growth_exponent_fit(const std::function<double(const Point&)>& u, const std::vector<Point>& rays,
                              const std::vector<double>& radii);

/// Affine function beta . x + delta . y + c0.
struct AffineData {
  Eigen::VectorXd beta;
  Eigen::VectorXd delta;
  double c0 = 0.0;

  double operator()(const Point& z) const;
};

/// delta = -S^-1 R beta, which makes the conormal flux of the affine
/// function vanish on every {y_i = 0}.
AffineData consistent_affine(const Mat& A, int n, const Eigen::VectorXd& beta, double c0 = 0.0);

struct LiouvilleRun {
  double L = 0.0;
  double max_diff = 0.0;
  double threshold = 0.0;
  bool reproduced = false;
  SolveReport solve;
};

struct LiouvilleProbe {
  std::vector<LiouvilleRun> runs;
  double flux = 0.0;  // max |(A grad l) . e_{y_i}| of the affine data
  bool reproduced = false;  // on every box
};

/// Homogeneous conormal problem on boxes of half-width L with the affine
/// function as Dirichlet data, solved to a residual of tol / 100;
/// reproduction means a nodal match within 10 x tol x max(1, |u|_inf).
LiouvilleProbe affine_liouville_probe(const CoefficientField& A, const WeightSpec& spec, const AffineData& data,
                                      const std::vector<double>& Ls, int cells, double tol);

}  // namespace orthodeg
