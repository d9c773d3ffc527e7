#pragma once

#include "orthodeg/types.hpp"

#include <Eigen/Core>

#include <cmath>
#include <cstdint>
#include <limits>
#include <vector>

namespace orthodeg {

/// Exponents and regularization of the monomial weight
///
///   w(y) = prod_i (eps_i^2 + y_i^2)^(a_i / 2)
///
/// acting on the last n coordinates of R^d. Coordinates are ordered
/// z = (x_1, ..., x_{d-n}, y_1, ..., y_n).
class WeightSpec {
 public:
  WeightSpec() = default;
  WeightSpec(int d, Eigen::VectorXd a, Eigen::VectorXd eps, bool supersingular = false);

  /// Unregularized weight (eps = 0).
  static WeightSpec degenerate(int d, Eigen::VectorXd a);

  int d() const { return d_; }
  int n() const { return static_cast<int>(a_.size()); }
  const Eigen::VectorXd& a() const { return a_; }
  const Eigen::VectorXd& eps() const { return eps_; }
  double a(int i) const { return a_[i]; }
  double eps(int i) const { return eps_[i]; }
  bool supersingular() const { return supersingular_; }

  /// Global coordinate index of weighted axis i.
  int axis(int i) const { return d_ - n() + i; }
  /// Weighted-axis index of global coordinate k, or -1 for an unweighted axis.
  int weighted_index(int k) const { return k >= d_ - n() ? k - (d_ - n()) : -1; }

  double a_plus_sum() const { return a_plus_sum_; }
  /// Indices with a_i >= 1 and eps_i = 0.
  std::vector<int> superdegenerate() const;

  WeightSpec with_eps(Eigen::VectorXd eps) const;
  WeightSpec with_eps(double eps) const;
  WeightSpec with_a(Eigen::VectorXd a) const;
  /// Exponents replaced by their positive parts, eps kept.
  WeightSpec positive_part() const;
  /// Same exponents with 2 added on axis i (Hardy weights).
  WeightSpec shifted(int i, double delta) const;

 private:
  int d_ = 1;
  Eigen::VectorXd a_;
  Eigen::VectorXd eps_;
  bool supersingular_ = false;
  double a_plus_sum_ = 0.0;
};

/// rho_eps(t)^a with the conventions of eval_weight at the singular point.
template <typename Scalar>
Scalar rho_power(Scalar t, double a, double eps) {
  using std::pow;
  if (a == 0.0) return Scalar(1);
  if (eps == 0.0) {
    if (t == Scalar(0)) {
      return a > 0 ? Scalar(0) : std::numeric_limits<Scalar>::infinity();
    }
    return pow(std::abs(t), Scalar(a));
  }
  return pow(Scalar(eps * eps) + t * t, Scalar(a / 2));
}

/// Weight at the weighted coordinates y (length n). Returns 0 at a degenerate
/// zero and +infinity at a singular point; callers integrating the weight go
/// through the moment routines instead of sampling it.
template <typename Derived>
typename Derived::Scalar eval_weight(const WeightSpec& spec, const Eigen::MatrixBase<Derived>& y) {
  using Scalar = typename Derived::Scalar;
  Scalar w(1);
  for (int i = 0; i < spec.n(); ++i) w *= rho_power<Scalar>(y[i], spec.a(i), spec.eps(i));
  return w;
}

/// Weight evaluated at a full point z of R^d.
template <typename Derived>
typename Derived::Scalar eval_weight_at(const WeightSpec& spec, const Eigen::MatrixBase<Derived>& z) {
  return eval_weight(spec, z.tail(spec.n()));
}

/// Logarithmic gradient a_i y_i / (eps_i^2 + y_i^2) of the weight.
template <typename Derived>
Eigen::Matrix<typename Derived::Scalar, Eigen::Dynamic, 1> eval_log_gradient(
    const WeightSpec& spec, const Eigen::MatrixBase<Derived>& y) {
  using Scalar = typename Derived::Scalar;
  Eigen::Matrix<Scalar, Eigen::Dynamic, 1> g(spec.n());
  for (int i = 0; i < spec.n(); ++i) {
    const double a = spec.a(i), e = spec.eps(i);
    if (a == 0.0) {
      g[i] = Scalar(0);
      continue;
    }
    if (e == 0.0 && y[i] == Scalar(0)) {
      throw SingularPoint("log-gradient of the weight is singular on {y_" + std::to_string(i + 1) +
                          " = 0}");
    }
    g[i] = Scalar(a) * y[i] / (Scalar(e * e) + y[i] * y[i]);
  }
  return g;
}

/// Axis-aligned box [lo, hi] in R^d.
struct Box {
  Point lo;
  Point hi;

  int dim() const { return static_cast<int>(lo.size()); }
  bool contains(const Point& z, double tol = 0.0) const;
};

/// Integral of the weight over an axis-aligned box; weighted intervals
/// may straddle zero.
double weight_mass(const WeightSpec& spec, const Box& box);

/// Integral of the regularized weight restricted to one axis.
double axis_mass(double a, double eps, double lo, double hi);

// ---------------------------------------------------------------------------
// Doubling property of the unregularized weight on the orthant.

struct BallMass {
  double value = 0.0;   // importance-sampled mass of B_r(z0) intersected with the orthant
  double sigma = 0.0;   // one standard error
  double box_lower = 0.0;  // mass of the inscribed cube
  double box_upper = 0.0;  // mass of the bounding box
};

/// Weighted mass of B_r(center) intersected with the closed orthant. Weighted
/// coordinates are drawn from the exact one-dimensional marginals of the
/// bounding box so the only Monte-Carlo noise is the ball indicator.
BallMass orthant_ball_mass(const WeightSpec& spec, const Point& center, double r,
                           std::uint64_t seed, int samples = 100000);

struct DoublingSample {
  Point center;
  double r = 0.0;
  double ratio = 0.0;        // mass(B_2r) / mass(B_r)
  double ratio_upper = 0.0;  // 3-sigma upper confidence value
  double box_ratio_bound = 0.0;  // bounding-box(2r) / inscribed-cube(r)
};

struct DoublingReport {
  std::vector<DoublingSample> samples;
  double max_first = 0.0;  // max upper ratio over the first `head` samples
  double max_rest = 0.0;   // max upper ratio over the remaining samples
  bool pass = false;       // max_rest <= 2 * max_first
};

/// Random centers in the closed orthant (coordinates pinned to the faces with
/// probability 1/4 per weighted axis) and radii log-uniform in [2^-6, 2^-1].
DoublingReport doubling_check(const WeightSpec& spec, int count, int head, std::uint64_t seed,
                              int samples_per_ball = 100000);

}  // namespace orthodeg
