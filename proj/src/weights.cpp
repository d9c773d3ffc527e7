#include "orthodeg/weights.hpp"

#include "orthodeg/quadrature.hpp"

#include <algorithm>
#include <cmath>
#include <random>

namespace orthodeg {

WeightSpec::WeightSpec(int d, Eigen::VectorXd a, Eigen::VectorXd eps, bool supersingular)
    : d_(d), a_(std::move(a)), eps_(std::move(eps)), supersingular_(supersingular) {
  require(d_ >= 1, "WeightSpec: dimension must be positive");
  require(a_.size() == eps_.size(), "WeightSpec: a and eps must have equal length");
  require(a_.size() >= 1 && a_.size() <= d_, "WeightSpec: need 1 <= n <= d");
  for (int i = 0; i < n(); ++i) {
    require(eps_[i] >= 0.0 && eps_[i] <= 1.0, "WeightSpec: eps_i must lie in [0,1]");
    if (!supersingular_ && !(a_[i] > -1.0)) {
      throw ValidationError("WeightSpec: a_i <= -1 requires the supersingular flag (axis " +
                            std::to_string(i + 1) + ")");
    }
    a_plus_sum_ += std::max(a_[i], 0.0);
  }
}

WeightSpec WeightSpec::degenerate(int d, Eigen::VectorXd a) {
  Eigen::VectorXd eps = Eigen::VectorXd::Zero(a.size());
  return WeightSpec(d, std::move(a), std::move(eps));
}

std::vector<int> WeightSpec::superdegenerate() const {
  std::vector<int> out;
  for (int i = 0; i < n(); ++i)
    if (a_[i] >= 1.0 && eps_[i] == 0.0) out.push_back(i);
  return out;
}

WeightSpec WeightSpec::with_eps(Eigen::VectorXd eps) const {
  return WeightSpec(d_, a_, std::move(eps), supersingular_);
}

WeightSpec WeightSpec::with_eps(double eps) const {
  return with_eps(Eigen::VectorXd::Constant(n(), eps));
}

WeightSpec WeightSpec::with_a(Eigen::VectorXd a) const {
  return WeightSpec(d_, std::move(a), eps_, supersingular_);
}

WeightSpec WeightSpec::positive_part() const { return with_a(a_.cwiseMax(0.0)); }

WeightSpec WeightSpec::shifted(int i, double delta) const {
  Eigen::VectorXd a = a_;
  a[i] += delta;
  return WeightSpec(d_, std::move(a), eps_, true);
}

bool Box::contains(const Point& z, double tol) const {
  for (int k = 0; k < dim(); ++k)
    if (z[k] < lo[k] - tol || z[k] > hi[k] + tol) return false;
  return true;
}

double axis_mass(double a, double eps, double lo, double hi) {
  if (hi <= lo) return 0.0;
  return local_moments(a, eps, lo, hi, 0)[0];
}

double weight_mass(const WeightSpec& spec, const Box& box) {
  require(box.dim() == spec.d(), "weight_mass: box dimension mismatch");
  double mass = 1.0;
  for (int k = 0; k < spec.d(); ++k) {
    const int i = spec.weighted_index(k);
    const double lo = box.lo[k], hi = box.hi[k];
    if (hi <= lo) return 0.0;
    mass *= i < 0 ? hi - lo : axis_mass(spec.a(i), spec.eps(i), lo, hi);
  }
  return mass;
}

namespace {

// Inverse CDF sampler for t^a on [l, r] (0 <= l < r), a > -1.
double sample_power(double a, double l, double r, double u) {
  if (a == 0.0) return l + u * (r - l);
  const double e = a + 1.0;
  const double lo = std::pow(l, e), hi = std::pow(r, e);
  return std::pow(lo + u * (hi - lo), 1.0 / e);
}

}  // namespace

BallMass orthant_ball_mass(const WeightSpec& spec, const Point& center, double r, std::uint64_t seed,
                           int samples) {
  require(r > 0.0, "orthant_ball_mass: radius must be positive");
  for (int i = 0; i < spec.n(); ++i) {
    require(spec.eps(i) == 0.0, "orthant_ball_mass: doubling is stated for the unregularized weight");
    require(center[spec.axis(i)] >= 0.0, "orthant_ball_mass: center must lie in the closed orthant");
  }
  const int d = spec.d();
  Box outer{Point(d), Point(d)}, inner{Point(d), Point(d)};
  const double half_inner = r / std::sqrt(static_cast<double>(d));
  for (int k = 0; k < d; ++k) {
    const bool weighted = spec.weighted_index(k) >= 0;
    outer.lo[k] = weighted ? std::max(0.0, center[k] - r) : center[k] - r;
    outer.hi[k] = center[k] + r;
    inner.lo[k] = weighted ? std::max(0.0, center[k] - half_inner) : center[k] - half_inner;
    inner.hi[k] = center[k] + half_inner;
  }
  BallMass out;
  out.box_upper = weight_mass(spec, outer);
  out.box_lower = weight_mass(spec, inner);

  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> uni(0.0, 1.0);
  long hits = 0;
  Point z(d);
  for (int s = 0; s < samples; ++s) {
    double dist2 = 0.0;
    for (int k = 0; k < d; ++k) {
      const int i = spec.weighted_index(k);
      const double u = uni(rng);
      z[k] = i < 0 ? outer.lo[k] + u * (outer.hi[k] - outer.lo[k])
                   : sample_power(spec.a(i), outer.lo[k], outer.hi[k], u);
      dist2 += (z[k] - center[k]) * (z[k] - center[k]);
    }
    if (dist2 <= r * r) ++hits;
  }
  const double p = static_cast<double>(hits) / samples;
  out.value = out.box_upper * p;
  out.sigma = out.box_upper * std::sqrt(std::max(p * (1.0 - p), 1.0 / samples) / samples);
  return out;
}

DoublingReport doubling_check(const WeightSpec& spec, int count, int head, std::uint64_t seed,
                              int samples_per_ball) {
  require(count > head && head > 0, "doubling_check: need 0 < head < count");
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> uni(0.0, 1.0);
  DoublingReport report;
  for (int s = 0; s < count; ++s) {
    DoublingSample sample;
    sample.center = Point(spec.d());
    for (int k = 0; k < spec.d(); ++k) {
      if (spec.weighted_index(k) >= 0) {
        sample.center[k] = uni(rng) < 0.25 ? 0.0 : uni(rng);
      } else {
        sample.center[k] = 2.0 * uni(rng) - 1.0;
      }
    }
    sample.r = std::exp2(-6.0 + 5.0 * uni(rng));
    const std::uint64_t s1 = rng(), s2 = rng();
    const BallMass small = orthant_ball_mass(spec, sample.center, sample.r, s1, samples_per_ball);
    const BallMass big = orthant_ball_mass(spec, sample.center, 2.0 * sample.r, s2, samples_per_ball);
    sample.ratio = big.value / small.value;
    sample.ratio_upper = (big.value + 3.0 * big.sigma) / std::max(small.value - 3.0 * small.sigma, 1e-300);
    sample.box_ratio_bound = big.box_upper / small.box_lower;
    if (s < head) {
      report.max_first = std::max(report.max_first, sample.ratio_upper);
    } else {
      report.max_rest = std::max(report.max_rest, sample.ratio_upper);
    }
    report.samples.push_back(std::move(sample));
  }
  report.pass = report.max_rest <= 2.0 * report.max_first;
  return report;
}

}  // namespace orthodeg
