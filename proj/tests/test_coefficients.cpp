#include "orthodeg/coefficients.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <numbers>

using namespace orthodeg;

namespace {

Point pt(std::initializer_list<double> v) {
  Point p(v.size());
  int i = 0;
  for (double x : v) p[i++] = x;
  return p;
}

}  // namespace

TEST(Structural, IdentityPasses) {
  for (int n = 1; n <= 3; ++n) {
    const TensorGrid g = build_grid(OrthantBox(3, n, 1.0), {{3, 3, 3}});
    const StructuralReport r = check_structural_assumptions(identity_coefficients(3, n), g);
    EXPECT_TRUE(r.all_ok());
    EXPECT_EQ(r.ellipticity.value, 0.0);
    EXPECT_EQ(r.orthogonality.value, 0.0);
    EXPECT_EQ(r.symmetry.value, 0.0);
  }
}

TEST(Structural, ATheta) {
  const TensorGrid g = build_grid(OrthantBox(2, 2, 1.0), {{4, 4}});
  const CoefficientField A = a_theta(2 * std::numbers::pi / 3);
  const StructuralReport r = check_structural_assumptions(A, g);
  EXPECT_TRUE(r.ellipticity_ok);
  EXPECT_FALSE(r.orthogonality_ok);
  EXPECT_NEAR(r.orthogonality.value, 1 / std::sqrt(3.0), 1e-14);
  EXPECT_EQ(r.orthogonality.node, 0);
  EXPECT_NEAR(A.lambda, (1 - 0.5) / (std::sqrt(3.0) / 2), 1e-14);
}

TEST(Structural, ThetaSweep) {
  const TensorGrid g = build_grid(OrthantBox(2, 2, 1.0), {{2, 2}});
  for (int k = 1; k <= 5; ++k) {
    const double theta = k * std::numbers::pi / 6;
    const StructuralReport r = check_structural_assumptions(a_theta(theta), g);
    EXPECT_TRUE(r.ellipticity_ok) << k;
    EXPECT_EQ(r.orthogonality_ok, k == 3) << k;
  }
  EXPECT_THROW(a_theta(0.0), OutOfDomain);
  EXPECT_THROW(a_theta(std::numbers::pi), OutOfDomain);
}

TEST(Structural, SymmetryViolation) {
  Mat M = Mat::Identity(2, 2);
  M(0, 1) = 1.0;  // Q = E_11, R = 0
  CoefficientField A = constant_coefficients(M, 1);
  A.lambda = 0.5;
  A.Lambda = 1.0;
  const TensorGrid g = build_grid(OrthantBox(2, 1, 1.0), {{2, 2}});
  const StructuralReport r = check_structural_assumptions(A, g);
  EXPECT_FALSE(r.symmetry_ok);
  EXPECT_DOUBLE_EQ(r.symmetry.value, 1.0);
  EXPECT_EQ(g.node(r.symmetry.node)[1], 0.0);
  EXPECT_TRUE(check_structural_assumptions(A, g, 1e-10, false).symmetry_ok);
}

TEST(ATheta, Values) {
  const Mat I = a_theta(std::numbers::pi / 2)(pt({0.3, 0.4}));
  EXPECT_TRUE(I.isApprox(Mat::Identity(2, 2), 1e-15));
  Mat expect(2, 2);
  expect << 1, 0.5, 0.5, 1;
  expect *= 2 / std::sqrt(3.0);
  EXPECT_TRUE(a_theta(2 * std::numbers::pi / 3)(pt({0, 0})).isApprox(expect, 1e-14));
  expect(0, 1) = expect(1, 0) = -1 / std::sqrt(3.0);
  EXPECT_TRUE(a_theta(std::numbers::pi / 3)(pt({0, 0})).isApprox(expect, 1e-14));
}

TEST(SmoothBlock, SatisfiesAssumptions) {
  for (int d = 1; d <= 3; ++d)
    for (int n = 1; n <= d; ++n)
      for (std::uint64_t seed : {1u, 2u, 3u}) {
        const CoefficientField A = smooth_block(d, n, seed);
        std::vector<int> cells(d, 4);
        const TensorGrid g = build_grid(OrthantBox(d, n, 1.0), {cells});
        const StructuralReport r = check_structural_assumptions(A, g);
        EXPECT_TRUE(r.all_ok()) << d << n << seed << " " << r.ellipticity.value << " "
                                << r.orthogonality.value << " " << r.symmetry.value;
      }
}

TEST(SmoothBlock, HolderCertificate) {
  for (std::uint64_t seed : {5u, 6u}) {
    const CoefficientField A = smooth_block(3, 2, seed);
    const double q = holder_quotient_max(A, OrthantBox(3, 2, 1.0).box(), 10000, seed);
    EXPECT_GT(q, 0.0);
    EXPECT_LE(q, 1.05 * A.holder_L);
  }
}

TEST(Presets, Parse) {
  EXPECT_EQ(coefficient_preset("identity", 2, 1).name, "identity");
  EXPECT_NO_THROW(coefficient_preset("smooth_block:7", 2, 1));
  EXPECT_NEAR(coefficient_preset("a_theta:1.5707963267948966", 2, 2)(pt({0, 0}))(0, 1), 0.0, 1e-15);
  EXPECT_THROW(coefficient_preset("bogus", 2, 1), ValidationError);
  EXPECT_THROW(coefficient_preset("smooth_block:x", 2, 1), ValidationError);
}

TEST(Reflect, IdentityAndEvenData) {
  const CoefficientField A = identity_coefficients(2, 1);
  const ScalarField f([](const Point& z) { return z[1] * z[1]; });
  const VectorField F([](const Point&) { return pt({0.0, 1.0}); });
  const ReflectedData r = reflect_coefficients(A, f, F, 0);
  for (double y : {-0.7, -0.1, 0.2}) {
    const Point z = pt({0.3, y});
    EXPECT_TRUE(r.A(z).isApprox(Mat::Identity(2, 2)));
    EXPECT_DOUBLE_EQ(r.f(z), y * y);
    EXPECT_DOUBLE_EQ(r.F(z)[1], y < 0 ? -1.0 : 1.0);
  }
  // Interface side follows the hint.
  EXPECT_DOUBLE_EQ(r.F(pt({0.3, 0.0}), pt({0.3, -0.1}))[1], -1.0);
  EXPECT_DOUBLE_EQ(r.F(pt({0.3, 0.0}), pt({0.3, 0.1}))[1], 1.0);
}

TEST(Reflect, Involution) {
  const CoefficientField A = smooth_block(3, 2, 11);
  const ScalarField f([](const Point& z) { return z[0] + z[2]; });
  const VectorField F([](const Point& z) { return pt({z[0], z[1], z[2]}); });
  const ReflectedData once = reflect_coefficients(A, f, F, 1);
  // Reflecting the mirrored-half data back reproduces the original field.
  const ReflectedData twice = reflect_coefficients(once.A, once.f, once.F, 1);
  const TensorGrid g = build_grid(OrthantBox(3, 2, 1.0), {{3, 3, 3}});
  for (int i = 0; i < g.num_nodes(); ++i) {
    Point z = g.node(i);
    if (z[2] == 0.0) continue;
    Point zm = z;
    zm[2] = -z[2];
    EXPECT_TRUE(once.A(zm).isApprox(Mat((Eigen::Vector3d(1, 1, -1)).asDiagonal() * A(z) *
                                        Eigen::Vector3d(1, 1, -1).asDiagonal())));
    EXPECT_TRUE(twice.A(z).isApprox(A(z)));
    EXPECT_DOUBLE_EQ(twice.f(z), f(z));
    EXPECT_TRUE(twice.F(z).isApprox(F(z)));
  }
}
