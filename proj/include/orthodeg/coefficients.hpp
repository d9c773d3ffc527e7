#pragma once

#include "orthodeg/grid.hpp"
#include "orthodeg/types.hpp"

#include <cstdint>
#include <string>

namespace orthodeg {

/// Variable coefficient matrix in block form
///
///   A = [ P  Q ]   P: (d-n)x(d-n), Q: (d-n)xn
///       [ R  S ]   R: nx(d-n),     S: nxn
///
/// with declared ellipticity constants and Hoelder data.
struct CoefficientField {
  MatrixField A;
  int d = 1;
  int n = 1;
  double lambda = 1.0;
  double Lambda = 1.0;
  double holder_alpha = 1.0;
  double holder_L = 0.0;
  bool constant = false;
  std::string name;

  Mat operator()(const Point& z) const { return A(z); }
  Mat operator()(const Point& z, const Point& inside) const { return A(z, inside); }
};

struct Violation {
  double value = 0.0;  // amount by which the condition fails, 0 if it holds
  int node = -1;
  Point z;
};

struct StructuralReport {
  bool ellipticity_ok = true;
  bool orthogonality_ok = true;
  bool symmetry_ok = true;
  bool symmetry_checked = true;
  Violation ellipticity;
  Violation orthogonality;
  Violation symmetry;

  bool all_ok() const { return ellipticity_ok && orthogonality_ok && symmetry_ok; }
};

/// Node-sampled check of ellipticity, orthogonality on the corners
/// {y_i = y_j = 0} and the Q/R symmetry on each {y_i = 0}.
StructuralReport check_structural_assumptions(const CoefficientField& A, const TensorGrid& grid,
                                              double tol = 1e-10, bool check_symmetry = true);

CoefficientField identity_coefficients(int d, int n);

/// Constant matrix; lambda and Lambda are computed from the matrix.
CoefficientField constant_coefficients(const Mat& M, int n, std::string name = "constant");

/// (1/sin t) [[1, -cos t], [-cos t, 1]] on d = n = 2.
CoefficientField a_theta(double theta);

/// Smooth variable matrix satisfying the structural conditions by
/// construction, with lambda = 1, Lambda = 3 and a Lipschitz bound.
CoefficientField smooth_block(int d, int n, std::uint64_t seed);

/// "identity", "a_theta:<theta>" or "smooth_block:<seed>".
CoefficientField coefficient_preset(const std::string& name, int d, int n);

struct ReflectedData {
  CoefficientField A;
  ScalarField f;
  VectorField F;
};

/// Even reflection across {y_i = 0}: on the mirrored half A -> J A J,
/// f even and F -> J F, with J flipping the reflected coordinate. Interface
/// points take the side of the `inside` hint.
ReflectedData reflect_coefficients(const CoefficientField& A, const ScalarField& f, const VectorField& F,
                                   int i);

/// Largest sampled |A(z) - A(z')|_F / |z - z'|^alpha over random pairs in box.
double holder_quotient_max(const CoefficientField& A, const Box& box, int pairs, std::uint64_t seed);

}  // namespace orthodeg
