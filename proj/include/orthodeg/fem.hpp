#pragma once

#include "orthodeg/coefficients.hpp"
#include "orthodeg/grid.hpp"
#include "orthodeg/types.hpp"
#include "orthodeg/weights.hpp"

#include <Eigen/Core>
#include <Eigen/SparseCore>

#include <iosfwd>
#include <memory>
#include <vector>

namespace orthodeg {

using SparseMatrix = Eigen::SparseMatrix<double, Eigen::RowMajor>;

/// Data of  -div(w A grad u) = w f + div(w F)  with conormal faces on
/// {y_i = 0} and Dirichlet data on the outer faces. Empty f, F or drift
/// mean zero.
struct ProblemData {
  WeightSpec spec;
  CoefficientField A;
  ScalarField f;
  VectorField F;
  ScalarField dirichlet;
  VectorField drift;  // optional lower-order term w b.grad(u)
  double p = 4.0;
  double q = 4.0;
  double alpha = 0.5;
};

/// Nodal Q1 values on a grid.
struct DiscreteField {
  std::shared_ptr<const TensorGrid> grid;
  Eigen::VectorXd values;

  DiscreteField() = default;
  DiscreteField(std::shared_ptr<const TensorGrid> g, Eigen::VectorXd v);

  /// Q1 interpolant at z (z must lie in the grid bounds).
  double operator()(const Point& z) const;
  /// Gradient of the interpolant inside `cell` at z.
  Point gradient(int cell, const Point& z) const;
  /// Cell containing z; ties go to the cell on the side of `inside`.
  int locate(const Point& z, const Point& inside) const;
};

/// Nodal gradient: volume-weighted average of the gradients of the
/// adjacent cells evaluated at the node. One field per coordinate.
std::vector<DiscreteField> gradient_recover(const DiscreteField& u);

/// Nodal interpolant of a function.
DiscreteField interpolate(std::shared_ptr<const TensorGrid> grid, const std::function<double(const Point&)>& g);

struct LinearSystem {
  SparseMatrix K;
  Eigen::VectorXd b;
  bool symmetric = true;
  std::vector<char> constrained;  // 1 for Dirichlet rows after impose_dirichlet
  double assembly_seconds = 0.0;
};

struct AssemblyOptions {
  int threads = 1;
};

/// Weighted Galerkin system with Q1 elements; coefficients and data are
/// replaced by their per-cell Q1 interpolants so every weighted integral is
/// a weight-times-polynomial moment.
LinearSystem assemble(const TensorGrid& grid, const ProblemData& data, const AssemblyOptions& options = {});

/// Strong Dirichlet rows on outer nodes with column elimination.
void impose_dirichlet(LinearSystem& sys, const TensorGrid& grid, const ScalarField& g);

struct SolveReport {
  int iterations = 0;
  double residual = 0.0;  // final relative residual |b - Kx| / |b|
  double assembly_seconds = 0.0;
  double solve_seconds = 0.0;
  bool converged = false;
  bool breakdown = false;
  bool symmetric = true;
};

/// Jacobi-preconditioned CG for symmetric systems, BiCGSTAB otherwise.
/// max_iter <= 0 means 20 times the unknown count.
SolveReport solve(const LinearSystem& sys, Eigen::VectorXd& x, double tol, int max_iter = 0);

/// assemble + impose_dirichlet + solve.
DiscreteField solve_problem(std::shared_ptr<const TensorGrid> grid, const ProblemData& data, double tol,
                            SolveReport* report = nullptr, const AssemblyOptions& options = {});

// ---------------------------------------------------------------------------
// Weighted quadrature on cells

/// Tensor rule on one cell whose weights include the weight function.
struct CellRule {
  std::vector<Point> points;
  std::vector<double> weights;
};

CellRule cell_rule(const TensorGrid& grid, const WeightSpec& spec, int cell, int points = 6);

/// Cells whose closure lies in `region` (with round-off tolerance).
std::vector<int> cells_in(const TensorGrid& grid, const Box& region);

struct WeightedNorms {
  double L2 = 0.0;
  double H1_semi = 0.0;
  double Lp = 0.0;
  double Linf = 0.0;
};

/// Exact weighted L2 and H1 seminorm of the Q1 field over the cells of
/// `region`; Lp by tensor quadrature; Linf over the nodes of `region`.
WeightedNorms weighted_norms(const DiscreteField& u, const WeightSpec& spec, const Box& region, double p = 4.0);

/// Weighted L2 and H1 seminorm of (u - exact) over the cells of `region`.
struct ErrorNorms {
  double L2 = 0.0;
  double H1_semi = 0.0;
};
ErrorNorms weighted_error(const DiscreteField& u, const SmoothFunction& exact, const WeightSpec& spec,
                          const Box& region, int points = 6);

/// Weighted Lp norm of a pointwise function over a set of cells.
double weighted_lp(const TensorGrid& grid, const WeightSpec& spec, const std::vector<int>& cells,
                   const std::function<double(const Point&)>& g, double p, int points = 6);

// ---------------------------------------------------------------------------
// Weak residuals

/// Tensor bump prod_k (1 - ((z_k - c_k)/r_k)^2)^4 supported in |z_k - c_k| < r_k,
/// clipped to the domain (a bump centered on {y_i = 0} is a half-bump).
struct Bump {
  Point center;
  Point radius;

  double value(const Point& z) const;
  Point gradient(const Point& z) const;
};

/// Bumps on a regular lattice of the box; centers on {y_i = 0} when
/// `include_sigma`, supports kept away from the outer faces.
std::vector<Bump> bump_family(const Box& domain, const WeightSpec& spec, int per_axis, bool include_sigma);

/// max over bumps of |int w (A grad u . grad phi + b.grad u phi - f phi + F . grad phi)|.
double weak_residual(const SmoothFunction& u, const ProblemData& data, const std::vector<Bump>& tests,
                     int subdivisions = 4, int points = 10);

/// Same functional against the Q1 hats of `grid` that vanish on the outer faces.
double weak_residual(const SmoothFunction& u, const ProblemData& data, const TensorGrid& grid, int points = 8);

/// Discrete residual max |(K u - b)_m| over non-Dirichlet hats of the
/// unconstrained system.
double weak_residual(const DiscreteField& u, const ProblemData& data);

/// Coordinate text format, one "row col value" line per stored entry.
void write_system(std::ostream& out, const LinearSystem& sys);

}  // namespace orthodeg
