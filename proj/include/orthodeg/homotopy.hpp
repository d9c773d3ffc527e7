#pragma once

#include "orthodeg/coefficients.hpp"
#include "orthodeg/fem.hpp"
#include "orthodeg/types.hpp"
#include "orthodeg/weights.hpp"

#include <iosfwd>
#include <utility>
#include <vector>

namespace orthodeg {

/// Regularization parameters along a run. Entries decrease strictly in
/// the max norm while positive and end in the zero vector; extra trailing
/// zero entries are allowed.
struct HomotopySchedule {
  std::vector<Eigen::VectorXd> eps;

  /// eps_k = base 2^-k (k < steps) on every axis not pinned, then 0.
  static HomotopySchedule geometric(int n, double base = 0.4, int steps = 5, std::vector<int> pinned = {});

  /// Throws InvalidArgument on a malformed schedule.
  void validate(int n) const;
  std::size_t size() const { return eps.size(); }
};

/// Multiplier (w^{a+} / w_eps^{a+})^{1/p}; factors with eps_i = 0 are 1,
/// and at y_i = 0 a factor with a_i > 0 < eps_i is 0.
double reweight_factor(const WeightSpec& spec, const Eigen::VectorXd& eps, const Point& z, double p);

/// f_k = reweight_factor(p) f and F_k = reweight_factor(q) F (p, q >= 2).
std::pair<ScalarField, VectorField> reweight_data(const ScalarField& f, const VectorField& F, const WeightSpec& spec,
                                                  const Eigen::VectorXd& eps, double p, double q);

/// Radial C^2 cutoff: 1 on |z - c| <= r, 0 on |z - c| >= r_outer, quintic
/// smoothstep in between, so |grad| <= (15/8)/(r_outer - r).
struct Cutoff {
  Point center;
  double r = 0.5;
  double r_outer = 1.0;

  Cutoff(Point c, double r, double r_outer);
  double value(const Point& z) const;
  Point gradient(const Point& z) const;
};

/// xi u together with the commutator data of the localized equation
/// g = -F.grad(xi) - A grad(u).grad(xi) and G = -u A grad(xi).
struct LocalizedProblem {
  SmoothFunction u;
  ScalarField g;
  VectorField G;
};
LocalizedProblem cutoff_localize(const SmoothFunction& u, const CoefficientField& A, const VectorField& F,
                                 const Cutoff& xi);

/// (xi f, xi F).
std::pair<ScalarField, VectorField> cutoff_localize(const ScalarField& f, const VectorField& F, const Cutoff& xi);

struct HomotopyOptions {
  double solve_tol = 1e-10;
  double tol_conv = 0.05;      // relative to |u_0|_{H1(K)}
  double k_fraction = 0.3;     // K = {every weighted coordinate >= k_fraction L}
  bool reweight = true;
  int threads = 1;
};

struct HomotopyRow {
  double eps_max = 0.0;
  double energy_norm = 0.0;  // |u_k|_{H^{1,a,eps_k}} on the whole grid
  double diff_H1_K = 0.0;    // |u_k - u_0|_{H1(K)} with the limit weight
  double energy_ratio = 0.0; // local energy bound ratio when f = F = 0, NaN otherwise
  double residual = 0.0;     // discrete residual of the solve
  SolveReport solve;
};

struct HomotopyReport {
  std::vector<HomotopyRow> rows;
  Box K;
  double limit_H1_K = 0.0;
  double limit_residual = 0.0;
  bool eventually_decreasing = false;
  bool converged = false;        // final positive-eps difference <= tol_conv |u_0|_{H1(K)}
  bool energy_uniform = false;   // later energies <= 1.1 x max of the first three
  bool limit_is_solution = false;
  bool pass = false;
};

/// Solves the eps_k problems with the same Dirichlet data (and reweighted
/// f, F) and compares every solution with the last one on K.
HomotopyReport run_homotopy(const ProblemData& data, const HomotopySchedule& schedule,
                            std::shared_ptr<const TensorGrid> grid, const HomotopyOptions& options = {});

/// CSV: eps_max,energy_norm,diff_H1_K,energy_ratio
void write_homotopy_csv(std::ostream& out, const HomotopyReport& report);

}  // namespace orthodeg
