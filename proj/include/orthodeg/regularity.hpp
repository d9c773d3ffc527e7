#pragma once

#include "orthodeg/coefficients.hpp"
#include "orthodeg/fem.hpp"
#include "orthodeg/types.hpp"
#include "orthodeg/weights.hpp"

#include <cstdint>
#include <functional>
#include <string>
#include <vector>

namespace orthodeg {

enum class PairSampling { exhaustive, stratified };

struct SeminormReport {
  double alpha = 0.0;
  Box region;
  double value = 0.0;
  int node_a = -1;  // attaining pair
  int node_b = -1;
  PairSampling mode = PairSampling::exhaustive;
};

/// Largest pair count for which all node pairs are visited.
inline constexpr int kExhaustiveNodes = 5000;

/// sup |u_m - u_n| / |z_m - z_n|^alpha over node pairs in `region`;
/// stratified over dyadic distance bands (plus every axis neighbor pair)
/// above kExhaustiveNodes nodes.
SeminormReport holder_seminorm(const DiscreteField& u, const Box& region, double alpha, std::uint64_t seed = 0,
                               int samples_per_band = 100000);

/// Vector version: the difference is measured in the Euclidean norm.
SeminormReport holder_seminorm(const std::vector<DiscreteField>& u, const Box& region, double alpha,
                               std::uint64_t seed = 0, int samples_per_band = 100000);

/// max |(A grad u + F) . e_{y_i}| over the nodes of {y_i = 0} inside
/// `region`; grad u is the recovered nodal gradient (one-sided on the face).
double boundary_flux(const DiscreteField& u, const CoefficientField& A, const VectorField& F, int i,
                     const Box& region);
double boundary_flux(const DiscreteField& u, const CoefficientField& A, const VectorField& F, int i);

/// |u|_{Linf(inner)} / (|u|_{L2,w} + |f|_{Lp,w} + |F|_{Lq,w}) with the
/// norms on the whole grid. Requires p > (d + <a+>)/2 and q > d + <a+>.
double linf_bound_ratio(const DiscreteField& u, const ProblemData& data, const Box& inner);

enum class Verdict { pass, fail, invalid_region };
std::string to_string(Verdict v);

struct StabilityRow {
  double eps = 0.0;
  double seminorm = 0.0;
  double normalizer = 1.0;
  double ratio = 0.0;
  SolveReport solve;
};

struct StabilityResult {
  std::vector<StabilityRow> rows;
  double alpha = 0.0;
  int order = 0;
  double max_ratio = 0.0;
  double median_ratio = 0.0;
  Verdict verdict = Verdict::fail;
};

/// Ratio rule shared by the sweeps: max <= slack x median.
inline constexpr double kStabilitySlack = 1.25;
Verdict spread_verdict(const std::vector<double>& values, double* max_out = nullptr, double* median_out = nullptr);

/// True when `inner` reaches an outer (Dirichlet) face of the grid.
bool touches_outer_boundary(const TensorGrid& grid, const Box& inner);

/// Solves problem(eps) for each eps and records the Holder seminorm of u
/// (order 0) or of its recovered gradient (order 1) on `inner`, normalized
/// by |u|_{L2,w_eps} + |f|_{Lp,w_eps} + |F|_{Lq,w_eps} on the whole grid.
StabilityResult stability_sweep(const std::function<ProblemData(double)>& problem,
                                std::shared_ptr<const TensorGrid> grid, const std::vector<double>& eps,
                                double alpha, int order, const Box& inner, double tol = 1e-10);

struct CornerRow {
  double r = 0.0;
  double seminorm = 0.0;
};

struct CornerResult {
  std::vector<CornerRow> rows;
  double max_value = 0.0;
  double median_value = 0.0;
  Verdict verdict = Verdict::fail;
};

/// Seminorm of u (order 0) or of its recovered gradient (order 1) on the
/// shrinking boxes {|x| <= r, 0 <= y <= r} around the origin, each sampled
/// on a lattice of `cells` per axis so the resolution scales with r.
/// Judged by the same spread rule.
CornerResult corner_sweep(const DiscreteField& u, const std::vector<double>& radii, double alpha, int order,
                          int cells = 16);

struct RescaleSpec {
  Point center;
  double r = 1.0;
  double alpha = 1.0;
  double M = 1.0;
};

/// v(z) = (u(c + r z) - u(c)) / (M r^alpha) on a uniform grid of the unit
/// box: [0, 1] on weighted axes whose center coordinate is 0, [-1, 1]
/// otherwise. Throws OutOfDomain if c + r (unit box) leaves the grid.
DiscreteField blowup_rescale(const DiscreteField& u, const RescaleSpec& rs, int cells = 16);

}  // namespace orthodeg
