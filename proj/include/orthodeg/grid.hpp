#pragma once

#include "orthodeg/types.hpp"
#include "orthodeg/weights.hpp"

#include <Eigen/Core>

#include <array>
#include <cstdint>
#include <iosfwd>
#include <vector>

namespace orthodeg {

/// (-L, L)^(d-n) x (0, L)^n.
struct OrthantBox {
  int d = 1;
  int n = 1;
  double L = 1.0;

  OrthantBox() = default;
  OrthantBox(int d, int n, double L);

  bool weighted(int k) const { return k >= d - n; }
  Box box() const;
  /// (-L/2, L/2)^(d-n) x (0, L/2)^n.
  Box half_box() const;
};

enum class Grading { uniform, geometric };

struct GridOptions {
  std::vector<int> cells;  // per axis, >= 2
  Grading grading = Grading::uniform;
  double ratio = 0.7;  // geometric ratio toward each weighted face

  /// Geometric 0.7 grading when any exponent lies outside (-0.5, 0.5).
  static GridOptions defaults_for(const WeightSpec& spec, std::vector<int> cells);
};

/// Node tags: bit i set for nodes on {y_i = 0}; `outer` for nodes on the
/// Dirichlet part of the boundary. No bits and no outer means interior.
struct NodeTag {
  std::uint32_t sigma = 0;
  bool outer = false;

  bool interior() const { return sigma == 0 && !outer; }
  bool on_sigma(int i) const { return (sigma >> i) & 1u; }
};

class TensorGrid {
 public:
  TensorGrid() = default;
  /// Axis coordinates must be strictly increasing with at least 3 nodes each.
  TensorGrid(int n, double L, std::vector<Eigen::VectorXd> coords);

  int d() const { return static_cast<int>(coords_.size()); }
  int n() const { return n_; }
  double L() const { return L_; }
  bool weighted(int k) const { return k >= d() - n_; }
  /// A weighted axis that has been mirrored across its face.
  bool reflected(int k) const { return weighted(k) && coords_[k][0] < 0.0; }

  const Eigen::VectorXd& axis(int k) const { return coords_[k]; }
  int nodes_on_axis(int k) const { return static_cast<int>(coords_[k].size()); }
  int cells_on_axis(int k) const { return nodes_on_axis(k) - 1; }

  int num_nodes() const { return num_nodes_; }
  int num_cells() const { return num_cells_; }

  std::array<int, 3> node_multi(int idx) const;
  int node_index(const std::array<int, 3>& m) const;
  Point node(int idx) const;
  NodeTag tag(int idx) const;

  std::array<int, 3> cell_multi(int c) const;
  /// Vertex v of cell c; bit k of v selects the upper node on axis k.
  int cell_vertex(int c, int v) const;
  Point cell_center(int c) const;
  Box cell_box(int c) const;

  /// Domain box covered by the grid.
  Box bounds() const;

 private:
  int n_ = 1;
  double L_ = 1.0;
  std::vector<Eigen::VectorXd> coords_;
  std::array<int, 3> stride_{};
  std::array<int, 3> cell_stride_{};
  int num_nodes_ = 0;
  int num_cells_ = 0;
};

TensorGrid build_grid(const OrthantBox& box, const GridOptions& options);

/// Indices of nodes inside `inner` (closed, with round-off tolerance).
std::vector<int> restrict_subregion(const TensorGrid& grid, const Box& inner);

/// Union of the node set with its mirror image across {y_i = 0}.
TensorGrid reflect_grid(const TensorGrid& grid, int i);

/// Text format: "d n L" on the first line, then one line of node
/// coordinates per axis.
void write_grid(std::ostream& out, const TensorGrid& grid);
TensorGrid read_grid(std::istream& in);

}  // namespace orthodeg
