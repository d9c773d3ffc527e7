#include "orthodeg/grid.hpp"

#include <algorithm>
#include <cmath>
#include <iomanip>
#include <istream>
#include <ostream>
#include <sstream>
#include <string>

namespace orthodeg {

OrthantBox::OrthantBox(int d_, int n_, double L_) : d(d_), n(n_), L(L_) {
  require(d >= 1 && d <= 3, "OrthantBox: d must be 1, 2 or 3");
  require(n >= 1 && n <= d, "OrthantBox: need 1 <= n <= d");
  require(L > 0.0, "OrthantBox: L must be positive");
}

Box OrthantBox::box() const {
  Box b{Point(d), Point(d)};
  for (int k = 0; k < d; ++k) {
    b.lo[k] = weighted(k) ? 0.0 : -L;
    b.hi[k] = L;
  }
  return b;
}

Box OrthantBox::half_box() const {
  Box b = box();
  b.lo *= 0.5;
  b.hi *= 0.5;
  return b;
}

GridOptions GridOptions::defaults_for(const WeightSpec& spec, std::vector<int> cells) {
  GridOptions o;
  o.cells = std::move(cells);
  for (int i = 0; i < spec.n(); ++i)
    if (spec.a(i) <= -0.5 || spec.a(i) >= 0.5) o.grading = Grading::geometric;
  return o;
}

TensorGrid::TensorGrid(int n, double L, std::vector<Eigen::VectorXd> coords)
    : n_(n), L_(L), coords_(std::move(coords)) {
  const int dd = d();
  require(dd >= 1 && dd <= 3, "TensorGrid: d must be 1, 2 or 3");
  require(n_ >= 1 && n_ <= dd, "TensorGrid: need 1 <= n <= d");
  num_nodes_ = 1;
  num_cells_ = 1;
  for (int k = 0; k < 3; ++k) {
    stride_[k] = k < dd ? num_nodes_ : 0;
    cell_stride_[k] = k < dd ? num_cells_ : 0;
    if (k >= dd) continue;
    const Eigen::VectorXd& c = coords_[k];
    require(c.size() >= 3, "TensorGrid: need at least 3 nodes per axis");
    for (Eigen::Index j = 1; j < c.size(); ++j)
      require(c[j] > c[j - 1], "TensorGrid: node coordinates must be strictly increasing");
    num_nodes_ *= static_cast<int>(c.size());
    num_cells_ *= static_cast<int>(c.size()) - 1;
  }
}

std::array<int, 3> TensorGrid::node_multi(int idx) const {
  std::array<int, 3> m{0, 0, 0};
  for (int k = 0; k < d(); ++k) {
    m[k] = idx % nodes_on_axis(k);
    idx /= nodes_on_axis(k);
  }
  return m;
}

int TensorGrid::node_index(const std::array<int, 3>& m) const {
  int idx = 0;
  for (int k = 0; k < d(); ++k) idx += m[k] * stride_[k];
  return idx;
}

Point TensorGrid::node(int idx) const {
  const auto m = node_multi(idx);
  Point z(d());
  for (int k = 0; k < d(); ++k) z[k] = coords_[k][m[k]];
  return z;
}

NodeTag TensorGrid::tag(int idx) const {
  const auto m = node_multi(idx);
  NodeTag t;
  for (int k = 0; k < d(); ++k) {
    const int last = nodes_on_axis(k) - 1;
    if (weighted(k) && coords_[k][m[k]] == 0.0) t.sigma |= 1u << (k - (d() - n_));
    const bool lower_outer = !weighted(k) || reflected(k);
    if ((m[k] == 0 && lower_outer) || m[k] == last) t.outer = true;
  }
  return t;
}

std::array<int, 3> TensorGrid::cell_multi(int c) const {
  std::array<int, 3> m{0, 0, 0};
  for (int k = 0; k < d(); ++k) {
    m[k] = c % cells_on_axis(k);
    c /= cells_on_axis(k);
  }
  return m;
}

int TensorGrid::cell_vertex(int c, int v) const {
  auto m = cell_multi(c);
  for (int k = 0; k < d(); ++k) m[k] += (v >> k) & 1;
  return node_index(m);
}

Point TensorGrid::cell_center(int c) const {
  const auto m = cell_multi(c);
  Point z(d());
  for (int k = 0; k < d(); ++k) z[k] = 0.5 * (coords_[k][m[k]] + coords_[k][m[k] + 1]);
  return z;
}

Box TensorGrid::cell_box(int c) const {
  const auto m = cell_multi(c);
  Box b{Point(d()), Point(d())};
  for (int k = 0; k < d(); ++k) {
    b.lo[k] = coords_[k][m[k]];
    b.hi[k] = coords_[k][m[k] + 1];
  }
  return b;
}

Box TensorGrid::bounds() const {
  Box b{Point(d()), Point(d())};
  for (int k = 0; k < d(); ++k) {
    b.lo[k] = coords_[k][0];
    b.hi[k] = coords_[k][coords_[k].size() - 1];
  }
  return b;
}

TensorGrid build_grid(const OrthantBox& box, const GridOptions& options) {
  require(static_cast<int>(options.cells.size()) == box.d, "build_grid: one cell count per axis");
  if (!(options.ratio > 0.0 && options.ratio <= 1.0)) {
    throw InvalidArgument("build_grid: invalid grading ratio " + std::to_string(options.ratio));
  }
  std::vector<Eigen::VectorXd> coords;
  for (int k = 0; k < box.d; ++k) {
    const int N = options.cells[k];
    require(N >= 2, "build_grid: need at least 2 cells per axis");
    Eigen::VectorXd c(N + 1);
    if (!box.weighted(k)) {
      c = Eigen::VectorXd::LinSpaced(N + 1, -box.L, box.L);
    } else if (options.grading == Grading::uniform || options.ratio == 1.0) {
      c = Eigen::VectorXd::LinSpaced(N + 1, 0.0, box.L);
    } else {
      // Widths proportional to ratio^(N-1-j); the smallest touches the face.
      Eigen::VectorXd w(N);
      for (int j = 0; j < N; ++j) w[j] = std::pow(options.ratio, N - 1 - j);
      w *= box.L / w.sum();
      c[0] = 0.0;
      for (int j = 0; j < N; ++j) c[j + 1] = c[j] + w[j];
      c[N] = box.L;
    }
    coords.push_back(std::move(c));
  }
  return TensorGrid(box.n, box.L, std::move(coords));
}

std::vector<int> restrict_subregion(const TensorGrid& grid, const Box& inner) {
  require(inner.dim() == grid.d(), "restrict_subregion: dimension mismatch");
  const Box outer = grid.bounds();
  const double tol = 1e-12 * grid.L();
  for (int k = 0; k < grid.d(); ++k) {
    require(inner.lo[k] >= outer.lo[k] - tol && inner.hi[k] <= outer.hi[k] + tol,
            "restrict_subregion: inner box must lie in the grid domain");
  }
  std::vector<int> out;
  for (int idx = 0; idx < grid.num_nodes(); ++idx)
    if (inner.contains(grid.node(idx), tol)) out.push_back(idx);
  if (out.empty()) throw EmptyRegion("restrict_subregion: no grid node lies in the inner box");
  return out;
}

TensorGrid reflect_grid(const TensorGrid& grid, int i) {
  require(i >= 0 && i < grid.n(), "reflect_grid: axis must be weighted");
  const int k = grid.d() - grid.n() + i;
  std::vector<Eigen::VectorXd> coords;
  for (int j = 0; j < grid.d(); ++j) coords.push_back(grid.axis(j));
  const Eigen::VectorXd& c = grid.axis(k);
  std::vector<double> all;
  for (Eigen::Index j = 0; j < c.size(); ++j) {
    all.push_back(c[j]);
    all.push_back(c[j] == 0.0 ? 0.0 : -c[j]);
  }
  std::sort(all.begin(), all.end());
  all.erase(std::unique(all.begin(), all.end()), all.end());
  coords[k] = Eigen::Map<Eigen::VectorXd>(all.data(), static_cast<Eigen::Index>(all.size()));
  return TensorGrid(grid.n(), grid.L(), std::move(coords));
}

void write_grid(std::ostream& out, const TensorGrid& grid) {
  out << grid.d() << ' ' << grid.n() << ' ' << std::setprecision(17) << grid.L() << '\n';
  for (int k = 0; k < grid.d(); ++k) {
    const Eigen::VectorXd& c = grid.axis(k);
    for (Eigen::Index j = 0; j < c.size(); ++j) out << (j ? " " : "") << c[j];
    out << '\n';
  }
}

TensorGrid read_grid(std::istream& in) {
  std::string line;
  if (!std::getline(in, line)) throw ParseError("grid: missing header line");
  std::istringstream header(line);
  int d = 0, n = 0;
  double L = 0.0;
  if (!(header >> d >> n >> L)) throw ParseError("grid: header must be \"d n L\"");
  std::vector<Eigen::VectorXd> coords;
  for (int k = 0; k < d; ++k) {
    if (!std::getline(in, line)) throw ParseError("grid: missing node list for axis " + std::to_string(k + 1));
    std::istringstream row(line);
    std::vector<double> v;
    for (double x; row >> x;) v.push_back(x);
    coords.emplace_back(Eigen::Map<Eigen::VectorXd>(v.data(), static_cast<Eigen::Index>(v.size())));
  }
  return TensorGrid(n, L, std::move(coords));
}

}  // namespace orthodeg
