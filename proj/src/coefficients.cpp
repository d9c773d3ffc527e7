#include "orthodeg/coefficients.hpp"

#include <Eigen/Eigenvalues>

#include <cmath>
#include <numbers>
#include <random>
#include <vector>

namespace orthodeg {

namespace {

void record(Violation& v, double amount, int node, const Point& z) {
  if (amount > v.value) {
    v.value = amount;
    v.node = node;
    v.z = z;
  }
}

double min_sym_eigenvalue(const Mat& M) {
  const Mat sym = 0.5 * (M + M.transpose());
  if (sym.rows() == 1) return sym(0, 0);
  if (sym.rows() == 2) {
    Eigen::SelfAdjointEigenSolver<Eigen::Matrix2d> es;
    es.computeDirect(Eigen::Matrix2d(sym), Eigen::EigenvaluesOnly);
    return es.eigenvalues().minCoeff();
  }
  Eigen::SelfAdjointEigenSolver<Eigen::Matrix3d> es;
  es.computeDirect(Eigen::Matrix3d(sym), Eigen::EigenvaluesOnly);
  return es.eigenvalues().minCoeff();
}

}  // namespace

StructuralReport check_structural_assumptions(const CoefficientField& A, const TensorGrid& grid,
                                              double tol, bool check_symmetry) {
  require(grid.d() == A.d && grid.n() == A.n, "check_structural_assumptions: grid does not match A");
  const int d = A.d, n = A.n, m = d - n;
  StructuralReport rep;
  rep.symmetry_checked = check_symmetry;
  for (int idx = 0; idx < grid.num_nodes(); ++idx) {
    const Point z = grid.node(idx);
    const NodeTag tag = grid.tag(idx);
    const Mat M = A(z);
    const double ell = std::max(A.lambda - min_sym_eigenvalue(M), M.cwiseAbs().maxCoeff() - A.Lambda);
    record(rep.ellipticity, ell, idx, z);
    for (int i = 0; i < n; ++i) {
      if (!tag.on_sigma(i)) continue;
      for (int j = 0; j < n; ++j) {
        if (j == i || !tag.on_sigma(j)) continue;
        record(rep.orthogonality, std::abs(M(m + i, m + j)), idx, z);
      }
      if (check_symmetry) {
        for (int j = 0; j < m; ++j) record(rep.symmetry, std::abs(M(j, m + i) - M(m + i, j)), idx, z);
      }
    }
  }
  rep.ellipticity_ok = rep.ellipticity.value <= tol;
  rep.orthogonality_ok = rep.orthogonality.value <= tol;
  rep.symmetry_ok = !check_symmetry || rep.symmetry.value <= tol;
  return rep;
}

CoefficientField identity_coefficients(int d, int n) {
  CoefficientField c = constant_coefficients(Mat::Identity(d, d), n, "identity");
  return c;
}

CoefficientField constant_coefficients(const Mat& M, int n, std::string name) {
  require(M.rows() == M.cols() && M.rows() >= 1 && M.rows() <= 3, "constant_coefficients: square matrix of size <= 3");
  CoefficientField c;
  c.d = static_cast<int>(M.rows());
  c.n = n;
  c.A = MatrixField([M](const Point&) { return M; });
  c.lambda = min_sym_eigenvalue(M);
  c.Lambda = M.cwiseAbs().maxCoeff();
  require(c.lambda > 0.0, "constant_coefficients: matrix is not elliptic");
  c.holder_alpha = 1.0;
  c.holder_L = 0.0;
  c.constant = true;
  c.name = std::move(name);
  return c;
}

CoefficientField a_theta(double theta) {
  if (!(theta > 0.0 && theta < std::numbers::pi)) {
    throw OutOfDomain("a_theta: theta must lie in (0, pi)");
  }
  const double s = std::sin(theta), c = std::cos(theta);
  Mat M(2, 2);
  M << 1.0, -c, -c, 1.0;
  M /= s;
  CoefficientField out = constant_coefficients(M, 2, "a_theta:" + std::to_string(theta));
  out.lambda = (1.0 - std::abs(c)) / s;
  out.Lambda = (1.0 + std::abs(c)) / s;
  return out;
}

namespace {

// amp * sin(k . z + phase)
struct Wave {
  double amp = 0.0;
  Point k;
  double phase = 0.0;

  double operator()(const Point& z) const { return amp * std::sin(k.dot(z) + phase); }
  double lip() const { return std::abs(amp) * k.norm(); }
};

Wave random_wave(std::mt19937_64& rng, int d, double amp) {
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  Wave w;
  w.amp = amp * u(rng);
  w.k = Point(d);
  for (int k = 0; k < d; ++k) w.k[k] = std::numbers::pi * u(rng);
  w.phase = std::numbers::pi * u(rng);
  return w;
}

double taper(double y) { return 0.5 * y * y / (1.0 + y * y); }
double corner(double y) { return y * y / (1.0 + y * y); }
// max |taper'| and max |corner'|
constexpr double kTaperLip = 0.32476;
constexpr double kCornerLip = 0.64952;

}  // namespace

CoefficientField smooth_block(int d, int n, std::uint64_t seed) {
  require(d >= 1 && d <= 3 && n >= 1 && n <= d, "smooth_block: need 1 <= n <= d <= 3");
  const int m = d - n;
  std::mt19937_64 rng(seed);
  std::vector<Wave> diag, P, Q, S;
  for (int k = 0; k < d; ++k) diag.push_back(random_wave(rng, d, 0.1));
  for (int k = 0; k < m * m; ++k) P.push_back(random_wave(rng, d, 0.1));
  for (int k = 0; k < m * n; ++k) Q.push_back(random_wave(rng, d, 0.15));
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  std::vector<double> scoef(n * n);
  for (double& s : scoef) s = 0.2 * u(rng);

  auto fn = [=](const Point& z) {
    Mat M = Mat::Zero(d, d);
    for (int a = 0; a < m; ++a)
      for (int b = 0; b < m; ++b) M(a, b) = a == b ? 0.0 : P[a * m + b](z);
    for (int j = 0; j < m; ++j) {
      for (int i = 0; i < n; ++i) {
        const double q = Q[j * n + i](z);
        M(j, m + i) = q;
        M(m + i, j) = q * (1.0 - taper(z[m + i]));
      }
    }
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < n; ++j)
        if (i != j) M(m + i, m + j) = scoef[i * n + j] * corner(z[m + i]) * corner(z[m + j]);
    for (int k = 0; k < d; ++k) M(k, k) = 2.0 + diag[k](z);
    return M;
  };

  // Frobenius Lipschitz bound from entrywise gradient bounds.
  double lip2 = 0.0;
  for (const Wave& w : diag) lip2 += w.lip() * w.lip();
  for (int a = 0; a < m; ++a)
    for (int b = 0; b < m; ++b)
      if (a != b) lip2 += P[a * m + b].lip() * P[a * m + b].lip();
  for (const Wave& w : Q) {
    const double r = w.lip() + std::abs(w.amp) * kTaperLip;
    lip2 += w.lip() * w.lip() + r * r;
  }
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j)
      if (i != j) {
        const double s = std::abs(scoef[i * n + j]) * std::sqrt(2.0) * kCornerLip;
        lip2 += s * s;
      }

  CoefficientField c;
  c.A = MatrixField(fn);
  c.d = d;
  c.n = n;
  c.lambda = 1.0;
  c.Lambda = 3.0;
  c.holder_alpha = 1.0;
  c.holder_L = std::sqrt(lip2);
  c.name = "smooth_block:" + std::to_string(seed);
  return c;
}

CoefficientField coefficient_preset(const std::string& name, int d, int n) {
  if (name == "identity") return identity_coefficients(d, n);
  const auto colon = name.find(':');
  const std::string head = name.substr(0, colon);
  const std::string arg = colon == std::string::npos ? "" : name.substr(colon + 1);
  try {
    if (head == "a_theta") {
      require(d == 2 && n == 2, "a_theta preset needs d = n = 2");
      std::size_t used = 0;
      const double theta = std::stod(arg, &used);
      require(used == arg.size(), "a_theta: trailing characters");
      return a_theta(theta);
    }
    if (head == "smooth_block") {
      std::size_t used = 0;
      const unsigned long long seed = std::stoull(arg, &used);
      require(used == arg.size(), "smooth_block: trailing characters");
      return smooth_block(d, n, seed);
    }
  } catch (const std::logic_error&) {
    throw ValidationError("coefficient preset \"" + name + "\": bad argument");
  }
  throw ValidationError("unknown coefficient preset \"" + name + "\"");
}

ReflectedData reflect_coefficients(const CoefficientField& A, const ScalarField& f, const VectorField& F,
                                   int i) {
  require(i >= 0 && i < A.n, "reflect_coefficients: axis must be weighted");
  const int k = A.d - A.n + i;
  auto mirror = [k](Point z) {
    z[k] = -z[k];
    return z;
  };
  // Points on the interface follow the side of the hint.
  auto on_mirror = [k](const Point& z, const Point& inside) { return z[k] < 0.0 || (z[k] == 0.0 && inside[k] < 0.0); };

  ReflectedData out;
  out.A = A;
  out.A.A = MatrixField([A, k, mirror, on_mirror](const Point& z, const Point& inside) {
    if (!on_mirror(z, inside)) return A(z, inside);
    Mat M = A(mirror(z), mirror(inside));
    M.row(k) *= -1.0;
    M.col(k) *= -1.0;
    return M;
  });
  out.A.constant = false;
  out.f = ScalarField([f, mirror, on_mirror](const Point& z, const Point& inside) {
    return on_mirror(z, inside) ? f(mirror(z), mirror(inside)) : f(z, inside);
  });
  out.F = VectorField([F, k, mirror, on_mirror](const Point& z, const Point& inside) {
    if (!on_mirror(z, inside)) return F(z, inside);
    Point v = F(mirror(z), mirror(inside));
    v[k] = -v[k];
    return v;
  });
  return out;
}

double holder_quotient_max(const CoefficientField& A, const Box& box, int pairs, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  const int d = box.dim();
  double best = 0.0;
  for (int p = 0; p < pairs; ++p) {
    Point z(d), w(d);
    for (int k = 0; k < d; ++k) {
      z[k] = box.lo[k] + u(rng) * (box.hi[k] - box.lo[k]);
      w[k] = box.lo[k] + u(rng) * (box.hi[k] - box.lo[k]);
    }
    const double dist = (z - w).norm();
    if (dist == 0.0) continue;
    best = std::max(best, (A(z) - A(w)).norm() / std::pow(dist, A.holder_alpha));
  }
  return best;
}

}  // namespace orthodeg
