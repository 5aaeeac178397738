#include "subdelay/fem1d.hpp"

#include <cmath>
#include <cstdio>
#include <stdexcept>

namespace subdelay {

namespace {

constexpr double kGauss3Points[3] = {
    0.11270166537925831, 0.5, 0.88729833462074169};
constexpr double kGauss3Weights[3] = {
    0.27777777777777778, 0.44444444444444444, 0.27777777777777778};

constexpr double kGauss5Points[5] = {
    0.046910077030668004, 0.23076534494715845, 0.5,
    0.76923465505284155, 0.95308992296933200};
constexpr double kGauss5Weights[5] = {
    0.11846344252809454, 0.23931433524968324, 0.28444444444444444,
    0.23931433524968324, 0.11846344252809454};

}  // namespace

const QuadratureRule& assembly_rule() {
  static const QuadratureRule rule{kGauss3Points, kGauss3Weights};
  return rule;
}

const QuadratureRule& error_rule() {
  static const QuadratureRule rule{kGauss5Points, kGauss5Weights};
  return rule;
}

SpatialMesh build_mesh(double L, int M) {
  if (!(L > 0.0)) throw std::invalid_argument("build_mesh: L must be positive");
  if (M < 2) throw std::invalid_argument("build_mesh: need at least two elements");
  SpatialMesh mesh;
  mesh.length = L;
  mesh.nodes.resize(M + 1);
  for (int j = 0; j <= M; ++j) mesh.nodes[j] = L * j / M;
  return mesh;
}

FemVector TridiagonalMatrix::apply(std::span<const double> x) const {
  const std::size_t n = size();
  if (x.size() != n)
    throw std::invalid_argument("TridiagonalMatrix::apply: size mismatch");
  FemVector y(n);
  for (std::size_t i = 0; i < n; ++i) {
    double acc = diag[i] * x[i];
    if (i > 0) acc += sub[i - 1] * x[i - 1];
    if (i + 1 < n) acc += sup[i] * x[i + 1];
    y[i] = acc;
  }
  return y;
}

AssembledForms assemble(const SpatialMesh& mesh, double p,
                        const std::function<double(double)>& a) {
  if (!(p > 0.0)) throw std::invalid_argument("assemble: p must be positive");
  const int M = mesh.elements();
  const int nd = mesh.interior_dofs();
  AssembledForms out;
  out.mass.sub.assign(nd - 1, 0.0);
  out.mass.diag.assign(nd, 0.0);
  out.mass.sup.assign(nd - 1, 0.0);
  out.stiff_B.sub.assign(nd - 1, 0.0);
  out.stiff_B.diag.assign(nd, 0.0);
  out.stiff_B.sup.assign(nd - 1, 0.0);

  const auto& rule = assembly_rule();
  bool warned = false;

  for (int e = 0; e < M; ++e) {
    const double x0 = mesh.nodes[e];
    const double h = mesh.element_length(e);

    // local integrals of a(x) phi_i phi_j
    double am00 = 0.0, am01 = 0.0, am11 = 0.0;
    for (std::size_t q = 0; q < rule.points.size(); ++q) {
      const double xi = rule.points[q];
      const double wq = rule.weights[q] * h;
      const double av = a(x0 + xi * h);
      if (av > 0.0 && !warned) {
        std::fprintf(stderr,
                     "assemble: warning: a(%.6g) = %.6g > 0, coercivity of the "
                     "bilinear form is not guaranteed\n",
                     x0 + xi * h, av);
        warned = true;
      }
      am00 += wq * av * (1.0 - xi) * (1.0 - xi);
      am01 += wq * av * (1.0 - xi) * xi;
      am11 += wq * av * xi * xi;
    }

    const double m00 = h / 3.0, m01 = h / 6.0;
    const double k00 = p / h, k01 = -p / h;

    const int left = e - 1;   // interior dof at node e
    const int right = e;      // interior dof at node e+1
    if (left >= 0) {
      out.mass.diag[left] += m00;
      out.stiff_B.diag[left] += k00 - am00;
    }
    if (right < nd) {
      out.mass.diag[right] += m00;
      out.stiff_B.diag[right] += k00 - am11;
    }
    if (left >= 0 && right < nd) {
      out.mass.sub[left] += m01;
      out.mass.sup[left] += m01;
      out.stiff_B.sub[left] += k01 - am01;
      out.stiff_B.sup[left] += k01 - am01;
    }
  }
  return out;
}

FemVector load_vector(const SpatialMesh& mesh,
                      const std::function<double(double)>& g) {
  const int M = mesh.elements();
  const int nd = mesh.interior_dofs();
  FemVector F(nd, 0.0);
  const auto& rule = assembly_rule();
  for (int e = 0; e < M; ++e) {
    const double x0 = mesh.nodes[e];
    const double h = mesh.element_length(e);
    for (std::size_t q = 0; q < rule.points.size(); ++q) {
      const double xi = rule.points[q];
      const double gv = rule.weights[q] * h * g(x0 + xi * h);
      if (e - 1 >= 0) F[e - 1] += gv * (1.0 - xi);
      if (e < nd) F[e] += gv * xi;
    }
  }
  return F;
}

TridiagonalFactor::TridiagonalFactor(const TridiagonalMatrix& T)
    : sub_(T.sub), upper_ratio_(T.sup.size()), inv_pivot_(T.size()) {
  const std::size_t n = T.size();
  if (n == 0) throw std::invalid_argument("TridiagonalFactor: empty matrix");
  if (T.sub.size() + 1 != n || T.sup.size() + 1 != n)
    throw std::invalid_argument("TridiagonalFactor: inconsistent band sizes");
  double pivot = T.diag[0];
  for (std::size_t i = 0;; ++i) {
    if (std::abs(pivot) < 1e-300)
      throw std::runtime_error(
          "TridiagonalFactor: vanishing pivot, matrix is numerically singular");
    inv_pivot_[i] = 1.0 / pivot;
    if (i + 1 == n) break;
    upper_ratio_[i] = T.sup[i] * inv_pivot_[i];
    pivot = T.diag[i + 1] - T.sub[i] * upper_ratio_[i];
  }
}

FemVector TridiagonalFactor::solve(std::span<const double> rhs) const {
  const std::size_t n = size();
  if (rhs.size() != n)
    throw std::invalid_argument("TridiagonalFactor::solve: size mismatch");
  FemVector x(n);
  x[0] = rhs[0] * inv_pivot_[0];
  for (std::size_t i = 1; i < n; ++i)
    x[i] = (rhs[i] - sub_[i - 1] * x[i - 1]) * inv_pivot_[i];
  for (std::size_t i = n - 1; i-- > 0;) x[i] -= upper_ratio_[i] * x[i + 1];
  return x;
}

FemVector solve_tridiagonal(const TridiagonalMatrix& T, const FemVector& rhs) {
  return TridiagonalFactor(T).solve(rhs);
}

double l2_error(const FemVector& U, const std::function<double(double)>& exact,
                const SpatialMesh& mesh) {
  const int M = mesh.elements();
  if (static_cast<int>(U.size()) != mesh.interior_dofs())
    throw std::invalid_argument("l2_error: coefficient count does not match mesh");
  const auto& rule = error_rule();
  double acc = 0.0;
  for (int e = 0; e < M; ++e) {
    const double x0 = mesh.nodes[e];
    const double h = mesh.element_length(e);
    const double u0 = e == 0 ? 0.0 : U[e - 1];
    const double u1 = e == M - 1 ? 0.0 : U[e];
    for (std::size_t q = 0; q < rule.points.size(); ++q) {
      const double xi = rule.points[q];
      const double d = u0 * (1.0 - xi) + u1 * xi - exact(x0 + xi * h);
      acc += rule.weights[q] * h * d * d;
    }
  }
  return std::sqrt(acc);
}

}  // namespace subdelay
