#pragma once

#include <functional>
#include <span>
#include <vector>

namespace subdelay {

/// Interior nodal coefficients of a piecewise-linear function vanishing at
/// both ends of the domain (length M-1 for M elements).
using FemVector = std::vector<double>;

/// Partition 0 = x_0 < x_1 < ... < x_M = L. Uniform when produced by
/// build_mesh; assembly only assumes quasi-uniformity.
struct SpatialMesh {
  double length = 0.0;
  std::vector<double> nodes;

  int elements() const noexcept { return static_cast<int>(nodes.size()) - 1; }
  int interior_dofs() const noexcept { return elements() - 1; }
  double element_length(int e) const { return nodes[e + 1] - nodes[e]; }
};

SpatialMesh build_mesh(double L, int M);

/// Gauss-Legendre rule mapped to the reference element [0,1].
struct QuadratureRule {
  std::span<const double> points;
  std::span<const double> weights;
};

const QuadratureRule& assembly_rule();  // 3 points, exact through degree 5
const QuadratureRule& error_rule();     // 5 points, exact through degree 9

/// Symmetric tridiagonal operator on the interior degrees of freedom.
struct TridiagonalMatrix {
  std::vector<double> sub;
  std::vector<double> diag;
  std::vector<double> sup;

  std::size_t size() const noexcept { return diag.size(); }
  FemVector apply(std::span<const double> x) const;
};

struct AssembledForms {
  TridiagonalMatrix mass;     // (phi_j, phi_k)
  TridiagonalMatrix stiff_B;  // p (phi_j', phi_k') - (a phi_j, phi_k)
};

/// Assembles the mass matrix and the bilinear-form matrix for diffusivity p
/// and reaction coefficient a(x) <= 0. A positive sample of a only warns:
/// the solve still runs, but positive definiteness is no longer guaranteed.
AssembledForms assemble(const SpatialMesh& mesh, double p,
                        const std::function<double(double)>& a);

/// Right-hand side entries (g, phi_j), one 3-point Gauss rule per element.
FemVector load_vector(const SpatialMesh& mesh,
                      const std::function<double(double)>& g);

/// Thomas elimination without pivoting, factored once and reused. Intended
/// for the symmetric positive definite matrices the assembly produces.
class TridiagonalFactor {
public:
  explicit TridiagonalFactor(const TridiagonalMatrix& T);
  FemVector solve(std::span<const double> rhs) const;
  std::size_t size() const noexcept { return inv_pivot_.size(); }

private:
  std::vector<double> sub_;
  std::vector<double> upper_ratio_;
  std::vector<double> inv_pivot_;
};

FemVector solve_tridiagonal(const TridiagonalMatrix& T, const FemVector& rhs);

/// L2 distance between the piecewise-linear function with interior values U
/// (zero at the boundary) and a pointwise-evaluable exact function, by the
/// 5-point rule per element.
double l2_error(const FemVector& U, const std::function<double(double)>& exact,
                const SpatialMesh& mesh);

}  // namespace subdelay
