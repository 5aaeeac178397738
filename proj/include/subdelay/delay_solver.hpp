#pragma once

#include <functional>
#include <span>
#include <vector>

#include "subdelay/fem1d.hpp"
#include "subdelay/frac_kernel.hpp"

namespace subdelay {

/// Data of the constant-delay reaction-subdiffusion problem
///   D_t^alpha u = p u_xx + a(x) u + b u(x, t - tau) + f(x, t)
/// on (0,L) x (0, K*tau], with u = phi on [-tau, 0] and homogeneous Dirichlet
/// boundary values. phi must vanish at both endpoints for t in [-tau, 0].
struct ProblemSpec {
  FractionalOrder alpha;
  double p = 1.0;
  std::function<double(double)> a;
  double b = 0.0;
  double tau = 1.0;
  int K = 1;
  double L = 1.0;
  std::function<double(double, double)> phi;
  std::function<double(double, double)> f;
};

/// Solution coefficient vectors U^n for n = -N..current, stored contiguously.
/// Frames -N..0 hold the projected history; later frames are appended by the
/// stepping loop. This is the only per-run buffer that scales with N*M.
class Trajectory {
public:
  Trajectory(const TimeGrid& grid, std::size_t dofs);

  const TimeGrid& grid() const noexcept { return grid_; }
  std::size_t dofs() const noexcept { return dofs_; }

  /// Highest frame index stored so far (-N-1 when empty).
  int latest() const noexcept { return stored_ - grid_.N - 1; }
  int capacity_steps() const noexcept { return grid_.total_steps(); }

  std::span<const double> frame(int n) const;
  std::span<double> append();

  const double* raw() const noexcept { return data_.data(); }

private:
  TimeGrid grid_;
  std::size_t dofs_;
  int stored_ = 0;
  std::vector<double> data_;
};

/// Nodal interpolation of phi(x, t_n) on the interior nodes for n = -N..0.
/// Throws if phi violates the homogeneous boundary values.
Trajectory init_history(const ProblemSpec& problem, const SpatialMesh& mesh,
                        const TimeGrid& grid);

/// Everything needed to advance the fully discrete scheme
///   (a_0 M + S) U^n = M [ sum_{k=1}^{n-1} (a_{k-1}-a_k) U^{n-k}
///                          + a_{n-1} U^0 + b U^{n-N} ] + F^n,
/// with M the mass matrix and S the bilinear-form matrix. The system matrix
/// is factored once per run; a_0 does not change on the uniform mesh.
class SolverState {
public:
  SolverState(ProblemSpec problem, SpatialMesh mesh, TimeGrid grid);

  const ProblemSpec& problem() const noexcept { return problem_; }
  const SpatialMesh& mesh() const noexcept { return mesh_; }
  const TimeGrid& grid() const noexcept { return grid_; }
  const L1Weights& weights() const noexcept { return weights_; }
  const TridiagonalMatrix& mass() const noexcept { return forms_.mass; }
  const TridiagonalMatrix& stiffness() const noexcept { return forms_.stiff_B; }
  const Trajectory& trajectory() const noexcept { return trajectory_; }

  /// Index of the most recently computed step (0 right after construction).
  int current_step() const noexcept { return trajectory_.latest(); }

  void step();
  Trajectory take_trajectory() && { return std::move(trajectory_); }

private:
  ProblemSpec problem_;
  SpatialMesh mesh_;
  TimeGrid grid_;
  L1Weights weights_;
  std::vector<double> weight_drop_;  // a_{k-1} - a_k
  AssembledForms forms_;
  TridiagonalFactor system_;
  Trajectory trajectory_;
};

/// Computes the next frame, appends it to the trajectory and returns a copy.
FemVector advance(SolverState& state);

/// Runs the scheme for n = 1..K*N and returns the full trajectory
/// ((K+1)N + 1 frames). Identical inputs produce bit-identical output.
Trajectory run(const ProblemSpec& problem, const SpatialMesh& mesh,
               const TimeGrid& grid);

}  // namespace subdelay
