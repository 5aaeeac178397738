#include "subdelay/delay_solver.hpp"

#include <cmath>
#include <stdexcept>
#include <string>
#include <utility>

namespace subdelay {

namespace {

void validate_problem(const ProblemSpec& problem, const TimeGrid& grid) {
  if (!(problem.p > 0.0))
    throw std::invalid_argument("ProblemSpec: p must be positive");
  if (!(problem.L > 0.0))
    throw std::invalid_argument("ProblemSpec: L must be positive");
  if (!problem.a || !problem.phi || !problem.f)
    throw std::invalid_argument("ProblemSpec: a, phi and f must all be set");
  if (problem.tau != grid.tau || problem.K != grid.K)
    throw std::invalid_argument("ProblemSpec: time grid does not match tau and K");
}

std::vector<double> weight_drops(const L1Weights& w) {
  std::vector<double> drop(w.a.size() > 0 ? w.a.size() - 1 : 0);
  for (std::size_t k = 0; k + 1 < w.a.size(); ++k) drop[k] = w.a[k] - w.a[k + 1];
  return drop;
}

TridiagonalMatrix system_matrix(const AssembledForms& forms, double a0) {
  TridiagonalMatrix sys = forms.stiff_B;
  for (std::size_t i = 0; i < sys.diag.size(); ++i)
    sys.diag[i] += a0 * forms.mass.diag[i];
  for (std::size_t i = 0; i < sys.sub.size(); ++i) {
    sys.sub[i] += a0 * forms.mass.sub[i];
    sys.sup[i] += a0 * forms.mass.sup[i];
  }
  return sys;
}

}  // namespace

Trajectory::Trajectory(const TimeGrid& grid, std::size_t dofs)
    : grid_(grid), dofs_(dofs) {
  const std::size_t frames = static_cast<std::size_t>(grid.total_steps() + grid.N) + 1;
  data_.assign(frames * dofs_, 0.0);
}

std::span<const double> Trajectory::frame(int n) const {
  if (n < -grid_.N || n > latest())
    throw std::out_of_range("Trajectory::frame: step " + std::to_string(n) +
                            " not stored");
  return {data_.data() + static_cast<std::size_t>(n + grid_.N) * dofs_, dofs_};
}

std::span<double> Trajectory::append() {
  if (latest() >= capacity_steps())
    throw std::logic_error("Trajectory::append: run already complete");
  std::span<double> out{data_.data() + static_cast<std::size_t>(stored_) * dofs_,
                        dofs_};
  ++stored_;
  return out;
}

Trajectory init_history(const ProblemSpec& problem, const SpatialMesh& mesh,
                        const TimeGrid& grid) {
  validate_problem(problem, grid);
  Trajectory traj(grid, static_cast<std::size_t>(mesh.interior_dofs()));
  for (int n = -grid.N; n <= 0; ++n) {
    const double t = grid.time(n);
    if (std::abs(problem.phi(0.0, t)) > 1e-12 ||
        std::abs(problem.phi(problem.L, t)) > 1e-12)
      throw std::runtime_error(
          "init_history: phi does not vanish on the boundary at t = " +
          std::to_string(t));
    auto frame = traj.append();
    for (int j = 1; j < mesh.elements(); ++j)
      frame[j - 1] = problem.phi(mesh.nodes[j], t);
  }
  return traj;
}

SolverState::SolverState(ProblemSpec problem, SpatialMesh mesh, TimeGrid grid)
    : problem_(std::move(problem)),
      mesh_(std::move(mesh)),
      grid_(grid),
      weights_((validate_problem(problem_, grid_),
                l1_weights(problem_.alpha, grid_.rho, grid_.total_steps()))),
      weight_drop_(weight_drops(weights_)),
      forms_(assemble(mesh_, problem_.p, problem_.a)),
      system_(system_matrix(forms_, weights_.a[0])),
      trajectory_(init_history(problem_, mesh_, grid_)) {}

void SolverState::step() {
  const int n = current_step() + 1;
  if (n > grid_.total_steps())
    throw std::logic_error("SolverState::step: run already complete");
  const std::size_t d = trajectory_.dofs();
  const auto& a = weights_.a;

  // U^{n-1} down to U^1, weighted by a_{k-1} - a_k
  FemVector hist(d, 0.0);
  const double* frame =
      trajectory_.raw() + static_cast<std::size_t>(n - 1 + grid_.N) * d;
  for (int k = 1; k < n; ++k, frame -= d) {
    const double c = weight_drop_[k - 1];
    for (std::size_t j = 0; j < d; ++j) hist[j] += c * frame[j];
  }
  const auto u0 = trajectory_.frame(0);
  const auto udelay = trajectory_.frame(n - grid_.N);
  const double an1 = a[n - 1];
  for (std::size_t j = 0; j < d; ++j)
    hist[j] += an1 * u0[j] + problem_.b * udelay[j];

  FemVector rhs = forms_.mass.apply(hist);
  const double tn = grid_.time(n);
  const FemVector F =
      load_vector(mesh_, [&](double x) { return problem_.f(x, tn); });
  for (std::size_t j = 0; j < d; ++j) rhs[j] += F[j];

  const FemVector u = system_.solve(rhs);
  auto out = trajectory_.append();
  for (std::size_t j = 0; j < d; ++j) {
    if (!std::isfinite(u[j]))
      throw std::runtime_error("SolverState::step: non-finite value at step " +
                               std::to_string(n));
    out[j] = u[j];
  }
}

FemVector advance(SolverState& state) {
  state.step();
  const auto frame = state.trajectory().frame(state.current_step());
  return FemVector(frame.begin(), frame.end());
}

Trajectory run(const ProblemSpec& problem, const SpatialMesh& mesh,
               const TimeGrid& grid) {
  SolverState state(problem, mesh, grid);
  const int total = grid.total_steps();
  for (int n = 0; n < total; ++n) state.step();
  return std::move(state).take_trajectory();
}

}  // namespace subdelay
