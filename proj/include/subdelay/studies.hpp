#pragma once

#include <optional>
#include <span>
#include <string>
#include <vector>

#include <json.hpp>

#include "subdelay/delay_solver.hpp"
#include "subdelay/fem1d.hpp"
#include "subdelay/frac_kernel.hpp"

namespace subdelay {

/// Benchmark problem with a closed-form solution on (0,1) x (0,3]:
///   u(x,t) = g(t) sin(pi x),
///   g(t)   = 1 - omega_{alpha+1}(t)
///            [+ omega_{2alpha+1}(t-1) past t=1]
///            [- omega_{3alpha+1}(t-2) past t=2],
/// with b = -1, tau = 1, K = 3 and the source chosen so the equation holds
/// exactly. g gains one power of smoothness at each delay point.
struct ManufacturedCase {
  double alpha;
  ProblemSpec problem;
  std::function<double(double)> time_factor;         // g
  std::function<double(double)> caputo_time_factor;  // D_t^alpha g, piecewise
  std::function<double(double, double)> exact;       // g(t) sin(pi x)
};

/// Reaction scale used in the benchmark tables: a(x) = -p x with
/// p = 1/100 except 1/500 at alpha = 0.8.
double default_diffusivity(double alpha);

ManufacturedCase manufactured_case(FractionalOrder alpha, double p,
                                   std::function<double(double)> a);
ManufacturedCase manufactured_case(FractionalOrder alpha);

/// One benchmark table: per row a resolution (N or M), the interval maxima
///   E_i = max_{(i-1)N < n <= iN} ||u^n - U^n||_0
/// (or the delay-node errors ||u^{iN} - U^{iN}||_0) and the observed order
/// rate = log2(E_prev / E) between consecutive rows.
struct ConvergenceRow {
  int resolution;
  std::vector<double> E;
  std::vector<double> rate;  // NaN on the first row
};

struct ConvergenceTable {
  std::string kind;           // "temporal" | "delay-nodes" | "spatial"
  double alpha;
  std::string resolution_label;  // "N" or "M"
  std::string fixed_label;       // the quantity held fixed ("h" or "N")
  double fixed_value;
  std::vector<int> intervals;    // delay-interval indices reported
  std::vector<ConvergenceRow> rows;
};

/// Optional overrides for the benchmark coefficients plus row parallelism
/// (0 threads = number of available processors).
struct StudyOptions {
  std::optional<double> p;
  std::optional<double> a_scale;  // a(x) = -a_scale * x
  unsigned threads = 0;
};

ConvergenceTable temporal_study(FractionalOrder alpha, double h,
                                std::span<const int> Ns,
                                const StudyOptions& options = {});

ConvergenceTable delay_node_study(FractionalOrder alpha, double h,
                                  std::span<const int> Ns,
                                  const StudyOptions& options = {});

ConvergenceTable spatial_study(FractionalOrder alpha, int N,
                               std::span<const int> Ms,
                               const StudyOptions& options = {});

/// Consistency error of the discrete Caputo operator on the manufactured
/// time factor: residual[n-1] = D_t^alpha g(t_n) - D_N^alpha g^n for
/// n = 1..KN, against the constant-free decay envelope
///   sum_{l=1}^{i} rho^{(l-1)alpha} (n-(l-1)N)^{e_l},
/// e_l = (l-2)alpha - 1 for alpha <= 1/2 and l alpha - 2 otherwise.
struct TruncationProfile {
  double alpha;
  TimeGrid grid;
  std::vector<double> residual;  // |R^n|, index n-1
  std::vector<double> bound;
  std::vector<double> fitted_constant;  // per interval: max residual/bound
  double slope_first_interval;  // log-log slope of |R^n| over n in [10, N]
};

TruncationProfile truncation_error_profile(const ManufacturedCase& the_case,
                                           const TimeGrid& grid);

/// Same profile for an arbitrary scalar time factor and its exact Caputo
/// derivative; the public profile delegates here.
TruncationProfile truncation_profile_for_factor(
    FractionalOrder alpha, const TimeGrid& grid,
    const std::function<double(double)>& factor,
    const std::function<double(double)>& caputo_factor);

/// Per-step errors of one benchmark run plus the reductions the tables use.
struct RunErrors {
  std::vector<double> per_step;      // ||u^n - U^n||_0, index n = 0..KN
  std::vector<double> interval_max;  // per delay interval
  std::vector<double> node_error;    // at the delay nodes t = i tau
};

RunErrors measure_manufactured(const ManufacturedCase& the_case, int N, int M);

/// Header row, one data row per resolution; errors in scientific notation
/// with five significant digits, rates with three decimals, LF endings.
std::string to_csv(const ConvergenceTable& table);
nlohmann::json to_json(const ConvergenceTable& table);

}  // namespace subdelay
