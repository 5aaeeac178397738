#include "subdelay/studies.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdio>
#include <exception>
#include <limits>
#include <mutex>
#include <numbers>
#include <stdexcept>
#include <thread>
#include <utility>

namespace subdelay {

namespace {

double sinpix(double x) { return std::sin(std::numbers::pi * x); }

// Runs fn(0..count-1) on up to `threads` workers. Row order in the results is
// the caller's responsibility; indices are handed out atomically.
template <typename Fn>
void for_each_index(std::size_t count, unsigned threads, Fn&& fn) {
  if (threads == 0) threads = std::max(1u, std::thread::hardware_concurrency());
  threads = static_cast<unsigned>(std::min<std::size_t>(threads, count));
  if (threads <= 1) {
    for (std::size_t i = 0; i < count; ++i) fn(i);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::exception_ptr first_error;
  std::mutex error_mutex;
  std::vector<std::thread> pool;
  pool.reserve(threads);
  for (unsigned t = 0; t < threads; ++t) {
    pool.emplace_back([&] {
      for (std::size_t i; (i = next.fetch_add(1)) < count;) {
        try {
          fn(i);
        } catch (...) {
          std::scoped_lock lock(error_mutex);
          if (!first_error) first_error = std::current_exception();
        }
      }
    });
  }
  for (auto& worker : pool) worker.join();
  if (first_error) std::rethrow_exception(first_error);
}

std::vector<double> compute_rates(const std::vector<double>& prevE,
                                  const std::vector<double>& curE) {
  std::vector<double> rates(curE.size());
  for (std::size_t i = 0; i < curE.size(); ++i)
    rates[i] = std::log2(prevE[i] / curE[i]);
  return rates;
}

double least_squares_slope(std::span<const double> x, std::span<const double> y) {
  const double n = static_cast<double>(x.size());
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    sx += x[i];
    sy += y[i];
    sxx += x[i] * x[i];
    sxy += x[i] * y[i];
  }
  return (n * sxy - sx * sy) / (n * sxx - sx * sx);
}

}  // namespace

double default_diffusivity(double alpha) {
  return alpha == 0.8 ? 1.0 / 500.0 : 1.0 / 100.0;
}

ManufacturedCase manufactured_case(FractionalOrder alpha, double p,
                                   std::function<double(double)> a) {
  const double al = alpha.value();

  auto factor = [al](double t) {
    double g = t > 0.0 ? 1.0 - omega(al + 1.0, t) : 1.0;
    if (t > 1.0) g += omega(2.0 * al + 1.0, t - 1.0);
    if (t > 2.0) g -= omega(3.0 * al + 1.0, t - 2.0);
    return g;
  };
  // Term by term: D_t^alpha omega_{beta+1} = omega_{beta-alpha+1}, shifted
  // terms start contributing only past their onset.
  auto caputo_factor = [al](double t) {
    double c = -1.0;
    if (t > 1.0) c += omega(al + 1.0, t - 1.0);
    if (t > 2.0) c -= omega(2.0 * al + 1.0, t - 2.0);
    return c;
  };
  auto exact = [factor](double x, double t) { return factor(t) * sinpix(x); };

  ManufacturedCase mc{al, ProblemSpec{alpha}, factor, caputo_factor, exact};
  mc.problem.p = p;
  mc.problem.a = std::move(a);
  mc.problem.b = -1.0;
  mc.problem.tau = 1.0;
  mc.problem.K = 3;
  mc.problem.L = 1.0;
  mc.problem.phi = [](double x, double) { return sinpix(x); };
  const auto& areac = mc.problem.a;
  mc.problem.f = [p, areac, factor](double x, double t) {
    return (p * std::numbers::pi * std::numbers::pi - areac(x)) * factor(t) *
           sinpix(x);
  };
  return mc;
}

ManufacturedCase manufactured_case(FractionalOrder alpha) {
  const double p = default_diffusivity(alpha.value());
  return manufactured_case(alpha, p, [p](double x) { return -p * x; });
}

RunErrors measure_manufactured(const ManufacturedCase& the_case, int N, int M) {
  const TimeGrid grid(the_case.problem.tau, N, the_case.problem.K);
  const SpatialMesh mesh = build_mesh(the_case.problem.L, M);
  const Trajectory traj = run(the_case.problem, mesh, grid);

  const int KN = grid.total_steps();
  RunErrors out;
  out.per_step.assign(KN + 1, 0.0);
  out.interval_max.assign(grid.K, 0.0);
  out.node_error.assign(grid.K, 0.0);
  for (int n = 1; n <= KN; ++n) {
    const double g = the_case.time_factor(grid.time(n));
    const FemVector frame(traj.frame(n).begin(), traj.frame(n).end());
    const double err =
        l2_error(frame, [g](double x) { return g * sinpix(x); }, mesh);
    out.per_step[n] = err;
    const int interval = (n - 1) / grid.N;
    out.interval_max[interval] = std::max(out.interval_max[interval], err);
    if (n % grid.N == 0) out.node_error[n / grid.N - 1] = err;
  }
  return out;
}

namespace {

ManufacturedCase case_from_options(FractionalOrder alpha,
                                   const StudyOptions& options) {
  const double p = options.p.value_or(default_diffusivity(alpha.value()));
  const double scale = options.a_scale.value_or(p);
  return manufactured_case(alpha, p, [scale](double x) { return -scale * x; });
}

ConvergenceTable resolution_sweep(const ManufacturedCase& mc,
                                  std::span<const int> resolutions,
                                  const StudyOptions& options, bool spatial,
                                  bool node_errors, int fixed_size) {
  const int K = mc.problem.K;
  ConvergenceTable table;
  table.alpha = mc.alpha;
  if (spatial) {
    table.kind = "spatial";
    table.resolution_label = "M";
    table.fixed_label = "N";
    table.fixed_value = fixed_size;
    table.intervals = {K};
  } else {
    table.kind = node_errors ? "delay-nodes" : "temporal";
    table.resolution_label = "N";
    table.fixed_label = "h";
    table.fixed_value = 1.0 / fixed_size;
    table.intervals.resize(K);
    for (int i = 0; i < K; ++i) table.intervals[i] = i + 1;
  }

  std::vector<std::vector<double>> columns(resolutions.size());
  for_each_index(resolutions.size(), options.threads, [&](std::size_t r) {
    const int res = resolutions[r];
    const int N = spatial ? fixed_size : res;
    const int M = spatial ? res : fixed_size;
    const RunErrors errs = measure_manufactured(mc, N, M);
    if (spatial)
      columns[r] = {errs.interval_max[K - 1]};
    else
      columns[r] = node_errors ? errs.node_error : errs.interval_max;
  });

  for (std::size_t r = 0; r < resolutions.size(); ++r) {
    ConvergenceRow row;
    row.resolution = resolutions[r];
    row.E = columns[r];
    row.rate = r == 0 ? std::vector<double>(
                            columns[r].size(),
                            std::numeric_limits<double>::quiet_NaN())
                      : compute_rates(columns[r - 1], columns[r]);
    table.rows.push_back(std::move(row));
  }
  return table;
}

void require_increasing(std::span<const int> values, const char* what) {
  if (values.empty())
    throw std::invalid_argument(std::string(what) + ": empty resolution list");
  for (std::size_t i = 0; i + 1 < values.size(); ++i)
    if (values[i + 1] <= values[i])
      throw std::invalid_argument(std::string(what) +
                                  ": resolutions must be strictly increasing");
}

}  // namespace

ConvergenceTable temporal_study(FractionalOrder alpha, double h,
                                std::span<const int> Ns,
                                const StudyOptions& options) {
  require_increasing(Ns, "temporal_study");
  if (!(h > 0.0) || h > 0.5)
    throw std::invalid_argument("temporal_study: h must lie in (0, 1/2]");
  const int M = static_cast<int>(std::lround(1.0 / h));
  return resolution_sweep(case_from_options(alpha, options), Ns, options,
                          /*spatial=*/false, /*node_errors=*/false, M);
}

ConvergenceTable delay_node_study(FractionalOrder alpha, double h,
                                  std::span<const int> Ns,
                                  const StudyOptions& options) {
  require_increasing(Ns, "delay_node_study");
  if (!(h > 0.0) || h > 0.5)
    throw std::invalid_argument("delay_node_study: h must lie in (0, 1/2]");
  const int M = static_cast<int>(std::lround(1.0 / h));
  return resolution_sweep(case_from_options(alpha, options), Ns, options,
                          /*spatial=*/false, /*node_errors=*/true, M);
}

ConvergenceTable spatial_study(FractionalOrder alpha, int N,
                               std::span<const int> Ms,
                               const StudyOptions& options) {
  require_increasing(Ms, "spatial_study");
  if (N < 1) throw std::invalid_argument("spatial_study: N must be positive");
  return resolution_sweep(case_from_options(alpha, options), Ms, options,
                          /*spatial=*/true, /*node_errors=*/false, N);
}

TruncationProfile truncation_profile_for_factor(
    FractionalOrder alpha, const TimeGrid& grid,
    const std::function<double(double)>& factor,
    const std::function<double(double)>& caputo_factor) {
  const int N = grid.N;
  const int KN = grid.total_steps();
  const double al = alpha.value();
  const L1Weights w = l1_weights(alpha, grid.rho, KN);

  std::vector<double> samples(KN + 1);
  for (int n = 0; n <= KN; ++n) samples[n] = factor(grid.time(n));

  TruncationProfile profile{al, grid, {}, {}, {}, 0.0};
  profile.residual.resize(KN);
  profile.bound.resize(KN);
  profile.fitted_constant.assign(grid.K, 0.0);

  for (int n = 1; n <= KN; ++n) {
    const double discrete =
        l1_apply(w, std::span<const double>(samples.data(), n + 1));
    const double r = std::abs(caputo_factor(grid.time(n)) - discrete);
    const int i = (n - 1) / N + 1;
    double envelope = 0.0;
    for (int l = 1; l <= i; ++l) {
      const double m = static_cast<double>(n - (l - 1) * N);
      const double expo = al <= 0.5 ? (l - 2) * al - 1.0 : l * al - 2.0;
      envelope += std::pow(grid.rho, (l - 1) * al) * std::pow(m, expo);
    }
    profile.residual[n - 1] = r;
    profile.bound[n - 1] = envelope;
    profile.fitted_constant[i - 1] =
        std::max(profile.fitted_constant[i - 1], r / envelope);
  }

  // decay order over the first interval, excluding the startup indices
  if (N >= 12) {
    std::vector<double> lx, ly;
    for (int n = 10; n <= N; ++n) {
      if (profile.residual[n - 1] <= 0.0) continue;
      lx.push_back(std::log(static_cast<double>(n)));
      ly.push_back(std::log(profile.residual[n - 1]));
    }
    if (lx.size() >= 2) profile.slope_first_interval = least_squares_slope(lx, ly);
  }
  return profile;
}

TruncationProfile truncation_error_profile(const ManufacturedCase& the_case,
                                           const TimeGrid& grid) {
  if (grid.K != the_case.problem.K)
    throw std::invalid_argument(
        "truncation_error_profile: grid must span the case's delay horizon");
  return truncation_profile_for_factor(FractionalOrder(the_case.alpha), grid,
                                       the_case.time_factor,
                                       the_case.caputo_time_factor);
}

std::string to_csv(const ConvergenceTable& table) {
  std::string out = table.resolution_label;
  char buf[64];
  for (int i : table.intervals) {
    std::snprintf(buf, sizeof buf, ",E%d,rate%d", i, i);
    out += buf;
  }
  out += '\n';
  for (const auto& row : table.rows) {
    std::snprintf(buf, sizeof buf, "%d", row.resolution);
    out += buf;
    for (std::size_t c = 0; c < row.E.size(); ++c) {
      std::snprintf(buf, sizeof buf, ",%.4e,", row.E[c]);
      out += buf;
      if (!std::isnan(row.rate[c])) {
        std::snprintf(buf, sizeof buf, "%.3f", row.rate[c]);
        out += buf;
      }
    }
    out += '\n';
  }
  return out;
}

nlohmann::json to_json(const ConvergenceTable& table) {
  nlohmann::json rows = nlohmann::json::array();
  for (const auto& row : table.rows) {
    nlohmann::json jrow;
    jrow["resolution"] = row.resolution;
    jrow["E"] = row.E;
    nlohmann::json rates = nlohmann::json::array();
    for (double r : row.rate)
      rates.push_back(std::isnan(r) ? nlohmann::json(nullptr)
                                    : nlohmann::json(r));
    jrow["rate"] = rates;
    rows.push_back(std::move(jrow));
  }
  return nlohmann::json{{"kind", table.kind},
                        {"alpha", table.alpha},
                        {"resolution_label", table.resolution_label},
                        {"fixed", {{table.fixed_label, table.fixed_value}}},
                        {"intervals", table.intervals},
                        {"rows", std::move(rows)}};
}

}  // namespace subdelay
