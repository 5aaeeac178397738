// Acceptance suite: reproduces the benchmark tables and the discrete-kernel
// guarantees end to end. Prints one PASS/FAIL line per criterion and exits
// nonzero if any criterion fails.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <random>
#include <string>
#include <vector>

#include "subdelay/delay_solver.hpp"
#include "subdelay/fem1d.hpp"
#include "subdelay/frac_kernel.hpp"
#include "subdelay/studies.hpp"

using namespace subdelay;

namespace {

int failures = 0;

void report(int index, const std::string& name, bool pass,
            const std::string& detail) {
  std::printf("[%s] criterion %d: %s — %s\n", pass ? "PASS" : "FAIL", index,
              name.c_str(), detail.c_str());
  std::fflush(stdout);
  if (!pass) ++failures;
}

bool within_rel(double value, double target, double rel) {
  return std::abs(value - target) <= rel * std::abs(target);
}

bool within_abs(double value, double target, double tol) {
  return std::abs(value - target) <= tol;
}

char buffer[512];

// ---------------------------------------------------------------------------

void criterion_1_table2() {
  const std::vector<int> Ns{100, 200, 400, 800, 1600};
  const auto table = temporal_study(FractionalOrder(0.5), 1.0 / 1000.0, Ns);
  const double e100 = table.rows[0].E[0];
  const auto& last = table.rows.back();
  const double expected_rates[3] = {0.499, 0.988, 0.984};
  bool pass = within_rel(e100, 1.6967e-2, 0.05);
  for (int i = 0; i < 3; ++i)
    pass = pass && within_abs(last.rate[i], expected_rates[i], 0.05);
  std::snprintf(buffer, sizeof buffer,
                "E(N=100,i=1) = %.4e (target 1.6967e-02 +-5%%), rates at "
                "N=1600 = (%.3f, %.3f, %.3f) vs (0.499, 0.988, 0.984) +-0.05",
                e100, last.rate[0], last.rate[1], last.rate[2]);
  report(1, "temporal accuracy, alpha = 0.5", pass, buffer);
}

void criterion_2_table1() {
  const std::vector<int> Ns{100, 200, 400, 800, 1600};
  const auto table = temporal_study(FractionalOrder(0.4), 1.0 / 1000.0, Ns);
  const double e100 = table.rows[0].E[0];
  const double expected_rates[4] = {0.395, 0.396, 0.397, 0.398};
  bool pass = within_rel(e100, 2.5794e-2, 0.05);
  std::string rates;
  for (std::size_t r = 1; r < table.rows.size(); ++r) {
    const double rate = table.rows[r].rate[0];
    pass = pass && within_abs(rate, expected_rates[r - 1], 0.05);
    std::snprintf(buffer, sizeof buffer, "%s%.3f", r > 1 ? ", " : "", rate);
    rates += buffer;
  }
  std::snprintf(buffer, sizeof buffer,
                "E(N=100,i=1) = %.4e (target 2.5794e-02 +-5%%), first-interval "
                "rates = (%s) vs (0.395..0.398) +-0.05",
                e100, rates.c_str());
  report(2, "temporal accuracy, alpha = 0.4", pass, buffer);
}

void criterion_3_table5() {
  const std::vector<int> Ns{100, 200, 400, 800, 1600};
  const auto table = delay_node_study(FractionalOrder(0.5), 1.0 / 1000.0, Ns);
  const double e100 = table.rows[0].E[0];
  bool pass = within_rel(e100, 1.6837e-3, 0.05);
  for (std::size_t r = 1; r < table.rows.size(); ++r)
    pass = pass && within_abs(table.rows[r].rate[0], 1.0, 0.05);
  const auto& last = table.rows.back();
  pass = pass && within_abs(last.rate[1], 1.0, 0.05) &&
         within_abs(last.rate[2], 1.0, 0.05);
  std::snprintf(buffer, sizeof buffer,
                "||u - U|| at (N=100, t=1) = %.4e (target 1.6837e-03 +-5%%), "
                "final rates = (%.3f, %.3f, %.3f) vs 1.0 +-0.05",
                e100, last.rate[0], last.rate[1], last.rate[2]);
  report(3, "delay-node accuracy, alpha = 0.5", pass, buffer);
}

void criterion_4_table6() {
  const std::vector<int> Ms_full{8, 16};
  const auto full = spatial_study(FractionalOrder(0.5), 30000, Ms_full);
  const double e8 = full.rows[0].E[0];
  const double rate16 = full.rows[1].rate[0];
  bool pass = within_rel(e8, 4.6009e-3, 0.05) && within_abs(rate16, 1.997, 0.05);

  const std::vector<int> Ms_desk{8, 16, 32};
  const auto desk = spatial_study(FractionalOrder(0.5), 10000, Ms_desk);
  for (std::size_t r = 1; r < desk.rows.size(); ++r) {
    const double rate = desk.rows[r].rate[0];
    pass = pass && rate >= 1.90 && rate <= 2.05;
  }
  std::snprintf(buffer, sizeof buffer,
                "N=30000: E(M=8) = %.4e (target 4.6009e-03 +-5%%), rate(M=16) "
                "= %.3f (target 1.997 +-0.05); N=10000 rates = (%.3f, %.3f) "
                "in [1.90, 2.05]",
                e8, rate16, desk.rows[1].rate[0], desk.rows[2].rate[0]);
  report(4, "spatial accuracy, alpha = 0.5", pass, buffer);
}

void criterion_5_kernel_identities() {
  const int length = 2000;
  double worst_residual = 0.0;
  int violations = 0;
  for (double alpha : {0.3, 0.5, 0.7}) {
    const double rho = 1.0 / length;
    const auto w = l1_weights(FractionalOrder(alpha), rho, length + 1);
    const auto kernel = complementary_kernel(w, length);
    const double g2a = gamma_eval(2.0 - alpha);
    const double rho_a = std::pow(rho, alpha);
    const double inv_g1a = 1.0 / gamma_eval(1.0 + alpha);
    double prefix = 0.0;
    for (int l = 0; l < length; ++l) {
      double s = 0.0;
      for (int m = 0; m <= l; ++m) s += kernel.P[l - m] * w.a[m];
      worst_residual = std::max(worst_residual, std::abs(s - 1.0));
      const double decay = g2a * rho_a * std::pow(l + 1.0, alpha - 1.0);
      // P_0 equals the envelope; the strict inequality starts at l = 1
      if (l == 0 ? kernel.P[l] > decay * (1.0 + 4e-16) : kernel.P[l] >= decay)
        ++violations;
      prefix += kernel.P[l];
      if (prefix > std::pow((l + 1) * rho, alpha) * inv_g1a) ++violations;
    }
  }
  const bool pass = worst_residual <= 1e-10 && violations == 0;
  std::snprintf(buffer, sizeof buffer,
                "max identity residual %.3e (limit 1e-10), bound violations %d",
                worst_residual, violations);
  report(5, "complementary-kernel identities, n <= 2000", pass, buffer);
}

void criterion_6_l1_exactness() {
  std::mt19937 rng(2024);
  std::uniform_real_distribution<double> alpha_draw(0.05, 0.95);
  std::uniform_real_distribution<double> c_draw(-1.0, 1.0);
  std::uniform_real_distribution<double> d_mag(0.5, 2.0);
  std::uniform_int_distribution<int> n_draw(2, 500);
  std::uniform_int_distribution<int> coin(0, 1);
  double worst = 0.0;
  for (int trial = 0; trial < 20; ++trial) {
    const double alpha = alpha_draw(rng);
    const double c = c_draw(rng);
    const double d = (coin(rng) ? 1.0 : -1.0) * d_mag(rng);
    const int n = n_draw(rng);
    const double rho = 1.0 / n;
    const auto w = l1_weights(FractionalOrder(alpha), rho, n);
    std::vector<double> samples(n + 1);
    for (int j = 0; j <= n; ++j) samples[j] = c + d * (j * rho);
    const double got = l1_apply(w, samples);
    const double want =
        d * std::pow(n * rho, 1.0 - alpha) / gamma_eval(2.0 - alpha);
    worst = std::max(worst, std::abs(got - want) / std::abs(want));
  }
  const bool pass = worst <= 1e-12;
  std::snprintf(buffer, sizeof buffer,
                "worst relative error %.3e over 20 draws (limit 1e-12)", worst);
  report(6, "discrete derivative exact on linear samples", pass, buffer);
}

void criterion_7_nilpotency() {
  auto dense_multiply = [](const std::vector<double>& A,
                           const std::vector<double>& B, int n) {
    std::vector<double> C(static_cast<std::size_t>(n) * n, 0.0);
    for (int i = 0; i < n; ++i)
      for (int k = 0; k < n; ++k) {
        const double aik = A[static_cast<std::size_t>(i) * n + k];
        if (aik == 0.0) continue;
        for (int j = 0; j < n; ++j)
          C[static_cast<std::size_t>(i) * n + j] +=
              aik * B[static_cast<std::size_t>(k) * n + j];
      }
    return C;
  };
  int checked = 0, exact = 0;
  for (int N = 1; N <= 40; ++N) {
    const int max_len = 5 * N;
    const auto w = l1_weights(FractionalOrder(0.5), 1.0 / N, max_len + 1);
    const auto kernel = complementary_kernel(w, max_len);
    for (int i = 1; i <= 5; ++i) {
      for (int n : {(i - 1) * N + 1, i * N}) {
        const auto J = build_delay_matrix(kernel, n, N);
        const auto dense = J.dense();
        std::vector<double> power = dense;
        for (int q = 1; q < i; ++q) power = dense_multiply(power, dense, n);
        bool zero = true;
        for (double v : power) zero = zero && v == 0.0;
        ++checked;
        if (zero) ++exact;
      }
    }
  }
  const bool pass = exact == checked;
  std::snprintf(buffer, sizeof buffer,
                "%d of %d matrix powers exactly zero (N <= 40, i <= 5)", exact,
                checked);
  report(7, "delay-matrix nilpotency", pass, buffer);
}

void criterion_8_truncation() {
  const auto mc = manufactured_case(FractionalOrder(0.6));
  const auto coarse = truncation_error_profile(mc, TimeGrid(1.0, 100, 3));
  const auto fine = truncation_error_profile(mc, TimeGrid(1.0, 200, 3));
  bool pass = within_abs(coarse.slope_first_interval, -1.4, 0.15);
  double worst_ratio = 1.0;
  for (int i = 0; i < 3; ++i) {
    const double ratio = fine.fitted_constant[i] / coarse.fitted_constant[i];
    worst_ratio = std::max({worst_ratio, ratio, 1.0 / ratio});
  }
  pass = pass && worst_ratio <= 1.5;
  std::snprintf(buffer, sizeof buffer,
                "first-interval slope %.3f (target -1.4 +-0.15), constant "
                "ratio N=100 vs N=200 <= %.3f (limit 1.5)",
                coarse.slope_first_interval, worst_ratio);
  report(8, "truncation-error shape, alpha = 0.6", pass, buffer);
}

void criterion_9_fixed_points() {
  ProblemSpec zero{FractionalOrder(0.5)};
  zero.p = 0.01;
  zero.a = [](double x) { return -x / 100.0; };
  zero.b = -1.0;
  zero.tau = 1.0;
  zero.K = 3;
  zero.L = 1.0;
  zero.phi = [](double, double) { return 0.0; };
  zero.f = [](double, double) { return 0.0; };
  const auto mesh_zero = build_mesh(1.0, 64);
  const TimeGrid grid_zero(1.0, 50, 3);
  const auto traj = run(zero, mesh_zero, grid_zero);
  bool zero_ok = true;
  for (int n = -grid_zero.N; n <= grid_zero.total_steps(); ++n)
    for (double v : traj.frame(n)) zero_ok = zero_ok && v == 0.0;

  const int M = 32;
  ProblemSpec constant = zero;
  constant.phi = [](double x, double) { return std::sin(std::numbers::pi * x); };
  constant.f = [&constant](double x, double) {
    const double s = std::sin(std::numbers::pi * x);
    return (constant.p * std::numbers::pi * std::numbers::pi - constant.a(x)) * s -
           constant.b * s;
  };
  const auto mesh = build_mesh(1.0, M);
  const TimeGrid grid(1.0, 25, 3);
  const auto steady = run(constant, mesh, grid);
  const auto initial = steady.frame(0);
  double drift = 0.0;
  for (int n = 1; n <= grid.total_steps(); ++n) {
    const auto frame = steady.frame(n);
    for (std::size_t j = 0; j < frame.size(); ++j)
      drift = std::max(drift, std::abs(frame[j] - initial[j]));
  }
  const double h = 1.0 / M;
  const bool pass = zero_ok && drift <= 5.0 * h * h;
  std::snprintf(buffer, sizeof buffer,
                "zero data stays exactly zero: %s; constant-in-time drift "
                "%.3e <= 5 h^2 = %.3e",
                zero_ok ? "yes" : "no", drift, 5.0 * h * h);
  report(9, "zero and constant-in-time fixed points", pass, buffer);
}

}  // namespace

int main() {
  const auto start = std::chrono::steady_clock::now();
  criterion_1_table2();
  criterion_2_table1();
  criterion_3_table5();
  criterion_4_table6();
  criterion_5_kernel_identities();
  criterion_6_l1_exactness();
  criterion_7_nilpotency();
  criterion_8_truncation();
  criterion_9_fixed_points();
  const double seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - start)
          .count();
  std::printf("%d of 9 criteria passed in %.1f s\n", 9 - failures, seconds);
  return failures == 0 ? 0 : 1;
}
