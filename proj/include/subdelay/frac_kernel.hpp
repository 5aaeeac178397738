#pragma once

#include <cstddef>
#include <span>
#include <vector>

namespace subdelay {

/// Gamma function on the positive real axis (Lanczos approximation with
/// reflection below 1/2). Throws std::domain_error for x <= 0.
double gamma_eval(double x);

/// Power kernel omega_beta(t) = t^{beta-1} / Gamma(beta). Requires beta > 0,
/// t >= 0, and t > 0 whenever beta < 1 (the kernel is singular at the origin).
double omega(double beta, double t);

/// Order of the fractional time derivative, restricted to the open
/// interval (0,1). The classical limits 0 and 1 are rejected.
class FractionalOrder {
public:
  explicit FractionalOrder(double alpha);
  double value() const noexcept { return alpha_; }

private:
  double alpha_;
};

/// Uniform time mesh t_n = n*rho for n = -N..K*N, with rho = tau/N. The
/// negative indices cover one delay length of history.
struct TimeGrid {
  TimeGrid(double tau, int steps_per_delay, int delay_intervals);

  double tau;
  int N;
  int K;
  double rho;

  int total_steps() const noexcept { return K * N; }
  double time(int n) const noexcept { return n * rho; }
};

/// Convolution weights of the piecewise-linear (L1) discretization of the
/// Caputo derivative:
///   a_k = ((k+1)^{1-alpha} - k^{1-alpha}) / (Gamma(2-alpha) rho^alpha).
/// The sequence is positive and strictly decreasing.
struct L1Weights {
  double alpha;
  double rho;
  std::vector<double> a;

  std::size_t count() const noexcept { return a.size(); }
};

L1Weights l1_weights(FractionalOrder alpha, double rho, std::size_t count);

/// Discrete Caputo derivative at the last sample:
///   sum_{k=0}^{n-1} a_k (u^{n-k} - u^{n-k-1})
/// where samples = u^0..u^n. Requires n >= 1 and at least n weights.
double l1_apply(const L1Weights& w, std::span<const double> samples);

/// Coefficients P_0..P_{L-1} complementary to the L1 weights:
///   P_0 = 1/a_0,
///   P_l = (1/a_0) sum_{i=1}^{l} (a_{i-1} - a_i) P_{l-i},
/// so that sum_{m=0}^{l} P_{l-m} a_m = 1 for every l. They satisfy
///   P_l < Gamma(2-alpha) rho^alpha (l+1)^{alpha-1}   (equality at l = 0)
///   sum_{l<n} P_l <= (n rho)^alpha / Gamma(1+alpha).
struct ComplementaryKernel {
  double alpha;
  double rho;
  std::vector<double> P;
};

ComplementaryKernel complementary_kernel(const L1Weights& w, std::size_t length);

/// Upper-triangular n x n matrix propagating values across one delay window:
/// entry (r,c) equals P_{c-r-N} when c - r >= N and 0 otherwise (0-based).
/// Only the leading P-band is stored; J^q vanishes identically for q >= i
/// whenever (i-1)N < n <= iN.
struct DelayMatrix {
  int n = 0;
  int N = 0;
  std::vector<double> band;  // P_0..P_{n-N-1}; empty when n <= N

  double entry(int row, int col) const;
  std::vector<double> dense() const;  // row-major n*n materialization
};

DelayMatrix build_delay_matrix(const ComplementaryKernel& kernel, int n, int N);

/// Closed-form majorant of the partial sums of j^{-beta}:
///   K_{beta,n} = 1 + (1 - n^{1-beta})/(beta - 1)  (beta != 1)
///   K_{1,n}    = 1 + ln n,
/// strictly decreasing in beta for fixed n > 1.
struct KappaBound {
  double beta;
  int n;
  double value;
};

KappaBound kappa(double beta, int n);

// Decay exponents paired with kappa in the kernel-sum estimates: the
// truncation sums decay like j^{-(1+alpha)} (orders up to 1/2), (j-N)^{-1}
// (delayed contributions) and j^{-(2-alpha)} (orders above 1/2).
inline double kappa_exponent_low_order(double alpha) { return 1.0 + alpha; }
inline constexpr double kappa_exponent_delay = 1.0;
inline double kappa_exponent_high_order(double alpha) { return 2.0 - alpha; }

}  // namespace subdelay
