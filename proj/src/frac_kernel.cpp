#include "subdelay/frac_kernel.hpp"

#include <cmath>
#include <limits>
#include <map>
#include <mutex>
#include <numbers>
#include <stdexcept>
#include <string>
#include <utility>

namespace subdelay {

namespace {

// Lanczos approximation, g = 7, 9 coefficients.
constexpr double kLanczosG = 7.0;
constexpr double kLanczosCoeff[9] = {
    0.99999999999980993,
    676.5203681218851,
    -1259.1392167224028,
    771.32342877765313,
    -176.61502916214059,
    12.507343278686905,
    -0.13857109526572012,
    9.9843695780195716e-6,
    1.5056327351493116e-7,
};

// Valid for x >= 0.5.
double lanczos_gamma(double x) {
  double series = kLanczosCoeff[0];
  for (int i = 1; i < 9; ++i) series += kLanczosCoeff[i] / (x - 1.0 + i);
  const double t = x + kLanczosG - 0.5;
  return std::sqrt(2.0 * std::numbers::pi) * std::pow(t, x - 0.5) *
         std::exp(-t) * series;
}

}  // namespace

double gamma_eval(double x) {
  if (!(x > 0.0))
    throw std::domain_error("gamma_eval: argument must be positive, got " +
                            std::to_string(x));
  if (x < 0.5) {
    // Gamma(x) Gamma(1-x) = pi / sin(pi x)
    return std::numbers::pi /
           (std::sin(std::numbers::pi * x) * lanczos_gamma(1.0 - x));
  }
  return lanczos_gamma(x);
}

double omega(double beta, double t) {
  if (!(beta > 0.0))
    throw std::domain_error("omega: beta must be positive");
  if (t < 0.0) throw std::domain_error("omega: t must be nonnegative");
  if (t == 0.0 && beta < 1.0)
    throw std::domain_error("omega: singular at t = 0 for beta < 1");
  return std::pow(t, beta - 1.0) / gamma_eval(beta);
}

FractionalOrder::FractionalOrder(double alpha) : alpha_(alpha) {
  if (!(alpha > 0.0) || !(alpha < 1.0))
    throw std::domain_error("FractionalOrder: alpha must lie strictly in (0,1), got " +
                            std::to_string(alpha));
}

TimeGrid::TimeGrid(double tau_, int steps_per_delay, int delay_intervals)
    : tau(tau_), N(steps_per_delay), K(delay_intervals), rho(tau_ / steps_per_delay) {
  if (!(tau > 0.0)) throw std::invalid_argument("TimeGrid: tau must be positive");
  if (N < 1) throw std::invalid_argument("TimeGrid: need at least one step per delay");
  if (K < 1) throw std::invalid_argument("TimeGrid: need at least one delay interval");
}

L1Weights l1_weights(FractionalOrder alpha, double rho, std::size_t count) {
  if (!(rho > 0.0)) throw std::invalid_argument("l1_weights: rho must be positive");
  if (count < 1) throw std::invalid_argument("l1_weights: need at least one weight");
  const double a = alpha.value();
  const double scale = 1.0 / (gamma_eval(2.0 - a) * std::pow(rho, a));
  L1Weights w{a, rho, std::vector<double>(count)};
  for (std::size_t k = 0; k < count; ++k) {
    const double kk = static_cast<double>(k);
    w.a[k] = (std::pow(kk + 1.0, 1.0 - a) - std::pow(kk, 1.0 - a)) * scale;
  }
  return w;
}

double l1_apply(const L1Weights& w, std::span<const double> samples) {
  if (samples.size() < 2)
    throw std::invalid_argument("l1_apply: need samples u^0..u^n with n >= 1");
  const std::size_t n = samples.size() - 1;
  if (w.a.size() < n)
    throw std::invalid_argument("l1_apply: weight sequence shorter than sample count");
  double acc = 0.0;
  for (std::size_t k = 0; k < n; ++k)
    acc += w.a[k] * (samples[n - k] - samples[n - k - 1]);
  return acc;
}

namespace {

// P depends on (alpha, rho) only; runs share one table per pair and extend it
// as longer prefixes are requested.
std::mutex p_cache_mutex;
std::map<std::pair<double, double>, std::vector<double>>& p_cache() {
  static std::map<std::pair<double, double>, std::vector<double>> cache;
  return cache;
}

void extend_p_table(std::vector<double>& P, const L1Weights& w, std::size_t length) {
  const auto& a = w.a;
  if (P.empty()) P.push_back(1.0 / a[0]);
  for (std::size_t l = P.size(); l < length; ++l) {
    double acc = 0.0;
    for (std::size_t i = 1; i <= l; ++i) acc += (a[i - 1] - a[i]) * P[l - i];
    P.push_back(acc / a[0]);
  }
}

}  // namespace

ComplementaryKernel complementary_kernel(const L1Weights& w, std::size_t length) {
  if (length < 1)
    throw std::invalid_argument("complementary_kernel: length must be positive");
  if (w.a.size() < length)
    throw std::invalid_argument(
        "complementary_kernel: weight sequence shorter than requested length");
  std::scoped_lock lock(p_cache_mutex);
  auto& table = p_cache()[{w.alpha, w.rho}];
  if (table.size() < length) extend_p_table(table, w, length);
  return ComplementaryKernel{
      w.alpha, w.rho, std::vector<double>(table.begin(), table.begin() + length)};
}

double DelayMatrix::entry(int row, int col) const {
  if (row < 0 || col < 0 || row >= n || col >= n)
    throw std::out_of_range("DelayMatrix::entry: index outside the matrix");
  const int lag = col - row - N;
  return lag >= 0 ? band[static_cast<std::size_t>(lag)] : 0.0;
}

std::vector<double> DelayMatrix::dense() const {
  std::vector<double> out(static_cast<std::size_t>(n) * n, 0.0);
  for (int r = 0; r < n; ++r)
    for (int c = r + N; c < n; ++c)
      out[static_cast<std::size_t>(r) * n + c] = band[static_cast<std::size_t>(c - r - N)];
  return out;
}

DelayMatrix build_delay_matrix(const ComplementaryKernel& kernel, int n, int N) {
  if (n < 1 || N < 1)
    throw std::invalid_argument("build_delay_matrix: n and N must be positive");
  DelayMatrix J;
  J.n = n;
  J.N = N;
  if (n > N) {
    const std::size_t width = static_cast<std::size_t>(n - N);
    if (kernel.P.size() < width)
      throw std::invalid_argument("build_delay_matrix: kernel shorter than n - N");
    J.band.assign(kernel.P.begin(), kernel.P.begin() + width);
  }
  return J;
}

KappaBound kappa(double beta, int n) {
  if (beta < 0.0) throw std::domain_error("kappa: beta must be nonnegative");
  if (n < 1) throw std::invalid_argument("kappa: n must be positive");
  double value;
  if (beta == 1.0) {
    value = 1.0 + std::log(static_cast<double>(n));
  } else {
    // (1 - n^{1-beta})/(beta - 1) via expm1 to stay accurate near beta = 1
    const double lg = std::log(static_cast<double>(n));
    value = 1.0 + std::expm1((1.0 - beta) * lg) / (1.0 - beta);
  }
  return KappaBound{beta, n, value};
}

}  // namespace subdelay
