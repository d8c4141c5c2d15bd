#pragma once

// Gamma-family helpers: polygamma via downward recurrence into the Bernoulli
// asymptotic range, and Taylor coefficients of Gamma at a point through the
// exp-of-log-Gamma composition.  Double precision targets ~1e-12 absolute
// error, which is what the residue weights need.

#include <array>
#include <cmath>
#include <complex>
#include <numbers>
#include <stdexcept>
#include <vector>

#include "ncg/certified.hpp"

namespace ncg {

// B_{2k} for k = 1..12.
inline constexpr std::array<double, 12> kBernoulliEven = {
    1.0 / 6,         -1.0 / 30,        1.0 / 42,       -1.0 / 30,
    5.0 / 66,        -691.0 / 2730,    7.0 / 6,        -3617.0 / 510,
    43867.0 / 798,   -174611.0 / 330,  854513.0 / 138, -236364091.0 / 2730};

inline double factorial(int n) {
  double r = 1.0;
  for (int i = 2; i <= n; ++i) r *= i;
  return r;
}

namespace detail {

inline double polygamma_asym(int m, double x) {
  // Valid for x >= ~12 with the ten-term Bernoulli tail.
  constexpr int K = 10;
  if (m == 0) {
    double s = std::log(x) - 0.5 / x;
    double x2 = x * x;
    double p = 1.0;
    for (int k = 1; k <= K; ++k) {
      p *= x2;
      s -= kBernoulliEven[size_t(k - 1)] / (2.0 * k * p);
    }
    return s;
  }
  double sign = (m % 2 == 1) ? 1.0 : -1.0;  // (-1)^(m-1)
  double s = sign * factorial(m - 1) * std::pow(x, -m);
  s += sign * 0.5 * factorial(m) * std::pow(x, -m - 1);
  for (int k = 1; k <= K; ++k) {
    double rising = 1.0;
    for (int j = 1; j < m; ++j) rising *= (2.0 * k + j);
    s += sign * kBernoulliEven[size_t(k - 1)] * rising * std::pow(x, -2.0 * k - m);
  }
  return s;
}

}  // namespace detail

inline double digamma(double x) {
  if (x <= 0.0) throw std::domain_error("digamma: requires x > 0");
  double corr = 0.0;
  while (x < 12.0) {
    corr += 1.0 / x;
    x += 1.0;
  }
  return detail::polygamma_asym(0, x) - corr;
}

// psi^(m)(x) for m = 0..5, real x > 0.
inline double polygamma(int m, double x) {
  if (m == 0) return digamma(x);
  if (x <= 0.0) throw std::domain_error("polygamma: requires x > 0");
  if (m < 0 || m > 5) throw std::domain_error("polygamma: order out of range");
  double corr = 0.0;
  double sign = (m % 2 == 0) ? -1.0 : 1.0;  // (-1)^(m+1)
  double fm = factorial(m);
  while (x < 12.0) {
    corr += sign * fm * std::pow(x, -m - 1.0);
    x += 1.0;
  }
  return detail::polygamma_asym(m, x) + corr;
}

inline double euler_gamma() { return -digamma(1.0); }

// Gamma^(l)(x) for l = 0..L via Gamma(x+s) = Gamma(x) exp(sum psi-coeffs s^m / ...).
inline std::vector<double> gamma_derivatives(double x, int L) {
  if (L > 4) throw std::domain_error("gamma_derivatives: order out of range");
  std::vector<double> c(size_t(L) + 1, 0.0);  // log-Gamma Taylor coefficients
  if (L >= 1) c[1] = digamma(x);
  for (int m = 2; m <= L; ++m) c[size_t(m)] = polygamma(m - 1, x) / factorial(m);
  std::vector<double> h(size_t(L) + 1, 0.0);
  h[0] = 1.0;
  for (int n = 1; n <= L; ++n) {
    double s = 0.0;
    for (int k = 1; k <= n; ++k) s += k * c[size_t(k)] * h[size_t(n - k)];
    h[size_t(n)] = s / n;
  }
  double g = std::tgamma(x);
  std::vector<double> out(size_t(L) + 1);
  for (int l = 0; l <= L; ++l) out[size_t(l)] = g * h[size_t(l)] * factorial(l);
  return out;
}

// sqrt(2i) and 1/sqrt(2*pi*i) in exact closed form: (1+i)^2 = 2i.
inline cplx sqrt_two_i() { return cplx{1.0, 1.0}; }
inline cplx inv_sqrt_two_pi_i() {
  double r = 0.5 / std::sqrt(std::numbers::pi);
  return cplx{r, -r};
}

}  // namespace ncg
