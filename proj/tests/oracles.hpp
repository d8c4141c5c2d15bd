#pragma once

// Independent reference computations for the test suite.  Each function here
// recomputes a quantity the library also produces, by a deliberately different
// route: alternating-series acceleration for zeta values, harmonic-sum
// extrapolation for the Euler constant, Monte Carlo for simplex integrals,
// dense window matrices for banded products, and exact rational expansion or
// interpolation for the combinatorial coefficient families.  Expected values
// in the tests are frozen against these, not against the code under test.

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstdint>
#include <functional>
#include <map>
#include <numbers>
#include <random>
#include <stdexcept>
#include <vector>

#include <Eigen/Dense>

#include "ncg/band_operator.hpp"
#include "ncg/dense_operator.hpp"
#include "ncg/rational.hpp"

namespace oracle {

using cplx = std::complex<double>;

// Riemann zeta from the eta series with Chebyshev-weight acceleration
// (Cohen, Rodriguez Villegas, Zagier).  Valid for complex s away from s = 1;
// with n = 48 the series error is far below double precision.
inline cplx zeta_alternating(cplx s) {
  const int n = 48;
  double d = std::pow(3.0 + std::sqrt(8.0), n);
  d = 0.5 * (d + 1.0 / d);
  double b = -1.0;
  double c = -d;
  cplx eta{0.0};
  for (int k = 0; k < n; ++k) {
    c = b - c;
    eta += c * std::exp(-s * std::log(double(k + 1)));
    b *= double(k + n) * double(k - n) / ((k + 0.5) * (k + 1.0));
  }
  eta /= d;
  return eta / (1.0 - std::exp((1.0 - s) * std::log(2.0)));
}

inline double zeta_alternating(double s) { return zeta_alternating(cplx{s}).real(); }

// Euler's constant from H_N - log(N + 1/2), which is gamma + a2/N^2 + a3/N^3
// + a4/N^4 + ..., extrapolated through those three orders.
inline double euler_constant() {
  auto f = [](int N) {
    double h = 0.0;
    for (int k = 1; k <= N; ++k) h += 1.0 / double(k);
    return h - std::log(double(N) + 0.5);
  };
  double f1 = f(2048), f2 = f(4096), f3 = f(8192), f4 = f(16384);
  double g1 = (4.0 * f2 - f1) / 3.0;
  double g2 = (4.0 * f3 - f2) / 3.0;
  double g3 = (4.0 * f4 - f3) / 3.0;
  double h1 = (8.0 * g2 - g1) / 7.0;
  double h2 = (8.0 * g3 - g2) / 7.0;
  return (16.0 * h2 - h1) / 15.0;
}

// Residue at s = s0 of a numerically given meromorphic function, by the
// trapezoid rule on a circle of radius r around the pole.  Exponentially
// accurate when f is analytic on the closed disk apart from the simple pole.
inline cplx contour_residue(const std::function<cplx(cplx)>& f, cplx s0, double r,
                            int points = 128) {
  cplx acc{0.0};
  for (int t = 0; t < points; ++t) {
    double th = 2.0 * std::numbers::pi * t / points;
    cplx w = std::polar(r, th);
    acc += f(s0 + w) * w;
  }
  return acc / double(points);
}

// -- Monte Carlo simplex quadrature -----------------------------------------

// (t_0, ..., t_m) uniform on the standard simplex via sorted uniforms.
inline std::vector<double> simplex_sample(std::mt19937& rng, int m) {
  std::uniform_real_distribution<double> u(0.0, 1.0);
  std::vector<double> cuts(static_cast<size_t>(m));
  for (auto& x : cuts) x = u(rng);
  std::sort(cuts.begin(), cuts.end());
  std::vector<double> t(size_t(m) + 1);
  double prev = 0.0;
  for (int i = 0; i < m; ++i) {
    t[size_t(i)] = cuts[size_t(i)] - prev;
    prev = cuts[size_t(i)];
  }
  t[size_t(m)] = 1.0 - prev;
  return t;
}

struct McEstimate {
  cplx mean;       // estimate of the simplex integral
  double sigma_re;  // standard error of the real part
  double sigma_im;  // standard error of the imaginary part
};

// Monte Carlo estimate of int_simplex Tr(F_0 e^{-t_0 T D^2} ... F_m e^{-t_m T D^2}).
// D is diagonalized once; each sample applies diagonal heat slices in the
// eigenbasis.  Deterministic for a fixed seed.
inline McEstimate mc_simplex_heat_trace(const std::vector<ncg::DenseOperator>& factors,
                                        const ncg::DenseOperator& D, double T,
                                        int samples, std::uint32_t seed) {
  int m = int(factors.size()) - 1;
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(D.m);
  if (es.info() != Eigen::Success) throw std::runtime_error("eigensolver failed");
  Eigen::MatrixXcd V = es.eigenvectors();
  Eigen::VectorXd nu = es.eigenvalues().array().square() * T;

  std::vector<Eigen::MatrixXcd> G;
  G.reserve(factors.size());
  for (const auto& f : factors) G.push_back(V.adjoint() * f.m * V);

  std::mt19937 rng(seed);
  double vol = 1.0;
  for (int i = 2; i <= m; ++i) vol /= double(i);  // 1/m!

  double sum_re = 0.0, sum_im = 0.0, sq_re = 0.0, sq_im = 0.0;
  for (int s = 0; s < samples; ++s) {
    auto t = simplex_sample(rng, m);
    Eigen::MatrixXcd w = G[0];
    for (int i = 0; i <= m; ++i) {
      Eigen::VectorXcd h = (-t[size_t(i)] * nu.array()).exp();
      if (i < m)
        w = w * h.asDiagonal() * G[size_t(i) + 1];
      else
        w = w * h.asDiagonal();
    }
    cplx v = w.trace();
    sum_re += v.real();
    sum_im += v.imag();
    sq_re += v.real() * v.real();
    sq_im += v.imag() * v.imag();
  }
  double n = double(samples);
  McEstimate out;
  out.mean = vol * cplx{sum_re / n, sum_im / n};
  double var_re = std::max(0.0, sq_re / n - (sum_re / n) * (sum_re / n));
  double var_im = std::max(0.0, sq_im / n - (sum_im / n) * (sum_im / n));
  out.sigma_re = vol * std::sqrt(var_re / n);
  out.sigma_im = vol * std::sqrt(var_im / n);
  return out;
}

// -- dense window references for banded arithmetic ---------------------------

// Center (2W+1)-square of a larger window matrix.
inline Eigen::MatrixXcd center_block(const Eigen::MatrixXcd& big, std::int64_t Wb,
                                     std::int64_t W) {
  return big.block(Wb - W, Wb - W, 2 * W + 1, 2 * W + 1);
}

// Window view of a product computed densely with enough margin that every
// interior entry is exact.
inline Eigen::MatrixXcd product_window(const ncg::BandOperator& a,
                                       const ncg::BandOperator& b, std::int64_t W) {
  std::int64_t K = a.max_abs_offset() + b.max_abs_offset();
  Eigen::MatrixXcd big = a.window_matrix(W + K) * b.window_matrix(W + K);
  return center_block(big, W + K, W);
}

// -- exact combinatorial references ------------------------------------------

namespace detail {

// Multiply poly by s_j^{mj} / mj! where s_j = t_0 + ... + t_{j-1}, expanding
// over monomials in t_0..t_{k-1} with exact coefficients 1/prod(c_i!).
inline void convolve_power(std::map<std::vector<int>, ncg::Rational>& poly, int j,
                           int mj) {
  if (mj == 0) return;
  std::map<std::vector<int>, ncg::Rational> expansion;
  std::vector<int> c(size_t(j), 0);
  std::function<void(int, int)> rec = [&](int slot, int left) {
    if (slot == j - 1) {
      c[size_t(slot)] = left;
      ncg::Rational coeff{1};
      std::vector<int> key;
      for (int ci : c) {
        coeff = coeff / ncg::rational_factorial(ci);
        key.push_back(ci);
      }
      auto it = expansion.find(key);
      if (it == expansion.end())
        expansion.emplace(std::move(key), coeff);
      else
        it->second += coeff;
      return;
    }
    for (int x = 0; x <= left; ++x) {
      c[size_t(slot)] = x;
      rec(slot + 1, left - x);
    }
  };
  rec(0, mj);

  std::map<std::vector<int>, ncg::Rational> next;
  for (const auto& [pe, pc] : poly)
    for (const auto& [ee, ec] : expansion) {
      std::vector<int> key = pe;
      for (size_t i = 0; i < ee.size(); ++i) key[i] += ee[i];
      auto it = next.find(key);
      if (it == next.end())
        next.emplace(std::move(key), pc * ec);
      else
        it->second += pc * ec;
    }
  poly = std::move(next);
}

}  // namespace detail

// (-1)^{|m|} int_simplex t_0^{m_1} (t_0+t_1)^{m_2} ... (t_0+...+t_{k-1})^{m_k}
//           / (m_1! ... m_k!) dt_1 ... dt_k,
// exactly: expand the integrand into monomials in t_0..t_{k-1} and integrate
// each with the Dirichlet formula  int prod t_i^{a_i} = prod a_i! / (|a|+k)!.
inline ncg::Rational residue_coefficient_reference(const std::vector<int>& m) {
  int k = int(m.size());
  std::map<std::vector<int>, ncg::Rational> poly;
  poly[std::vector<int>(size_t(std::max(k, 1)), 0)] = ncg::Rational{1};
  for (int j = 1; j <= k; ++j) detail::convolve_power(poly, j, m[size_t(j - 1)]);

  ncg::Rational acc{0};
  for (const auto& [expo, coeff] : poly) {
    ncg::Rational term = coeff;
    std::int64_t total = 0;
    for (int a : expo) {
      term = term * ncg::rational_factorial(a);
      total += a;
    }
    acc += term / ncg::rational_factorial(int(total) + k);
  }
  std::int64_t mt = 0;
  for (int x : m) mt += x;
  return (mt % 2 == 1) ? ncg::Rational{-1} * acc : acc;
}

// Coefficients of the degree-d polynomial through the exact rational samples
// p(0), p(1), ..., p(d), by Gaussian elimination on the Vandermonde system.
inline std::vector<ncg::Rational> interpolate_coefficients(
    const std::vector<ncg::Rational>& samples) {
  int n = int(samples.size());
  std::vector<std::vector<ncg::Rational>> a(static_cast<size_t>(n));
  std::vector<ncg::Rational> rhs = samples;
  for (int i = 0; i < n; ++i) {
    a[size_t(i)].resize(size_t(n));
    ncg::Rational p{1};
    for (int j = 0; j < n; ++j) {
      a[size_t(i)][size_t(j)] = p;
      p = p * ncg::Rational{i};
    }
  }
  for (int col = 0; col < n; ++col) {
    int piv = col;
    while (piv < n && a[size_t(piv)][size_t(col)].is_zero()) ++piv;
    if (piv == n) throw std::logic_error("singular interpolation system");
    std::swap(a[size_t(col)], a[size_t(piv)]);
    std::swap(rhs[size_t(col)], rhs[size_t(piv)]);
    for (int r = 0; r < n; ++r) {
      if (r == col || a[size_t(r)][size_t(col)].is_zero()) continue;
      ncg::Rational f = a[size_t(r)][size_t(col)] / a[size_t(col)][size_t(col)];
      for (int j = col; j < n; ++j)
        a[size_t(r)][size_t(j)] = a[size_t(r)][size_t(j)] - f * a[size_t(col)][size_t(j)];
      rhs[size_t(r)] = rhs[size_t(r)] - f * rhs[size_t(col)];
    }
  }
  std::vector<ncg::Rational> out(static_cast<size_t>(n));
  for (int i = 0; i < n; ++i) out[size_t(i)] = rhs[size_t(i)] / a[size_t(i)][size_t(i)];
  return out;
}

// Ascending coefficients of prod_{j=1}^{q} (s + j - 1/2), recovered by exact
// evaluation at s = 0..q and interpolation.
inline std::vector<ncg::Rational> half_shift_weights_reference(int q) {
  std::vector<ncg::Rational> samples;
  for (int s = 0; s <= q; ++s) {
    ncg::Rational v{1};
    for (int j = 1; j <= q; ++j)
      v = v * (ncg::Rational{s} + ncg::Rational{2 * j - 1, 2});
    samples.push_back(v);
  }
  return interpolate_coefficients(samples);
}

// Ascending coefficients of prod_{j=1}^{q-1} (s + j), same route.
inline std::vector<ncg::Rational> integer_shift_weights_reference(int q) {
  std::vector<ncg::Rational> samples;
  for (int s = 0; s <= q - 1; ++s) {
    ncg::Rational v{1};
    for (int j = 1; j <= q - 1; ++j) v = v * (ncg::Rational{s} + ncg::Rational{j});
    samples.push_back(v);
  }
  return interpolate_coefficients(samples);
}

}  // namespace oracle
