#pragma once

// Decay metadata for banded lattice operators.  Two layers:
//
//  * DecayEnvelope — a majorant  c_pow*x^(-alpha) + c_gauss*exp(-rate*(x-shift)^2)
//    for the deviation of a diagonal from its asymptotic limit, valid for
//    x = |n| >= x_min.  Tails of such majorants have closed-form bounds, which
//    is what makes truncated traces certifiable.
//
//  * PowerSeries1 / AsymPair — a three-term asymptotic expansion per lattice
//    direction with an explicit remainder constant.  The zeta continuation
//    consumes these; products and index shifts propagate them conservatively
//    (every dropped term is absorbed into the remainder with a bound valid on
//    the declared domain, never silently discarded).

#include <algorithm>
#include <array>
#include <cmath>
#include <complex>
#include <cstdlib>
#include <limits>
#include <stdexcept>

#include "ncg/certified.hpp"

namespace ncg {

namespace detail {
inline double binom(int n, int k) {
  if (k < 0 || k > n) return 0.0;
  double r = 1.0;
  for (int i = 1; i <= k; ++i) r *= static_cast<double>(n - k + i) / i;
  return r;
}
}  // namespace detail

struct DecayEnvelope {
  double c_pow{0.0};
  double alpha{0.0};
  double c_gauss{0.0};
  double rate{0.0};
  double shift{0.0};
  double x_min{1.0};

  static DecayEnvelope zero() { return {}; }
  static DecayEnvelope power(double c, double a, double xm = 1.0) {
    DecayEnvelope e;
    e.c_pow = c;
    e.alpha = a;
    e.x_min = xm;
    return e;
  }
  static DecayEnvelope gaussian(double c, double rate, double shift = 0.0,
                                double xm = 1.0) {
    DecayEnvelope e;
    e.c_gauss = c;
    e.rate = rate;
    e.shift = shift;
    e.x_min = xm;
    return e;
  }

  bool trivial() const { return c_pow == 0.0 && c_gauss == 0.0; }

  double eval(double x) const {
    double v = 0.0;
    if (c_pow != 0.0) v += c_pow * std::pow(x, -alpha);
    if (c_gauss != 0.0) v += c_gauss * std::exp(-rate * (x - shift) * (x - shift));
    return v;
  }

  // The power part sums iff alpha > 1; the Gaussian part always does.
  bool summable() const { return c_pow == 0.0 || alpha > 1.0; }

  // Bound on sum_{n > W} eval(n) over one lattice direction, W >= x_min.
  double tail_one_side(double W) const {
    double t = 0.0;
    if (c_pow != 0.0) {
      if (alpha <= 1.0) return std::numeric_limits<double>::infinity();
      t += c_pow * std::pow(W, 1.0 - alpha) / (alpha - 1.0);
    }
    if (c_gauss != 0.0) {
      // Integers m >= W+1.  Until the Gaussian peak each term is at most
      // c_gauss; past the peak the terms are dominated by a geometric series.
      double m0 = std::max(W + 1.0, std::floor(shift) + 1.0);
      t += c_gauss * std::max(0.0, m0 - (W + 1.0));
      double y = m0 - shift;  // > 0
      double first = c_gauss * std::exp(-rate * y * y);
      double ratio = std::exp(-rate * (2.0 * y + 1.0));
      t += first / (1.0 - ratio);
    }
    return t;
  }

  double tail_two_sided(double W) const { return 2.0 * tail_one_side(W); }

  DecayEnvelope scaled(double k) const {
    DecayEnvelope e = *this;
    e.c_pow *= k;
    e.c_gauss *= k;
    return e;
  }

  // Majorant for x |-> eval(x - a), a >= 0 (argument moved toward the core).
  DecayEnvelope arg_shifted(double a) const {
    a = std::abs(a);
    if (a == 0.0 || trivial()) return *this;
    DecayEnvelope e = *this;
    if (c_pow != 0.0) {
      // (x-a)^(-alpha) <= 2^alpha x^(-alpha) for x >= 2a.
      e.c_pow = c_pow * std::pow(2.0, alpha);
    }
    e.shift = shift + a;  // exact for the Gaussian part
    e.x_min = std::max({x_min + a, 2.0 * a, 1.0});
    return e;
  }
};

// Majorant for a sum of two quantities with the given majorants.
inline DecayEnvelope merge_sum(const DecayEnvelope& a, const DecayEnvelope& b) {
  if (a.trivial()) return b;
  if (b.trivial()) return a;
  DecayEnvelope e;
  if (a.c_pow != 0.0 && b.c_pow != 0.0) {
    e.alpha = std::min(a.alpha, b.alpha);  // valid for x >= 1
    e.c_pow = a.c_pow + b.c_pow;
  } else if (a.c_pow != 0.0) {
    e.alpha = a.alpha;
    e.c_pow = a.c_pow;
  } else if (b.c_pow != 0.0) {
    e.alpha = b.alpha;
    e.c_pow = b.c_pow;
  }
  double s = 0.0;
  if (a.c_gauss != 0.0 && b.c_gauss != 0.0) {
    e.rate = std::min(a.rate, b.rate);
    s = std::max(a.shift, b.shift);
    e.c_gauss = a.c_gauss + b.c_gauss;
  } else if (a.c_gauss != 0.0) {
    e.rate = a.rate;
    s = a.shift;
    e.c_gauss = a.c_gauss;
  } else if (b.c_gauss != 0.0) {
    e.rate = b.rate;
    s = b.shift;
    e.c_gauss = b.c_gauss;
  }
  e.shift = s;
  e.x_min = std::max({a.x_min, b.x_min, s, 1.0});
  return e;
}

// ---------------------------------------------------------------------------
// Asymptotic expansions.

// f(x) = sum_{j=0..2} coeff[j] * x^-(lead+j) + r(x), |r(x)| <= rem * x^-(lead+3),
// for x >= x_min (x_min kept by the enclosing AsymPair).  lead < 0 means growth.
struct PowerSeries1 {
  int lead{0};
  std::array<cplx, 3> coeff{cplx{0.0}, cplx{0.0}, cplx{0.0}};
  double rem{0.0};

  static PowerSeries1 constant(cplx c) {
    PowerSeries1 s;
    s.coeff[0] = c;
    return s;
  }
  static PowerSeries1 monomial(cplx c, int order) {
    PowerSeries1 s;
    s.lead = order;
    s.coeff[0] = c;
    return s;
  }

  bool is_exact_zero() const {
    return rem == 0.0 && coeff[0] == cplx{0.0} && coeff[1] == cplx{0.0} &&
           coeff[2] == cplx{0.0};
  }

  // |f(x)| <= amp() * x^(-lead) on the validity domain.
  double amp(double xm) const {
    return std::abs(coeff[0]) + std::abs(coeff[1]) / xm +
           std::abs(coeff[2]) / (xm * xm) + rem / (xm * xm * xm);
  }

  cplx eval_main(double x) const {
    return coeff[0] * std::pow(x, -double(lead)) +
           coeff[1] * std::pow(x, -double(lead + 1)) +
           coeff[2] * std::pow(x, -double(lead + 2));
  }
};

namespace detail {

inline PowerSeries1 series_scale(PowerSeries1 s, cplx k) {
  for (auto& c : s.coeff) c *= k;
  s.rem *= std::abs(k);
  return s;
}

inline PowerSeries1 series_mul(const PowerSeries1& a, const PowerSeries1& b,
                               double xm) {
  PowerSeries1 p;
  p.lead = a.lead + b.lead;
  p.coeff[0] = a.coeff[0] * b.coeff[0];
  p.coeff[1] = a.coeff[0] * b.coeff[1] + a.coeff[1] * b.coeff[0];
  p.coeff[2] =
      a.coeff[0] * b.coeff[2] + a.coeff[1] * b.coeff[1] + a.coeff[2] * b.coeff[0];
  double amp_a = a.amp(xm);
  double amp_b0 = std::abs(b.coeff[0]) + std::abs(b.coeff[1]) / xm +
                  std::abs(b.coeff[2]) / (xm * xm);
  // Dropped coefficient products land at relative order >= 3.
  p.rem = std::abs(a.coeff[1]) * std::abs(b.coeff[2]) +
          std::abs(a.coeff[2]) * std::abs(b.coeff[1]) +
          std::abs(a.coeff[2]) * std::abs(b.coeff[2]) / xm +
          a.rem * (amp_b0 + b.rem / (xm * xm * xm)) + b.rem * amp_a;
  return p;
}

// Re-expand f(x + delta) around x; requires x >= max(x_min + |delta|, 2|delta|).
inline PowerSeries1 series_arg_shift(const PowerSeries1& s, double delta,
                                     double xm_new) {
  if (delta == 0.0) return s;
  PowerSeries1 r;
  r.lead = s.lead;
  double rem = 0.0;
  for (int j = 0; j < 3; ++j) {
    cplx cj = s.coeff[j];
    if (cj == cplx{0.0}) continue;
    int L = s.lead + j;
    if (L <= 0) {
      // (x+delta)^|L| is a polynomial; expansion is exact, overflow of the
      // three-slot budget goes to the remainder.
      int m = -L;
      for (int k = 0; k <= m; ++k) {
        double term = binom(m, k) * std::pow(delta, k);
        if (j + k <= 2)
          r.coeff[j + k] += cj * term;
        else
          rem += std::abs(cj) * std::abs(term) * std::pow(xm_new, double(3 - j - k));
      }
    } else {
      // (1 + delta/x)^(-L), |delta/x| <= 1/2 on the new domain.
      for (int k = 0; j + k <= 2; ++k)
        r.coeff[j + k] += cj * binom(L + k - 1, k) * std::pow(-delta, k);
      int K = 3 - j;
      rem += std::abs(cj) * binom(L + K - 1, K) * std::pow(std::abs(delta), K) *
             std::pow(2.0, double(L + K));
    }
  }
  rem += s.rem * std::pow(2.0, std::abs(double(s.lead + 3)));
  r.rem = rem;
  return r;
}

inline PowerSeries1 series_add(const PowerSeries1& a, const PowerSeries1& b,
                               double xm) {
  if (a.is_exact_zero() && a.lead >= b.lead) return b;
  if (b.is_exact_zero() && b.lead >= a.lead) return a;
  PowerSeries1 r;
  r.lead = std::min(a.lead, b.lead);
  double rem = 0.0;
  auto fold = [&](const PowerSeries1& s) {
    for (int j = 0; j < 3; ++j) {
      int o = s.lead + j;
      int rel = o - r.lead;
      if (rel <= 2)
        r.coeff[rel] += s.coeff[j];
      else
        rem += std::abs(s.coeff[j]) * std::pow(xm, double(r.lead + 3 - o));
    }
    rem += s.rem * std::pow(xm, double(r.lead - s.lead));
  };
  fold(a);
  fold(b);
  r.rem = rem;
  return r;
}

inline PowerSeries1 series_conj(PowerSeries1 s) {
  for (auto& c : s.coeff) c = std::conj(c);
  return s;
}

}  // namespace detail

// Expansion pair: pos covers n -> +inf, neg covers n -> -inf, both written in
// powers of x = |n| and valid for x >= x_min.
struct AsymPair {
  PowerSeries1 pos, neg;
  double x_min{1.0};

  static AsymPair constant(cplx c_pos, cplx c_neg, double xm = 1.0) {
    AsymPair a;
    a.pos = PowerSeries1::constant(c_pos);
    a.neg = PowerSeries1::constant(c_neg);
    a.x_min = xm;
    return a;
  }

  cplx limit_pos() const { return pos.lead > 0 ? cplx{0.0} : (pos.lead == 0 ? pos.coeff[0] : cplx{0.0}); }
  cplx limit_neg() const { return neg.lead > 0 ? cplx{0.0} : (neg.lead == 0 ? neg.coeff[0] : cplx{0.0}); }
  bool bounded() const { return pos.lead >= 0 && neg.lead >= 0; }

  AsymPair scaled(cplx k) const {
    AsymPair r = *this;
    r.pos = detail::series_scale(r.pos, k);
    r.neg = detail::series_scale(r.neg, k);
    return r;
  }
};

inline AsymPair asym_mul(const AsymPair& a, const AsymPair& b) {
  AsymPair r;
  r.x_min = std::max(a.x_min, b.x_min);
  r.pos = detail::series_mul(a.pos, b.pos, r.x_min);
  r.neg = detail::series_mul(a.neg, b.neg, r.x_min);
  return r;
}

inline AsymPair asym_add(const AsymPair& a, const AsymPair& b) {
  AsymPair r;
  r.x_min = std::max(a.x_min, b.x_min);
  r.pos = detail::series_add(a.pos, b.pos, r.x_min);
  r.neg = detail::series_add(a.neg, b.neg, r.x_min);
  return r;
}

// The expansion of n |-> f(n + d) given the one for f.  On the positive side
// |n+d| = x + d, on the negative side |n+d| = x - d (both once x is past the
// new validity threshold).
inline AsymPair asym_arg_shift(const AsymPair& a, int d) {
  if (d == 0) return a;
  AsymPair r;
  r.x_min = std::max({a.x_min + std::abs(double(d)), 2.0 * std::abs(double(d)), 1.0});
  r.pos = detail::series_arg_shift(a.pos, double(d), r.x_min);
  r.neg = detail::series_arg_shift(a.neg, -double(d), r.x_min);
  return r;
}

inline AsymPair asym_conj(AsymPair a) {
  a.pos = detail::series_conj(a.pos);
  a.neg = detail::series_conj(a.neg);
  return a;
}

// Deviation-from-limit majorant induced by an expansion (bounded case only).
inline DecayEnvelope asym_deviation_envelope(const AsymPair& a) {
  if (!a.bounded()) throw std::domain_error("deviation envelope of unbounded expansion");
  double xm = std::max(a.x_min, 1.0);
  auto one = [&](const PowerSeries1& s) -> DecayEnvelope {
    // Subtract the limit (the order-0 coefficient when lead == 0).
    std::array<double, 4> mag{0.0, 0.0, 0.0, 0.0};  // by absolute order 0..3
    for (int j = 0; j < 3; ++j) {
      int o = s.lead + j;
      double m = std::abs(s.coeff[j]);
      if (o == 0) continue;  // limit
      mag[std::min(o, 3)] += m * ((o > 3) ? std::pow(xm, double(3 - o)) : 1.0);
    }
    mag[std::min(s.lead + 3, 3)] += s.rem * ((s.lead + 3 > 3) ? std::pow(xm, double(3 - (s.lead + 3))) : 1.0);
    int first = 0;
    while (first < 4 && mag[first] == 0.0) ++first;
    if (first == 4) return DecayEnvelope::zero();
    double c = 0.0;
    for (int o = first; o < 4; ++o) c += mag[o] * std::pow(xm, double(first - o));
    return DecayEnvelope::power(c, double(first), xm);
  };
  return merge_sum(one(a.pos), one(a.neg));
}

}  // namespace ncg
