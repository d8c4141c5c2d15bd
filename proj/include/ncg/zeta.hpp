#pragma once

// Constructive analytic continuation of lattice zeta functions, Laurent
// functionals at the critical point, and the pseudodifferential derivations.
//
// A banded operator with a declared three-term expansion on each side of the
// lattice has Tr(P |D|^-s) = (core modes) + (explicit Hurwitz terms from the
// expansion coefficients) + (an absolutely convergent remainder sum), which
// continues the trace to Re s > -1 with simple poles at s = 1 - lead - j.

#include <cmath>
#include <complex>
#include <functional>
#include <limits>
#include <map>
#include <numbers>
#include <stdexcept>
#include <vector>

#include "ncg/band_operator.hpp"
#include "ncg/certified.hpp"
#include "ncg/models.hpp"
#include "ncg/special.hpp"

namespace ncg {

// Hurwitz zeta via Euler-Maclaurin; complex s away from s = 1, real a > 0.
inline cplx hurwitz_zeta(cplx s, double a) {
  if (a <= 0.0) throw std::domain_error("hurwitz_zeta: requires a > 0");
  if (std::abs(s - cplx{1.0}) < 1e-12)
    throw std::domain_error("hurwitz_zeta: pole at s = 1");
  int N = 0;
  double target = 14.0 + std::abs(s.imag()) + std::abs(s.real());
  while (a + N < target) ++N;
  cplx sum{0.0};
  for (int k = 0; k < N; ++k) sum += std::exp(-s * std::log(a + k));
  double b = a + N;
  cplx lb = std::log(b);
  sum += std::exp((1.0 - s) * lb) / (s - 1.0);
  sum += 0.5 * std::exp(-s * lb);
  constexpr int R = 10;
  cplx poch = s;  // (s)_1
  for (int r = 1; r <= R; ++r) {
    double f = 1.0;
    for (int i = 2; i <= 2 * r; ++i) f *= i;  // (2r)!
    sum += kBernoulliEven[size_t(r - 1)] / f * poch * std::exp(-(s + 2.0 * r - 1.0) * lb);
    poch *= (s + 2.0 * r - 1.0) * (s + 2.0 * r);
  }
  return sum;
}

inline cplx riemann_zeta(cplx s) { return hurwitz_zeta(s, 1.0); }

// ---------------------------------------------------------------------------

struct MeromorphicSampler {
  std::function<cplx(cplx)> evaluate;            // s -> zeta_P(s)
  std::vector<std::pair<cplx, int>> declared_poles;  // in s, with orders
  int q_max{1};
  double s_conv{1.0};     // direct sum converges for Re s > s_conv
  double eval_tail{0.0};  // certified evaluation error, uniform on |s| <= 3/4
};

// zeta_P(s) = Tr(P |D|^-s) for a banded P with declared diagonal expansion.
// |D| is the kernel-shifted circle-type diagonal; only the P diagonal matters.
inline MeromorphicSampler zeta_sampler(const BandOperator& P) {
  auto it = P.bands.find(0);
  AsymPair series;
  std::function<cplx(std::int64_t)> eval;
  if (it == P.bands.end()) {
    series = AsymPair::constant(cplx{0.0}, cplx{0.0});
    eval = [](std::int64_t) { return cplx{0.0}; };
  } else {
    if (!it->second.series) throw std::domain_error("missing asymptotic declaration");
    series = *it->second.series;
    eval = it->second.eval;
  }
  if (series.pos.lead != series.neg.lead)
    throw std::domain_error("missing asymptotic declaration");  // mixed leading order unsupported
  int lead = series.pos.lead;

  auto n_min = std::int64_t(std::ceil(std::max(series.x_min, 1.0)));
  auto X = std::max<std::int64_t>(512, 4 * n_min);

  // Cache the core diagonal and the numeric remainders r(x) = a(x) - main(x).
  std::vector<cplx> core;  // n = -(n_min-1) .. n_min-1
  core.reserve(size_t(2 * n_min - 1));
  for (std::int64_t n = -(n_min - 1); n <= n_min - 1; ++n) core.push_back(eval(n));
  std::vector<cplx> rem_pos, rem_neg;
  bool have_rem = series.pos.rem > 0.0 || series.neg.rem > 0.0;
  if (have_rem) {
    rem_pos.reserve(size_t(X - n_min + 1));
    rem_neg.reserve(size_t(X - n_min + 1));
    for (std::int64_t x = n_min; x <= X; ++x) {
      rem_pos.push_back(eval(x) - series.pos.eval_main(double(x)));
      rem_neg.push_back(eval(-x) - series.neg.eval_main(double(x)));
    }
  }

  MeromorphicSampler m;
  m.s_conv = 1.0 - lead;
  m.q_max = 1;
  for (int j = 0; j < 3; ++j) {
    if (series.pos.coeff[size_t(j)] != cplx{0.0} ||
        series.neg.coeff[size_t(j)] != cplx{0.0}) {
      cplx pole = cplx(1.0 - lead - j, 0.0);
      m.declared_poles.emplace_back(pole, 1);
    }
  }

  // The numeric remainder r(x) decays like x^-(lead+3); estimate its leading
  // coefficient from the last computed value and sum the estimated tail in
  // closed form.  The discarded error at most doubles, so the certificate
  // below carries a factor two.
  cplx c3_pos{0.0}, c3_neg{0.0};
  if (have_rem && !rem_pos.empty()) {
    double xp = std::pow(double(X), double(lead + 3));
    c3_pos = rem_pos.back() * xp;
    c3_neg = rem_neg.back() * xp;
  }

  // Discarded remainder beyond X, uniform over Re s >= -3/4.
  double alpha = lead + 3.0 - 0.75;
  if (alpha > 1.0) {
    m.eval_tail = 2.0 * (series.pos.rem + series.neg.rem) *
                      std::pow(double(X), 1.0 - alpha) / (alpha - 1.0) +
                  1e-13;
  } else {
    m.eval_tail = std::numeric_limits<double>::infinity();
  }

  double nm = double(n_min);
  m.evaluate = [series, core, rem_pos, rem_neg, n_min, nm, lead, have_rem, c3_pos,
                c3_neg, X](cplx s) -> cplx {
    cplx v{0.0};
    std::int64_t idx = 0;
    for (std::int64_t n = -(n_min - 1); n <= n_min - 1; ++n, ++idx) {
      double x = (n == 0) ? 1.0 : double(std::llabs(n));
      v += core[size_t(idx)] * std::exp(-s * std::log(x));
    }
    for (int j = 0; j < 3; ++j) {
      cplx cj = series.pos.coeff[size_t(j)] + series.neg.coeff[size_t(j)];
      if (cj != cplx{0.0}) v += cj * hurwitz_zeta(s + double(lead + j), nm);
    }
    if (have_rem) {
      for (std::int64_t x = n_min; x - n_min < std::int64_t(rem_pos.size()); ++x) {
        cplx w = std::exp(-s * std::log(double(x)));
        v += (rem_pos[size_t(x - n_min)] + rem_neg[size_t(x - n_min)]) * w;
      }
      cplx c3 = c3_pos + c3_neg;
      if (c3 != cplx{0.0}) v += c3 * hurwitz_zeta(s + double(lead + 3), double(X + 1));
    }
    return v;
  };
  return m;
}

// Finite-dimensional version: Tr(P |D|^-s) over the spectrum of D (kernel
// eigenvalues read as 1), an entire function of s, so the Laurent data reduce
// to the value at the origin.
inline MeromorphicSampler zeta_sampler(const DenseOperator& P, const DenseOperator& D) {
  HermitianSpectrum sp = hermitian_spectrum(D);
  Eigen::MatrixXcd Pt = sp.transform.m.adjoint() * P.m * sp.transform.m;
  std::vector<cplx> diag;
  std::vector<double> loglam;
  for (Eigen::Index i = 0; i < Pt.rows(); ++i) {
    diag.push_back(Pt(i, i));
    double a = std::abs(sp.eigenvalues[size_t(i)]);
    loglam.push_back(std::log(a < 1e-12 ? 1.0 : a));
  }
  MeromorphicSampler m;
  m.q_max = 1;
  m.s_conv = -std::numeric_limits<double>::infinity();
  m.eval_tail = 1e-13;
  m.evaluate = [diag, loglam](cplx s) {
    cplx v{0.0};
    for (size_t i = 0; i < diag.size(); ++i) v += diag[i] * std::exp(-s * loglam[i]);
    return v;
  };
  return m;
}

// Dispatch on the triple's backend.
inline MeromorphicSampler zeta_sampler(const Operator& P, const SpectralTriple& t) {
  if (t.dense_backend) return zeta_sampler(as_dense(P), as_dense(t.D));
  return zeta_sampler(as_band(P));
}

// ---------------------------------------------------------------------------

struct LaurentData {
  // taus[j] for j = -1 .. q-1: zeta_P(2z) = sum_{j>=0} tau_j z^(-j-1) + tau_{-1} + O(z).
  std::map<int, CertifiedValue> taus;
  double remainder_norm{0.0};
  double radius{0.0};
};

// The evaluator is sampled at s = 2z, matching the Laurent normalization
// zeta_P(2z) = tau_{q-1} z^-q + ... + tau_0 z^-1 + tau_{-1} + O(z).  A pure
// simple pole zeta_P(s) = 2/s therefore reads 1/z and extracts tau_0 = 1.
inline LaurentData laurent_extract(const MeromorphicSampler& m, int q) {
  if (q > m.q_max)
    throw std::invalid_argument("laurent_extract: order exceeds declared q_max");
  double dist = std::numeric_limits<double>::infinity();
  for (const auto& [pole, order] : m.declared_poles) {
    double dz = std::abs(pole) / 2.0;  // pole position in the z variable
    if (dz > 1e-12) dist = std::min(dist, dz);
  }
  double r = std::min(0.25, dist / 2.0);

  auto coeffs_at = [&m](double rad, int q_) {
    constexpr int M = 256;
    std::vector<cplx> vals(M);
    for (int t = 0; t < M; ++t) {
      double th = 2.0 * std::numbers::pi * t / M;
      cplx z = std::polar(rad, th);
      vals[size_t(t)] = m.evaluate(2.0 * z);
    }
    std::map<int, cplx> out;  // j = -1 .. q-1 and the O(z) estimate at key -2
    for (int j = -1; j < q_; ++j) {
      cplx acc{0.0};
      for (int t = 0; t < M; ++t) {
        double th = 2.0 * std::numbers::pi * t / M;
        cplx zp = std::polar(std::pow(rad, double(j + 1)), th * (j + 1));
        acc += vals[size_t(t)] * zp;
      }
      out[j] = acc / double(M);
    }
    cplx acc{0.0};
    for (int t = 0; t < M; ++t) {
      double th = 2.0 * std::numbers::pi * t / M;
      acc += vals[size_t(t)] * std::polar(1.0 / rad, -th);
    }
    out[-2] = acc / double(M);  // coefficient of z^1
    return out;
  };

  auto c1 = coeffs_at(r, q);
  auto c2 = coeffs_at(r / 2.0, q);

  LaurentData out;
  out.radius = r;
  out.remainder_norm = std::abs(c1.at(-2));
  for (int j = -1; j < q; ++j) {
    cplx v = c1.at(j);
    double diff = std::abs(v - c2.at(j));
    double scale = std::max(1.0, std::abs(v));
    if (diff > 1e-6 * scale) throw std::domain_error("pole misdeclared");
    double tail = m.eval_tail * std::pow(r, double(j + 1)) + diff;
    out.taus[j] = CertifiedValue{v, tail};
  }
  return out;
}

// ---------------------------------------------------------------------------
// |D| and the derivations.

inline Operator abs_d(const Operator& D) {
  if (is_dense(D)) {
    return operator_function(as_dense(D),
                             [](double x) { return std::abs(x) < 1e-12 ? 1.0 : std::abs(x); });
  }
  const BandOperator& b = as_band(D);
  if (!b.is_diagonal()) throw std::invalid_argument("abs_d: banded D must be diagonal");
  if (b.bands.empty()) return BandOperator::identity();
  const auto& o = b.bands.at(0);
  auto f = o.eval;
  BandOperator::Offset n;
  n.eval = [f](std::int64_t k) {
    double v = f(k).real();
    return cplx(std::abs(v) < 1e-12 ? 1.0 : std::abs(v), 0.0);
  };
  if (o.series) {
    AsymPair s = *o.series;
    auto flip = [](PowerSeries1& ps) {
      double lead_sign = (ps.coeff[0].real() < 0.0) ? -1.0 : 1.0;
      for (auto& c : ps.coeff) c *= lead_sign;
    };
    flip(s.pos);
    flip(s.neg);
    n.series = s;
    if (s.bounded()) n.deviation = asym_deviation_envelope(s);
  }
  BandOperator r;
  r.bands[0] = std::move(n);
  return r;
}

enum class DerivationKind { delta, nabla, log };

// The per-side expansion of the offset-d multiplier f(n+d) - f(n).
namespace detail {

inline AsymPair derivation_factor_series(DerivationKind kind, int d) {
  AsymPair a;
  double dd = double(d);
  switch (kind) {
    case DerivationKind::delta:
      a.pos = PowerSeries1::constant(cplx(dd, 0.0));
      a.neg = PowerSeries1::constant(cplx(-dd, 0.0));
      a.x_min = std::max(2.0, std::abs(dd) + 1.0);
      break;
    case DerivationKind::nabla:
      a.pos.lead = -1;
      a.pos.coeff = {cplx(2.0 * dd, 0.0), cplx(dd * dd, 0.0), cplx{0.0}};
      a.neg.lead = -1;
      a.neg.coeff = {cplx(-2.0 * dd, 0.0), cplx(dd * dd, 0.0), cplx{0.0}};
      a.x_min = 1.0;
      break;
    case DerivationKind::log:
      a.pos.lead = 1;
      a.pos.coeff = {cplx(2.0 * dd, 0.0), cplx(-dd * dd, 0.0),
                     cplx(2.0 * dd * dd * dd / 3.0, 0.0)};
      a.neg.lead = 1;
      a.neg.coeff = {cplx(-2.0 * dd, 0.0), cplx(-dd * dd, 0.0),
                     cplx(-2.0 * dd * dd * dd / 3.0, 0.0)};
      a.pos.rem = a.neg.rem = 8.0 * std::pow(std::abs(dd), 4.0);
      a.x_min = std::max(2.0, 2.0 * std::abs(dd));
      break;
  }
  return a;
}

inline double derivation_factor(DerivationKind kind, std::int64_t n, int d) {
  auto absd = [](std::int64_t k) { return k == 0 ? 1.0 : double(std::llabs(k)); };
  switch (kind) {
    case DerivationKind::delta:
      return absd(n + d) - absd(n);
    case DerivationKind::nabla:
      return double(n + d) * double(n + d) - double(n) * double(n);
    case DerivationKind::log:
      return 2.0 * (std::log(absd(n + d)) - std::log(absd(n)));
  }
  return 0.0;
}

}  // namespace detail

// [|D|, T], [D^2, T] or [log|D|^2, T] for banded T against the circle-type
// diagonal D(n) = n.  On offset d the commutator multiplies by f(n+d) - f(n).
inline BandOperator derivation(const BandOperator& T, DerivationKind kind) {
  BandOperator r;
  for (const auto& [d, o] : T.bands) {
    BandOperator::Offset n;
    auto f = o.eval;
    int dd = d;
    DerivationKind kk = kind;
    n.eval = [f, dd, kk](std::int64_t k) {
      return f(k) * detail::derivation_factor(kk, k, dd);
    };
    if (d == 0) {
      n.limit_pos = n.limit_neg = cplx{0.0};
      n.deviation = DecayEnvelope::zero();
      n.series = AsymPair::constant(cplx{0.0}, cplx{0.0});
      r.bands[d] = std::move(n);
      continue;
    }
    if (o.series) {
      AsymPair fs = detail::derivation_factor_series(kind, d);
      AsymPair s = asym_mul(*o.series, fs);
      s.x_min = std::max(s.x_min, fs.x_min);
      n.series = s;
      n.limit_pos = s.limit_pos();
      n.limit_neg = s.limit_neg();
      if (s.bounded()) n.deviation = asym_deviation_envelope(s);
    }
    r.bands[d] = std::move(n);
  }
  return r;
}

inline DenseOperator derivation(const DenseOperator& T, const DenseOperator& D,
                                DerivationKind kind) {
  switch (kind) {
    case DerivationKind::delta:
      return commutator(as_dense(abs_d(Operator{D})), T);
    case DerivationKind::nabla:
      return commutator(D * D, T);
    case DerivationKind::log: {
      DenseOperator lg = operator_function(D, [](double x) {
        double a = std::abs(x) < 1e-12 ? 1.0 : std::abs(x);
        return 2.0 * std::log(a);
      });
      return commutator(lg, T);
    }
  }
  throw std::logic_error("unreachable");
}

// ---------------------------------------------------------------------------

struct ConjugationReport {
  double defect_log_series;
  double defect_binomial;
};

// Compare |D|^{2z} T |D|^{-2z} against its two truncated expansions on a window.
inline ConjugationReport conjugation_expansion_check(const BandOperator& T, cplx z,
                                                     int N, std::int64_t window = 32) {
  if (std::abs(z) > 0.5)
    throw std::invalid_argument("conjugation check: requires |z| <= 1/2");
  ConjugationReport rep{0.0, 0.0};
  auto absd = [](std::int64_t k) { return k == 0 ? 1.0 : double(std::llabs(k)); };
  for (const auto& [d, o] : T.bands) {
    for (std::int64_t n = -window; n <= window; ++n) {
      cplx t = o.eval(n);
      double ratio = absd(n + d) / absd(n);
      cplx exact = std::exp(2.0 * z * std::log(ratio)) * t;

      // exp(z L) truncated: factor (2 log ratio)^k z^k / k!.
      cplx lsum{0.0};
      double lf = 2.0 * std::log(ratio);
      cplx term{1.0};
      for (int k = 0; k <= N; ++k) {
        lsum += term;
        term *= z * lf / double(k + 1);
      }
      rep.defect_log_series = std::max(rep.defect_log_series, std::abs(lsum * t - exact));

      // binomial-nabla: sum_k binom(z,k) ((n+d)^2 - n^2)^k |n|^(-2k).
      double w = (double(n + d) * double(n + d) - double(n) * double(n)) /
                 (absd(n) * absd(n));
      cplx bsum{0.0};
      cplx bin{1.0};
      for (int k = 0; k <= N; ++k) {
        bsum += bin * std::pow(w, double(k));
        bin *= (z - double(k)) / double(k + 1);
      }
      rep.defect_binomial = std::max(rep.defect_binomial, std::abs(bsum * t - exact));
    }
  }
  return rep;
}

}  // namespace ncg
