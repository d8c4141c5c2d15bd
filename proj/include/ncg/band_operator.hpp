#pragma once

// Banded operators on l^2(Z).  An operator is a finite set of diagonals
// indexed by offset d, each given by an evaluator n -> entry(n+d, n) plus
// decay metadata: asymptotic limits per lattice direction, a deviation
// majorant, and optionally a three-term asymptotic expansion.  Products and
// sums propagate the metadata conservatively; truncated traces use it to
// certify their tails.

#include <cmath>
#include <complex>
#include <cstdint>
#include <functional>
#include <map>
#include <optional>
#include <stdexcept>
#include <vector>

#include <Eigen/Dense>

#include "ncg/certified.hpp"
#include "ncg/envelope.hpp"

namespace ncg {

struct BandOperator {
  struct Offset {
    std::function<cplx(std::int64_t)> eval;
    cplx limit_pos{0.0};
    cplx limit_neg{0.0};
    std::optional<DecayEnvelope> deviation;  // |eval(n) - limit(side)| for |n| >= x_min
    std::optional<AsymPair> series;          // refined expansion, per |n| side
  };

  std::map<int, Offset> bands;

  // -- constructors ---------------------------------------------------------

  static BandOperator zero() { return {}; }

  static BandOperator identity() {
    return constant_diagonal(0, cplx{1.0});
  }

  // Offset-d diagonal with a constant value (shift operators, symbol terms).
  static BandOperator constant_diagonal(int d, cplx v) {
    BandOperator b;
    Offset o;
    o.eval = [v](std::int64_t) { return v; };
    o.limit_pos = o.limit_neg = v;
    o.deviation = DecayEnvelope::zero();
    o.series = AsymPair::constant(v, v);
    b.bands[d] = std::move(o);
    return b;
  }

  // General diagonal from an evaluator plus declared metadata.
  static BandOperator diagonal(std::function<cplx(std::int64_t)> f,
                               std::optional<AsymPair> series = std::nullopt,
                               std::optional<DecayEnvelope> deviation = std::nullopt) {
    BandOperator b;
    Offset o;
    o.eval = std::move(f);
    if (series) {
      o.limit_pos = series->limit_pos();
      o.limit_neg = series->limit_neg();
      if (!deviation && series->bounded())
        deviation = asym_deviation_envelope(*series);
    }
    o.deviation = deviation;
    o.series = std::move(series);
    b.bands[0] = std::move(o);
    return b;
  }

  // -- basic access ---------------------------------------------------------

  bool has_band(int d) const { return bands.count(d) != 0; }

  cplx entry(std::int64_t row, std::int64_t col) const {
    auto it = bands.find(int(row - col));
    return it == bands.end() ? cplx{0.0} : it->second.eval(col);
  }

  std::vector<int> offsets() const {
    std::vector<int> v;
    v.reserve(bands.size());
    for (const auto& [d, o] : bands) v.push_back(d);
    return v;
  }

  int max_abs_offset() const {
    int m = 0;
    for (const auto& [d, o] : bands) m = std::max(m, std::abs(d));
    return m;
  }

  bool is_diagonal() const {
    return bands.size() <= 1 && (bands.empty() || bands.begin()->first == 0);
  }

  // Dense view on the index window [-W, W], for oracles and diagnostics.
  Eigen::MatrixXcd window_matrix(std::int64_t W) const {
    Eigen::MatrixXcd m = Eigen::MatrixXcd::Zero(2 * W + 1, 2 * W + 1);
    for (const auto& [d, o] : bands)
      for (std::int64_t n = -W; n <= W; ++n) {
        std::int64_t r = n + d;
        if (r >= -W && r <= W) m(r + W, n + W) = o.eval(n);
      }
    return m;
  }

  // -- certified bounds -----------------------------------------------------

  // Upper bound on sup_n |band_d(n)|; requires the deviation majorant.
  double offset_sup_bound(int d) const {
    auto it = bands.find(d);
    if (it == bands.end()) return 0.0;
    const Offset& o = it->second;
    if (!o.deviation)
      throw std::domain_error("offset sup bound: no deviation majorant declared");
    const DecayEnvelope& e = *o.deviation;
    double core = 0.0;
    auto cw = std::int64_t(std::ceil(e.x_min));
    for (std::int64_t n = -cw; n <= cw; ++n) core = std::max(core, std::abs(o.eval(n)));
    double dev_sup = 0.0;
    if (e.c_pow != 0.0) dev_sup += e.c_pow * std::pow(e.x_min, -e.alpha);
    if (e.c_gauss != 0.0)
      dev_sup += e.c_gauss * ((e.shift >= e.x_min)
                                  ? 1.0
                                  : std::exp(-e.rate * (e.x_min - e.shift) * (e.x_min - e.shift)));
    double lim = std::max(std::abs(o.limit_pos), std::abs(o.limit_neg));
    return std::max(core, lim + dev_sup);
  }

  // Row-sum bound: ||A|| <= sum_d sup|band_d|.
  double norm_bound() const {
    double s = 0.0;
    for (const auto& [d, o] : bands) s += offset_sup_bound(d);
    return s;
  }
};

// -- arithmetic -------------------------------------------------------------

inline BandOperator adjoint(const BandOperator& a) {
  BandOperator r;
  for (const auto& [d, o] : a.bands) {
    BandOperator::Offset n;
    auto f = o.eval;
    int dd = d;
    n.eval = [f, dd](std::int64_t k) { return std::conj(f(k - dd)); };
    n.limit_pos = std::conj(o.limit_pos);
    n.limit_neg = std::conj(o.limit_neg);
    if (o.deviation) n.deviation = o.deviation->arg_shifted(std::abs(double(d)));
    if (o.series) n.series = asym_conj(asym_arg_shift(*o.series, -d));
    r.bands[-d] = std::move(n);
  }
  return r;
}

inline BandOperator operator*(const BandOperator& a, const BandOperator& b) {
  struct Term {
    std::function<cplx(std::int64_t)> fa, fb;
    int db;
  };
  std::map<int, std::vector<Term>> terms;

  for (const auto& [da, oa] : a.bands)
    for (const auto& [db, ob] : b.bands)
      terms[da + db].push_back(Term{oa.eval, ob.eval, db});

  BandOperator r;
  for (auto& [d, ts] : terms) {
    BandOperator::Offset o;
    o.eval = [ts](std::int64_t n) {
      cplx s{0.0};
      for (const auto& t : ts) s += t.fa(n + t.db) * t.fb(n);
      return s;
    };

    bool have_dev = true;
    bool have_series = true;
    std::optional<DecayEnvelope> dev;
    std::optional<AsymPair> ser;
    cplx lp{0.0}, ln{0.0};
    for (const auto& [da, oa] : a.bands)
      for (const auto& [db, ob] : b.bands) {
        if (da + db != d) continue;
        lp += oa.limit_pos * ob.limit_pos;
        ln += oa.limit_neg * ob.limit_neg;
        if (have_dev && oa.deviation && ob.deviation) {
          double sup_b = b.offset_sup_bound(db);
          double lim_a = std::max(std::abs(oa.limit_pos), std::abs(oa.limit_neg));
          DecayEnvelope e = merge_sum(oa.deviation->arg_shifted(std::abs(double(db))).scaled(sup_b),
                                      ob.deviation->scaled(lim_a));
          dev = dev ? merge_sum(*dev, e) : e;
        } else {
          have_dev = false;
          dev.reset();
        }
        if (have_series && oa.series && ob.series) {
          AsymPair p = asym_mul(asym_arg_shift(*oa.series, db), *ob.series);
          ser = ser ? asym_add(*ser, p) : p;
        } else {
          have_series = false;
          ser.reset();
        }
      }
    o.limit_pos = lp;
    o.limit_neg = ln;
    o.deviation = dev;
    o.series = ser;
    r.bands[d] = std::move(o);
  }
  return r;
}

inline BandOperator operator*(cplx s, const BandOperator& a) {
  BandOperator r;
  for (const auto& [d, o] : a.bands) {
    BandOperator::Offset n;
    auto f = o.eval;
    n.eval = [f, s](std::int64_t k) { return s * f(k); };
    n.limit_pos = s * o.limit_pos;
    n.limit_neg = s * o.limit_neg;
    if (o.deviation) n.deviation = o.deviation->scaled(std::abs(s));
    if (o.series) n.series = o.series->scaled(s);
    r.bands[d] = std::move(n);
  }
  return r;
}

inline BandOperator operator+(const BandOperator& a, const BandOperator& b) {
  BandOperator r = a;
  for (const auto& [d, ob] : b.bands) {
    auto it = r.bands.find(d);
    if (it == r.bands.end()) {
      r.bands[d] = ob;
      continue;
    }
    BandOperator::Offset& oa = it->second;
    auto fa = oa.eval;
    auto fb = ob.eval;
    oa.eval = [fa, fb](std::int64_t n) { return fa(n) + fb(n); };
    oa.limit_pos += ob.limit_pos;
    oa.limit_neg += ob.limit_neg;
    if (oa.deviation && ob.deviation)
      oa.deviation = merge_sum(*oa.deviation, *ob.deviation);
    else
      oa.deviation.reset();
    if (oa.series && ob.series)
      oa.series = asym_add(*oa.series, *ob.series);
    else
      oa.series.reset();
  }
  return r;
}

inline BandOperator operator-(const BandOperator& a, const BandOperator& b) {
  return a + (cplx{-1.0} * b);
}

inline BandOperator commutator(const BandOperator& a, const BandOperator& b) {
  return a * b - b * a;
}

// -- certified trace --------------------------------------------------------

inline CertifiedValue certified_trace(const BandOperator& t, std::int64_t window) {
  auto it = t.bands.find(0);
  if (it == t.bands.end()) return CertifiedValue{cplx{0.0}, 0.0};
  const BandOperator::Offset& o = it->second;
  if (o.limit_pos != cplx{0.0} || o.limit_neg != cplx{0.0})
    throw std::domain_error("not trace class");
  if (!o.deviation || !o.deviation->summable())
    throw std::domain_error("not trace class");

  CertifiedValue out;
  for (std::int64_t n = -window; n <= window; ++n) out.value += o.eval(n);

  auto eff = std::max<std::int64_t>(window, std::int64_t(std::ceil(o.deviation->x_min)));
  double extra = 0.0;
  for (std::int64_t n = window + 1; n <= eff; ++n)
    extra += std::abs(o.eval(n)) + std::abs(o.eval(-n));
  out.tail_bound = extra + o.deviation->tail_two_sided(double(eff));
  return out;
}

}  // namespace ncg
