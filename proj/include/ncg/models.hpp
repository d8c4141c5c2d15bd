#pragma once

// The shipped spectral triples: the circle Dirac model on the full integer
// lattice (odd, banded) and finite graded two-block triples (even, dense),
// together with their algebra generators and the circle-specific certified
// building blocks (|D| powers, heat diagonals, the bounded transform).

#include <cmath>
#include <complex>
#include <map>
#include <numbers>
#include <optional>
#include <string>
#include <vector>

#include "ncg/operators.hpp"

namespace ncg {

enum class Parity { even, odd };

struct SpectralTriple {
  std::string kind;
  Parity parity{Parity::odd};
  double p{1.0};
  bool dense_backend{false};
  Operator D;
  std::optional<Operator> grading;
  std::map<std::string, Operator> generators;

  const Operator& generator(const std::string& label) const {
    auto it = generators.find(label);
    if (it == generators.end())
      throw std::invalid_argument("unknown generator label: " + label);
    return it->second;
  }
};

// -- circle building blocks -------------------------------------------------

// D = diag(n).
inline BandOperator circle_dirac_operator() {
  AsymPair s;
  s.pos = PowerSeries1::monomial(cplx{1.0}, -1);
  s.neg = PowerSeries1::monomial(cplx{-1.0}, -1);
  return BandOperator::diagonal([](std::int64_t n) { return cplx(double(n), 0.0); }, s);
}

// |D| with the kernel mode shifted to 1: diag(max(|n|, 1)).
inline BandOperator circle_abs_dirac() {
  AsymPair s;
  s.pos = PowerSeries1::monomial(cplx{1.0}, -1);
  s.neg = PowerSeries1::monomial(cplx{1.0}, -1);
  return BandOperator::diagonal(
      [](std::int64_t n) { return cplx(n == 0 ? 1.0 : double(std::abs(n)), 0.0); }, s);
}

// |D|^(-w), w > 0 integer: diag(max(|n|,1)^(-w)).  Exact expansion.
inline BandOperator circle_abs_power(int w) {
  AsymPair s;
  s.pos = PowerSeries1::monomial(cplx{1.0}, w);
  s.neg = PowerSeries1::monomial(cplx{1.0}, w);
  double dw = double(w);
  return BandOperator::diagonal(
      [dw](std::int64_t n) {
        double x = (n == 0) ? 1.0 : double(std::abs(n));
        return cplx(std::pow(x, -dw), 0.0);
      },
      s);
}

// diag(exp(-t n^2)).  Gaussian majorant; power-remainder constant for the
// expansion slot so downstream products keep certified tails.
inline BandOperator circle_heat(double t) {
  AsymPair s;
  s.pos = PowerSeries1{};
  s.neg = PowerSeries1{};
  double rem = std::pow(1.5 / t, 1.5) * std::exp(-1.5);  // sup x^3 e^(-t x^2)
  s.pos.rem = rem;
  s.neg.rem = rem;
  BandOperator b = BandOperator::diagonal(
      [t](std::int64_t n) { return cplx(std::exp(-t * double(n) * double(n)), 0.0); }, s,
      DecayEnvelope::gaussian(1.0, t, 0.0));
  return b;
}

// F = D (1 + D^2)^(-1/2) on the circle: diag(n / sqrt(1+n^2)).
inline BandOperator circle_bounded_transform() {
  AsymPair s;
  s.x_min = 1.0;
  s.pos.lead = 0;
  s.pos.coeff = {cplx{1.0}, cplx{0.0}, cplx{-0.5}};
  s.pos.rem = 0.375;
  s.neg.lead = 0;
  s.neg.coeff = {cplx{-1.0}, cplx{0.0}, cplx{0.5}};
  s.neg.rem = 0.375;
  return BandOperator::diagonal(
      [](std::int64_t n) {
        double x = double(n);
        return cplx(x / std::sqrt(1.0 + x * x), 0.0);
      },
      s);
}

// 1 - F^2 = (1 + D^2)^(-1): diag(1/(1+n^2)).  The explicit majorant n^(-2)
// is sharp enough to make the trace tail an integral-comparison bound 2/W.
inline BandOperator circle_defect() {
  AsymPair s;
  s.pos.lead = 2;
  s.pos.coeff = {cplx{1.0}, cplx{0.0}, cplx{-1.0}};
  s.pos.rem = 1.0;
  s.neg = s.pos;
  return BandOperator::diagonal(
      [](std::int64_t n) {
        double x = double(n);
        return cplx(1.0 / (1.0 + x * x), 0.0);
      },
      s, DecayEnvelope::power(1.0, 2.0));
}

inline SpectralTriple build_circle_dirac() {
  SpectralTriple t;
  t.kind = "circle";
  t.parity = Parity::odd;
  t.p = 1.5;
  t.dense_backend = false;
  t.D = circle_dirac_operator();
  BandOperator u = BandOperator::constant_diagonal(1, cplx{1.0});
  t.generators["1"] = BandOperator::identity();
  t.generators["U"] = u;
  t.generators["U*"] = adjoint(u);
  return t;
}

// -- winding symbols --------------------------------------------------------

struct WindingSymbol {
  std::map<int, cplx> coefficients;

  cplx eval(double theta) const {
    cplx v{0.0};
    for (const auto& [k, c] : coefficients)
      v += c * std::polar(1.0, k * theta);
    return v;
  }
  cplx eval_derivative(double theta) const {
    cplx v{0.0};
    for (const auto& [k, c] : coefficients)
      v += c * cplx(0.0, double(k)) * std::polar(1.0, k * theta);
    return v;
  }

  bool is_unitary() const {
    for (int i = 0; i < 256; ++i) {
      double th = 2.0 * std::numbers::pi * i / 256.0;
      double m = std::abs(eval(th));
      if (m < 1.0 - 1e-9 || m > 1.0 + 1e-9) return false;
    }
    return true;
  }

  // Fourier coefficients of the pointwise inverse of a unitary symbol:
  // 1/u = conj(u).
  WindingSymbol unitary_inverse() const {
    WindingSymbol inv;
    for (const auto& [k, c] : coefficients) inv.coefficients[-k] = std::conj(c);
    return inv;
  }

  static WindingSymbol monomial(int w, cplx c = cplx{1.0}) {
    WindingSymbol s;
    s.coefficients[w] = c;
    return s;
  }
};

inline BandOperator multiplication_operator(const WindingSymbol& s) {
  if (s.coefficients.empty()) throw std::invalid_argument("empty symbol");
  BandOperator b = BandOperator::zero();
  bool first = true;
  for (const auto& [k, c] : s.coefficients) {
    BandOperator term = BandOperator::constant_diagonal(k, c);
    b = first ? term : b + term;
    first = false;
  }
  return b;
}

// [diag(n), a] for a banded a: the (n+d, n) entry picks up exactly the factor
// (n+d) - n = d, so every offset diagonal is scaled by its own offset and the
// zero offset drops out.  This keeps the cancellation that a generic product
// difference cannot see, so commutators with the lattice Dirac stay bounded
// whenever a is.
inline BandOperator circle_dirac_commutator(const BandOperator& a) {
  BandOperator out = BandOperator::zero();
  for (const auto& [d, o] : a.bands) {
    if (d == 0) continue;
    BandOperator::Offset r;
    double dd = double(d);
    r.eval = [f = o.eval, dd](std::int64_t n) { return cplx{dd} * f(n); };
    r.limit_pos = cplx{dd} * o.limit_pos;
    r.limit_neg = cplx{dd} * o.limit_neg;
    if (o.deviation) r.deviation = o.deviation->scaled(std::abs(dd));
    if (o.series) r.series = o.series->scaled(cplx{dd});
    out.bands[d] = std::move(r);
  }
  return out;
}

// -- finite even triples ----------------------------------------------------

inline SpectralTriple build_finite_even(int dim_plus, int dim_minus,
                                        const DenseOperator& P,
                                        std::map<std::string, DenseOperator> generators) {
  if (P.rows() != dim_minus || P.cols() != dim_plus)
    throw std::invalid_argument("P dimensions inconsistent");
  int n = dim_plus + dim_minus;
  Eigen::MatrixXcd D = Eigen::MatrixXcd::Zero(n, n);
  D.block(0, dim_plus, dim_plus, dim_minus) = P.m.adjoint();
  D.block(dim_plus, 0, dim_minus, dim_plus) = P.m;
  Eigen::MatrixXcd G = Eigen::MatrixXcd::Zero(n, n);
  G.topLeftCorner(dim_plus, dim_plus) = Eigen::MatrixXcd::Identity(dim_plus, dim_plus);
  G.bottomRightCorner(dim_minus, dim_minus) =
      -Eigen::MatrixXcd::Identity(dim_minus, dim_minus);

  SpectralTriple t;
  t.kind = "finite-even";
  t.parity = Parity::even;
  t.p = 1.0;
  t.dense_backend = true;
  t.D = DenseOperator{D};
  t.grading = DenseOperator{G};
  t.generators["1"] = DenseOperator::identity(n);
  for (auto& [name, g] : generators) {
    if (g.rows() != n || g.cols() != n)
      throw std::invalid_argument("generator not even: " + name);
    double off = g.m.block(0, dim_plus, dim_plus, dim_minus).cwiseAbs().sum() +
                 g.m.block(dim_plus, 0, dim_minus, dim_plus).cwiseAbs().sum();
    if (off > 1e-12 * std::max(1.0, g.m.cwiseAbs().maxCoeff()))
      throw std::invalid_argument("generator not even: " + name);
    t.generators[name] = std::move(g);
  }
  return t;
}

// -- diagnostics ------------------------------------------------------------

struct Diagnostic {
  std::string check;
  bool pass;
  double defect;
};

namespace detail {

inline double band_window_defect(const BandOperator& a, const BandOperator& b,
                                 std::int64_t W) {
  double m = 0.0;
  for (std::int64_t r = -W; r <= W; ++r)
    for (std::int64_t c = -W; c <= W; ++c)
      m = std::max(m, std::abs(a.entry(r, c) - b.entry(r, c)));
  return m;
}

// A declared expansion grows iff some surviving term has a positive power of x.
// Cancellations from commutators leave zero coefficients in front of the lead,
// so test each slot rather than the nominal lead.
inline bool series_grows(const PowerSeries1& s) {
  double scale = 1.0;
  for (const auto& c : s.coeff) scale = std::max(scale, std::abs(c));
  for (int j = 0; j < 3; ++j)
    if (s.lead + j < 0 && std::abs(s.coeff[std::size_t(j)]) > 1e-13 * scale)
      return true;
  return s.rem > 0.0 && s.lead + 3 < 0;
}

inline double band_growth_defect(const BandOperator& a) {
  // Detect unbounded diagonals: expansions with a surviving positive power flag
  // it exactly, otherwise compare sups over nested windows.
  double worst = 0.0;
  for (const auto& [d, o] : a.bands) {
    if (o.series) {
      if (series_grows(o.series->pos) || series_grows(o.series->neg)) {
        double s = 0.0;
        for (std::int64_t n = -64; n <= 64; ++n) s = std::max(s, std::abs(o.eval(n)));
        worst = std::max(worst, s);
      }
      continue;
    }
    double s32 = 0.0, s64 = 0.0;
    for (std::int64_t n = -32; n <= 32; ++n) s32 = std::max(s32, std::abs(o.eval(n)));
    for (std::int64_t n = -64; n <= 64; ++n) s64 = std::max(s64, std::abs(o.eval(n)));
    if (s64 > 1.25 * s32 + 1e-12) worst = std::max(worst, s64);
  }
  return worst;
}

}  // namespace detail

inline std::vector<Diagnostic> validate_triple(const SpectralTriple& t) {
  std::vector<Diagnostic> out;
  auto push = [&](const std::string& name, double defect, double tol) {
    out.push_back(Diagnostic{name, defect <= tol, defect});
  };

  if (t.dense_backend) {
    const auto& D = as_dense(t.D);
    push("D self-adjoint", (D.m - D.m.adjoint()).cwiseAbs().maxCoeff(), 1e-12);
    if (t.grading) {
      const auto& G = as_dense(*t.grading);
      push("grading squares to one",
           (G.m * G.m - Eigen::MatrixXcd::Identity(G.rows(), G.cols()))
               .cwiseAbs()
               .maxCoeff(),
           1e-12);
      push("grading anticommutes with D", (G.m * D.m + D.m * G.m).cwiseAbs().maxCoeff(),
           1e-12);
      for (const auto& [name, g] : t.generators)
        push("grading commutes with " + name,
             (G.m * as_dense(g).m - as_dense(g).m * G.m).cwiseAbs().maxCoeff(), 1e-12);
    }
    for (const auto& [name, g] : t.generators)
      out.push_back(Diagnostic{"bounded commutator [D, " + name + "]", true,
                               commutator(D, as_dense(g)).norm2()});
  } else {
    const auto& D = as_band(t.D);
    push("D self-adjoint", detail::band_window_defect(D, adjoint(D), 16), 1e-12);
    for (const auto& [name, g] : t.generators) {
      BandOperator c = commutator(D, as_band(g));
      push("bounded commutator [D, " + name + "]", detail::band_growth_defect(c), 1e-9);
    }
  }
  return out;
}

}  // namespace ncg
