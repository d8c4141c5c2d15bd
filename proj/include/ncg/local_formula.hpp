#pragma once

// Residue cocycle.  Each term is an exact rational combinatorial coefficient
// against a zeta-function Laurent coefficient of the word
//   a_0 nabla^{m_1}([D,a_1]) ... nabla^{m_k}([D,a_k]) |D|^(-(k+2|m|)),
// where nabla(T) = [D^2, T].  The raw style weighs the Laurent data with the
// Taylor coefficients of the Gamma factor at its evaluation point; the
// renormalized style freezes the Gamma value and keeps the exact polynomial
// weights, dropping terms whose word is already trace class.  On simple poles
// the two agree term by term.

#include <cmath>
#include <complex>
#include <cstdio>
#include <functional>
#include <stdexcept>
#include <string>
#include <vector>

#include "ncg/cyclic.hpp"
#include "ncg/models.hpp"
#include "ncg/operators.hpp"
#include "ncg/rational.hpp"
#include "ncg/zeta.hpp"

namespace ncg {

// (-1)^{|m|} / (prod_j (m_1+...+m_j+j) * prod_i m_i!), exactly.
inline Rational coefficient_C(const std::vector<int>& m) {
  Rational c{1};
  std::int64_t partial = 0;
  for (size_t j = 0; j < m.size(); ++j) {
    if (m[j] < 0) throw std::invalid_argument("negative derivative order");
    partial += m[j];
    c = c / Rational{partial + std::int64_t(j) + 1};
    c = c / rational_factorial(m[j]);
  }
  std::int64_t total = 0;
  for (int x : m) total += x;
  if (total % 2 == 1) c = Rational{-1} * c;
  return c;
}

// Ascending coefficients of prod_{j=1}^{q} (s + j - 1/2).
inline std::vector<Rational> sigma_coefficients_odd(int q) {
  std::vector<Rational> c{Rational{1}};
  for (int j = 1; j <= q; ++j) {
    std::vector<Rational> next(c.size() + 1, Rational{0});
    Rational root{2 * j - 1, 2};
    for (size_t i = 0; i < c.size(); ++i) {
      next[i] = next[i] + root * c[i];
      next[i + 1] = next[i + 1] + c[i];
    }
    c = std::move(next);
  }
  return c;
}

// Ascending coefficients of prod_{j=1}^{q-1} (s + j), for q >= 1.
inline std::vector<Rational> sigma_coefficients_even(int q) {
  if (q < 1) throw std::invalid_argument("even weight needs q >= 1");
  std::vector<Rational> c{Rational{1}};
  for (int j = 1; j <= q - 1; ++j) {
    std::vector<Rational> next(c.size() + 1, Rational{0});
    for (size_t i = 0; i < c.size(); ++i) {
      next[i] = next[i] + Rational{j} * c[i];
      next[i + 1] = next[i + 1] + c[i];
    }
    c = std::move(next);
  }
  return c;
}

enum class ResidueStyle { raw, renormalized };

// One evaluated term of the cocycle: the word is labeled by its derivative
// multi-index, the Laurent order l it consumes, and the scalar weight
// (prefactor times C_m times the l-th Gamma weight).
struct ResidueTerm {
  int k{0};
  std::vector<int> m;
  int l{0};
  cplx weight;
  CertifiedValue tau;
};

// One line per contribution; the m-tuple is pipe-separated to stay inside a
// single CSV cell.
inline std::string residue_terms_csv(const std::vector<ResidueTerm>& terms) {
  std::string out =
      "k,m,l,coefficient_re,coefficient_im,tau_value_re,tau_value_im,tail_bound\n";
  for (const auto& t : terms) {
    std::string m;
    for (size_t i = 0; i < t.m.size(); ++i) {
      if (i) m += "|";
      m += std::to_string(t.m[i]);
    }
    char buf[192];
    std::snprintf(buf, sizeof buf, "%d,%s,%d,%.17g,%.17g,%.17g,%.17g,%.17g\n", t.k,
                  m.c_str(), t.l, t.weight.real(), t.weight.imag(), t.tau.value.real(),
                  t.tau.value.imag(), t.tau.tail_bound);
    out += buf;
  }
  return out;
}

namespace detail {

inline Operator abs_power_op(const SpectralTriple& t, int w) {
  if (t.dense_backend) {
    DenseOperator D = as_dense(t.D);
    return operator_function(D, [w](double x) {
      double a = std::abs(x) < 1e-12 ? 1.0 : std::abs(x);
      return std::pow(a, double(-w));
    });
  }
  return circle_abs_power(w);
}

inline Operator nabla_power(const SpectralTriple& t, Operator T, int m) {
  for (int i = 0; i < m; ++i) {
    if (is_dense(T))
      T = derivation(as_dense(T), as_dense(t.D), DerivationKind::nabla);
    else
      T = derivation(as_band(T), DerivationKind::nabla);
  }
  return T;
}

// Laurent weights w_l, l = -1..q-1, of the Gamma factor at s0: the residue of
// Gamma(s + s0) against tau_l s^(-l-1).  At s0 = 0 the Gamma pole itself
// feeds the constant Laurent term.
inline std::vector<double> gamma_weights(double s0, int q) {
  std::vector<double> w(size_t(q) + 1, 0.0);  // w[0] = w_{-1}, w[l+1] = w_l
  if (s0 > 0.0) {
    auto g = gamma_derivatives(s0, q);
    for (int l = 0; l < q; ++l) w[size_t(l) + 1] = g[size_t(l)] / factorial(l);
  } else {
    // Gamma(s) = Gamma(s+1)/s: the s^l coefficient is Gamma^{(l+1)}(1)/(l+1)!.
    auto g = gamma_derivatives(1.0, q + 1);
    w[0] = 1.0;
    for (int l = 0; l < q; ++l) w[size_t(l) + 1] = g[size_t(l) + 1] / factorial(l + 1);
  }
  return w;
}

}  // namespace detail

// All evaluated terms of the degree-k residue cocycle on the word (a_0..a_k).
inline std::vector<ResidueTerm> local_cocycle_terms(
    const SpectralTriple& t, int k, ResidueStyle style,
    const std::vector<Operator>& a, double kappa_value = -1.0, int m_cap = 3) {
  if (int(a.size()) != k + 1)
    throw std::invalid_argument("word length does not match cochain degree");
  if (m_cap < 0 || m_cap > 8 || k + 2 * m_cap > 16)
    throw std::length_error("composition overflow");
  bool even = (t.parity == Parity::even);
  if (even != (k % 2 == 0))
    throw std::invalid_argument("cochain degree parity mismatch");

  cplx prefactor = even ? cplx{1.0} : sqrt_two_i() * kappa_value;

  std::vector<Operator> comm;
  for (int i = 1; i <= k; ++i) {
    const Operator& ai = a[size_t(i)];
    if (is_dense(ai))
      comm.push_back(op_commutator(t.D, ai));
    else
      comm.push_back(Operator(circle_dirac_commutator(as_band(ai))));
  }

  std::vector<ResidueTerm> out;
  std::vector<int> m(size_t(std::max(k, 0)), 0);
  std::function<void(int, int)> rec = [&](int slot, int used) {
    if (slot == k) {
      int total = used;
      if (style == ResidueStyle::renormalized && double(k + total) >= t.p) return;

      Operator w = a[0];
      if (even) w = compose(*t.grading, a[0]);
      for (int i = 1; i <= k; ++i)
        w = compose(w, detail::nabla_power(t, comm[size_t(i - 1)], m[size_t(i - 1)]));
      if (k + 2 * total > 0) w = compose(w, detail::abs_power_op(t, k + 2 * total));

      MeromorphicSampler zs = is_dense(w)
                                  ? zeta_sampler(as_dense(w), as_dense(t.D))
                                  : zeta_sampler(as_band(w));
      int q = zs.q_max;
      LaurentData lau = laurent_extract(zs, q);

      double cm = coefficient_C(std::vector<int>(m.begin(), m.begin() + k)).to_double();
      std::vector<double> wl;
      if (style == ResidueStyle::raw) {
        wl = detail::gamma_weights(0.5 * k + total, q);
      } else {
        wl.assign(size_t(q) + 1, 0.0);
        if (even) {
          int s0 = k / 2 + total;
          if (s0 == 0) {
            wl[0] = 1.0;
          } else {
            auto sig = sigma_coefficients_even(s0);
            for (int l = 0; l < q && l < int(sig.size()); ++l)
              wl[size_t(l) + 1] = sig[size_t(l)].to_double();
          }
        } else {
          auto sig = sigma_coefficients_odd((k - 1) / 2 + total);
          double root_pi = std::sqrt(std::numbers::pi);
          for (int l = 0; l < q && l < int(sig.size()); ++l)
            wl[size_t(l) + 1] = root_pi * sig[size_t(l)].to_double();
        }
      }

      for (int l = -1; l < q; ++l) {
        double wgt = wl[size_t(l + 1)];
        if (wgt == 0.0) continue;
        auto it = lau.taus.find(l);
        if (it == lau.taus.end()) continue;
        ResidueTerm term;
        term.k = k;
        term.m.assign(m.begin(), m.begin() + k);
        term.l = l;
        term.weight = prefactor * cm * wgt;
        term.tau = it->second;
        out.push_back(std::move(term));
      }
      return;
    }
    for (int j = 0; used + j <= m_cap; ++j) {
      m[size_t(slot)] = j;
      rec(slot + 1, used + j);
    }
  };
  rec(0, 0);
  return out;
}

// The degree-k residue cochain (single component).
inline CyclicCochain local_cocycle(const SpectralTriple& t, int k, ResidueStyle style,
                                   double kappa_value = -1.0, int m_cap = 3) {
  CyclicCochain c;
  c.parity = t.parity;
  c.components[k] = [t, k, style, kappa_value, m_cap](const std::vector<Operator>& a) {
    auto terms = local_cocycle_terms(t, k, style, a, kappa_value, m_cap);
    CertifiedValue acc;
    for (const auto& term : terms) acc += term.weight * term.tau;
    return acc;
  };
  return c;
}

}  // namespace ncg
