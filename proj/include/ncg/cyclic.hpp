#pragma once

// Formal cyclic chains over a finite label alphabet, the b and B boundaries,
// Chern character chains, graded cochains over operators, and the pairing.
// Chains are templated on the coefficient ring so the algebraic cancellation
// tests can run over exact rationals; the analytic paths use complex chains.

#include <complex>
#include <cstdio>
#include <functional>
#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "ncg/certified.hpp"
#include "ncg/models.hpp"
#include "ncg/rational.hpp"
#include "ncg/special.hpp"

namespace ncg {

inline const std::string kUnitLabel = "1";

namespace detail {

inline bool coeff_negligible(const Rational& c) { return c.is_zero(); }
inline bool coeff_negligible(const cplx& c) { return std::abs(c) < 1e-14; }

}  // namespace detail

template <class Coeff>
struct CyclicChain {
  struct Term {
    Coeff coeff;
    std::vector<std::string> word;  // a_0, ..., a_l
  };
  std::vector<Term> terms;

  // Collapse duplicate words, apply the normalization (unit label in any
  // position >= 1 kills the word), prune negligible coefficients.
  void normalize() {
    std::map<std::vector<std::string>, Coeff> acc;
    for (auto& t : terms) {
      bool dead = false;
      for (size_t i = 1; i < t.word.size(); ++i)
        if (t.word[i] == kUnitLabel) {
          dead = true;
          break;
        }
      if (dead) continue;
      auto it = acc.find(t.word);
      if (it == acc.end())
        acc.emplace(std::move(t.word), t.coeff);
      else
        it->second += t.coeff;
    }
    terms.clear();
    for (auto& [w, c] : acc)
      if (!detail::coeff_negligible(c)) terms.push_back(Term{c, w});
  }

  bool empty_after_normalize() const {
    CyclicChain c = *this;
    c.normalize();
    return c.terms.empty();
  }
};

// Linear combination of labels: the value of a product in the algebra.
template <class Coeff>
using LabelCombo = std::vector<std::pair<Coeff, std::string>>;

// Multiplication oracle; nullopt means the product leaves the alphabet.
template <class Coeff>
using MultOracle =
    std::function<std::optional<LabelCombo<Coeff>>(const std::string&, const std::string&)>;

template <class Coeff>
CyclicChain<Coeff> boundary_b(const CyclicChain<Coeff>& c, const MultOracle<Coeff>& mult) {
  CyclicChain<Coeff> out;
  for (const auto& t : c.terms) {
    const auto& w = t.word;
    int l = int(w.size()) - 1;
    if (l < 1) continue;
    auto resolve = [&](const std::string& x, const std::string& y) {
      auto r = mult(x, y);
      if (!r) throw std::domain_error("product leaves the alphabet: " + x + " * " + y);
      return *r;
    };
    for (int i = 0; i < l; ++i) {
      auto combo = resolve(w[size_t(i)], w[size_t(i) + 1]);
      for (const auto& [k, label] : combo) {
        typename CyclicChain<Coeff>::Term nt;
        nt.coeff = t.coeff * k;
        if (i % 2 == 1) nt.coeff = -nt.coeff;
        nt.word.reserve(w.size() - 1);
        for (int j = 0; j <= l; ++j) {
          if (j == i)
            nt.word.push_back(label);
          else if (j != i + 1)
            nt.word.push_back(w[size_t(j)]);
        }
        out.terms.push_back(std::move(nt));
      }
    }
    auto wrap = resolve(w[size_t(l)], w[0]);
    for (const auto& [k, label] : wrap) {
      typename CyclicChain<Coeff>::Term nt;
      nt.coeff = t.coeff * k;
      if (l % 2 == 1) nt.coeff = -nt.coeff;
      nt.word.push_back(label);
      for (int j = 1; j < l; ++j) nt.word.push_back(w[size_t(j)]);
      out.terms.push_back(std::move(nt));
    }
  }
  out.normalize();
  return out;
}

template <class Coeff>
CyclicChain<Coeff> boundary_B(const CyclicChain<Coeff>& c) {
  CyclicChain<Coeff> out;
  for (const auto& t : c.terms) {
    const auto& w = t.word;
    int l = int(w.size()) - 1;
    for (int i = 0; i <= l; ++i) {
      typename CyclicChain<Coeff>::Term nt;
      nt.coeff = t.coeff;
      if ((l * i) % 2 == 1) nt.coeff = -nt.coeff;
      nt.word.push_back(kUnitLabel);
      for (int j = 0; j <= l; ++j) nt.word.push_back(w[size_t((i + j) % (l + 1))]);
      out.terms.push_back(std::move(nt));
    }
  }
  out.normalize();
  return out;
}

// -- Chern characters -------------------------------------------------------

// Ch(e) through even degree degree_cap: tr e, then degree-2l components
// (-1)^l (2l)!/l! (e - 1/2) (x) e^(x 2l), expanded over the {1, e} alphabet.
inline CyclicChain<Rational> chern_idempotent_rational(int degree_cap,
                                                       const std::string& e = "e") {
  if (degree_cap % 2 != 0)
    throw std::invalid_argument("chern_idempotent: degree cap must be even");
  CyclicChain<Rational> c;
  c.terms.push_back({Rational{1}, {e}});
  Rational cl{1};
  for (int l = 1; 2 * l <= degree_cap; ++l) {
    // c_l = (-1)^l (2l)!/l!  via  c_l = -2(2l-1) c_{l-1}
    cl = cl * Rational{-2 * (2 * l - 1)};
    std::vector<std::string> word(size_t(2 * l + 1), e);
    c.terms.push_back({cl, word});
    word[0] = kUnitLabel;
    c.terms.push_back({-cl / Rational{2}, word});
  }
  c.normalize();
  return c;
}

template <class Coeff>
CyclicChain<cplx> chain_to_complex(const CyclicChain<Coeff>& c) {
  CyclicChain<cplx> out;
  for (const auto& t : c.terms) {
    if constexpr (std::is_same_v<Coeff, Rational>)
      out.terms.push_back({cplx(t.coeff.to_double(), 0.0), t.word});
    else
      out.terms.push_back({t.coeff, t.word});
  }
  return out;
}

inline CyclicChain<cplx> chern_idempotent(int degree_cap, const std::string& e = "e") {
  return chain_to_complex(chern_idempotent_rational(degree_cap, e));
}

// Ch(u) through odd degree degree_cap: (1/sqrt(2 pi i)) (-1)^l l! on the
// alternating word (u^-1, u)^(l+1).
inline CyclicChain<cplx> chern_invertible(int degree_cap, const std::string& u = "u",
                                          const std::string& uinv = "u^-1") {
  if (degree_cap % 2 != 1)
    throw std::invalid_argument("chern_invertible: degree cap must be odd");
  CyclicChain<cplx> c;
  cplx pref = inv_sqrt_two_pi_i();
  double lf = 1.0;
  for (int l = 0; 2 * l + 1 <= degree_cap; ++l) {
    if (l > 0) lf *= l;
    cplx coeff = pref * ((l % 2 == 0) ? lf : -lf);
    std::vector<std::string> word;
    for (int j = 0; j <= l; ++j) {
      word.push_back(uinv);
      word.push_back(u);
    }
    c.terms.push_back({coeff, word});
  }
  c.normalize();
  return c;
}

// Same without the transcendental prefactor, over Q, for exact cancellation tests.
inline CyclicChain<Rational> chern_invertible_rational(int degree_cap,
                                                       const std::string& u = "u",
                                                       const std::string& uinv = "u^-1") {
  if (degree_cap % 2 != 1)
    throw std::invalid_argument("chern_invertible: degree cap must be odd");
  CyclicChain<Rational> c;
  Rational lf{1};
  for (int l = 0; 2 * l + 1 <= degree_cap; ++l) {
    if (l > 0) lf = lf * Rational{l};
    Rational coeff = (l % 2 == 0) ? lf : -lf;
    std::vector<std::string> word;
    for (int j = 0; j <= l; ++j) {
      word.push_back(uinv);
      word.push_back(u);
    }
    c.terms.push_back({coeff, word});
  }
  c.normalize();
  return c;
}

// Validated entry points: check the algebraic hypothesis on a concrete matrix
// before emitting the formal chain in its label.
inline CyclicChain<cplx> chern_idempotent(int degree_cap, const DenseOperator& e,
                                          const std::string& label = "e") {
  double scale = std::max(1.0, e.m.cwiseAbs().maxCoeff());
  if ((e.m * e.m - e.m).cwiseAbs().maxCoeff() > 1e-10 * scale)
    throw std::invalid_argument("chern_idempotent: not idempotent");
  if (e.m.cwiseAbs().maxCoeff() == 0.0) return CyclicChain<cplx>{};
  return chern_idempotent(degree_cap, label);
}

inline CyclicChain<cplx> chern_invertible(int degree_cap, const DenseOperator& u,
                                          const std::string& label = "u",
                                          const std::string& label_inv = "u^-1") {
  Eigen::JacobiSVD<Eigen::MatrixXcd> svd(u.m);
  double smax = svd.singularValues()(0);
  double smin = svd.singularValues()(svd.singularValues().size() - 1);
  if (smin == 0.0 || smax / smin >= 1e8)
    throw std::domain_error("chern_invertible: singular u");
  return chern_invertible(degree_cap, label, label_inv);
}

// [{"coeff":[re,im],"word":["a0","a1"]},...]
inline std::string chain_to_text(const CyclicChain<cplx>& c) {
  std::string out = "[";
  bool first_term = true;
  for (const auto& t : c.terms) {
    if (!first_term) out += ",";
    first_term = false;
    char buf[64];
    std::snprintf(buf, sizeof buf, "{\"coeff\":[%.17g,%.17g],\"word\":[",
                  t.coeff.real(), t.coeff.imag());
    out += buf;
    bool first_label = true;
    for (const auto& w : t.word) {
      if (!first_label) out += ",";
      first_label = false;
      out += "\"" + w + "\"";
    }
    out += "]}";
  }
  out += "]";
  return out;
}

// -- cochains and the pairing ----------------------------------------------

struct CyclicCochain {
  Parity parity{Parity::odd};
  std::map<int, std::function<CertifiedValue(const std::vector<Operator>&)>> components;
};

using LabelResolver = std::function<Operator(const std::string&)>;

inline CertifiedValue pair(const CyclicCochain& phi, const CyclicChain<cplx>& c,
                           const LabelResolver& resolve) {
  CertifiedValue acc;
  for (const auto& t : c.terms) {
    int k = int(t.word.size()) - 1;
    bool odd = (k % 2 == 1);
    if (odd != (phi.parity == Parity::odd))
      throw std::invalid_argument("parity mismatch between cochain and chain");
    auto it = phi.components.find(k);
    if (it == phi.components.end()) continue;
    std::vector<Operator> ops;
    ops.reserve(t.word.size());
    for (const auto& label : t.word) ops.push_back(resolve(label));
    acc += t.coeff * it->second(ops);
  }
  return acc;
}

namespace detail {

inline Operator unit_like(const Operator& o) {
  if (is_dense(o)) return DenseOperator::identity(as_dense(o).rows());
  return BandOperator::identity();
}

}  // namespace detail

// Transpose boundaries on cochains, defined through duality with b and B on
// chains: (b^t phi)(a_0..a_{k+1}) = phi(b(a_0..a_{k+1})), likewise for B.
inline CyclicCochain cochain_b(const CyclicCochain& phi) {
  CyclicCochain out;
  out.parity = (phi.parity == Parity::odd) ? Parity::even : Parity::odd;
  for (const auto& [k, f] : phi.components) {
    int kk = k;
    auto eval = f;
    out.components[k + 1] = [kk, eval](const std::vector<Operator>& a) {
      if (int(a.size()) != kk + 2)
        throw std::invalid_argument("cochain arity mismatch");
      CertifiedValue acc;
      for (int i = 0; i <= kk; ++i) {
        std::vector<Operator> args;
        args.reserve(size_t(kk) + 1);
        for (int j = 0; j <= kk + 1; ++j) {
          if (j == i)
            args.push_back(compose(a[size_t(i)], a[size_t(i) + 1]));
          else if (j != i + 1)
            args.push_back(a[size_t(j)]);
        }
        acc += cplx((i % 2 == 0) ? 1.0 : -1.0) * eval(args);
      }
      std::vector<Operator> wrap;
      wrap.reserve(size_t(kk) + 1);
      wrap.push_back(compose(a[size_t(kk) + 1], a[0]));
      for (int j = 1; j <= kk; ++j) wrap.push_back(a[size_t(j)]);
      acc += cplx(((kk + 1) % 2 == 0) ? 1.0 : -1.0) * eval(wrap);
      return acc;
    };
  }
  return out;
}

inline CyclicCochain cochain_B(const CyclicCochain& phi) {
  CyclicCochain out;
  out.parity = (phi.parity == Parity::odd) ? Parity::even : Parity::odd;
  for (const auto& [k, f] : phi.components) {
    if (k == 0) continue;
    int l = k - 1;  // arity of the output component
    auto eval = f;
    out.components[l] = [l, eval](const std::vector<Operator>& a) {
      if (int(a.size()) != l + 1)
        throw std::invalid_argument("cochain arity mismatch");
      CertifiedValue acc;
      for (int i = 0; i <= l; ++i) {
        std::vector<Operator> args;
        args.reserve(size_t(l) + 2);
        args.push_back(detail::unit_like(a[0]));
        for (int j = 0; j <= l; ++j) args.push_back(a[size_t((i + j) % (l + 1))]);
        acc += cplx(((l * i) % 2 == 0) ? 1.0 : -1.0) * eval(args);
      }
      return acc;
    };
  }
  return out;
}

}  // namespace ncg
