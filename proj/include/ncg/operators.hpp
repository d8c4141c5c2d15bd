#pragma once

// Backend-polymorphic operator handle.  Most modules work on the concrete
// backend they were designed for; the harness and the generic identities use
// this variant surface.

#include <cmath>
#include <functional>
#include <stdexcept>
#include <variant>

#include "ncg/band_operator.hpp"
#include "ncg/dense_operator.hpp"

namespace ncg {

using Operator = std::variant<DenseOperator, BandOperator>;

inline bool is_dense(const Operator& o) {
  return std::holds_alternative<DenseOperator>(o);
}
inline const DenseOperator& as_dense(const Operator& o) {
  return std::get<DenseOperator>(o);
}
inline const BandOperator& as_band(const Operator& o) {
  return std::get<BandOperator>(o);
}

inline Operator compose(const Operator& a, const Operator& b) {
  if (is_dense(a) != is_dense(b))
    throw std::invalid_argument("mixed-backend composition");
  if (is_dense(a)) return as_dense(a) * as_dense(b);
  return as_band(a) * as_band(b);
}

inline Operator op_add(const Operator& a, const Operator& b) {
  if (is_dense(a) != is_dense(b))
    throw std::invalid_argument("mixed-backend addition");
  if (is_dense(a)) return as_dense(a) + as_dense(b);
  return as_band(a) + as_band(b);
}

inline Operator op_scale(cplx s, const Operator& a) {
  if (is_dense(a)) return s * as_dense(a);
  return s * as_band(a);
}

inline Operator op_adjoint(const Operator& a) {
  if (is_dense(a)) return as_dense(a).adjoint();
  return adjoint(as_band(a));
}

inline Operator op_commutator(const Operator& a, const Operator& b) {
  if (is_dense(a) != is_dense(b))
    throw std::invalid_argument("mixed-backend commutator");
  if (is_dense(a)) return commutator(as_dense(a), as_dense(b));
  return commutator(as_band(a), as_band(b));
}

inline CertifiedValue op_trace(const Operator& a, std::int64_t window) {
  if (is_dense(a)) return dense_trace(as_dense(a));
  return certified_trace(as_band(a), window);
}

// Functional calculus for a diagonal lattice operator.  The result carries no
// decay metadata; callers that need certified tails should use a model builder
// that declares them.
inline BandOperator operator_function(const BandOperator& d,
                                      const std::function<double(double)>& f) {
  if (!d.is_diagonal())
    throw std::invalid_argument("operator_function: banded operator must be diagonal");
  if (!d.has_band(0)) {
    const double v = f(0.0);
    if (!std::isfinite(v))
      throw std::domain_error("operator_function: f undefined on a spectral point");
    return v == 0.0 ? BandOperator::zero() : BandOperator::constant_diagonal(0, cplx(v, 0.0));
  }
  auto g = d.bands.at(0).eval;
  return BandOperator::diagonal([g, f](std::int64_t n) {
    const double v = f(g(n).real());
    if (!std::isfinite(v))
      throw std::domain_error("operator_function: f undefined on a spectral point");
    return cplx(v, 0.0);
  });
}

inline Operator operator_function(const Operator& a,
                                  const std::function<double(double)>& f) {
  if (is_dense(a)) return Operator{operator_function(as_dense(a), f)};
  return Operator{operator_function(as_band(a), f)};
}

inline double op_norm_bound(const Operator& a) {
  if (is_dense(a)) return as_dense(a).norm2();
  return as_band(a).norm_bound();
}

}  // namespace ncg
