#pragma once

// Every trace over the infinite lattice comes back as a value plus a rigorous
// bound on everything the truncation window did not see.

#include <cmath>
#include <complex>

namespace ncg {

using cplx = std::complex<double>;

struct CertifiedValue {
  cplx value{0.0, 0.0};
  double tail_bound{0.0};

  CertifiedValue& operator+=(const CertifiedValue& o) {
    value += o.value;
    tail_bound += o.tail_bound;
    return *this;
  }
  friend CertifiedValue operator+(CertifiedValue a, const CertifiedValue& b) {
    return a += b;
  }
  friend CertifiedValue operator-(CertifiedValue a, const CertifiedValue& b) {
    a.value -= b.value;
    a.tail_bound += b.tail_bound;
    return a;
  }
  friend CertifiedValue operator*(const cplx& s, CertifiedValue v) {
    v.value *= s;
    v.tail_bound *= std::abs(s);
    return v;
  }
};

// |value| can exceed |true value| by at most tail_bound; handy upper bound.
inline double certified_abs_max(const CertifiedValue& v) {
  return std::abs(v.value) + v.tail_bound;
}

}  // namespace ncg
