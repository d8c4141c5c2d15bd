#pragma once

// Heat-kernel (JLO-type) cochains.  The simplex integral of a product of
// operators interleaved with heat slices reduces, path by path in the banded
// case and eigentriple by eigentriple in the dense case, to a divided
// difference of exp(-x) at the squared-eigenvalue nodes scaled by total time.
// Clustered nodes switch to a confluent Taylor evaluation.  Every trace is
// checked on the spot against the simplex volume bound
//   |integral| <= (1/m!) prod||F_i|| Tr e^(-T D^2),
// which is a hard assertion, not a diagnostic.

#include <array>
#include <cmath>
#include <complex>
#include <functional>
#include <stdexcept>
#include <vector>

#include "ncg/cyclic.hpp"
#include "ncg/models.hpp"
#include "ncg/operators.hpp"

namespace ncg {

// -- divided differences of exp(-x) -----------------------------------------

namespace detail {

// Complete homogeneous symmetric polynomials h_0..h_R of the given values.
inline std::vector<double> complete_homogeneous(const std::vector<double>& v, int R) {
  std::vector<double> h(size_t(R) + 1, 0.0);
  h[0] = 1.0;
  for (double x : v)
    for (int r = 1; r <= R; ++r) h[size_t(r)] += x * h[size_t(r - 1)];
  return h;
}

// f[y_i..y_j] for f = exp(-x) over one cluster of nearby nodes.  Expanding
// about the midrange c gives
//   f[y_i..y_j] = (-1)^q e^{-c} sum_{r>=0} (-1)^r h_r(y-c) / (q+r)!
// with q = j-i, and |h_r| <= binom(q+r,r) rho^r for cluster radius rho, so
// every term is bounded by rho^r/(q! r!).  That keeps the bracket free of the
// subtractive cancellation the recursive rule suffers at high order, at any
// cluster width the trace code produces.  Exact for coincident nodes.
inline double exp_dd_cluster(const std::vector<double>& xs, size_t i, size_t j) {
  size_t q = j - i;
  double c = 0.5 * (xs[i] + xs[j]);  // xs sorted, so this is the midrange
  double rho = 0.5 * (xs[j] - xs[i]);
  std::vector<double> z;
  z.reserve(q + 1);
  for (size_t t = i; t <= j; ++t) z.push_back(xs[t] - c);
  int cap = std::min(200, int(2.72 * rho) + 35);
  auto h = complete_homogeneous(z, cap);
  double invfact = 1.0;  // 1/(q+r)!
  for (size_t m = 2; m <= q; ++m) invfact /= double(m);
  double acc = 0.0;
  double sign = 1.0;
  double tb = 1.0;  // rho^r / r!
  double tb_sum = 0.0;
  for (int r = 0; r <= cap; ++r) {
    if (r > 0) {
      invfact /= double(q + size_t(r));
      tb *= rho / double(r);
      sign = -sign;
    }
    acc += sign * h[size_t(r)] * invfact;
    tb_sum += tb;
    if (tb < 1e-19 * tb_sum) break;
  }
  double par = (q % 2 == 0) ? 1.0 : -1.0;
  return par * std::exp(-c) * acc;
}

}  // namespace detail

// Divided difference of exp(-x) over the given real nodes (any order).
// Sorted nodes are grouped into clusters wherever consecutive gaps fall
// below one.  Spans inside a cluster would make the recursive rule divide
// by small separations, which at orders past ten amplifies roundoff beyond
// the size of the result; those spans use the series rule instead, and the
// recursion only ever divides across clusters, by separations of at least
// one, which amplify nothing.
inline double exp_divided_difference(std::vector<double> xs) {
  if (xs.empty()) throw std::invalid_argument("divided difference of no nodes");
  std::sort(xs.begin(), xs.end());
  size_t n = xs.size();
  std::vector<size_t> cluster(n, 0);
  for (size_t i = 1; i < n; ++i)
    cluster[i] = cluster[i - 1] + ((xs[i] - xs[i - 1] < 1.0) ? 0 : 1);
  // table[i] holds f[x_i .. x_{i+len}] as len grows
  std::vector<double> table(n);
  for (size_t i = 0; i < n; ++i) table[i] = std::exp(-xs[i]);
  for (size_t len = 1; len < n; ++len) {
    for (size_t i = 0; i + len < n; ++i) {
      size_t j = i + len;
      if (cluster[i] == cluster[j])
        table[i] = detail::exp_dd_cluster(xs, i, j);
      else
        table[i] = (table[i + 1] - table[i]) / (xs[j] - xs[i]);
    }
  }
  return table[0];
}

// Integral of exp(-sum t_i nu_i) over the standard k-simplex in the t's:
// equals (-1)^k times the divided difference at the nodes.
inline double simplex_exponential_integral(const std::vector<double>& nodes) {
  int k = int(nodes.size()) - 1;
  double dd = exp_divided_difference(nodes);
  return (k % 2 == 0) ? dd : -dd;
}

// -- simplex heat traces ----------------------------------------------------

namespace detail {

// Certified bound |entry at column q| <= c0 + c1 |q| for one band offset.
struct EntryBound {
  double c0{0.0};
  double c1{0.0};
};

inline EntryBound offset_entry_bound(const BandOperator& op, int d) {
  auto it = op.bands.find(d);
  if (it == op.bands.end()) return {};
  const auto& o = it->second;
  if (o.deviation) return {op.offset_sup_bound(d), 0.0};
  if (o.series && o.series->pos.lead >= -1 && o.series->neg.lead >= -1) {
    double xm = std::max(o.series->x_min, 1.0);
    double c1 = std::max(o.series->pos.amp(xm), o.series->neg.amp(xm));
    double c0 = 0.0;
    for (std::int64_t n = -std::int64_t(std::ceil(xm)); n <= std::int64_t(std::ceil(xm)); ++n)
      c0 = std::max(c0, std::abs(o.eval(n)));
    return {c0, c1};
  }
  throw std::domain_error("heat trace: factor without certifiable bound");
}

// sum_{x > W} x^deg * exp(-rate (x - shift)^2), deg in {0, 1}; W > shift.
inline double gaussian_moment_tail(double W, double rate, double shift, int deg) {
  DecayEnvelope g = DecayEnvelope::gaussian(1.0, rate, shift);
  double t0 = g.tail_one_side(W);
  if (deg == 0) return t0;
  // x e^(-r(x-s)^2) = (x-s) e^(...) + s e^(...); the first part is bounded by
  // the integral of u e^(-r u^2) from W-s-1 (the summand decreases past the peak).
  double y = W - shift;
  double first = std::exp(-rate * std::max(0.0, y - 1.0) * std::max(0.0, y - 1.0)) /
                 (2.0 * rate);
  return first + shift * t0;
}

}  // namespace detail

// Trace of F_0 e^(-t_0 T D^2) F_1 e^(-t_1 T D^2) ... F_m e^(-t_m T D^2)
// integrated over the standard simplex, for banded factors against the
// diagonal lattice Dirac (d(n) = n).  Returns a certified value; throws
// logic_error if the result violates the simplex volume bound.
inline CertifiedValue simplex_heat_trace(const std::vector<BandOperator>& factors,
                                         double T, std::int64_t window) {
  if (factors.empty()) throw std::invalid_argument("heat trace: no factors");
  int m = int(factors.size()) - 1;

  // Enumerate offset paths of factors 1..m; the offset of factor 0 closes the loop.
  struct Path {
    std::vector<int> d;  // offsets of factors 1..m
    int d0;
  };
  std::vector<Path> paths;
  {
    std::vector<int> cur;
    std::function<void(int)> rec = [&](int i) {
      if (i > m) {
        int s = 0;
        for (int x : cur) s += x;
        if (factors[0].has_band(-s)) paths.push_back(Path{cur, -s});
        return;
      }
      for (int d : factors[size_t(i)].offsets()) {
        cur.push_back(d);
        rec(i + 1);
        cur.pop_back();
      }
    };
    rec(1);
  }

  int B = 0;
  for (const auto& f : factors) B += f.max_abs_offset();

  CertifiedValue out;
  std::vector<double> nodes(size_t(m) + 1);
  std::vector<std::int64_t> pos(size_t(m) + 1);
  for (const auto& path : paths) {
    // Certified entry bounds along this path.
    double bounded_prod = 1.0, lin_c0 = 0.0, lin_c1 = 0.0;
    int linear_count = 0;
    {
      std::vector<detail::EntryBound> bounds;
      bounds.push_back(detail::offset_entry_bound(factors[0], path.d0));
      for (int i = 1; i <= m; ++i)
        bounds.push_back(detail::offset_entry_bound(factors[size_t(i)], path.d[size_t(i - 1)]));
      for (const auto& b : bounds) {
        if (b.c1 > 0.0) {
          ++linear_count;
          lin_c0 = b.c0;
          lin_c1 = b.c1;
        } else {
          bounded_prod *= b.c0;
        }
      }
      if (linear_count > 1)
        throw std::domain_error("heat trace: more than one unbounded factor");
    }

    for (std::int64_t n = -window; n <= window; ++n) {
      // positions q_i of the heat slices, walking the word from the right
      std::int64_t q = n;
      pos[size_t(m)] = n;
      cplx prod{1.0};
      for (int i = m; i >= 1; --i) {
        int d = path.d[size_t(i - 1)];
        prod *= factors[size_t(i)].bands.at(d).eval(q);
        q += d;
        pos[size_t(i - 1)] = q;
      }
      prod *= factors[0].bands.at(path.d0).eval(q);
      if (prod == cplx{0.0}) continue;
      for (int i = 0; i <= m; ++i) {
        double dn = double(pos[size_t(i)]);
        nodes[size_t(i)] = T * dn * dn;
      }
      out.value += prod * simplex_exponential_integral(nodes);
    }

    // Tail: |integral| <= (1/m!) exp(-T min nu) and min |pos| >= |n| - B,
    // while the column of an unbounded factor sits within |n| + B.
    double fm = factorial(m);
    double g0 = detail::gaussian_moment_tail(double(window), T, double(B), 0);
    double per_n = linear_count > 0
                       ? (lin_c0 + lin_c1 * double(B)) * g0 +
                             lin_c1 * detail::gaussian_moment_tail(double(window), T,
                                                                   double(B), 1)
                       : g0;
    out.tail_bound += 2.0 * bounded_prod * per_n / fm;
  }

  // Volume bound (hard assertion) when every factor has a finite norm bound.
  bool all_bounded = true;
  double norm_prod = 1.0;
  for (const auto& f : factors) {
    try {
      norm_prod *= f.norm_bound();
    } catch (const std::domain_error&) {
      all_bounded = false;
      break;
    }
  }
  if (all_bounded) {
    CertifiedValue heat = certified_trace(circle_heat(T), window);
    double bound = norm_prod * certified_abs_max(heat) / factorial(m);
    if (std::abs(out.value) - out.tail_bound > bound * (1.0 + 1e-12) + 1e-300)
      throw std::logic_error("heat trace bound violated");
  }
  return out;
}

// Dense version: factors in the given order, heat slices from the spectrum of D.
inline CertifiedValue simplex_heat_trace(const std::vector<DenseOperator>& factors,
                                         const DenseOperator& D, double T) {
  if (factors.empty()) throw std::invalid_argument("heat trace: no factors");
  int m = int(factors.size()) - 1;
  HermitianSpectrum sp = hermitian_spectrum(D);
  Eigen::Index dim = D.rows();
  double paths = std::pow(double(dim), double(m + 1));
  if (paths > 5e7) throw std::length_error("heat trace: dimension/degree too large");

  std::vector<Eigen::MatrixXcd> F;
  F.reserve(factors.size());
  for (const auto& f : factors)
    F.push_back(sp.transform.m.adjoint() * f.m * sp.transform.m);

  std::vector<double> nu(static_cast<size_t>(dim));
  for (Eigen::Index i = 0; i < dim; ++i)
    nu[size_t(i)] = T * sp.eigenvalues[size_t(i)] * sp.eigenvalues[size_t(i)];

  CertifiedValue out;
  std::vector<Eigen::Index> idx(size_t(m) + 1, 0);
  std::vector<double> nodes(size_t(m) + 1);
  while (true) {
    cplx prod;
    if (m == 0) {
      prod = F[0](idx[0], idx[0]);
    } else {
      prod = F[0](idx[0], idx[1]);
      for (int i = 1; i < m; ++i) prod *= F[size_t(i)](idx[size_t(i)], idx[size_t(i + 1)]);
      prod *= F[size_t(m)](idx[size_t(m)], idx[0]);
    }
    if (prod != cplx{0.0}) {
      for (int i = 0; i < m; ++i) nodes[size_t(i)] = nu[size_t(idx[size_t(i + 1)])];
      nodes[size_t(m)] = nu[size_t(idx[0])];
      out.value += prod * simplex_exponential_integral(nodes);
    }
    int i = m;
    for (; i >= 0; --i) {
      if (++idx[size_t(i)] < dim) break;
      idx[size_t(i)] = 0;
    }
    if (i < 0) break;
  }

  double norm_prod = 1.0;
  for (const auto& f : factors) norm_prod *= f.norm2();
  double heat = 0.0;
  for (double x : nu) heat += std::exp(-x);
  if (std::abs(out.value) > norm_prod * heat / factorial(m) * (1.0 + 1e-12) + 1e-300)
    throw std::logic_error("heat trace bound violated");
  return out;
}

// -- cochains ---------------------------------------------------------------

// Degree-k heat cochain at scale eps: on (a_0..a_k) the simplex trace of
// [gamma] a_0, [eps D, a_1], ..., [eps D, a_k] with total time eps^2; odd
// prefactor sqrt(2i), even prefactor 1.
inline CyclicCochain heat_cochain(const SpectralTriple& t, int k, double eps,
                                  std::int64_t window = 256) {
  if ((k % 2 == 0) != (t.parity == Parity::even))
    throw std::invalid_argument("heat cochain: degree parity mismatch");
  CyclicCochain c;
  c.parity = t.parity;
  double T = eps * eps;
  if (t.dense_backend) {
    DenseOperator D = as_dense(t.D);
    DenseOperator G = as_dense(*t.grading);
    c.components[k] = [k, eps, T, D, G](const std::vector<Operator>& a) {
      std::vector<DenseOperator> f;
      f.push_back(G * as_dense(a[0]));
      for (int i = 1; i <= k; ++i)
        f.push_back(cplx{eps} * commutator(D, as_dense(a[size_t(i)])));
      return simplex_heat_trace(f, D, T);
    };
  } else {
    c.components[k] = [k, eps, T, window](const std::vector<Operator>& a) {
      std::vector<BandOperator> f;
      f.push_back(as_band(a[0]));
      for (int i = 1; i <= k; ++i)
        f.push_back(cplx{eps} * circle_dirac_commutator(as_band(a[size_t(i)])));
      return sqrt_two_i() * simplex_heat_trace(f, T, window);
    };
  }
  return c;
}

// Degree-k transgression cochain at scale eps (opposite parity): the extra
// bare D is cycled through every slot with alternating sign.
inline CyclicCochain transgression_cochain(const SpectralTriple& t, int k, double eps,
                                           std::int64_t window = 256) {
  CyclicCochain c;
  c.parity = (k % 2 == 1) ? Parity::odd : Parity::even;
  double T = eps * eps;
  if (t.dense_backend) {
    DenseOperator D = as_dense(t.D);
    DenseOperator G = as_dense(*t.grading);
    c.components[k] = [k, eps, T, D, G](const std::vector<Operator>& a) {
      CertifiedValue acc;
      for (int l = 0; l <= k; ++l) {
        std::vector<DenseOperator> f;
        f.push_back(G * as_dense(a[0]));
        for (int i = 1; i <= l; ++i)
          f.push_back(cplx{eps} * commutator(D, as_dense(a[size_t(i)])));
        f.push_back(D);
        for (int i = l + 1; i <= k; ++i)
          f.push_back(cplx{eps} * commutator(D, as_dense(a[size_t(i)])));
        acc += cplx(l % 2 == 0 ? 1.0 : -1.0) * simplex_heat_trace(f, D, T);
      }
      return acc;
    };
  } else {
    BandOperator D = as_band(t.D);
    c.components[k] = [k, eps, T, D, window](const std::vector<Operator>& a) {
      CertifiedValue acc;
      for (int l = 0; l <= k; ++l) {
        std::vector<BandOperator> f;
        f.push_back(as_band(a[0]));
        for (int i = 1; i <= l; ++i)
          f.push_back(cplx{eps} * circle_dirac_commutator(as_band(a[size_t(i)])));
        f.push_back(D);
        for (int i = l + 1; i <= k; ++i)
          f.push_back(cplx{eps} * circle_dirac_commutator(as_band(a[size_t(i)])));
        acc += cplx(l % 2 == 0 ? 1.0 : -1.0) * simplex_heat_trace(f, T, window);
      }
      return sqrt_two_i() * acc;
    };
  }
  return c;
}

}  // namespace ncg
