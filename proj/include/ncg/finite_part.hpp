#pragma once

// Finite-part extraction from a small-epsilon sample of a quantity with a
// declared singular expansion.  The samples are fit by least squares against
// the declared basis and the coefficient of the constant function is the
// finite part.  Ill-conditioning or underdetermination is an error, never a
// silent answer.

#include <Eigen/Dense>
#include <Eigen/SVD>
#include <cmath>
#include <complex>
#include <limits>
#include <stdexcept>
#include <utility>
#include <vector>

#include "ncg/certified.hpp"

namespace ncg {

// One basis function eps^(-lam) * log(eps)^logpow * eps^polypow.
struct SingularTerm {
  double lam{0.0};
  int logpow{0};
  int polypow{0};

  double eval(double eps) const {
    double v = std::pow(eps, double(polypow) - lam);
    for (int j = 0; j < logpow; ++j) v *= std::log(eps);
    return v;
  }
  bool is_constant() const { return lam == 0.0 && logpow == 0 && polypow == 0; }
};

struct SingularBasis {
  std::vector<SingularTerm> terms;

  // Divergent powers eps^(-lam) for each lam, a log term, and 1.
  static SingularBasis with_powers(const std::vector<double>& lams) {
    SingularBasis b;
    for (double l : lams) b.terms.push_back({l, 0, 0});
    b.terms.push_back({0.0, 1, 0});
    b.terms.push_back({0.0, 0, 0});
    return b;
  }

  // The standard scale basis: 1/eps, log eps, 1, eps, eps^2.
  static SingularBasis standard() {
    SingularBasis b = with_powers({1.0});
    b.terms.push_back({0.0, 0, 1});
    b.terms.push_back({0.0, 0, 2});
    return b;
  }

  // Minimal basis for the lattice circle pairings: 1/eps, log eps, 1.
  static SingularBasis circle_index() { return with_powers({1.0}); }
};

struct FinitePartResult {
  cplx finite;
  double condition{0.0};
  double residual{0.0};
  std::vector<cplx> coefficients;
};

inline FinitePartResult finite_part(const std::vector<std::pair<double, cplx>>& samples,
                                    const SingularBasis& basis) {
  size_t nb = basis.terms.size();
  if (samples.size() < nb + 2) throw std::invalid_argument("basis inadequate");
  size_t ci = nb;
  for (size_t j = 0; j < nb; ++j)
    if (basis.terms[j].is_constant()) ci = j;
  if (ci == nb) throw std::invalid_argument("basis lacks a constant term");

  Eigen::MatrixXd A(Eigen::Index(samples.size()), Eigen::Index(nb));
  Eigen::VectorXcd y(Eigen::Index(samples.size()));
  for (size_t i = 0; i < samples.size(); ++i) {
    for (size_t j = 0; j < nb; ++j)
      A(Eigen::Index(i), Eigen::Index(j)) = basis.terms[j].eval(samples[i].first);
    y(Eigen::Index(i)) = samples[i].second;
  }

  Eigen::JacobiSVD<Eigen::MatrixXd> svd(A, Eigen::ComputeThinU | Eigen::ComputeThinV);
  double smax = svd.singularValues()(0);
  double smin = svd.singularValues()(svd.singularValues().size() - 1);
  FinitePartResult r;
  r.condition = (smin > 0.0) ? smax / smin : std::numeric_limits<double>::infinity();
  if (!(r.condition < 1e10)) throw std::domain_error("basis inadequate");

  Eigen::VectorXcd c = svd.solve(y);
  r.residual = (A * c - y).norm();
  r.coefficients.assign(c.data(), c.data() + c.size());
  r.finite = r.coefficients[ci];
  return r;
}

}  // namespace ncg
