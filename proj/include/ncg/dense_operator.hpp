#pragma once

// Finite-dimensional backend.  Thin wrapper over Eigen matrices; the point of
// the wrapper is the contract surface (hermitian spectra with reconstruction
// guarantees, relative-threshold kernel counting), not the arithmetic.

#include <Eigen/Dense>
#include <Eigen/SVD>
#include <complex>
#include <functional>
#include <stdexcept>
#include <vector>

#include "ncg/certified.hpp"

namespace ncg {

struct DenseOperator {
  Eigen::MatrixXcd m;

  DenseOperator() = default;
  explicit DenseOperator(Eigen::MatrixXcd mat) : m(std::move(mat)) {}

  Eigen::Index rows() const { return m.rows(); }
  Eigen::Index cols() const { return m.cols(); }

  static DenseOperator identity(Eigen::Index n) {
    return DenseOperator{Eigen::MatrixXcd::Identity(n, n)};
  }
  static DenseOperator zero(Eigen::Index r, Eigen::Index c) {
    return DenseOperator{Eigen::MatrixXcd::Zero(r, c)};
  }

  DenseOperator adjoint() const { return DenseOperator{m.adjoint()}; }

  friend DenseOperator operator*(const DenseOperator& a, const DenseOperator& b) {
    if (a.cols() != b.rows())
      throw std::invalid_argument("dense compose: dimension mismatch");
    return DenseOperator{a.m * b.m};
  }
  friend DenseOperator operator+(const DenseOperator& a, const DenseOperator& b) {
    if (a.rows() != b.rows() || a.cols() != b.cols())
      throw std::invalid_argument("dense add: dimension mismatch");
    return DenseOperator{a.m + b.m};
  }
  friend DenseOperator operator-(const DenseOperator& a, const DenseOperator& b) {
    if (a.rows() != b.rows() || a.cols() != b.cols())
      throw std::invalid_argument("dense sub: dimension mismatch");
    return DenseOperator{a.m - b.m};
  }
  friend DenseOperator operator*(cplx s, const DenseOperator& a) {
    return DenseOperator{s * a.m};
  }

  cplx trace() const {
    if (rows() != cols()) throw std::invalid_argument("trace of non-square operator");
    return m.trace();
  }
  double norm2() const {  // largest singular value
    if (m.size() == 0) return 0.0;
    return m.jacobiSvd().singularValues()(0);
  }
};

inline DenseOperator commutator(const DenseOperator& a, const DenseOperator& b) {
  return a * b - b * a;
}

struct HermitianSpectrum {
  std::vector<double> eigenvalues;
  DenseOperator transform;  // columns are eigenvectors
};

inline HermitianSpectrum hermitian_spectrum(const DenseOperator& h) {
  if (h.rows() != h.cols())
    throw std::invalid_argument("hermitian_spectrum: non-square input");
  double scale = h.m.cwiseAbs().maxCoeff();
  double defect = (h.m - h.m.adjoint()).cwiseAbs().maxCoeff();
  if (defect > 1e-12 * std::max(1.0, scale))
    throw std::invalid_argument("hermitian_spectrum: non-Hermitian input");
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(h.m);
  if (es.info() != Eigen::Success)
    throw std::runtime_error("hermitian_spectrum: eigensolver failed");
  HermitianSpectrum s;
  s.eigenvalues.assign(es.eigenvalues().data(),
                       es.eigenvalues().data() + es.eigenvalues().size());
  s.transform = DenseOperator{es.eigenvectors()};
  return s;
}

// f applied on the spectrum of a self-adjoint operator.
inline DenseOperator operator_function(const DenseOperator& h,
                                       const std::function<double(double)>& f) {
  HermitianSpectrum s = hermitian_spectrum(h);
  Eigen::VectorXcd d(s.eigenvalues.size());
  for (Eigen::Index i = 0; i < d.size(); ++i) {
    double v = f(s.eigenvalues[size_t(i)]);
    if (!std::isfinite(v))
      throw std::domain_error("operator_function: f undefined on a spectral point");
    d(i) = v;
  }
  return DenseOperator{s.transform.m * d.asDiagonal() * s.transform.m.adjoint()};
}

// Number of singular values below tol * sigma_max; for T = 0 that is every
// (reported) singular value, which makes the kernel the whole domain.
inline int kernel_dimension(const DenseOperator& t, double tol = 1e-8) {
  if (tol <= 0.0) throw std::invalid_argument("kernel_dimension: tol must be positive");
  if (t.cols() == 0) return 0;
  if (t.rows() == 0) return int(t.cols());
  Eigen::BDCSVD<Eigen::MatrixXcd> svd(t.m);
  const auto& sv = svd.singularValues();
  double smax = sv.size() ? sv(0) : 0.0;
  double thresh = tol * (smax > 0.0 ? smax : 1.0);
  int rank = 0;
  for (Eigen::Index i = 0; i < sv.size(); ++i)
    if (sv(i) >= thresh) ++rank;
  return int(t.cols()) - rank;
}

inline CertifiedValue dense_trace(const DenseOperator& t) {
  return CertifiedValue{t.trace(), 0.0};
}

}  // namespace ncg
