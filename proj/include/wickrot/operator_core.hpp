#pragma once

#include "wickrot/core.hpp"

namespace wickrot {

inline CMatrix adjoint(const CMatrix& t) { return t.adjoint(); }

inline TruncatedOperator adjoint(const TruncatedOperator& t) {
  return TruncatedOperator(t.matrix.adjoint(), t.basis, t.label + "*");
}

// <D>^2 = (D D* + D* D)/2, symmetrized so the output is exactly
// conjugate-symmetric at every truncation level.
inline CMatrix mean_square(const CMatrix& d) {
  const CMatrix dh = d.adjoint();
  return symmetrized(0.5 * (d * dh + dh * d));
}

// R_D = (i/2)(D^2 - D*^2); Hermitian in exact arithmetic, so symmetrizing
// only removes gemm rounding.
inline CMatrix curvature_defect(const CMatrix& d) {
  const CMatrix dh = d.adjoint();
  return symmetrized(0.5 * kI * (d * d - dh * dh));
}

enum class WickOrientation { plus, minus };

// plus : D_E = (e^{i pi/4}/sqrt2)(D - iD*) = (D+D*)/2 + i(D-D*)/2
// minus:tilde D_E = (e^{-i pi/4}/sqrt2)(D + iD*) = (D+D*)/2 - i(D-D*)/2
// Assembled from the real/imaginary parts so both outputs are Hermitian
// entrywise exactly, not just up to rounding of a unimodular phase.
inline CMatrix wick_rotate(const CMatrix& d, WickOrientation orient) {
  const CMatrix dh = d.adjoint();
  const CMatrix re = symmetrized(0.5 * (d + dh));
  const CMatrix im = symmetrized(0.5 * kI * (d - dh));
  return orient == WickOrientation::plus ? CMatrix(re + im) : CMatrix(re - im);
}

enum class SymmetryConvention { self_adjoint_unitary, anti_self_adjoint };

// Either a Krein fundamental symmetry J (J* = J, J^2 = 1) or the
// Lorentz-type beta (beta* = -beta, beta^2 = -1); J = i beta converts.
struct FundamentalSymmetry {
  CMatrix matrix;
  SymmetryConvention convention = SymmetryConvention::self_adjoint_unitary;

  FundamentalSymmetry() = default;
  FundamentalSymmetry(CMatrix m, SymmetryConvention c) : matrix(std::move(m)), convention(c) {}

  double residual() const {
    const Eigen::Index n = matrix.rows();
    const CMatrix id = CMatrix::Identity(n, n);
    if (convention == SymmetryConvention::self_adjoint_unitary) {
      return std::max((matrix - matrix.adjoint()).norm(), (matrix * matrix - id).norm()) /
             std::max(1.0, matrix.norm());
    }
    return std::max((matrix + matrix.adjoint()).norm(), (matrix * matrix + id).norm()) /
           std::max(1.0, matrix.norm());
  }

  FundamentalSymmetry as_self_adjoint_unitary() const {
    if (convention == SymmetryConvention::self_adjoint_unitary) return *this;
    return FundamentalSymmetry(kI * matrix, SymmetryConvention::self_adjoint_unitary);
  }
};

// Krein adjoint T+ = J T* J.
inline CMatrix krein_adjoint(const CMatrix& t, const FundamentalSymmetry& sym) {
  const FundamentalSymmetry j = sym.as_self_adjoint_unitary();
  if (j.matrix.rows() != t.rows() || j.matrix.cols() != t.cols())
    throw std::invalid_argument("krein_adjoint: dimension mismatch");
  return j.matrix * t.adjoint() * j.matrix;
}

struct DerivedOperators {
  CMatrix mean_square;
  CMatrix curvature_defect;
  CMatrix wick_plus;
  CMatrix wick_minus;
};

inline DerivedOperators derive_operators(const CMatrix& d) {
  DerivedOperators out;
  out.mean_square = mean_square(d);
  out.curvature_defect = curvature_defect(d);
  out.wick_plus = wick_rotate(d, WickOrientation::plus);
  out.wick_minus = wick_rotate(d, WickOrientation::minus);
  return out;
}

namespace detail {

inline HermitianEigen resolvent_eigen(const CMatrix& d, double herm_tol = 1e-10) {
  return hermitian_eigen(d, herm_tol);
}

// (1 + D^2)^p from an eigendecomposition of Hermitian D.
inline CMatrix one_plus_square_power(const HermitianEigen& eig, double p) {
  RVector w(eig.values.size());
  for (Eigen::Index i = 0; i < w.size(); ++i)
    w(i) = std::pow(1.0 + eig.values(i) * eig.values(i), p);
  return eig.vectors * w.asDiagonal() * eig.vectors.adjoint();
}

}  // namespace detail

// delta(T) = [(1+D^2)^{1/2}, T], iterated `order` times. D must be Hermitian
// at the truncation (apply to <D> or D_E, never to a raw non-normal D).
inline CMatrix delta_map(const CMatrix& t, const CMatrix& d, int order = 1) {
  if (order < 0) throw std::invalid_argument("delta_map: order must be >= 0");
  if (order == 0) return t;
  const auto eig = detail::resolvent_eigen(d);
  const CMatrix root = detail::one_plus_square_power(eig, 0.5);
  CMatrix cur = t;
  for (int k = 0; k < order; ++k) cur = root * cur - cur * root;
  return cur;
}

enum class LRSide { left, right };

// L(T) = (1+D^2)^{-1/2}[D^2, T],  R(T) = [D^2, T](1+D^2)^{-1/2}.
inline CMatrix lr_map(const CMatrix& t, const CMatrix& d, LRSide side) {
  const auto eig = detail::resolvent_eigen(d);
  const CMatrix invroot = detail::one_plus_square_power(eig, -0.5);
  const CMatrix dsq = d * d;
  const CMatrix comm = dsq * t - t * dsq;
  return side == LRSide::left ? CMatrix(invroot * comm) : CMatrix(comm * invroot);
}

// sigma^z(T) = (1+D^2)^{z/2} T (1+D^2)^{-z/2}, the complex one parameter group.
inline CMatrix sigma_conjugate(const CMatrix& t, const CMatrix& d, Complex z) {
  const auto eig = detail::resolvent_eigen(d);
  const Eigen::Index n = eig.values.size();
  CMatrix core = eig.vectors.adjoint() * t * eig.vectors;
  for (Eigen::Index i = 0; i < n; ++i) {
    for (Eigen::Index j = 0; j < n; ++j) {
      const double ratio = (1.0 + eig.values(i) * eig.values(i)) /
                           (1.0 + eig.values(j) * eig.values(j));
      core(i, j) *= std::pow(ratio, 0.5 * z);
    }
  }
  return eig.vectors * core * eig.vectors.adjoint();
}

// Hermitian functional calculus f(H); exact on diagonal input.
inline CMatrix func_calculus(const CMatrix& h, const std::function<double(double)>& f,
                             double herm_tol = 1e-10) {
  return apply_spectral_function(hermitian_eigen(h, herm_tol), f);
}

}  // namespace wickrot
