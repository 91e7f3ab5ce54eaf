#pragma once

#include "wickrot/core.hpp"

#include <cmath>
#include <vector>

namespace wickrot::hermite {

// Values of the L^2-normalized Hermite functions h_0..h_{nmax-1} at x,
// h_{n+1} = sqrt(2/(n+1)) x h_n - sqrt(n/(n+1)) h_{n-1}.
// Deep in the classically forbidden region h_0 underflows; the recurrence is
// carried with a running rescale so values re-emerge once they become
// representable, instead of sticking at an exact zero.
inline void hermite_function_values(int nmax, double x, double* out) {
  const double h0 = std::pow(M_PI, -0.25) * std::exp(-0.5 * x * x);
  double scale_exp = 0.0;  // stored = true * e^{scale_exp}
  double a, b;             // h_{n-1}, h_n (stored scale)
  if (h0 > 0.0) {
    a = h0;
  } else {
    // restart the recurrence from log values
    scale_exp = 0.25 * std::log(M_PI) + 0.5 * x * x;
    a = 1.0;
  }
  auto emit = [&](int n, double stored) {
    if (n < nmax) {
      if (scale_exp == 0.0)
        out[n] = stored;
      else {
        const double lg = std::log(std::abs(stored) + 1e-320) - scale_exp;
        out[n] = lg < -745.0 ? 0.0 : (stored < 0 ? -1.0 : 1.0) * std::exp(lg);
      }
    }
  };
  emit(0, a);
  b = std::sqrt(2.0) * x * a;
  emit(1, b);
  const int top = nmax - 1;
  for (int n = 1; n < top; ++n) {
    double c = std::sqrt(2.0 / (n + 1)) * x * b - std::sqrt(double(n) / (n + 1)) * a;
    a = b;
    b = c;
    if (scale_exp > 0.0) {
      const double m = std::max(std::abs(a), std::abs(b));
      if (m > 1e100) {
        const double down = std::min(scale_exp, 230.0);  // e^230 ~ 1e100
        const double f = std::exp(-down);
        a *= f;
        b *= f;
        scale_exp -= down;
      }
    } else {
      const double m = std::max(std::abs(a), std::abs(b));
      if (m != 0.0 && m < 1e-140) {
        a *= 1e140;
        b *= 1e140;
        scale_exp += 140.0 * std::log(10.0);
      }
    }
    emit(n + 1, b);
  }
}

inline RMatrix hermite_function_table(int nmax, const RVector& x) {
  RMatrix out(nmax, x.size());
  std::vector<double> buf(nmax);
  for (Eigen::Index i = 0; i < x.size(); ++i) {
    hermite_function_values(nmax, x(i), buf.data());
    for (int n = 0; n < nmax; ++n) out(n, i) = buf[n];
  }
  return out;
}

namespace detail {

inline RVector jacobi_eigenvalues(const RVector& diag, const RVector& subdiag) {
  Eigen::SelfAdjointEigenSolver<RMatrix> es;
  es.computeFromTridiagonal(diag, subdiag, Eigen::EigenvaluesOnly);
  if (es.info() != Eigen::Success)
    throw std::runtime_error("jacobi_eigenvalues: tridiagonal QL failed");
  return es.eigenvalues();
}

}  // namespace detail

// K-point Gauss-Hermite rule for the weight e^{-x^2}, stored with the
// *modified* weights w_i e^{x_i^2} = 1 / sum_{n<K} h_n(x_i)^2, which stay
// O(1) and pair with Hermite-function values instead of raw polynomials.
struct GaussHermiteRule {
  RVector nodes;
  RVector modified_weights;
  int size() const { return static_cast<int>(nodes.size()); }

  // integral of f(x) e^{-x^2} when f is supplied as p(x) e^{x^2} h-pairings;
  // for direct use: sum_i modified_weights_i * phi(x_i) approximates
  // integral phi(x) dx whenever phi decays like a Hermite-span function.
};

inline GaussHermiteRule gauss_hermite(int k) {
  if (k < 1) throw std::invalid_argument("gauss_hermite: need k >= 1");
  RVector diag = RVector::Zero(k);
  RVector sub(k > 1 ? k - 1 : 0);
  for (int j = 1; j < k; ++j) sub(j - 1) = std::sqrt(0.5 * j);
  GaussHermiteRule rule;
  rule.nodes = k == 1 ? RVector::Zero(1) : detail::jacobi_eigenvalues(diag, sub);
  rule.modified_weights = RVector(k);
  std::vector<double> h(k);
  for (int i = 0; i < k; ++i) {
    hermite_function_values(k, rule.nodes(i), h.data());
    double s = 0.0;
    for (int n = 0; n < k; ++n) s += h[n] * h[n];
    rule.modified_weights(i) = s > 0.0 ? 1.0 / s : 0.0;
  }
  return rule;
}

// Truncated annihilation matrix a(i, i+1) = sqrt(i+1).
inline CMatrix annihilation(int n) {
  CMatrix a = CMatrix::Zero(n, n);
  for (int i = 0; i + 1 < n; ++i) a(i, i + 1) = std::sqrt(double(i + 1));
  return a;
}

inline CMatrix position_matrix(int n) {
  const CMatrix a = annihilation(n);
  return CMatrix((a + a.adjoint()) / std::sqrt(2.0));
}

inline CMatrix derivative_matrix(int n) {
  const CMatrix a = annihilation(n);
  return CMatrix((a - a.adjoint()) / std::sqrt(2.0));
}

// Multiplication operator <h_m, g h_n> in the Hermite basis, assembled by
// Gauss-Hermite quadrature (4N nodes unless overridden).
inline CMatrix multiplication_operator(int n, const std::function<double(double)>& g,
                                       int quad_nodes = 0) {
  if (quad_nodes <= 0) quad_nodes = 4 * n;
  const GaussHermiteRule rule = gauss_hermite(quad_nodes);
  const RMatrix h = hermite_function_table(n, rule.nodes);
  RVector gw(rule.size());
  for (int i = 0; i < rule.size(); ++i) gw(i) = rule.modified_weights(i) * g(rule.nodes(i));
  const RMatrix sym = h * gw.asDiagonal() * h.transpose();
  return CMatrix(0.5 * (sym + sym.transpose()));
}

inline CMatrix multiplication_operator_complex(int n, const std::function<Complex(double)>& g,
                                               int quad_nodes = 0) {
  if (quad_nodes <= 0) quad_nodes = 4 * n;
  const GaussHermiteRule rule = gauss_hermite(quad_nodes);
  const RMatrix h = hermite_function_table(n, rule.nodes);
  CMatrix out = CMatrix::Zero(n, n);
  for (int i = 0; i < rule.size(); ++i) {
    const Complex gw = rule.modified_weights(i) * g(rule.nodes(i));
    out.noalias() += gw * (h.col(i) * h.col(i).transpose()).cast<Complex>();
  }
  return out;
}

// integral of phi over R via the Gauss-Hermite rule with modified weights;
// adequate for integrands with Gaussian-scale decay.
inline double integrate_r(const std::function<double(double)>& phi, int quad_nodes = 512) {
  const GaussHermiteRule rule = gauss_hermite(quad_nodes);
  double acc = 0.0;
  for (int i = 0; i < rule.size(); ++i) acc += rule.modified_weights(i) * phi(rule.nodes(i));
  return acc;
}

}  // namespace wickrot::hermite
