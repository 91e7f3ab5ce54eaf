#pragma once

#include "wickrot/core.hpp"

#include <cmath>
#include <functional>

namespace wickrot::quadrature {

struct Rule {
  RVector nodes;
  RVector weights;
  int size() const { return static_cast<int>(nodes.size()); }
};

// Gauss-Legendre on [-1, 1] via the Jacobi matrix; weights from the
// orthonormal-polynomial identity w_i = 1 / sum_k p_k(x_i)^2.
inline Rule gauss_legendre(int k) {
  if (k < 1) throw std::invalid_argument("gauss_legendre: need k >= 1");
  RVector diag = RVector::Zero(k);
  RVector sub(k > 1 ? k - 1 : 0);
  for (int j = 1; j < k; ++j) sub(j - 1) = double(j) / std::sqrt(4.0 * j * j - 1.0);
  Rule rule;
  if (k == 1) {
    rule.nodes = RVector::Zero(1);
  } else {
    Eigen::SelfAdjointEigenSolver<RMatrix> es;
    es.computeFromTridiagonal(diag, sub, Eigen::EigenvaluesOnly);
    if (es.info() != Eigen::Success) throw std::runtime_error("gauss_legendre failed");
    rule.nodes = es.eigenvalues();
  }
  rule.weights = RVector(k);
  for (int i = 0; i < k; ++i) {
    const double x = rule.nodes(i);
    // orthonormal Legendre p_k = sqrt((2k+1)/2) P_k
    double pm = std::sqrt(0.5), p = std::sqrt(1.5) * x, s = pm * pm + p * p;
    for (int n = 1; n < k - 1; ++n) {
      const double a = std::sqrt((2.0 * n + 3.0) * (2.0 * n + 1.0)) / (n + 1.0);
      const double b = (double(n) / (n + 1.0)) * std::sqrt((2.0 * n + 3.0) / (2.0 * n - 1.0));
      const double pn = a * x * p - b * pm;
      pm = p;
      p = pn;
      s += p * p;
    }
    rule.weights(i) = k == 1 ? 2.0 : 1.0 / s;
  }
  return rule;
}

inline Rule scaled(const Rule& base, double lo, double hi) {
  Rule out;
  out.nodes = RVector(base.size());
  out.weights = RVector(base.size());
  const double mid = 0.5 * (lo + hi), half = 0.5 * (hi - lo);
  for (int i = 0; i < base.size(); ++i) {
    out.nodes(i) = mid + half * base.nodes(i);
    out.weights(i) = half * base.weights(i);
  }
  return out;
}

inline double integrate(const Rule& rule, const std::function<double(double)>& f) {
  double acc = 0.0;
  for (int i = 0; i < rule.size(); ++i) acc += rule.weights(i) * f(rule.nodes(i));
  return acc;
}

// integral over the whole line via x = tan(theta); exact up to the rule's
// polynomial degree for integrands with O(1/x^2) decay such as 1/(1+x^2).
inline double integrate_line(const std::function<double(double)>& f, int nodes = 400) {
  const Rule rule = scaled(gauss_legendre(nodes), -M_PI / 2.0, M_PI / 2.0);
  double acc = 0.0;
  for (int i = 0; i < rule.size(); ++i) {
    const double th = rule.nodes(i);
    const double c = std::cos(th);
    acc += rule.weights(i) * f(std::tan(th)) / (c * c);
  }
  return acc;
}

}  // namespace wickrot::quadrature
