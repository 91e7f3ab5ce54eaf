#pragma once

#include "wickrot/core.hpp"

#include <random>
#include <vector>

namespace wickrot::clifford {

struct Signature {
  int t = 0;
  int s = 0;
  int n() const { return t + s; }
  int rep_dim() const { return 1 << (n() / 2); }
  void validate() const {
    if (t < 0 || s < 0 || n() < 1) throw std::invalid_argument("Signature: need t,s >= 0, t+s >= 1");
  }
  // kappa(j) = -1 for j <= t, +1 otherwise (1-based frame index).
  double kappa(int j) const { return j <= t ? -1.0 : 1.0; }
};

namespace detail {

inline CMatrix pauli(int k) {
  CMatrix m(2, 2);
  switch (k) {
    case 1: m << 0, 1, 1, 0; break;
    case 2: m << 0, -kI, kI, 0; break;
    case 3: m << 1, 0, 0, -1; break;
    default: m = CMatrix::Identity(2, 2);
  }
  return m;
}

using wickrot::kron;

// Jordan-Wigner chain of Hermitian generators with {S_j, S_k} = 2 delta_jk.
// All entries land in {0, +-1, +-i}, which keeps the identity checks exact.
inline std::vector<CMatrix> hermitian_generators(int n) {
  const int m = n / 2;
  std::vector<CMatrix> out;
  out.reserve(n);
  const CMatrix id2 = pauli(0);
  auto chain = [&](int k, int mid) {
    CMatrix acc = CMatrix::Identity(1, 1);
    for (int pos = 0; pos < m; ++pos) {
      if (pos < k)
        acc = kron(acc, pauli(3));
      else if (pos == k)
        acc = kron(acc, pauli(mid));
      else
        acc = kron(acc, id2);
    }
    return acc;
  };
  if (n == 1) {
    out.push_back(CMatrix::Identity(1, 1));
    return out;
  }
  for (int k = 0; k < m; ++k) {
    out.push_back(chain(k, 1));
    out.push_back(chain(k, 2));
  }
  if (n % 2 == 1) {
    CMatrix last = CMatrix::Identity(1, 1);
    for (int pos = 0; pos < m; ++pos) last = kron(last, pauli(3));
    out.push_back(last);
  }
  return out;
}

inline Complex i_power(long k) {
  switch (((k % 4) + 4) % 4) {
    case 0: return Complex(1, 0);
    case 1: return Complex(0, 1);
    case 2: return Complex(-1, 0);
    default: return Complex(0, -1);
  }
}

}  // namespace detail

// n anti-self-adjoint matrices with gammaE_j gammaE_k + gammaE_k gammaE_j = -2 delta_jk,
// dimension 2^floor(n/2). For odd n the last generator is the product element.
inline std::vector<CMatrix> generate_gamma_E(int n) {
  if (n < 1) throw std::invalid_argument("generate_gamma_E: n >= 1 required");
  auto gens = detail::hermitian_generators(n);
  for (auto& g : gens) g = (kI * g).eval();
  return gens;
}

struct CliffordRep {
  Signature signature;
  std::vector<CMatrix> gamma_e;  // Riemannian rotation gamma_E(e_j)
  std::vector<CMatrix> gamma;    // gamma(e_j) = gamma_E(e_j - Te_j) - i gamma_E(Te_j)
  RVector metric_g;              // diag (kappa(1), ..., kappa(n))
  RVector reflection;            // r = 1 - 2T, diag(-1 x t, +1 x s)
  RVector timelike_projection;   // T, diag(1 x t, 0 x s)

  int dim() const { return signature.rep_dim(); }

  CMatrix gamma_of(const RVector& v) const {
    CMatrix acc = CMatrix::Zero(dim(), dim());
    for (int j = 0; j < signature.n(); ++j) acc += v(j) * gamma[j];
    return acc;
  }
  CMatrix gamma_e_of(const RVector& v) const {
    CMatrix acc = CMatrix::Zero(dim(), dim());
    for (int j = 0; j < signature.n(); ++j) acc += v(j) * gamma_e[j];
    return acc;
  }
  double g(const RVector& v, const RVector& w) const {
    double acc = 0;
    for (int j = 0; j < signature.n(); ++j) acc += metric_g(j) * v(j) * w(j);
    return acc;
  }
  double g_e(const RVector& v, const RVector& w) const { return v.dot(w); }
};

inline CliffordRep rotate_representation(std::vector<CMatrix> gamma_e, Signature sig) {
  sig.validate();
  if (static_cast<int>(gamma_e.size()) != sig.n())
    throw std::invalid_argument("rotate_representation: need n gamma matrices");
  CliffordRep rep;
  rep.signature = sig;
  rep.gamma_e = std::move(gamma_e);
  rep.gamma.reserve(sig.n());
  rep.metric_g = RVector(sig.n());
  rep.reflection = RVector(sig.n());
  rep.timelike_projection = RVector(sig.n());
  for (int j = 1; j <= sig.n(); ++j) {
    rep.metric_g(j - 1) = sig.kappa(j);
    rep.reflection(j - 1) = j <= sig.t ? -1.0 : 1.0;
    rep.timelike_projection(j - 1) = j <= sig.t ? 1.0 : 0.0;
    rep.gamma.push_back(j <= sig.t ? CMatrix(-kI * rep.gamma_e[j - 1]) : rep.gamma_e[j - 1]);
  }
  return rep;
}

inline CliffordRep make_representation(Signature sig) {
  sig.validate();
  return rotate_representation(generate_gamma_E(sig.n()), sig);
}

struct ResidualReport {
  double max_residual = 0.0;
  double tolerance = 1e-12;
  int samples = 0;
  unsigned long seed = 0;
  bool pass() const { return max_residual <= tolerance; }
};

namespace detail {

inline double entry_residual(const CMatrix& a) { return a.cwiseAbs().maxCoeff(); }

}  // namespace detail

// gamma(v) gamma(w)* + gamma(w)* gamma(v) = 2 g_E(v,w): checked on all frame
// pairs and `samples` random real vector pairs.
inline ResidualReport verify_mixed_relation(const CliffordRep& rep, int samples = 100,
                                            unsigned long seed = 0xC11FF0) {
  const int n = rep.signature.n();
  const int d = rep.dim();
  const CMatrix id = CMatrix::Identity(d, d);
  ResidualReport report;
  report.samples = samples;
  report.seed = seed;
  auto residual = [&](const RVector& v, const RVector& w) {
    const CMatrix gv = rep.gamma_of(v);
    const CMatrix gw = rep.gamma_of(w).adjoint();
    return detail::entry_residual(gv * gw + gw * gv - 2.0 * rep.g_e(v, w) * id);
  };
  for (int j = 0; j < n; ++j)
    for (int k = 0; k < n; ++k) {
      RVector ej = RVector::Zero(n), ek = RVector::Zero(n);
      ej(j) = 1;
      ek(k) = 1;
      report.max_residual = std::max(report.max_residual, residual(ej, ek));
    }
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> unif(-1.0, 1.0);
  for (int it = 0; it < samples; ++it) {
    RVector v(n), w(n);
    for (int j = 0; j < n; ++j) {
      v(j) = unif(rng);
      w(j) = unif(rng);
    }
    report.max_residual = std::max(report.max_residual, residual(v, w));
  }
  return report;
}

// gamma(v)^2 + g(v,v) = 0 on frame vectors and random real v.
inline ResidualReport verify_square_relation(const CliffordRep& rep, int samples = 1000,
                                             unsigned long seed = 0x5157AB1E) {
  const int n = rep.signature.n();
  const int d = rep.dim();
  const CMatrix id = CMatrix::Identity(d, d);
  ResidualReport report;
  report.samples = samples;
  report.seed = seed;
  auto residual = [&](const RVector& v) {
    const CMatrix gv = rep.gamma_of(v);
    return detail::entry_residual(gv * gv + rep.g(v, v) * id);
  };
  for (int j = 0; j < n; ++j) {
    RVector ej = RVector::Zero(n);
    ej(j) = 1;
    report.max_residual = std::max(report.max_residual, residual(ej));
  }
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> unif(-1.0, 1.0);
  for (int it = 0; it < samples; ++it) {
    RVector v(n);
    for (int j = 0; j < n; ++j) v(j) = unif(rng);
    report.max_residual = std::max(report.max_residual, residual(v));
  }
  return report;
}

struct SpinSymmetry {
  CMatrix matrix;  // J_M = i^{t(t-1)/2} gamma(e_1)...gamma(e_t)
  Signature signature;
  double unitary_residual = 0.0;    // max of |J - J*| and |J^2 - 1| entries
  double reflection_residual = 0.0; // J gamma(v) J - (-1)^t gamma(rv) on frame vectors
};

inline SpinSymmetry fundamental_symmetry(const CliffordRep& rep) {
  const Signature sig = rep.signature;
  if (sig.t < 1) throw std::invalid_argument("fundamental_symmetry: no timelike directions");
  const int d = rep.dim();
  CMatrix jm = CMatrix::Identity(d, d);
  for (int j = 0; j < sig.t; ++j) jm = (jm * rep.gamma[j]).eval();
  jm *= detail::i_power(static_cast<long>(sig.t) * (sig.t - 1) / 2);
  SpinSymmetry out;
  out.matrix = jm;
  out.signature = sig;
  const CMatrix id = CMatrix::Identity(d, d);
  out.unitary_residual = std::max(detail::entry_residual(jm - jm.adjoint()),
                                  detail::entry_residual(jm * jm - id));
  const double sign = sig.t % 2 == 0 ? 1.0 : -1.0;
  double worst = 0.0;
  for (int j = 0; j < sig.n(); ++j) {
    RVector ej = RVector::Zero(sig.n());
    ej(j) = 1;
    const RVector rej = rep.reflection(j) * ej;
    const CMatrix lhs = jm * rep.gamma[j] * jm;
    const CMatrix rhs = sign * rep.gamma_of(rej);
    worst = std::max(worst, detail::entry_residual(lhs - rhs));
  }
  out.reflection_residual = worst;
  return out;
}

// (1 - T - iT)^2 = r as diagonal matrices.
inline double reflection_identity_residual(const CliffordRep& rep) {
  double worst = 0.0;
  for (int j = 0; j < rep.signature.n(); ++j) {
    const double tj = rep.timelike_projection(j);
    const Complex z = Complex(1.0 - tj, -tj);
    worst = std::max(worst, std::abs(z * z - Complex(rep.reflection(j), 0.0)));
  }
  return worst;
}

}  // namespace wickrot::clifford
