#pragma once

#include "wickrot/core.hpp"
#include "wickrot/hermite.hpp"
#include "wickrot/operator_core.hpp"

#include <json.hpp>

#include <cmath>
#include <optional>
#include <random>
#include <vector>

namespace wickrot::models {

using nlohmann::json;

enum class ModelFamily { finite, first_order, oscillator };

inline const char* to_string(ModelFamily f) {
  switch (f) {
    case ModelFamily::finite: return "finite";
    case ModelFamily::first_order: return "first-order";
    default: return "oscillator";
  }
}

struct ModelTriple {
  TruncatedOperator D;
  std::vector<std::pair<std::string, TruncatedOperator>> algebra;
  std::optional<TruncatedOperator> grading;
  std::optional<FundamentalSymmetry> beta;
  DerivedOperators derived;
  BasisSpec basis;
  ModelFamily family = ModelFamily::finite;
  std::string name;
  int timelike_count = 1;  // parity enters the Krein relation D* = (-1)^{t+1} beta D beta
  int quadrature_nodes = 0;

  int level() const { return basis.level; }
  bool even() const { return grading.has_value(); }
};

namespace detail {

inline void finish(ModelTriple& m) {
  m.derived = derive_operators(m.D.matrix);
}

}  // namespace detail

// Even finite geometry: D = [[0,0],[B,0]] on H1 (+) H2 with grading
// diag(+1 on H1, -1 on H2) and block projections as algebra samples.
inline ModelTriple finite_geometry(const CMatrix& b) {
  const Eigen::Index d1 = b.cols(), d2 = b.rows();
  const Eigen::Index n = d1 + d2;
  CMatrix d = CMatrix::Zero(n, n);
  d.bottomLeftCorner(d2, d1) = b;
  ModelTriple m;
  m.basis = BasisSpec::abstract(static_cast<int>(n));
  m.D = TruncatedOperator(d, m.basis, "D");
  CMatrix gamma = CMatrix::Zero(n, n);
  gamma.topLeftCorner(d1, d1) = CMatrix::Identity(d1, d1);
  gamma.bottomRightCorner(d2, d2) = -CMatrix::Identity(d2, d2);
  m.grading = TruncatedOperator(gamma, m.basis, "Gamma");
  CMatrix p1 = CMatrix::Zero(n, n), p2 = CMatrix::Zero(n, n);
  p1.topLeftCorner(d1, d1) = CMatrix::Identity(d1, d1);
  p2.bottomRightCorner(d2, d2) = CMatrix::Identity(d2, d2);
  m.algebra.emplace_back("p1", TruncatedOperator(p1, m.basis, "p1"));
  m.algebra.emplace_back("p2", TruncatedOperator(p2, m.basis, "p2"));
  m.family = ModelFamily::finite;
  m.name = "finite";
  detail::finish(m);
  return m;
}

// Even Lorentz-type block model D = sigma2 (x) A with A = A*, grading
// sigma3 (x) 1 and beta = i sigma1 (x) 1. Self-adjoint D, so R_D = 0 and the
// graded heat trace vanishes identically.
inline ModelTriple lorentz_block(const CMatrix& a) {
  if (a.rows() != a.cols()) throw std::invalid_argument("lorentz_block: A must be square");
  if (!is_hermitian(a, 1e-10))
    throw std::invalid_argument("lorentz_block: A must be Hermitian");
  const Eigen::Index k = a.rows();
  const CMatrix id = CMatrix::Identity(k, k);
  CMatrix s1(2, 2), s2(2, 2), s3(2, 2);
  s1 << 0, 1, 1, 0;
  s2 << 0, -kI, kI, 0;
  s3 << 1, 0, 0, -1;
  ModelTriple m;
  m.basis = BasisSpec::abstract(static_cast<int>(2 * k));
  m.D = TruncatedOperator(kron(s2, a), m.basis, "D");
  m.grading = TruncatedOperator(kron(s3, id), m.basis, "Gamma");
  m.beta = FundamentalSymmetry(kI * kron(s1, id), SymmetryConvention::anti_self_adjoint);
  m.algebra.emplace_back("unit", TruncatedOperator(CMatrix::Identity(2 * k, 2 * k), m.basis, "1"));
  m.algebra.emplace_back("gen", TruncatedOperator(kron(CMatrix::Identity(2, 2), a), m.basis, "1xA"));
  m.family = ModelFamily::finite;
  m.name = "lorentz-block";
  m.timelike_count = 1;
  detail::finish(m);
  return m;
}

// Constant coefficient first order operator D = sum_j M_j d/dx^j + K on a
// periodic Fourier-spectral grid standing in for R^n.
struct FirstOrderSpec {
  int spatial_dim = 1;
  int fiber_dim = 1;
  std::vector<CMatrix> coefficients;  // M_1..M_n, each d x d
  CMatrix mass;                       // K, d x d
  double half_period = M_PI;
  int grid_points = 32;

  void validate() const {
    if (spatial_dim < 1) throw std::invalid_argument("FirstOrderSpec: spatial_dim >= 1");
    if (static_cast<int>(coefficients.size()) != spatial_dim)
      throw std::invalid_argument("FirstOrderSpec: need one M_j per axis");
    for (const auto& mj : coefficients)
      if (mj.rows() != fiber_dim || mj.cols() != fiber_dim)
        throw std::invalid_argument("FirstOrderSpec: M_j must be d x d");
    if (mass.rows() != fiber_dim || mass.cols() != fiber_dim)
      throw std::invalid_argument("FirstOrderSpec: K must be d x d");
    if (half_period <= 0) throw std::invalid_argument("FirstOrderSpec: L > 0");
    if (grid_points < 2 || (grid_points & (grid_points - 1)) != 0)
      throw std::invalid_argument("FirstOrderSpec: grid points must be a power of 2");
  }
};

namespace detail {

// d/dx on P periodic points over [-L, L): exact multiplication by i xi_k in
// frequency space, conjugated back; anti-Hermitian by construction.
inline CMatrix spectral_derivative(int p, double half_period) {
  CMatrix deriv = CMatrix::Zero(p, p);
  for (int j = 0; j < p; ++j) {
    for (int jp = 0; jp < p; ++jp) {
      Complex acc(0, 0);
      for (int kk = -p / 2; kk < p / 2; ++kk) {
        const double xi = M_PI * kk / half_period;
        acc += kI * xi * std::exp(kI * (2.0 * M_PI * kk * (j - jp) / p));
      }
      deriv(j, jp) = acc / double(p);
    }
  }
  // exact anti-Hermitian part; the assembly above is anti-Hermitian up to
  // rounding of the phase sums
  return 0.5 * (deriv - deriv.adjoint());
}

inline double bump(double r) {  // smooth, supported on |r| < 1
  if (std::abs(r) >= 1.0) return 0.0;
  return std::exp(-1.0 / (1.0 - r * r));
}

}  // namespace detail

inline ModelTriple first_order_model(const FirstOrderSpec& spec) {
  spec.validate();
  long total = spec.fiber_dim;
  for (int a = 0; a < spec.spatial_dim; ++a) total *= spec.grid_points;
  if (total > (1L << 22)) throw std::invalid_argument("first_order_model: dimension exceeds 2^22");

  const int p = spec.grid_points;
  const CMatrix deriv = detail::spectral_derivative(p, spec.half_period);
  const CMatrix idp = CMatrix::Identity(p, p);
  const CMatrix idf = CMatrix::Identity(spec.fiber_dim, spec.fiber_dim);

  CMatrix d = CMatrix::Zero(total, total);
  for (int a = 0; a < spec.spatial_dim; ++a) {
    CMatrix space = CMatrix::Identity(1, 1);
    for (int pos = 0; pos < spec.spatial_dim; ++pos)
      space = kron(space, pos == a ? deriv : idp).eval();
    d += kron(space, spec.coefficients[a]);
  }
  CMatrix space_id = CMatrix::Identity(total / spec.fiber_dim, total / spec.fiber_dim);
  d += kron(space_id, spec.mass);

  ModelTriple m;
  m.basis = BasisSpec::grid(p, spec.spatial_dim, spec.fiber_dim, spec.half_period);
  m.D = TruncatedOperator(d, m.basis, "D");
  m.family = ModelFamily::first_order;
  m.name = "first-order";

  // multiplication by smooth bumps, diagonal on the position grid
  auto grid_coord = [&](int flat, int axis) {
    for (int ax = spec.spatial_dim - 1; ax > axis; --ax) flat /= p;
    const int j = flat % p;
    return -spec.half_period + 2.0 * spec.half_period * j / p;
  };
  const int cells = static_cast<int>(total / spec.fiber_dim);
  auto add_bump = [&](const std::string& label, double center, double width) {
    CMatrix diag = CMatrix::Zero(total, total);
    for (int c = 0; c < cells; ++c) {
      double val = 1.0;
      for (int ax = 0; ax < spec.spatial_dim; ++ax)
        val *= detail::bump((grid_coord(c, ax) - center) / width);
      diag.block(c * spec.fiber_dim, c * spec.fiber_dim, spec.fiber_dim, spec.fiber_dim) =
          val * idf;
    }
    m.algebra.emplace_back(label, TruncatedOperator(diag, m.basis, label));
  };
  add_bump("bump", 0.0, spec.half_period / 2.0);
  add_bump("bump-offset", spec.half_period / 4.0, spec.half_period / 2.0);
  detail::finish(m);
  return m;
}

// Isometry onto the interior frequency window |k| <= P/4 per axis (fiber
// kept whole). Norm evidence for grid operators is taken through this
// compression: the raw commutators pick up Nyquist-edge aliasing that grows
// like the grid size and has no continuum counterpart.
inline CMatrix grid_interior_isometry(const BasisSpec& basis) {
  if (basis.kind != BasisKind::fourier_grid)
    throw std::invalid_argument("grid_interior_isometry: fourier-grid basis required");
  const int p = basis.points_per_axis;
  const int kmax = p / 4;
  const int m = 2 * kmax + 1;
  CMatrix axis(p, m);
  for (int c = 0; c < m; ++c) {
    const int k = -kmax + c;
    for (int j = 0; j < p; ++j)
      axis(j, c) = std::exp(kI * (2.0 * M_PI * k * j / double(p))) / std::sqrt(double(p));
  }
  CMatrix space = CMatrix::Identity(1, 1);
  for (int ax = 0; ax < basis.spatial_dim; ++ax) space = kron(space, axis).eval();
  return kron(space, CMatrix::Identity(basis.fiber_dim, basis.fiber_dim));
}

// Admissibility and smooth-summability displays for first order operators.
struct ConditionItem {
  std::string condition;
  bool pass = true;
  double measure = 0.0;  // smallest singular value, or worst residual
  RVector witness_xi;    // the xi that minimized/violated, when xi-dependent
  int witness_j = -1, witness_k = -1, witness_l = -1;
};

struct ConditionReport {
  ConditionItem symbol_invertible;   // sum (M*_j M_k + M_j M_k*) xi_j xi_k in GL
  ConditionItem anticommutators;     // {M_j, M_k} = {M_j*, M_k*}
  ConditionItem mass_compatibility;  // [sum(...) xi xi, sum({M_j,K}+{M_j*,K*}) xi] = 0
  ConditionItem smooth_m;            // [M_j, M_k M_l* + M_k* M_l] = 0
  ConditionItem smooth_k;            // [K, M_k M_l* + M_k* M_l] = 0
  int xi_samples = 0;
  unsigned long seed = 0;
  double invertibility_floor = 1e-10;
  double residual_tol = 1e-12;

  bool admissible() const {
    return symbol_invertible.pass && anticommutators.pass && mass_compatibility.pass;
  }
  bool smoothly_summable() const { return admissible() && smooth_m.pass && smooth_k.pass; }
};

namespace detail {

inline CMatrix symbol_square(const FirstOrderSpec& spec, const RVector& xi) {
  const int d = spec.fiber_dim;
  CMatrix acc = CMatrix::Zero(d, d);
  for (int j = 0; j < spec.spatial_dim; ++j)
    for (int k = 0; k < spec.spatial_dim; ++k)
      acc += (spec.coefficients[j].adjoint() * spec.coefficients[k] +
              spec.coefficients[j] * spec.coefficients[k].adjoint()) *
             xi(j) * xi(k);
  return acc;
}

inline CMatrix mass_symbol(const FirstOrderSpec& spec, const RVector& xi) {
  const int d = spec.fiber_dim;
  const CMatrix& k = spec.mass;
  CMatrix acc = CMatrix::Zero(d, d);
  for (int j = 0; j < spec.spatial_dim; ++j) {
    const CMatrix& mj = spec.coefficients[j];
    acc += (mj * k + k * mj + mj.adjoint() * k.adjoint() + k.adjoint() * mj.adjoint()) * xi(j);
  }
  return acc;
}

inline double smallest_singular_value(const CMatrix& a) {
  Eigen::JacobiSVD<CMatrix> svd(a);
  return svd.singularValues().size() ? svd.singularValues().minCoeff() : 0.0;
}

}  // namespace detail

inline ConditionReport check_first_order_conditions(const FirstOrderSpec& spec,
                                                    int xi_samples = 64,
                                                    unsigned long seed = 0xF1857) {
  spec.validate();
  const int n = spec.spatial_dim;
  ConditionReport rep;
  rep.xi_samples = xi_samples;
  rep.seed = seed;
  rep.symbol_invertible.condition = "symbol-invertible";
  rep.anticommutators.condition = "anticommutators-match";
  rep.mass_compatibility.condition = "mass-symbol-commutes";
  rep.smooth_m.condition = "smooth-commutators-M";
  rep.smooth_k.condition = "smooth-commutators-K";

  std::vector<RVector> xis;
  for (int j = 0; j < n; ++j) {
    RVector e = RVector::Zero(n);
    e(j) = 1.0;
    xis.push_back(e);
  }
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> gauss(0.0, 1.0);
  for (int it = 0; it < xi_samples; ++it) {
    RVector v(n);
    for (int j = 0; j < n; ++j) v(j) = gauss(rng);
    if (v.norm() < 1e-8) v(0) = 1.0;
    xis.push_back(v / v.norm());
  }

  rep.symbol_invertible.measure = std::numeric_limits<double>::infinity();
  rep.mass_compatibility.measure = 0.0;
  for (const auto& xi : xis) {
    const CMatrix sq = detail::symbol_square(spec, xi);
    const double smin = detail::smallest_singular_value(sq);
    if (smin < rep.symbol_invertible.measure) {
      rep.symbol_invertible.measure = smin;
      rep.symbol_invertible.witness_xi = xi;
    }
    const CMatrix ms = detail::mass_symbol(spec, xi);
    const double res = (sq * ms - ms * sq).cwiseAbs().maxCoeff();
    if (res > rep.mass_compatibility.measure) {
      rep.mass_compatibility.measure = res;
      rep.mass_compatibility.witness_xi = xi;
    }
  }
  rep.symbol_invertible.pass = rep.symbol_invertible.measure > rep.invertibility_floor;
  rep.mass_compatibility.pass = rep.mass_compatibility.measure <= rep.residual_tol;

  for (int j = 0; j < n; ++j)
    for (int k = 0; k < n; ++k) {
      const CMatrix& mj = spec.coefficients[j];
      const CMatrix& mk = spec.coefficients[k];
      const CMatrix lhs = mj * mk + mk * mj;
      const CMatrix rhs = mj.adjoint() * mk.adjoint() + mk.adjoint() * mj.adjoint();
      const double res = (lhs - rhs).cwiseAbs().maxCoeff();
      if (res > rep.anticommutators.measure) {
        rep.anticommutators.measure = res;
        rep.anticommutators.witness_j = j;
        rep.anticommutators.witness_k = k;
      }
    }
  rep.anticommutators.pass = rep.anticommutators.measure <= rep.residual_tol;

  // The smooth-summability displays are read through the symbol of <D>^2,
  // whose second-order coefficient symmetrizes over (k,l); the literal
  // per-(k,l) product fails already for gamma-matrix coefficients.
  for (int k = 0; k < n; ++k)
    for (int l = 0; l < n; ++l) {
      const CMatrix base = spec.coefficients[k] * spec.coefficients[l].adjoint() +
                           spec.coefficients[k].adjoint() * spec.coefficients[l] +
                           spec.coefficients[l] * spec.coefficients[k].adjoint() +
                           spec.coefficients[l].adjoint() * spec.coefficients[k];
      for (int j = 0; j < n; ++j) {
        const CMatrix& mj = spec.coefficients[j];
        const double res = (mj * base - base * mj).cwiseAbs().maxCoeff();
        if (res > rep.smooth_m.measure) {
          rep.smooth_m.measure = res;
          rep.smooth_m.witness_j = j;
          rep.smooth_m.witness_k = k;
          rep.smooth_m.witness_l = l;
        }
      }
      const double resk = (spec.mass * base - base * spec.mass).cwiseAbs().maxCoeff();
      if (resk > rep.smooth_k.measure) {
        rep.smooth_k.measure = resk;
        rep.smooth_k.witness_k = k;
        rep.smooth_k.witness_l = l;
      }
    }
  rep.smooth_m.pass = rep.smooth_m.measure <= rep.residual_tol;
  rep.smooth_k.pass = rep.smooth_k.measure <= rep.residual_tol;
  return rep;
}

// Re-evaluate a reported witness; used to confirm that stored violations
// reproduce.
inline double reverify_symbol_witness(const FirstOrderSpec& spec, const RVector& xi) {
  return detail::smallest_singular_value(detail::symbol_square(spec, xi));
}

// Harmonic oscillator D = d/dx + x at Hermite level N: D = sqrt(2) a with
// algebra samples exp(-x^2) and -2/(1+x^2) built by Gauss-Hermite quadrature.
inline ModelTriple harmonic_oscillator(int n, int quad_nodes = 0) {
  if (n < 8) throw std::invalid_argument("harmonic_oscillator: need N >= 8");
  ModelTriple m;
  m.basis = BasisSpec::hermite(n);
  m.D = TruncatedOperator(CMatrix(std::sqrt(2.0) * hermite::annihilation(n)), m.basis, "D");
  m.family = ModelFamily::oscillator;
  m.name = "oscillator";
  m.quadrature_nodes = quad_nodes > 0 ? quad_nodes : 4 * n;
  auto gauss = [](double x) { return std::exp(-x * x); };
  auto gm1 = [](double x) { return -2.0 / (1.0 + x * x); };
  m.algebra.emplace_back(
      "exp(-x^2)",
      TruncatedOperator(hermite::multiplication_operator(n, gauss, m.quadrature_nodes), m.basis,
                        "exp(-x^2)"));
  m.algebra.emplace_back(
      "-2/(1+x^2)",
      TruncatedOperator(hermite::multiplication_operator(n, gm1, m.quadrature_nodes), m.basis,
                        "-2/(1+x^2)"));
  detail::finish(m);
  return m;
}

// Closed-form heat kernel of <D>^2 = -d^2/dx^2 + x^2 (Mehler).
inline double mehler_kernel(double t, double x, double y) {
  if (t <= 0.0) throw std::domain_error("mehler_kernel: t > 0 required");
  const double s2t = std::sinh(2.0 * t);
  return std::exp(-0.5 * (std::cosh(2.0 * t) / s2t) * (x * x + y * y) + (x * y) / s2t) /
         std::sqrt(2.0 * M_PI * s2t);
}

// Closed-form heat kernel of D_E^2 for D_E = i d/dx + x.
inline Complex de_heat_kernel(double t, double x, double y) {
  if (t <= 0.0) throw std::domain_error("de_heat_kernel: t > 0 required");
  const double diff = x - y;
  return std::exp(-diff * diff / (4.0 * t)) / (2.0 * std::sqrt(M_PI * t)) *
         std::exp(kI * 0.5 * (x * x - y * y));
}

// ---------------------------------------------------------------------------
// JSON model descriptors. Complex scalars are [re, im] pairs; doubles
// round-trip bit-exactly through the serializer.

inline json complex_to_json(const Complex& z) { return json::array({z.real(), z.imag()}); }

inline Complex complex_from_json(const json& j) {
  if (!j.is_array() || j.size() != 2)
    throw std::invalid_argument("descriptor: complex entries must be [re, im]");
  return Complex(j[0].get<double>(), j[1].get<double>());
}

inline json matrix_to_json(const CMatrix& m) {
  json rows = json::array();
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    json row = json::array();
    for (Eigen::Index j = 0; j < m.cols(); ++j) row.push_back(complex_to_json(m(i, j)));
    rows.push_back(row);
  }
  return rows;
}

inline CMatrix matrix_from_json(const json& j) {
  if (!j.is_array() || j.empty()) throw std::invalid_argument("descriptor: matrix must be rows");
  const Eigen::Index rows = static_cast<Eigen::Index>(j.size());
  const Eigen::Index cols = static_cast<Eigen::Index>(j[0].size());
  CMatrix m(rows, cols);
  for (Eigen::Index i = 0; i < rows; ++i) {
    if (static_cast<Eigen::Index>(j[i].size()) != cols)
      throw std::invalid_argument("descriptor: ragged matrix");
    for (Eigen::Index k = 0; k < cols; ++k) m(i, k) = complex_from_json(j[i][k]);
  }
  return m;
}

struct ModelDescriptor {
  std::string family;  // "finite" | "first-order" | "oscillator"
  std::optional<CMatrix> B;          // finite
  std::optional<CMatrix> A;          // finite, Lorentz block variant
  std::vector<CMatrix> M;            // first-order
  std::optional<CMatrix> K;          // first-order
  int N = 0;                         // oscillator level
  double L = M_PI;                   // first-order half-period
  int grid = 0;                      // first-order points per axis

  static ModelDescriptor from_json(const json& j) {
    static const std::vector<std::string> known = {"family", "B", "A", "M", "K",
                                                   "N",      "L", "grid"};
    for (auto it = j.begin(); it != j.end(); ++it) {
      if (std::find(known.begin(), known.end(), it.key()) == known.end())
        throw std::invalid_argument("descriptor: unknown key '" + it.key() + "'");
    }
    ModelDescriptor d;
    d.family = j.at("family").get<std::string>();
    if (j.contains("B")) d.B = matrix_from_json(j["B"]);
    if (j.contains("A")) d.A = matrix_from_json(j["A"]);
    if (j.contains("M"))
      for (const auto& mj : j["M"]) d.M.push_back(matrix_from_json(mj));
    if (j.contains("K")) d.K = matrix_from_json(j["K"]);
    if (j.contains("N")) d.N = j["N"].get<int>();
    if (j.contains("L")) d.L = j["L"].get<double>();
    if (j.contains("grid")) d.grid = j["grid"].get<int>();
    d.validate();
    return d;
  }

  void validate() const {
    if (family == "finite") {
      if (!B && !A) throw std::invalid_argument("descriptor: finite needs B or A");
    } else if (family == "first-order") {
      if (M.empty() || !K) throw std::invalid_argument("descriptor: first-order needs M and K");
      if (grid < 2) throw std::invalid_argument("descriptor: first-order needs grid");
    } else if (family == "oscillator") {
      if (N < 8) throw std::invalid_argument("descriptor: oscillator needs N >= 8");
    } else {
      throw std::invalid_argument("descriptor: unknown family '" + family + "'");
    }
  }

  json to_json() const {
    json j;
    j["family"] = family;
    if (B) j["B"] = matrix_to_json(*B);
    if (A) j["A"] = matrix_to_json(*A);
    if (!M.empty()) {
      json arr = json::array();
      for (const auto& m : M) arr.push_back(matrix_to_json(m));
      j["M"] = arr;
    }
    if (K) j["K"] = matrix_to_json(*K);
    if (family == "oscillator") j["N"] = N;
    if (family == "first-order") {
      j["L"] = L;
      j["grid"] = grid;
    }
    return j;
  }

  FirstOrderSpec first_order_spec(int grid_override = 0) const {
    FirstOrderSpec s;
    s.spatial_dim = static_cast<int>(M.size());
    s.fiber_dim = static_cast<int>(M.front().rows());
    s.coefficients = M;
    s.mass = *K;
    s.half_period = L;
    s.grid_points = grid_override > 0 ? grid_override : grid;
    return s;
  }

  // level: Hermite level for the oscillator, points per axis for
  // first-order grids; ignored by finite models.
  ModelTriple build(int level = 0) const {
    if (family == "finite") {
      return B ? finite_geometry(*B) : lorentz_block(*A);
    }
    if (family == "first-order") {
      return first_order_model(first_order_spec(level));
    }
    return harmonic_oscillator(level > 0 ? level : N);
  }

  int default_level() const {
    if (family == "oscillator") return N;
    if (family == "first-order") return grid;
    return 0;
  }
};

}  // namespace wickrot::models
