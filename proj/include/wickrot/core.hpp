#pragma once

#include <Eigen/Dense>

#include <complex>
#include <functional>
#include <memory>
#include <mutex>
#include <stdexcept>
#include <string>
#include <unordered_map>
#include <utility>

namespace wickrot {

using Complex = std::complex<double>;
using CMatrix = Eigen::MatrixXcd;
using CVector = Eigen::VectorXcd;
using RMatrix = Eigen::MatrixXd;
using RVector = Eigen::VectorXd;

inline constexpr Complex kI{0.0, 1.0};

enum class BasisKind { hermite, fourier_grid, abstract_basis };

inline const char* to_string(BasisKind k) {
  switch (k) {
    case BasisKind::hermite: return "hermite";
    case BasisKind::fourier_grid: return "fourier-grid";
    default: return "abstract";
  }
}

// Which basis a truncated matrix lives in, and at what level. For a
// fourier-grid basis the level is points_per_axis^spatial_dim * fiber_dim.
struct BasisSpec {
  BasisKind kind = BasisKind::abstract_basis;
  int level = 1;
  double half_period = 0.0;
  int points_per_axis = 0;
  int spatial_dim = 1;
  int fiber_dim = 1;

  void validate() const {
    if (level < 1) throw std::invalid_argument("BasisSpec: level must be >= 1");
    if (kind == BasisKind::fourier_grid) {
      if (half_period <= 0.0)
        throw std::invalid_argument("BasisSpec: fourier-grid needs half_period > 0");
      long expect = fiber_dim;
      for (int k = 0; k < spatial_dim; ++k) expect *= points_per_axis;
      if (expect != level)
        throw std::invalid_argument("BasisSpec: fourier-grid level mismatch");
    }
  }

  static BasisSpec abstract(int n) {
    BasisSpec b;
    b.kind = BasisKind::abstract_basis;
    b.level = n;
    return b;
  }
  static BasisSpec hermite(int n) {
    BasisSpec b;
    b.kind = BasisKind::hermite;
    b.level = n;
    return b;
  }
  static BasisSpec grid(int points, int spatial_dim, int fiber_dim, double half_period) {
    BasisSpec b;
    b.kind = BasisKind::fourier_grid;
    b.points_per_axis = points;
    b.spatial_dim = spatial_dim;
    b.fiber_dim = fiber_dim;
    b.half_period = half_period;
    long lv = fiber_dim;
    for (int k = 0; k < spatial_dim; ++k) lv *= points;
    b.level = static_cast<int>(lv);
    return b;
  }
};

// Dense compression of a closed operator to a finite level.
struct TruncatedOperator {
  CMatrix matrix;
  BasisSpec basis;
  std::string label;

  TruncatedOperator() = default;
  TruncatedOperator(CMatrix m, BasisSpec b, std::string lbl)
      : matrix(std::move(m)), basis(std::move(b)), label(std::move(lbl)) {
    if (matrix.rows() != matrix.cols())
      throw std::invalid_argument("TruncatedOperator: matrix must be square");
    if (matrix.rows() != basis.level)
      throw std::invalid_argument("TruncatedOperator: basis level != matrix dimension");
  }
  int level() const { return static_cast<int>(matrix.rows()); }
};

inline double frobenius_norm(const CMatrix& a) { return a.norm(); }

// Largest singular value by power iteration on A*A (two matvecs per step,
// fixed start vector, so the result is independent of thread scheduling).
inline double operator_norm(const CMatrix& a, double rel_tol = 1e-12, int max_iter = 10000) {
  const Eigen::Index n = a.cols();
  if (n == 0 || a.rows() == 0) return 0.0;
  const double scale = a.cwiseAbs().maxCoeff();
  if (scale == 0.0) return 0.0;
  CVector v = CVector::Ones(n);
  for (Eigen::Index i = 0; i < n; ++i) v(i) += Complex(0.25 * double(i % 7) / 7.0, 0.0);
  v /= v.norm();
  double lambda = 0.0;
  for (int it = 0; it < max_iter; ++it) {
    CVector w = a.adjoint() * (a * v);
    const double wn = w.norm();
    if (wn == 0.0) return 0.0;
    w /= wn;
    const double next = std::real(Complex(w.adjoint() * (a.adjoint() * (a * w))));
    if (std::abs(next - lambda) <= rel_tol * std::abs(next) && it > 2) {
      lambda = next;
      break;
    }
    lambda = next;
    v.swap(w);
  }
  return std::sqrt(std::max(lambda, 0.0));
}

inline double hermiticity_residual(const CMatrix& h) {
  const double s = h.norm();
  if (s == 0.0) return 0.0;
  return (h - h.adjoint()).norm() / s;
}

inline bool is_hermitian(const CMatrix& h, double rel_tol = 1e-10) {
  return hermiticity_residual(h) <= rel_tol;
}

// (H + H*)/2; entrywise exactly conjugate-symmetric in floating point.
inline CMatrix symmetrized(const CMatrix& h) {
  CMatrix out(h.rows(), h.cols());
  for (Eigen::Index j = 0; j < h.cols(); ++j)
    for (Eigen::Index i = 0; i <= j; ++i) {
      const Complex v = 0.5 * (h(i, j) + std::conj(h(j, i)));
      out(i, j) = v;
      out(j, i) = std::conj(v);
    }
  return out;
}

struct HermitianEigen {
  RVector values;
  CMatrix vectors;
};

// Eigendecomposition gate for everything built by functional calculus.
// Inputs within the tolerance are symmetrized, anything worse is rejected:
// silently fixing genuinely non-normal input would mask model bugs upstream.
inline HermitianEigen hermitian_eigen(const CMatrix& h, double herm_tol = 1e-10) {
  if (h.rows() != h.cols())
    throw std::invalid_argument("hermitian_eigen: matrix must be square");
  if (!is_hermitian(h, herm_tol))
    throw std::invalid_argument("hermitian_eigen: matrix is not Hermitian within tolerance");
  Eigen::SelfAdjointEigenSolver<CMatrix> es(symmetrized(h));
  if (es.info() != Eigen::Success)
    throw std::runtime_error("hermitian_eigen: eigensolver failed");
  return HermitianEigen{es.eigenvalues(), es.eigenvectors()};
}

inline CMatrix apply_spectral_function(const HermitianEigen& eig,
                                       const std::function<double(double)>& f) {
  RVector w(eig.values.size());
  for (Eigen::Index i = 0; i < w.size(); ++i) {
    const double fi = f(eig.values(i));
    if (!std::isfinite(fi))
      throw std::domain_error("apply_spectral_function: f undefined at an eigenvalue");
    w(i) = fi;
  }
  return eig.vectors * w.asDiagonal() * eig.vectors.adjoint();
}

// Shared per-(model, level) eigendecomposition store; safe for concurrent
// get_or_compute with single initialization per key.
class EigenCache {
 public:
  std::shared_ptr<const HermitianEigen> get_or_compute(
      const std::string& key, const std::function<HermitianEigen()>& make) {
    {
      std::lock_guard<std::mutex> lk(mu_);
      auto it = map_.find(key);
      if (it != map_.end()) return it->second;
    }
    auto fresh = std::make_shared<const HermitianEigen>(make());
    std::lock_guard<std::mutex> lk(mu_);
    auto [it, inserted] = map_.emplace(key, fresh);
    return it->second;
  }
  void clear() {
    std::lock_guard<std::mutex> lk(mu_);
    map_.clear();
  }

 private:
  std::mutex mu_;
  std::unordered_map<std::string, std::shared_ptr<const HermitianEigen>> map_;
};

inline CMatrix compress(const CMatrix& a, int n) {
  if (n > a.rows() || n > a.cols())
    throw std::invalid_argument("compress: block exceeds matrix");
  return a.topLeftCorner(n, n);
}

inline CMatrix kron(const CMatrix& a, const CMatrix& b) {
  CMatrix out(a.rows() * b.rows(), a.cols() * b.cols());
  for (Eigen::Index i = 0; i < a.rows(); ++i)
    for (Eigen::Index j = 0; j < a.cols(); ++j)
      out.block(i * b.rows(), j * b.cols(), b.rows(), b.cols()) = a(i, j) * b;
  return out;
}

}  // namespace wickrot
