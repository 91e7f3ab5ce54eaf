#pragma once

#include "wickrot/analysis.hpp"
#include "wickrot/core.hpp"
#include "wickrot/hermite.hpp"
#include "wickrot/models.hpp"
#include "wickrot/quadrature.hpp"

#include <Eigen/SVD>

#include <cmath>
#include <functional>
#include <vector>

namespace wickrot::pairing {

// Winding unitary u_m(x) = e^{2 i m arctan x}, the representative of the
// class m in the odd K-theory of the line.
inline std::function<Complex(double)> winding_function(int m) {
  return [m](double x) { return std::exp(kI * (2.0 * m * std::atan(x))); };
}

// u*[D_E, u] for the winding unitary: the multiplication function
// g_m(x) = -2m/(1+x^2).
inline std::function<double(double)> commutator_symbol(int m) {
  return [m](double x) { return -2.0 * m / (1.0 + x * x); };
}

// Matrix route: u* [D_E, u] with u realized as a multiplication operator in
// the model basis (Hermite models only).
inline CMatrix commutator_symbol_matrix(int m, const models::ModelTriple& model) {
  if (model.basis.kind != BasisKind::hermite)
    throw std::invalid_argument("commutator_symbol_matrix: Hermite-basis model required");
  const int n = model.level();
  const CMatrix u =
      hermite::multiplication_operator_complex(n, [m](double x) {
        return std::exp(kI * (2.0 * m * std::atan(x)));
      }, model.quadrature_nodes);
  const CMatrix& de = model.derived.wick_plus;
  return CMatrix(u.adjoint() * (de * u - u * de));
}

// Independent oracle: total phase increment of u around the arctan
// compactification of the line, divided by 2 pi.
inline int winding_oracle(const std::function<Complex(double)>& u, int grid_points = 20001,
                          double x_max = 50.0) {
  if (x_max < 50.0) throw std::invalid_argument("winding_oracle: X >= 50 required");
  if (grid_points < 16) throw std::invalid_argument("winding_oracle: grid too small");
  const double theta_max = std::atan(x_max);
  std::vector<Complex> vals(grid_points);
  for (int k = 0; k < grid_points; ++k) {
    const double theta = -theta_max + 2.0 * theta_max * k / (grid_points - 1);
    vals[k] = u(std::tan(theta));
    if (std::abs(std::abs(vals[k]) - 1.0) > 1e-13)
      throw std::invalid_argument("winding_oracle: |u| != 1 at a node");
  }
  // A true phase jump above pi aliases under arg(); jumps above pi/2 already
  // mean the grid undersamples the curve, so that is the raised condition.
  double total = 0.0;
  for (int k = 0; k + 1 < grid_points; ++k) {
    const double jump = std::arg(vals[k + 1] / vals[k]);
    if (std::abs(jump) > 0.5 * M_PI)
      throw std::runtime_error("winding_oracle: phase jump too large, grid too coarse");
    total += jump;
  }
  // closure through the point at infinity
  const double closure = std::arg(vals[0] / vals[grid_points - 1]);
  if (std::abs(closure) > 0.5 * M_PI)
    throw std::runtime_error("winding_oracle: closure jump too large");
  total += closure;
  const double raw = total / (2.0 * M_PI);
  const double rounded = std::round(raw);
  if (std::abs(raw - rounded) > 1e-6)
    throw std::runtime_error("winding_oracle: winding not integral");
  return static_cast<int>(rounded);
}

enum class ResidueMethod { analytic_kernel, truncated_operator };

struct IndexResult {
  double residue = 0.0;                      // the evaluated limit, paper convention "-m"
  std::vector<std::pair<double, double>> s_table;  // (s, (s-1/2) Tr(...)) diagnostics
  std::vector<std::pair<double, double>> t_table;  // McKean-Singer traces
  long long integer_pairing = 0;             // pairing := -residue, rounded
  double distance = 0.0;                     // |(-residue) - integer_pairing|
  long long oracle = 0;
  std::string method;
  double tolerance = 1e-10;
  bool pass = false;
};

// Residue pairing for the line model D_E = i d/dx + x. The analytic route
// evaluates (s - 1/2) Trace(g_m (1+D_E^2)^{-s}) through the closed-form trace;
// the limit at s = 1/2 is taken exactly via (s-1/2)Gamma(s-1/2) = Gamma(s+1/2).
inline IndexResult residue_pairing(int m, const models::ModelTriple& model,
                                   ResidueMethod method = ResidueMethod::analytic_kernel,
                                   std::vector<double> s_grid = {}) {
  if (s_grid.empty()) s_grid = {0.7, 0.6, 0.55, 0.52, 0.51, 0.505, 0.501};
  for (double s : s_grid)
    if (s <= 0.5)
      throw std::invalid_argument("residue_pairing: s grid must approach 1/2 from above");

  IndexResult out;
  const double g_integral =
      quadrature::integrate_line([m](double x) { return -2.0 * m / (1.0 + x * x); });

  if (method == ResidueMethod::analytic_kernel) {
    out.method = "analytic-kernel";
    out.tolerance = 1e-10;
    for (double s : s_grid) {
      // Trace(g (1+DE^2)^{-s}) = Gamma(s-1/2)/(2 sqrt(pi) Gamma(s)) int g
      const double tr = std::tgamma(s - 0.5) / (2.0 * std::sqrt(M_PI) * std::tgamma(s)) * g_integral;
      out.s_table.emplace_back(s, (s - 0.5) * tr);
    }
    out.residue = std::tgamma(1.0) / (2.0 * std::sqrt(M_PI) * std::tgamma(0.5)) * g_integral;
  } else {
    out.method = "truncated-operator";  // experimental: DE has continuous spectrum
    out.tolerance = 0.25;
    if (!is_hermitian(model.derived.wick_plus, 1e-10))
      throw std::invalid_argument("residue_pairing: D_E not Hermitian at truncation");
    const CMatrix g = hermite::multiplication_operator(
        model.level(), commutator_symbol(m), model.quadrature_nodes);
    const CMatrix de2 = symmetrized(model.derived.wick_plus * model.derived.wick_plus);
    analysis::TraceEngine engine(g, de2);
    for (double s : s_grid) out.s_table.emplace_back(s, (s - 0.5) * engine.zeta_full_power(s));
    out.residue = out.s_table.back().second;
  }

  const double pairing_raw = -out.residue;
  out.integer_pairing = std::llround(pairing_raw);
  out.distance = std::abs(pairing_raw - double(out.integer_pairing));
  out.oracle = winding_oracle(winding_function(m));
  out.pass = out.distance <= out.tolerance && out.integer_pairing == out.oracle;
  return out;
}

// Exact kernel-dimension oracle dim ker B - dim ker B*.
inline long long graded_index_exact(const CMatrix& b) {
  if (b.rows() == 0 || b.cols() == 0) return static_cast<long long>(b.cols() - b.rows());
  Eigen::JacobiSVD<CMatrix> svd(b);
  const RVector sv = svd.singularValues();
  const double floor = sv.size() ? 1e-10 * sv(0) : 0.0;
  long long rank = 0;
  for (Eigen::Index i = 0; i < sv.size(); ++i)
    if (sv(i) > floor && sv(i) > 0.0) ++rank;
  const long long ker_b = b.cols() - rank;
  const long long ker_bh = b.rows() - rank;
  return ker_b - ker_bh;
}

// Graded (McKean-Singer) index: Trace(Gamma e^{-t D_E^2}) for each t, which
// must be t-independent and integral for a genuine even index.
inline IndexResult mckean_singer_index(const models::ModelTriple& model,
                                       const std::vector<double>& t_list,
                                       double tolerance = 1e-10) {
  if (!model.grading.has_value())
    throw std::invalid_argument("mckean_singer_index: model has no grading");
  if (t_list.empty()) throw std::invalid_argument("mckean_singer_index: empty t list");
  IndexResult out;
  out.method = "graded-trace";
  out.tolerance = tolerance;
  const CMatrix de2 = symmetrized(model.derived.wick_plus * model.derived.wick_plus);
  analysis::TraceEngine engine(model.grading->matrix, de2);
  for (double t : t_list) out.t_table.emplace_back(t, engine.heat(t));

  // independent oracle: Gamma-odd block of D_E and its kernel dimensions
  const auto geig = hermitian_eigen(model.grading->matrix);
  std::vector<Eigen::Index> plus, minus;
  for (Eigen::Index i = 0; i < geig.values.size(); ++i)
    (geig.values(i) > 0 ? plus : minus).push_back(i);
  CMatrix vplus(geig.vectors.rows(), plus.size()), vminus(geig.vectors.rows(), minus.size());
  for (std::size_t i = 0; i < plus.size(); ++i) vplus.col(i) = geig.vectors.col(plus[i]);
  for (std::size_t i = 0; i < minus.size(); ++i) vminus.col(i) = geig.vectors.col(minus[i]);
  const CMatrix block = vminus.adjoint() * model.derived.wick_plus * vplus;
  out.oracle = graded_index_exact(block);

  const double first = out.t_table.front().second;
  out.residue = first;
  out.integer_pairing = std::llround(first);
  out.distance = std::abs(first - double(out.integer_pairing));
  bool steady = out.distance <= tolerance;
  for (const auto& [t, val] : out.t_table)
    if (std::abs(val - double(out.integer_pairing)) > tolerance) steady = false;
  out.pass = steady && out.integer_pairing == out.oracle;
  return out;
}

}  // namespace wickrot::pairing
