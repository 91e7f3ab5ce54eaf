#pragma once

#include "wickrot/core.hpp"
#include "wickrot/models.hpp"
#include "wickrot/operator_core.hpp"
#include "wickrot/parallel.hpp"

#include <algorithm>
#include <cmath>
#include <iomanip>
#include <limits>
#include <ostream>
#include <sstream>
#include <vector>

namespace wickrot::analysis {

// ---------------------------------------------------------------------------
// weights and norms of the summability machinery

// phi_s(T) = Trace((1+D^2)^{-s/4} T (1+D^2)^{-s/4}); D Hermitian at truncation.
inline double phi_weight(const CMatrix& t, const CMatrix& d, double s) {
  if (s <= 0) throw std::invalid_argument("phi_weight: s > 0 required");
  const auto eig = hermitian_eigen(d);
  const CMatrix core = eig.vectors.adjoint() * t * eig.vectors;
  double acc = 0.0;
  for (Eigen::Index k = 0; k < eig.values.size(); ++k) {
    const double lam = eig.values(k);
    acc += std::real(core(k, k)) * std::pow(1.0 + lam * lam, -0.5 * s);
  }
  return acc;
}

// Q_n(T) = (||T||^2 + phi_{p+1/n}(T*T) + phi_{p+1/n}(TT*))^{1/2}.
inline double qn_norm(const CMatrix& t, const CMatrix& d, double p, int n) {
  if (p < 1.0 || n < 1) throw std::invalid_argument("qn_norm: p >= 1 and n >= 1 required");
  const double s = p + 1.0 / n;
  const double op = operator_norm(t);
  const double a = phi_weight(CMatrix(t.adjoint() * t), d, s);
  const double b = phi_weight(CMatrix(t * t.adjoint()), d, s);
  return std::sqrt(op * op + a + b);
}

// Single-factorization upper bound Q_n(T1) Q_n(T2) for the P_n norm of
// T = T1 T2. Only ever an upper bound; the infimum over factorizations is
// not computed.
inline double p1_upper_bound(const CMatrix& t1, const CMatrix& t2, const CMatrix& d, double p,
                             int n, const CMatrix* t_check = nullptr) {
  if (t_check) {
    const double scale = std::max(1.0, t_check->norm());
    if ((*t_check - t1 * t2).norm() > 1e-12 * scale)
      throw std::invalid_argument("p1_upper_bound: T != T1*T2");
  }
  return qn_norm(t1, d, p, n) * qn_norm(t2, d, p, n);
}

// ---------------------------------------------------------------------------
// heat / zeta trace engine

// Eigendecomposition-backed evaluator for Trace(a f(H)) with Hermitian PSD H;
// one decomposition serves a whole (s, t) sweep.
class TraceEngine {
 public:
  TraceEngine(const CMatrix& a, const CMatrix& h, double herm_tol = 1e-10,
              double psd_tol = 1e-10)
      : eig_(hermitian_eigen(h, herm_tol)) {
    const double top = eig_.values.size() ? eig_.values.cwiseAbs().maxCoeff() : 0.0;
    if (eig_.values.size() && eig_.values.minCoeff() < -psd_tol * std::max(1.0, top))
      throw std::invalid_argument("TraceEngine: H is not positive semi-definite");
    coef_ = (eig_.vectors.adjoint() * a * eig_.vectors).diagonal();
  }

  double heat(double t) const {
    if (t <= 0) throw std::invalid_argument("heat trace: t > 0 required");
    double acc = 0.0;
    for (Eigen::Index k = 0; k < coef_.size(); ++k)
      acc += std::real(coef_(k)) * std::exp(-t * std::max(eig_.values(k), 0.0));
    return acc;
  }

  double zeta(double s) const {
    if (s <= 0) throw std::invalid_argument("zeta trace: s > 0 required");
    double acc = 0.0;
    for (Eigen::Index k = 0; k < coef_.size(); ++k)
      acc += std::real(coef_(k)) * std::pow(1.0 + std::max(eig_.values(k), 0.0), -0.5 * s);
    return acc;
  }

  // zeta with full exponent: Trace(a (1+H)^{-s})
  double zeta_full_power(double s) const { return zeta(2.0 * s); }

  double lambda_max() const { return eig_.values.size() ? eig_.values.maxCoeff() : 0.0; }

 private:
  HermitianEigen eig_;
  CVector coef_;
};

inline double heat_trace(const CMatrix& a, const CMatrix& h, double t) {
  return TraceEngine(a, h).heat(t);
}

inline double zeta_trace(const CMatrix& a, const CMatrix& h, double s) {
  return TraceEngine(a, h).zeta(s);
}

// ---------------------------------------------------------------------------
// Mellin cross check: (1/Gamma(s/2)) int_0^inf t^{s/2-1} e^{-t} Tr(a e^{-tH}) dt
// against the direct zeta trace. Log-substituted Simpson rule; non-convergence
// is flagged, never thrown.

struct MellinSpec {
  double t_min = 1e-16;
  double t_max = 60.0;
  int points = 8193;  // odd
};

struct MellinResult {
  double mellin_value = 0.0;
  double zeta_value = 0.0;
  double discrepancy = 0.0;
  bool converged = true;
};

inline MellinResult mellin_cross_check(const CMatrix& a, const CMatrix& h, double s,
                                       MellinSpec spec = {}) {
  TraceEngine engine(a, h);
  const double u_lo = std::log(spec.t_min), u_hi = std::log(spec.t_max);
  int m = spec.points;
  if (m % 2 == 0) ++m;
  auto integrand = [&](double u) {
    const double t = std::exp(u);
    return std::pow(t, 0.5 * s) * std::exp(-t) * engine.heat(t);
  };
  auto simpson = [&](int pts) {
    const double hstep = (u_hi - u_lo) / (pts - 1);
    double acc = integrand(u_lo) + integrand(u_hi);
    for (int i = 1; i < pts - 1; ++i) acc += integrand(u_lo + i * hstep) * (i % 2 ? 4.0 : 2.0);
    return acc * hstep / 3.0;
  };
  const double full = simpson(m);
  const double half = simpson(m / 2 + 1);
  MellinResult out;
  out.mellin_value = full / std::tgamma(0.5 * s);
  out.zeta_value = engine.zeta(s);
  out.discrepancy = std::abs(out.mellin_value - out.zeta_value);
  out.converged = std::abs(full - half) <= 1e-7 * std::max(1.0, std::abs(full));
  return out;
}

// ---------------------------------------------------------------------------
// spectral dimension

struct ZetaReport {
  std::vector<double> s_grid;
  std::vector<int> levels;
  RMatrix traces;                // (s index, level index)
  std::vector<bool> stabilized;  // per s: relative two-level difference < eps_stab
  double eps_stab = 1e-3;
  double p_hat = std::numeric_limits<double>::quiet_NaN();
  double bracket_lo = std::numeric_limits<double>::quiet_NaN();
  double bracket_hi = std::numeric_limits<double>::quiet_NaN();
  std::string verdict;  // estimated | dimension-0-at-desk-scale | inconclusive
  std::string method = "weyl-two-level";
  std::vector<double> per_s_estimates;
};

struct SpectralDimensionOptions {
  double eps_stab = 1e-3;
  double noise_floor = 1e-12;  // relative size below which deltas are fp noise
};

// Two-level Weyl extrapolation. Writing Lambda(N) for the top eigenvalue of
// 1+H at level N, tails of the zeta trace scale like Lambda^{(p-s)/2}, so
//   p(s) = s + 2 ln(Delta_top/Delta_mid) / ln(Lambda_top/Lambda_mid)
// for every s; the median over the grid is the estimate. The fixed-threshold
// stabilization flags are reported alongside but do not drive p_hat: no
// single threshold reproduces the known dimension across these level lists.
inline ZetaReport spectral_dimension_estimate(
    const std::function<std::pair<CMatrix, CMatrix>(int)>& level_gen,
    const std::vector<double>& s_grid, const std::vector<int>& levels,
    SpectralDimensionOptions opts = {}) {
  if (levels.size() < 3)
    throw std::invalid_argument("spectral_dimension_estimate: need >= 3 levels");
  for (std::size_t i = 1; i < levels.size(); ++i)
    if (levels[i] <= levels[i - 1])
      throw std::invalid_argument("spectral_dimension_estimate: levels must increase");
  if (s_grid.empty()) throw std::invalid_argument("spectral_dimension_estimate: empty s grid");

  ZetaReport rep;
  rep.s_grid = s_grid;
  rep.levels = levels;
  rep.eps_stab = opts.eps_stab;
  rep.traces = RMatrix::Zero(s_grid.size(), levels.size());
  std::vector<double> lam_tops(levels.size(), 0.0);

  std::vector<std::unique_ptr<TraceEngine>> engines(levels.size());
  parallel_for(levels.size(), [&](std::size_t li) {
    auto [a, h] = level_gen(levels[li]);
    engines[li] = std::make_unique<TraceEngine>(a, h);
    lam_tops[li] = 1.0 + engines[li]->lambda_max();
  });
  parallel_for(s_grid.size(), [&](std::size_t si) {
    for (std::size_t li = 0; li < levels.size(); ++li)
      rep.traces(si, li) = engines[li]->zeta(s_grid[si]);
  });

  const std::size_t top = levels.size() - 1;
  rep.stabilized.resize(s_grid.size());
  for (std::size_t si = 0; si < s_grid.size(); ++si) {
    const double t_top = rep.traces(si, top), t_mid = rep.traces(si, top - 1);
    rep.stabilized[si] =
        std::abs(t_top - t_mid) < opts.eps_stab * std::max(std::abs(t_top), 1e-300);
  }

  bool all_flat = true;
  for (std::size_t si = 0; si < s_grid.size() && all_flat; ++si) {
    const double scale = std::max(1.0, std::abs(rep.traces(si, top)));
    if (std::abs(rep.traces(si, top) - rep.traces(si, top - 1)) > 1e-13 * scale) all_flat = false;
  }
  if (all_flat) {
    rep.p_hat = s_grid.front();
    rep.bracket_lo = rep.bracket_hi = s_grid.front();
    rep.verdict = "dimension-0-at-desk-scale";
    return rep;
  }

  const double lam_ratio = lam_tops[top] / lam_tops[top - 1];
  for (std::size_t si = 0; si < s_grid.size(); ++si) {
    const double d1 = rep.traces(si, top) - rep.traces(si, top - 1);
    const double d2 = rep.traces(si, top - 1) - rep.traces(si, top - 2);
    const double scale = std::max(1.0, std::abs(rep.traces(si, top)));
    if (d1 > opts.noise_floor * scale && d2 > opts.noise_floor * scale && lam_ratio > 1.0) {
      rep.per_s_estimates.push_back(s_grid[si] + 2.0 * std::log(d1 / d2) / std::log(lam_ratio));
    }
  }
  if (rep.per_s_estimates.empty()) {
    rep.verdict = "inconclusive";
    return rep;
  }
  std::vector<double> sorted = rep.per_s_estimates;
  std::sort(sorted.begin(), sorted.end());
  rep.p_hat = sorted[sorted.size() / 2];
  // snap the one-grid-step bracket around the estimate
  double lo = s_grid.front(), hi = s_grid.back();
  for (std::size_t si = 0; si < s_grid.size(); ++si) {
    if (s_grid[si] <= rep.p_hat) lo = s_grid[si];
  }
  for (std::size_t si = s_grid.size(); si-- > 0;) {
    if (s_grid[si] >= rep.p_hat) hi = s_grid[si];
  }
  rep.bracket_lo = std::min(lo, hi);
  rep.bracket_hi = std::max(lo, hi);
  rep.verdict = "estimated";
  return rep;
}

// Closed-form route for the line model D_E = i d/dx + x:
// Trace(g(1+D_E^2)^{-s/2}) = Gamma(s/2-1/2) / (2 sqrt(pi) Gamma(s/2)) int g.
inline double line_zeta_constant(double s) {
  return std::tgamma(0.5 * s - 0.5) / (2.0 * std::sqrt(M_PI) * std::tgamma(0.5 * s));
}

inline double line_zeta_trace(double s, double g_integral) {
  return line_zeta_constant(s) * g_integral;
}

inline ZetaReport line_spectral_dimension(const std::vector<double>& s_grid, double g_integral) {
  ZetaReport rep;
  rep.s_grid = s_grid;
  rep.method = "analytic-pole";
  rep.traces = RMatrix::Zero(s_grid.size(), 1);
  rep.levels = {0};
  rep.stabilized.assign(s_grid.size(), true);
  double prev = s_grid.front();
  for (std::size_t si = 0; si < s_grid.size(); ++si)
    rep.traces(si, 0) = line_zeta_trace(s_grid[si], g_integral);
  // the trace constant has its pole at s = 1: first grid point with a
  // positive finite value marks the dimension from above
  for (std::size_t si = 0; si < s_grid.size(); ++si) {
    const double c = line_zeta_constant(s_grid[si]);
    if (std::isfinite(c) && c > 0.0) {
      rep.p_hat = s_grid[si];
      rep.bracket_lo = prev;
      rep.bracket_hi = s_grid[si];
      rep.verdict = "estimated";
      return rep;
    }
    prev = s_grid[si];
  }
  rep.verdict = "inconclusive";
  return rep;
}

// ---------------------------------------------------------------------------
// order evidence

// One (T, D) pair built at a padded level; norms are taken on the leading
// observe x observe block so boundary pollution from the truncation edge
// stays out of the growth measurements.
struct OrderSample {
  CMatrix T;
  CMatrix D;
  int observe = 0;
};

struct OrderEvidence {
  double claimed_order = 0.0;
  int k_max = 3;
  std::vector<int> levels;
  RMatrix norms;   // (level index, k)
  RMatrix ratios;  // (pair index over last two level pairs, k)
  std::string verdict;  // supported | refuted | inconclusive
  double tol_growth = 0.05;
};

inline OrderEvidence order_evidence(const std::function<OrderSample(int)>& sample_gen, double r,
                                    int k_max, const std::vector<int>& levels,
                                    double tol_growth = 0.05) {
  if (levels.size() < 3) throw std::invalid_argument("order_evidence: need >= 3 levels");
  if (k_max < 0) throw std::invalid_argument("order_evidence: k_max >= 0");
  OrderEvidence ev;
  ev.claimed_order = r;
  ev.k_max = k_max;
  ev.levels = levels;
  ev.tol_growth = tol_growth;
  ev.norms = RMatrix::Zero(levels.size(), k_max + 1);

  parallel_for(levels.size(), [&](std::size_t li) {
    const OrderSample smp = sample_gen(levels[li]);
    const auto eig = hermitian_eigen(smp.D);
    RVector root(eig.values.size()), pw(eig.values.size());
    for (Eigen::Index i = 0; i < eig.values.size(); ++i) {
      const double q = 1.0 + eig.values(i) * eig.values(i);
      root(i) = std::sqrt(q);
      pw(i) = std::pow(q, -0.5 * r);
    }
    const CMatrix sqrtop = eig.vectors * root.asDiagonal() * eig.vectors.adjoint();
    const CMatrix powop = eig.vectors * pw.asDiagonal() * eig.vectors.adjoint();
    CMatrix cur = powop * smp.T;
    for (int k = 0; k <= k_max; ++k) {
      ev.norms(li, k) = operator_norm(compress(cur, smp.observe));
      if (k < k_max) cur = sqrtop * cur - cur * sqrtop;
    }
  });

  const std::size_t nl = levels.size();
  ev.ratios = RMatrix::Zero(2, k_max + 1);
  bool any_refuted = false, all_supported = true;
  for (int k = 0; k <= k_max; ++k) {
    int grow = 0;
    for (int pair = 0; pair < 2; ++pair) {
      const double lo = ev.norms(nl - 3 + pair, k);
      const double hi = ev.norms(nl - 2 + pair, k);
      const double ratio = (lo <= 1e-14 && hi <= 1e-14) ? 1.0 : hi / std::max(lo, 1e-14);
      ev.ratios(pair, k) = ratio;
      if (ratio > 1.0 + tol_growth) {
        ++grow;
        all_supported = false;
      }
    }
    if (grow == 2) any_refuted = true;
  }
  ev.verdict = all_supported ? "supported" : (any_refuted ? "refuted" : "inconclusive");
  return ev;
}

// ---------------------------------------------------------------------------
// S^n commutator sets: S^0 = A u [D,A] u [D*,A];
// S^n = [<D>^2, S^{n-1}] u [R_D, S^{n-1}], with provenance labels.

struct LabeledOperator {
  std::string provenance;
  CMatrix matrix;
};

inline std::vector<LabeledOperator> sn_generate(const models::ModelTriple& model, int n) {
  if (n < 0 || n > 3) throw std::invalid_argument("sn_generate: n must be in [0, 3]");
  const CMatrix& d = model.D.matrix;
  const CMatrix dh = d.adjoint();
  std::vector<LabeledOperator> current;
  for (const auto& [label, a] : model.algebra) {
    current.push_back({label, a.matrix});
    current.push_back({"[D," + label + "]", d * a.matrix - a.matrix * d});
    current.push_back({"[D*," + label + "]", dh * a.matrix - a.matrix * dh});
  }
  const CMatrix& ms = model.derived.mean_square;
  const CMatrix& rd = model.derived.curvature_defect;
  for (int depth = 1; depth <= n; ++depth) {
    std::vector<LabeledOperator> next;
    next.reserve(current.size() * 2);
    for (const auto& op : current) {
      next.push_back({"[<D>^2," + op.provenance + "]", ms * op.matrix - op.matrix * ms});
      next.push_back({"[R_D," + op.provenance + "]", rd * op.matrix - op.matrix * rd});
    }
    current.swap(next);
  }
  return current;
}

// ---------------------------------------------------------------------------
// convergence tables

struct CsvRow {
  std::string model;
  std::string quantity;
  double s = 0.0;
  int level = 0;
  double value = 0.0;
  bool stabilized = false;
};

inline void write_convergence_csv(std::ostream& os, std::vector<CsvRow> rows) {
  std::sort(rows.begin(), rows.end(), [](const CsvRow& a, const CsvRow& b) {
    if (a.quantity != b.quantity) return a.quantity < b.quantity;
    if (a.s != b.s) return a.s < b.s;
    if (a.level != b.level) return a.level < b.level;
    return a.model < b.model;
  });
  os << "model,quantity,s,N,value,stabilized_flag\n";
  for (const auto& r : rows) {
    std::ostringstream line;
    line << r.model << ',' << r.quantity << ',' << std::setprecision(17) << r.s << ',' << r.level
         << ',' << std::setprecision(17) << r.value << ',' << (r.stabilized ? 1 : 0);
    os << line.str() << '\n';
  }
}

inline std::vector<CsvRow> zeta_report_rows(const std::string& model, const std::string& quantity,
                                            const ZetaReport& rep) {
  std::vector<CsvRow> rows;
  for (std::size_t si = 0; si < rep.s_grid.size(); ++si)
    for (std::size_t li = 0; li < rep.levels.size(); ++li) {
      CsvRow row;
      row.model = model;
      row.quantity = quantity;
      row.s = rep.s_grid[si];
      row.level = rep.levels[li];
      row.value = rep.traces(si, li);
      row.stabilized = li + 1 == rep.levels.size() ? rep.stabilized[si] : false;
      rows.push_back(row);
    }
  return rows;
}

}  // namespace wickrot::analysis
