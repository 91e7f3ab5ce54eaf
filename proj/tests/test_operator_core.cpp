#include "wickrot/operator_core.hpp"
#include "wickrot/hermite.hpp"

#include <catch2/catch_amalgamated.hpp>

#include "test_support.hpp"

using namespace wickrot;
using testsupport::max_abs;
using testsupport::random_complex;
using testsupport::random_hermitian;

namespace {

CMatrix mat2(Complex a, Complex b, Complex c, Complex d) {
  CMatrix m(2, 2);
  m << a, b, c, d;
  return m;
}

}  // namespace

TEST_CASE("adjoint is the conjugate transpose and an involution", "[operator-core]") {
  const CMatrix t = mat2(0, 0, 1, 0);
  REQUIRE(max_abs(adjoint(t) - mat2(0, 1, 0, 0)) == 0.0);

  const CMatrix h = random_hermitian(5, 11);
  REQUIRE(max_abs(adjoint(h) - h) == 0.0);

  const CMatrix ii = kI * CMatrix::Identity(3, 3);
  REQUIRE(max_abs(adjoint(ii) + ii) == 0.0);

  const CMatrix r = random_complex(7, 7, 23);
  REQUIRE(max_abs(adjoint(adjoint(r)) - r) == 0.0);

  TruncatedOperator top(r, BasisSpec::abstract(7), "T");
  REQUIRE(max_abs(adjoint(top).matrix - r.adjoint()) == 0.0);
}

TEST_CASE("mean_square on the nilpotent 2x2 and the oscillator", "[operator-core]") {
  REQUIRE(max_abs(mean_square(mat2(0, 0, 1, 0)) - 0.5 * CMatrix::Identity(2, 2)) < 1e-15);

  // harmonic oscillator at Hermite level 4: diag(1,3,5,3) with the top entry
  // a truncation boundary artifact
  const CMatrix d = std::sqrt(2.0) * hermite::annihilation(4);
  CMatrix expect = CMatrix::Zero(4, 4);
  expect(0, 0) = 1;
  expect(1, 1) = 3;
  expect(2, 2) = 5;
  expect(3, 3) = 3;
  REQUIRE(max_abs(mean_square(d) - expect) < 1e-13);

  const CMatrix h = random_hermitian(6, 5);
  REQUIRE((mean_square(h) - h * h).norm() < 1e-13 * std::max(1.0, (h * h).norm()));
}

TEST_CASE("curvature_defect vanishes for normal squares and matches the ladder form",
          "[operator-core]") {
  const CMatrix h = random_hermitian(6, 7);
  REQUIRE(max_abs(curvature_defect(h)) < 1e-14 * std::max(1.0, h.norm()));

  CMatrix b = random_complex(3, 2, 9);
  CMatrix d = CMatrix::Zero(5, 5);
  d.bottomLeftCorner(3, 2) = b;
  REQUIRE(max_abs(curvature_defect(d)) == 0.0);  // D^2 = D*^2 = 0 exactly

  // oscillator: R_D = i(a^2 - a*^2), entries +-i sqrt(n(n-1)) on the second
  // off-diagonals
  const int n = 8;
  const CMatrix a = hermite::annihilation(n);
  const CMatrix rd = curvature_defect(CMatrix(std::sqrt(2.0) * a));
  const CMatrix expect = kI * (a * a - (a * a).adjoint().eval());
  REQUIRE(max_abs(rd - expect) < 1e-13);
  REQUIRE(std::abs(rd(2, 4) - kI * std::sqrt(12.0)) < 1e-13);  // n=4 (1-based): sqrt(4*3)
}

TEST_CASE("wick_rotate collapses on self-adjoint input and rotates finite geometries",
          "[operator-core]") {
  const CMatrix h = random_hermitian(5, 3);
  REQUIRE(max_abs(wick_rotate(h, WickOrientation::plus) - h) < 1e-15 * std::max(1.0, max_abs(h)));
  REQUIRE(max_abs(wick_rotate(h, WickOrientation::minus) - h) < 1e-15 * std::max(1.0, max_abs(h)));

  const CMatrix b = random_complex(2, 3, 31);
  CMatrix d = CMatrix::Zero(5, 5);
  d.bottomLeftCorner(2, 3) = b;
  const Complex phase = std::exp(kI * (M_PI / 4.0)) / std::sqrt(2.0);
  CMatrix expect = CMatrix::Zero(5, 5);
  expect.topRightCorner(3, 2) = -kI * b.adjoint();
  expect.bottomLeftCorner(2, 3) = b;
  expect *= phase;
  REQUIRE(max_abs(wick_rotate(d, WickOrientation::plus) - expect) < 1e-14);

  // oscillator: D = d/dx + x rotates to i d/dx + x
  const int n = 10;
  const CMatrix dd = std::sqrt(2.0) * hermite::annihilation(n);
  const CMatrix de = wick_rotate(dd, WickOrientation::plus);
  const CMatrix expect_osc = kI * hermite::derivative_matrix(n) + hermite::position_matrix(n);
  REQUIRE(max_abs(de - expect_osc) < 1e-13);
}

TEST_CASE("wick rotation algebra on random matrices", "[operator-core]") {
  // D_E, tilde D_E Hermitian; squares decompose as <D>^2 +- R_D; difference
  // of squares is 2 R_D; D_E^2 is PSD
  for (unsigned long seed = 1; seed <= 25; ++seed) {
    const int n = 2 + static_cast<int>(seed % 15);
    const CMatrix d = random_complex(n, n, seed * 101);
    const DerivedOperators ops = derive_operators(d);
    REQUIRE(hermiticity_residual(ops.wick_plus) == 0.0);
    REQUIRE(hermiticity_residual(ops.wick_minus) == 0.0);
    const double scale = std::max(1.0, ops.mean_square.norm());
    REQUIRE((ops.wick_plus * ops.wick_plus - ops.mean_square - ops.curvature_defect).norm() <
            1e-12 * scale);
    REQUIRE((ops.wick_minus * ops.wick_minus - ops.mean_square + ops.curvature_defect).norm() <
            1e-12 * scale);
    REQUIRE((ops.wick_plus * ops.wick_plus - ops.wick_minus * ops.wick_minus -
             2.0 * ops.curvature_defect)
                .norm() < 1e-12 * scale);
    const auto eig = hermitian_eigen(ops.mean_square);
    REQUIRE(eig.values.minCoeff() >= -1e-12 * std::max(1.0, eig.values.maxCoeff()));
  }
}

TEST_CASE("universal bounds hold at every truncation", "[operator-core]") {
  for (unsigned long seed = 1; seed <= 10; ++seed) {
    const int n = 3 + static_cast<int>(seed % 9);
    const CMatrix d = 3.0 * random_complex(n, n, seed * 7 + 1);
    const CMatrix ms = mean_square(d);
    const CMatrix rd = curvature_defect(d);
    const auto eig = hermitian_eigen(ms);
    RVector w(eig.values.size());
    for (Eigen::Index i = 0; i < w.size(); ++i)
      w(i) = 1.0 / std::sqrt(1.0 + std::max(eig.values(i), 0.0));
    const CMatrix invroot = eig.vectors * w.asDiagonal() * eig.vectors.adjoint();
    REQUIRE(operator_norm(d * invroot) <= std::sqrt(2.0) + 1e-10);
    REQUIRE(operator_norm(invroot * rd * invroot) <= 2.0 + 1e-10);
  }
}

TEST_CASE("krein_adjoint follows J T* J", "[operator-core]") {
  FundamentalSymmetry id(CMatrix::Identity(2, 2), SymmetryConvention::self_adjoint_unitary);
  const CMatrix t = random_complex(2, 2, 77);
  REQUIRE(max_abs(krein_adjoint(t, id) - t.adjoint()) == 0.0);

  CMatrix s3 = mat2(1, 0, 0, -1);
  FundamentalSymmetry j3(s3, SymmetryConvention::self_adjoint_unitary);
  REQUIRE(max_abs(krein_adjoint(mat2(0, 1, 0, 0), j3) - mat2(0, 0, -1, 0)) == 0.0);

  // Krein-self-adjoint fixed point: T = X + J X* J satisfies T = J T* J
  const CMatrix x = random_complex(2, 2, 13);
  const CMatrix ksa = x + s3 * x.adjoint() * s3;
  REQUIRE(max_abs(krein_adjoint(ksa, j3) - ksa) < 1e-15);

  // beta convention converts via J = i beta
  CMatrix s2 = mat2(0, -kI, kI, 0);
  FundamentalSymmetry beta(CMatrix(-kI * s2), SymmetryConvention::anti_self_adjoint);
  REQUIRE(beta.residual() < 1e-15);
  const CMatrix viaj = krein_adjoint(t, beta);
  REQUIRE(max_abs(viaj - s2 * t.adjoint() * s2) < 1e-15);

  FundamentalSymmetry wrong(CMatrix::Identity(3, 3), SymmetryConvention::self_adjoint_unitary);
  REQUIRE_THROWS_AS(krein_adjoint(t, wrong), std::invalid_argument);
}

TEST_CASE("delta_map iterated commutator", "[operator-core]") {
  CMatrix d = mat2(0, 0, 0, 1);
  CMatrix t = mat2(0, 1, 0, 0);
  REQUIRE(max_abs(delta_map(t, d, 0) - t) == 0.0);
  REQUIRE(max_abs(delta_map(d, d, 1)) < 1e-14);  // commuting input
  const CMatrix once = delta_map(t, d, 1);
  REQUIRE(max_abs(once - (1.0 - std::sqrt(2.0)) * t) < 1e-14);
  const CMatrix twice = delta_map(t, d, 2);
  REQUIRE(max_abs(twice - (1.0 - std::sqrt(2.0)) * (1.0 - std::sqrt(2.0)) * t) < 1e-14);

  REQUIRE_THROWS_AS(delta_map(t, mat2(0, 1, 0, 0), 1), std::invalid_argument);
}

TEST_CASE("L and R maps", "[operator-core]") {
  CMatrix d = mat2(0, 0, 0, 1);
  CMatrix t = mat2(0, 1, 0, 0);
  REQUIRE(max_abs(lr_map(d, d, LRSide::left)) < 1e-14);
  REQUIRE(max_abs(lr_map(t, d, LRSide::left) - mat2(0, -1, 0, 0)) < 1e-14);
  // [D^2,T](1+D^2)^{-1/2} scales the column instead
  REQUIRE(max_abs(lr_map(t, d, LRSide::right) - mat2(0, -1.0 / std::sqrt(2.0), 0, 0)) < 1e-14);

  // T commuting with (1+D^2)^{1/2}: L(T) = R(T)
  const CMatrix h = random_hermitian(4, 19);
  CMatrix poly = h * h + 2.0 * h + CMatrix::Identity(4, 4);
  REQUIRE(max_abs(lr_map(poly, h, LRSide::left) - lr_map(poly, h, LRSide::right)) < 1e-11);
}

TEST_CASE("delta, L, R finite-dimensional consistency identity", "[operator-core]") {
  // [(1+D^2), T] = (1+D^2)^{1/2} delta(T) + delta(T) (1+D^2)^{1/2}
  const CMatrix d = random_hermitian(8, 3);
  const CMatrix t = random_complex(8, 8, 4);
  const CMatrix one_d2 = CMatrix::Identity(8, 8) + d * d;
  const auto eig = hermitian_eigen(d);
  RVector w(8);
  for (int i = 0; i < 8; ++i) w(i) = std::sqrt(1.0 + eig.values(i) * eig.values(i));
  const CMatrix root = eig.vectors * w.asDiagonal() * eig.vectors.adjoint();
  const CMatrix lhs = one_d2 * t - t * one_d2;
  const CMatrix dt = delta_map(t, d, 1);
  REQUIRE((lhs - (root * dt + dt * root)).norm() < 1e-11 * std::max(1.0, lhs.norm()));
}

TEST_CASE("sigma conjugation group", "[operator-core]") {
  const CMatrix d = random_hermitian(5, 21);
  const CMatrix t = random_complex(5, 5, 22);
  REQUIRE(max_abs(sigma_conjugate(t, d, Complex(0, 0)) - t) < 1e-13);

  const Complex z(0.7, 0.3), w(-0.2, 0.5);
  const CMatrix lhs = sigma_conjugate(sigma_conjugate(t, d, z), d, w);
  const CMatrix rhs = sigma_conjugate(t, d, z + w);
  REQUIRE((lhs - rhs).norm() < 1e-12 * std::max(1.0, rhs.norm()));

  CMatrix diag = CMatrix::Zero(3, 3);
  diag(0, 0) = 1.0;
  diag(1, 1) = 2.0;
  diag(2, 2) = -1.0;
  CMatrix e01 = CMatrix::Zero(3, 3);
  e01(0, 1) = 1.0;
  const Complex zz(1.3, -0.4);
  const Complex factor = std::pow((1.0 + 1.0) / (1.0 + 4.0), 0.5 * zz);
  REQUIRE(max_abs(sigma_conjugate(e01, diag, zz) - factor * e01) < 1e-13);
}

TEST_CASE("functional calculus", "[operator-core]") {
  const CMatrix h = random_hermitian(6, 31);
  REQUIRE((func_calculus(h, [](double x) { return x; }) - h).norm() < 1e-12);

  CMatrix diag = CMatrix::Zero(2, 2);
  diag(0, 0) = 1.0;
  diag(1, 1) = 3.0;
  const CMatrix inv = func_calculus(diag, [](double x) { return 1.0 / (1.0 + x); });
  REQUIRE(std::abs(inv(0, 0) - Complex(0.5, 0)) < 1e-15);
  REQUIRE(std::abs(inv(1, 1) - Complex(0.25, 0)) < 1e-15);

  for (double t : {0.25, 1.0}) {
    const CMatrix fwd = func_calculus(h, [t](double x) { return std::exp(-t * x); });
    const CMatrix back = func_calculus(h, [t](double x) { return std::exp(t * x); });
    REQUIRE((fwd * back - CMatrix::Identity(6, 6)).norm() < 1e-12);
  }

  REQUIRE_THROWS_AS(func_calculus(random_complex(4, 4, 8), [](double x) { return x; }),
                    std::invalid_argument);
  REQUIRE_THROWS_AS(func_calculus(diag, [](double x) { return 1.0 / (x - 1.0); }),
                    std::domain_error);
}

TEST_CASE("nested truncations of Hermite-basis operators agree", "[operator-core]") {
  const CMatrix d_small = std::sqrt(2.0) * hermite::annihilation(12);
  const CMatrix d_large = std::sqrt(2.0) * hermite::annihilation(20);
  REQUIRE(max_abs(CMatrix(d_large.topLeftCorner(12, 12)) - d_small) == 0.0);

  // quadrature-built multiplication operators: nested within documented 1e-12
  // once the 4N-node rule has converged (N >= 24 for these samples)
  auto g = [](double x) { return std::exp(-x * x); };
  const CMatrix a_small = hermite::multiplication_operator(24, g);
  const CMatrix a_large = hermite::multiplication_operator(40, g);
  REQUIRE(max_abs(CMatrix(a_large.topLeftCorner(24, 24)) - a_small) < 1e-12);
}
