#include "wickrot/index_pairing.hpp"

#include <catch2/catch_amalgamated.hpp>

#include "test_support.hpp"

using namespace wickrot;
using namespace wickrot::pairing;
using testsupport::max_abs;
using testsupport::random_complex;

TEST_CASE("winding unitaries and the phase-counting oracle", "[index]") {
  for (int m : {-3, -1, 0, 1, 2}) {
    const auto u = winding_function(m);
    for (double x : {-25.0, -0.5, 0.0, 3.0}) REQUIRE(std::abs(std::abs(u(x)) - 1.0) < 1e-13);
    REQUIRE(winding_oracle(u) == m);
  }
  // constant unitary winds zero times
  REQUIRE(winding_oracle([](double) { return Complex(1, 0); }) == 0);

  // coarse grid: adjacent phase jumps exceed pi
  REQUIRE_THROWS_AS(winding_oracle(winding_function(40), 17), std::runtime_error);
  // non-unimodular samples rejected
  REQUIRE_THROWS_AS(winding_oracle([](double x) { return Complex(2, 0) * std::exp(kI * x); }),
                    std::invalid_argument);
}

TEST_CASE("commutator symbol", "[index]") {
  const auto g1 = commutator_symbol(1);
  REQUIRE(g1(0.0) == Catch::Approx(-2.0));
  REQUIRE(g1(1.0) == Catch::Approx(-1.0));
  const auto g0 = commutator_symbol(0);
  REQUIRE(g0(0.7) == 0.0);
  const auto gm2 = commutator_symbol(-2);
  REQUIRE(gm2(0.0) == Catch::Approx(4.0));
  REQUIRE(gm2(2.0) == Catch::Approx(0.8));
}

TEST_CASE("matrix commutator symbol matches the multiplication operator in the bulk",
          "[index]") {
  const auto model = models::harmonic_oscillator(256);
  const CMatrix sym = commutator_symbol_matrix(1, model);
  const CMatrix gm =
      hermite::multiplication_operator(256, commutator_symbol(1), model.quadrature_nodes);
  const int bulk = 64;
  REQUIRE(max_abs(CMatrix(sym.topLeftCorner(bulk, bulk) - gm.topLeftCorner(bulk, bulk))) < 1e-8);
}

TEST_CASE("analytic residue pairing reproduces the closed-form limit", "[index]") {
  const auto model = models::harmonic_oscillator(16);  // analytic route ignores the level
  for (int m : {-2, -1, 0, 1, 2}) {
    const auto res = residue_pairing(m, model, ResidueMethod::analytic_kernel);
    REQUIRE(std::abs(res.residue - double(-m)) < 1e-10);
    REQUIRE(res.integer_pairing == m);
    REQUIRE(res.oracle == m);
    REQUIRE(res.pass);
    // the s table approaches the limit from above
    const double last_gap = std::abs(res.s_table.back().second - double(-m));
    const double first_gap = std::abs(res.s_table.front().second - double(-m));
    REQUIRE(last_gap <= first_gap + 1e-12);
  }
  REQUIRE_THROWS_AS(
      residue_pairing(1, model, ResidueMethod::analytic_kernel, {0.6, 0.5}),
      std::invalid_argument);
}

TEST_CASE("truncated residue route is exposed with diagnostics, not a certificate", "[index]") {
  const auto model = models::harmonic_oscillator(128);
  const auto res =
      residue_pairing(1, model, ResidueMethod::truncated_operator, {0.9, 0.8, 0.7, 0.6});
  REQUIRE(res.method == "truncated-operator");
  REQUIRE(res.s_table.size() == 4);
  // the finite truncation makes the trace entire in s: the windowed values
  // drift toward zero as s -> 1/2, and carry the sign of -m
  for (const auto& [s, v] : res.s_table) {
    REQUIRE(std::isfinite(v));
    REQUIRE(v < 0.0);
  }
  REQUIRE(std::abs(res.s_table.front().second) > std::abs(res.s_table.back().second));
}

TEST_CASE("graded index oracle from singular values", "[index]") {
  CMatrix b11(1, 1);
  b11(0, 0) = 1.0;
  REQUIRE(graded_index_exact(b11) == 0);

  CMatrix b12(1, 2);
  b12 << 1.0, 0.0;
  REQUIRE(graded_index_exact(b12) == 1);

  REQUIRE(graded_index_exact(CMatrix::Zero(2, 3)) == 1);

  // forced rank deficiency: B = u v* has rank 1 regardless of shape
  const CMatrix u = random_complex(4, 1, 3);
  const CMatrix v = random_complex(6, 1, 4);
  REQUIRE(graded_index_exact(CMatrix(u * v.adjoint())) == (6 - 1) - (4 - 1));
}

TEST_CASE("McKean-Singer graded heat trace", "[index]") {
  const std::vector<double> ts = {0.1, 0.5, 1.0, 2.0};

  // B = [1, 0]: kernel dims (1, 0), index 1, t-independent
  CMatrix b12(1, 2);
  b12 << 1.0, 0.0;
  const auto res = mckean_singer_index(models::finite_geometry(b12), ts);
  REQUIRE(res.integer_pairing == 1);
  REQUIRE(res.oracle == 1);
  REQUIRE(res.pass);
  for (const auto& [t, v] : res.t_table) REQUIRE(std::abs(v - 1.0) < 1e-10);

  // square invertible B: index 0
  CMatrix inv2(2, 2);
  inv2 << 2.0, 1.0, 0.0, 1.0;
  const auto res0 = mckean_singer_index(models::finite_geometry(inv2), ts);
  REQUIRE(res0.integer_pairing == 0);
  REQUIRE(res0.pass);

  // vanishing model: graded trace identically zero
  CMatrix a(2, 2);
  a << 1.0, 0.4, 0.4, -0.7;
  const auto vanish = mckean_singer_index(models::lorentz_block(a), ts);
  REQUIRE(vanish.integer_pairing == 0);
  REQUIRE(vanish.oracle == 0);
  REQUIRE(vanish.pass);
  for (const auto& [t, v] : vanish.t_table) REQUIRE(std::abs(v) < 1e-10);

  // graded trace requires a grading
  models::ModelTriple odd = models::harmonic_oscillator(16);
  REQUIRE_THROWS_AS(mckean_singer_index(odd, ts), std::invalid_argument);
}

TEST_CASE("McKean-Singer equals the kernel-dimension oracle on random shapes", "[index]") {
  const std::vector<double> ts = {0.1, 0.5, 1.0, 2.0};
  std::mt19937_64 rng(0xAB5);
  for (int trial = 0; trial < 20; ++trial) {
    const int rows = 1 + static_cast<int>(rng() % 8);
    const int cols = 1 + static_cast<int>(rng() % 8);
    CMatrix b = testsupport::random_complex(rows, cols, rng());
    if (trial % 3 == 0 && rows > 1 && cols > 1) {
      // plant rank deficiency
      const CMatrix u = testsupport::random_complex(rows, 1, rng());
      const CMatrix v = testsupport::random_complex(cols, 1, rng());
      b = u * v.adjoint();
    }
    const auto res = mckean_singer_index(models::finite_geometry(b), ts);
    REQUIRE(res.pass);
    REQUIRE(res.integer_pairing == graded_index_exact(b));
    // t-independence: variance over the t list
    double mean = 0.0;
    for (const auto& [t, v] : res.t_table) mean += v;
    mean /= res.t_table.size();
    double var = 0.0;
    for (const auto& [t, v] : res.t_table) var += (v - mean) * (v - mean);
    REQUIRE(var / res.t_table.size() <= 1e-10);
  }
}
