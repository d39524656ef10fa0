#include <cmath>
#include <vector>

#include <catch2/catch_amalgamated.hpp>

#include "fracform/renorm.hpp"
#include "fracform/rng.hpp"
#include "support/oracles.hpp"

namespace {

using fracform::BoundaryFunction;
using fracform::DirichletForm;
using fracform::FractalTriple;
using fracform::SplitMix64;
using fracform::WeightVector;

DirichletForm random_form(int n, std::uint64_t seed, std::uint64_t stream) {
  SplitMix64 rng(fracform::substream(seed, stream));
  DirichletForm e(n);
  for (double& c : e.coefficients) c = 0.1 * std::pow(100.0, rng.uniform01());
  return e;
}

WeightVector random_weights(int k, std::uint64_t seed, std::uint64_t stream) {
  SplitMix64 rng(fracform::substream(seed, stream));
  WeightVector r(k);
  for (double& v : r) v = 0.1 * std::pow(100.0, rng.uniform01());
  return r;
}

BoundaryFunction random_function(int n, std::uint64_t seed, std::uint64_t stream) {
  SplitMix64 rng(fracform::substream(seed, stream));
  BoundaryFunction u(n);
  for (double& v : u) v = rng.uniform(-2.0, 2.0);
  return u;
}

double max_coefficient_gap(const DirichletForm& a, const DirichletForm& b) {
  double worst = 0.0;
  for (std::size_t i = 0; i < a.coefficients.size(); ++i)
    worst = std::max(worst, std::abs(a.coefficients[i] - b.coefficients[i]));
  return worst;
}

}  // namespace

TEST_CASE("weight handling", "[renorm]") {
  const FractalTriple g3 = fracform::build_gasket(3);
  CHECK(fracform::unit_weights(3) == WeightVector{1.0, 1.0, 1.0});
  CHECK_NOTHROW(fracform::check_weights(g3, {0.5, 1.0, 2.0}));
  CHECK_THROWS_AS(fracform::check_weights(g3, {1.0, 1.0}), std::invalid_argument);
  CHECK_THROWS_AS(fracform::check_weights(g3, {1.0, 0.0, 1.0}), std::invalid_argument);
  CHECK_THROWS_AS(fracform::check_weights(g3, {1.0, -2.0, 1.0}), std::invalid_argument);
}

TEST_CASE("level-1 assembly matches the direct cell-by-cell sum", "[renorm]") {
  for (const FractalTriple& t :
       {fracform::build_gasket(2), fracform::build_gasket(3), fracform::build_counterexample()}) {
    const DirichletForm e = random_form(t.n_boundary, 51, t.n_cells);
    const WeightVector r = random_weights(t.n_cells, 52, t.n_cells);
    const auto s = fracform::assemble_level1(t, e, r);

    CHECK(s.n_level1 == t.n_level1);
    for (const auto& edge : s.edges) {
      CHECK(edge.a < edge.b);
      CHECK(edge.w > 0.0);
    }

    // The same energy from an edge list built independently of the library's
    // accumulation (duplicates kept, no merging).
    const auto direct = oracles::level1_edges(t, e, r);
    SplitMix64 rng(fracform::substream(53, t.n_cells));
    for (int trial = 0; trial < 5; ++trial) {
      std::vector<double> v(t.n_level1);
      for (double& x : v) x = rng.uniform(-1.0, 1.0);
      CHECK(s.energy(v) == Catch::Approx(oracles::edge_energy(direct, v)).epsilon(1e-12));
    }

    // Laplacian route gives the same quadratic form.
    const Eigen::MatrixXd L = s.laplacian();
    std::vector<double> v(t.n_level1);
    for (double& x : v) x = rng.uniform(-1.0, 1.0);
    const Eigen::Map<const Eigen::VectorXd> vv(v.data(), t.n_level1);
    CHECK(vv.dot(L * vv) == Catch::Approx(s.energy(v)).epsilon(1e-12));
    for (int i = 0; i < t.n_level1; ++i) CHECK(L.row(i).sum() == Catch::Approx(0.0).margin(1e-9));
  }
}

TEST_CASE("harmonic extension interpolates and minimizes", "[renorm]") {
  const FractalTriple g3 = fracform::build_gasket(3);
  const WeightVector ones = fracform::unit_weights(3);

  SECTION("unit triangle corner function spreads 2/5, 2/5, 1/5") {
    const DirichletForm e = DirichletForm::unit(3);
    const auto v = fracform::harmonic_extension(g3, e, ones, {1.0, 0.0, 0.0});
    REQUIRE(v.size() == 6u);
    CHECK(v[0] == Catch::Approx(1.0).margin(1e-14));
    CHECK(v[1] == Catch::Approx(0.0).margin(1e-14));
    CHECK(v[2] == Catch::Approx(0.0).margin(1e-14));
    CHECK(v[g3.vertex(1, 2) - 1] == Catch::Approx(0.4));
    CHECK(v[g3.vertex(1, 3) - 1] == Catch::Approx(0.4));
    CHECK(v[g3.vertex(2, 3) - 1] == Catch::Approx(0.2));
  }

  SECTION("agrees with relaxation sweeps on random data") {
    for (const FractalTriple& t : {g3, fracform::build_counterexample()}) {
      const DirichletForm e = random_form(t.n_boundary, 54, t.n_cells);
      const WeightVector r = random_weights(t.n_cells, 55, t.n_cells);
      const BoundaryFunction u = random_function(t.n_boundary, 56, t.n_cells);
      const auto v = fracform::harmonic_extension(t, e, r, u);

      std::vector<std::pair<int, double>> pins;
      for (int j = 1; j <= t.n_boundary; ++j) pins.push_back({j - 1, u[j - 1]});
      const auto w = oracles::relax_min(t.n_level1, oracles::level1_edges(t, e, r), pins);
      for (int i = 0; i < t.n_level1; ++i) CHECK(v[i] == Catch::Approx(w[i]).margin(1e-8));
    }
  }

  SECTION("no competitor beats the extension energy") {
    const DirichletForm e = random_form(3, 57, 0);
    const WeightVector r = random_weights(3, 58, 0);
    const BoundaryFunction u{0.0, 1.0, -0.5};
    const auto s = fracform::assemble_level1(g3, e, r);
    const auto v = fracform::harmonic_extension(g3, e, r, u);
    SplitMix64 rng(fracform::substream(59, 0));
    for (int trial = 0; trial < 50; ++trial) {
      auto w = v;
      for (std::size_t i = 3; i < w.size(); ++i) w[i] += rng.uniform(-0.2, 0.2);
      CHECK(s.energy(w) >= s.energy(v) - 1e-12);
    }
  }
}

TEST_CASE("interval renormalization reproduces series conductance", "[renorm]") {
  const FractalTriple g2 = fracform::build_gasket(2);

  SECTION("unit weights halve the form") {
    const DirichletForm e = DirichletForm::unit(2);
    const DirichletForm out = fracform::renormalize(g2, e, fracform::unit_weights(2));
    CHECK(out.c(1, 2) == Catch::Approx(0.5).margin(1e-12));
  }

  SECTION("general weights compose like resistors in series") {
    SplitMix64 rng(fracform::substream(61, 0));
    for (int trial = 0; trial < 20; ++trial) {
      DirichletForm e(2);
      e.c(1, 2) = 0.1 * std::pow(100.0, rng.uniform01());
      const double r1 = 0.1 * std::pow(100.0, rng.uniform01());
      const double r2 = 0.1 * std::pow(100.0, rng.uniform01());
      const DirichletForm out = fracform::renormalize(g2, e, {r1, r2});
      const double expected = e.c(1, 2) * (r1 * r2) / (r1 + r2);
      CHECK(out.c(1, 2) == Catch::Approx(expected).epsilon(1e-12));
    }
  }
}

TEST_CASE("triangle renormalization contracts the unit form by 3/5", "[renorm]") {
  const FractalTriple g3 = fracform::build_gasket(3);
  const DirichletForm e = DirichletForm::unit(3);
  const DirichletForm out = fracform::renormalize(g3, e, fracform::unit_weights(3));
  CHECK(out.c(1, 2) == Catch::Approx(0.6).margin(1e-12));
  CHECK(out.c(1, 3) == Catch::Approx(0.6).margin(1e-12));
  CHECK(out.c(2, 3) == Catch::Approx(0.6).margin(1e-12));

  // Level-1 conductivity between two corners of the triangle: 9/10.
  CHECK(fracform::effective_conductivity_level1(g3, e, fracform::unit_weights(3), 1, 2) ==
        Catch::Approx(0.9).margin(1e-12));
}

TEST_CASE("traced energy equals the level-1 energy of the extension", "[renorm]") {
  for (const FractalTriple& t :
       {fracform::build_gasket(2), fracform::build_gasket(3), fracform::build_counterexample()}) {
    const DirichletForm e = random_form(t.n_boundary, 63, t.n_cells);
    const WeightVector r = random_weights(t.n_cells, 64, t.n_cells);
    const DirichletForm traced = fracform::renormalize(t, e, r);
    const auto s = fracform::assemble_level1(t, e, r);

    for (std::uint64_t trial = 0; trial < 10; ++trial) {
      const BoundaryFunction u = random_function(t.n_boundary, 65, 100 * t.n_cells + trial);
      const auto v = fracform::harmonic_extension(t, e, r, u);
      const double direct = s.energy(v);
      CHECK(fracform::energy(traced, u) ==
            Catch::Approx(direct).epsilon(1e-9).margin(1e-12));
    }
  }
}

TEST_CASE("conductivities of the traced form match pinned level-1 minima", "[renorm]") {
  const FractalTriple g3 = fracform::build_gasket(3);
  const DirichletForm e = random_form(3, 67, 0);
  const WeightVector r = random_weights(3, 68, 0);
  const DirichletForm traced = fracform::renormalize(g3, e, r);

  for (int j1 = 1; j1 <= 3; ++j1)
    for (int j2 = j1 + 1; j2 <= 3; ++j2) {
      const double via_trace = fracform::effective_conductivity(traced, j1, j2);
      const double via_level1 = fracform::effective_conductivity_level1(g3, e, r, j1, j2);
      CHECK(via_trace == Catch::Approx(via_level1).epsilon(1e-11));

      // Third route: relaxation on the raw edge list.
      const auto edges = oracles::level1_edges(g3, e, r);
      const auto x = oracles::relax_min(g3.n_level1, edges, {{j1 - 1, 0.0}, {j2 - 1, 1.0}});
      CHECK(oracles::edge_energy(edges, x) == Catch::Approx(via_trace).epsilon(1e-9));
    }
}

TEST_CASE("renormalization is homogeneous in the form and the weights", "[renorm]") {
  const FractalTriple t = fracform::build_counterexample();
  const DirichletForm e = random_form(20, 71, 0);
  const WeightVector r = random_weights(20, 72, 0);
  const DirichletForm base = fracform::renormalize(t, e, r);

  SECTION("scaling the form scales the trace") {
    const DirichletForm scaled = fracform::renormalize(t, 3.0 * e, r);
    DirichletForm expected = base;
    expected *= 3.0;
    CHECK(max_coefficient_gap(scaled, expected) < 1e-9 * 3.0 * base.coefficient_sum());
  }

  SECTION("scaling the weights scales the trace") {
    WeightVector half = r;
    for (double& v : half) v *= 0.5;
    const DirichletForm scaled = fracform::renormalize(t, e, half);
    DirichletForm expected = base;
    expected *= 0.5;
    CHECK(max_coefficient_gap(scaled, expected) < 1e-9 * base.coefficient_sum());
  }
}

TEST_CASE("renormalization guards its preconditions", "[renorm]") {
  const FractalTriple g3 = fracform::build_gasket(3);

  DirichletForm cut(3);
  cut.c(1, 2) = 1.0;
  CHECK_THROWS_AS(fracform::renormalize(g3, cut, fracform::unit_weights(3)),
                  fracform::ReducibleFormError);

  const DirichletForm e = DirichletForm::unit(3);
  CHECK_THROWS_AS(fracform::renormalize(g3, e, {1.0, 1.0}), std::invalid_argument);
  CHECK_THROWS_AS(fracform::harmonic_extension(g3, cut, fracform::unit_weights(3), {0, 1, 0}),
                  fracform::ReducibleFormError);

  DirichletForm wrong(4);
  wrong.c(1, 2) = wrong.c(2, 3) = wrong.c(3, 4) = wrong.c(1, 4) = 1.0;
  CHECK_THROWS_AS(fracform::renormalize(g3, wrong, fracform::unit_weights(3)),
                  std::invalid_argument);
}
