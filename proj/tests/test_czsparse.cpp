#include <doctest.h>

#include <cmath>
#include <random>

#include "dw/bmo.hpp"
#include "dw/czsparse.hpp"
#include "dw/generators.hpp"
#include "dw/grid.hpp"

using namespace dw;

TEST_CASE("stopping cubes of a one-spike function") {
  GridSpec g = make_spec(1, 2);
  GridFunction f(g, {0.0, 0.0, 0.0, 4.0});
  CZDecomposition dec = cz_decompose(f, unit_cube(g), 2.0);

  CHECK(dec.base_mean == doctest::Approx(1.0));
  CHECK(dec.dev_mean == doctest::Approx(1.5));
  // [1/2,1) averages exactly 2, not strictly above; only the last cell stops
  REQUIRE(dec.stopping.size() == 1);
  CHECK(dec.stopping[0].o[0] == 3);
  CHECK(dec.stopping[0].s == 1);
  CHECK(dec.upper_violations == 0);
  CHECK(dec.omega_cell_fraction() == doctest::Approx(0.25));

  CZInvariants inv = check_cz_invariants(f, dec);
  CHECK(inv.selection_ok);
  CHECK(inv.upper_ok);
  CHECK(inv.smallness_ok);
  CHECK(inv.bad_support_ok);
  CHECK(inv.reconstruction_error == 0.0);

  SmallFamily fam = small_family_from_cz(dec);
  CHECK_NOTHROW(fam.validate(g));
  CHECK(fam.nominal_L == doctest::Approx(2.0 / 1.5));
}

TEST_CASE("constant functions never stop") {
  GridSpec g = make_spec(2, 3);
  CZDecomposition dec = cz_decompose(constant_function(g, 5.0), unit_cube(g), 1.0);
  CHECK(dec.stopping.empty());
  CHECK(dec.dev_mean == doctest::Approx(0.0));
  CHECK(dec.omega_cell_fraction() == doctest::Approx(0.0));
  CZInvariants inv = check_cz_invariants(constant_function(g, 5.0), dec);
  CHECK(inv.reconstruction_error == 0.0);
  CHECK(inv.good_bound_excess == 0.0);
}

TEST_CASE("a root whose own deviation exceeds the level stops itself") {
  GridSpec g = make_spec(1, 1);
  GridFunction f(g, {0.0, 4.0});
  CZDecomposition dec = cz_decompose(f, unit_cube(g), 1.0);
  REQUIRE(dec.stopping.size() == 1);
  CHECK(dec.stopping[0].s == 2);
  // the root's average deviation is 2 <= 2^d L, so no upper violation
  CHECK(dec.upper_violations == 0);
  CHECK(dec.omega_cell_fraction() == doctest::Approx(1.0));
  CZInvariants inv = check_cz_invariants(f, dec);
  CHECK(inv.upper_ok);
  CHECK(inv.reconstruction_error == 0.0);
  CHECK(inv.bad_mean_error <= 1e-12);
}

TEST_CASE("decomposition validates its inputs") {
  GridSpec g = make_spec(1, 2);
  GridFunction f(g, {1.0, 2.0, 3.0, 4.0});
  CHECK_THROWS_AS(cz_decompose(f, Cube{1, {1, 0}, 2}, 1.0), std::invalid_argument);
  CHECK_THROWS_AS(cz_decompose(f, unit_cube(g), 0.0), std::invalid_argument);
  CHECK_THROWS_AS(cz_decompose(f, unit_cube(make_spec(2, 2)), 1.0), std::invalid_argument);
}

TEST_CASE("invariants hold across functions, levels and dimensions") {
  std::mt19937_64 seeds(2026);
  for (int d : {1, 2}) {
    GridSpec g = make_spec(d, d == 1 ? 6 : 3);
    std::vector<GridFunction> fs;
    fs.push_back(martingale_function(g, 0.9, seeds()));
    fs.push_back(clipped_log(g, {0.25, 0.25}));
    fs.push_back(cascade_weight(g, 1.7, seeds()).map([](double x) { return std::log(x); }));
    for (const GridFunction& f : fs) {
      for (double L : {2.0, 4.0, 8.0}) {
        CZDecomposition dec = cz_decompose(f, unit_cube(g), L);
        CZInvariants inv = check_cz_invariants(f, dec);
        CHECK(inv.selection_ok);
        CHECK(inv.upper_ok);
        CHECK(inv.smallness_ok);
        CHECK(inv.bad_support_ok);
        CHECK(inv.reconstruction_error == 0.0);
        CHECK(inv.bad_mean_error <= 1e-12);
        CHECK(inv.good_bound_excess <= 1e-12);
        CHECK_NOTHROW(small_family_from_cz(dec).validate(g));
      }
    }
  }
}

TEST_CASE("iterated stopping cubes form a carleson family") {
  GridSpec g = make_spec(1, 6);
  for (std::uint64_t seed : {1u, 2u}) {
    GridFunction f = martingale_function(g, 1.0, seed);
    // level = 4x the worst local oscillation caps every round's stopping
    // fraction at 1/4, which beats the 1/3.9 layering requirement
    double osc = bmo_norm(f, CubeFamily::Dyadic).value;
    REQUIRE(osc > 0.0);
    std::vector<Cube> fam = cz_iterated_family(f, unit_cube(g), 4.0 * osc, 3);
    CHECK(fam.size() >= 1);
    CHECK(fam.front().s == g.cells_per_axis());
    auto y = FunctionalY::lebesgue(g);
    CarlesonSum cs = carleson_sum(y, 2.0, 1.0, fam, 3.9);
    CHECK(cs.lhs >= 1.0);
    CHECK(cs.layers >= 1);
  }
}

TEST_CASE("sparse domination: constants and guarantees") {
  GridSpec g = make_spec(1, 5);
  SparseDomination triv = sparse_dominate(constant_function(g, 2.0), unit_cube(g));
  CHECK(triv.c_meas == doctest::Approx(0.0));
  CHECK(triv.family.nodes.size() == 1);
  CHECK(triv.family.eta == doctest::Approx(0.75));

  GridSpec g2 = make_spec(2, 3);
  SparseDomination triv2 = sparse_dominate(constant_function(g2, 2.0), unit_cube(g2));
  CHECK(triv2.family.eta == doctest::Approx(0.875));
}

TEST_CASE("sparse domination covers the deviation cellwise") {
  std::mt19937_64 seeds(55);
  for (int d : {1, 2}) {
    GridSpec g = make_spec(d, d == 1 ? 6 : 3);
    std::int64_t n = g.cells_per_axis();
    for (int t = 0; t < 2; ++t) {
      GridFunction f = d == 1 ? martingale_function(g, 1.3, seeds())
                              : clipped_log(g, {0.3, 0.6});
      SparseDomination dom = sparse_dominate(f, unit_cube(g));
      CHECK(is_sparse(g, dom.family, dom.family.eta));

      double mean = average(f, unit_cube(g));
      std::vector<double> cover(static_cast<std::size_t>(g.total_cells()), 0.0);
      for (const SparseNode& node : dom.family.nodes) {
        for (std::int64_t i = node.cube.o[0]; i < node.cube.o[0] + node.cube.s; ++i) {
          if (d == 1)
            cover[static_cast<std::size_t>(i)] += node.osc;
          else
            for (std::int64_t j = node.cube.o[1]; j < node.cube.o[1] + node.cube.s; ++j)
              cover[static_cast<std::size_t>(i * n + j)] += node.osc;
        }
      }
      double needed = 0.0;
      for (std::int64_t c = 0; c < g.total_cells(); ++c) {
        double dev = std::fabs(f[c] - mean);
        CHECK(dev <= dom.c_meas * cover[static_cast<std::size_t>(c)] + 1e-9);
        if (cover[static_cast<std::size_t>(c)] > 0.0)
          needed = std::max(needed, dev / cover[static_cast<std::size_t>(c)]);
      }
      // c_meas is the smallest admissible constant
      CHECK(dom.c_meas == doctest::Approx(needed).epsilon(1e-9));
    }
  }
}

TEST_CASE("sparseness checker rejects thin or overlapping families") {
  GridSpec g = make_spec(1, 2);
  SparseFamily fam;
  fam.root = unit_cube(g);
  fam.nodes.push_back(SparseNode{fam.root, 1.0, {1}});
  fam.nodes.push_back(SparseNode{Cube{1, {0, 0}, 2}, 1.0, {}});
  // the root retains half its cells once the child is carved out
  CHECK(is_sparse(g, fam, 0.5));
  CHECK_FALSE(is_sparse(g, fam, 0.75));

  // two nodes on the same cube: the earlier one retains nothing
  SparseFamily shadow;
  shadow.root = unit_cube(g);
  shadow.nodes.push_back(SparseNode{shadow.root, 1.0, {1, 2}});
  shadow.nodes.push_back(SparseNode{Cube{1, {0, 0}, 2}, 1.0, {}});
  shadow.nodes.push_back(SparseNode{Cube{1, {0, 0}, 2}, 1.0, {}});
  CHECK_FALSE(is_sparse(g, shadow, 0.25));
}
