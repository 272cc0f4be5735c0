#include <doctest.h>

#include <cmath>

#include "dw/generators.hpp"
#include "dw/grid.hpp"

using namespace dw;

TEST_CASE("power weight: clipping and validation") {
  GridSpec g = make_spec(1, 4);
  CHECK_THROWS_AS(power_weight(g, -1.0), std::invalid_argument);
  CHECK_THROWS_AS(power_weight(make_spec(2, 3), -2.0), std::invalid_argument);

  for (double alpha : {2.0, -0.5}) {
    GridFunction w = power_weight(g, alpha, {0.5, 0.0});
    double lo = std::exp2(-g.depth * std::fabs(alpha));
    double hi = std::exp2(g.depth * std::fabs(alpha));
    for (std::int64_t i = 0; i < w.size(); ++i) {
      CHECK(w[i] >= lo);
      CHECK(w[i] <= hi);
    }
  }
  // decay away from the singularity for negative exponents
  GridFunction w = power_weight(g, -0.5, {0.0, 0.0});
  CHECK(w[0] > w[8]);
}

TEST_CASE("cascade weight: mass one, positivity, determinism") {
  for (int d : {1, 2}) {
    GridSpec g = make_spec(d, d == 1 ? 8 : 4);
    GridFunction a = cascade_weight(g, 1.7, 99);
    GridFunction b = cascade_weight(g, 1.7, 99);
    GridFunction c = cascade_weight(g, 1.7, 100);
    CHECK(integrate(a, unit_cube(g)) == doctest::Approx(1.0).epsilon(1e-12));
    bool same = true, differs = false;
    for (std::int64_t i = 0; i < a.size(); ++i) {
      CHECK(a[i] > 0.0);
      same = same && a[i] == b[i];
      differs = differs || a[i] != c[i];
    }
    CHECK(same);
    CHECK(differs);
  }
  CHECK_THROWS_AS(cascade_weight(make_spec(1, 2), 2.0, 1), std::invalid_argument);
  CHECK_THROWS_AS(cascade_weight(make_spec(1, 2), 0.9, 1), std::invalid_argument);
}

TEST_CASE("holey weight: exact zeros at roughly the requested rate") {
  GridSpec g = make_spec(1, 8);
  GridFunction w = holey_weight(g, 0.3, 7);
  std::int64_t zeros = 0, live = 0;
  for (std::int64_t i = 0; i < w.size(); ++i) {
    if (w[i] == 0.0) ++zeros;
    else {
      CHECK(w[i] == 1.0);
      ++live;
    }
  }
  CHECK(live >= 1);
  double rate = static_cast<double>(zeros) / static_cast<double>(w.size());
  CHECK(rate > 0.15);
  CHECK(rate < 0.45);
  CHECK_THROWS_AS(holey_weight(g, 1.0, 7), std::invalid_argument);
}

TEST_CASE("clipped log stays within the depth-scaled band") {
  for (int d : {1, 2}) {
    GridSpec g = make_spec(d, d == 1 ? 6 : 4);
    double bound = (g.depth + 1) * std::log(2.0) + 1e-12;
    for (auto center : {std::array<double, 2>{0.0, 0.0}, std::array<double, 2>{0.5, 0.5}}) {
      GridFunction f = clipped_log(g, center);
      for (std::int64_t i = 0; i < f.size(); ++i) CHECK(std::fabs(f[i]) <= bound);
    }
  }
}

TEST_CASE("martingale functions average to zero at every scale") {
  for (int d : {1, 2}) {
    GridSpec g = make_spec(d, d == 1 ? 6 : 3);
    GridFunction f = martingale_function(g, 0.7, 31);
    CHECK(average(f, unit_cube(g)) == doctest::Approx(0.0).epsilon(1e-12));
    // per-cube means vanish too: each dyadic cube splits with mean zero
    for_each_cube(g, CubeFamily::Dyadic, [&](const Cube& q) {
      double parent_scale = std::fabs(average(f, q));
      // the cube average equals the accumulated increments above it, so it
      // is a multiple of eps; deviations inside still cancel
      CHECK(parent_scale <= 0.7 * g.depth + 1e-9);
    });
    double bound = 0.7 * g.depth + 1e-12;
    for (std::int64_t i = 0; i < f.size(); ++i) CHECK(std::fabs(f[i]) <= bound);
  }
}

TEST_CASE("half indicator splits the cell count in half") {
  GridSpec g = make_spec(1, 3);
  GridFunction h = half_indicator(g, 0);
  for (std::int64_t i = 0; i < 4; ++i) CHECK(h[i] == 1.0);
  for (std::int64_t i = 4; i < 8; ++i) CHECK(h[i] == 0.0);

  GridSpec g2 = make_spec(2, 2);
  GridFunction h1 = half_indicator(g2, 1);
  CHECK(h1.at(0, 0) == 1.0);
  CHECK(h1.at(0, 3) == 0.0);
  CHECK(h1.at(3, 1) == 1.0);
  CHECK_THROWS_AS(half_indicator(g2, 2), std::invalid_argument);
}

TEST_CASE("bmo test set has the advertised composition") {
  CHECK(bmo_test_set(make_spec(1, 4), 9).size() == 7);
  CHECK(bmo_test_set(make_spec(2, 3), 9).size() == 8);
  CHECK(bmo_test_set(make_spec(1, 0), 9).size() == 4);
  CHECK(bmo_test_set(make_spec(2, 0), 9).size() == 5);
  for (const GridFunction& f : bmo_test_set(make_spec(1, 5), 11)) {
    CHECK(f.size() == 32);
  }
}

TEST_CASE("witness function vanishes on the cube for flat weights") {
  GridSpec g = make_spec(1, 4);
  GridFunction ones = constant_function(g, 1.0);
  Cube q{1, {4, 0}, 4};
  GridFunction b = witness_b(ones, q);
  for (std::int64_t c = q.o[0]; c < q.o[0] + q.s; ++c) CHECK(b[c] == doctest::Approx(0.0));

  CHECK_THROWS_AS(witness_b(constant_function(g, 0.0), q), std::invalid_argument);
  GridFunction negf = ones.map([](double) { return -1.0; });
  CHECK_THROWS_AS(witness_b(negf, q), std::invalid_argument);
}

TEST_CASE("witness function is nonnegative on the cube") {
  GridSpec g = make_spec(1, 5);
  GridFunction w = cascade_weight(g, 1.6, 17);
  for_each_cube(g, CubeFamily::Dyadic, [&](const Cube& q) {
    GridFunction b = witness_b(w, q);
    for (std::int64_t c = q.o[0]; c < q.o[0] + q.s; ++c) CHECK(b[c] >= -1e-12);
  });
}
