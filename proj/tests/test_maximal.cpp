#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <random>

#include "dw/generators.hpp"
#include "dw/grid.hpp"
#include "dw/maximal.hpp"

using namespace dw;

namespace {

double unit_double(std::mt19937_64& rng) { return (rng() >> 11) * 0x1.0p-53; }

GridFunction random_weight(const GridSpec& g, std::mt19937_64& rng) {
  std::vector<double> vals(static_cast<std::size_t>(g.total_cells()));
  for (auto& v : vals) v = 0.05 + unit_double(rng);
  return GridFunction(g, vals);
}

GridFunction indicator_of(const GridSpec& g, const Cube& q) {
  std::vector<double> vals(static_cast<std::size_t>(g.total_cells()), 0.0);
  std::int64_t n = g.cells_per_axis();
  for (std::int64_t i = q.o[0]; i < q.o[0] + q.s; ++i) {
    if (g.d == 1)
      vals[static_cast<std::size_t>(i)] = 1.0;
    else
      for (std::int64_t j = q.o[1]; j < q.o[1] + q.s; ++j)
        vals[static_cast<std::size_t>(i * n + j)] = 1.0;
  }
  return GridFunction(g, vals);
}

Cube random_dyadic(const GridSpec& g, std::mt19937_64& rng) {
  int level = static_cast<int>(rng() % static_cast<std::uint64_t>(g.depth + 1));
  std::int64_t s = g.cells_per_axis() >> level;
  std::int64_t k = g.cells_per_axis() / s;
  return Cube{g.d,
              {s * static_cast<std::int64_t>(rng() % k),
               g.d == 2 ? s * static_cast<std::int64_t>(rng() % k) : 0},
              s};
}

/// Corner of the evaluation cell farthest from Q's span, per axis.
std::array<double, 2> far_corner(const GridSpec& g, const Cube& q, std::int64_t x0,
                                 std::int64_t x1) {
  std::array<std::int64_t, 2> cell{x0, x1};
  std::array<double, 2> p{0.0, 0.0};
  double h = g.cell_width();
  for (int a = 0; a < g.d; ++a) {
    std::int64_t lo = q.o[static_cast<std::size_t>(a)];
    std::int64_t hi = lo + q.s;
    std::int64_t c = cell[static_cast<std::size_t>(a)];
    // pick the cell edge farther from [lo, hi); inside cells tie at distance 0
    p[static_cast<std::size_t>(a)] = (c < lo) ? c * h : (c + 1) * h;
    if (c >= lo && c + 1 <= hi) p[static_cast<std::size_t>(a)] = (c + 0.5) * h;
  }
  return p;
}

}  // namespace

TEST_CASE("dyadic maximal hand example") {
  GridFunction f(make_spec(1, 2), {1, 1, 1, 3});
  GridFunction m = dyadic_maximal(f, unit_cube(f.spec()));
  CHECK(m[0] == doctest::Approx(1.5));
  CHECK(m[1] == doctest::Approx(1.5));
  CHECK(m[2] == doctest::Approx(2.0));
  CHECK(m[3] == doctest::Approx(3.0));
}

TEST_CASE("grid maximal hand example: extended intervals only lower averages") {
  GridFunction f(make_spec(1, 1), {1.0, 0.5});
  GridFunction m = grid_maximal(f, unit_cube(f.spec()));
  CHECK(m[0] == doctest::Approx(1.0));
  CHECK(m[1] == doctest::Approx(0.75));
}

TEST_CASE("dyadic maximal never exceeds grid maximal") {
  std::mt19937_64 rng(3);
  for (int d : {1, 2}) {
    GridSpec g = make_spec(d, d == 1 ? 5 : 3);
    GridFunction w = random_weight(g, rng);
    GridFunction md = dyadic_maximal(w, unit_cube(g));
    GridFunction mg = grid_maximal(w, unit_cube(g));
    for (std::int64_t i = 0; i < w.size(); ++i) CHECK(md[i] <= mg[i] + 1e-12);
  }
}

TEST_CASE("grid maximal dominates every sampled sub-average") {
  std::mt19937_64 rng(5);
  GridSpec g = make_spec(1, 5);
  GridFunction w = random_weight(g, rng);
  Cube root{1, {4, 0}, 24};
  GridFunction m = grid_maximal(w, root);
  for (int t = 0; t < 200; ++t) {
    std::int64_t s = 1 + static_cast<std::int64_t>(rng() % 24);
    std::int64_t o = 4 + static_cast<std::int64_t>(rng() % (24 - s + 1));
    Cube p{1, {o, 0}, s};
    double avg = average(w, p);
    for (std::int64_t c = o; c < o + s; ++c) CHECK(m[c] >= avg - 1e-12);
  }
}

TEST_CASE("fast and brute grid maximal agree") {
  std::mt19937_64 rng(11);
  for (int rep = 0; rep < 5; ++rep) {
    GridSpec g = make_spec(1, 6);
    GridFunction w = random_weight(g, rng);
    GridFunction a = grid_maximal(w, unit_cube(g));
    GridFunction b = grid_maximal_brute(w, unit_cube(g));
    for (std::int64_t i = 0; i < w.size(); ++i) CHECK(a[i] == doctest::Approx(b[i]).epsilon(1e-13));
  }
  for (int rep = 0; rep < 3; ++rep) {
    GridSpec g = make_spec(2, 3);
    GridFunction w = random_weight(g, rng);
    GridFunction a = grid_maximal(w, unit_cube(g));
    GridFunction b = grid_maximal_brute(w, unit_cube(g));
    for (std::int64_t i = 0; i < w.size(); ++i) CHECK(a[i] == doctest::Approx(b[i]).epsilon(1e-13));
  }
}

TEST_CASE("dyadic weak (1,1) smallness") {
  std::mt19937_64 rng(13);
  GridSpec g = make_spec(1, 7);
  GridFunction f = random_weight(g, rng);
  Cube root = unit_cube(g);
  double mean = average(f, root);
  GridFunction norm = f.map([mean](double x) { return x / mean; });  // unit average
  GridFunction m = dyadic_maximal(norm, root);
  for (double L : {2.0, 4.0, 8.0}) {
    std::int64_t over = 0;
    for (std::int64_t i = 0; i < m.size(); ++i)
      if (m[i] > L) ++over;
    CHECK(static_cast<double>(over) / static_cast<double>(m.size()) < 1.0 / L);
  }
}

TEST_CASE("indicator maximal closed form: hand values") {
  GridSpec g = make_spec(1, 2);
  Cube q{1, {1, 0}, 1};  // [0.25, 0.5)
  CHECK(indicator_maximal(g, q, {0.3, 0.0}) == doctest::Approx(1.0));
  CHECK(indicator_maximal(g, q, {0.75, 0.0}) == doctest::Approx(0.5));
  CHECK(indicator_maximal(g, q, {0.875, 0.0}) == doctest::Approx(0.4));

  GridSpec g2 = make_spec(2, 2);
  Cube q2{2, {0, 0}, 1};  // side 1/4 at the corner
  // distance 1/4 along one axis, inside along the other
  CHECK(indicator_maximal(g2, q2, {0.5, 0.125}) == doctest::Approx(0.25));
  CHECK(indicator_maximal(g2, q2, {0.125, 0.125}) == doctest::Approx(1.0));
  // near-axis saturation branch: side 1/4 square reaching back 1/16
  // beats both the containment square (0.64) and the thin square
  CHECK(indicator_maximal(g2, q2, {0.3125, 0.125}) == doctest::Approx(0.75));
}

TEST_CASE("indicator maximal equals grid maximal at the far corner") {
  std::mt19937_64 rng(17);
  for (int d : {1, 2}) {
    GridSpec g = make_spec(d, d == 1 ? 5 : 3);
    std::int64_t n = g.cells_per_axis();
    for (int trial = 0; trial < 12; ++trial) {
      Cube q = random_dyadic(g, rng);
      GridFunction m = grid_maximal_brute(indicator_of(g, q), unit_cube(g));
      for (std::int64_t c = 0; c < g.total_cells(); ++c) {
        std::int64_t x0 = d == 1 ? c : c / n;
        std::int64_t x1 = d == 1 ? 0 : c % n;
        double an = indicator_maximal(g, q, far_corner(g, q, x0, x1));
        CHECK(m[c] == doctest::Approx(an).epsilon(1e-12));
      }
    }
  }
}

TEST_CASE("indicator maximal midpoint value within one cell of the grid value") {
  std::mt19937_64 rng(19);
  for (int d : {1, 2}) {
    GridSpec g = make_spec(d, d == 1 ? 5 : 3);
    std::int64_t n = g.cells_per_axis();
    double h = g.cell_width();
    for (int trial = 0; trial < 8; ++trial) {
      Cube q = random_dyadic(g, rng);
      GridFunction m = grid_maximal_brute(indicator_of(g, q), unit_cube(g));
      for (std::int64_t c = 0; c < g.total_cells(); ++c) {
        std::int64_t x0 = d == 1 ? c : c / n;
        std::int64_t x1 = d == 1 ? 0 : c % n;
        auto mid = cell_midpoint(g, x0, x1);
        // shift the midpoint one full cell away from Q per outside axis
        auto away = mid;
        std::array<std::int64_t, 2> cell{x0, x1};
        for (int a = 0; a < d; ++a) {
          std::int64_t lo = q.o[static_cast<std::size_t>(a)], hi = lo + q.s;
          if (cell[static_cast<std::size_t>(a)] < lo)
            away[static_cast<std::size_t>(a)] -= h;
          else if (cell[static_cast<std::size_t>(a)] >= hi)
            away[static_cast<std::size_t>(a)] += h;
        }
        double hi_val = indicator_maximal(g, q, mid);
        double lo_val = indicator_maximal(g, q, away);
        CHECK(m[c] <= hi_val + 1e-12);
        CHECK(m[c] >= lo_val - 1e-12);
      }
    }
  }
}

TEST_CASE("indicator-vs-grid discrepancy shrinks under refinement") {
  for (int d : {1, 2}) {
    double disc[2];
    int base = d == 1 ? 4 : 2;
    for (int step = 0; step < 2; ++step) {
      GridSpec g = make_spec(d, base + 2 * step);
      std::int64_t n = g.cells_per_axis();
      Cube q{d, {n / 4, d == 2 ? n / 4 : 0}, n / 4};  // same continuum cube at both depths
      GridFunction m = grid_maximal_brute(indicator_of(g, q), unit_cube(g));
      double worst = 0.0;
      for (std::int64_t c = 0; c < g.total_cells(); ++c) {
        std::int64_t x0 = d == 1 ? c : c / n;
        std::int64_t x1 = d == 1 ? 0 : c % n;
        double an = indicator_maximal(g, q, cell_midpoint(g, x0, x1));
        worst = std::max(worst, std::fabs(an - m[c]));
      }
      disc[step] = worst;
    }
    CHECK(disc[1] < disc[0]);
  }
}
