#include "dw/generators.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <stdexcept>

#include "dw/czsparse.hpp"
#include "dw/maximal.hpp"

namespace dw {
namespace {

double unit_double(std::mt19937_64& rng) { return static_cast<double>(rng() >> 11) * 0x1.0p-53; }

std::uint64_t pick(std::mt19937_64& rng, std::uint64_t count) { return rng() % count; }

double dist_to(const GridSpec& g, std::int64_t x0, std::int64_t x1, const std::array<double, 2>& c) {
  std::array<double, 2> m = cell_midpoint(g, x0, x1);
  double dx = m[0] - c[0];
  double dy = g.d == 2 ? m[1] - c[1] : 0.0;
  return std::sqrt(dx * dx + dy * dy);
}

}  // namespace

GridFunction power_weight(const GridSpec& g, double alpha, std::array<double, 2> center) {
  if (!(alpha > -static_cast<double>(g.d)))
    throw std::invalid_argument("power_weight requires alpha > -d");
  double lo = std::exp2(-static_cast<double>(g.depth) * std::fabs(alpha));
  double hi = std::exp2(static_cast<double>(g.depth) * std::fabs(alpha));
  std::int64_t n = g.cells_per_axis();
  std::vector<double> vals(static_cast<std::size_t>(g.total_cells()));
  for (std::int64_t x0 = 0; x0 < n; ++x0) {
    for (std::int64_t x1 = 0; x1 < (g.d == 2 ? n : 1); ++x1) {
      double v = std::pow(dist_to(g, x0, x1, center), alpha);
      vals[static_cast<std::size_t>(x0 * (g.d == 2 ? n : 1) + x1)] = std::clamp(v, lo, hi);
    }
  }
  return GridFunction(g, std::move(vals));
}

GridFunction cascade_weight(const GridSpec& g, double t, std::uint64_t seed) {
  if (!(t >= 1.0 && t < 2.0)) throw std::invalid_argument("cascade_weight requires t in [1,2)");
  std::mt19937_64 rng(seed);
  std::int64_t n = g.cells_per_axis();
  std::vector<double> vals(static_cast<std::size_t>(g.total_cells()), 1.0);
  auto linear = [&](std::int64_t x0, std::int64_t x1) { return x0 * (g.d == 2 ? n : 1) + x1; };
  // refine level by level: each dyadic cube multiplies its children
  for (int level = 0; level < g.depth; ++level) {
    std::int64_t side = n >> level;
    std::int64_t half = side / 2;
    std::int64_t per_axis = std::int64_t{1} << level;
    for (std::int64_t c0 = 0; c0 < per_axis; ++c0) {
      for (std::int64_t c1 = 0; c1 < (g.d == 2 ? per_axis : 1); ++c1) {
        double m0 = (rng() & 1u) ? t : 2.0 - t;
        double m1 = g.d == 2 ? ((rng() & 1u) ? t : 2.0 - t) : 1.0;
        for (std::int64_t i = 0; i < side; ++i) {
          double f0 = (i < half) ? m0 : 2.0 - m0;
          if (g.d == 1) {
            vals[static_cast<std::size_t>(linear(c0 * side + i, 0))] *= f0;
          } else {
            for (std::int64_t j = 0; j < side; ++j) {
              double f1 = (j < half) ? m1 : 2.0 - m1;
              vals[static_cast<std::size_t>(linear(c0 * side + i, c1 * side + j))] *= f0 * f1;
            }
          }
        }
      }
    }
  }
  long double total = 0.0L;
  for (double v : vals) total += v;
  double mean = static_cast<double>(total) / static_cast<double>(vals.size());
  for (double& v : vals) v /= mean;
  return GridFunction(g, std::move(vals));
}

GridFunction holey_weight(const GridSpec& g, double hole_fraction, std::uint64_t seed) {
  if (!(hole_fraction >= 0.0 && hole_fraction < 1.0))
    throw std::invalid_argument("holey_weight requires hole_fraction in [0,1)");
  std::mt19937_64 rng(seed);
  std::vector<double> vals(static_cast<std::size_t>(g.total_cells()), 1.0);
  bool any = false;
  for (double& v : vals) {
    if (unit_double(rng) < hole_fraction) v = 0.0;
    else any = true;
  }
  if (!any) vals[0] = 1.0;
  return GridFunction(g, std::move(vals));
}

GridFunction clipped_log(const GridSpec& g, std::array<double, 2> center) {
  double bound = static_cast<double>(g.depth + 1) * std::log(2.0);
  std::int64_t n = g.cells_per_axis();
  std::vector<double> vals(static_cast<std::size_t>(g.total_cells()));
  for (std::int64_t x0 = 0; x0 < n; ++x0)
    for (std::int64_t x1 = 0; x1 < (g.d == 2 ? n : 1); ++x1)
      vals[static_cast<std::size_t>(x0 * (g.d == 2 ? n : 1) + x1)] =
          std::clamp(-std::log(dist_to(g, x0, x1, center)), -bound, bound);
  return GridFunction(g, std::move(vals));
}

GridFunction martingale_function(const GridSpec& g, double eps, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::int64_t n = g.cells_per_axis();
  std::vector<double> vals(static_cast<std::size_t>(g.total_cells()), 0.0);
  auto linear = [&](std::int64_t x0, std::int64_t x1) { return x0 * (g.d == 2 ? n : 1) + x1; };
  for (int level = 0; level < g.depth; ++level) {
    std::int64_t side = n >> level;
    std::int64_t half = side / 2;
    std::int64_t per_axis = std::int64_t{1} << level;
    for (std::int64_t c0 = 0; c0 < per_axis; ++c0) {
      for (std::int64_t c1 = 0; c1 < (g.d == 2 ? per_axis : 1); ++c1) {
        if (g.d == 1) {
          double s = (rng() & 1u) ? eps : -eps;
          for (std::int64_t i = 0; i < side; ++i)
            vals[static_cast<std::size_t>(linear(c0 * side + i, 0))] += (i < half) ? s : -s;
        } else {
          // mean-zero pattern over the four quadrants
          std::array<double, 4> q{eps, eps, -eps, -eps};
          for (std::size_t k = 3; k > 0; --k) std::swap(q[k], q[pick(rng, k + 1)]);
          for (std::int64_t i = 0; i < side; ++i)
            for (std::int64_t j = 0; j < side; ++j)
              vals[static_cast<std::size_t>(linear(c0 * side + i, c1 * side + j))] +=
                  q[static_cast<std::size_t>(2 * (i >= half) + (j >= half))];
        }
      }
    }
  }
  return GridFunction(g, std::move(vals));
}

GridFunction half_indicator(const GridSpec& g, int axis) {
  if (axis < 0 || axis >= g.d) throw std::invalid_argument("half_indicator axis out of range");
  std::int64_t n = g.cells_per_axis();
  std::int64_t half = std::max<std::int64_t>(n / 2, 1);
  std::vector<double> vals(static_cast<std::size_t>(g.total_cells()));
  for (std::int64_t x0 = 0; x0 < n; ++x0)
    for (std::int64_t x1 = 0; x1 < (g.d == 2 ? n : 1); ++x1)
      vals[static_cast<std::size_t>(x0 * (g.d == 2 ? n : 1) + x1)] =
          ((axis == 0 ? x0 : x1) < half) ? 1.0 : 0.0;
  return GridFunction(g, std::move(vals));
}

std::vector<GridFunction> bmo_test_set(const GridSpec& g, std::uint64_t seed) {
  std::vector<GridFunction> out;
  out.push_back(clipped_log(g, {0.0, 0.0}));
  out.push_back(clipped_log(g, g.d == 1 ? std::array<double, 2>{0.5, 0.0}
                                        : std::array<double, 2>{0.5, 0.5}));
  out.push_back(clipped_log(g, g.d == 1 ? std::array<double, 2>{1.0, 0.0}
                                        : std::array<double, 2>{1.0, 1.0}));
  out.push_back(half_indicator(g, 0));
  if (g.d == 2) out.push_back(half_indicator(g, 1));
  if (g.depth > 0) {
    out.push_back(martingale_function(g, 1.0, seed));
    out.push_back(martingale_function(g, 1.0, seed + 1));
    GridFunction casc = cascade_weight(g, 1.7, seed + 2);
    out.push_back(casc.map([](double v) { return std::log(v); }));
  }
  return out;
}

GridFunction witness_b(const GridFunction& v, const Cube& q) {
  if (!v.nonneg()) throw std::invalid_argument("witness_b requires a nonnegative weight");
  double avg = average(v, q);
  if (!(avg > 0.0)) throw std::invalid_argument("witness_b requires v mass on the cube");
  GridFunction m = grid_maximal(v, q);
  return m.map([avg](double x) { return 0.5 * std::log(std::max(x, 1e-300) / avg); });
}

FamilySampler make_family_sampler(const GridSpec& g) {
  // seed-independent corpus of stopping functions, built lazily per spec
  return [g](std::mt19937_64& rng) -> SmallFamily {
    // random dyadic root of side >= 2
    int max_level = g.depth >= 1 ? g.depth - 1 : 0;
    int level = static_cast<int>(pick(rng, static_cast<std::uint64_t>(max_level + 1)));
    std::int64_t side = g.cells_per_axis() >> level;
    std::int64_t per_axis = std::int64_t{1} << level;
    Cube root{g.d, {0, 0}, side};
    root.o[0] = static_cast<std::int64_t>(pick(rng, static_cast<std::uint64_t>(per_axis))) * side;
    if (g.d == 2) root.o[1] = static_cast<std::int64_t>(pick(rng, static_cast<std::uint64_t>(per_axis))) * side;

    SmallFamily fam;
    fam.root = root;
    if (side < 2) {
      fam.nominal_L = 1.0;
      return fam;  // no proper subcubes: empty family
    }

    switch (pick(rng, 3)) {
      case 0: {
        // adversarial single subcube in a corner
        int down = 1 + static_cast<int>(pick(rng, static_cast<std::uint64_t>(
                                                  std::max<int>(1, g.depth - level))));
        std::int64_t s = std::max<std::int64_t>(side >> down, 1);
        fam.cubes.push_back(Cube{g.d, {root.o[0], root.o[1]}, s});
        double ratio = static_cast<double>(root.cell_count()) /
                       static_cast<double>(fam.cubes[0].cell_count());
        fam.nominal_L = ratio;
        break;
      }
      case 1: {
        // stopping cubes of a seeded martingale at a level beyond its BMO norm
        GridFunction f = martingale_function(g, 1.0, rng());
        double L = 1.5 + unit_double(rng) * 4.0;
        CZDecomposition dec = cz_decompose(f, root, L);
        SmallFamily stop = small_family_from_cz(dec);
        if (!stop.cubes.empty()) return stop;
        fam.nominal_L = 1.0;
        break;
      }
      default: {
        // random disjoint dyadic descendants, one or two levels down
        int down = side >= 4 ? 2 : 1;
        std::int64_t sub = side >> down;
        std::int64_t per = std::int64_t{1} << down;
        std::vector<Cube> pool;
        for (std::int64_t i = 0; i < per; ++i)
          for (std::int64_t j = 0; j < (g.d == 2 ? per : 1); ++j)
            pool.push_back(Cube{g.d, {root.o[0] + i * sub, root.o[1] + j * sub}, sub});
        for (std::size_t k = pool.size() - 1; k > 0; --k) std::swap(pool[k], pool[pick(rng, k + 1)]);
        double L = 2.0 + unit_double(rng) * 14.0;
        std::int64_t take = std::clamp<std::int64_t>(
            static_cast<std::int64_t>(static_cast<double>(pool.size()) / L), 1,
            static_cast<std::int64_t>(pool.size()));
        for (std::int64_t k = 0; k < take; ++k) fam.cubes.push_back(pool[static_cast<std::size_t>(k)]);
        fam.nominal_L = static_cast<double>(root.cell_count()) /
                        static_cast<double>(std::max<std::int64_t>(fam.covered_cells(), 1));
        break;
      }
    }
    return fam;
  };
}

}  // namespace dw
