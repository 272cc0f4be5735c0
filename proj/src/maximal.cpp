#include "dw/maximal.hpp"

#include <algorithm>
#include <cmath>
#include <deque>
#include <stdexcept>
#include <vector>

namespace dw {

namespace {

GridFunction abs_function(const GridFunction& f) {
  if (f.nonneg()) return f;
  return f.map([](double v) { return std::fabs(v); });
}

// |f| restricted to q and clipped to the domain, zero elsewhere.
GridFunction masked_abs(const GridFunction& f, const Cube& q) {
  const GridSpec& g = f.spec();
  std::int64_t n = g.cells_per_axis();
  std::vector<double> vals(static_cast<std::size_t>(g.total_cells()), 0.0);
  std::int64_t lo0 = std::max<std::int64_t>(q.o[0], 0), hi0 = std::min(q.o[0] + q.s, n);
  if (g.d == 1) {
    for (std::int64_t i = lo0; i < hi0; ++i) vals[static_cast<std::size_t>(i)] = std::fabs(f[i]);
  } else {
    std::int64_t lo1 = std::max<std::int64_t>(q.o[1], 0), hi1 = std::min(q.o[1] + q.s, n);
    for (std::int64_t i = lo0; i < hi0; ++i)
      for (std::int64_t j = lo1; j < hi1; ++j)
        vals[static_cast<std::size_t>(i * n + j)] = std::fabs(f.at(i, j));
  }
  return GridFunction(g, std::move(vals));
}

void descend(const GridFunction& fa, const Cube& node, double inherited, std::vector<double>& out) {
  double m = std::max(inherited, average(fa, node));
  std::int64_t n = fa.spec().cells_per_axis();
  if (node.s == 1) {
    out[static_cast<std::size_t>(fa.spec().d == 1 ? node.o[0] : node.o[0] * n + node.o[1])] = m;
    return;
  }
  std::int64_t half = node.s / 2;
  if (fa.spec().d == 1) {
    descend(fa, Cube{1, {node.o[0], 0}, half}, m, out);
    descend(fa, Cube{1, {node.o[0] + half, 0}, half}, m, out);
  } else {
    for (int a = 0; a < 2; ++a)
      for (int b = 0; b < 2; ++b)
        descend(fa, Cube{2, {node.o[0] + a * half, node.o[1] + b * half}, half}, m, out);
  }
}

// Sliding maximum of src over windows [c-m+1, c] ∩ [0, len-1], written to dst.
void window_max(const std::vector<double>& src, std::int64_t m, std::vector<double>& dst) {
  std::int64_t len = static_cast<std::int64_t>(src.size());
  std::deque<std::int64_t> dq;
  std::int64_t count = len + m - 1;  // dst positions c = 0 .. len+m-2
  dst.assign(static_cast<std::size_t>(count), 0.0);
  for (std::int64_t c = 0; c < count; ++c) {
    if (c < len) {
      while (!dq.empty() && src[static_cast<std::size_t>(dq.back())] <= src[static_cast<std::size_t>(c)]) dq.pop_back();
      dq.push_back(c);
    }
    while (!dq.empty() && dq.front() < c - m + 1) dq.pop_front();
    dst[static_cast<std::size_t>(c)] = dq.empty() ? 0.0 : src[static_cast<std::size_t>(dq.front())];
  }
}

}  // namespace

GridFunction dyadic_maximal(const GridFunction& f, const Cube& root) {
  const GridSpec& g = f.spec();
  if (root.d != g.d) throw std::invalid_argument("root cube dimension does not match grid");
  if (!root.dyadic() || !root.inside_domain(g))
    throw std::invalid_argument("dyadic maximal function requires a dyadic root inside the domain");
  GridFunction fa = abs_function(f);
  std::vector<double> out(static_cast<std::size_t>(g.total_cells()), 0.0);
  descend(fa, root, 0.0, out);
  return GridFunction(g, std::move(out));
}

GridFunction grid_maximal(const GridFunction& f, const Cube& q) {
  const GridSpec& g = f.spec();
  if (q.d != g.d) throw std::invalid_argument("cube dimension does not match grid");
  std::int64_t n = g.cells_per_axis();
  GridFunction fm = masked_abs(f, q);
  std::vector<double> out(static_cast<std::size_t>(g.total_cells()), 0.0);
  if (g.d == 1) {
    std::vector<double> sums, best;
    for (std::int64_t m = 1; m <= n; ++m) {
      sums.resize(static_cast<std::size_t>(n - m + 1));
      for (std::int64_t a = 0; a + m <= n; ++a) sums[static_cast<std::size_t>(a)] = fm.cell_sum(a, a + m);
      window_max(sums, m, best);
      double inv = 1.0 / static_cast<double>(m);
      for (std::int64_t c = 0; c < n; ++c)
        out[static_cast<std::size_t>(c)] = std::max(out[static_cast<std::size_t>(c)], best[static_cast<std::size_t>(c)] * inv);
    }
    return GridFunction(g, std::move(out));
  }
  std::vector<double> sums(static_cast<std::size_t>(n) * static_cast<std::size_t>(n));
  std::vector<double> rowmax(static_cast<std::size_t>(n) * static_cast<std::size_t>(n));
  std::vector<double> line, best;
  for (std::int64_t m = 1; m <= n; ++m) {
    std::int64_t offs = n - m + 1;
    for (std::int64_t i = 0; i < offs; ++i)
      for (std::int64_t j = 0; j < offs; ++j)
        sums[static_cast<std::size_t>(i * n + j)] = fm.cell_sum(i, i + m, j, j + m);
    // pass 1: max over the second axis window, per box row
    line.resize(static_cast<std::size_t>(offs));
    for (std::int64_t i = 0; i < offs; ++i) {
      for (std::int64_t j = 0; j < offs; ++j) line[static_cast<std::size_t>(j)] = sums[static_cast<std::size_t>(i * n + j)];
      window_max(line, m, best);
      for (std::int64_t y = 0; y < n; ++y) rowmax[static_cast<std::size_t>(i * n + y)] = best[static_cast<std::size_t>(y)];
    }
    // pass 2: max over the first axis window, per cell column
    double inv = 1.0 / static_cast<double>(m * m);
    for (std::int64_t y = 0; y < n; ++y) {
      line.resize(static_cast<std::size_t>(offs));
      for (std::int64_t i = 0; i < offs; ++i) line[static_cast<std::size_t>(i)] = rowmax[static_cast<std::size_t>(i * n + y)];
      window_max(line, m, best);
      for (std::int64_t x = 0; x < n; ++x) {
        std::size_t idx = static_cast<std::size_t>(x * n + y);
        out[idx] = std::max(out[idx], best[static_cast<std::size_t>(x)] * inv);
      }
    }
  }
  return GridFunction(g, std::move(out));
}

GridFunction grid_maximal_brute(const GridFunction& f, const Cube& q) {
  const GridSpec& g = f.spec();
  if (q.d != g.d) throw std::invalid_argument("cube dimension does not match grid");
  std::int64_t n = g.cells_per_axis();
  GridFunction fm = masked_abs(f, q);
  std::vector<double> out(static_cast<std::size_t>(g.total_cells()), 0.0);
  if (g.d == 1) {
    for (std::int64_t a = 0; a < n; ++a) {
      for (std::int64_t b = a + 1; b <= n; ++b) {
        double avg = fm.cell_sum(a, b) / static_cast<double>(b - a);
        for (std::int64_t c = a; c < b; ++c)
          out[static_cast<std::size_t>(c)] = std::max(out[static_cast<std::size_t>(c)], avg);
      }
    }
  } else {
    for (std::int64_t m = 1; m <= n; ++m) {
      for (std::int64_t i = 0; i + m <= n; ++i) {
        for (std::int64_t j = 0; j + m <= n; ++j) {
          double avg = fm.cell_sum(i, i + m, j, j + m) / static_cast<double>(m * m);
          for (std::int64_t x = i; x < i + m; ++x)
            for (std::int64_t y = j; y < j + m; ++y) {
              std::size_t idx = static_cast<std::size_t>(x * n + y);
              out[idx] = std::max(out[idx], avg);
            }
        }
      }
    }
  }
  return GridFunction(g, std::move(out));
}

double indicator_maximal(const GridSpec& g, const Cube& q, const std::array<double, 2>& x) {
  if (q.d != g.d) throw std::invalid_argument("cube dimension does not match grid");
  double h = g.cell_width();
  double len = static_cast<double>(q.s) * h;
  double dist[2] = {0.0, 0.0};
  for (int i = 0; i < g.d; ++i) {
    auto a = static_cast<std::size_t>(i);
    double lo = static_cast<double>(q.o[a]) * h, hi = static_cast<double>(q.o[a] + q.s) * h;
    dist[i] = std::max({0.0, lo - x[a], x[a] - hi});
  }
  if (g.d == 1) return len / (len + dist[0]);
  double dmax = std::max(dist[0], dist[1]), dmin = std::min(dist[0], dist[1]);
  if (dmax == 0.0) return 1.0;
  // With per-axis overlaps min(len, s - d_i)+ the objective
  // V(s) = overlap_0 overlap_1 / s^2 has three candidate optima: the square
  // just reaching the far side of Q (s = len + dmax), the interior optimum
  // s = 2 dmax of the half-saturated regime, and the near-axis saturation
  // point s = len + dmin. The three values cross over continuously
  // (B = C at 2 dmax - dmin = len), and the best of them is the maximum.
  double cover = (len / (len + dmax)) * (len / (len + dmax));
  if (dmax <= len && 2.0 * dmax - dmin >= len) cover = std::max(cover, len / (4.0 * dmax));
  double reach = len + dmin - dmax;
  if (reach > 0.0) cover = std::max(cover, reach * len / ((len + dmin) * (len + dmin)));
  return cover;
}

}  // namespace dw
