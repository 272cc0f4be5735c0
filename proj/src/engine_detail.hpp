#pragma once

// Internal helpers shared by the sup engines: triangular per-interval tables,
// localized maximal-function sums, and bulk functional evaluation. Everything
// here works in cell units (raw value sums; callers scale by cell volume).

#include <cmath>
#include <cstdint>
#include <deque>
#include <vector>

#include "dw/functionals.hpp"
#include "dw/grid.hpp"
#include "dw/maximal.hpp"

namespace dw::detail {

inline std::vector<double> cell_prefix_d1(const GridFunction& w) {
  std::int64_t n = w.spec().cells_per_axis();
  std::vector<double> pre(static_cast<std::size_t>(n + 1), 0.0);
  long double acc = 0.0L;
  for (std::int64_t i = 0; i < n; ++i) {
    acc += w[i];
    pre[static_cast<std::size_t>(i + 1)] = static_cast<double>(acc);
  }
  return pre;
}

/// Value per interval [a,b), 0 <= a < b <= n.
struct Triangular {
  std::int64_t n = 0;
  std::vector<double> v;

  explicit Triangular(std::int64_t n_) : n(n_), v(static_cast<std::size_t>(n_ * (n_ + 1) / 2), 0.0) {}
  std::size_t idx(std::int64_t a, std::int64_t b) const {
    return static_cast<std::size_t>(a * n - a * (a - 1) / 2 + (b - a - 1));
  }
  double& at(std::int64_t a, std::int64_t b) { return v[idx(a, b)]; }
  double at(std::int64_t a, std::int64_t b) const { return v[idx(a, b)]; }
};

/// Visits the roots [a,b) for fixed a and b = a+1..bmax in order, passing the
/// localized maximal sum S(b) = Σ_{c∈[a,b)} max_{c∈P⊆[a,b)} avg(w,P) to the
/// callback. Each extension only adds candidate intervals ending at the new
/// right edge, whose best-so-far prefix maxima arrive in one left-to-right
/// scan, so the whole sweep is O((bmax-a)^2).
template <class CB>
inline void local_sweep_d1(const std::vector<double>& pre, std::int64_t a, std::int64_t bmax,
                           std::vector<double>& scratch, CB&& cb) {
  scratch.assign(static_cast<std::size_t>(bmax - a), 0.0);
  double sum = 0.0;
  for (std::int64_t b = a + 1; b <= bmax; ++b) {
    double pb = pre[static_cast<std::size_t>(b)];
    double running = 0.0;
    for (std::int64_t c = a; c < b; ++c) {
      double avg = (pb - pre[static_cast<std::size_t>(c)]) / static_cast<double>(b - c);
      if (avg > running) running = avg;
      double& mc = scratch[static_cast<std::size_t>(c - a)];
      if (running > mc) {
        sum += running - mc;
        mc = running;
      }
    }
    cb(b, sum);
  }
}

inline double local_maximal_sum_d1(const std::vector<double>& pre, std::int64_t a, std::int64_t b,
                                   std::vector<double>& scratch) {
  double out = 0.0;
  local_sweep_d1(pre, a, b, scratch, [&](std::int64_t bb, double s) {
    if (bb == b) out = s;
  });
  return out;
}

inline Triangular local_maximal_sums_d1(const GridFunction& w) {
  std::int64_t n = w.spec().cells_per_axis();
  std::vector<double> pre = cell_prefix_d1(w);
  Triangular t(n);
  std::vector<double> scratch;
  for (std::int64_t a = 0; a < n; ++a)
    local_sweep_d1(pre, a, n, scratch, [&](std::int64_t b, double s) { t.at(a, b) = s; });
  return t;
}

inline void sliding_max(const std::vector<double>& src, std::int64_t m, std::vector<double>& dst) {
  std::int64_t len = static_cast<std::int64_t>(src.size());
  std::deque<std::int64_t> dq;
  std::int64_t count = len + m - 1;
  dst.assign(static_cast<std::size_t>(count), 0.0);
  for (std::int64_t c = 0; c < count; ++c) {
    if (c < len) {
      while (!dq.empty() && src[static_cast<std::size_t>(dq.back())] <= src[static_cast<std::size_t>(c)]) dq.pop_back();
      dq.push_back(c);
    }
    while (!dq.empty() && dq.front() < c - m + 1) dq.pop_front();
    if (!dq.empty()) dst[static_cast<std::size_t>(c)] = src[static_cast<std::size_t>(dq.front())];
  }
}

/// Localized maximal sum over one square root in d=2: copies the subgrid,
/// then runs a separable sliding maximum per sub-square width. O(s^3).
inline double local_maximal_sum_d2(const GridFunction& w, const Cube& q) {
  std::int64_t m = q.s;
  std::vector<long double> pre(static_cast<std::size_t>((m + 1) * (m + 1)), 0.0L);
  for (std::int64_t i = 0; i < m; ++i) {
    long double row = 0.0L;
    for (std::int64_t j = 0; j < m; ++j) {
      row += w.at(q.o[0] + i, q.o[1] + j);
      pre[static_cast<std::size_t>((i + 1) * (m + 1) + (j + 1))] =
          pre[static_cast<std::size_t>(i * (m + 1) + (j + 1))] + row;
    }
  }
  auto box = [&](std::int64_t i0, std::int64_t i1, std::int64_t j0, std::int64_t j1) {
    auto p = [&](std::int64_t i, std::int64_t j) { return pre[static_cast<std::size_t>(i * (m + 1) + j)]; };
    return static_cast<double>(p(i1, j1) - p(i0, j1) - p(i1, j0) + p(i0, j0));
  };
  std::vector<double> best(static_cast<std::size_t>(m * m), 0.0);
  std::vector<double> sums, line, tmp;
  std::vector<double> rowmax(static_cast<std::size_t>(m * m));
  for (std::int64_t om = 1; om <= m; ++om) {
    std::int64_t offs = m - om + 1;
    sums.assign(static_cast<std::size_t>(offs * offs), 0.0);
    for (std::int64_t i = 0; i < offs; ++i)
      for (std::int64_t j = 0; j < offs; ++j)
        sums[static_cast<std::size_t>(i * offs + j)] = box(i, i + om, j, j + om);
    line.resize(static_cast<std::size_t>(offs));
    for (std::int64_t i = 0; i < offs; ++i) {
      for (std::int64_t j = 0; j < offs; ++j) line[static_cast<std::size_t>(j)] = sums[static_cast<std::size_t>(i * offs + j)];
      sliding_max(line, om, tmp);
      for (std::int64_t y = 0; y < m; ++y) rowmax[static_cast<std::size_t>(i * m + y)] = tmp[static_cast<std::size_t>(y)];
    }
    double inv = 1.0 / static_cast<double>(om * om);
    for (std::int64_t y = 0; y < m; ++y) {
      line.resize(static_cast<std::size_t>(offs));
      for (std::int64_t i = 0; i < offs; ++i) line[static_cast<std::size_t>(i)] = rowmax[static_cast<std::size_t>(i * m + y)];
      sliding_max(line, om, tmp);
      for (std::int64_t x = 0; x < m; ++x) {
        std::size_t idx = static_cast<std::size_t>(x * m + y);
        best[idx] = std::max(best[idx], tmp[static_cast<std::size_t>(x)] * inv);
      }
    }
  }
  double total = 0.0;
  for (double vv : best) total += vv;
  return total;
}

/// Closed-form M(chi_Q)^p at cell midpoints for d=2 Cp denominators. The
/// value depends on the cube side m and the per-axis cell gaps (kmax, kmin);
/// the slice for one side is cached, and cube enumerations visit sides in
/// descending blocks so each slice is built once. kmin = -1 encodes a
/// midpoint projecting inside Q's span on the near axis.
struct CpSliceD2 {
  std::int64_t n = 0;
  double p = 0.0;
  std::int64_t side = 0;
  std::vector<double> slice;  // [(kmax)*(n+1) + kmin+1]

  void ensure(std::int64_t m) {
    if (side == m) return;
    side = m;
    slice.assign(static_cast<std::size_t>(n * (n + 1)), 0.0);
    double md = static_cast<double>(m);
    for (std::int64_t kmax = 0; kmax < n; ++kmax) {
      double dmax = static_cast<double>(kmax) + 0.5;
      double a = (md / (md + dmax)) * (md / (md + dmax));
      for (std::int64_t kmin = -1; kmin <= kmax; ++kmin) {
        double dmin = kmin < 0 ? 0.0 : static_cast<double>(kmin) + 0.5;
        // the three branch maxima of indicator_maximal, in cell units
        double v = a;
        if (dmax <= md && 2.0 * dmax - dmin >= md) v = std::max(v, md / (4.0 * dmax));
        double reach = md + dmin - dmax;
        if (reach > 0.0) v = std::max(v, reach * md / ((md + dmin) * (md + dmin)));
        slice[static_cast<std::size_t>(kmax * (n + 1) + kmin + 1)] = std::pow(v, p);
      }
    }
  }
  double val(std::int64_t kmax, std::int64_t kmin) const {
    return slice[static_cast<std::size_t>(kmax * (n + 1) + kmin + 1)];
  }
};

/// ∫ M(chi_Q)^p w over the whole domain (d=2), in integral units.
inline double cp_den_d2(const GridFunction& w, const Cube& q, CpSliceD2& t, double cell_vol) {
  std::int64_t n = w.spec().cells_per_axis();
  std::int64_t m = q.s;
  t.ensure(m);
  long double acc = 0.0L;
  for (std::int64_t x = 0; x < n; ++x) {
    // gap index along axis 0: -1 means the midpoint projects inside Q
    std::int64_t k0 = -1;
    if (x < q.o[0]) k0 = q.o[0] - x - 1;
    else if (x >= q.o[0] + m) k0 = x - (q.o[0] + m);
    for (std::int64_t y = 0; y < n; ++y) {
      double wv = w.at(x, y);
      if (wv == 0.0) continue;
      std::int64_t k1 = -1;
      if (y < q.o[1]) k1 = q.o[1] - y - 1;
      else if (y >= q.o[1] + m) k1 = y - (q.o[1] + m);
      if (k0 < 0 && k1 < 0) {
        acc += wv;
        continue;
      }
      acc += wv * t.val(std::max(k0, k1), std::min(k0, k1));
    }
  }
  return static_cast<double>(acc) * cell_vol;
}

/// Y(Q) for every interval of a d=1 grid, in integral units.
inline Triangular y_table_d1(const FunctionalY& y) {
  const GridSpec& g = y.spec();
  std::int64_t n = g.cells_per_axis();
  double h = g.cell_width();
  Triangular t(n);
  switch (y.kind()) {
    case YKind::Lebesgue: {
      for (std::int64_t a = 0; a < n; ++a)
        for (std::int64_t b = a + 1; b <= n; ++b) t.at(a, b) = static_cast<double>(b - a) * h;
      break;
    }
    case YKind::Mass: {
      std::vector<double> pre = cell_prefix_d1(*y.weight());
      for (std::int64_t a = 0; a < n; ++a)
        for (std::int64_t b = a + 1; b <= n; ++b)
          t.at(a, b) = (pre[static_cast<std::size_t>(b)] - pre[static_cast<std::size_t>(a)]) * h;
      break;
    }
    case YKind::DoubledMass: {
      std::vector<double> pre = cell_prefix_d1(*y.weight());
      for (std::int64_t a = 0; a < n; ++a)
        for (std::int64_t b = a + 1; b <= n; ++b) {
          std::int64_t s = b - a;
          std::int64_t lo = std::max<std::int64_t>(a - s / 2, 0);
          std::int64_t hi = std::min<std::int64_t>(a - s / 2 + 2 * s, n);
          t.at(a, b) = (pre[static_cast<std::size_t>(hi)] - pre[static_cast<std::size_t>(lo)]) * h;
        }
      break;
    }
    case YKind::RScale: {
      double r = y.param();
      const GridFunction& w = *y.weight();
      // running sums per row instead of prefix differences: w^r spans enough
      // orders of magnitude on rough weights that differences cancel to zero
      std::vector<double> wr(static_cast<std::size_t>(n));
      for (std::int64_t c = 0; c < n; ++c) wr[static_cast<std::size_t>(c)] = std::pow(w[c], r);
      for (std::int64_t a = 0; a < n; ++a) {
        long double acc = 0.0L;
        for (std::int64_t b = a + 1; b <= n; ++b) {
          acc += wr[static_cast<std::size_t>(b - 1)];
          double mean = static_cast<double>(acc) / static_cast<double>(b - a);
          t.at(a, b) = static_cast<double>(b - a) * h * std::pow(mean, 1.0 / r);
        }
      }
      break;
    }
    case YKind::CpIntegral: {
      double p = y.param();
      const GridFunction& w = *y.weight();
      // (side m, k cells of gap)  ->  (m / (m + k + 1/2))^p
      std::vector<std::vector<double>> tail(static_cast<std::size_t>(n + 1));
      for (std::int64_t m = 1; m <= n; ++m) {
        auto& row = tail[static_cast<std::size_t>(m)];
        row.resize(static_cast<std::size_t>(n));
        for (std::int64_t k = 0; k < n; ++k)
          row[static_cast<std::size_t>(k)] =
              std::pow(static_cast<double>(m) / (static_cast<double>(m) + static_cast<double>(k) + 0.5), p);
      }
      std::vector<double> pre = cell_prefix_d1(w);
      for (std::int64_t a = 0; a < n; ++a) {
        for (std::int64_t b = a + 1; b <= n; ++b) {
          std::int64_t m = b - a;
          const auto& row = tail[static_cast<std::size_t>(m)];
          double acc = pre[static_cast<std::size_t>(b)] - pre[static_cast<std::size_t>(a)];
          for (std::int64_t c = 0; c < a; ++c) acc += w[c] * row[static_cast<std::size_t>(a - c - 1)];
          for (std::int64_t c = b; c < n; ++c) acc += w[c] * row[static_cast<std::size_t>(c - b)];
          t.at(a, b) = acc * h;
        }
      }
      break;
    }
  }
  return t;
}

}  // namespace dw::detail
