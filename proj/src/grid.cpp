#include "dw/grid.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>
#include <stdexcept>

namespace dw {

std::int64_t GridSpec::total_cells() const {
  std::int64_t n = cells_per_axis();
  return d == 1 ? n : n * n;
}

double GridSpec::cell_volume() const {
  double h = cell_width();
  return d == 1 ? h : h * h;
}

GridSpec make_spec(int d, int depth) {
  if (d != 1 && d != 2) throw std::invalid_argument("grid dimension must be 1 or 2");
  if (depth < 0 || depth > 30) throw std::invalid_argument("grid depth out of range [0,30]");
  if (d == 2 && depth > 15) throw std::invalid_argument("grid depth out of range for d=2");
  return GridSpec{d, depth};
}

bool Cube::dyadic() const {
  if (s <= 0 || (s & (s - 1)) != 0) return false;
  for (int i = 0; i < d; ++i)
    if (o[static_cast<std::size_t>(i)] % s != 0) return false;
  return true;
}

bool Cube::contains(const Cube& inner) const {
  for (int i = 0; i < d; ++i) {
    auto a = static_cast<std::size_t>(i);
    if (inner.o[a] < o[a] || inner.o[a] + inner.s > o[a] + s) return false;
  }
  return true;
}

bool Cube::intersects(const Cube& other) const {
  for (int i = 0; i < d; ++i) {
    auto a = static_cast<std::size_t>(i);
    if (o[a] + s <= other.o[a] || other.o[a] + other.s <= o[a]) return false;
  }
  return true;
}

bool Cube::inside_domain(const GridSpec& g) const {
  std::int64_t n = g.cells_per_axis();
  for (int i = 0; i < d; ++i) {
    auto a = static_cast<std::size_t>(i);
    if (o[a] < 0 || o[a] + s > n) return false;
  }
  return true;
}

double Cube::volume(const GridSpec& g) const {
  double side = side_length(g);
  return d == 1 ? side : side * side;
}

std::int64_t Cube::cell_count() const { return d == 1 ? s : s * s; }

std::string Cube::str() const {
  std::ostringstream os;
  os << "[" << o[0] << "," << o[0] + s << ")";
  if (d == 2) os << "x[" << o[1] << "," << o[1] + s << ")";
  return os.str();
}

Cube unit_cube(const GridSpec& g) { return Cube{g.d, {0, 0}, g.cells_per_axis()}; }

Cube cell_cube(const GridSpec& g, std::int64_t x0, std::int64_t x1) {
  return Cube{g.d, {x0, g.d == 2 ? x1 : 0}, 1};
}

Cube doubled(const Cube& q) {
  Cube r = q;
  for (int i = 0; i < q.d; ++i) r.o[static_cast<std::size_t>(i)] -= q.s / 2;
  r.s = 2 * q.s;
  return r;
}

std::array<double, 2> cell_midpoint(const GridSpec& g, std::int64_t x0, std::int64_t x1) {
  double h = g.cell_width();
  return {(static_cast<double>(x0) + 0.5) * h, g.d == 2 ? (static_cast<double>(x1) + 0.5) * h : 0.0};
}

std::int64_t cube_count(const GridSpec& g, CubeFamily family) {
  std::int64_t n = g.cells_per_axis();
  if (family == CubeFamily::Dyadic) {
    std::int64_t total = 0;
    for (int k = 0; k <= g.depth; ++k) {
      std::int64_t per_axis = std::int64_t{1} << k;
      total += g.d == 1 ? per_axis : per_axis * per_axis;
    }
    return total;
  }
  std::int64_t total = 0;
  for (std::int64_t s = 1; s <= n; ++s) {
    std::int64_t offs = n - s + 1;
    total += g.d == 1 ? offs : offs * offs;
  }
  return total;
}

void for_each_cube(const GridSpec& g, CubeFamily family, const std::function<void(const Cube&)>& fn) {
  std::int64_t n = g.cells_per_axis();
  if (family == CubeFamily::Dyadic) {
    for (std::int64_t s = n; s >= 1; s /= 2) {
      for (std::int64_t a = 0; a < n; a += s) {
        if (g.d == 1) {
          fn(Cube{1, {a, 0}, s});
        } else {
          for (std::int64_t b = 0; b < n; b += s) fn(Cube{2, {a, b}, s});
        }
      }
    }
    return;
  }
  for (std::int64_t s = n; s >= 1; --s) {
    for (std::int64_t a = 0; a + s <= n; ++a) {
      if (g.d == 1) {
        fn(Cube{1, {a, 0}, s});
      } else {
        for (std::int64_t b = 0; b + s <= n; ++b) fn(Cube{2, {a, b}, s});
      }
    }
  }
}

std::vector<Cube> enumerate_cubes(const GridSpec& g, CubeFamily family) {
  std::vector<Cube> out;
  out.reserve(static_cast<std::size_t>(cube_count(g, family)));
  for_each_cube(g, family, [&](const Cube& q) { out.push_back(q); });
  return out;
}

GridFunction::GridFunction(GridSpec spec, std::vector<double> values)
    : spec_(spec), values_(std::move(values)) {
  if (static_cast<std::int64_t>(values_.size()) != spec_.total_cells())
    throw std::invalid_argument("grid value count does not match spec");
  for (double v : values_) {
    if (!std::isfinite(v)) throw std::invalid_argument("grid values must be finite");
    if (v < 0.0) nonneg_ = false;
  }
  std::int64_t n = spec_.cells_per_axis();
  if (spec_.d == 1) {
    prefix_.assign(static_cast<std::size_t>(n + 1), 0.0L);
    for (std::int64_t i = 0; i < n; ++i)
      prefix_[static_cast<std::size_t>(i + 1)] = prefix_[static_cast<std::size_t>(i)] + values_[static_cast<std::size_t>(i)];
  } else {
    std::size_t w = static_cast<std::size_t>(n + 1);
    prefix_.assign(w * w, 0.0L);
    for (std::int64_t i = 0; i < n; ++i) {
      long double row = 0.0L;
      for (std::int64_t j = 0; j < n; ++j) {
        row += values_[static_cast<std::size_t>(i * n + j)];
        prefix_[static_cast<std::size_t>(i + 1) * w + static_cast<std::size_t>(j + 1)] =
            prefix_[static_cast<std::size_t>(i) * w + static_cast<std::size_t>(j + 1)] + row;
      }
    }
  }
}

std::int64_t GridFunction::linear(std::int64_t x0, std::int64_t x1) const {
  return spec_.d == 1 ? x0 : x0 * spec_.cells_per_axis() + x1;
}

double GridFunction::cell_sum(std::int64_t lo0, std::int64_t hi0, std::int64_t lo1, std::int64_t hi1) const {
  std::int64_t n = spec_.cells_per_axis();
  lo0 = std::max<std::int64_t>(lo0, 0);
  hi0 = std::min(hi0, n);
  if (lo0 >= hi0) return 0.0;
  if (spec_.d == 1)
    return static_cast<double>(prefix_[static_cast<std::size_t>(hi0)] - prefix_[static_cast<std::size_t>(lo0)]);
  lo1 = std::max<std::int64_t>(lo1, 0);
  hi1 = std::min(hi1, n);
  if (lo1 >= hi1) return 0.0;
  std::size_t w = static_cast<std::size_t>(n + 1);
  auto p = [&](std::int64_t i, std::int64_t j) { return prefix_[static_cast<std::size_t>(i) * w + static_cast<std::size_t>(j)]; };
  return static_cast<double>(p(hi0, hi1) - p(lo0, hi1) - p(hi0, lo1) + p(lo0, lo1));
}

double GridFunction::cell_sum(const Cube& q) const {
  if (q.d != spec_.d) throw std::invalid_argument("cube dimension does not match grid");
  return cell_sum(q.o[0], q.o[0] + q.s, q.o[1], q.o[1] + q.s);
}

double GridFunction::total() const {
  std::int64_t n = spec_.cells_per_axis();
  return cell_sum(0, n, 0, n);
}

GridFunction GridFunction::map(const std::function<double(double)>& fn) const {
  std::vector<double> out(values_.size());
  for (std::size_t i = 0; i < values_.size(); ++i) out[i] = fn(values_[i]);
  return GridFunction(spec_, std::move(out));
}

double integrate(const GridFunction& f, const Cube& q) {
  return f.cell_sum(q) * f.spec().cell_volume();
}

double integrate_direct(const GridFunction& f, const Cube& q) {
  const GridSpec& g = f.spec();
  if (q.d != g.d) throw std::invalid_argument("cube dimension does not match grid");
  std::int64_t n = g.cells_per_axis();
  std::int64_t lo0 = std::max<std::int64_t>(q.o[0], 0), hi0 = std::min(q.o[0] + q.s, n);
  long double acc = 0.0L;
  if (g.d == 1) {
    for (std::int64_t i = lo0; i < hi0; ++i) acc += f[i];
  } else {
    std::int64_t lo1 = std::max<std::int64_t>(q.o[1], 0), hi1 = std::min(q.o[1] + q.s, n);
    for (std::int64_t i = lo0; i < hi0; ++i)
      for (std::int64_t j = lo1; j < hi1; ++j) acc += f.at(i, j);
  }
  return static_cast<double>(acc) * g.cell_volume();
}

double average(const GridFunction& f, const Cube& q) {
  return integrate(f, q) / q.volume(f.spec());
}

GridFunction constant_function(const GridSpec& g, double value) {
  return GridFunction(g, std::vector<double>(static_cast<std::size_t>(g.total_cells()), value));
}

}  // namespace dw
