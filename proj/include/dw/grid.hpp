#pragma once

#include <array>
#include <cstdint>
#include <functional>
#include <string>
#include <vector>

namespace dw {

/// Uniform dyadic grid on [0,1)^d. The unit cube is split into 2^depth cells
/// per axis; every stored function is piecewise constant on cells and extends
/// by zero outside the domain.
struct GridSpec {
  int d = 1;      // spatial dimension, 1 or 2
  int depth = 0;  // refinement depth; 2^depth cells per axis

  std::int64_t cells_per_axis() const { return std::int64_t{1} << depth; }
  std::int64_t total_cells() const;
  double cell_width() const { return 1.0 / static_cast<double>(cells_per_axis()); }
  double cell_volume() const;

  bool operator==(const GridSpec&) const = default;
};

GridSpec make_spec(int d, int depth);  // validates d in {1,2}, depth in [0,30]

/// Axis-parallel cube in cell coordinates: [o_i, o_i + s) per axis, side s >= 1.
/// Offsets may be negative and o+s may exceed the cell count (doubled cubes);
/// integration clips to the domain, volume never does.
struct Cube {
  int d = 1;
  std::array<std::int64_t, 2> o{0, 0};
  std::int64_t s = 1;

  /// True iff s is a power of two and s divides every offset.
  bool dyadic() const;
  bool contains(const Cube& inner) const;
  bool intersects(const Cube& other) const;
  bool inside_domain(const GridSpec& g) const;

  double side_length(const GridSpec& g) const { return static_cast<double>(s) * g.cell_width(); }
  double volume(const GridSpec& g) const;
  std::int64_t cell_count() const;  // s^d

  std::string str() const;  // "[o0,o0+s)x[o1,o1+s) @depth-less cell coords"

  bool operator==(const Cube&) const = default;
};

Cube unit_cube(const GridSpec& g);
Cube cell_cube(const GridSpec& g, std::int64_t x0, std::int64_t x1 = 0);

/// Concentric double in cell coordinates, snapped to the cell lattice:
/// offset o - floor(s/2) per axis, side 2s. Always contains the input cube.
Cube doubled(const Cube& q);

/// Midpoint of a cell, in domain coordinates.
std::array<double, 2> cell_midpoint(const GridSpec& g, std::int64_t x0, std::int64_t x1 = 0);

enum class CubeFamily { Dyadic, Full };

/// All cubes of the family inside the domain, side descending, offsets
/// lexicographic. Dyadic count is (2^{d(depth+1)}-1)/(2^d-1); the full
/// grid-aligned family enumerates every (offset, side) pair.
std::vector<Cube> enumerate_cubes(const GridSpec& g, CubeFamily family);
void for_each_cube(const GridSpec& g, CubeFamily family, const std::function<void(const Cube&)>& fn);
std::int64_t cube_count(const GridSpec& g, CubeFamily family);

/// Piecewise-constant function on the cells of a grid. Values are stored
/// row-major (axis 0 outer). A summed-area table is kept in extended
/// precision so box sums cost O(1) and survive the documented identity
/// checks against direct summation.
class GridFunction {
 public:
  GridFunction(GridSpec spec, std::vector<double> values);

  const GridSpec& spec() const { return spec_; }
  std::int64_t size() const { return static_cast<std::int64_t>(values_.size()); }
  bool nonneg() const { return nonneg_; }  // true iff every cell value >= 0

  double operator[](std::int64_t i) const { return values_[static_cast<std::size_t>(i)]; }
  double at(std::int64_t x0, std::int64_t x1 = 0) const { return values_[static_cast<std::size_t>(linear(x0, x1))]; }
  std::int64_t linear(std::int64_t x0, std::int64_t x1 = 0) const;
  const std::vector<double>& values() const { return values_; }

  /// Sum of cell values over [lo0,hi0) x [lo1,hi1), clipped to the domain.
  double cell_sum(std::int64_t lo0, std::int64_t hi0, std::int64_t lo1 = 0, std::int64_t hi1 = 1) const;
  double cell_sum(const Cube& q) const;
  double total() const;

  GridFunction map(const std::function<double(double)>& fn) const;

 private:
  GridSpec spec_;
  bool nonneg_ = true;
  std::vector<double> values_;
  std::vector<long double> prefix_;  // (N+1)^d summed-area table of raw values
};

/// Integral over Q∩[0,1)^d of f (cells clipped, values scaled by cell volume).
double integrate(const GridFunction& f, const Cube& q);
/// Direct-summation reference for the prefix-table integral.
double integrate_direct(const GridFunction& f, const Cube& q);
/// integrate(f,Q) / vol(Q); the volume is the full geometric volume of Q,
/// with no clipping, so averages of doubled cubes divide by (2s·h)^d.
double average(const GridFunction& f, const Cube& q);

GridFunction constant_function(const GridSpec& g, double value);

}  // namespace dw
