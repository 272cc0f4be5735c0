#pragma once

#include "dw/grid.hpp"

namespace dw {

/// Dyadic Hardy-Littlewood maximal function of |f| localized to a dyadic
/// root cube: cell value = max average of |f| over the dyadic cubes between
/// the cell and the root. Zero outside the root. Throws if the root is not
/// dyadic or not inside the domain.
GridFunction dyadic_maximal(const GridFunction& f, const Cube& root);

/// Uncentered maximal function of |f|·χ_Q over every grid-aligned cube,
/// evaluated on each cell of the domain. Cubes sticking out of [0,1)^d never
/// beat an in-domain cube (the mass sits inside, so clipping in d=1 and
/// repositioning in d=2 only raise the average), so the scan runs over
/// in-domain cubes only. Sliding-window maxima give O(N^2) total work in
/// d=1 and O(N^3) in d=2.
GridFunction grid_maximal(const GridFunction& f, const Cube& q);

/// Direct enumeration over every in-domain cube; oracle for grid_maximal.
GridFunction grid_maximal_brute(const GridFunction& f, const Cube& q);

/// Closed-form value of the uncentered maximal function of an indicator of a
/// cube at a point, for the continuum limit of the model. In d=1 this is
/// |I|/(|I|+dist(x,I)); in d=2 the optimum square either covers Q entirely,
/// trades coverage against size in the far direction, or saturates the near
/// axis at side |Q| + dmin, and the best of the three branch maxima is
/// returned.
double indicator_maximal(const GridSpec& g, const Cube& q, const std::array<double, 2>& x);

}  // namespace dw
