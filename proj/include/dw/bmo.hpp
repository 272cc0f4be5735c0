#pragma once

#include <utility>
#include <vector>

#include "dw/functionals.hpp"
#include "dw/grid.hpp"

namespace dw {

struct NormResult {
  double value = 0.0;
  Cube argmax;
};

/// sup over the cube family of ⨍_Q |f - f_Q|, f_Q the plain Lebesgue average.
NormResult bmo_norm(const GridFunction& f, CubeFamily family = CubeFamily::Full);

/// sup over the family of (1/Y(Q)) ∫_Q |f - f_Q| v. f_Q stays the unweighted
/// average. With v ≡ 1 and the Lebesgue functional this reproduces bmo_norm
/// bit for bit (bmo_norm delegates here).
NormResult weighted_bmo_norm(const GridFunction& f, const GridFunction& v, const FunctionalY& y,
                             CubeFamily family = CubeFamily::Full);

/// ((1/Y(Q)) ∫_Q |f - f_Q|^p w)^{1/p}, p >= 1.
double p_oscillation(const GridFunction& f, const GridFunction& w, const FunctionalY& y,
                     const Cube& q, double p);

enum class LuxMeasure { MassQ, Mass2Q };

/// Luxemburg norm of g on Q under the normalized measure w·dx / w(Q) (or
/// / w(2Q)): inf { λ : ∫_Q (e^{|g|/λ} - 1) dμ <= 1 }, found by bisection on
/// the bracket [max|g|/60, 60·max|g|] to relative tolerance 1e-10. Cells
/// where the measure vanishes are ignored; g ≡ 0 on the support gives 0.
double exp_luxemburg(const GridFunction& g, const Cube& q, const GridFunction& w,
                     LuxMeasure measure = LuxMeasure::MassQ);

/// Converts L^p growth samples (p, norm) into the exponential-scale constant
/// sup norm / p^alpha.
double pgrowth_to_exp(const std::vector<std::pair<double, double>>& samples, double alpha);

}  // namespace dw
