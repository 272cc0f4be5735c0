#pragma once

#include <array>
#include <cstdint>
#include <vector>

#include "dw/functionals.hpp"
#include "dw/grid.hpp"

namespace dw {

/// |x - c|^alpha sampled at cell midpoints and clipped to
/// [2^{-depth|alpha|}, 2^{depth|alpha|}]. Requires alpha > -d (local
/// integrability at the singularity).
GridFunction power_weight(const GridSpec& g, double alpha, std::array<double, 2> center = {0.0, 0.0});

/// Multiplicative dyadic cascade with mean-one multipliers {t, 2-t},
/// t in [1,2), assigned per split by the seeded generator (independently per
/// axis in d=2), then normalized to unit total integral. Mass is conserved at
/// every split, so the weight is exactly a dyadic martingale measure.
GridFunction cascade_weight(const GridSpec& g, double t, std::uint64_t seed);

/// Constant-one weight with a seeded fraction of cells set to exactly zero
/// (at least one cell always survives). Exercises the degenerate branches:
/// infinite A_1/A_p, skipped zero-mass cubes.
GridFunction holey_weight(const GridSpec& g, double hole_fraction, std::uint64_t seed);

/// log(1/|x - c|) at cell midpoints, clipped to ±(depth+1)·log 2. The
/// canonical unbounded member of BMO.
GridFunction clipped_log(const GridSpec& g, std::array<double, 2> center = {0.0, 0.0});

/// Dyadic martingale with increments ±eps: every dyadic cube splits its value
/// among its children with a seeded sign pattern of mean zero.
GridFunction martingale_function(const GridSpec& g, double eps, std::uint64_t seed);

/// Indicator of the half-domain {x_axis < 1/2}.
GridFunction half_indicator(const GridSpec& g, int axis = 0);

/// Battery of BMO test functions: clipped logs at several centers, half
/// indicators, seeded martingales, and the log of a cascade weight. Raw,
/// un-normalized; callers divide by the measured BMO norm.
std::vector<GridFunction> bmo_test_set(const GridSpec& g, std::uint64_t seed);

/// Proof-style witness for the lower half of the characterization:
/// b = (1/2) log( M(v χ_Q) / ⟨v⟩_Q ) with the uncentered grid maximal
/// operator. Nonnegative on Q, uniformly in BMO. Requires v mass on Q.
GridFunction witness_b(const GridFunction& v, const Cube& q);

/// Sampler of smallness families for empirical beta estimation. Mixes
/// stopping-time families of seeded test functions, adversarial single
/// subcubes, and random disjoint dyadic packings, over varying roots and
/// smallness parameters.
FamilySampler make_family_sampler(const GridSpec& g);

}  // namespace dw
