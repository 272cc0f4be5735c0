#pragma once

#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "dw/functionals.hpp"
#include "dw/grid.hpp"

namespace dw {

/// Supremum of a cube ratio over one cube family.
struct FamilyValue {
  bool computed = false;
  double value = 0.0;
  Cube argmax;
};

/// A sup-type constant evaluated over the dyadic family and, when feasible,
/// the full grid-aligned family. The full-family value is the canonical one;
/// the dyadic value is always available and cheap.
struct ConstantReport {
  std::string name;
  GridSpec grid;
  FamilyValue dyadic;
  FamilyValue full;

  double canonical() const { return full.computed ? full.value : dyadic.value; }
  const Cube& canonical_argmax() const { return full.computed ? full.argmax : dyadic.argmax; }
};

/// Which families to evaluate. Auto always takes the dyadic family and adds
/// the full family when the grid is within the exact-scan budget
/// (d=1: depth <= 10, d=2: depth <= 6).
enum class FamilyChoice { DyadicOnly, FullOnly, Both, Auto };

/// True when the grid is inside the exact full-family scan budget above.
bool full_family_feasible(const GridSpec& g);

/// sup_Q (1/Y(Q)) ∫_Q M(v χ_Q); cubes with zero numerator and denominator
/// are skipped. M is the uncentered grid maximal operator, localized to Q
/// (an in-root cube always realizes the maximum for points of Q).
ConstantReport ainfty_Y(std::shared_ptr<const GridFunction> v, const FunctionalY& y,
                        FamilyChoice choice = FamilyChoice::Auto);

/// Batched form for several functionals against one weight: the localized
/// maximal sums are priced once per cube and shared, so this is much cheaper
/// than one call per functional (and agrees with it value for value).
std::vector<ConstantReport> ainfty_Y(std::shared_ptr<const GridFunction> v,
                                     const std::vector<FunctionalY>& ys,
                                     FamilyChoice choice = FamilyChoice::Auto);

/// Fujii-Wilson constant: ainfty_Y with Y the mass of v itself.
ConstantReport fujii_wilson(std::shared_ptr<const GridFunction> w,
                            FamilyChoice choice = FamilyChoice::Auto);

/// Weak variant: denominator w(2Q).
ConstantReport weak_ainfty(std::shared_ptr<const GridFunction> w,
                           FamilyChoice choice = FamilyChoice::Auto);

/// C_p-flavored variant: denominator ∫ M(χ_Q)^p w, p > 1.
ConstantReport cp_constant(std::shared_ptr<const GridFunction> w, double p,
                           FamilyChoice choice = FamilyChoice::Auto);

struct A1Report {
  double value = 0.0;  // +inf when w vanishes somewhere
  bool infinite = false;
  std::int64_t arg_cell = 0;
};
/// ess sup M w / w over cells; +inf (flagged, not an error) for weights with
/// zero cells.
A1Report a1_constant(const GridFunction& w);

struct ApResult {
  ConstantReport report;
  bool infinite = false;
  std::optional<GridFunction> sigma;  // dual weight w^{1-p'}; absent when infinite
};
/// sup_Q (⨍_Q w)(⨍_Q σ)^{p-1} with σ = w^{1-p'}; p must exceed 1.
ApResult ap_constant(std::shared_ptr<const GridFunction> w, double p,
                     FamilyChoice choice = FamilyChoice::Auto);

/// Reverse Hölder exponent 1 + 1/(tau · fw) for a Fujii-Wilson value fw.
double rh_exponent(double fujii_wilson_value, double tau);

struct RHCheck {
  bool holds = true;
  double worst_ratio = 0.0;  // max over cubes of (⨍_Q w^r)^{1/r} / (c ⨍ w)
  Cube worst;
  std::int64_t cubes_checked = 0;
};
/// Verifies (⨍_Q w^r)^{1/r} <= c ⨍_Q w over a family; the weak form compares
/// against c w(2Q)/|Q| instead (doubled-cube mass per unit of |Q|).
RHCheck rh_check(const GridFunction& w, double r, double c, CubeFamily family, bool weak = false);

}  // namespace dw
