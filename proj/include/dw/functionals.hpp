#pragma once

#include <functional>
#include <memory>
#include <optional>
#include <random>
#include <stdexcept>
#include <string>
#include <vector>

#include "dw/grid.hpp"

namespace dw {

struct FamilyError : std::runtime_error {
  Cube offender;
  FamilyError(const std::string& msg, const Cube& q) : std::runtime_error(msg), offender(q) {}
};

enum class YKind { Lebesgue, Mass, DoubledMass, CpIntegral, RScale };

/// Cube functional Y(Q). Five kinds:
///   lebesgue      |Q|
///   mass          w(Q)
///   doubled_mass  w(2Q)   (2Q snapped to the lattice, clipped at the domain)
///   cp_integral   ∫ M(χ_Q)^p w over the domain, p > 1, M evaluated in closed
///                 form at cell midpoints
///   rscale        w_r(Q) = |Q| (⨍_Q w^r)^{1/r}, r > 1
/// Weight-backed kinds hold a shared, immutable weight.
class FunctionalY {
 public:
  static FunctionalY lebesgue(const GridSpec& g);
  static FunctionalY mass(std::shared_ptr<const GridFunction> w);
  static FunctionalY doubled_mass(std::shared_ptr<const GridFunction> w);
  static FunctionalY cp_integral(std::shared_ptr<const GridFunction> w, double p);
  static FunctionalY rscale(std::shared_ptr<const GridFunction> w, double r);

  YKind kind() const { return kind_; }
  double param() const { return param_; }  // p or r; 0 otherwise
  const GridSpec& spec() const { return spec_; }
  const GridFunction* weight() const { return w_.get(); }
  std::string name() const;

  double operator()(const Cube& q) const;

  /// Exponent class membership known analytically: lebesgue is 1-small with
  /// constant 1, rscale is r'-small with constant 1 by Hölder. Other kinds
  /// need an empirical estimate.
  std::optional<double> analytic_q() const;

 private:
  FunctionalY(YKind k, GridSpec g, std::shared_ptr<const GridFunction> w, double param);
  YKind kind_;
  GridSpec spec_;
  std::shared_ptr<const GridFunction> w_;
  std::shared_ptr<const GridFunction> wr_;  // w^r for rscale
  double param_ = 0.0;
};

/// Disjoint subcubes of a root whose total cell count is at most a 1/L
/// fraction of the root's.
struct SmallFamily {
  Cube root;
  std::vector<Cube> cubes;
  double nominal_L = 1.0;

  std::int64_t covered_cells() const;
  /// |Q| / Σ|Q_i|; +inf for an empty family.
  double effective_L() const;
  /// Disjointness, containment in the root, and the nominal smallness bound.
  void validate(const GridSpec& g) const;
};

/// rho = (Σ Y(Q_i)) · L_eff^{1/q} / Y(Q) for the family's effective L.
/// Y ∈ 𝒴_q means rho ≤ beta uniformly over families. Empty families give 0;
/// a zero-Y root with a nonzero sum gives +inf.
double check_Yq_smallness(const FunctionalY& y, double q, const SmallFamily& family);

using FamilySampler = std::function<SmallFamily(std::mt19937_64&)>;

/// Empirical beta: max rho over sampled families. Deterministic for a fixed
/// seed and sampler.
double estimate_beta(const FunctionalY& y, double q, const FamilySampler& sampler, int trials,
                     std::uint64_t seed);

struct CarlesonSum {
  double lhs;    // Σ_{P∈F} Y(P)
  double kappa;  // beta_hat / (1 - L^{-1/q})
  Cube root;
  int layers;
};

/// Sums Y over a layered Carleson family F (the root must be a member and
/// contain all others). Verifies that the maximal strict descendants of each
/// member cover at most a 1/L fraction of it; a violation raises FamilyError
/// naming the offending parent.
CarlesonSum carleson_sum(const FunctionalY& y, double q, double beta_hat,
                         const std::vector<Cube>& family, double L);

}  // namespace dw
