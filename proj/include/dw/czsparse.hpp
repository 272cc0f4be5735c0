#pragma once

#include <cstdint>
#include <vector>

#include "dw/functionals.hpp"
#include "dw/grid.hpp"

namespace dw {

/// Stopping-time decomposition of f - f_Q on a dyadic root at level L.
/// Stopping cubes are the maximal dyadic subcubes where the average of
/// |f - f_Q| exceeds L strictly; g carries the averaged part, b the
/// oscillation inside the stopping cubes, and g + b = f - f_Q cellwise by
/// construction.
struct CZDecomposition {
  Cube root;
  double level = 0.0;
  double base_mean = 0.0;  // f_Q
  double dev_mean = 0.0;   // ⨍_Q |f - f_Q|
  std::vector<Cube> stopping;
  GridFunction good;  // g: f - f_Q off the stopping set, stopping-cube averages inside
  GridFunction bad;   // b = (f - f_Q) - g
  /// Stopping cubes whose |f-f_Q| average exceeds 2^d L. A stopping cube
  /// with a proper dyadic parent inherits the parent's <= L average, so this
  /// can only fire when the root itself stops.
  int upper_violations = 0;

  double omega_cell_fraction() const;  // Σ|Q_j| / |Q| in cells
};

CZDecomposition cz_decompose(const GridFunction& f, const Cube& root, double level);

/// Exact re-checks of the decomposition guarantees, for tests and reports.
struct CZInvariants {
  bool selection_ok = true;       // every stopping average > L, maximality at the parent
  bool upper_ok = true;           // stopping averages <= 2^d L (up to root stopping)
  bool smallness_ok = true;       // Σ|Q_j| <= |Q| dev_mean / L
  double reconstruction_error = 0.0;  // max |(g+b) - (f - f_Q)| over root cells
  double good_bound_excess = 0.0;     // max(0, max|g| - 2^d L), 0 unless the root stops
  double bad_mean_error = 0.0;        // max over stopping cubes of |∫ b| / |Q_j|
  bool bad_support_ok = true;         // b = 0 off the stopping set
};
CZInvariants check_cz_invariants(const GridFunction& f, const CZDecomposition& dec);

SmallFamily small_family_from_cz(const CZDecomposition& dec);

/// Iterates the decomposition inside its own stopping cubes (each round
/// re-centers f at the local average) and returns root + all stopping cubes
/// of every round: a Carleson family with parameter L / dev when f has
/// dev <= 1 at every visited cube.
std::vector<Cube> cz_iterated_family(const GridFunction& f, const Cube& root, double level,
                                     int max_rounds);

/// Sparse refinement: stopping at 2^{d+1} times the local |f - f_P| average
/// keeps the stopping set of each node below a 2^{-(d+1)} cell fraction, so
/// the retained sets E_P make the family (1 - 2^{-(d+1)})-sparse.
struct SparseNode {
  Cube cube;
  double osc = 0.0;  // ⨍_P |f - f_P|
  std::vector<std::size_t> kids;
};
struct SparseFamily {
  Cube root;
  std::vector<SparseNode> nodes;  // node 0 is the root
  double eta = 0.0;               // guaranteed sparseness constant
};
struct SparseDomination {
  SparseFamily family;
  /// Smallest c with |f - f_Q| <= c Σ_P osc_P χ_P on the root, measured
  /// cellwise; 0 for constant f.
  double c_meas = 0.0;
};
SparseDomination sparse_dominate(const GridFunction& f, const Cube& root);

/// Exact sparseness check: per-node retained cells >= eta |P| and pairwise
/// disjoint retained sets.
bool is_sparse(const GridSpec& g, const SparseFamily& s, double eta);

}  // namespace dw
