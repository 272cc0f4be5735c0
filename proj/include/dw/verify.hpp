#pragma once

#include <cstdint>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "dw/bmo.hpp"
#include "dw/constants.hpp"
#include "dw/functionals.hpp"
#include "dw/grid.hpp"

namespace dw {

/// Named BMO test battery (names parallel to the function list).
struct TestBattery {
  std::vector<std::string> names;
  std::vector<GridFunction> fns;
};
TestBattery standard_battery(const GridSpec& g, std::uint64_t seed);

/// Two-sided characterization of the generalized Fujii-Wilson constant by
/// weighted BMO norms. A is the constant; S is the best normalized test
/// ratio sup_b ||b||_{BMO_{v,Y}} / ||b||_BMO over the battery, the per-cube
/// half-indicator witnesses, and the proof witness at the argmax cube.
struct CharacterizationReport {
  std::string weight_name;
  std::string y_name;
  GridSpec grid;
  bool full_family = false;  // family the norms and sup ran over
  double ainfty = 0.0;       // A
  double s_value = 0.0;      // S
  std::string s_witness;     // battery member that realized S
  double witness_ratio = 0.0;   // normalized ratio of the proof witness alone
  double witness_bmo = 0.0;     // plain BMO norm of the proof witness
  double band = 0.0;            // S / A
  bool uv_ok = true;            // v(Q) <= 4 S Y(Q) on every dyadic cube
  double uv_worst = 0.0;        // max over dyadic Q of v(Q) / (4 S Y(Q))
  Cube uv_worst_cube;
  std::int64_t uv_cubes = 0;
};

/// Several functionals against one weight, sharing the oscillation scans.
std::vector<CharacterizationReport> verify_characterization(
    std::shared_ptr<const GridFunction> v, const std::vector<FunctionalY>& ys,
    const TestBattery& battery, FamilyChoice choice = FamilyChoice::Auto);
CharacterizationReport verify_characterization(std::shared_ptr<const GridFunction> v,
                                               const FunctionalY& y, const TestBattery& battery,
                                               FamilyChoice choice = FamilyChoice::Auto);

/// Quantitative John-Nirenberg asymmetry: p-oscillations against p q beta.
/// Oscillation suprema run over the dyadic family; the hypothesis
/// w(Q) <= Y(Q) is checked over the same family first.
struct GenAsymReport {
  std::string f_name;
  std::string w_name;
  std::string y_name;
  GridSpec grid;
  bool hypothesis_ok = true;
  std::int64_t hypothesis_violations = 0;
  Cube worst_hypothesis_cube;
  double q = 0.0;
  double beta_hat = 0.0;   // 1 for analytically q-small functionals
  bool beta_analytic = false;
  double beta_check = 0.0;  // sampled smallness for analytic functionals (Hoelder says <= 1)
  double f_bmo = 0.0;      // dyadic BMO norm of f
  std::vector<double> p_values;
  std::vector<double> posc_sup;  // per p: sup_Q y-normalized p-oscillation
  std::vector<double> c_emp;     // per p: posc_sup / (p q beta f_bmo)
  double c_emp_max = 0.0;
  // mass-normalized corollary chain (filled when w carries the functional)
  bool chained = false;
  double fw = 0.0;                    // [w]_{A infty}
  std::vector<double> mass_posc_sup;  // per p: sup_Q mass-normalized p-oscillation
  double c_growth = 0.0;              // max_p mass_posc / (p fw f_bmo)
  double growth_alpha1 = 0.0;         // pgrowth_to_exp of mass_posc at alpha = 1
  double exp_lux_sup = 0.0;           // sup_Q exp Luxemburg of f - f_Q under w/w(Q)
  double c_exp = 0.0;                 // exp_lux_sup / (fw f_bmo)
  // sparse / Carleson cross-route, at the largest p in the list
  double sparse_c_meas = 0.0;
  double sparse_eta = 0.0;
  double carleson_lhs = 0.0;
  double carleson_kappa = 0.0;
  double carleson_ratio = 0.0;  // lhs / (kappa Y(root))
  double route_factor = 0.0;    // direct posc over the sparse-route certificate
};

GenAsymReport verify_genasym(const GridFunction& f, std::shared_ptr<const GridFunction> w,
                             const FunctionalY& y, double q, const std::vector<double>& p_list,
                             std::uint64_t seed, int beta_trials = 300);

/// Bloom-BMO growth: commutator-style weighted oscillations of (b - b_Q)/w
/// against the A_1/A_p and Fujii-Wilson constants. Suprema over dyadic cubes.
struct BloomReport {
  std::string b_name;
  std::string w_name;
  GridSpec grid;
  double bloom_norm = 0.0;  // ||b||_{BMO_{1,w}} over the dyadic family
  double fw = 0.0;          // [w]_{A infty}
  bool a1_finite = false;
  double a1 = 0.0;
  std::vector<double> q_values;
  std::vector<double> raw_lhs_q;  // per q: sup_Q ((1/w(Q)) int |(b-b_Q)/w|^q w)^{1/q}
  std::vector<double> part1_c;    // per q: raw / (q a1^{1/q'} fw^{1/q} bloom_norm)
  double genjn_c = 0.0;           // sup_Q expL((b-b_Q)/w) / (a1 bloom_norm)
  std::vector<double> p_values;   // part (2), needs the dual weight
  std::vector<double> ap_values;
  std::vector<double> raw_lhs_p;  // per p: the same display at exponent p'
  std::vector<double> part2_c;    // per p: raw / (p' bloom_norm ap^{1/p} fw^{1/p'})
  bool part1_skipped = false;     // a1 infinite
  bool part2_skipped = false;     // some ap infinite
};

BloomReport verify_bloom(const GridFunction& b, std::shared_ptr<const GridFunction> w,
                         const std::vector<double>& q_list, const std::vector<double>& p_list,
                         FamilyChoice choice = FamilyChoice::Auto);

/// Config-driven experiment runner. Reads the JSON config, executes the
/// configured suites over the configured corpora, writes one JSON report per
/// suite plus summary.csv (one row per (grid, weight, suite, constant),
/// values printed with 17 significant digits) into out_dir.
/// Exit code semantics: 0 clean, 1 hard-assertion failure, 2 config/IO error.
struct RunResult {
  int exit_code = 0;
  int hard_failures = 0;
  std::vector<std::string> failures;  // human-readable hard-assert messages
};

/// With progress = true, one timing line per (grid, weight) goes to stderr;
/// the written reports are identical either way.
RunResult run_experiments(const std::string& config_path, const std::string& out_dir,
                          std::optional<std::uint64_t> seed_override = std::nullopt,
                          std::optional<FamilyChoice> family_override = std::nullopt,
                          bool progress = false);

}  // namespace dw
