#include "dw/verify.hpp"

#include <algorithm>
#include <array>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <limits>
#include <sstream>
#include <stdexcept>

#include <json.hpp>

#include "dw/czsparse.hpp"
#include "dw/generators.hpp"
#include "dw/io.hpp"
#include "dw/maximal.hpp"
#include "engine_detail.hpp"

namespace dw {
namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

double safe_div(double num, double den) {
  if (num <= 0.0) return 0.0;
  if (den <= 0.0) return kInf;
  return num / den;
}

// ---------------------------------------------------------------------------
// characterization internals
// ---------------------------------------------------------------------------

struct DyadicScan {
  std::vector<Cube> cubes;   // enumeration order, root first
  std::vector<double> mass;  // integral of the weight over each cube
};

DyadicScan scan_dyadic(const GridFunction& v) {
  DyadicScan s;
  for_each_cube(v.spec(), CubeFamily::Dyadic, [&](const Cube& q) {
    s.cubes.push_back(q);
    s.mass.push_back(integrate(v, q));
  });
  return s;
}

/// Bulk Y over an enumeration. Cp in d=2 goes through the shared side-slice
/// cache (cube enumerations visit sides in descending blocks).
std::vector<double> y_on_cubes(const FunctionalY& y, const std::vector<Cube>& cubes) {
  std::vector<double> out(cubes.size());
  if (y.kind() == YKind::CpIntegral && y.spec().d == 2) {
    detail::CpSliceD2 t;
    t.n = y.spec().cells_per_axis();
    t.p = y.param();
    double vol = y.spec().cell_volume();
    for (std::size_t i = 0; i < cubes.size(); ++i)
      out[i] = detail::cp_den_d2(*y.weight(), cubes[i], t, vol);
  } else {
    for (std::size_t i = 0; i < cubes.size(); ++i) out[i] = y(cubes[i]);
  }
  return out;
}

/// Per-interval oscillation numerators ∫_I |f - f_I| v (v = 1 when null).
detail::Triangular osc_num_table_d1(const GridFunction& f, const GridFunction* v) {
  std::int64_t n = f.spec().cells_per_axis();
  double h = f.spec().cell_width();
  std::vector<double> pf = detail::cell_prefix_d1(f);
  const double* fv = f.values().data();
  const double* vv = v ? v->values().data() : nullptr;
  detail::Triangular t(n);
  for (std::int64_t a = 0; a < n; ++a) {
    for (std::int64_t b = a + 1; b <= n; ++b) {
      double mean = (pf[static_cast<std::size_t>(b)] - pf[static_cast<std::size_t>(a)]) /
                    static_cast<double>(b - a);
      double acc = 0.0;
      if (vv) {
        for (std::int64_t c = a; c < b; ++c)
          acc += std::fabs(fv[c] - mean) * vv[c];
      } else {
        for (std::int64_t c = a; c < b; ++c) acc += std::fabs(fv[c] - mean);
      }
      t.at(a, b) = acc * h;
    }
  }
  return t;
}

double table_sup(const detail::Triangular& num, const detail::Triangular& den) {
  double best = 0.0;
  bool inf = false;
  for (std::size_t i = 0; i < num.v.size(); ++i) {
    double d = den.v[i];
    if (d > 0.0) {
      double r = num.v[i] / d;
      if (r > best) best = r;
    } else if (num.v[i] > 0.0) {
      inf = true;
    }
  }
  return inf ? kInf : best;
}

double scan_sup(const std::vector<double>& num, const std::vector<double>& den) {
  double best = 0.0;
  bool inf = false;
  for (std::size_t i = 0; i < num.size(); ++i) {
    double d = den[i];
    if (d > 0.0) {
      double r = num[i] / d;
      if (r > best) best = r;
    } else if (num[i] > 0.0) {
      inf = true;
    }
  }
  return inf ? kInf : best;
}

/// Norm engine behind verify_characterization. Denominators are fixed once
/// per call (one table or vector per functional, plus Lebesgue); each test
/// function then contributes a single pair of oscillation-numerator passes
/// that every functional reuses.
struct NormEngine {
  const GridFunction& v;
  bool tables;  // d=1 full-family interval tables
  std::vector<detail::Triangular> y_dens;
  detail::Triangular leb;
  std::vector<Cube> cubes;                // scan path
  std::vector<std::vector<double>> dens;  // scan path, per functional
  std::vector<double> leb_dens;           // scan path, |Q|

  NormEngine(const GridFunction& v_, CubeFamily fam, const std::vector<FunctionalY>& ys)
      : v(v_), tables(fam == CubeFamily::Full && v_.spec().d == 1), leb(0) {
    if (tables) {
      leb = detail::y_table_d1(FunctionalY::lebesgue(v_.spec()));
      y_dens.reserve(ys.size());
      for (const auto& y : ys) y_dens.push_back(detail::y_table_d1(y));
    } else {
      cubes = enumerate_cubes(v_.spec(), fam);
      dens.reserve(ys.size());
      for (const auto& y : ys) dens.push_back(y_on_cubes(y, cubes));
      leb_dens.resize(cubes.size());
      for (std::size_t i = 0; i < cubes.size(); ++i)
        leb_dens[i] = cubes[i].volume(v_.spec());
    }
  }

  /// Oscillation numerators of one test function: ∫_Q |b - b_Q| v and the
  /// unweighted ∫_Q |b - b_Q|, per interval (tables) or per cube (scan).
  struct Nums {
    detail::Triangular tw{0}, tp{0};
    std::vector<double> sw, sp;
  };

  Nums nums(const GridFunction& b) const {
    Nums n;
    if (tables) {
      n.tw = osc_num_table_d1(b, &v);
      n.tp = osc_num_table_d1(b, nullptr);
      return n;
    }
    const GridSpec& g = b.spec();
    double volc = g.cell_volume();
    n.sw.resize(cubes.size());
    n.sp.resize(cubes.size());
    for (std::size_t i = 0; i < cubes.size(); ++i) {
      const Cube& q = cubes[i];
      double mean = average(b, q);
      double accw = 0.0, accp = 0.0;
      if (g.d == 1) {
        for (std::int64_t c = q.o[0]; c < q.o[0] + q.s; ++c) {
          double dev = std::fabs(b[c] - mean);
          accw += dev * v[c];
          accp += dev;
        }
      } else {
        for (std::int64_t x = q.o[0]; x < q.o[0] + q.s; ++x)
          for (std::int64_t y = q.o[1]; y < q.o[1] + q.s; ++y) {
            double dev = std::fabs(b.at(x, y) - mean);
            accw += dev * v.at(x, y);
            accp += dev;
          }
      }
      n.sw[i] = accw * volc;
      n.sp[i] = accp * volc;
    }
    return n;
  }

  double weighted(const Nums& n, std::size_t yi) const {
    if (tables) return table_sup(n.tw, y_dens[yi]);
    return scan_sup(n.sw, dens[yi]);
  }
  double plain(const Nums& n) const {
    if (tables) return table_sup(n.tp, leb);
    return scan_sup(n.sp, leb_dens);
  }
};

// ---------------------------------------------------------------------------
// oscillation loops shared by the genasym and Bloom suites (dyadic cubes)
// ---------------------------------------------------------------------------

double cube_abs_pow_sum(const GridFunction& f, const GridFunction& w, const Cube& q, double p) {
  const GridSpec& g = f.spec();
  double mean = average(f, q);
  double acc = 0.0;
  std::int64_t n = g.cells_per_axis();
  if (g.d == 1) {
    for (std::int64_t i = q.o[0]; i < q.o[0] + q.s; ++i)
      acc += std::pow(std::fabs(f[i] - mean), p) * w[i];
  } else {
    for (std::int64_t i = q.o[0]; i < q.o[0] + q.s; ++i)
      for (std::int64_t j = q.o[1]; j < q.o[1] + q.s; ++j)
        acc += std::pow(std::fabs(f.at(i, j) - mean), p) * w.at(i, j);
  }
  return acc * g.cell_volume();
}

/// ((1/w(Q)) ∫_Q |(b - b_Q)/w|^s w)^{1/s}; mirrors cube_abs_pow_sum so the
/// w ≡ 1 reduction agrees bit for bit. Zero-w cells carry no measure; a
/// nonzero offset there makes the display honestly infinite.
double bloom_cube_lhs(const GridFunction& b, const GridFunction& w, const Cube& q, double s,
                      double wq) {
  const GridSpec& g = b.spec();
  double mean = average(b, q);
  double acc = 0.0;
  bool inf = false;
  std::int64_t n = g.cells_per_axis();
  auto term = [&](double bc, double wc) {
    double d = std::fabs(bc - mean);
    if (wc <= 0.0) {
      if (d > 0.0) inf = true;
      return;
    }
    acc += std::pow(d, s) * std::pow(wc, 1.0 - s);
  };
  if (g.d == 1) {
    for (std::int64_t i = q.o[0]; i < q.o[0] + q.s; ++i) term(b[i], w[i]);
  } else {
    for (std::int64_t i = q.o[0]; i < q.o[0] + q.s; ++i)
      for (std::int64_t j = q.o[1]; j < q.o[1] + q.s; ++j) term(b.at(i, j), w.at(i, j));
  }
  if (inf) return kInf;
  if (!(wq > 0.0)) return 0.0;
  return std::pow(acc * g.cell_volume() / wq, 1.0 / s);
}

GridFunction shifted_by_mean(const GridFunction& f, const Cube& q) {
  double mean = average(f, q);
  return f.map([mean](double x) { return x - mean; });
}

}  // namespace

// ---------------------------------------------------------------------------
// battery
// ---------------------------------------------------------------------------

TestBattery standard_battery(const GridSpec& g, std::uint64_t seed) {
  TestBattery t;
  auto add = [&](const char* name, GridFunction f) {
    t.names.emplace_back(name);
    t.fns.push_back(std::move(f));
  };
  add("log_origin", clipped_log(g, {0.0, 0.0}));
  add("log_center",
      clipped_log(g, g.d == 1 ? std::array<double, 2>{0.5, 0.0} : std::array<double, 2>{0.5, 0.5}));
  add("log_corner",
      clipped_log(g, g.d == 1 ? std::array<double, 2>{1.0, 0.0} : std::array<double, 2>{1.0, 1.0}));
  add("half_axis0", half_indicator(g, 0));
  if (g.d == 2) add("half_axis1", half_indicator(g, 1));
  if (g.depth > 0) {
    add("martingale_a", martingale_function(g, 1.0, seed));
    add("martingale_b", martingale_function(g, 1.0, seed + 1));
    add("cascade_log", cascade_weight(g, 1.7, seed + 2).map([](double x) { return std::log(x); }));
  }
  return t;
}

// ---------------------------------------------------------------------------
// characterization
// ---------------------------------------------------------------------------

std::vector<CharacterizationReport> verify_characterization(std::shared_ptr<const GridFunction> v,
                                                            const std::vector<FunctionalY>& ys,
                                                            const TestBattery& battery,
                                                            FamilyChoice choice) {
  if (!v) throw std::invalid_argument("characterization: null weight");
  const GridSpec g = v->spec();
  if (ys.empty()) throw std::invalid_argument("characterization: no functionals");
  for (const auto& y : ys)
    if (!(y.spec() == g)) throw std::invalid_argument("characterization: functional grid mismatch");
  if (battery.fns.size() != battery.names.size())
    throw std::invalid_argument("characterization: battery names out of step");
  for (const auto& b : battery.fns)
    if (!(b.spec() == g)) throw std::invalid_argument("characterization: battery grid mismatch");
  if (!v->nonneg() || !(v->total() > 0.0))
    throw std::invalid_argument("characterization: weight must be nonnegative with positive mass");

  bool use_full =
      choice == FamilyChoice::FullOnly ||
      ((choice == FamilyChoice::Auto || choice == FamilyChoice::Both) && full_family_feasible(g));
  CubeFamily fam = use_full ? CubeFamily::Full : CubeFamily::Dyadic;

  DyadicScan scan = scan_dyadic(*v);
  NormEngine engine(*v, fam, ys);

  // battery numerators and plain norms, shared across the functionals
  std::vector<NormEngine::Nums> bat(battery.fns.size());
  std::vector<double> plain(battery.fns.size());
  for (std::size_t i = 0; i < battery.fns.size(); ++i) {
    bat[i] = engine.nums(battery.fns[i]);
    plain[i] = engine.plain(bat[i]);
  }

  std::vector<ConstantReport> acons =
      ainfty_Y(v, ys, use_full ? FamilyChoice::FullOnly : FamilyChoice::DyadicOnly);

  std::vector<CharacterizationReport> out;
  out.reserve(ys.size());
  for (std::size_t yi = 0; yi < ys.size(); ++yi) {
    const FunctionalY& y = ys[yi];
    CharacterizationReport rep;
    rep.y_name = y.name();
    rep.grid = g;
    rep.full_family = use_full;

    const FamilyValue& av = use_full ? acons[yi].full : acons[yi].dyadic;
    rep.ainfty = av.value;

    double s_best = 0.0;
    std::string s_name;
    for (std::size_t i = 0; i < battery.fns.size(); ++i) {
      if (!(plain[i] > 0.0)) continue;
      double r = engine.weighted(bat[i], yi) / plain[i];
      if (r > s_best) {
        s_best = r;
        s_name = battery.names[i];
      }
    }

    // proof witness at the constant's argmax cube
    GridFunction wit = witness_b(*v, av.argmax);
    NormEngine::Nums wn = engine.nums(wit);
    rep.witness_bmo = engine.plain(wn);
    double wit_weighted = engine.weighted(wn, yi);
    rep.witness_ratio = rep.witness_bmo > 0.0 ? wit_weighted / rep.witness_bmo : 0.0;
    if (rep.witness_ratio > s_best) {
      s_best = rep.witness_ratio;
      s_name = "proof_witness";
    }

    // per-cube half-indicator lower bounds: a half-split of Q has plain BMO
    // norm exactly 1/2 and weighted oscillation v(Q)/2 at Q, so each dyadic
    // cube with a half contributes v(Q)/Y(Q) to the sup over the unit ball
    std::vector<double> yvals = y_on_cubes(y, scan.cubes);
    for (std::size_t i = 0; i < scan.cubes.size(); ++i) {
      if (scan.cubes[i].s < 2) continue;
      double r = safe_div(scan.mass[i], yvals[i]);
      if (r > s_best) {
        s_best = r;
        s_name = "half_of_" + scan.cubes[i].str();
      }
    }
    rep.s_value = s_best;
    rep.s_witness = s_name;
    rep.band = safe_div(s_best, rep.ainfty);

    // Eq-uv: v(Q) <= 4 S Y(Q) over every dyadic cube
    rep.uv_cubes = static_cast<std::int64_t>(scan.cubes.size());
    double worst = 0.0;
    std::size_t worst_i = 0;
    bool ok = true;
    for (std::size_t i = 0; i < scan.cubes.size(); ++i) {
      double lhs = scan.mass[i];
      double rhs = 4.0 * s_best * yvals[i];
      if (lhs <= 0.0) continue;
      if (!(rhs > 0.0)) {
        ok = false;
        worst = kInf;
        worst_i = i;
        break;
      }
      double r = lhs / rhs;
      if (r > worst) {
        worst = r;
        worst_i = i;
      }
    }
    rep.uv_worst = worst;
    rep.uv_worst_cube = scan.cubes.empty() ? unit_cube(g) : scan.cubes[worst_i];
    rep.uv_ok = ok && worst <= 1.0 + 1e-12;
    out.push_back(std::move(rep));
  }
  return out;
}

CharacterizationReport verify_characterization(std::shared_ptr<const GridFunction> v,
                                               const FunctionalY& y, const TestBattery& battery,
                                               FamilyChoice choice) {
  return verify_characterization(std::move(v), std::vector<FunctionalY>{y}, battery, choice)[0];
}

// ---------------------------------------------------------------------------
// genasym
// ---------------------------------------------------------------------------

GenAsymReport verify_genasym(const GridFunction& f, std::shared_ptr<const GridFunction> w,
                             const FunctionalY& y, double q, const std::vector<double>& p_list,
                             std::uint64_t seed, int beta_trials) {
  if (!w) throw std::invalid_argument("genasym: null weight");
  const GridSpec g = f.spec();
  if (!(w->spec() == g) || !(y.spec() == g))
    throw std::invalid_argument("genasym: grid mismatch");
  if (!w->nonneg() || !(w->total() > 0.0))
    throw std::invalid_argument("genasym: weight must be nonnegative with positive mass");
  if (!(q >= 1.0)) throw std::invalid_argument("genasym: q must be >= 1");
  if (p_list.empty()) throw std::invalid_argument("genasym: empty p list");
  for (double p : p_list)
    if (!(p >= 1.0)) throw std::invalid_argument("genasym: p must be >= 1");
  if (beta_trials < 1) throw std::invalid_argument("genasym: beta_trials must be positive");

  GenAsymReport rep;
  rep.grid = g;
  rep.q = q;

  DyadicScan scan = scan_dyadic(*w);
  std::vector<double> yvals = y_on_cubes(y, scan.cubes);

  // The r-scale functional hits the mass with equality on cubes where w is
  // constant, and its denominators are direct sums. Comparing those against a
  // prefix-summed mass lets accumulation noise (≈1e-19 absolute) overwhelm a
  // 1e-12 relative tolerance on cells of mass ~1e-12, so put both sides on
  // the direct path for that functional.
  const bool direct_mass = y.kind() == YKind::RScale;
  double worst_hyp = 0.0;
  for (std::size_t i = 0; i < scan.cubes.size(); ++i) {
    double mass = direct_mass ? integrate_direct(*w, scan.cubes[i]) : scan.mass[i];
    if (mass > yvals[i] * (1.0 + 1e-12)) {
      ++rep.hypothesis_violations;
      double r = safe_div(mass, yvals[i]);
      if (r > worst_hyp) {
        worst_hyp = r;
        rep.worst_hypothesis_cube = scan.cubes[i];
      }
    }
  }
  rep.hypothesis_ok = rep.hypothesis_violations == 0;
  if (!rep.hypothesis_ok) return rep;

  auto aq = y.analytic_q();
  rep.beta_analytic = aq.has_value() && std::fabs(*aq - q) <= 1e-9 * std::max(1.0, q);
  FamilySampler sampler = make_family_sampler(g);
  if (rep.beta_analytic) {
    rep.beta_hat = 1.0;
    rep.beta_check = estimate_beta(y, q, sampler, std::min(beta_trials, 200), seed);
  } else {
    rep.beta_hat = estimate_beta(y, q, sampler, beta_trials, seed);
  }

  rep.f_bmo = bmo_norm(f, CubeFamily::Dyadic).value;
  // chain constants use the dyadic Fujii-Wilson value so refinements of the
  // same weight stay on one family
  rep.fw = fujii_wilson(w, FamilyChoice::DyadicOnly).dyadic.value;

  for (double p : p_list) {
    double sup_y = 0.0, sup_m = 0.0;
    for (std::size_t i = 0; i < scan.cubes.size(); ++i) {
      if (!(yvals[i] > 0.0) && !(scan.mass[i] > 0.0)) continue;
      double acc = cube_abs_pow_sum(f, *w, scan.cubes[i], p);
      if (acc <= 0.0) continue;
      if (yvals[i] > 0.0) sup_y = std::max(sup_y, std::pow(acc / yvals[i], 1.0 / p));
      if (scan.mass[i] > 0.0) sup_m = std::max(sup_m, std::pow(acc / scan.mass[i], 1.0 / p));
    }
    rep.p_values.push_back(p);
    rep.posc_sup.push_back(sup_y);
    rep.mass_posc_sup.push_back(sup_m);
    rep.c_emp.push_back(safe_div(sup_y, p * q * rep.beta_hat * rep.f_bmo));
  }
  rep.c_emp_max = *std::max_element(rep.c_emp.begin(), rep.c_emp.end());

  std::vector<std::pair<double, double>> growth;
  double cg = 0.0;
  for (std::size_t i = 0; i < rep.p_values.size(); ++i) {
    growth.emplace_back(rep.p_values[i], rep.mass_posc_sup[i]);
    cg = std::max(cg, safe_div(rep.mass_posc_sup[i], rep.p_values[i] * rep.fw * rep.f_bmo));
  }
  rep.c_growth = cg;
  rep.growth_alpha1 = pgrowth_to_exp(growth, 1.0);

  rep.chained = y.kind() == YKind::RScale && y.weight() == w.get();
  if (rep.chained) {
    double sup = 0.0;
    for (std::size_t i = 0; i < scan.cubes.size(); ++i) {
      if (!(scan.mass[i] > 0.0)) continue;
      GridFunction sh = shifted_by_mean(f, scan.cubes[i]);
      sup = std::max(sup, exp_luxemburg(sh, scan.cubes[i], *w));
    }
    rep.exp_lux_sup = sup;
    rep.c_exp = safe_div(sup, rep.fw * rep.f_bmo);
  }

  SparseDomination sp = sparse_dominate(f, unit_cube(g));
  rep.sparse_c_meas = sp.c_meas;
  rep.sparse_eta = sp.family.eta;
  std::vector<Cube> fam_cubes;
  fam_cubes.reserve(sp.family.nodes.size());
  for (const auto& node : sp.family.nodes) fam_cubes.push_back(node.cube);
  double L = std::ldexp(1.0, g.d + 1);
  CarlesonSum cs = carleson_sum(y, q, rep.beta_hat, fam_cubes, L);
  rep.carleson_lhs = cs.lhs;
  rep.carleson_kappa = cs.kappa;
  rep.carleson_ratio = safe_div(cs.lhs, cs.kappa * yvals[0]);
  rep.route_factor = safe_div(
      rep.posc_sup.back(),
      rep.sparse_c_meas * rep.p_values.back() * q * rep.beta_hat * rep.f_bmo);
  return rep;
}

// ---------------------------------------------------------------------------
// Bloom
// ---------------------------------------------------------------------------

BloomReport verify_bloom(const GridFunction& b, std::shared_ptr<const GridFunction> w,
                         const std::vector<double>& q_list, const std::vector<double>& p_list,
                         FamilyChoice choice) {
  if (!w) throw std::invalid_argument("bloom: null weight");
  const GridSpec g = b.spec();
  if (!(w->spec() == g)) throw std::invalid_argument("bloom: grid mismatch");
  if (!w->nonneg() || !(w->total() > 0.0))
    throw std::invalid_argument("bloom: weight must be nonnegative with positive mass");
  for (double qv : q_list)
    if (!(qv > 1.0)) throw std::invalid_argument("bloom: q must exceed 1");
  for (double pv : p_list)
    if (!(pv > 1.0)) throw std::invalid_argument("bloom: p must exceed 1");

  BloomReport rep;
  rep.grid = g;

  DyadicScan scan = scan_dyadic(*w);
  GridFunction ones = constant_function(g, 1.0);
  rep.bloom_norm = weighted_bmo_norm(b, ones, FunctionalY::mass(w), CubeFamily::Dyadic).value;
  {
    ConstantReport fwr = fujii_wilson(w, choice);
    rep.fw = fwr.canonical();
  }
  A1Report a1 = a1_constant(*w);
  rep.a1_finite = !a1.infinite;
  rep.a1 = a1.value;

  auto lhs_sup = [&](double s) {
    double sup = 0.0;
    for (std::size_t i = 0; i < scan.cubes.size(); ++i) {
      if (!(scan.mass[i] > 0.0)) continue;
      sup = std::max(sup, bloom_cube_lhs(b, *w, scan.cubes[i], s, scan.mass[i]));
    }
    return sup;
  };

  if (rep.a1_finite) {
    for (double qv : q_list) {
      double raw = lhs_sup(qv);
      double qp = qv / (qv - 1.0);
      rep.q_values.push_back(qv);
      rep.raw_lhs_q.push_back(raw);
      rep.part1_c.push_back(safe_div(
          raw, qv * std::pow(rep.a1, 1.0 / qp) * std::pow(rep.fw, 1.0 / qv) * rep.bloom_norm));
    }
    double sup = 0.0;
    std::int64_t n = g.cells_per_axis();
    for (std::size_t i = 0; i < scan.cubes.size(); ++i) {
      if (!(scan.mass[i] > 0.0)) continue;
      double mean = average(b, scan.cubes[i]);
      std::vector<double> vals(static_cast<std::size_t>(g.total_cells()), 0.0);
      for (std::int64_t c = 0; c < g.total_cells(); ++c) {
        double wc = (*w)[c];
        vals[static_cast<std::size_t>(c)] = wc > 0.0 ? (b[c] - mean) / wc : 0.0;
      }
      (void)n;
      GridFunction gq(g, std::move(vals));
      sup = std::max(sup, exp_luxemburg(gq, scan.cubes[i], *w));
    }
    rep.genjn_c = safe_div(sup, rep.a1 * rep.bloom_norm);
  } else {
    rep.part1_skipped = true;
  }

  for (double pv : p_list) {
    ApResult ap = ap_constant(w, pv, choice);
    if (ap.infinite) {
      rep.part2_skipped = true;
      break;
    }
    double pprime = pv / (pv - 1.0);
    double raw = lhs_sup(pprime);
    rep.p_values.push_back(pv);
    rep.ap_values.push_back(ap.report.canonical());
    rep.raw_lhs_p.push_back(raw);
    rep.part2_c.push_back(safe_div(raw, pprime * rep.bloom_norm *
                                            std::pow(ap.report.canonical(), 1.0 / pv) *
                                            std::pow(rep.fw, 1.0 / pprime)));
  }
  return rep;
}

// ---------------------------------------------------------------------------
// experiment runner
// ---------------------------------------------------------------------------

namespace {

using ojson = nlohmann::ordered_json;

std::string fmt17(double x) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.17g", x);
  return buf;
}

std::string fmt_short(double x) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%g", x);
  return buf;
}

std::string grid_label(const GridSpec& g) {
  return "d" + std::to_string(g.d) + "J" + std::to_string(g.depth);
}

std::string sanitize(std::string s) {
  for (char& c : s)
    if (c == ',' || c == '\n' || c == '"') c = '_';
  return s;
}

std::array<double, 2> parse_center(const ojson& j) {
  if (j.is_number()) return {j.get<double>(), 0.0};
  if (j.is_array() && (j.size() == 1 || j.size() == 2)) {
    double a = j[0].get<double>();
    double b = j.size() == 2 ? j[1].get<double>() : 0.0;
    return {a, b};
  }
  throw std::invalid_argument("config: center must be a number or [x] / [x,y]");
}

struct WeightCfg {
  std::string name;
  std::string gen;
  double alpha = 0.0;
  std::array<double, 2> center{0.0, 0.0};
  double t = 1.0;
  double fraction = 0.0;
  std::uint64_t seed_offset = 0;
  std::string file;
};

WeightCfg parse_weight(const ojson& j) {
  WeightCfg c;
  c.gen = j.at("gen").get<std::string>();
  c.name = sanitize(j.value("name", c.gen));
  if (c.gen == "power") {
    c.alpha = j.at("alpha").get<double>();
    if (j.contains("center")) c.center = parse_center(j.at("center"));
  } else if (c.gen == "cascade") {
    c.t = j.at("t").get<double>();
    c.seed_offset = j.value("seed_offset", 0);
  } else if (c.gen == "holey") {
    c.fraction = j.at("fraction").get<double>();
    c.seed_offset = j.value("seed_offset", 0);
  } else if (c.gen == "file") {
    c.file = j.at("path").get<std::string>();
  } else if (c.gen != "ones") {
    throw std::invalid_argument("config: unknown generator '" + c.gen + "'");
  }
  return c;
}

std::shared_ptr<GridFunction> build_weight(const WeightCfg& c, const GridSpec& g,
                                           std::uint64_t seed) {
  if (c.gen == "ones") return std::make_shared<GridFunction>(constant_function(g, 1.0));
  if (c.gen == "power") return std::make_shared<GridFunction>(power_weight(g, c.alpha, c.center));
  if (c.gen == "cascade")
    return std::make_shared<GridFunction>(cascade_weight(g, c.t, seed + c.seed_offset));
  if (c.gen == "holey")
    return std::make_shared<GridFunction>(holey_weight(g, c.fraction, seed + c.seed_offset));
  GridFunction f = load_grid(c.file);
  if (!(f.spec() == g))
    throw std::invalid_argument("config: grid file " + c.file + " does not match " +
                                grid_label(g));
  return std::make_shared<GridFunction>(std::move(f));
}

struct FunctionalCfg {
  std::string kind;
  std::string label;
  double p = 2.0;
  double r = 2.0;
  std::optional<double> q;  // explicit smallness exponent
};

FunctionalCfg parse_functional(const ojson& j) {
  FunctionalCfg c;
  c.kind = j.at("kind").get<std::string>();
  if (c.kind == "cp") {
    c.p = j.at("p").get<double>();
    c.label = "cp_p" + fmt_short(c.p);
  } else if (c.kind == "rscale") {
    c.r = j.at("r").get<double>();
    c.label = "rscale_r" + fmt_short(c.r);
  } else if (c.kind == "mass" || c.kind == "mass2" || c.kind == "lebesgue") {
    c.label = c.kind;
  } else {
    throw std::invalid_argument("config: unknown functional kind '" + c.kind + "'");
  }
  if (j.contains("q")) c.q = j.at("q").get<double>();
  c.label = sanitize(j.value("label", c.label));
  return c;
}

FunctionalY make_functional(const FunctionalCfg& c, std::shared_ptr<const GridFunction> v) {
  if (c.kind == "mass") return FunctionalY::mass(std::move(v));
  if (c.kind == "mass2") return FunctionalY::doubled_mass(std::move(v));
  if (c.kind == "cp") return FunctionalY::cp_integral(std::move(v), c.p);
  if (c.kind == "rscale") return FunctionalY::rscale(std::move(v), c.r);
  return FunctionalY::lebesgue(v->spec());
}

ojson cube_json(const Cube& q) {
  ojson j;
  j["o"] = q.d == 2 ? ojson::array({q.o[0], q.o[1]}) : ojson::array({q.o[0]});
  j["s"] = q.s;
  return j;
}

FamilyChoice parse_family(const std::string& s) {
  if (s == "auto") return FamilyChoice::Auto;
  if (s == "dyadic") return FamilyChoice::DyadicOnly;
  if (s == "full") return FamilyChoice::FullOnly;
  if (s == "both") return FamilyChoice::Both;
  throw std::invalid_argument("config: family must be auto|dyadic|full|both");
}

}  // namespace

RunResult run_experiments(const std::string& config_path, const std::string& out_dir,
                          std::optional<std::uint64_t> seed_override,
                          std::optional<FamilyChoice> family_override, bool progress) {
  RunResult res;

  // phase 1: config, corpus construction, output dir (failures -> exit 2)
  ojson cfg;
  std::vector<GridSpec> grids;
  std::vector<WeightCfg> weight_cfgs;
  std::vector<FunctionalCfg> functional_cfgs;
  std::vector<std::string> suites;
  std::vector<double> p_list, q_list, ap_p_list;
  std::uint64_t seed = 0;
  FamilyChoice family = FamilyChoice::Auto;
  int beta_trials = 300;
  struct GridWeights {
    GridSpec g;
    std::vector<std::shared_ptr<GridFunction>> w;
  };
  std::vector<GridWeights> corpus;
  try {
    std::ifstream in(config_path);
    if (!in) throw std::runtime_error("cannot open config " + config_path);
    cfg = ojson::parse(in);  // parse errors carry byte positions
    seed = seed_override.value_or(cfg.value("seed", std::uint64_t{0}));
    family = family_override ? *family_override : parse_family(cfg.value("family", "auto"));
    beta_trials = cfg.value("beta_trials", 300);
    for (const auto& j : cfg.at("suites")) suites.push_back(j.get<std::string>());
    for (const auto& j : cfg.at("grids"))
      grids.push_back(make_spec(j.at("d").get<int>(), j.at("depth").get<int>()));
    for (const auto& j : cfg.at("corpus")) weight_cfgs.push_back(parse_weight(j));
    for (const auto& j : cfg.at("functionals")) functional_cfgs.push_back(parse_functional(j));
    p_list = cfg.value("p_list", std::vector<double>{1, 2, 3, 4, 5, 6, 7, 8});
    q_list = cfg.value("q_list", std::vector<double>{2, 4, 8});
    ap_p_list = cfg.value("ap_p_list", std::vector<double>{2, 3});
    for (const auto& s : suites)
      if (s != "characterization" && s != "genasym" && s != "bloom")
        throw std::invalid_argument("config: unknown suite '" + s + "'");
    for (const auto& g : grids) {
      GridWeights gw{g, {}};
      for (const auto& wc : weight_cfgs) gw.w.push_back(build_weight(wc, g, seed));
      corpus.push_back(std::move(gw));
    }
    std::filesystem::create_directories(out_dir);
  } catch (const std::exception& e) {
    res.exit_code = 2;
    res.failures.emplace_back(std::string("config: ") + e.what());
    return res;
  }

  // phase 2: suites (exceptions and assertion failures -> exit 1)
  auto t0 = std::chrono::steady_clock::now();
  ojson char_reports = ojson::array();
  ojson genasym_reports = ojson::array();
  ojson bloom_reports = ojson::array();
  std::vector<std::string> csv;
  auto row = [&](const std::string& suite, const GridSpec& g, const std::string& weight,
                 const std::string& detail, const std::string& constant, double value) {
    csv.push_back(suite + "," + grid_label(g) + "," + weight + "," + detail + "," + constant +
                  "," + fmt17(value));
  };
  auto fail = [&](const std::string& msg) {
    ++res.hard_failures;
    res.failures.push_back(msg);
  };
  bool want_char = std::count(suites.begin(), suites.end(), "characterization") > 0;
  bool want_genasym = std::count(suites.begin(), suites.end(), "genasym") > 0;
  bool want_bloom = std::count(suites.begin(), suites.end(), "bloom") > 0;

  // The normalized oscillation constants converge to their continuum values
  // from below, so each refinement legitimately grows them (observed factors
  // reach ~1.8 on coarse grids). What must hold instead is the theorem shape:
  // a ceiling independent of the resolution. The empirical constants sit well
  // under 1; the ceiling is generous but still catches a divergent
  // normalization or a NaN immediately.
  constexpr double kGenAsymCeiling = 8.0;

  for (const auto& gw : corpus) {
    const GridSpec& g = gw.g;
    double tau = std::ldexp(1.0, g.d + 1);
    TestBattery battery;
    if (want_char) battery = standard_battery(g, seed);

    for (std::size_t wi = 0; wi < gw.w.size(); ++wi) {
      const std::string& wname = weight_cfgs[wi].name;
      std::shared_ptr<const GridFunction> w = gw.w[wi];
      std::string ctx = grid_label(g) + "/" + wname;
      auto tw0 = std::chrono::steady_clock::now();

      double fw_dyadic = 0.0;
      try {
        fw_dyadic = fujii_wilson(w, FamilyChoice::DyadicOnly).dyadic.value;
      } catch (const std::exception& e) {
        fail(ctx + ": fujii_wilson: " + e.what());
        continue;
      }

      if (want_char) {
        try {
          std::vector<FunctionalY> ys;
          std::vector<std::string> labels;
          for (const auto& fc : functional_cfgs) {
            ys.push_back(make_functional(fc, w));
            labels.push_back(fc.label);
          }
          auto reps = verify_characterization(w, ys, battery, family);
          for (std::size_t yi = 0; yi < reps.size(); ++yi) {
            auto& r = reps[yi];
            r.weight_name = wname;
            if (!r.uv_ok)
              fail(ctx + "/" + labels[yi] + ": eq-uv violated, worst ratio " +
                   fmt17(r.uv_worst) + " at " + r.uv_worst_cube.str());
            ojson j;
            j["grid"] = grid_label(g);
            j["weight"] = wname;
            j["functional"] = labels[yi];
            j["full_family"] = r.full_family;
            j["ainfty"] = r.ainfty;
            j["s_value"] = r.s_value;
            j["s_witness"] = r.s_witness;
            j["witness_ratio"] = r.witness_ratio;
            j["witness_bmo"] = r.witness_bmo;
            j["band"] = r.band;
            j["uv_ok"] = r.uv_ok;
            j["uv_worst"] = r.uv_worst;
            j["uv_worst_cube"] = cube_json(r.uv_worst_cube);
            j["uv_cubes"] = r.uv_cubes;
            char_reports.push_back(std::move(j));
            row("characterization", g, wname, labels[yi], "ainfty", r.ainfty);
            row("characterization", g, wname, labels[yi], "s_value", r.s_value);
            row("characterization", g, wname, labels[yi], "band", r.band);
            row("characterization", g, wname, labels[yi], "witness_bmo", r.witness_bmo);
            row("characterization", g, wname, labels[yi], "witness_ratio", r.witness_ratio);
            row("characterization", g, wname, labels[yi], "uv_worst", r.uv_worst);
          }
        } catch (const std::exception& e) {
          fail(ctx + ": characterization: " + e.what());
        }
      }

      if (want_genasym) {
        std::vector<std::pair<std::string, GridFunction>> fs;
        fs.emplace_back("logf", clipped_log(g, {0.0, 0.0}));
        fs.emplace_back("martf", martingale_function(g, 0.5, seed + 77));
        for (const auto& fc : functional_cfgs) {
          std::string label = fc.label;
          double q;
          FunctionalY y = FunctionalY::lebesgue(g);
          if (fc.kind == "mass" || fc.kind == "mass2") {
            q = fc.q.value_or(1.0 + tau * fw_dyadic);
            y = make_functional(fc, w);
          } else if (fc.kind == "cp") {
            q = fc.q.value_or(fc.p / (fc.p - 1.0));
            y = make_functional(fc, w);
          } else if (fc.kind == "rscale") {
            double r = rh_exponent(fw_dyadic, tau);
            q = fc.q.value_or(r / (r - 1.0));
            y = FunctionalY::rscale(w, r);
            label = "rscale_rh";
          } else {  // lebesgue
            q = fc.q.value_or(1.0);
          }
          for (const auto& [fname, f] : fs) {
            std::string fctx = ctx + "/" + fname + "/" + label;
            try {
              GenAsymReport r = verify_genasym(f, w, y, q, p_list, seed + 101, beta_trials);
              r.f_name = fname;
              r.w_name = wname;
              r.y_name = label;
              if (r.beta_analytic && r.beta_check > 1.0 + 1e-9)
                fail(fctx + ": Hoelder smallness exceeded 1: " + fmt17(r.beta_check));
              ojson j;
              j["grid"] = grid_label(g);
              j["weight"] = wname;
              j["f"] = fname;
              j["functional"] = label;
              j["hypothesis_ok"] = r.hypothesis_ok;
              j["hypothesis_violations"] = r.hypothesis_violations;
              if (r.hypothesis_ok) {
                j["q"] = r.q;
                j["beta_hat"] = r.beta_hat;
                j["beta_analytic"] = r.beta_analytic;
                j["beta_check"] = r.beta_check;
                j["f_bmo"] = r.f_bmo;
                j["fw_dyadic"] = r.fw;
                j["p_values"] = r.p_values;
                j["posc_sup"] = r.posc_sup;
                j["mass_posc_sup"] = r.mass_posc_sup;
                j["c_emp"] = r.c_emp;
                j["c_emp_max"] = r.c_emp_max;
                j["c_growth"] = r.c_growth;
                j["growth_alpha1"] = r.growth_alpha1;
                j["chained"] = r.chained;
                if (r.chained) {
                  j["exp_lux_sup"] = r.exp_lux_sup;
                  j["c_exp"] = r.c_exp;
                }
                j["sparse_c_meas"] = r.sparse_c_meas;
                j["sparse_eta"] = r.sparse_eta;
                j["carleson_lhs"] = r.carleson_lhs;
                j["carleson_kappa"] = r.carleson_kappa;
                j["carleson_ratio"] = r.carleson_ratio;
                j["route_factor"] = r.route_factor;
                row("genasym", g, wname, fname + "|" + label, "c_emp_max", r.c_emp_max);
                row("genasym", g, wname, fname + "|" + label, "c_growth", r.c_growth);
                row("genasym", g, wname, fname + "|" + label, "growth_alpha1", r.growth_alpha1);
                row("genasym", g, wname, fname + "|" + label, "beta_hat", r.beta_hat);
                row("genasym", g, wname, fname + "|" + label, "route_factor", r.route_factor);
                row("genasym", g, wname, fname + "|" + label, "carleson_ratio", r.carleson_ratio);
                if (r.chained) {
                  row("genasym", g, wname, fname + "|" + label, "c_exp", r.c_exp);
                  row("genasym", g, wname, fname + "|" + label, "exp_lux_sup", r.exp_lux_sup);
                }
                if (!(r.c_emp_max <= kGenAsymCeiling))
                  fail(fctx + ": empirical constant " + fmt17(r.c_emp_max) +
                       " escaped the resolution-independent ceiling " + fmt_short(kGenAsymCeiling));
              }
              genasym_reports.push_back(std::move(j));
            } catch (const std::exception& e) {
              fail(fctx + ": " + e.what());
            }
          }
        }
      }

      if (want_bloom) {
        std::vector<std::pair<std::string, GridFunction>> bs;
        bs.emplace_back("logb", clipped_log(g, {0.0, 0.0}));
        bs.emplace_back("bw", *w);
        for (const auto& [bname, bfn] : bs) {
          std::string bctx = ctx + "/" + bname;
          try {
            BloomReport r = verify_bloom(bfn, w, q_list, ap_p_list, family);
            r.b_name = bname;
            r.w_name = wname;
            ojson j;
            j["grid"] = grid_label(g);
            j["weight"] = wname;
            j["b"] = bname;
            j["bloom_norm"] = r.bloom_norm;
            j["fw"] = r.fw;
            j["a1_finite"] = r.a1_finite;
            j["a1"] = r.a1;
            j["part1_skipped"] = r.part1_skipped;
            j["q_values"] = r.q_values;
            j["raw_lhs_q"] = r.raw_lhs_q;
            j["part1_c"] = r.part1_c;
            j["genjn_c"] = r.genjn_c;
            j["part2_skipped"] = r.part2_skipped;
            j["p_values"] = r.p_values;
            j["ap_values"] = r.ap_values;
            j["raw_lhs_p"] = r.raw_lhs_p;
            j["part2_c"] = r.part2_c;
            bloom_reports.push_back(std::move(j));
            row("bloom", g, wname, bname, "bloom_norm", r.bloom_norm);
            if (r.a1_finite) {
              row("bloom", g, wname, bname, "a1", r.a1);
              for (std::size_t i = 0; i < r.q_values.size(); ++i) {
                std::string suffix = "_q" + fmt_short(r.q_values[i]);
                row("bloom", g, wname, bname, "raw_lhs" + suffix, r.raw_lhs_q[i]);
                row("bloom", g, wname, bname, "part1_c" + suffix, r.part1_c[i]);
              }
              row("bloom", g, wname, bname, "genjn_c", r.genjn_c);
            }
            if (!r.part2_skipped) {
              for (std::size_t i = 0; i < r.p_values.size(); ++i) {
                std::string suffix = "_p" + fmt_short(r.p_values[i]);
                row("bloom", g, wname, bname, "ap" + suffix, r.ap_values[i]);
                row("bloom", g, wname, bname, "raw_lhs" + suffix, r.raw_lhs_p[i]);
                row("bloom", g, wname, bname, "part2_c" + suffix, r.part2_c[i]);
              }
            }
          } catch (const std::exception& e) {
            fail(bctx + ": bloom: " + e.what());
          }
        }
      }

      if (progress) {
        auto ms = std::chrono::duration_cast<std::chrono::milliseconds>(
                      std::chrono::steady_clock::now() - tw0)
                      .count();
        std::fprintf(stderr, "[run] %s done in %lld ms\n", ctx.c_str(),
                     static_cast<long long>(ms));
      }
    }
  }

  auto wall_ms = std::chrono::duration_cast<std::chrono::milliseconds>(
                     std::chrono::steady_clock::now() - t0)
                     .count();

  // phase 3: reports (IO failures -> exit 2)
  try {
    ojson meta;
    meta["config"] = cfg;
    meta["seed"] = seed;
    meta["wall_ms"] = wall_ms;
    meta["hard_failures"] = res.hard_failures;
    meta["failures"] = res.failures;
    auto dump = [&](const std::string& name, const ojson& body) {
      ojson file;
      file["meta"] = meta;
      file["reports"] = body;
      std::ofstream out(std::filesystem::path(out_dir) / name);
      if (!out) throw std::runtime_error("cannot write " + name);
      out << file.dump(2) << "\n";
    };
    if (want_char) dump("characterization.json", char_reports);
    if (want_genasym) dump("genasym.json", genasym_reports);
    if (want_bloom) dump("bloom.json", bloom_reports);
    std::ofstream out(std::filesystem::path(out_dir) / "summary.csv");
    if (!out) throw std::runtime_error("cannot write summary.csv");
    out << "suite,grid,weight,detail,constant,value\n";
    for (const auto& line : csv) out << line << "\n";
  } catch (const std::exception& e) {
    res.exit_code = 2;
    res.failures.emplace_back(std::string("report IO: ") + e.what());
    return res;
  }

  if (res.hard_failures > 0) res.exit_code = 1;
  return res;
}

}  // namespace dw
