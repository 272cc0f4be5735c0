#include "dw/constants.hpp"

#include <cmath>
#include <cstdint>
#include <limits>
#include <sstream>
#include <stdexcept>
#include <utility>
#include <vector>

#include "dw/maximal.hpp"
#include "engine_detail.hpp"

namespace dw {

bool full_family_feasible(const GridSpec& g) {
  return (g.d == 1 && g.depth <= 10) || (g.d == 2 && g.depth <= 6);
}

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

bool full_in_auto_range(const GridSpec& g) { return full_family_feasible(g); }

std::pair<bool, bool> family_plan(FamilyChoice c, const GridSpec& g) {
  switch (c) {
    case FamilyChoice::DyadicOnly: return {true, false};
    case FamilyChoice::FullOnly: return {false, true};
    case FamilyChoice::Both: return {true, true};
    case FamilyChoice::Auto: return {true, full_in_auto_range(g)};
  }
  return {true, false};
}

/// Running maximum of num/den with the enumeration-order tie-break (smaller
/// key wins on exact ties). Zero-over-zero cubes are skipped; a positive
/// numerator over a zero denominator is an honest +inf.
struct RatioSup {
  double value = 0.0;
  bool seen = false;
  std::uint64_t key = 0;
  Cube arg{};

  void offer(double num, double den, std::uint64_t k, const Cube& q) {
    double r;
    if (den > 0.0) {
      r = num / den;
    } else if (num > 0.0) {
      r = kInf;
    } else {
      return;
    }
    if (!seen || r > value || (r == value && k < key)) {
      value = r;
      key = k;
      arg = q;
      seen = true;
    }
  }

  FamilyValue done() const {
    FamilyValue f;
    f.computed = true;
    f.value = seen ? value : 0.0;
    f.argmax = arg;
    return f;
  }
};

// ---- fast C_p denominators ------------------------------------------------
//
// The cell-midpoint values of M(chi_Q)^p depend only on the side m and the
// per-axis cell gaps, so the powers are tabulated once per side (d=1) or once
// per grid (d=2) and each denominator becomes a weighted table sum.

std::vector<double> cp_row_d1(double p, std::int64_t m, std::int64_t n) {
  std::vector<double> row(static_cast<std::size_t>(n), 0.0);
  for (std::int64_t k = 0; k < n; ++k)
    row[static_cast<std::size_t>(k)] =
        std::pow(static_cast<double>(m) / (static_cast<double>(m) + static_cast<double>(k) + 0.5), p);
  return row;
}

double cp_den_d1(const GridFunction& w, const std::vector<double>& pre, std::int64_t a, std::int64_t b,
                 const std::vector<double>& row, double h) {
  std::int64_t n = w.spec().cells_per_axis();
  double acc = pre[static_cast<std::size_t>(b)] - pre[static_cast<std::size_t>(a)];
  for (std::int64_t c = 0; c < a; ++c) acc += w[c] * row[static_cast<std::size_t>(a - c - 1)];
  for (std::int64_t c = b; c < n; ++c) acc += w[c] * row[static_cast<std::size_t>(c - b)];
  return acc * h;
}


// ---- ainfty engines --------------------------------------------------------

// The numerator ∫_Q M(v chi_Q) is shared by every functional, so the engines
// take all the functionals of one call together and price the localized
// maximal sums once per cube.

std::vector<FamilyValue> ainfty_d1_dyadic(const GridFunction& v, const std::vector<FunctionalY>& ys) {
  const GridSpec& g = v.spec();
  double h = g.cell_width();
  std::vector<double> pre = detail::cell_prefix_d1(v);
  std::vector<double> scratch;
  struct CpState {
    std::vector<double> wpre;
    std::vector<std::vector<double>> rows;  // per level
  };
  std::vector<CpState> cp(ys.size());
  for (std::size_t i = 0; i < ys.size(); ++i) {
    if (ys[i].kind() != YKind::CpIntegral) continue;
    cp[i].wpre = detail::cell_prefix_d1(*ys[i].weight());
    cp[i].rows.resize(static_cast<std::size_t>(g.depth + 1));
    for (int j = 0; j <= g.depth; ++j)
      cp[i].rows[static_cast<std::size_t>(j)] =
          cp_row_d1(ys[i].param(), g.cells_per_axis() >> j, g.cells_per_axis());
  }
  std::vector<RatioSup> sup(ys.size());
  std::uint64_t k = 0;
  int level = 0;
  std::int64_t side = g.cells_per_axis();
  for_each_cube(g, CubeFamily::Dyadic, [&](const Cube& q) {
    if (q.s != side) {
      side = q.s;
      ++level;
    }
    double num = detail::local_maximal_sum_d1(pre, q.o[0], q.o[0] + q.s, scratch) * h;
    for (std::size_t i = 0; i < ys.size(); ++i) {
      double den = ys[i].kind() == YKind::CpIntegral
                       ? cp_den_d1(*ys[i].weight(), cp[i].wpre, q.o[0], q.o[0] + q.s,
                                   cp[i].rows[static_cast<std::size_t>(level)], h)
                       : ys[i](q);
      sup[i].offer(num, den, k, q);
    }
    ++k;
  });
  std::vector<FamilyValue> out;
  out.reserve(sup.size());
  for (const auto& s : sup) out.push_back(s.done());
  return out;
}

std::vector<FamilyValue> ainfty_d1_full(const GridFunction& v, const std::vector<FunctionalY>& ys) {
  const GridSpec& g = v.spec();
  std::int64_t n = g.cells_per_axis();
  double h = g.cell_width();
  std::vector<double> pre = detail::cell_prefix_d1(v);
  std::vector<detail::Triangular> yt;
  yt.reserve(ys.size());
  for (const auto& y : ys) yt.push_back(detail::y_table_d1(y));
  std::vector<RatioSup> sup(ys.size());
  std::vector<double> scratch;
  for (std::int64_t a = 0; a < n; ++a) {
    detail::local_sweep_d1(pre, a, n, scratch, [&](std::int64_t b, double s) {
      std::uint64_t key = static_cast<std::uint64_t>(n - (b - a)) * static_cast<std::uint64_t>(n + 1) +
                          static_cast<std::uint64_t>(a);
      for (std::size_t i = 0; i < ys.size(); ++i)
        sup[i].offer(s * h, yt[i].at(a, b), key, Cube{1, {a, 0}, b - a});
    });
  }
  std::vector<FamilyValue> out;
  out.reserve(sup.size());
  for (const auto& s : sup) out.push_back(s.done());
  return out;
}

std::vector<FamilyValue> ainfty_d2(const GridFunction& v, const std::vector<FunctionalY>& ys,
                                   CubeFamily fam) {
  const GridSpec& g = v.spec();
  double vol = g.cell_volume();
  std::vector<detail::CpSliceD2> cpt(ys.size());
  for (std::size_t i = 0; i < ys.size(); ++i) {
    if (ys[i].kind() != YKind::CpIntegral) continue;
    cpt[i].n = g.cells_per_axis();
    cpt[i].p = ys[i].param();
  }
  std::vector<RatioSup> sup(ys.size());
  std::uint64_t k = 0;
  for_each_cube(g, fam, [&](const Cube& q) {
    double num = detail::local_maximal_sum_d2(v, q) * vol;
    for (std::size_t i = 0; i < ys.size(); ++i) {
      double den = ys[i].kind() == YKind::CpIntegral
                       ? detail::cp_den_d2(*ys[i].weight(), q, cpt[i], vol)
                       : ys[i](q);
      sup[i].offer(num, den, k, q);
    }
    ++k;
  });
  std::vector<FamilyValue> out;
  out.reserve(sup.size());
  for (const auto& s : sup) out.push_back(s.done());
  return out;
}

std::vector<ConstantReport> ainfty_multi(std::shared_ptr<const GridFunction> v,
                                         const std::vector<FunctionalY>& ys, FamilyChoice choice) {
  if (!v) throw std::invalid_argument("ainfty: null weight");
  if (ys.empty()) throw std::invalid_argument("ainfty: no functionals");
  for (const auto& y : ys)
    if (!(v->spec() == y.spec()))
      throw std::invalid_argument("ainfty: weight and functional grids differ");
  if (!v->nonneg()) throw std::invalid_argument("ainfty: weight must be nonnegative");
  if (!(v->total() > 0.0)) throw std::invalid_argument("ainfty: weight must carry positive mass");
  std::vector<ConstantReport> reps(ys.size());
  for (std::size_t i = 0; i < ys.size(); ++i) {
    reps[i].name = "ainfty[" + ys[i].name() + "]";
    reps[i].grid = v->spec();
  }
  auto [do_dyadic, do_full] = family_plan(choice, v->spec());
  auto apply = [&](std::vector<FamilyValue> vals, bool full) {
    for (std::size_t i = 0; i < ys.size(); ++i)
      (full ? reps[i].full : reps[i].dyadic) = vals[i];
  };
  if (v->spec().d == 1) {
    if (do_dyadic) apply(ainfty_d1_dyadic(*v, ys), false);
    if (do_full) apply(ainfty_d1_full(*v, ys), true);
  } else {
    if (do_dyadic) apply(ainfty_d2(*v, ys, CubeFamily::Dyadic), false);
    if (do_full) apply(ainfty_d2(*v, ys, CubeFamily::Full), true);
  }
  return reps;
}

ConstantReport ainfty_impl(std::shared_ptr<const GridFunction> v, const FunctionalY& y,
                           FamilyChoice choice, std::string name) {
  std::vector<ConstantReport> reps = ainfty_multi(std::move(v), {y}, choice);
  reps[0].name = std::move(name);
  return reps[0];
}

std::string with_param(const char* stem, const char* var, double value) {
  std::ostringstream os;
  os << stem << "(" << var << "=" << value << ")";
  return os.str();
}

}  // namespace

ConstantReport ainfty_Y(std::shared_ptr<const GridFunction> v, const FunctionalY& y,
                        FamilyChoice choice) {
  return ainfty_impl(std::move(v), y, choice, "ainfty[" + y.name() + "]");
}

std::vector<ConstantReport> ainfty_Y(std::shared_ptr<const GridFunction> v,
                                     const std::vector<FunctionalY>& ys, FamilyChoice choice) {
  return ainfty_multi(std::move(v), ys, choice);
}

ConstantReport fujii_wilson(std::shared_ptr<const GridFunction> w, FamilyChoice choice) {
  FunctionalY y = FunctionalY::mass(w);
  return ainfty_impl(std::move(w), y, choice, "fujii_wilson");
}

ConstantReport weak_ainfty(std::shared_ptr<const GridFunction> w, FamilyChoice choice) {
  FunctionalY y = FunctionalY::doubled_mass(w);
  return ainfty_impl(std::move(w), y, choice, "weak_ainfty");
}

ConstantReport cp_constant(std::shared_ptr<const GridFunction> w, double p, FamilyChoice choice) {
  FunctionalY y = FunctionalY::cp_integral(w, p);
  return ainfty_impl(std::move(w), y, choice, with_param("cp_constant", "p", p));
}

A1Report a1_constant(const GridFunction& w) {
  if (!w.nonneg()) throw std::invalid_argument("a1: weight must be nonnegative");
  if (!(w.total() > 0.0)) throw std::invalid_argument("a1: weight must carry positive mass");
  A1Report rep;
  GridFunction mw = grid_maximal(w, unit_cube(w.spec()));
  for (std::int64_t i = 0; i < w.size(); ++i) {
    if (w[i] == 0.0) {
      rep.infinite = true;
      rep.value = kInf;
      rep.arg_cell = i;
      return rep;
    }
    double r = mw[i] / w[i];
    if (r > rep.value) {
      rep.value = r;
      rep.arg_cell = i;
    }
  }
  return rep;
}

ApResult ap_constant(std::shared_ptr<const GridFunction> w, double p, FamilyChoice choice) {
  if (!w) throw std::invalid_argument("ap: null weight");
  if (!(p > 1.0)) throw std::invalid_argument("ap requires p > 1");
  if (!w->nonneg()) throw std::invalid_argument("ap: weight must be nonnegative");
  if (!(w->total() > 0.0)) throw std::invalid_argument("ap: weight must carry positive mass");
  const GridSpec& g = w->spec();
  ApResult out;
  out.report.name = with_param("ap", "p", p);
  out.report.grid = g;
  auto [do_dyadic, do_full] = family_plan(choice, g);

  for (std::int64_t i = 0; i < w->size(); ++i) {
    if ((*w)[i] == 0.0) {
      out.infinite = true;
      FamilyValue inf_val;
      inf_val.computed = true;
      inf_val.value = kInf;
      inf_val.argmax = g.d == 1 ? cell_cube(g, i) : cell_cube(g, i / g.cells_per_axis(), i % g.cells_per_axis());
      if (do_dyadic) out.report.dyadic = inf_val;
      if (do_full) out.report.full = inf_val;
      return out;
    }
  }

  double sigma_exp = -1.0 / (p - 1.0);  // 1 - p' for the dual weight
  GridFunction sigma = w->map([sigma_exp](double v) { return std::pow(v, sigma_exp); });
  auto eval = [&](CubeFamily fam) {
    RatioSup sup;
    std::uint64_t k = 0;
    for_each_cube(g, fam, [&](const Cube& q) {
      double val = average(*w, q) * std::pow(average(sigma, q), p - 1.0);
      sup.offer(val, 1.0, k++, q);
    });
    return sup.done();
  };
  if (do_dyadic) out.report.dyadic = eval(CubeFamily::Dyadic);
  if (do_full) out.report.full = eval(CubeFamily::Full);
  out.sigma = std::move(sigma);
  return out;
}

double rh_exponent(double fujii_wilson_value, double tau) {
  if (!(fujii_wilson_value >= 1.0)) throw std::invalid_argument("rh_exponent requires a value >= 1");
  if (!(tau > 0.0)) throw std::invalid_argument("rh_exponent requires tau > 0");
  return 1.0 + 1.0 / (tau * fujii_wilson_value);
}

RHCheck rh_check(const GridFunction& w, double r, double c, CubeFamily family, bool weak) {
  if (!(r > 1.0)) throw std::invalid_argument("rh_check requires r > 1");
  if (!(c > 0.0)) throw std::invalid_argument("rh_check requires c > 0");
  if (!w.nonneg()) throw std::invalid_argument("rh_check: weight must be nonnegative");
  GridFunction wr = w.map([r](double v) { return std::pow(v, r); });
  RHCheck out;
  for_each_cube(w.spec(), family, [&](const Cube& q) {
    ++out.cubes_checked;
    // The weak display compares against the doubled-cube mass per unit of
    // |Q|: normalizing by |2Q| instead would already fail for indicator
    // weights in d = 2 (left side 1, right side 2^{1-d}).
    double rhs = weak ? integrate(w, doubled(q)) / q.volume(w.spec()) : average(w, q);
    if (rhs <= 0.0) return;  // then w == 0 on Q and the inequality is 0 <= 0
    // w^r needs direct summation: its range outruns the prefix tables
    double lhs = std::pow(integrate_direct(wr, q) / q.volume(w.spec()), 1.0 / r);
    double ratio = lhs / (c * rhs);
    if (ratio > out.worst_ratio) {
      out.worst_ratio = ratio;
      out.worst = q;
    }
  });
  // tolerate pure roundoff on a tight inequality
  out.holds = out.worst_ratio <= 1.0 + 1e-12;
  return out;
}

}  // namespace dw
