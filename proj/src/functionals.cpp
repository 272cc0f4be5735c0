#include "dw/functionals.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <sstream>

#include "dw/maximal.hpp"

namespace dw {

FunctionalY::FunctionalY(YKind k, GridSpec g, std::shared_ptr<const GridFunction> w, double param)
    : kind_(k), spec_(g), w_(std::move(w)), param_(param) {
  if (w_) {
    if (!w_->nonneg()) throw std::invalid_argument("functional weight must be nonnegative");
    if (!(w_->total() > 0.0)) throw std::invalid_argument("functional weight must have positive mass");
  }
  if (kind_ == YKind::RScale) {
    double r = param_;
    wr_ = std::make_shared<const GridFunction>(w_->map([r](double v) { return std::pow(v, r); }));
  }
}

FunctionalY FunctionalY::lebesgue(const GridSpec& g) { return FunctionalY(YKind::Lebesgue, g, nullptr, 0.0); }

FunctionalY FunctionalY::mass(std::shared_ptr<const GridFunction> w) {
  GridSpec g = w->spec();
  return FunctionalY(YKind::Mass, g, std::move(w), 0.0);
}

FunctionalY FunctionalY::doubled_mass(std::shared_ptr<const GridFunction> w) {
  GridSpec g = w->spec();
  return FunctionalY(YKind::DoubledMass, g, std::move(w), 0.0);
}

FunctionalY FunctionalY::cp_integral(std::shared_ptr<const GridFunction> w, double p) {
  if (!(p > 1.0)) throw std::invalid_argument("cp_integral requires p > 1");
  GridSpec g = w->spec();
  return FunctionalY(YKind::CpIntegral, g, std::move(w), p);
}

FunctionalY FunctionalY::rscale(std::shared_ptr<const GridFunction> w, double r) {
  if (!(r > 1.0)) throw std::invalid_argument("rscale requires r > 1");
  GridSpec g = w->spec();
  return FunctionalY(YKind::RScale, g, std::move(w), r);
}

std::string FunctionalY::name() const {
  std::ostringstream os;
  switch (kind_) {
    case YKind::Lebesgue: return "lebesgue";
    case YKind::Mass: return "mass";
    case YKind::DoubledMass: return "mass2";
    case YKind::CpIntegral: os << "cp(p=" << param_ << ")"; return os.str();
    case YKind::RScale: os << "rscale(r=" << param_ << ")"; return os.str();
  }
  return "?";
}

std::optional<double> FunctionalY::analytic_q() const {
  if (kind_ == YKind::Lebesgue) return 1.0;
  if (kind_ == YKind::RScale) return param_ / (param_ - 1.0);
  return std::nullopt;
}

double FunctionalY::operator()(const Cube& q) const {
  if (q.d != spec_.d) throw std::invalid_argument("cube dimension does not match functional");
  switch (kind_) {
    case YKind::Lebesgue:
      return q.volume(spec_);
    case YKind::Mass:
      return integrate(*w_, q);
    case YKind::DoubledMass:
      return integrate(*w_, doubled(q));
    case YKind::RScale: {
      double rv = 1.0 / param_;
      // direct summation: w^r spans enough orders of magnitude on rough
      // weights that prefix differences cancel to zero on small cubes
      double mean_pow = integrate_direct(*wr_, q) / q.volume(spec_);
      return q.volume(spec_) * std::pow(mean_pow, rv);
    }
    case YKind::CpIntegral: {
      std::int64_t n = spec_.cells_per_axis();
      double acc = 0.0;
      if (spec_.d == 1) {
        for (std::int64_t c = 0; c < n; ++c) {
          double m = indicator_maximal(spec_, q, cell_midpoint(spec_, c));
          acc += std::pow(m, param_) * (*w_)[c];
        }
      } else {
        for (std::int64_t x = 0; x < n; ++x)
          for (std::int64_t y = 0; y < n; ++y) {
            double m = indicator_maximal(spec_, q, cell_midpoint(spec_, x, y));
            acc += std::pow(m, param_) * w_->at(x, y);
          }
      }
      return acc * spec_.cell_volume();
    }
  }
  return 0.0;
}

std::int64_t SmallFamily::covered_cells() const {
  std::int64_t total = 0;
  for (const Cube& q : cubes) total += q.cell_count();
  return total;
}

double SmallFamily::effective_L() const {
  std::int64_t covered = covered_cells();
  if (covered == 0) return std::numeric_limits<double>::infinity();
  return static_cast<double>(root.cell_count()) / static_cast<double>(covered);
}

void SmallFamily::validate(const GridSpec& g) const {
  if (!root.inside_domain(g)) throw FamilyError("family root outside the domain", root);
  for (std::size_t i = 0; i < cubes.size(); ++i) {
    if (!root.contains(cubes[i])) throw FamilyError("family cube escapes the root", cubes[i]);
    for (std::size_t j = i + 1; j < cubes.size(); ++j)
      if (cubes[i].intersects(cubes[j])) throw FamilyError("family cubes overlap", cubes[j]);
  }
  if (effective_L() < nominal_L - 1e-12)
    throw FamilyError("family is not as small as its nominal L claims", root);
}

double check_Yq_smallness(const FunctionalY& y, double q, const SmallFamily& family) {
  if (!(q > 0.0)) throw std::invalid_argument("smallness exponent q must be positive");
  double sum = 0.0;
  for (const Cube& c : family.cubes) sum += y(c);
  if (sum == 0.0) return 0.0;
  double yq = y(family.root);
  if (yq == 0.0) return std::numeric_limits<double>::infinity();
  return sum * std::pow(family.effective_L(), 1.0 / q) / yq;
}

double estimate_beta(const FunctionalY& y, double q, const FamilySampler& sampler, int trials,
                     std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  double beta = 0.0;
  for (int t = 0; t < trials; ++t) {
    SmallFamily fam = sampler(rng);
    if (fam.cubes.empty()) continue;
    double rho = check_Yq_smallness(y, q, fam);
    if (std::isfinite(rho)) beta = std::max(beta, rho);
  }
  return beta;
}

CarlesonSum carleson_sum(const FunctionalY& y, double q, double beta_hat,
                         const std::vector<Cube>& family, double L) {
  if (family.empty()) throw std::invalid_argument("carleson family is empty");
  if (!(L > 1.0)) throw std::invalid_argument("carleson parameter L must exceed 1");
  // the root is the unique maximal member
  std::size_t root_idx = 0;
  for (std::size_t i = 1; i < family.size(); ++i)
    if (family[i].cell_count() > family[root_idx].cell_count()) root_idx = i;
  const Cube root = family[root_idx];
  for (const Cube& c : family)
    if (!root.contains(c)) throw FamilyError("carleson family member escapes the root", c);

  // parent links: smallest strictly-containing member
  std::vector<std::size_t> order(family.size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    return family[a].cell_count() > family[b].cell_count();
  });
  std::vector<int> parent(family.size(), -1);
  std::vector<int> depth(family.size(), 0);
  for (std::size_t oi = 0; oi < order.size(); ++oi) {
    std::size_t i = order[oi];
    if (i == root_idx) continue;
    long best = -1;
    for (std::size_t oj = 0; oj < oi; ++oj) {
      std::size_t j = order[oj];
      if (family[j].cell_count() > family[i].cell_count() && family[j].contains(family[i]))
        if (best < 0 || family[j].cell_count() < family[static_cast<std::size_t>(best)].cell_count())
          best = static_cast<long>(j);
    }
    if (best < 0) throw FamilyError("carleson family member has no ancestor chain to the root", family[i]);
    parent[i] = static_cast<int>(best);
    depth[i] = depth[static_cast<std::size_t>(best)] + 1;
  }

  std::vector<std::int64_t> child_cells(family.size(), 0);
  for (std::size_t i = 0; i < family.size(); ++i)
    if (parent[i] >= 0) child_cells[static_cast<std::size_t>(parent[i])] += family[i].cell_count();
  int max_depth = 0;
  double lhs = 0.0;
  for (std::size_t i = 0; i < family.size(); ++i) {
    double allowed = static_cast<double>(family[i].cell_count()) / L;
    if (static_cast<double>(child_cells[i]) > allowed + 1e-9)
      throw FamilyError("carleson layering violated: children exceed the 1/L share", family[i]);
    lhs += y(family[i]);
    max_depth = std::max(max_depth, depth[i]);
  }
  double kappa = beta_hat / (1.0 - std::pow(L, -1.0 / q));
  return CarlesonSum{lhs, kappa, root, max_depth + 1};
}

}  // namespace dw
