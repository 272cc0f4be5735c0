#include "dw/bmo.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>
#include <stdexcept>

namespace dw {

namespace {

double cube_numerator(const GridFunction& f, const GridFunction& v, const Cube& q) {
  const GridSpec& g = f.spec();
  double f_q = average(f, q);
  double acc = 0.0;
  std::int64_t n = g.cells_per_axis();
  if (g.d == 1) {
    for (std::int64_t i = q.o[0]; i < q.o[0] + q.s; ++i) acc += std::fabs(f[i] - f_q) * v[i];
  } else {
    for (std::int64_t i = q.o[0]; i < q.o[0] + q.s; ++i)
      for (std::int64_t j = q.o[1]; j < q.o[1] + q.s; ++j) {
        std::size_t idx = static_cast<std::size_t>(i * n + j);
        acc += std::fabs(f[static_cast<std::int64_t>(idx)] - f_q) * v[static_cast<std::int64_t>(idx)];
      }
  }
  return acc * g.cell_volume();
}

}  // namespace

NormResult weighted_bmo_norm(const GridFunction& f, const GridFunction& v, const FunctionalY& y,
                             CubeFamily family) {
  const GridSpec& g = f.spec();
  if (v.spec() != g) throw std::invalid_argument("weight grid does not match function grid");
  if (y.spec() != g) throw std::invalid_argument("functional grid does not match function grid");
  NormResult best{0.0, unit_cube(g)};
  for_each_cube(g, family, [&](const Cube& q) {
    double den = y(q);
    if (den <= 0.0) return;
    double ratio = cube_numerator(f, v, q) / den;
    if (ratio > best.value) best = NormResult{ratio, q};
  });
  return best;
}

NormResult bmo_norm(const GridFunction& f, CubeFamily family) {
  GridFunction ones = constant_function(f.spec(), 1.0);
  return weighted_bmo_norm(f, ones, FunctionalY::lebesgue(f.spec()), family);
}

double p_oscillation(const GridFunction& f, const GridFunction& w, const FunctionalY& y,
                     const Cube& q, double p) {
  if (!(p >= 1.0)) throw std::invalid_argument("oscillation exponent p must be >= 1");
  const GridSpec& g = f.spec();
  double f_q = average(f, q);
  double acc = 0.0;
  std::int64_t n = g.cells_per_axis();
  if (g.d == 1) {
    for (std::int64_t i = q.o[0]; i < q.o[0] + q.s; ++i)
      acc += std::pow(std::fabs(f[i] - f_q), p) * w[i];
  } else {
    for (std::int64_t i = q.o[0]; i < q.o[0] + q.s; ++i)
      for (std::int64_t j = q.o[1]; j < q.o[1] + q.s; ++j)
        acc += std::pow(std::fabs(f.at(i, j) - f_q), p) * w.at(i, j);
  }
  double den = y(q);
  if (den <= 0.0) throw std::invalid_argument("p_oscillation needs Y(Q) > 0");
  return std::pow(acc * g.cell_volume() / den, 1.0 / p);
}

double exp_luxemburg(const GridFunction& gf, const Cube& q, const GridFunction& w,
                     LuxMeasure measure) {
  const GridSpec& g = gf.spec();
  if (w.spec() != g) throw std::invalid_argument("weight grid does not match function grid");
  double mass = measure == LuxMeasure::MassQ ? integrate(w, q) : integrate(w, doubled(q));
  if (!(mass > 0.0)) throw std::invalid_argument("Luxemburg measure has no mass");

  std::vector<double> gv, mu;
  std::int64_t n = g.cells_per_axis();
  double scale = g.cell_volume() / mass;
  double gmax = 0.0;
  auto push = [&](std::int64_t idx) {
    double wc = w[idx];
    if (wc <= 0.0) return;
    double a = std::fabs(gf[idx]);
    gv.push_back(a);
    mu.push_back(wc * scale);
    gmax = std::max(gmax, a);
  };
  std::int64_t lo0 = std::max<std::int64_t>(q.o[0], 0), hi0 = std::min(q.o[0] + q.s, n);
  if (g.d == 1) {
    for (std::int64_t i = lo0; i < hi0; ++i) push(i);
  } else {
    std::int64_t lo1 = std::max<std::int64_t>(q.o[1], 0), hi1 = std::min(q.o[1] + q.s, n);
    for (std::int64_t i = lo0; i < hi0; ++i)
      for (std::int64_t j = lo1; j < hi1; ++j) push(i * n + j);
  }
  if (gmax == 0.0) return 0.0;

  auto phi = [&](double lambda) {
    double acc = 0.0;
    for (std::size_t i = 0; i < gv.size(); ++i) acc += mu[i] * std::expm1(gv[i] / lambda);
    return acc;
  };
  double lo = gmax / 60.0, hi = gmax * 60.0;
  double phi_lo = phi(lo), phi_hi = phi(hi);
  if (phi_hi > 1.0 || phi_lo < 1.0) {
    std::ostringstream os;
    os << "Luxemburg bisection bracket failed: phi(" << lo << ")=" << phi_lo << ", phi(" << hi
       << ")=" << phi_hi;
    throw std::runtime_error(os.str());
  }
  for (int it = 0; it < 200 && hi - lo > 1e-10 * hi; ++it) {
    double mid = 0.5 * (lo + hi);
    (phi(mid) <= 1.0 ? hi : lo) = mid;
  }
  return hi;
}

double pgrowth_to_exp(const std::vector<std::pair<double, double>>& samples, double alpha) {
  if (samples.empty()) throw std::invalid_argument("no growth samples");
  double best = 0.0;
  for (const auto& [p, norm] : samples) {
    if (!(p >= 1.0)) throw std::invalid_argument("growth samples need p >= 1");
    best = std::max(best, norm / std::pow(p, alpha));
  }
  return best;
}

}  // namespace dw
