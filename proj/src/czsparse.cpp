#include "dw/czsparse.hpp"

#include <algorithm>
#include <cmath>
#include <deque>
#include <stdexcept>

namespace dw {

namespace {

void collect_stopping(const GridFunction& dev, const Cube& node, double level, std::vector<Cube>& out) {
  if (average(dev, node) > level) {
    out.push_back(node);
    return;
  }
  if (node.s == 1) return;
  std::int64_t half = node.s / 2;
  if (dev.spec().d == 1) {
    collect_stopping(dev, Cube{1, {node.o[0], 0}, half}, level, out);
    collect_stopping(dev, Cube{1, {node.o[0] + half, 0}, half}, level, out);
  } else {
    for (int a = 0; a < 2; ++a)
      for (int b = 0; b < 2; ++b)
        collect_stopping(dev, Cube{2, {node.o[0] + a * half, node.o[1] + b * half}, half}, level, out);
  }
}

void for_each_cell(const GridSpec& g, const Cube& q, const std::function<void(std::int64_t)>& fn) {
  std::int64_t n = g.cells_per_axis();
  if (g.d == 1) {
    for (std::int64_t i = q.o[0]; i < q.o[0] + q.s; ++i) fn(i);
  } else {
    for (std::int64_t i = q.o[0]; i < q.o[0] + q.s; ++i)
      for (std::int64_t j = q.o[1]; j < q.o[1] + q.s; ++j) fn(i * n + j);
  }
}

}  // namespace

double CZDecomposition::omega_cell_fraction() const {
  std::int64_t covered = 0;
  for (const Cube& q : stopping) covered += q.cell_count();
  return static_cast<double>(covered) / static_cast<double>(root.cell_count());
}

CZDecomposition cz_decompose(const GridFunction& f, const Cube& root, double level) {
  const GridSpec& g = f.spec();
  if (root.d != g.d) throw std::invalid_argument("root cube dimension does not match grid");
  if (!root.dyadic() || !root.inside_domain(g))
    throw std::invalid_argument("decomposition requires a dyadic root inside the domain");
  if (!(level > 0.0)) throw std::invalid_argument("stopping level must be positive");

  double f_q = average(f, root);
  GridFunction dev = f.map([f_q](double v) { return std::fabs(v - f_q); });

  CZDecomposition dec{root, level, f_q, average(dev, root), {},
                      constant_function(g, 0.0), constant_function(g, 0.0), 0};
  collect_stopping(dev, root, level, dec.stopping);

  std::vector<double> gv(static_cast<std::size_t>(g.total_cells()), 0.0);
  std::vector<double> bv(static_cast<std::size_t>(g.total_cells()), 0.0);
  for_each_cell(g, root, [&](std::int64_t idx) { gv[static_cast<std::size_t>(idx)] = f[idx] - f_q; });
  double cap = std::ldexp(level, g.d);  // 2^d L
  for (const Cube& q : dec.stopping) {
    double local = average(f, q) - f_q;
    if (average(dev, q) > cap + 1e-12) ++dec.upper_violations;
    for_each_cell(g, q, [&](std::int64_t idx) {
      std::size_t i = static_cast<std::size_t>(idx);
      bv[i] = gv[i] - local;
      gv[i] = local;
    });
  }
  dec.good = GridFunction(g, std::move(gv));
  dec.bad = GridFunction(g, std::move(bv));
  return dec;
}

CZInvariants check_cz_invariants(const GridFunction& f, const CZDecomposition& dec) {
  const GridSpec& g = f.spec();
  CZInvariants inv;
  double f_q = average(f, dec.root);
  GridFunction dev = f.map([f_q](double v) { return std::fabs(v - f_q); });
  double cap = std::ldexp(dec.level, g.d);

  for (const Cube& q : dec.stopping) {
    double a = average(dev, q);
    if (!(a > dec.level)) inv.selection_ok = false;
    if (a > cap + 1e-12 && q.s != dec.root.s) inv.upper_ok = false;
    if (q.s < dec.root.s) {  // the dyadic parent must not have stopped
      Cube parent{q.d, {q.o[0] - (q.o[0] % (2 * q.s)), q.o[1] - (q.o[1] % (2 * q.s))}, 2 * q.s};
      if (average(dev, parent) > dec.level) inv.selection_ok = false;
    }
  }
  double covered = static_cast<double>(dec.root.cell_count()) * dec.omega_cell_fraction();
  double allowed = static_cast<double>(dec.root.cell_count()) * dec.dev_mean / dec.level;
  if (covered > allowed * (1.0 + 1e-12) + 1e-9) inv.smallness_ok = false;

  std::vector<char> in_stop(static_cast<std::size_t>(g.total_cells()), 0);
  for (const Cube& q : dec.stopping)
    for_each_cell(g, q, [&](std::int64_t idx) { in_stop[static_cast<std::size_t>(idx)] = 1; });
  for_each_cell(g, dec.root, [&](std::int64_t idx) {
    double target = f[idx] - f_q;
    double err = std::fabs(dec.good[idx] + dec.bad[idx] - target);
    inv.reconstruction_error = std::max(inv.reconstruction_error, err);
    inv.good_bound_excess = std::max(inv.good_bound_excess, std::fabs(dec.good[idx]) - cap);
    if (!in_stop[static_cast<std::size_t>(idx)] && dec.bad[idx] != 0.0) inv.bad_support_ok = false;
  });
  inv.good_bound_excess = std::max(inv.good_bound_excess, 0.0);
  for (const Cube& q : dec.stopping) {
    double mean = std::fabs(integrate(dec.bad, q)) / q.volume(g);
    inv.bad_mean_error = std::max(inv.bad_mean_error, mean);
  }
  return inv;
}

SmallFamily small_family_from_cz(const CZDecomposition& dec) {
  double dev = dec.dev_mean;
  double nominal = dev > 0.0 ? dec.level / dev : 1.0;
  return SmallFamily{dec.root, dec.stopping, std::max(1.0, nominal)};
}

std::vector<Cube> cz_iterated_family(const GridFunction& f, const Cube& root, double level,
                                     int max_rounds) {
  std::vector<Cube> family{root};
  std::vector<Cube> frontier{root};
  for (int round = 0; round < max_rounds && !frontier.empty(); ++round) {
    std::vector<Cube> next;
    for (const Cube& p : frontier) {
      if (p.s == 1) continue;
      CZDecomposition dec = cz_decompose(f, p, level);
      for (const Cube& q : dec.stopping) {
        if (q.s == p.s) continue;  // a root that stops would repeat forever
        family.push_back(q);
        next.push_back(q);
      }
    }
    frontier = std::move(next);
  }
  return family;
}

namespace {

struct SparseBuilder {
  const GridFunction& f;
  const GridSpec& g;
  SparseFamily out;
  std::vector<double> chain_sum;  // Σ osc over the current ancestor chain, per cell

  void collect(const GridFunction& dev, const Cube& node, double threshold, std::vector<Cube>& stops) {
    if (node.s == 0) return;
    if (average(dev, node) > threshold) {
      stops.push_back(node);
      return;
    }
    if (node.s == 1) return;
    std::int64_t half = node.s / 2;
    if (g.d == 1) {
      collect(dev, Cube{1, {node.o[0], 0}, half}, threshold, stops);
      collect(dev, Cube{1, {node.o[0] + half, 0}, half}, threshold, stops);
    } else {
      for (int a = 0; a < 2; ++a)
        for (int b = 0; b < 2; ++b)
          collect(dev, Cube{2, {node.o[0] + a * half, node.o[1] + b * half}, half}, threshold, stops);
    }
  }

  std::size_t build(const Cube& p) {
    double f_p = average(f, p);
    GridFunction dev = f.map([f_p](double v) { return std::fabs(v - f_p); });
    double osc = average(dev, p);
    std::size_t idx = out.nodes.size();
    out.nodes.push_back(SparseNode{p, osc, {}});
    for_each_cell(g, p, [&](std::int64_t c) { chain_sum[static_cast<std::size_t>(c)] += osc; });
    if (osc <= 0.0 || p.s == 1) return idx;
    double threshold = std::ldexp(osc, g.d + 1);  // 2^{d+1} ⨍_P |f - f_P|
    std::vector<Cube> stops;
    std::int64_t half = p.s / 2;
    if (g.d == 1) {
      collect(dev, Cube{1, {p.o[0], 0}, half}, threshold, stops);
      collect(dev, Cube{1, {p.o[0] + half, 0}, half}, threshold, stops);
    } else {
      for (int a = 0; a < 2; ++a)
        for (int b = 0; b < 2; ++b)
          collect(dev, Cube{2, {p.o[0] + a * half, p.o[1] + b * half}, half}, threshold, stops);
    }
    std::vector<std::size_t> kids;
    kids.reserve(stops.size());
    for (const Cube& q : stops) kids.push_back(build(q));
    out.nodes[idx].kids = std::move(kids);
    return idx;
  }
};

}  // namespace

SparseDomination sparse_dominate(const GridFunction& f, const Cube& root) {
  const GridSpec& g = f.spec();
  if (root.d != g.d) throw std::invalid_argument("root cube dimension does not match grid");
  if (!root.dyadic() || !root.inside_domain(g))
    throw std::invalid_argument("sparse domination requires a dyadic root inside the domain");

  SparseBuilder builder{f, g, {}, std::vector<double>(static_cast<std::size_t>(g.total_cells()), 0.0)};
  builder.out.root = root;
  builder.out.eta = 1.0 - std::ldexp(1.0, -(g.d + 1));
  builder.build(root);

  double f_q = average(f, root);
  double c_meas = 0.0;
  for_each_cell(g, root, [&](std::int64_t idx) {
    double lhs = std::fabs(f[idx] - f_q);
    double rhs = builder.chain_sum[static_cast<std::size_t>(idx)];
    if (rhs > 0.0) c_meas = std::max(c_meas, lhs / rhs);
  });
  return SparseDomination{std::move(builder.out), c_meas};
}

bool is_sparse(const GridSpec& g, const SparseFamily& s, double eta) {
  std::vector<int> owner(static_cast<std::size_t>(g.total_cells()), -1);
  // mark deepest owner of every cell: nodes are stored parent-before-child
  for (std::size_t i = 0; i < s.nodes.size(); ++i)
    for_each_cell(g, s.nodes[i].cube, [&](std::int64_t c) { owner[static_cast<std::size_t>(c)] = static_cast<int>(i); });
  std::vector<std::int64_t> retained(s.nodes.size(), 0);
  for (int o : owner)
    if (o >= 0) ++retained[static_cast<std::size_t>(o)];
  for (std::size_t i = 0; i < s.nodes.size(); ++i) {
    double need = eta * static_cast<double>(s.nodes[i].cube.cell_count());
    if (static_cast<double>(retained[i]) + 1e-9 < need) return false;
  }
  return true;
}

}  // namespace dw
