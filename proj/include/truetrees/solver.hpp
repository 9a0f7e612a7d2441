#pragma once

// Newton plus trace verification, and continuation along growth sequences.

#include <cmath>
#include <complex>
#include <limits>
#include <numbers>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "truetrees/errors.hpp"
#include "truetrees/growth.hpp"
#include "truetrees/plane_tree.hpp"
#include "truetrees/shabat.hpp"
#include "truetrees/tracer.hpp"

namespace truetrees {

/// Vertices on circles by depth; leaves get equal angular wedges in walk
/// order and the second child of the root points along the negative axis.
inline std::vector<Complex> star_layout(const PlaneTree& tree) {
  const int nv = tree.vertex_count();
  std::vector<double> lo(nv), hi(nv);
  std::vector<int> leaves_below(nv, 0);
  for (VertexId v = nv - 1; v >= 0; --v) {
    if (tree.children(v).empty()) leaves_below[v] = 1;
    if (v > 0) leaves_below[*tree.parent(v)] += leaves_below[v];
  }
  const double unit = 2 * std::numbers::pi / leaves_below[0];
  lo[0] = 0;
  hi[0] = 2 * std::numbers::pi;
  for (VertexId v = 0; v < nv; ++v) {
    double a = lo[v];
    for (auto c : tree.children(v)) {
      lo[c] = a;
      hi[c] = a + unit * leaves_below[c];
      a = hi[c];
    }
  }
  const auto& top = tree.children(0);
  double turn = 0;
  if (top.size() >= 2) turn = std::numbers::pi - 0.5 * (lo[top[1]] + hi[top[1]]);
  else if (top.size() == 1) turn = -0.5 * (lo[top[0]] + hi[top[0]]);
  const int height = std::max(1, tree.height());
  std::vector<Complex> pos(nv);
  for (VertexId v = 0; v < nv; ++v) {
    const double r = 1.5 * tree.depth(v) / height;
    pos[v] = std::polar(r, 0.5 * (lo[v] + hi[v]) + turn);
  }
  return pos;
}

namespace detail {

// Moves the critical values from their initial values to +-1 in adaptive
// steps, re-solving at each step from the previous solution.
inline void homotopy_solve(ShabatModel& model, const SolveOptions& opts) {
  const int k = model.unknown_count();
  if (k == 0 || model.residual().cwiseAbs().maxCoeff() < 0.05) {
    newton_solve(model, opts);
    return;
  }
  const std::vector<Complex> start = model.crit_values();
  std::vector<Complex> goal(k);
  for (int i = 0; i < k; ++i) goal[i] = model.signs()[model.crit_ids()[i]];
  SolveOptions inner = opts;
  inner.max_iter = 12;
  inner.tol = 1e-10;
  double tau = 0;
  double dtau = 0.25;
  int total = 0;
  while (tau < 1) {
    const double next = std::min(1.0, tau + dtau);
    std::vector<Complex> target(k);
    for (int i = 0; i < k; ++i) target[i] = start[i] + next * (goal[i] - start[i]);
    ShabatModel trial = model;
    trial.set_targets(target);
    try {
      newton_solve(trial, inner);
      const int used = trial.info().iterations;
      total += used;
      model = std::move(trial);
      tau = next;
      dtau *= used <= 4 ? 2.0 : 1.0;
    } catch (const Error& err) {
      if (err.kind() != ErrorKind::SolveDiverged && err.kind() != ErrorKind::SingularJacobian) throw;
      dtau *= 0.5;
      if (dtau < 1e-5) throw Error(ErrorKind::SolveDiverged, "homotopy step underflow at tau " + std::to_string(tau));
    }
  }
  model.set_targets({});
  newton_solve(model, opts);
  model.info().iterations += total;
}

inline ShabatModel solve_from_guess(const PlaneTree& tree, const std::vector<Complex>& guess, Complex constant,
                                    const SolveOptions& opts) {
  ShabatModel model(tree, guess, constant, bipartite_signs(tree));
  homotopy_solve(model, opts);
  const auto traced = trace_edges(model, opts.trace_step, &guess);
  model.set_traced(traced.vertex_positions, traced.zeros);
  return model;
}

// Rotates a solution by the N-th root of unity that puts the root's second
// child (first, if the root is a leaf) closest to the negative real axis.
inline ShabatModel canonical_rotation(ShabatModel model, const SolveOptions& opts) {
  const auto& tree = model.tree();
  const auto& top = tree.children(PlaneTree::root());
  const int n = model.degree();
  if (top.empty() || n < 2) return model;
  const VertexId c = top.size() >= 2 ? top[1] : top[0];
  const auto& pos = model.vertex_positions();
  const double a = std::arg(pos[c] - pos[PlaneTree::root()]);
  const double turn = 2 * std::numbers::pi / n;
  const long k = std::lround(std::remainder(std::numbers::pi - a, 2 * std::numbers::pi) / turn);
  if (k % n == 0) return model;
  const Complex w = std::polar(1.0, k * turn);
  std::vector<Complex> guess(pos.size());
  for (std::size_t v = 0; v < pos.size(); ++v) guess[v] = w * pos[v];
  auto info = model.info();
  auto out = solve_from_guess(tree, guess, model.constant(), opts);
  out.info().iterations += info.iterations;
  out.info().refinements = info.refinements;
  return out;
}

/// Completes hints: internal vertices without a position are placed near
/// their parent, away from the grandparent.
inline void fill_hints(const PlaneTree& tree, std::vector<Complex>& hints) {
  for (VertexId v = 0; v < tree.vertex_count(); ++v) {
    if (std::isfinite(hints[v].real())) continue;
    if (v == 0) { hints[v] = 0; continue; }
    const VertexId p = *tree.parent(v);
    const Complex pp = hints[p];
    Complex dir = pp;
    double len = 0.1;
    if (auto g = tree.parent(p)) {
      dir = pp - hints[*g];
      len = 0.1 * std::abs(dir);
    }
    if (std::abs(dir) == 0) dir = 1;
    const auto& sib = tree.children(p);
    const double k = static_cast<double>(std::find(sib.begin(), sib.end(), v) - sib.begin());
    const double spread = sib.size() > 1 ? (k / (sib.size() - 1) - 0.5) : 0.0;
    hints[v] = pp + len * (dir / std::abs(dir)) * std::polar(1.0, spread);
  }
}

// Warm start from hints with bisection of the grown leaves on failure. Used
// when internal vertices of the base gain children.
inline ShabatModel solve_extension_hinted(const PlaneTree& target, const ShabatModel& base,
                                   const std::vector<VertexId>& base_to_target, const SolveOptions& opts,
                                   int depth, int& refinements) {
  std::vector<Complex> hints(target.vertex_count(), Complex(std::numeric_limits<double>::quiet_NaN(), 0));
  const auto& bp = base.vertex_positions();
  for (std::size_t v = 0; v < base_to_target.size(); ++v) hints[base_to_target[v]] = bp[v];
  fill_hints(target, hints);
  try {
    return solve_from_guess(target, hints, base.constant(), opts);
  } catch (const Error& err) {
    if (err.kind() != ErrorKind::SolveDiverged && err.kind() != ErrorKind::CombinatoricsMismatch &&
        err.kind() != ErrorKind::BranchAmbiguity && err.kind() != ErrorKind::SingularJacobian)
      throw;
    if (depth >= opts.max_refinements) throw;
    const auto& bt = base.tree();
    std::vector<VertexId> grown;
    for (VertexId v = 0; v < bt.vertex_count(); ++v)
      if (bt.children(v).empty() && !target.children(base_to_target[v]).empty()) grown.push_back(v);
    if (grown.size() < 2) throw;
    const std::set<VertexId> chosen(grown.begin(), grown.begin() + grown.size() / 2);

    // Intermediate tree: base plus the growth below the chosen leaves.
    PlaneTree mid = bt;
    std::vector<VertexId> mid_to_target = base_to_target;
    std::vector<VertexId> target_to_mid(target.vertex_count(), -1);
    for (std::size_t v = 0; v < base_to_target.size(); ++v) target_to_mid[base_to_target[v]] = static_cast<VertexId>(v);
    std::vector<VertexId> frontier;
    for (auto v : chosen) frontier.push_back(base_to_target[v]);
    for (std::size_t i = 0; i < frontier.size(); ++i) {
      const VertexId tv = frontier[i];
      for (auto c : target.children(tv)) {
        if (target_to_mid[c] >= 0) continue;
        target_to_mid[c] = mid.add_child(target_to_mid[tv], target.color(c));
        mid_to_target.push_back(c);
        frontier.push_back(c);
      }
    }
    ++refinements;
    std::vector<VertexId> identity(bt.vertex_count());
    for (VertexId v = 0; v < bt.vertex_count(); ++v) identity[v] = v;
    const ShabatModel half = solve_extension_hinted(mid, base, identity, opts, depth + 1, refinements);
    return solve_extension_hinted(target, half, mid_to_target, opts, depth + 1, refinements);
  }
}

// One generation of leaf growth: `mid` is the previous tree plus children
// under some of its leaves. prev ids map into mid through prev_to_mid.
inline ShabatModel grow_generation(const PlaneTree& mid, const ShabatModel& prev,
                                   const std::vector<VertexId>& prev_to_mid, const SolveOptions& opts) {
  const Complex nan(std::numeric_limits<double>::quiet_NaN(), 0);
  std::vector<bool> growing(mid.vertex_count(), false);
  std::vector<Complex> start(mid.vertex_count(), nan);
  const auto& pt = prev.tree();
  for (VertexId v = 0; v < pt.vertex_count(); ++v) {
    const VertexId m = prev_to_mid[v];
    start[m] = prev.vertex_positions()[v];
    if (pt.children(v).empty() && !mid.children(m).empty()) growing[m] = true;
  }
  auto [points, constant] = grow_exponents(mid, growing, start, prev.constant());
  for (VertexId v = 0; v < mid.vertex_count(); ++v)
    if (mid.is_leaf(v) && std::isfinite(start[v].real())) points[v] = start[v];
  fill_hints(mid, points);
  return solve_from_guess(mid, points, constant, opts);
}

// Grows base into target generation by generation. Returns nullopt when the
// growth is not purely at leaves of the base.
inline std::optional<ShabatModel> solve_extension_grown(const PlaneTree& target, const ShabatModel& base,
                                                        const std::vector<VertexId>& base_to_target,
                                                        const SolveOptions& opts) {
  const auto& bt = base.tree();
  std::vector<int> generation(target.vertex_count(), -1);
  for (VertexId v = 0; v < bt.vertex_count(); ++v) {
    const VertexId t = base_to_target[v];
    generation[t] = 0;
    if (!bt.children(v).empty() && target.children(t).size() != bt.children(v).size()) return std::nullopt;
    if (v == bt.root() && bt.children(v).empty() && !target.children(t).empty()) return std::nullopt;
  }
  int last = 0;
  for (VertexId t = 0; t < target.vertex_count(); ++t) {
    if (generation[t] >= 0) continue;
    std::vector<VertexId> chain;
    VertexId u = t;
    while (generation[u] < 0) {
      chain.push_back(u);
      u = *target.parent(u);
    }
    for (auto it = chain.rbegin(); it != chain.rend(); ++it) generation[*it] = generation[*target.parent(*it)] + 1;
    last = std::max(last, generation[t]);
  }
  if (last == 0) return solve_from_guess(target, base.vertex_positions(), base.constant(), opts);

  // Stage trees share ids with the previous stage; new vertices are appended.
  PlaneTree stage = bt;
  std::vector<VertexId> stage_to_target = base_to_target;
  std::vector<VertexId> target_to_stage(target.vertex_count(), -1);
  for (std::size_t v = 0; v < base_to_target.size(); ++v) target_to_stage[base_to_target[v]] = static_cast<VertexId>(v);
  ShabatModel current = base;
  for (int g = 1; g <= last; ++g) {
    std::vector<VertexId> prev_to_stage(stage.vertex_count());
    for (VertexId v = 0; v < stage.vertex_count(); ++v) prev_to_stage[v] = v;
    for (VertexId v = 0; v < stage.vertex_count(); ++v) {
      for (auto c : target.children(stage_to_target[v])) {
        if (generation[c] != g) continue;
        target_to_stage[c] = stage.add_child(v, target.color(c));
        stage_to_target.push_back(c);
      }
    }
    current = grow_generation(stage, current, prev_to_stage, opts);
  }
  std::vector<Complex> positions(target.vertex_count());
  for (VertexId v = 0; v < stage.vertex_count(); ++v) positions[stage_to_target[v]] = current.vertex_positions()[v];
  return solve_from_guess(target, positions, current.constant(), opts);
}

inline ShabatModel solve_extension(const PlaneTree& target, const ShabatModel& base,
                                   const std::vector<VertexId>& base_to_target, const SolveOptions& opts,
                                   int& refinements) {
  if (auto grown = solve_extension_grown(target, base, base_to_target, opts)) return std::move(*grown);
  return solve_extension_hinted(target, base, base_to_target, opts, 0, refinements);
}

// Smallest star around the first internal vertex, with its map into tree.
inline std::pair<PlaneTree, std::vector<VertexId>> seed_star(const PlaneTree& tree) {
  PlaneTree star;
  std::vector<VertexId> to_tree{tree.root()};
  VertexId center = tree.root();
  VertexId star_center = star.root();
  if (tree.children(center).size() == 1) {
    center = tree.children(center)[0];
    star_center = star.add_child(star.root(), tree.color(center));
    to_tree.push_back(center);
  }
  for (auto c : tree.children(center)) {
    star.add_child(star_center, tree.color(c));
    to_tree.push_back(c);
  }
  return {star, to_tree};
}

}  // namespace detail

/// Solves for the Shabat polynomial of `tree`. With `init`, the tree must
/// extend init's tree (same ids on the common part) and the solve is warm
/// started from init's traced positions.
inline ShabatModel solve(const PlaneTree& tree, const ShabatModel* init, const SolveOptions& opts) {
  opts.validate();
  if (tree.edge_count() < 1) throw Error(ErrorKind::InvalidSize, "tree needs at least one edge");
  int refinements = 0;
  if (!init) {
    auto [star, star_to_tree] = detail::seed_star(tree);
    const auto seed = detail::solve_from_guess(star, star_layout(star), star.degree(0) >= 2 ? 1.0 : -1.0, opts);
    if (star.vertex_count() == tree.vertex_count()) {
      std::vector<Complex> positions(tree.vertex_count());
      for (VertexId v = 0; v < star.vertex_count(); ++v) positions[star_to_tree[v]] = seed.vertex_positions()[v];
      return detail::canonical_rotation(detail::solve_from_guess(tree, positions, seed.constant(), opts), opts);
    }
    return detail::canonical_rotation(detail::solve_extension(tree, seed, star_to_tree, opts, refinements), opts);
  }
  if (!tree.extends(init->tree())) throw Error(ErrorKind::IndexMismatch, "init does not index a subtree of tree");
  std::vector<VertexId> identity(init->tree().vertex_count());
  for (std::size_t v = 0; v < identity.size(); ++v) identity[v] = static_cast<VertexId>(v);
  auto model = detail::solve_extension(tree, *init, identity, opts, refinements);
  model.info().refinements = refinements;
  return detail::canonical_rotation(std::move(model), opts);
}

inline ShabatModel solve(const PlaneTree& tree, const SolveOptions& opts = {}) { return solve(tree, nullptr, opts); }

/// Solves a growth sequence, each member warm started from the previous one.
inline std::vector<ShabatModel> continue_solve(const std::vector<PlaneTree>& family, const SolveOptions& opts = {}) {
  std::vector<ShabatModel> out;
  out.reserve(family.size());
  for (std::size_t i = 0; i < family.size(); ++i) {
    try {
      out.push_back(solve(family[i], i == 0 ? nullptr : &out.back(), opts));
    } catch (const Error& err) {
      throw Error(err.kind(), "family index " + std::to_string(i) + ": " + err.what());
    }
  }
  return out;
}

}  // namespace truetrees
