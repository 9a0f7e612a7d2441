#pragma once

// Planar geometry of a solved true tree.
//
// Edges are lifts of t -> s cos(pi t) through p, started at an internal vertex
// of sign s along the d directions of the local model p - s ~ c (z - v)^d.
// Both halves of an internal edge meet at the zero of p in its middle, which
// is how the traced rotation system is read off and compared with the tree.
//
// The boundary correspondence comes from p(phi(z)) = (z^N + z^-N) / 2: along
// one side of an edge arccos(p) moves through pi, so the side occupies pi/N
// of the circle. Absolute angles are anchored at the leaf farthest from 0.

#include <algorithm>
#include <cmath>
#include <complex>
#include <fstream>
#include <limits>
#include <numbers>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "json.hpp"

#include "truetrees/errors.hpp"
#include "truetrees/gauss_legendre.hpp"
#include "truetrees/plane_tree.hpp"
#include "truetrees/shabat.hpp"

namespace truetrees {

struct TracedTree {
  int degree = 0;
  std::vector<Complex> vertex_positions;
  // By edge id (child endpoint), oriented parent -> child. Entry 0 is unused.
  std::vector<std::vector<Complex>> edge_polylines;
  // Zero of p on each edge, by edge id. Entry 0 is unused.
  std::vector<Complex> zeros;
  HalfEdgeWalk walk;
  // Arc on the unit circle of each walk side, and the angle at which it starts.
  std::vector<double> side_arcs;
  std::vector<double> prime_ends;

  /// Largest |arc - pi/N| over all sides.
  double balance_error() const {
    double err = 0;
    for (double a : side_arcs) err = std::max(err, std::abs(a - std::numbers::pi / degree));
    return err;
  }
};

namespace detail {

class Lifter {
 public:
  Lifter(const ShabatModel& model, double step)
      : model_(model), rule_(gauss_legendre(16)), step_(step) {
    scale_ = 1.0;
    for (auto v : model.crit_points()) scale_ = std::max(scale_, 2.0 * std::abs(v));
  }

  double scale() const { return scale_; }

  double crit_distance(Complex z) const {
    double d = std::numeric_limits<double>::infinity();
    for (auto v : model_.crit_points()) d = std::min(d, std::abs(z - v));
    return d;
  }

  /// Newton onto anchor_value + integral_{anchor}^{z} p' = target, from `guess`.
  std::optional<Complex> correct(Complex anchor, Complex anchor_value, Complex target, Complex guess,
                                 double max_move) const {
    Complex z = guess;
    const double tol = 1e-13 * (1.0 + std::abs(target));
    for (int it = 0; it < 12; ++it) {
      const Complex f = anchor_value + model_.integrate(anchor, z, rule_) - target;
      if (std::abs(f) <= tol) return z;
      const Complex d = model_.derivative(z);
      if (d == Complex(0)) return std::nullopt;
      z -= f / d;
      if (!std::isfinite(z.real()) || std::abs(z - guess) > max_move) return std::nullopt;
    }
    const Complex f = anchor_value + model_.integrate(anchor, z, rule_) - target;
    if (std::abs(f) <= 100 * tol) return z;
    return std::nullopt;
  }

  /// Follows p(z) = s cos(pi t) from (z, t) to t_end, appending samples to out.
  void lift(Complex& z, double& t, double t_end, double s, std::vector<Complex>& out) const {
    const double pi = std::numbers::pi;
    double dt = 0.02;
    const double dt_min = 1e-13;
    while (t < t_end) {
      const Complex dzdt = -s * pi * std::sin(pi * t) / model_.derivative(z);
      const double hmax = std::min(step_ * scale_, 0.25 * crit_distance(z));
      double speed = std::abs(dzdt);
      if (speed * dt > hmax) dt = hmax / speed;
      dt = std::min(dt, t_end - t);
      bool done = false;
      while (!done) {
        if (dt < dt_min) throw Error(ErrorKind::BranchAmbiguity, "lift step underflow");
        const double tn = t + dt;
        const Complex pred = z + (s * (std::cos(pi * tn) - std::cos(pi * t))) / model_.derivative(z);
        const double move = std::abs(pred - z);
        auto zn = correct(z, s * std::cos(pi * t), s * std::cos(pi * tn), pred, 0.5 * move + 1e-12 * scale_);
        if (zn) {
          z = *zn;
          t = (tn > t_end - 1e-15) ? t_end : tn;
          out.push_back(z);
          done = true;
          dt *= 1.6;
        } else {
          dt *= 0.5;
        }
      }
    }
  }

 private:
  const ShabatModel& model_;
  GaussRule rule_;
  double step_;
  double scale_;
};

struct HalfTrace {
  int vertex;  // crit index
  int slot;    // direction index in ccw order
  std::vector<Complex> points;  // vertex -> zero
  Complex zero;
};

inline double wrap_angle(double a) {
  const double two_pi = 2 * std::numbers::pi;
  a = std::fmod(a, two_pi);
  if (a < 0) a += two_pi;
  return a;
}

}  // namespace detail

/// Traces every edge of a solved model and checks the traced rotation system
/// against the tree. `hints` (by vertex id, may contain NaN) break ties when a
/// vertex has only leaf neighbours. Throws CombinatoricsMismatch.
inline TracedTree trace_edges(const ShabatModel& model, double step,
                              const std::vector<Complex>* hints = nullptr) {
  const auto& tree = model.tree();
  const int n = tree.edge_count();
  TracedTree out;
  out.degree = n;
  out.vertex_positions.assign(tree.vertex_count(), Complex(std::numeric_limits<double>::quiet_NaN(), 0));
  out.edge_polylines.assign(tree.vertex_count(), {});
  out.zeros.assign(tree.vertex_count(), Complex(std::numeric_limits<double>::quiet_NaN(), 0));
  const auto& signs = model.signs();

  if (model.crit_ids().empty()) {
    // Single edge: p = w/2, root at 2.
    const Complex a = 2.0 * double(signs[0]);
    out.vertex_positions[0] = a;
    out.vertex_positions[1] = -a;
    for (int k = 0; k <= 64; ++k) out.edge_polylines[1].push_back(a + (-2.0 * a) * (k / 64.0));
    out.zeros[1] = 0;
    return out;
  }

  detail::Lifter lifter(model, step);
  const auto& crit = model.crit_points();
  const auto& ids = model.crit_ids();
  const auto& mult = model.multiplicities();
  const int k = static_cast<int>(ids.size());
  const double pi = std::numbers::pi;

  std::vector<detail::HalfTrace> halves;
  std::vector<std::vector<Complex>> directions(k);
  for (int i = 0; i < k; ++i) {
    const int d = mult[i] + 1;
    const double s = signs[ids[i]];
    // p - p(v) ~ c (z - v)^d with c = (N/2) q_rest(v) / d
    Complex c = 0.5 * n / d;
    double rho = std::numeric_limits<double>::infinity();
    for (int j = 0; j < k; ++j) {
      if (j == i) continue;
      for (int r = 0; r < mult[j]; ++r) c *= (crit[i] - crit[j]);
      rho = std::min(rho, std::abs(crit[i] - crit[j]));
    }
    if (!std::isfinite(rho)) rho = lifter.scale();
    const double base = std::arg(Complex(-s)) - std::arg(c);
    for (int j = 0; j < d; ++j) {
      const double theta = (base + 2 * pi * j) / d;
      const Complex dir = std::polar(1.0, theta);
      directions[i].push_back(dir);
      detail::HalfTrace h{i, j, {crit[i]}, 0};
      // start on the curve a short distance out along the local direction
      double r0 = std::min(0.2 * rho, std::pow(1e-3 / std::abs(c), 1.0 / d));
      std::optional<Complex> z0;
      double t0 = 0;
      for (int attempt = 0; attempt < 20 && !z0; ++attempt, r0 *= 0.5) {
        const Complex guess = crit[i] + r0 * dir;
        const Complex pg = model.crit_values()[i] + model.integrate(crit[i], guess);
        t0 = std::acos(std::clamp(s * pg.real(), -1.0, 1.0)) / pi;
        if (!(t0 > 0 && t0 < 0.25)) continue;
        z0 = lifter.correct(crit[i], model.crit_values()[i], s * std::cos(pi * t0), guess, 0.5 * r0);
      }
      if (!z0) throw Error(ErrorKind::BranchAmbiguity, "cannot leave critical point");
      Complex z = *z0;
      double t = t0;
      h.points.push_back(z);
      lifter.lift(z, t, 0.5, s, h.points);
      h.zero = z;
      halves.push_back(std::move(h));
    }
  }

  // Pair half-traces that end at the same zero.
  const double match_tol = 1e-6 * lifter.scale();
  std::vector<int> partner(halves.size(), -1);
  for (std::size_t a = 0; a < halves.size(); ++a) {
    double best = std::numeric_limits<double>::infinity();
    int arg = -1;
    for (std::size_t b = 0; b < halves.size(); ++b) {
      if (b == a || halves[b].vertex == halves[a].vertex) continue;
      const double dist = std::abs(halves[a].zero - halves[b].zero);
      if (dist < best) { best = dist; arg = static_cast<int>(b); }
    }
    if (arg >= 0 && best < match_tol) partner[a] = arg;
  }
  for (std::size_t a = 0; a < halves.size(); ++a)
    if (partner[a] >= 0 && partner[partner[a]] != static_cast<int>(a))
      throw Error(ErrorKind::CombinatoricsMismatch, "edge midpoints do not pair up");

  // Traced neighbours (crit index or -1 for a leaf) in ccw order at each vertex.
  std::vector<std::vector<int>> slot_half(k);
  for (int i = 0; i < k; ++i) slot_half[i].assign(mult[i] + 1, -1);
  for (std::size_t a = 0; a < halves.size(); ++a) slot_half[halves[a].vertex][halves[a].slot] = static_cast<int>(a);

  std::vector<std::vector<VertexId>> slot_vertex(k);
  for (int i = 0; i < k; ++i) {
    const VertexId v = ids[i];
    const auto rot = tree.rotation(v);
    const int d = static_cast<int>(rot.size());
    std::vector<int> traced(d);
    for (int j = 0; j < d; ++j) {
      const int b = partner[slot_half[i][j]];
      traced[j] = b < 0 ? -1 : ids[halves[b].vertex];
    }
    std::vector<int> shifts;
    for (int sft = 0; sft < d; ++sft) {
      bool ok = true;
      for (int j = 0; j < d && ok; ++j) {
        const VertexId u = rot[(j + sft) % d];
        ok = tree.is_leaf(u) ? traced[j] == -1 : traced[j] == u;
      }
      if (ok) shifts.push_back(sft);
    }
    if (shifts.empty())
      throw Error(ErrorKind::CombinatoricsMismatch, "rotation at vertex " + std::to_string(v) + " differs");
    int chosen = shifts.front();
    if (shifts.size() > 1 && hints) {
      double best = std::numeric_limits<double>::infinity();
      for (int sft : shifts) {
        double cost = 0;
        for (int j = 0; j < d; ++j) {
          const Complex hv = (*hints)[rot[(j + sft) % d]] - (*hints)[v];
          if (!std::isfinite(hv.real()) || std::abs(hv) == 0) continue;
          cost += std::abs(std::arg(hv / directions[i][j]));
        }
        if (cost < best) { best = cost; chosen = sft; }
      }
    }
    slot_vertex[i].resize(d);
    for (int j = 0; j < d; ++j) slot_vertex[i][j] = rot[(j + chosen) % d];
  }

  // Assemble edges.
  for (int i = 0; i < k; ++i) out.vertex_positions[ids[i]] = crit[i];
  for (int i = 0; i < k; ++i) {
    const VertexId v = ids[i];
    const double s = signs[v];
    for (int j = 0; j <= mult[i]; ++j) {
      const VertexId u = slot_vertex[i][j];
      const auto& h = halves[slot_half[i][j]];
      const bool v_is_parent = tree.parent(u) == v;
      const VertexId edge = v_is_parent ? u : v;
      if (tree.is_leaf(u)) {
        std::vector<Complex> pts = h.points;
        Complex z = h.zero;
        double t = 0.5;
        lifter.lift(z, t, 1.0, s, pts);
        out.vertex_positions[u] = z;
        out.zeros[edge] = h.zero;
        if (!v_is_parent) std::reverse(pts.begin(), pts.end());
        out.edge_polylines[edge] = std::move(pts);
      } else if (v_is_parent) {
        const auto& other = halves[partner[slot_half[i][j]]];
        std::vector<Complex> pts = h.points;
        pts.insert(pts.end(), other.points.rbegin() + 1, other.points.rend());
        out.zeros[edge] = 0.5 * (h.zero + other.zero);
        out.edge_polylines[edge] = std::move(pts);
      }
    }
  }
  return out;
}

/// Arc of every walk side from arccos(p) increments along the polylines, and
/// the prime-end angles anchored at the farthest leaf.
inline void side_harmonic_arcs(const ShabatModel& model, TracedTree& traced) {
  const auto& tree = model.tree();
  const int n = tree.edge_count();
  const double pi = std::numbers::pi;
  traced.walk = boundary_walk(tree);
  traced.side_arcs.assign(traced.walk.size(), 0.0);
  for (std::size_t i = 0; i < traced.walk.size(); ++i) {
    const auto& side = traced.walk[i];
    auto pts = traced.edge_polylines[side.edge];
    if (side.direction == Direction::Inward) std::reverse(pts.begin(), pts.end());
    pts.front() = traced.vertex_positions[side.from];
    pts.back() = traced.vertex_positions[side.to];
    double acc = 0;
    double prev = std::acos(std::clamp(model.evaluate(pts.front()).real(), -1.0, 1.0));
    double dir = 0;
    for (std::size_t q = 1; q < pts.size(); ++q) {
      const double cur = std::acos(std::clamp(model.evaluate(pts[q]).real(), -1.0, 1.0));
      const double inc = cur - prev;
      if (dir == 0 && std::abs(inc) > 1e-12) dir = inc > 0 ? 1 : -1;
      if (dir * inc < -1e-9) throw Error(ErrorKind::BranchAmbiguity, "arccos(p) is not monotone along a side");
      acc += std::abs(inc);
      prev = cur;
    }
    traced.side_arcs[i] = acc / n;
  }

  // Anchor: N theta = N arg(l) + sum_k Arg(|l| - z_k e^{-i arg l}) at the farthest leaf.
  VertexId far = tree.leaves().front();
  for (auto l : tree.leaves())
    if (std::abs(traced.vertex_positions[l]) > std::abs(traced.vertex_positions[far])) far = l;
  const Complex lp = traced.vertex_positions[far];
  const double dir = std::arg(lp);
  const Complex rot = std::polar(1.0, -dir);
  double total = n * dir;
  if (model.crit_ids().empty()) {
    total += std::arg(std::abs(lp) - 0.0 * rot);
  } else {
    for (VertexId e = 1; e < tree.vertex_count(); ++e) total += std::arg(std::abs(lp) - traced.zeros[e] * rot);
  }
  // leaf of sign s sits where z^N = s
  const double offset = model.signs()[far] > 0 ? 0.0 : pi;
  const double snapped = offset + 2 * pi * std::round((total - offset) / (2 * pi));
  const double theta_far = snapped / n;

  std::size_t arrive = 0;
  for (std::size_t i = 0; i < traced.walk.size(); ++i)
    if (traced.walk[i].to == far) arrive = i;
  const std::size_t m = traced.walk.size();
  traced.prime_ends.assign(m, 0.0);
  double angle = theta_far;
  for (std::size_t step = 1; step <= m; ++step) {
    const std::size_t i = (arrive + step) % m;
    traced.prime_ends[i] = detail::wrap_angle(angle);
    angle += traced.side_arcs[i];
  }
}

inline TracedTree trace_tree(const ShabatModel& model, const PlaneTree& tree, double step = 0.02) {
  if (!(model.tree() == tree)) throw Error(ErrorKind::IndexMismatch, "model was built for a different tree");
  const auto& pos = model.vertex_positions();
  auto traced = trace_edges(model, step, &pos);
  side_harmonic_arcs(model, traced);
  return traced;
}

/// Exterior Riemann map phi: {|z| > 1} -> complement of the traced tree,
/// phi(z) = z + O(1/z). Solves sum_e log(w - z_e) = N log z + log(1 + z^-2N)
/// (p = prod(w - z_e) / 2 over the edge zeros) by Newton continuation from
/// the far field.
class ExteriorMap {
 public:
  explicit ExteriorMap(const ShabatModel& model, double eps_dom = 1e-6) : eps_dom_(eps_dom) {
    n_ = model.degree();
    const auto& zs = model.zeros();
    for (std::size_t e = 1; e < zs.size(); ++e) {
      if (!std::isfinite(zs[e].real())) throw Error(ErrorKind::OutOfDomain, "exterior map needs a traced model");
      zeros_.push_back(zs[e]);
    }
    for (auto z : zeros_) radius_ = std::max(radius_, std::abs(z));
  }

  int degree() const noexcept { return n_; }

  /// phi(z) along the ray from the far field.
  Complex operator()(Complex z) const {
    check(z);
    const double r0 = std::max(4.0 * std::abs(z), 4.0 * radius_ + 4.0);
    const Complex far = z * (r0 / std::abs(z));
    Complex w = solve_at(far, far);
    return continue_to(far, w, z);
  }

  /// Continues a known value w_from = phi(z_from) along the segment to z_to.
  Complex continue_to(Complex z_from, Complex w_from, Complex z_to) const {
    check(z_to);
    Complex z = z_from;
    Complex w = w_from;
    double frac = 0;
    double h = 1.0;
    const Complex delta = z_to - z_from;
    while (frac < 1.0) {
      const double room = std::max(std::min(std::abs(z), std::abs(z_from + (frac + h) * delta)) - 1.0, eps_dom_);
      const double len = std::abs(delta) * h;
      if (len > 0.25 * room) h = 0.25 * room / std::abs(delta);
      h = std::min(h, 1.0 - frac);
      const Complex zn = z_from + (frac + h) * delta;
      const Complex pred = w + slope(z, w) * (zn - z);
      const auto wn = newton(zn, pred, std::abs(pred - w));
      if (wn) {
        z = zn;
        w = *wn;
        frac += h;
        h *= 2.0;
      } else {
        h *= 0.5;
        if (h * std::abs(delta) < 1e-14) throw Error(ErrorKind::BranchAmbiguity, "exterior map continuation stalled");
      }
    }
    return w;
  }

  /// phi along a path; the first point is reached from the far field.
  std::vector<Complex> along(const std::vector<Complex>& path) const {
    std::vector<Complex> out;
    out.reserve(path.size());
    if (path.empty()) return out;
    out.push_back((*this)(path.front()));
    for (std::size_t i = 1; i < path.size(); ++i) out.push_back(continue_to(path[i - 1], out.back(), path[i]));
    return out;
  }

 private:
  void check(Complex z) const {
    if (!(std::abs(z) > 1.0 + eps_dom_)) throw Error(ErrorKind::OutOfDomain, "phi needs |z| > 1");
  }

  Complex residual(Complex z, Complex w) const {
    Complex f = 0;
    for (auto ze : zeros_) f += std::log(w - ze);
    f -= double(n_) * std::log(z) + std::log(1.0 + std::pow(z, -2.0 * n_));
    return {f.real(), std::remainder(f.imag(), 2 * std::numbers::pi)};
  }

  Complex log_derivative(Complex w) const {
    Complex d = 0;
    for (auto ze : zeros_) d += 1.0 / (w - ze);
    return d;
  }

  Complex slope(Complex z, Complex w) const {
    const Complex q = std::pow(z, -2.0 * n_);
    const Complex rhs = double(n_) / z - 2.0 * n_ * q / (z * (1.0 + q));
    return rhs / log_derivative(w);
  }

  Complex solve_at(Complex z, Complex guess) const {
    auto w = newton(z, guess, std::abs(z));
    if (!w) throw Error(ErrorKind::NotConverged, "exterior map far-field solve failed");
    return *w;
  }

  std::optional<Complex> newton(Complex z, Complex w, double scale) const {
    const Complex start = w;
    double prev = HUGE_VAL;
    for (int it = 0; it < 30; ++it) {
      const Complex dw = residual(z, w) / log_derivative(w);
      w -= dw;
      if (!std::isfinite(w.real())) return std::nullopt;
      const double floor = 1e-9 * (1 + std::abs(w));
      if (std::abs(w - start) > 0.5 * scale + floor) return std::nullopt;
      const double step = std::abs(dw);
      if (step <= 1e-15 * (1 + std::abs(w))) return w;
      // rounding floor near the circle: the update stops shrinking
      if (step < floor && step > 0.5 * prev) return w;
      prev = step;
    }
    if (prev < 1e-9 * (1 + std::abs(w))) return w;
    return std::nullopt;
  }

  int n_ = 0;
  std::vector<Complex> zeros_;
  double radius_ = 0;
  double eps_dom_;
};

inline Complex phi(const ShabatModel& model, Complex z) { return ExteriorMap(model)(z); }

/// Hyperbolic geodesic of the exterior disk between e^{i theta1} and e^{i theta2}.
struct CircleGeodesic {
  std::vector<Complex> points;  // in the exterior disk, ordered from theta1 to theta2
  bool degenerate = false;      // antipodal endpoints: two rays through infinity
};

inline CircleGeodesic circle_geodesic(double theta1, double theta2, double eps_dom = 1e-4) {
  const double pi = std::numbers::pi;
  CircleGeodesic g;
  const double delta = std::remainder(theta2 - theta1, 2 * pi);
  if (std::abs(std::abs(delta) - pi) < 1e-12) {
    g.degenerate = true;
    std::vector<double> radii;
    for (double r = 1 + eps_dom; r < 1e3; r *= 1.25) radii.push_back(r);
    for (double r : radii) g.points.push_back(std::polar(r, theta1));
    for (auto it = radii.rbegin(); it != radii.rend(); ++it) g.points.push_back(std::polar(*it, theta2));
    return g;
  }
  const double mu = theta1 + 0.5 * delta;
  const Complex center = std::polar(1.0 / std::cos(0.5 * delta), mu);
  const double radius = std::abs(std::tan(0.5 * delta));
  const double b1 = std::arg(std::polar(1.0, theta1) - center);
  const double b2 = std::arg(std::polar(1.0, theta2) - center);
  // the outer arc passes through angle mu as seen from the center
  auto half = [&](double b_end, std::vector<double>& out) {
    const double span = std::remainder(b_end - mu, 2 * pi);
    for (double f = 1.0; ; f *= 0.8) {
      const double beta = b_end - span * f;
      const Complex z = center + std::polar(radius, beta);
      if (std::abs(z) < 1 + eps_dom) break;
      out.push_back(beta);
      if (f < 1e-12) break;
    }
  };
  std::vector<double> first, second;
  half(b1, first);
  half(b2, second);
  // first runs apex -> theta1; reverse it so the path runs theta1 -> apex -> theta2
  for (auto it = first.rbegin(); it != first.rend(); ++it) g.points.push_back(center + std::polar(radius, *it));
  for (std::size_t i = 1; i < second.size(); ++i) g.points.push_back(center + std::polar(radius, second[i]));
  return g;
}

/// phi-image of the circle geodesic; the polyline starts near the prime end at theta1.
inline std::vector<Complex> geodesic(const ExteriorMap& map, double theta1, double theta2, double eps_dom = 1e-4) {
  const auto g = circle_geodesic(theta1, theta2, eps_dom);
  if (g.points.empty()) return {};
  if (g.degenerate) {
    std::vector<Complex> out;
    for (auto z : g.points) out.push_back(map(z));
    return out;
  }
  // start from the apex (farthest from the circle) and continue both ways
  std::size_t apex = 0;
  for (std::size_t i = 0; i < g.points.size(); ++i)
    if (std::abs(g.points[i]) > std::abs(g.points[apex])) apex = i;
  std::vector<Complex> out(g.points.size());
  out[apex] = map(g.points[apex]);
  for (std::size_t i = apex + 1; i < g.points.size(); ++i) out[i] = map.continue_to(g.points[i - 1], out[i - 1], g.points[i]);
  for (std::size_t i = apex; i-- > 0;) out[i] = map.continue_to(g.points[i + 1], out[i + 1], g.points[i]);
  return out;
}

inline std::vector<Complex> geodesic(const ShabatModel& model, double theta1, double theta2) {
  return geodesic(ExteriorMap(model), theta1, theta2);
}

}  // namespace truetrees
