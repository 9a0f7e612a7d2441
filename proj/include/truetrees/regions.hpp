#pragma once

// Prime ends, geodesic-bounded regions and diameters of a traced tree, plus
// JSON / SVG export.

#include <algorithm>
#include <cmath>
#include <complex>
#include <numbers>
#include <sstream>
#include <string>
#include <vector>

#include "json.hpp"

#include "truetrees/errors.hpp"
#include "truetrees/plane_tree.hpp"
#include "truetrees/shabat.hpp"
#include "truetrees/tracer.hpp"

namespace truetrees {

/// Walk index of the side from -> to.
inline std::size_t side_index(const TracedTree& traced, VertexId from, VertexId to) {
  for (std::size_t i = 0; i < traced.walk.size(); ++i)
    if (traced.walk[i].from == from && traced.walk[i].to == to) return i;
  throw Error(ErrorKind::NotInTree, "no side " + std::to_string(from) + " -> " + std::to_string(to));
}

/// Prime end at v that follows the edge to `after` in ccw order.
inline double prime_end_after(const PlaneTree& tree, const TracedTree& traced, VertexId v, VertexId after) {
  return traced.prime_ends[side_index(traced, v, tree.next_ccw(v, after))];
}

/// The single prime end at a vertex of degree 1 (leaf, or a root of degree 1).
inline double tip_prime_end(const PlaneTree& tree, const TracedTree& traced, VertexId v) {
  const VertexId nb = tree.parent(v) ? *tree.parent(v) : tree.children(v).front();
  return traced.prime_ends[side_index(traced, v, nb)];
}

// Rotation at a non-root vertex is (parent, R, L); at a leaf all three
// prime ends coincide.
inline double right_prime_end(const PlaneTree& tree, const TracedTree& traced, VertexId v) {
  if (tree.degree(v) == 1) return tip_prime_end(tree, traced, v);
  return prime_end_after(tree, traced, v, *tree.parent(v));
}

inline double left_prime_end(const PlaneTree& tree, const TracedTree& traced, VertexId v) {
  if (tree.degree(v) == 1) return tip_prime_end(tree, traced, v);
  return prime_end_after(tree, traced, v, tree.children(v).back());
}

inline double middle_prime_end(const PlaneTree& tree, const TracedTree& traced, VertexId v) {
  return prime_end_after(tree, traced, v, tree.children(v).front());
}

/// Leaves in boundary-walk order.
inline std::vector<VertexId> leaves_in_walk_order(const TracedTree& traced, const PlaneTree& tree) {
  std::vector<VertexId> out;
  for (const auto& side : traced.walk)
    if (tree.degree(side.from) == 1) out.push_back(side.from);
  return out;
}

// ---------------------------------------------------------------------------
// Diameters

/// Exact diameter of a finite point set (convex hull, then all hull pairs).
inline double diameter(std::vector<Complex> pts) {
  if (pts.size() < 2) return 0.0;
  std::sort(pts.begin(), pts.end(), [](Complex a, Complex b) {
    return a.real() < b.real() || (a.real() == b.real() && a.imag() < b.imag());
  });
  auto cross = [](Complex o, Complex a, Complex b) {
    return (a.real() - o.real()) * (b.imag() - o.imag()) - (a.imag() - o.imag()) * (b.real() - o.real());
  };
  std::vector<Complex> hull(2 * pts.size());
  std::size_t k = 0;
  for (std::size_t i = 0; i < pts.size(); ++i) {
    while (k >= 2 && cross(hull[k - 2], hull[k - 1], pts[i]) <= 0) --k;
    hull[k++] = pts[i];
  }
  for (std::size_t i = pts.size() - 1, t = k + 1; i-- > 0;) {
    while (k >= t && cross(hull[k - 2], hull[k - 1], pts[i]) <= 0) --k;
    hull[k++] = pts[i];
  }
  hull.resize(k > 1 ? k - 1 : k);
  double best = 0;
  for (std::size_t i = 0; i < hull.size(); ++i)
    for (std::size_t j = i + 1; j < hull.size(); ++j) best = std::max(best, std::abs(hull[i] - hull[j]));
  if (hull.size() < 2) best = std::abs(pts.front() - pts.back());
  return best;
}

inline double edge_diameter(const TracedTree& traced, VertexId edge) {
  return diameter(traced.edge_polylines.at(edge));
}

/// Points of the traced subtree T(v): v and every edge below it.
inline std::vector<Complex> subtree_points(const PlaneTree& tree, const TracedTree& traced, VertexId v) {
  std::vector<Complex> pts{traced.vertex_positions[v]};
  std::vector<VertexId> stack{v};
  while (!stack.empty()) {
    const VertexId u = stack.back();
    stack.pop_back();
    for (auto c : tree.children(u)) {
      const auto& poly = traced.edge_polylines[c];
      pts.insert(pts.end(), poly.begin(), poly.end());
      stack.push_back(c);
    }
  }
  return pts;
}

inline double subtree_diameter(const PlaneTree& tree, const TracedTree& traced, VertexId v) {
  return diameter(subtree_points(tree, traced, v));
}

inline double tree_diameter(const TracedTree& traced) {
  std::vector<Complex> pts;
  for (const auto& poly : traced.edge_polylines) pts.insert(pts.end(), poly.begin(), poly.end());
  return diameter(pts);
}

// ---------------------------------------------------------------------------
// Regions

enum class RegionKind { V, W, Horoball, Lambda };

struct Region {
  RegionKind kind = RegionKind::V;
  VertexId vertex = 0;
  int index = 0;                  // j for W_j
  std::vector<Complex> boundary;  // closed polyline (first point repeated at the end)
  std::vector<Complex> interior_tree;  // traced tree points enclosed by the region

  double diameter() const {
    auto pts = boundary;
    pts.insert(pts.end(), interior_tree.begin(), interior_tree.end());
    return truetrees::diameter(pts);
  }
};

/// Geometry context: the model, its tracing and the exterior map.
class RegionBuilder {
 public:
  RegionBuilder(const ShabatModel& model, const TracedTree& traced, double eps_dom = 1e-4)
      : model_(model), traced_(traced), map_(model), eps_dom_(eps_dom) {}

  const ExteriorMap& map() const { return map_; }

  /// Geodesic polyline from vertex a (prime end theta_a) to vertex b.
  std::vector<Complex> arc(VertexId a, double theta_a, VertexId b, double theta_b) const {
    std::vector<Complex> out{traced_.vertex_positions[a]};
    if (std::abs(std::remainder(theta_a - theta_b, 2 * std::numbers::pi)) > 1e-12) {
      const auto g = geodesic(map_, theta_a, theta_b, eps_dom_);
      out.insert(out.end(), g.begin(), g.end());
    }
    out.push_back(traced_.vertex_positions[b]);
    return out;
  }

  /// V(v): enclosed by the geodesic joining the right and left prime ends of v.
  Region v_region(VertexId v) const {
    const auto& tree = model_.tree();
    if (v == tree.root()) throw Error(ErrorKind::NotInTree, "V(v) needs a non-root vertex");
    Region r;
    r.kind = RegionKind::V;
    r.vertex = v;
    r.boundary = arc(v, right_prime_end(tree, traced_, v), v, left_prime_end(tree, traced_, v));
    r.interior_tree = subtree_points(tree, traced_, v);
    return r;
  }

  /// W_j(v): bounded by alpha_j (vLR^j right to vRL^j left) and beta_j.
  Region w_region(VertexId v, int j) const {
    const auto& tree = model_.tree();
    if (tree.children(v).size() != 2) throw Error(ErrorKind::NotInTree, "W_j(v) needs a vertex with two children");
    VertexId a = tree.children(v)[1];  // vL
    VertexId b = tree.children(v)[0];  // vR
    for (int k = 0; k < j; ++k) {
      if (tree.children(a).size() != 2 || tree.children(b).size() != 2)
        throw Error(ErrorKind::DepthTooSmall, "W_j(v) runs past the leaves");
      a = tree.children(a)[0];
      b = tree.children(b)[1];
    }
    Region r;
    r.kind = RegionKind::W;
    r.vertex = v;
    r.index = j;
    auto alpha = arc(a, right_prime_end(tree, traced_, a), b, left_prime_end(tree, traced_, b));
    auto beta = arc(b, right_prime_end(tree, traced_, b), a, left_prime_end(tree, traced_, a));
    r.boundary = alpha;
    r.boundary.insert(r.boundary.end(), beta.begin() + 1, beta.end());
    auto ta = subtree_points(tree, traced_, a);
    auto tb = subtree_points(tree, traced_, b);
    r.interior_tree = ta;
    r.interior_tree.insert(r.interior_tree.end(), tb.begin(), tb.end());
    return r;
  }

  /// Approximate horoball at the prime end of v following `after`: the two
  /// extremal chains down to the leaves closed by the geodesic between them.
  Region horoball(VertexId v, VertexId after) const {
    const auto& tree = model_.tree();
    const VertexId first = after;
    const VertexId second = tree.next_ccw(v, after);
    if (tree.parent(first) != v || tree.parent(second) != v)
      throw Error(ErrorKind::NotInTree, "horoball prime end must lie between two children");
    auto chain = [&](VertexId start, bool take_last) {
      std::vector<VertexId> out{start};
      while (!tree.children(out.back()).empty()) {
        const auto& ch = tree.children(out.back());
        out.push_back(take_last ? ch.back() : ch.front());
      }
      return out;
    };
    const auto down_a = chain(first, true);
    const auto down_b = chain(second, false);
    Region r;
    r.kind = RegionKind::Horoball;
    r.vertex = v;
    // leaf of chain a up to v, then down to the leaf of chain b
    for (auto it = down_a.rbegin(); it != down_a.rend(); ++it) {
      auto poly = traced_.edge_polylines[*it];
      std::reverse(poly.begin(), poly.end());
      r.boundary.insert(r.boundary.end(), poly.begin(), poly.end());
    }
    for (auto u : down_b) {
      const auto& poly = traced_.edge_polylines[u];
      r.boundary.insert(r.boundary.end(), poly.begin(), poly.end());
    }
    const VertexId la = down_a.back();
    const VertexId lb = down_b.back();
    auto gate = arc(lb, tip_prime_end(tree, traced_, lb), la, tip_prime_end(tree, traced_, la));
    r.boundary.insert(r.boundary.end(), gate.begin() + 1, gate.end());
    return r;
  }

  /// Lambda_n: consecutive leaves joined by geodesics, closed.
  Region lambda_curve() const {
    const auto& tree = model_.tree();
    const auto leaves = leaves_in_walk_order(traced_, tree);
    Region r;
    r.kind = RegionKind::Lambda;
    for (std::size_t i = 0; i < leaves.size(); ++i) {
      const VertexId a = leaves[i];
      const VertexId b = leaves[(i + 1) % leaves.size()];
      auto g = arc(a, tip_prime_end(tree, traced_, a), b, tip_prime_end(tree, traced_, b));
      r.boundary.insert(r.boundary.end(), i == 0 ? g.begin() : g.begin() + 1, g.end());
    }
    return r;
  }

 private:
  const ShabatModel& model_;
  const TracedTree& traced_;
  ExteriorMap map_;
  double eps_dom_;
};

/// Even-odd point-in-polygon test against a closed polyline.
inline bool point_in_polygon(Complex p, const std::vector<Complex>& poly) {
  bool inside = false;
  const std::size_t n = poly.size();
  for (std::size_t i = 0, j = n - 1; i < n; j = i++) {
    const Complex a = poly[i], b = poly[j];
    if ((a.imag() > p.imag()) != (b.imag() > p.imag())) {
      const double x = a.real() + (p.imag() - a.imag()) * (b.real() - a.real()) / (b.imag() - a.imag());
      if (p.real() < x) inside = !inside;
    }
  }
  return inside;
}

// ---------------------------------------------------------------------------
// Export

inline nlohmann::json traced_to_json(const PlaneTree& tree, const TracedTree& traced) {
  auto pt = [](Complex z) { return nlohmann::json::array({z.real(), z.imag()}); };
  nlohmann::json j;
  j["degree"] = traced.degree;
  j["vertices"] = nlohmann::json::array();
  for (auto z : traced.vertex_positions) j["vertices"].push_back(pt(z));
  j["edges"] = nlohmann::json::array();
  for (VertexId e = 1; e < tree.vertex_count(); ++e) {
    nlohmann::json edge;
    edge["id"] = e;
    edge["parent"] = *tree.parent(e);
    const auto c = tree.color(e);
    edge["color"] = c ? nlohmann::json(*c == Color::Red ? "red" : "blue") : nlohmann::json(nullptr);
    edge["points"] = nlohmann::json::array();
    for (auto z : traced.edge_polylines[e]) edge["points"].push_back(pt(z));
    j["edges"].push_back(edge);
  }
  j["side_arcs"] = traced.side_arcs;
  j["prime_ends"] = traced.prime_ends;
  return j;
}

struct SvgLayer {
  std::vector<std::vector<Complex>> paths;
  std::vector<Complex> dots;
  std::string color = "black";
  double width = 1.0;
};

/// Plain SVG with y pointing up; one path per polyline.
inline std::string render_svg(const std::vector<SvgLayer>& layers, double pixels = 800) {
  double lo_x = 1e300, hi_x = -1e300, lo_y = 1e300, hi_y = -1e300;
  auto grow = [&](Complex z) {
    lo_x = std::min(lo_x, z.real());
    hi_x = std::max(hi_x, z.real());
    lo_y = std::min(lo_y, z.imag());
    hi_y = std::max(hi_y, z.imag());
  };
  for (const auto& l : layers) {
    for (const auto& p : l.paths)
      for (auto z : p) grow(z);
    for (auto z : l.dots) grow(z);
  }
  if (lo_x > hi_x) lo_x = lo_y = -1, hi_x = hi_y = 1;
  const double span = std::max({hi_x - lo_x, hi_y - lo_y, 1e-9}) * 1.05;
  const double cx = 0.5 * (lo_x + hi_x), cy = 0.5 * (lo_y + hi_y);
  const double scale = pixels / span;
  auto X = [&](Complex z) { return (z.real() - cx) * scale + pixels / 2; };
  auto Y = [&](Complex z) { return pixels / 2 - (z.imag() - cy) * scale; };
  std::ostringstream out;
  out.precision(6);
  out << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << pixels << "\" height=\"" << pixels << "\">\n";
  out << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
  for (const auto& l : layers) {
    for (const auto& p : l.paths) {
      if (p.empty()) continue;
      out << "<path fill=\"none\" stroke=\"" << l.color << "\" stroke-width=\"" << l.width << "\" d=\"M";
      for (std::size_t i = 0; i < p.size(); ++i) out << (i ? " L" : "") << X(p[i]) << "," << Y(p[i]);
      out << "\"/>\n";
    }
    for (auto z : l.dots)
      out << "<circle cx=\"" << X(z) << "\" cy=\"" << Y(z) << "\" r=\"" << l.width << "\" fill=\"" << l.color << "\"/>\n";
  }
  out << "</svg>\n";
  return out.str();
}

inline std::string traced_to_svg(const PlaneTree& tree, const TracedTree& traced) {
  SvgLayer black, red, blue;
  red.color = "#c0392b";
  blue.color = "#2e6fd8";
  for (VertexId e = 1; e < tree.vertex_count(); ++e) {
    const auto c = tree.color(e);
    auto& layer = !c ? black : (*c == Color::Red ? red : blue);
    layer.paths.push_back(traced.edge_polylines[e]);
  }
  return render_svg({black, red, blue});
}

}  // namespace truetrees
