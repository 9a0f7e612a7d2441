#pragma once

// Rooted plane trees: the combinatorial input to the whole library.
//
// Vertex 0 is always the root. The rotation system is stored through the
// ordered child lists: at a non-root vertex the counterclockwise cyclic order
// of neighbours is (parent, children[0], children[1], ...), at the root it is
// (children[0], children[1], ...). For binary branching, children[0] is the
// right turn and children[1] the left turn as seen when walking away from
// the root. Vertices are only ever appended, so a parent id is always smaller
// than the ids of its children.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <map>
#include <numbers>
#include <optional>
#include <random>
#include <string>
#include <string_view>
#include <vector>

#include "json.hpp"

#include "truetrees/errors.hpp"

namespace truetrees {

using VertexId = int;

enum class Color { Red, Blue };

struct Vertex {
  std::optional<VertexId> parent;
  std::vector<VertexId> children;
  // Colour of the edge joining this vertex to its parent.
  std::optional<Color> color;
};

class PlaneTree {
 public:
  PlaneTree() : vertices_(1) {}

  static constexpr VertexId root() noexcept { return 0; }

  VertexId add_child(VertexId parent, std::optional<Color> color = std::nullopt) {
    check_vertex(parent);
    const auto id = static_cast<VertexId>(vertices_.size());
    vertices_.push_back(Vertex{parent, {}, color});
    vertices_[parent].children.push_back(id);
    return id;
  }

  int vertex_count() const noexcept { return static_cast<int>(vertices_.size()); }
  int edge_count() const noexcept { return vertex_count() - 1; }

  const Vertex& vertex(VertexId v) const {
    check_vertex(v);
    return vertices_[v];
  }
  const std::vector<VertexId>& children(VertexId v) const { return vertex(v).children; }
  std::optional<VertexId> parent(VertexId v) const { return vertex(v).parent; }
  std::optional<Color> color(VertexId v) const { return vertex(v).color; }

  int degree(VertexId v) const {
    const auto& rec = vertex(v);
    return static_cast<int>(rec.children.size()) + (rec.parent ? 1 : 0);
  }
  bool is_leaf(VertexId v) const { return degree(v) == 1; }
  bool contains(VertexId v) const noexcept { return v >= 0 && v < vertex_count(); }

  int max_degree() const {
    int d = 0;
    for (VertexId v = 0; v < vertex_count(); ++v) d = std::max(d, degree(v));
    return d;
  }

  int depth(VertexId v) const {
    int d = 0;
    for (auto p = parent(v); p; p = parent(*p)) ++d;
    return d;
  }

  int height() const {
    int h = 0;
    for (VertexId v = 0; v < vertex_count(); ++v) h = std::max(h, depth(v));
    return h;
  }

  /// Counterclockwise neighbour order at v (parent first for non-root vertices).
  std::vector<VertexId> rotation(VertexId v) const {
    const auto& rec = vertex(v);
    std::vector<VertexId> out;
    out.reserve(rec.children.size() + 1);
    if (rec.parent) out.push_back(*rec.parent);
    out.insert(out.end(), rec.children.begin(), rec.children.end());
    return out;
  }

  /// Neighbour following `from` counterclockwise around v.
  VertexId next_ccw(VertexId v, VertexId from) const {
    const auto rot = rotation(v);
    const auto it = std::find(rot.begin(), rot.end(), from);
    if (it == rot.end()) throw Error(ErrorKind::NotInTree, "vertices are not adjacent");
    const auto idx = static_cast<std::size_t>(it - rot.begin());
    return rot[(idx + 1) % rot.size()];
  }

  std::vector<VertexId> leaves() const {
    std::vector<VertexId> out;
    for (VertexId v = 0; v < vertex_count(); ++v)
      if (degree(v) == 1) out.push_back(v);
    return out;
  }

  /// Vertices of degree at least two: the critical points of the Shabat polynomial.
  std::vector<VertexId> internal_vertices() const {
    std::vector<VertexId> out;
    for (VertexId v = 0; v < vertex_count(); ++v)
      if (degree(v) >= 2) out.push_back(v);
    return out;
  }

  /// Number of edges in the subtree hanging below v (v's descendants).
  int descendant_edge_count(VertexId v) const {
    int count = 0;
    std::vector<VertexId> stack{v};
    while (!stack.empty()) {
      const auto u = stack.back();
      stack.pop_back();
      for (auto c : children(u)) {
        ++count;
        stack.push_back(c);
      }
    }
    return count;
  }

  /// Path root -> v, inclusive.
  std::vector<VertexId> path_from_root(VertexId v) const {
    std::vector<VertexId> path{v};
    for (auto p = parent(v); p; p = parent(*p)) path.push_back(*p);
    std::reverse(path.begin(), path.end());
    return path;
  }

  bool is_ancestor(VertexId ancestor, VertexId v) const {
    for (std::optional<VertexId> u = v; u; u = parent(*u))
      if (*u == ancestor) return true;
    return false;
  }

  /// True when `smaller` is this tree restricted to its first vertex ids.
  bool extends(const PlaneTree& smaller) const {
    if (smaller.vertex_count() > vertex_count()) return false;
    for (VertexId v = 0; v < smaller.vertex_count(); ++v) {
      if (smaller.parent(v) != parent(v)) return false;
      const auto& small_children = smaller.children(v);
      const auto& big_children = children(v);
      if (!small_children.empty() && small_children != big_children) return false;
    }
    return true;
  }

  friend bool operator==(const PlaneTree& a, const PlaneTree& b) {
    if (a.vertex_count() != b.vertex_count()) return false;
    for (VertexId v = 0; v < a.vertex_count(); ++v) {
      const auto& x = a.vertices_[v];
      const auto& y = b.vertices_[v];
      if (x.parent != y.parent || x.children != y.children || x.color != y.color) return false;
    }
    return true;
  }

 private:
  void check_vertex(VertexId v) const {
    if (v < 0 || v >= static_cast<VertexId>(vertices_.size()))
      throw Error(ErrorKind::NotInTree, "vertex " + std::to_string(v) + " is not in the tree");
  }

  std::vector<Vertex> vertices_;
};

// ---------------------------------------------------------------------------
// Generators

/// Full truncation of the infinite trivalent tree at combinatorial depth `depth`.
/// Ids are assigned level by level so truncation(n) is an id-prefix of truncation(n+1).
inline PlaneTree trivalent_truncation(int depth) {
  if (depth < 1) throw Error(ErrorKind::InvalidSize, "depth must be >= 1");
  PlaneTree tree;
  std::vector<VertexId> level;
  for (int i = 0; i < 3; ++i) level.push_back(tree.add_child(PlaneTree::root()));
  for (int d = 2; d <= depth; ++d) {
    std::vector<VertexId> next;
    for (auto v : level)
      for (int i = 0; i < 2; ++i) next.push_back(tree.add_child(v));
    level = std::move(next);
  }
  return tree;
}

/// Add two edges at every leaf, `steps` times. A leaf root also counts as a leaf.
inline PlaneTree grow_trivalent(const PlaneTree& seed, int steps) {
  if (seed.max_degree() > 3) throw Error(ErrorKind::DegreeBound, "seed has a vertex of degree > 3");
  if (steps < 0) throw Error(ErrorKind::InvalidSize, "steps must be >= 0");
  PlaneTree tree = seed;
  for (int s = 0; s < steps; ++s) {
    const auto leaves = tree.leaves();
    for (auto v : leaves) {
      tree.add_child(v);
      tree.add_child(v);
    }
  }
  return tree;
}

/// Five-edge seed of the unbalanced truncation family: two adjacent trivalent
/// vertices, rooted at one of them.
inline PlaneTree fake_deltoid_seed() {
  PlaneTree tree;
  const auto hub = tree.add_child(PlaneTree::root());
  tree.add_child(PlaneTree::root());
  tree.add_child(PlaneTree::root());
  tree.add_child(hub);
  tree.add_child(hub);
  return tree;
}

/// Colored family converging to the cauliflower. The root carries blue, red,
/// blue, red counterclockwise; red leaves sprout one red edge, blue leaves
/// sprout blue, red, blue counterclockwise.
inline PlaneTree cauliflower_tree(int n) {
  if (n < 1) throw Error(ErrorKind::InvalidSize, "n must be >= 1");
  PlaneTree tree;
  for (auto c : {Color::Blue, Color::Red, Color::Blue, Color::Red}) tree.add_child(PlaneTree::root(), c);
  for (int step = 2; step <= n; ++step) {
    const auto leaves = tree.leaves();
    for (auto v : leaves) {
      if (tree.color(v) == Color::Red) {
        tree.add_child(v, Color::Red);
      } else {
        for (auto c : {Color::Blue, Color::Red, Color::Blue}) tree.add_child(v, c);
      }
    }
  }
  return tree;
}

namespace detail {

// Preorder Lukasiewicz word of a forest of full binary trees: +1 internal, -1 leaf.
inline VertexId attach_binary(PlaneTree& tree, VertexId parent, const std::vector<int>& word,
                              std::size_t& pos) {
  const auto v = tree.add_child(parent);
  if (word.at(pos++) > 0) {
    attach_binary(tree, v, word, pos);
    attach_binary(tree, v, word, pos);
  }
  return v;
}

}  // namespace detail

/// Uniform sample over plane trivalent trees with a degree-3 root and
/// `edge_budget` edges (root children ordered). Deterministic given `rng_seed`.
inline PlaneTree random_trivalent(int edge_budget, std::uint64_t rng_seed) {
  if (edge_budget < 3 || edge_budget % 2 == 0)
    throw Error(ErrorKind::InvalidSize, "no trivalent tree with " + std::to_string(edge_budget) + " edges");
  constexpr int kRootDegree = 3;
  const int internal = (edge_budget - kRootDegree) / 2;
  const int length = 2 * internal + kRootDegree;
  std::vector<int> word(length, -1);
  std::fill(word.begin(), word.begin() + internal, +1);
  std::mt19937_64 rng(rng_seed);
  std::shuffle(word.begin(), word.end(), rng);

  // Cycle lemma: exactly kRootDegree rotations encode a forest of kRootDegree trees.
  std::vector<int> valid;
  for (int start = 0; start < length; ++start) {
    int sum = 0;
    bool ok = true;
    for (int t = 0; t < length - 1 && ok; ++t) {
      sum += word[(start + t) % length];
      ok = sum > -kRootDegree;
    }
    if (ok) valid.push_back(start);
  }
  std::uniform_int_distribution<std::size_t> pick(0, valid.size() - 1);
  const int start = valid[pick(rng)];
  std::rotate(word.begin(), word.begin() + start, word.end());

  PlaneTree tree;
  std::size_t pos = 0;
  for (int i = 0; i < kRootDegree; ++i) detail::attach_binary(tree, PlaneTree::root(), word, pos);
  return tree;
}

// ---------------------------------------------------------------------------
// Boundary walk and signs

enum class Direction { Outward, Inward };

struct HalfEdge {
  VertexId from;
  VertexId to;
  VertexId edge;  // child endpoint
  Direction direction;
};

using HalfEdgeWalk = std::vector<HalfEdge>;

/// Counterclockwise contour of the tree seen from infinity, starting with root -> children[0].
inline HalfEdgeWalk boundary_walk(const PlaneTree& tree) {
  HalfEdgeWalk walk;
  const int n = tree.edge_count();
  if (n == 0) return walk;
  walk.reserve(2 * n);
  VertexId from = PlaneTree::root();
  VertexId to = tree.children(from).front();
  for (int i = 0; i < 2 * n; ++i) {
    const bool outward = tree.parent(to) == from;
    walk.push_back({from, to, outward ? to : from, outward ? Direction::Outward : Direction::Inward});
    const auto next = tree.next_ccw(to, from);
    from = to;
    to = next;
  }
  return walk;
}

/// +1/-1 by bipartite parity, with sign(root) = root_sign.
inline std::vector<int> bipartite_signs(const PlaneTree& tree, int root_sign = +1) {
  std::vector<int> sign(tree.vertex_count());
  sign[0] = root_sign >= 0 ? +1 : -1;
  std::vector<VertexId> stack{PlaneTree::root()};
  while (!stack.empty()) {
    const auto u = stack.back();
    stack.pop_back();
    for (auto c : tree.children(u)) {
      sign[c] = -sign[u];
      stack.push_back(c);
    }
  }
  return sign;
}

// ---------------------------------------------------------------------------
// Shortcuts, square sums, obstacles

/// Edges of T(e): e itself plus everything below its child endpoint.
inline int edge_subtree_size(const PlaneTree& tree, VertexId edge) {
  if (edge == PlaneTree::root() || !tree.contains(edge))
    throw Error(ErrorKind::NotInTree, "edge " + std::to_string(edge) + " is not an edge id");
  return 1 + tree.descendant_edge_count(edge);
}

/// Outer shortcut s(e): each of the 2N sides has arc length pi/N on the unit circle.
inline double shortcut_length(const PlaneTree& tree, VertexId edge) {
  const int n = tree.edge_count();
  return 2.0 * edge_subtree_size(tree, edge) * std::numbers::pi / n;
}

/// Inner shortcut with both sides of e removed: s(e) - 2 pi / N.
inline double inner_shortcut_length(const PlaneTree& tree, VertexId edge) {
  return shortcut_length(tree, edge) - 2.0 * std::numbers::pi / tree.edge_count();
}

/// One-sided variant, s(e) - pi / N.
inline double inner_shortcut_length_one_side(const PlaneTree& tree, VertexId edge) {
  return shortcut_length(tree, edge) - std::numbers::pi / tree.edge_count();
}

inline double shortcut_square_sum(const PlaneTree& tree) {
  std::vector<int> below(tree.vertex_count(), 0);
  for (VertexId v = tree.vertex_count() - 1; v > 0; --v) {
    const auto p = *tree.parent(v);
    below[p] += below[v] + 1;
  }
  const double unit = 2.0 * std::numbers::pi / tree.edge_count();
  double sum = 0.0;
  for (VertexId v = 1; v < tree.vertex_count(); ++v) {
    const double s = unit * (below[v] + 1);
    sum += s * s;
  }
  return sum;
}

/// Area of the 1/3-neighbourhood stadium of a unit segment, times 9.
inline constexpr double kObstacleArea = 6.0 + std::numbers::pi;

inline double obstacle_area_bound(const PlaneTree& tree, const std::map<VertexId, double>& weights,
                                  double alpha0, double background_area) {
  const double d = tree.max_degree();
  double weight_sq = 0.0;
  for (const auto& [edge, alpha] : weights) {
    if (alpha < 0) throw Error(ErrorKind::InvalidConfig, "obstacle weights must be nonnegative");
    if (!tree.contains(edge) || edge == PlaneTree::root())
      throw Error(ErrorKind::NotInTree, "weight given for a non-edge");
    weight_sq += alpha * alpha;
  }
  return (d + 1) * (d + 1) * alpha0 * alpha0 * (background_area + kObstacleArea * weight_sq);
}

// ---------------------------------------------------------------------------
// L/R addressing

struct LRWord {
  int digit = 1;      // 1-based index of the root child
  std::string turns;  // over {L, R}

  std::string to_string() const { return std::to_string(digit) + turns; }

  /// Run lengths k_1, ..., k_m of alternating L- and R-runs.
  std::vector<int> runs() const {
    std::vector<int> out;
    for (std::size_t i = 0; i < turns.size(); ++i) {
      if (i == 0 || turns[i] != turns[i - 1]) out.push_back(0);
      ++out.back();
    }
    return out;
  }

  static LRWord parse(std::string_view text) {
    if (text.empty() || text[0] < '1' || text[0] > '9')
      throw Error(ErrorKind::NotInTree, "word must start with a digit: " + std::string(text));
    LRWord w;
    w.digit = text[0] - '0';
    for (auto c : text.substr(1)) {
      if (c != 'L' && c != 'R') throw Error(ErrorKind::NotInTree, "word letters must be L or R");
      w.turns.push_back(c);
    }
    return w;
  }

  friend bool operator==(const LRWord&, const LRWord&) = default;
};

inline LRWord lr_word(const PlaneTree& tree, VertexId v) {
  if (v == PlaneTree::root()) throw Error(ErrorKind::NotInTree, "the root has no word");
  const auto path = tree.path_from_root(v);
  LRWord word;
  const auto& top = tree.children(PlaneTree::root());
  word.digit = static_cast<int>(std::find(top.begin(), top.end(), path[1]) - top.begin()) + 1;
  for (std::size_t i = 2; i < path.size(); ++i) {
    const auto& ch = tree.children(path[i - 1]);
    if (ch.size() != 2) throw Error(ErrorKind::NotInTree, "L/R words need binary branching below the root");
    word.turns.push_back(ch[0] == path[i] ? 'R' : 'L');
  }
  return word;
}

inline VertexId vertex_of(const PlaneTree& tree, const LRWord& word) {
  const auto& top = tree.children(PlaneTree::root());
  if (word.digit < 1 || word.digit > static_cast<int>(top.size()))
    throw Error(ErrorKind::NotInTree, "no root child " + std::to_string(word.digit));
  VertexId v = top[word.digit - 1];
  for (auto c : word.turns) {
    const auto& ch = tree.children(v);
    if (ch.size() != 2) throw Error(ErrorKind::NotInTree, "word " + word.to_string() + " leaves the tree");
    v = c == 'R' ? ch[0] : ch[1];
  }
  return v;
}

/// T(e) re-rooted at the child endpoint of e; the old parent becomes the first child.
inline PlaneTree subtree(const PlaneTree& tree, VertexId edge, std::vector<VertexId>* original_ids = nullptr) {
  edge_subtree_size(tree, edge);
  PlaneTree out;
  std::vector<VertexId> ids{edge};
  out.add_child(PlaneTree::root(), tree.color(edge));
  ids.push_back(*tree.parent(edge));
  std::vector<std::pair<VertexId, VertexId>> stack;  // (original, new)
  for (auto c : tree.children(edge)) {
    const auto nv = out.add_child(PlaneTree::root(), tree.color(c));
    ids.push_back(c);
    stack.emplace_back(c, nv);
  }
  // Breadth order keeps parents ahead of children.
  for (std::size_t i = 0; i < stack.size(); ++i) {
    const auto [orig, nv] = stack[i];
    for (auto c : tree.children(orig)) {
      const auto child = out.add_child(nv, tree.color(c));
      ids.push_back(c);
      stack.emplace_back(c, child);
    }
  }
  if (original_ids) *original_ids = std::move(ids);
  return out;
}

// ---------------------------------------------------------------------------
// JSON: nested {"children": [...], "color": "red" | "blue" | null}

inline nlohmann::json to_json(const PlaneTree& tree, VertexId v = PlaneTree::root()) {
  nlohmann::json node;
  const auto color = tree.color(v);
  node["color"] = color ? nlohmann::json(*color == Color::Red ? "red" : "blue") : nlohmann::json(nullptr);
  node["children"] = nlohmann::json::array();
  for (auto c : tree.children(v)) node["children"].push_back(to_json(tree, c));
  return node;
}

inline PlaneTree tree_from_json(const nlohmann::json& root) {
  PlaneTree tree;
  // Breadth order so parents precede children in id order.
  std::vector<std::pair<const nlohmann::json*, VertexId>> queue{{&root, PlaneTree::root()}};
  for (std::size_t i = 0; i < queue.size(); ++i) {
    const auto [node, id] = queue[i];
    if (!node->is_object() || !node->contains("children"))
      throw Error(ErrorKind::InvalidConfig, "tree node needs a children array");
    for (const auto& child : node->at("children")) {
      std::optional<Color> color;
      if (child.contains("color") && !child.at("color").is_null()) {
        const auto s = child.at("color").get<std::string>();
        if (s == "red") color = Color::Red;
        else if (s == "blue") color = Color::Blue;
        else throw Error(ErrorKind::InvalidConfig, "unknown color " + s);
      }
      queue.emplace_back(&child, tree.add_child(id, color));
    }
  }
  return tree;
}

}  // namespace truetrees
