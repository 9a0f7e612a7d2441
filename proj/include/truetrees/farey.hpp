#pragma once

// Farey tessellation of the upper half-plane addressed by L/R words, with
// exact rational vertices.

#include <algorithm>
#include <cmath>
#include <complex>
#include <random>
#include <string>
#include <vector>

#include <boost/multiprecision/cpp_int.hpp>

#include "truetrees/errors.hpp"
#include "truetrees/plane_tree.hpp"

namespace truetrees {

using BigInt = boost::multiprecision::cpp_int;

/// p/q in lowest terms with q >= 0; q == 0 is the point at infinity.
struct ExtRational {
  BigInt p = 0;
  BigInt q = 1;

  static ExtRational infinity() { return {1, 0}; }
  bool is_infinite() const { return q == 0; }

  double to_double() const {
    if (is_infinite()) return HUGE_VAL;
    return static_cast<double>(boost::multiprecision::cpp_rational(p, q));
  }

  std::string to_string() const { return is_infinite() ? "inf" : p.str() + "/" + q.str(); }

  friend bool operator==(const ExtRational&, const ExtRational&) = default;
};

inline ExtRational mediant(const ExtRational& a, const ExtRational& b) { return {a.p + b.p, a.q + b.q}; }

/// |ad - bc| for a = p1/q1, b = p2/q2; Farey neighbours give 1.
inline BigInt farey_determinant(const ExtRational& a, const ExtRational& b) {
  BigInt d = a.p * b.q - b.p * a.q;
  return d < 0 ? BigInt(-d) : d;
}

struct FareyTriangle {
  std::array<ExtRational, 3> v;  // increasing, the last may be infinite
  LRWord word;
};

inline FareyTriangle farey_root() { return {{ExtRational{0, 1}, ExtRational{1, 1}, ExtRational::infinity()}, {1, ""}}; }

/// Child across the edge (v0, v1) for L and (v1, v2) for R; the new vertex
/// is the mediant of the shared edge.
inline FareyTriangle farey_descend(const FareyTriangle& t, char turn) {
  FareyTriangle c;
  c.word = t.word;
  c.word.turns.push_back(turn);
  if (turn == 'L') c.v = {t.v[0], mediant(t.v[0], t.v[1]), t.v[1]};
  else if (turn == 'R') c.v = {t.v[1], mediant(t.v[1], t.v[2]), t.v[2]};
  else throw Error(ErrorKind::NotInTree, "turn must be L or R");
  return c;
}

/// Triangle of a word. The first generation is (0, 1/2, 1); the three root
/// digits are equivalent under the order-3 symmetry of the root triangle, so
/// every digit starts there.
inline FareyTriangle farey_triangle(const LRWord& word) {
  FareyTriangle t{{ExtRational{0, 1}, ExtRational{1, 2}, ExtRational{1, 1}}, {word.digit, ""}};
  for (char c : word.turns) t = farey_descend(t, c);
  return t;
}

/// Spread of the real vertices.
inline double farey_diameter(const FareyTriangle& t) {
  std::vector<double> xs;
  for (const auto& v : t.v)
    if (!v.is_infinite()) xs.push_back(v.to_double());
  if (xs.size() < 2) return HUGE_VAL;
  const auto [lo, hi] = std::minmax_element(xs.begin(), xs.end());
  return *hi - *lo;
}

inline double farey_diameter(const LRWord& word) { return farey_diameter(farey_triangle(word)); }

/// diam(child) / diam(parent) for the last turn of a nonempty word.
inline double farey_distortion(const LRWord& word) {
  if (word.turns.empty()) throw Error(ErrorKind::InvalidSize, "distortion needs at least one turn");
  LRWord parent = word;
  parent.turns.pop_back();
  return farey_diameter(word) / farey_diameter(parent);
}

/// sum_i log(1 + k_i) over the run lengths of the word.
inline double word_estimate(const LRWord& word) {
  double s = 0;
  for (int k : word.runs()) s += std::log1p(static_cast<double>(k));
  return s;
}

/// Adjacent vertices are Farey neighbours.
inline bool farey_valid(const FareyTriangle& t) {
  return farey_determinant(t.v[0], t.v[1]) == 1 && farey_determinant(t.v[1], t.v[2]) == 1 &&
         farey_determinant(t.v[0], t.v[2]) == 1;
}

/// Child's vertex interval lies inside the parent's.
inline bool farey_nested(const FareyTriangle& parent, const FareyTriangle& child) {
  auto le = [](const ExtRational& a, const ExtRational& b) {
    if (b.is_infinite()) return true;
    if (a.is_infinite()) return false;
    return a.p * b.q <= b.p * a.q;
  };
  return le(parent.v[0], child.v[0]) && le(child.v[2], parent.v[2]);
}

/// Upper half-plane to unit disk, (x - i) / (x + i); infinity goes to 1.
inline std::complex<double> farey_disk_point(const ExtRational& x) {
  if (x.is_infinite()) return 1.0;
  const std::complex<double> z(x.to_double(), 0.0);
  return (z - std::complex<double>(0, 1)) / (z + std::complex<double>(0, 1));
}

struct FareyRatioFit {
  double lo = HUGE_VAL;  // c1
  double hi = 0;         // c2
  int samples = 0;
  double spread() const { return hi / lo; }
};

/// log(1/diam) / word_estimate over random words of 1..max_len turns.
inline FareyRatioFit farey_ratio_fit(int count, int max_len, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_int_distribution<int> len(1, max_len);
  std::bernoulli_distribution coin(0.5);
  FareyRatioFit fit;
  for (int s = 0; s < count; ++s) {
    LRWord w;
    const int n = len(rng);
    for (int i = 0; i < n; ++i) w.turns.push_back(coin(rng) ? 'L' : 'R');
    const double ratio = -std::log(farey_diameter(w)) / word_estimate(w);
    fit.lo = std::min(fit.lo, ratio);
    fit.hi = std::max(fit.hi, ratio);
    ++fit.samples;
  }
  return fit;
}

/// All triangles down to `depth` turns below the first generation, as CSV.
inline std::string farey_table_csv(int depth) {
  if (depth < 0) throw Error(ErrorKind::InvalidConfig, "depth must be nonnegative");
  std::string out = "word,a,b,c,diameter,estimate\n";
  std::vector<FareyTriangle> level{farey_triangle(LRWord{1, ""})};
  for (int d = 0; d <= depth; ++d) {
    std::vector<FareyTriangle> next;
    for (const auto& t : level) {
      out += t.word.to_string() + "," + t.v[0].to_string() + "," + t.v[1].to_string() + "," + t.v[2].to_string() + "," +
             std::to_string(farey_diameter(t)) + "," + std::to_string(word_estimate(t.word)) + "\n";
      if (d < depth) {
        next.push_back(farey_descend(t, 'L'));
        next.push_back(farey_descend(t, 'R'));
      }
    }
    level = std::move(next);
  }
  return out;
}

}  // namespace truetrees
