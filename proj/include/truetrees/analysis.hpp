#pragma once

// Diagnostics across modules: Hausdorff distances, convergence series,
// harmonic vs Euclidean tables, partition counts and shadow sums.

#include <algorithm>
#include <cmath>
#include <complex>
#include <functional>
#include <limits>
#include <numbers>
#include <sstream>
#include <string>
#include <unordered_map>
#include <utility>
#include <vector>

#include "json.hpp"

#include "truetrees/errors.hpp"
#include "truetrees/farey.hpp"
#include "truetrees/limit_sets.hpp"
#include "truetrees/plane_tree.hpp"
#include "truetrees/regions.hpp"
#include "truetrees/shabat.hpp"
#include "truetrees/tracer.hpp"

namespace truetrees {

// ---------------------------------------------------------------------------
// Reports

struct Verdict {
  std::string name;
  bool pass = false;
  double value = 0;
  double threshold = 0;
  std::string relation;  // "<=", ">=", "==", "decreasing", ...
};

struct DiagnosticsReport {
  std::string name;
  nlohmann::json parameters = nlohmann::json::object();
  std::vector<std::pair<std::string, double>> series;
  std::vector<Verdict> verdicts;

  void add(std::string label, double value) { series.emplace_back(std::move(label), value); }

  const Verdict& check(std::string check_name, double value, std::string relation, double threshold) {
    bool ok = false;
    if (relation == "<=") ok = value <= threshold;
    else if (relation == "<") ok = value < threshold;
    else if (relation == ">=") ok = value >= threshold;
    else if (relation == ">") ok = value > threshold;
    else if (relation == "==") ok = value == threshold;
    else throw Error(ErrorKind::InvalidConfig, "unknown relation " + relation);
    verdicts.push_back({std::move(check_name), ok, value, threshold, std::move(relation)});
    return verdicts.back();
  }

  bool all_pass() const {
    return std::all_of(verdicts.begin(), verdicts.end(), [](const Verdict& v) { return v.pass; });
  }

  double value(const std::string& label) const {
    for (const auto& [l, v] : series)
      if (l == label) return v;
    throw Error(ErrorKind::NotInTree, "no series entry " + label);
  }

  nlohmann::json to_json() const {
    nlohmann::json j;
    j["name"] = name;
    j["parameters"] = parameters;
    j["series"] = nlohmann::json::array();
    for (const auto& [l, v] : series) j["series"].push_back({{"label", l}, {"value", v}});
    j["verdicts"] = nlohmann::json::array();
    for (const auto& v : verdicts)
      j["verdicts"].push_back(
          {{"check", v.name}, {"pass", v.pass}, {"value", v.value}, {"relation", v.relation}, {"threshold", v.threshold}});
    j["pass"] = all_pass();
    return j;
  }

  std::string to_csv() const {
    std::ostringstream out;
    out.precision(12);
    out << "kind,label,value,relation,threshold,pass\n";
    for (const auto& [l, v] : series) out << "series," << l << "," << v << ",,,\n";
    for (const auto& v : verdicts)
      out << "verdict," << v.name << "," << v.value << "," << v.relation << "," << v.threshold << ","
          << (v.pass ? "pass" : "fail") << "\n";
    return out.str();
  }
};

// ---------------------------------------------------------------------------
// Hausdorff distance

/// Uniform bucket grid for nearest-neighbour queries on a point cloud.
class NearestIndex {
 public:
  explicit NearestIndex(const PointCloud& pts) : pts_(pts) {
    if (pts_.empty()) throw Error(ErrorKind::EmptyInput, "nearest-neighbour index needs points");
    lo_ = hi_ = pts_.front();
    for (auto z : pts_) {
      lo_ = {std::min(lo_.real(), z.real()), std::min(lo_.imag(), z.imag())};
      hi_ = {std::max(hi_.real(), z.real()), std::max(hi_.imag(), z.imag())};
    }
    const double span = std::max({hi_.real() - lo_.real(), hi_.imag() - lo_.imag(), 1e-12});
    cell_ = span / std::max(1.0, std::sqrt(static_cast<double>(pts_.size())));
    nx_ = static_cast<long>((hi_.real() - lo_.real()) / cell_) + 1;
    ny_ = static_cast<long>((hi_.imag() - lo_.imag()) / cell_) + 1;
    for (std::size_t i = 0; i < pts_.size(); ++i) buckets_[key(ix(pts_[i]), iy(pts_[i]))].push_back(i);
  }

  double distance(Complex q) const {
    const long cx = std::clamp(ix(q), 0L, nx_ - 1), cy = std::clamp(iy(q), 0L, ny_ - 1);
    double best = std::numeric_limits<double>::infinity();
    const long rings = std::max(nx_, ny_);
    for (long r = 0; r <= rings; ++r) {
      // ring r lies outside the block of cells within r - 1 of (cx, cy)
      if (r > 0) {
        const double x0 = lo_.real() + (cx - r + 1) * cell_, x1 = lo_.real() + (cx + r) * cell_;
        const double y0 = lo_.imag() + (cy - r + 1) * cell_, y1 = lo_.imag() + (cy + r) * cell_;
        const bool inside = q.real() > x0 && q.real() < x1 && q.imag() > y0 && q.imag() < y1;
        const double gap = inside ? std::min({q.real() - x0, x1 - q.real(), q.imag() - y0, y1 - q.imag()}) : 0.0;
        if (gap > best) break;
      }
      for (long x = cx - r; x <= cx + r; ++x)
        for (long y = cy - r; y <= cy + r; ++y) {
          if (std::max(std::abs(x - cx), std::abs(y - cy)) != r) continue;
          if (x < 0 || y < 0 || x >= nx_ || y >= ny_) continue;
          auto it = buckets_.find(key(x, y));
          if (it == buckets_.end()) continue;
          for (auto i : it->second) best = std::min(best, std::abs(pts_[i] - q));
        }
    }
    return best;
  }

 private:
  long ix(Complex z) const { return static_cast<long>(std::floor((z.real() - lo_.real()) / cell_)); }
  long iy(Complex z) const { return static_cast<long>(std::floor((z.imag() - lo_.imag()) / cell_)); }
  static long long key(long x, long y) { return (static_cast<long long>(x) << 32) ^ static_cast<long long>(y & 0xffffffff); }

  PointCloud pts_;
  Complex lo_, hi_;
  double cell_ = 1;
  long nx_ = 1, ny_ = 1;
  std::unordered_map<long long, std::vector<std::size_t>> buckets_;
};

/// sup over a in A of the distance from a to B.
inline double directed_hausdorff(const PointCloud& a, const PointCloud& b) {
  if (a.empty() || b.empty()) throw Error(ErrorKind::EmptyInput, "Hausdorff distance needs nonempty clouds");
  const NearestIndex index(b);
  double h = 0;
  for (auto z : a) h = std::max(h, index.distance(z));
  return h;
}

inline double hausdorff(const PointCloud& a, const PointCloud& b) {
  return std::max(directed_hausdorff(a, b), directed_hausdorff(b, a));
}

// ---------------------------------------------------------------------------
// Frames

/// Residual rotation (at most pi/N) taking the root's second child onto the
/// negative real axis; odd-symmetric trees can only reach it up to half a step.
inline double frame_angle(const ShabatModel& model) {
  const auto& tree = model.tree();
  const auto& top = tree.children(PlaneTree::root());
  if (top.empty()) return 0;
  const VertexId c = top.size() >= 2 ? top[1] : top[0];
  const auto& pos = model.vertex_positions();
  const double a = std::arg(pos[c] - pos[PlaneTree::root()]);
  const double rot = std::remainder(std::numbers::pi - a, 2 * std::numbers::pi);
  return std::abs(rot) <= std::numbers::pi / model.degree() + 1e-9 ? rot : 0.0;
}

inline PointCloud rotate(const PointCloud& pts, double angle) {
  const Complex w = std::polar(1.0, angle);
  PointCloud out;
  out.reserve(pts.size());
  for (auto z : pts) out.push_back(w * z);
  return out;
}

inline PointCloud scale(const PointCloud& pts, double s) {
  PointCloud out;
  out.reserve(pts.size());
  for (auto z : pts) out.push_back(s * z);
  return out;
}

/// p evaluated in the aligned frame.
inline Complex evaluate_aligned(const ShabatModel& model, Complex z) {
  return model.evaluate(std::polar(1.0, -frame_angle(model)) * z);
}

inline PointCloud tree_cloud(const TracedTree& traced) {
  PointCloud pts;
  for (const auto& poly : traced.edge_polylines) pts.insert(pts.end(), poly.begin(), poly.end());
  return pts;
}

/// Solved model with its tracing and aligned clouds.
struct TracedModel {
  const ShabatModel* model = nullptr;
  TracedTree traced;
  double angle = 0;
  PointCloud tree;    // aligned
  PointCloud lambda;  // aligned

  static TracedModel make(const ShabatModel& m, double step = 0.02) {
    TracedModel t;
    t.model = &m;
    t.traced = trace_tree(m, m.tree(), step);
    t.angle = frame_angle(m);
    t.tree = rotate(tree_cloud(t.traced), t.angle);
    RegionBuilder rb(m, t.traced);
    t.lambda = rotate(rb.lambda_curve().boundary, t.angle);
    return t;
  }
};

// ---------------------------------------------------------------------------
// Limit comparisons

/// The developed deltoid has capacity 2; trees are compared with Omega / 2.
inline constexpr double kDeltoidFrameScale = 0.5;

inline DiagnosticsReport tree_vs_deltoid_report(const std::vector<ShabatModel>& models, const PointCloud& omega_cloud,
                                                const DeltoidParams& oracle = {}, double step = 0.02) {
  if (models.empty() || omega_cloud.empty()) throw Error(ErrorKind::EmptyInput, "need models and an oracle cloud");
  DiagnosticsReport r;
  r.name = "tree_vs_deltoid";
  r.parameters = {{"k_max", oracle.k_max},
                  {"escape_radius", oracle.escape_radius},
                  {"cloud_points", omega_cloud.size()},
                  {"frame_scale", kDeltoidFrameScale},
                  {"trace_step", step}};
  std::vector<TracedModel> traced;
  for (const auto& m : models) traced.push_back(TracedModel::make(m, step));
  const PointCloud boundary = scale(omega_cloud, kDeltoidFrameScale);
  PointCloud reference = boundary;
  reference.insert(reference.end(), traced.back().tree.begin(), traced.back().tree.end());

  std::vector<double> dh;
  nlohmann::json degrees = nlohmann::json::array();
  for (const auto& t : traced) {
    const std::string n = std::to_string(t.model->degree());
    degrees.push_back(t.model->degree());
    dh.push_back(hausdorff(t.lambda, boundary));
    r.add("dH_lambda_boundary[N=" + n + "]", dh.back());
    PointCloud both = t.tree;
    both.insert(both.end(), t.lambda.begin(), t.lambda.end());
    r.add("dH_self_consistency[N=" + n + "]", hausdorff(both, reference));
  }
  r.parameters["degrees"] = degrees;
  if (dh.size() >= 2) {
    double worst = -HUGE_VAL;
    for (std::size_t i = 1; i < dh.size(); ++i) worst = std::max(worst, dh[i] - dh[i - 1]);
    r.check("dH_lambda_boundary decreasing (max increment)", worst, "<", 0.0);
  }
  const auto& last = traced.back().tree;
  std::size_t inside = 0;
  for (auto z : last)
    if (developed_deltoid_membership(z / kDeltoidFrameScale, oracle) != Membership::Exterior) ++inside;
  const double frac = static_cast<double>(inside) / static_cast<double>(last.size());
  r.add("interiority_fraction", frac);
  r.check("interiority fraction", frac, ">=", 0.99);
  return r;
}

/// Bounded, or some point within `band` of z is Bounded.
inline bool bounded_within(Complex z, double band, int max_iter = 2000) {
  if (cauliflower_membership(z, max_iter) == Orbit::Bounded) return true;
  for (int k = 0; k < 16; ++k)
    if (cauliflower_membership(z + std::polar(band, 2 * std::numbers::pi * k / 16), max_iter) == Orbit::Bounded)
      return true;
  return false;
}

/// Bounded and at least `margin` from the escaping set (checked on a ring).
inline bool cauliflower_interior(Complex z, double margin = 1e-2, int max_iter = 2000) {
  if (cauliflower_membership(z, max_iter) != Orbit::Bounded) return false;
  for (int k = 0; k < 16; ++k)
    if (cauliflower_membership(z + std::polar(margin, 2 * std::numbers::pi * k / 16), max_iter) != Orbit::Bounded)
      return false;
  return true;
}

inline DiagnosticsReport tree_vs_cauliflower_report(const std::vector<ShabatModel>& models, const PointCloud& julia_cloud,
                                                    double band = 1e-2, double step = 0.02) {
  if (models.empty() || julia_cloud.empty()) throw Error(ErrorKind::EmptyInput, "need models and an oracle cloud");
  DiagnosticsReport r;
  r.name = "tree_vs_cauliflower";
  r.parameters = {{"cloud_points", julia_cloud.size()}, {"twig_band", band}, {"trace_step", step}};
  std::vector<TracedModel> traced;
  for (const auto& m : models) traced.push_back(TracedModel::make(m, step));
  std::vector<double> dh;
  for (const auto& t : traced) {
    const std::string n = std::to_string(t.model->degree());
    dh.push_back(hausdorff(t.lambda, julia_cloud));
    r.add("dH_lambda_julia[N=" + n + "]", dh.back());
  }
  if (dh.size() >= 2) {
    double worst = -HUGE_VAL;
    for (std::size_t i = 1; i < dh.size(); ++i) worst = std::max(worst, dh[i] - dh[i - 1]);
    r.check("dH_lambda_julia decreasing (max increment)", worst, "<", 0.0);
  }
  const auto& last = traced.back();
  const auto& tree = last.model->tree();
  const Complex w = std::polar(1.0, last.angle);
  std::size_t red = 0, red_ok = 0, all = 0, all_ok = 0;
  for (VertexId e = 1; e < tree.vertex_count(); ++e) {
    const bool is_red = tree.color(e) && *tree.color(e) == Color::Red;
    for (auto z : last.traced.edge_polylines[e]) {
      const bool ok = bounded_within(w * z, band);
      ++all;
      all_ok += ok;
      if (is_red) {
        ++red;
        red_ok += ok;
      }
    }
  }
  r.add("tree_bounded_fraction", static_cast<double>(all_ok) / all);
  r.add("red_twig_points", static_cast<double>(red));
  const double twig = red ? static_cast<double>(red_ok) / red : 1.0;
  r.add("red_twig_bounded_fraction", twig);
  r.check("red twig points bounded within band", twig, ">=", 1.0);
  return r;
}

// ---------------------------------------------------------------------------
// Harmonic vs Euclidean distances between leaves

inline double circular_distance(double a, double b) {
  return std::abs(std::remainder(a - b, 2 * std::numbers::pi));
}

inline DiagnosticsReport harmonic_vs_euclid_table(const ShabatModel& model, const TracedTree& traced) {
  const auto& tree = model.tree();
  const auto leaves = leaves_in_walk_order(traced, tree);
  if (leaves.size() < 2) throw Error(ErrorKind::InvalidSize, "need at least two leaves");
  struct Pair {
    double harmonic, euclid;
  };
  std::vector<Pair> pairs;
  for (std::size_t i = 0; i < leaves.size(); ++i)
    for (std::size_t j = i + 1; j < leaves.size(); ++j)
      pairs.push_back({circular_distance(tip_prime_end(tree, traced, leaves[i]), tip_prime_end(tree, traced, leaves[j])),
                       std::abs(traced.vertex_positions[leaves[i]] - traced.vertex_positions[leaves[j]])});
  DiagnosticsReport r;
  r.name = "harmonic_vs_euclid";
  r.parameters = {{"degree", model.degree()}, {"leaves", leaves.size()}, {"pairs", pairs.size()}};
  const double unit = 2 * std::numbers::pi / model.degree();
  double prev_max = -1, worst_drop = 0, min_floor = HUGE_VAL;
  for (double eta = 2 * unit; eta <= std::numbers::pi + 1e-12; eta *= 2) {
    double mx = 0, mn = HUGE_VAL;
    for (const auto& p : pairs) {
      if (p.harmonic < eta) mx = std::max(mx, p.euclid);
      if (p.harmonic > eta) mn = std::min(mn, p.euclid);
    }
    std::ostringstream tag;
    tag.precision(6);
    tag << eta;
    r.add("max_dist[d_omega<" + tag.str() + "]", mx);
    if (std::isfinite(mn)) {
      r.add("min_dist[d_omega>" + tag.str() + "]", mn);
      min_floor = std::min(min_floor, mn);
    }
    if (prev_max >= 0) worst_drop = std::max(worst_drop, prev_max - mx);
    prev_max = mx;
  }
  double top = 0;
  for (const auto& p : pairs) top = std::max(top, p.harmonic);
  double at_top = HUGE_VAL;
  for (const auto& p : pairs)
    if (p.harmonic >= top - 1e-9) at_top = std::min(at_top, p.euclid);
  r.add("max_d_omega", top);
  r.add("min_dist_at_max_d_omega", at_top);
  r.check("max envelope nondecreasing in eta (largest drop)", worst_drop, "<=", 0.0);
  // tiny trees have no eta in range; fall back to the farthest pairs
  r.check("min envelope bounded below", std::isfinite(min_floor) ? min_floor : at_top, ">", 0.0);
  return r;
}

// ---------------------------------------------------------------------------
// Pointwise convergence of Shabat polynomials

enum class LimitReference { None, Cauliflower };

inline DiagnosticsReport shabat_pointwise_convergence(const std::vector<ShabatModel>& models, const PointCloud& samples,
                                                      LimitReference reference,
                                                      const std::function<bool(Complex)>& in_domain = {},
                                                      double ref_tol = 1e-2) {
  if (models.empty() || samples.empty()) throw Error(ErrorKind::EmptyInput, "need models and samples");
  for (auto z : samples)
    if (in_domain && !in_domain(z)) throw Error(ErrorKind::OutOfDomain, "sample outside the common interior region");
  DiagnosticsReport r;
  r.name = "shabat_pointwise";
  r.parameters = {{"samples", samples.size()},
                  {"reference", reference == LimitReference::Cauliflower ? "cos(pi psi)" : "none"},
                  {"models", models.size()}};
  std::vector<std::vector<Complex>> values(models.size());
  for (std::size_t k = 0; k < models.size(); ++k)
    for (auto z : samples) values[k].push_back(evaluate_aligned(models[k], z));

  if (models.size() >= 3) {
    std::size_t good = 0;
    for (std::size_t s = 0; s < samples.size(); ++s) {
      bool ok = true;
      for (std::size_t k = 0; k + 2 < models.size(); ++k) {
        const double d0 = std::abs(values[k + 1][s] - values[k][s]);
        const double d1 = std::abs(values[k + 2][s] - values[k + 1][s]);
        if (d1 * 1.5 > d0 && d1 > 1e-12) ok = false;
      }
      good += ok;
    }
    const double frac = static_cast<double>(good) / samples.size();
    r.add("cauchy_fraction", frac);
    r.check("Cauchy decrease by 1.5 per step", frac, ">=", 0.9);
  }
  for (std::size_t k = 0; k + 1 < models.size(); ++k) {
    double mx = 0;
    for (std::size_t s = 0; s < samples.size(); ++s) mx = std::max(mx, std::abs(values[k + 1][s] - values[k][s]));
    r.add("max|p_next-p|[N=" + std::to_string(models[k].degree()) + "]", mx);
  }
  if (reference == LimitReference::Cauliflower) {
    for (std::size_t k = 0; k < models.size(); ++k) {
      double mx = 0;
      for (std::size_t s = 0; s < samples.size(); ++s)
        mx = std::max(mx, std::abs(values[k][s] - cauliflower_limit_function(samples[s])));
      r.add("max|p-cos(pi psi)|[N=" + std::to_string(models[k].degree()) + "]", mx);
      if (k + 1 == models.size()) r.check("reference error at final N", mx, "<", ref_tol);
    }
  }
  return r;
}

// ---------------------------------------------------------------------------
// Exterior partition counts

/// Walk positions of the order-j cusps: the three prime ends between root
/// children (order 0) and the middle prime ends of depth-j vertices.
inline std::vector<std::pair<int, std::size_t>> cusp_positions(const PlaneTree& tree, const HalfEdgeWalk& walk, int k) {
  auto side = [&](VertexId from, VertexId to) {
    for (std::size_t i = 0; i < walk.size(); ++i)
      if (walk[i].from == from && walk[i].to == to) return i;
    throw Error(ErrorKind::NotInTree, "side missing from walk");
  };
  std::vector<std::pair<int, std::size_t>> out;
  for (auto c : tree.children(PlaneTree::root()))
    out.emplace_back(0, side(PlaneTree::root(), tree.next_ccw(PlaneTree::root(), c)));
  for (VertexId v = 1; v < tree.vertex_count(); ++v) {
    const int d = tree.depth(v);
    if (d > k || tree.children(v).size() < 2) continue;
    out.emplace_back(d, side(v, tree.next_ccw(v, tree.children(v).front())));
  }
  return out;
}

inline DiagnosticsReport partition_counts(const PlaneTree& tree, int k) {
  if (k < 0) throw Error(ErrorKind::InvalidConfig, "order must be nonnegative");
  if (tree.height() <= k) throw Error(ErrorKind::DepthTooSmall, "tree depth must exceed the order");
  const auto walk = boundary_walk(tree);
  auto cusps = cusp_positions(tree, walk, k);
  DiagnosticsReport r;
  r.name = "partition_counts";
  r.parameters = {{"order", k}, {"depth", tree.height()}, {"half_edges", walk.size()}};
  for (int j = 0; j <= k; ++j) {
    const auto count = std::count_if(cusps.begin(), cusps.end(), [&](const auto& c) { return c.first == j; });
    const double expected = j == 0 ? 3.0 : 3.0 * std::ldexp(1.0, j - 1);
    r.add("horoballs[order=" + std::to_string(j) + "]", static_cast<double>(count));
    r.check("horoball count order " + std::to_string(j), static_cast<double>(count), "==", expected);
  }
  std::vector<std::size_t> pos;
  for (const auto& c : cusps) pos.push_back(c.second);
  std::sort(pos.begin(), pos.end());
  std::vector<std::size_t> arcs;
  for (std::size_t i = 0; i < pos.size(); ++i) {
    const std::size_t next = i + 1 < pos.size() ? pos[i + 1] : pos[0] + walk.size();
    arcs.push_back(next - pos[i]);
  }
  const auto [lo, hi] = std::minmax_element(arcs.begin(), arcs.end());
  r.add("arcs", static_cast<double>(arcs.size()));
  r.add("arc_min", static_cast<double>(*lo));
  r.add("arc_max", static_cast<double>(*hi));
  r.add("measured_C", k > 0 ? static_cast<double>(*hi - *lo) / k : 0.0);
  r.check("half-edge counts differ by at most 4k", static_cast<double>(*hi - *lo), "<=", 4.0 * k);
  return r;
}

// ---------------------------------------------------------------------------
// Region-based quantities

/// Sum over vertices v of diam^2 V(vRL) + diam^2 V(vLR); V of a leaf counts 0.
inline double shadow_square_sum(const ShabatModel& model, const TracedTree& traced) {
  const auto& tree = model.tree();
  RegionBuilder rb(model, traced);
  auto term = [&](VertexId w) {
    if (tree.is_leaf(w)) return 0.0;
    const double d = rb.v_region(w).diameter();
    return d * d;
  };
  double sum = 0;
  for (VertexId v = 1; v < tree.vertex_count(); ++v) {
    const auto& ch = tree.children(v);
    if (ch.size() != 2) continue;
    const auto& r = tree.children(ch[0]);
    const auto& l = tree.children(ch[1]);
    if (r.size() == 2) sum += term(r[1]);  // vRL
    if (l.size() == 2) sum += term(l[0]);  // vLR
  }
  return sum;
}

inline double edge_diameter_by_word(const PlaneTree& tree, const TracedTree& traced, const LRWord& word) {
  return edge_diameter(traced, vertex_of(tree, word));
}

/// Largest ratio of diameters of two edges sharing a vertex.
inline double adjacent_edge_ratio(const PlaneTree& tree, const TracedTree& traced) {
  double worst = 1;
  for (VertexId v = 0; v < tree.vertex_count(); ++v) {
    std::vector<double> d;
    if (v != PlaneTree::root()) d.push_back(edge_diameter(traced, v));
    for (auto c : tree.children(v)) d.push_back(edge_diameter(traced, c));
    if (d.size() < 2) continue;
    const auto [lo, hi] = std::minmax_element(d.begin(), d.end());
    worst = std::max(worst, *hi / *lo);
  }
  return worst;
}

/// Both sides of every bisected sub-arc of every edge see the same harmonic
/// measure |d arccos p| / N; returns the largest discrepancy.
inline double relative_harmonic_discrepancy(const ShabatModel& model, const TracedTree& traced, int levels = 3) {
  const double n = model.degree();
  auto theta = [&](Complex q) { return std::acos(std::clamp(model.evaluate(q).real(), -1.0, 1.0)); };
  double worst = 0;
  for (std::size_t e = 1; e < traced.edge_polylines.size(); ++e) {
    const auto& poly = traced.edge_polylines[e];
    if (poly.size() < 2) continue;
    std::vector<double> t;
    for (auto q : poly) t.push_back(theta(q));
    const std::size_t pieces = std::size_t(1) << levels;
    for (std::size_t k = 0; k < pieces; ++k) {
      const std::size_t a = k * (poly.size() - 1) / pieces, b = (k + 1) * (poly.size() - 1) / pieces;
      if (a == b) continue;
      double left = 0, right = 0;
      for (std::size_t i = a; i < b; ++i) left += std::abs(t[i + 1] - t[i]) / n;
      for (std::size_t i = b; i > a; --i) right += std::abs(t[i - 1] - t[i]) / n;
      double imag = 0;
      for (std::size_t i = a; i <= b; ++i) imag = std::max(imag, std::abs(model.evaluate(poly[i]).imag()));
      worst = std::max({worst, std::abs(left - right), imag / n});
    }
  }
  return worst;
}

// ---------------------------------------------------------------------------
// Farey diameter law

inline DiagnosticsReport farey_report(int samples = 10000, int max_len = 40, std::uint64_t seed = 1, int max_run = 64) {
  DiagnosticsReport r;
  r.name = "farey_diameter_law";
  r.parameters = {{"samples", samples}, {"max_len", max_len}, {"seed", seed}, {"max_run", max_run}};
  const auto fit = farey_ratio_fit(samples, max_len, seed);
  r.add("c1", fit.lo);
  r.add("c2", fit.hi);
  r.check("ratio interval c2/c1", fit.spread(), "<=", 10.0);
  double lo = HUGE_VAL, hi = 0;
  for (int k = 1; k <= max_run; ++k) {
    const double ratio = farey_diameter(LRWord{1, std::string(k, 'L')}) * (k + 1);
    lo = std::min(lo, ratio);
    hi = std::max(hi, ratio);
  }
  r.add("pure_run_ratio_min", lo);
  r.add("pure_run_ratio_max", hi);
  r.check("pure runs: diam*(k+1) >= 1/2", lo, ">=", 0.5);
  r.check("pure runs: diam*(k+1) <= 2", hi, "<=", 2.0);
  return r;
}

}  // namespace truetrees
