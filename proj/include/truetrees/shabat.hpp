#pragma once

// Shabat polynomials in hydrodynamic normalization.
//
//   p(w) = (N/2) * integral_0^w prod_i (z - v_i)^{m_i} dz + C,   m_i = deg(v_i) - 1
//
// The leading coefficient is 1/2 by construction; the w^{N-1} coefficient is
// -(N/2) sum m_i v_i / (N-1), which vanishes because one critical point is
// always eliminated through sum m_i v_i = 0.
//
// Values are never taken from expanded coefficients: for N in the hundreds the
// coefficients span dozens of orders of magnitude. Instead p is propagated
// along tree edges by Gauss-Legendre quadrature of the factored derivative,
// which is exact for polynomials of this degree and only ever integrates
// where |p'| is moderate.

#include <algorithm>
#include <cmath>
#include <complex>
#include <limits>
#include <optional>
#include <vector>

#include <Eigen/Dense>

#include "truetrees/errors.hpp"
#include "truetrees/gauss_legendre.hpp"
#include "truetrees/plane_tree.hpp"

namespace truetrees {

using Complex = std::complex<double>;

/// Running product with a separate binary exponent; long products of
/// moderate factors neither overflow nor underflow midway.
class ScaledProduct {
 public:
  explicit ScaledProduct(Complex start = 1.0) : mantissa_(start) {}

  ScaledProduct& operator*=(Complex f) {
    mantissa_ *= f;
    if (++count_ % 16 == 0) renormalize();
    return *this;
  }

  Complex value() const {
    return {std::ldexp(mantissa_.real(), exponent_), std::ldexp(mantissa_.imag(), exponent_)};
  }

 private:
  void renormalize() {
    const double mag = std::max(std::abs(mantissa_.real()), std::abs(mantissa_.imag()));
    if (mag == 0 || !std::isfinite(mag)) return;
    int e = 0;
    std::frexp(mag, &e);
    mantissa_ = {std::ldexp(mantissa_.real(), -e), std::ldexp(mantissa_.imag(), -e)};
    exponent_ += e;
  }

  Complex mantissa_;
  int exponent_ = 0;
  int count_ = 0;
};

struct SolveOptions {
  double tol = 1e-12;
  int max_iter = 200;
  double damping = 0.5;
  int max_halvings = 40;
  // Polyline step as a fraction of the tree diameter.
  double trace_step = 0.02;
  // Bisection depth for intermediate trees when a continuation step fails.
  int max_refinements = 4;

  void validate() const {
    if (!(tol > 0)) throw Error(ErrorKind::InvalidConfig, "tol must be positive");
    if (max_iter < 1) throw Error(ErrorKind::InvalidConfig, "max_iter must be >= 1");
    if (!(damping > 0 && damping < 1)) throw Error(ErrorKind::InvalidConfig, "damping must lie in (0, 1)");
  }
};

struct SolveInfo {
  int iterations = 0;
  double residual = std::numeric_limits<double>::infinity();
  // 1 / rcond of the final Newton matrix (LU estimate).
  double condition_estimate = 1.0;
  int refinements = 0;
};

class ShabatModel {
 public:
  ShabatModel() = default;

  /// Builds the model for `tree` from critical point positions (indexed by
  /// vertex id, only internal vertices are read) and the constant term.
  /// The positions are translated so that sum m_i v_i = 0.
  ShabatModel(PlaneTree tree, const std::vector<Complex>& positions, Complex constant,
              std::vector<int> signs)
      : tree_(std::move(tree)), signs_(std::move(signs)), constant_(constant) {
    if (tree_.edge_count() < 1) throw Error(ErrorKind::InvalidSize, "tree needs at least one edge");
    if (static_cast<int>(signs_.size()) != tree_.vertex_count() ||
        static_cast<int>(positions.size()) != tree_.vertex_count())
      throw Error(ErrorKind::IndexMismatch, "positions and signs must cover every vertex");
    degree_ = tree_.edge_count();
    crit_ids_ = tree_.internal_vertices();
    crit_index_.assign(tree_.vertex_count(), -1);
    for (std::size_t i = 0; i < crit_ids_.size(); ++i) {
      crit_index_[crit_ids_[i]] = static_cast<int>(i);
      multiplicity_.push_back(tree_.degree(crit_ids_[i]) - 1);
    }
    // Internal vertices are connected; the first one (smallest id) is nearest the root.
    integration_parent_.assign(crit_ids_.size(), -1);
    for (std::size_t i = 1; i < crit_ids_.size(); ++i)
      integration_parent_[i] = crit_index_[*tree_.parent(crit_ids_[i])];
    crit_points_.resize(crit_ids_.size());
    for (std::size_t i = 0; i < crit_ids_.size(); ++i) crit_points_[i] = positions[crit_ids_[i]];
    rule_ = gauss_legendre(degree_ / 2 + 2);
    if (!crit_ids_.empty()) {
      Complex weighted = 0;
      int total = 0;
      for (std::size_t i = 0; i < crit_points_.size(); ++i) {
        weighted += double(multiplicity_[i]) * crit_points_[i];
        total += multiplicity_[i];
      }
      const Complex shift = weighted / double(total);
      for (auto& v : crit_points_) v -= shift;
      enforce_gauge();
    } else {
      constant_ = 0;  // N = 1: the constant is the w^{N-1} coefficient
    }
    vertex_positions_.assign(tree_.vertex_count(), Complex(std::numeric_limits<double>::quiet_NaN(), 0));
    for (std::size_t i = 0; i < crit_ids_.size(); ++i) vertex_positions_[crit_ids_[i]] = crit_points_[i];
    refresh_values();
  }

  const PlaneTree& tree() const noexcept { return tree_; }
  int degree() const noexcept { return degree_; }
  Complex constant() const noexcept { return constant_; }
  const std::vector<int>& signs() const noexcept { return signs_; }
  const std::vector<VertexId>& crit_ids() const noexcept { return crit_ids_; }
  const std::vector<Complex>& crit_points() const noexcept { return crit_points_; }
  const std::vector<int>& multiplicities() const noexcept { return multiplicity_; }
  /// p evaluated at each critical point (same order as crit_ids()).
  const std::vector<Complex>& crit_values() const noexcept { return crit_values_; }
  int crit_index(VertexId v) const { return crit_index_.at(v); }
  const SolveInfo& info() const noexcept { return info_; }
  SolveInfo& info() noexcept { return info_; }

  /// Vertex positions by id. Leaf entries are NaN until the tree has been traced.
  const std::vector<Complex>& vertex_positions() const noexcept { return vertex_positions_; }
  bool leaves_known() const {
    return std::all_of(vertex_positions_.begin(), vertex_positions_.end(),
                       [](Complex z) { return std::isfinite(z.real()); });
  }
  /// Zeros of p (edge midpoints) by edge id; empty until traced.
  const std::vector<Complex>& zeros() const noexcept { return zeros_; }

  void set_traced(std::vector<Complex> vertex_positions, std::vector<Complex> zeros) {
    vertex_positions_ = std::move(vertex_positions);
    zeros_ = std::move(zeros);
  }

  // -- parameter vector: free critical points (all but index 0) followed by C --

  int unknown_count() const noexcept { return static_cast<int>(crit_ids_.size()); }

  Eigen::VectorXcd parameters() const {
    Eigen::VectorXcd x(unknown_count());
    for (int i = 1; i < unknown_count(); ++i) x(i - 1) = crit_points_[i];
    if (unknown_count() > 0) x(unknown_count() - 1) = constant_;
    return x;
  }

  void set_parameters(const Eigen::VectorXcd& x) {
    for (int i = 1; i < unknown_count(); ++i) crit_points_[i] = x(i - 1);
    constant_ = x(unknown_count() - 1);
    enforce_gauge();
    for (std::size_t i = 0; i < crit_ids_.size(); ++i) vertex_positions_[crit_ids_[i]] = crit_points_[i];
    std::fill(zeros_.begin(), zeros_.end(), Complex(std::numeric_limits<double>::quiet_NaN(), 0));
    refresh_values();
  }

  // -- evaluation --

  /// (N/2) prod (w - v_i)^{m_i}
  Complex derivative(Complex w) const {
    if (crit_ids_.empty()) return 0.5;
    ScaledProduct q(0.5 * degree_);
    for (std::size_t i = 0; i < crit_points_.size(); ++i) q *= ipow(w - crit_points_[i], multiplicity_[i]);
    return q.value();
  }

  /// integral_a^b p'(z) dz with a rule of `nodes` points (exact if nodes >= N/2).
  Complex integrate(Complex a, Complex b, const GaussRule& rule) const {
    const Complex mid = 0.5 * (a + b);
    const Complex half = 0.5 * (b - a);
    Complex sum = 0;
    for (std::size_t k = 0; k < rule.size(); ++k) sum += rule.weights[k] * derivative(mid + half * rule.nodes[k]);
    return sum * half;
  }
  Complex integrate(Complex a, Complex b) const { return integrate(a, b, rule_); }

  /// p(w). Uses the zero product when the model has been traced, otherwise
  /// integrates from the nearest critical point.
  Complex evaluate(Complex w) const {
    if (crit_ids_.empty()) return 0.5 * w;
    if (!zeros_.empty() && std::isfinite(zeros_.back().real())) {
      ScaledProduct prod(0.5);
      for (std::size_t e = 1; e < zeros_.size(); ++e) prod *= (w - zeros_[e]);
      return prod.value();
    }
    std::size_t best = 0;
    for (std::size_t i = 1; i < crit_points_.size(); ++i)
      if (std::abs(w - crit_points_[i]) < std::abs(w - crit_points_[best])) best = i;
    return crit_values_[best] + integrate(crit_points_[best], w);
  }

  Complex evaluate_derivative(Complex w) const { return derivative(w); }

  /// a_N, ..., a_0 from exact convolution of the factored derivative.
  std::vector<Complex> coefficients() const {
    // c holds prod (w - v_i)^{m_i}, lowest degree first.
    std::vector<Complex> c{1.0};
    for (std::size_t i = 0; i < crit_points_.size(); ++i) {
      for (int r = 0; r < multiplicity_[i]; ++r) {
        std::vector<Complex> next(c.size() + 1, 0.0);
        for (std::size_t k = 0; k < c.size(); ++k) {
          next[k + 1] += c[k];
          next[k] -= crit_points_[i] * c[k];
        }
        c = std::move(next);
      }
    }
    std::vector<Complex> low(degree_ + 1, 0.0);
    low[0] = constant_;
    for (std::size_t k = 0; k < c.size(); ++k) low[k + 1] = 0.5 * degree_ * c[k] / double(k + 1);
    low[degree_] = 0.5;
    if (degree_ >= 2) low[degree_ - 1] = 0.0;
    return {low.rbegin(), low.rend()};
  }

  // -- Newton system --

  /// [p(v_i) - sign(v_i)] over internal vertices.
  Eigen::VectorXcd residual() const {
    Eigen::VectorXcd r(unknown_count());
    for (int i = 0; i < unknown_count(); ++i)
      r(i) = crit_values_[i] - (targets_.empty() ? Complex(signs_[crit_ids_[i]]) : targets_[i]);
    return r;
  }

  /// Replaces the critical values +-1 by arbitrary targets (homotopy); empty restores the signs.
  void set_targets(std::vector<Complex> targets) { targets_ = std::move(targets); }

  /// Jacobian of residual() with respect to parameters().
  Eigen::MatrixXcd jacobian() const {
    const int k = unknown_count();
    // Columns over all critical points plus C; the gauge is eliminated afterwards.
    Eigen::MatrixXcd full = Eigen::MatrixXcd::Zero(k, k + 1);
    std::vector<Complex> seg(k);
    for (int i = 0; i < k; ++i) {
      const int par = integration_parent_[i];
      const Complex a = par < 0 ? Complex(0) : crit_points_[par];
      const Complex b = crit_points_[i];
      std::fill(seg.begin(), seg.end(), Complex(0));
      const Complex mid = 0.5 * (a + b);
      const Complex half = 0.5 * (b - a);
      for (std::size_t t = 0; t < rule_.size() && half != Complex(0); ++t) {
        const Complex z = mid + half * rule_.nodes[t];
        const Complex q = rule_.weights[t] * derivative(z);
        for (int j = 0; j < k; ++j) seg[j] += q / (z - crit_points_[j]);
      }
      if (par >= 0) full.row(i) = full.row(par);
      for (int j = 0; j < k; ++j) full(i, j) -= double(multiplicity_[j]) * half * seg[j];
      full(i, k) = 1.0;
    }
    Eigen::MatrixXcd jac(k, k);
    const double m0 = multiplicity_[0];
    for (int j = 1; j < k; ++j) jac.col(j - 1) = full.col(j) - (multiplicity_[j] / m0) * full.col(0);
    jac.col(k - 1) = full.col(k);
    return jac;
  }

 private:
  static Complex ipow(Complex z, int m) {
    Complex out = 1;
    for (int i = 0; i < m; ++i) out *= z;
    return out;
  }

  void enforce_gauge() {
    if (crit_points_.empty()) return;
    Complex sum = 0;
    for (std::size_t i = 1; i < crit_points_.size(); ++i) sum += double(multiplicity_[i]) * crit_points_[i];
    crit_points_[0] = -sum / double(multiplicity_[0]);
  }

  void refresh_values() {
    crit_values_.assign(crit_ids_.size(), 0);
    for (std::size_t i = 0; i < crit_ids_.size(); ++i) {
      const int par = integration_parent_[i];
      const Complex a = par < 0 ? Complex(0) : crit_points_[par];
      const Complex base = par < 0 ? constant_ : crit_values_[par];
      crit_values_[i] = base + integrate(a, crit_points_[i]);
    }
  }

  PlaneTree tree_;
  std::vector<int> signs_;
  Complex constant_ = 0;
  int degree_ = 0;
  std::vector<VertexId> crit_ids_;
  std::vector<int> crit_index_;
  std::vector<int> multiplicity_;
  std::vector<int> integration_parent_;
  std::vector<Complex> crit_points_;
  std::vector<Complex> crit_values_;
  std::vector<Complex> vertex_positions_;
  std::vector<Complex> zeros_;
  GaussRule rule_;
  SolveInfo info_;
  std::vector<Complex> targets_;
};

/// Residual after checking that the model indexes `tree`.
inline Eigen::VectorXcd residual(const ShabatModel& model, const PlaneTree& tree) {
  if (!(model.tree() == tree)) throw Error(ErrorKind::IndexMismatch, "model was built for a different tree");
  return model.residual();
}

inline Complex evaluate(const ShabatModel& model, Complex w) { return model.evaluate(w); }
inline Complex evaluate_derivative(const ShabatModel& model, Complex w) { return model.evaluate_derivative(w); }
inline std::vector<Complex> coefficients(const ShabatModel& model) { return model.coefficients(); }

/// Damped Newton on the square system; modifies `model` in place.
inline void newton_solve(ShabatModel& model, const SolveOptions& opts) {
  opts.validate();
  auto& info = model.info();
  info.iterations = 0;
  if (model.unknown_count() == 0) {
    info.residual = 0.0;
    return;
  }
  Eigen::VectorXcd r = model.residual();
  double norm = r.norm();
  for (int iter = 0; iter < opts.max_iter; ++iter) {
    info.residual = r.cwiseAbs().maxCoeff();
    if (!std::isfinite(info.residual)) throw Error(ErrorKind::SolveDiverged, "non-finite residual");
    if (info.residual <= opts.tol) {
      if (iter == 0) {
        const double rc = Eigen::PartialPivLU<Eigen::MatrixXcd>(model.jacobian()).rcond();
        info.condition_estimate = rc > 0 ? 1.0 / rc : std::numeric_limits<double>::infinity();
      }
      return;
    }
    const Eigen::MatrixXcd jac = model.jacobian();
    Eigen::PartialPivLU<Eigen::MatrixXcd> lu(jac);
    const double rcond = lu.rcond();
    info.condition_estimate = rcond > 0 ? 1.0 / rcond : std::numeric_limits<double>::infinity();
    if (!(rcond > 1e-18)) throw Error(ErrorKind::SingularJacobian, "Newton matrix is singular");
    const Eigen::VectorXcd step = lu.solve(-r);
    const Eigen::VectorXcd x = model.parameters();
    double lambda = 1.0;
    bool accepted = false;
    for (int h = 0; h <= opts.max_halvings; ++h) {
      ShabatModel trial = model;
      trial.set_parameters(x + lambda * step);
      const Eigen::VectorXcd rt = trial.residual();
      const double nt = rt.norm();
      if (std::isfinite(nt) && nt < norm) {
        model = std::move(trial);
        r = rt;
        norm = nt;
        accepted = true;
        break;
      }
      lambda *= opts.damping;
    }
    ++info.iterations;
    if (!accepted) {
      info.residual = r.cwiseAbs().maxCoeff();
      if (info.residual <= opts.tol) return;
      // Rounding floor: no decrease possible but already near machine precision.
      if (info.residual <= 100 * opts.tol) return;
      throw Error(ErrorKind::SolveDiverged, "line search exhausted at residual " + std::to_string(info.residual));
    }
  }
  info.residual = r.cwiseAbs().maxCoeff();
  if (info.residual > opts.tol)
    throw Error(ErrorKind::SolveDiverged, "max_iter reached at residual " + std::to_string(info.residual));
}

}  // namespace truetrees
