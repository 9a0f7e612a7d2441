#pragma once

// Leaf growth by exponent continuation.
//
// When leaves of a solved tree sprout children, the sprouting leaves become
// critical points. They start as regular points (exponent 0), where the old
// solution is exact, and their exponents are raised continuously to the
// final multiplicity while the system p(v_i) = sign(v_i) is tracked. For
// fractional exponents the factors (z - v)^e are continued along the chord
// tree, so the integrals never see a branch cut. Endpoint singularities are
// integrated with Gauss-Jacobi rules.

#include <algorithm>
#include <cmath>
#include <complex>
#include <limits>
#include <map>
#include <numbers>
#include <vector>

#include <Eigen/Dense>

#include "truetrees/errors.hpp"
#include "truetrees/gauss_legendre.hpp"
#include "truetrees/plane_tree.hpp"
#include "truetrees/shabat.hpp"

namespace truetrees {

/// Gauss-Jacobi rule for the weight (1 - x)^alpha on [-1, 1] (Golub-Welsch).
inline GaussRule gauss_jacobi(int n, double alpha) {
  const double beta = 0.0;
  Eigen::MatrixXd jac = Eigen::MatrixXd::Zero(n, n);
  for (int k = 0; k < n; ++k) {
    const double s = 2.0 * k + alpha + beta;
    jac(k, k) = (s == 0 || s + 2 == 0) ? (beta - alpha) / (alpha + beta + 2)
                                        : (beta * beta - alpha * alpha) / (s * (s + 2));
    if (k == 0) jac(k, k) = (beta - alpha) / (alpha + beta + 2);
    if (k + 1 < n) {
      const double m = k + 1.0;
      const double t = 2.0 * m + alpha + beta;
      double b2;
      if (m == 1)
        b2 = 4.0 * (1 + alpha) * (1 + beta) / ((2 + alpha + beta) * (2 + alpha + beta) * (3 + alpha + beta));
      else
        b2 = 4.0 * m * (m + alpha) * (m + beta) * (m + alpha + beta) / (t * t * (t + 1) * (t - 1));
      jac(k, k + 1) = jac(k + 1, k) = std::sqrt(b2);
    }
  }
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(jac);
  const double mu0 = std::pow(2.0, alpha + beta + 1) * std::tgamma(alpha + 1) * std::tgamma(beta + 1) /
                     std::tgamma(alpha + beta + 2);
  GaussRule rule;
  rule.nodes.resize(n);
  rule.weights.resize(n);
  for (int k = 0; k < n; ++k) {
    rule.nodes[k] = eig.eigenvalues()(k);
    const double v0 = eig.eigenvectors()(0, k);
    rule.weights[k] = mu0 * v0 * v0;
  }
  return rule;
}

namespace detail {

class GrowthSystem {
 public:
  // `growing` flags internal vertices of `tree` whose exponent is continued from 0.
  GrowthSystem(const PlaneTree& tree, std::vector<bool> growing_vertex)
      : tree_(tree), signs_(bipartite_signs(tree)) {
    ids_ = tree.internal_vertices();
    index_.assign(tree.vertex_count(), -1);
    for (std::size_t i = 0; i < ids_.size(); ++i) index_[ids_[i]] = static_cast<int>(i);
    const int k = static_cast<int>(ids_.size());
    parent_.assign(k, -1);
    for (int i = 1; i < k; ++i) parent_[i] = index_[*tree.parent(ids_[i])];
    final_.resize(k);
    growing_.resize(k);
    for (int i = 0; i < k; ++i) {
      final_[i] = tree.degree(ids_[i]) - 1;
      growing_[i] = growing_vertex[ids_[i]];
    }
    if (growing_[0]) throw Error(ErrorKind::InvalidConfig, "the anchor cannot grow");
    for (int i = 1; i < k; ++i)
      if (growing_[parent_[i]]) throw Error(ErrorKind::InvalidConfig, "growing vertices must have leaf children only");
    for (int i = 0; i < k; ++i)
      if (growing_[i]) fractional_.push_back(i);
    nodes_ = tree.edge_count() / 2 + 12;
    legendre_ = gauss_legendre(nodes_);
    set_tau(0.0);
  }

  int size() const { return static_cast<int>(ids_.size()); }
  const std::vector<VertexId>& ids() const { return ids_; }
  std::vector<Complex>& points() { return v_; }
  Complex& constant() { return c_; }

  void set_tau(double tau) {
    tau_ = tau;
    e_.resize(final_.size());
    for (std::size_t i = 0; i < final_.size(); ++i) e_[i] = growing_[i] ? tau * final_[i] : final_[i];
    degree_ = 1;
    for (double e : e_) degree_ += e;
    jacobi_.clear();
  }

  void set_state(std::vector<Complex> points, Complex constant) {
    v_ = std::move(points);
    c_ = constant;
    enforce_gauge();
  }

  Eigen::VectorXcd parameters() const {
    const int k = size();
    Eigen::VectorXcd x(k);
    for (int i = 1; i < k; ++i) x(i - 1) = v_[i];
    x(k - 1) = c_;
    return x;
  }

  void set_parameters(const Eigen::VectorXcd& x) {
    const int k = size();
    for (int i = 1; i < k; ++i) v_[i] = x(i - 1);
    c_ = x(k - 1);
    enforce_gauge();
  }

  /// Residual and (optionally) Jacobian with respect to parameters().
  void evaluate(Eigen::VectorXcd& r, Eigen::MatrixXcd* jac) const {
    const int k = size();
    const int nf = static_cast<int>(fractional_.size());
    r.resize(k);
    Eigen::MatrixXcd full;
    if (jac) full = Eigen::MatrixXcd::Zero(k, k + 1);
    std::vector<Complex> value(k);
    // continuous arg of (vertex - v_f) at every crit vertex, per fractional f
    std::vector<std::vector<double>> theta(k, std::vector<double>(nf, 0.0));
    std::vector<double> theta_origin(nf);
    for (int f = 0; f < nf; ++f) theta_origin[f] = std::arg(-v_[fractional_[f]]);
    std::vector<Complex> seg(k);
    const double half_n = 0.5 * degree_;

    for (int i = 0; i < k; ++i) {
      const int par = parent_[i];
      const Complex a = par < 0 ? Complex(0) : v_[par];
      const Complex b = v_[i];
      const double* th_a = par < 0 ? theta_origin.data() : theta[par].data();
      const Complex mid = 0.5 * (a + b);
      const Complex half = 0.5 * (b - a);
      const bool frac_end = growing_[i];
      const GaussRule& rule = frac_end ? jacobi(e_[i]) : legendre_;
      // endpoint factor (z - b)^{e_b} = (-half)^{e_b} (1 - x)^{e_b} for a growing endpoint
      int self_f = -1;
      if (frac_end) self_f = static_cast<int>(std::find(fractional_.begin(), fractional_.end(), i) - fractional_.begin());
      Complex end_factor = 1.0;
      if (frac_end && half != Complex(0))
        end_factor = std::exp(e_[i] * Complex(std::log(std::abs(half)), th_a[self_f]));

      Complex integral = 0;
      std::fill(seg.begin(), seg.end(), Complex(0));
      Complex self_term = 0;
      if (half != Complex(0)) {
        for (std::size_t t = 0; t < rule.size(); ++t) {
          const double x = rule.nodes[t];
          const Complex z = mid + half * x;
          const Complex g = smooth_factor(z, a, th_a, frac_end ? i : -1) * end_factor;
          const Complex wq = rule.weights[t] * g;
          integral += wq;
          if (jac) {
            for (int j = 0; j < k; ++j)
              if (j != i || !frac_end) seg[j] += wq / (z - v_[j]);
          }
        }
        if (jac && frac_end) {
          // (z - b)^{e_b - 1} part: weight (1 - x)^{e_b - 1}, times (-half)^{-1}
          const GaussRule& low = jacobi(e_[i] - 1.0);
          for (std::size_t t = 0; t < low.size(); ++t) {
            const Complex z = mid + half * low.nodes[t];
            self_term += low.weights[t] * smooth_factor(z, a, th_a, i);
          }
          self_term *= end_factor / (-half);
        }
      }
      value[i] = (par < 0 ? c_ : value[par]) + half_n * half * integral;
      r(i) = value[i] - double(signs_[ids_[i]]);
      if (jac) {
        if (par >= 0) full.row(i) = full.row(par);
        for (int j = 0; j < k; ++j) {
          const Complex s = (j == i && frac_end) ? self_term : seg[j];
          full(i, j) -= half_n * e_[j] * half * s;
        }
        full(i, k) = 1.0;
      }
      // carry continuous args to b
      if (i < k) {
        for (int f = 0; f < nf; ++f) {
          const int fi = fractional_[f];
          if (fi == i) continue;
          theta[i][f] = th_a[f] + std::arg((b - v_[fi]) / (a - v_[fi]));
        }
      }
    }
    if (jac) {
      jac->resize(k, k);
      for (int j = 1; j < k; ++j) jac->col(j - 1) = full.col(j) - (e_[j] / e_[0]) * full.col(0);
      jac->col(k - 1) = full.col(k);
    }
  }

  double min_separation() const {
    double d = std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < v_.size(); ++i)
      for (std::size_t j = 0; j < i; ++j) d = std::min(d, std::abs(v_[i] - v_[j]));
    return d;
  }

 private:
  // prod_j (z - v_j)^{e_j} without the endpoint factor `skip`; growing factors
  // use the continued argument from chord start a.
  Complex smooth_factor(Complex z, Complex a, const double* th_a, int skip) const {
    ScaledProduct prod(1.0);
    double log_mod = 0;
    double arg = 0;
    const int k = size();
    for (int j = 0; j < k; ++j) {
      if (j == skip || growing_[j]) continue;
      for (int m = 0; m < final_[j]; ++m) prod *= (z - v_[j]);
    }
    for (std::size_t f = 0; f < fractional_.size(); ++f) {
      const int j = fractional_[f];
      if (j == skip || e_[j] == 0) continue;
      const Complex d = z - v_[j];
      log_mod += e_[j] * std::log(std::abs(d));
      arg += e_[j] * (th_a[f] + std::arg(d / (a - v_[j])));
    }
    return prod.value() * std::polar(std::exp(log_mod), arg);
  }

  const GaussRule& jacobi(double alpha) const {
    auto it = jacobi_.find(alpha);
    if (it == jacobi_.end()) it = jacobi_.emplace(alpha, gauss_jacobi(nodes_, alpha)).first;
    return it->second;
  }

  void enforce_gauge() {
    Complex sum = 0;
    for (std::size_t i = 1; i < v_.size(); ++i) sum += e_[i] * v_[i];
    v_[0] = -sum / e_[0];
  }

  const PlaneTree& tree_;
  std::vector<int> signs_;
  std::vector<VertexId> ids_;
  std::vector<int> index_;
  std::vector<int> parent_;
  std::vector<int> final_;
  std::vector<bool> growing_;
  std::vector<int> fractional_;
  std::vector<double> e_;
  std::vector<Complex> v_;
  Complex c_ = 0;
  double tau_ = 0;
  double degree_ = 1;
  int nodes_ = 0;
  GaussRule legendre_;
  mutable std::map<double, GaussRule> jacobi_;
};

/// Tracks the growth path from tau = 0 (old solution) to tau = 1. Returns
/// critical point positions by vertex id (NaN elsewhere) and the constant.
inline std::pair<std::vector<Complex>, Complex> grow_exponents(const PlaneTree& tree,
                                                               const std::vector<bool>& growing,
                                                               const std::vector<Complex>& start,
                                                               Complex constant) {
  GrowthSystem sys(tree, growing);
  const int k = sys.size();
  std::vector<Complex> pts(k);
  for (int i = 0; i < k; ++i) pts[i] = start[sys.ids()[i]];
  sys.set_state(pts, constant);

  Eigen::VectorXcd x = sys.parameters();
  Eigen::VectorXcd x_prev = x;
  double tau = 0, tau_prev = 0;
  double dtau = 0.05;
  Eigen::VectorXcd r;
  Eigen::MatrixXcd jac;
  int steps = 0;
  while (tau < 1.0) {
    const double next = std::min(1.0, tau + dtau);
    sys.set_tau(next);
    Eigen::VectorXcd guess = x;
    if (tau > tau_prev) guess = x + (next - tau) / (tau - tau_prev) * (x - x_prev);
    sys.set_parameters(guess);
    const double sep = sys.min_separation();
    bool ok = false;
    double last_step = std::numeric_limits<double>::infinity();
    for (int it = 0; it < 10; ++it) {
      sys.evaluate(r, &jac);
      const double res = r.cwiseAbs().maxCoeff();
      if (!std::isfinite(res)) break;
      if (res < 1e-10) { ok = true; break; }
      const Eigen::VectorXcd step = jac.partialPivLu().solve(-r);
      const double sn = step.cwiseAbs().maxCoeff();
      if (!std::isfinite(sn) || sn > 0.25 * sep || (it > 1 && sn > 0.5 * last_step)) break;
      last_step = sn;
      sys.set_parameters(sys.parameters() + step);
    }
    if (ok && (sys.parameters() - guess).cwiseAbs().maxCoeff() < 0.5 * sep) {
      x_prev = x;
      tau_prev = tau;
      x = sys.parameters();
      tau = next;
      dtau = std::min(0.25, dtau * 1.5);
      ++steps;
    } else {
      sys.set_tau(tau);
      sys.set_parameters(x);
      dtau *= 0.5;
      if (dtau < 1e-6) throw Error(ErrorKind::SolveDiverged, "growth path stalled at tau " + std::to_string(tau));
    }
  }
  std::vector<Complex> out(tree.vertex_count(), Complex(std::numeric_limits<double>::quiet_NaN(), 0));
  for (int i = 0; i < k; ++i) out[sys.ids()[i]] = sys.points()[i];
  return {out, sys.constant()};
}

}  // namespace detail
}  // namespace truetrees
