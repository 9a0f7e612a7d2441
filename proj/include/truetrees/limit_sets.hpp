#pragma once

// Reference limit sets: the deltoid and its Schwarz reflection, the developed
// deltoid, the cauliflower Julia set of z^2 + 1/4 and its Fatou coordinate.

#include <array>
#include <cmath>
#include <complex>
#include <fstream>
#include <functional>
#include <numbers>
#include <random>
#include <string>
#include <vector>

#include "json.hpp"

#include "truetrees/errors.hpp"

namespace truetrees {

using Complex = std::complex<double>;
using PointCloud = std::vector<Complex>;

// ---------------------------------------------------------------------------
// Deltoid

/// Exterior uniformization of the deltoid, w + 1/(2 w^2).
inline Complex deltoid_psi(Complex w) { return w + 0.5 / (w * w); }

/// Roots of a w^3 + b w^2 + c w + d, Cardano followed by a Newton polish.
inline std::array<Complex, 3> cubic_roots(Complex a, Complex b, Complex c, Complex d) {
  const Complex d0 = b * b - 3.0 * a * c;
  const Complex d1 = 2.0 * b * b * b - 9.0 * a * b * c + 27.0 * a * a * d;
  const Complex disc = std::sqrt(d1 * d1 - 4.0 * d0 * d0 * d0);
  Complex big = 0.5 * (d1 + disc);
  if (std::abs(0.5 * (d1 - disc)) > std::abs(big)) big = 0.5 * (d1 - disc);
  std::array<Complex, 3> roots;
  const Complex xi(-0.5, 0.5 * std::sqrt(3.0));
  if (std::abs(big) == 0.0) {
    roots.fill(-b / (3.0 * a));
  } else {
    Complex cr = std::pow(big, 1.0 / 3.0);
    for (auto& r : roots) {
      r = -(b + cr + d0 / cr) / (3.0 * a);
      cr *= xi;
    }
  }
  for (auto& r : roots) {
    for (int it = 0; it < 4; ++it) {
      const Complex f = ((a * r + b) * r + c) * r + d;
      const Complex df = (3.0 * a * r + 2.0 * b) * r + c;
      if (std::abs(df) < 1e-300) break;
      const Complex nr = r - f / df;
      if (std::abs(((a * nr + b) * nr + c) * nr + d) >= std::abs(f)) break;
      r = nr;
    }
  }
  return roots;
}

/// Root of 2w^3 - 2z w^2 + 1 = 0 of largest modulus; |w| >= 1 unless z lies
/// inside the deltoid. Boundary points (|w| = 1) are accepted.
inline Complex deltoid_psi_inverse(Complex z) {
  const auto roots = cubic_roots(2.0, -2.0 * z, 0.0, 1.0);
  Complex best = roots[0];
  for (auto r : roots)
    if (std::abs(r) > std::abs(best)) best = r;
  if (std::abs(best) < 1.0 - 1e-9) throw Error(ErrorKind::NoExteriorRoot, "point lies inside the deltoid");
  return best;
}

/// Anti-holomorphic reflection fixing the deltoid boundary.
inline Complex schwarz_reflect(Complex z) {
  const Complex w = deltoid_psi_inverse(z);
  return std::conj(1.0 / w + 0.5 * w * w);
}

/// Implicit equation of the deltoid with cusps at (3/2) e^{2 pi i k / 3};
/// negative inside, zero on the curve.
inline double deltoid_implicit(Complex z) {
  const double x = 2 * z.real(), y = 2 * z.imag();
  const double r2 = x * x + y * y;
  return r2 * r2 + 18 * r2 - 27 - 8 * (x * x * x - 3 * x * y * y);
}

inline bool in_deltoid(Complex z) { return deltoid_implicit(z) < 0; }

// ---------------------------------------------------------------------------
// Developed deltoid

enum class Membership { Interior, Exterior, Undetermined };

inline const char* to_string(Membership m) {
  switch (m) {
    case Membership::Interior: return "Interior";
    case Membership::Exterior: return "Exterior";
    case Membership::Undetermined: return "Undetermined";
  }
  return "?";
}

struct DeltoidParams {
  int k_max = 200;
  double escape_radius = 8.0;
};

inline Membership developed_deltoid_membership(Complex z, int k_max = 200, double escape_radius = 8.0) {
  for (int k = 0; k <= k_max; ++k) {
    if (in_deltoid(z)) return Membership::Interior;
    if (std::abs(z) > escape_radius) return Membership::Exterior;
    if (k == k_max) break;
    try {
      z = schwarz_reflect(z);
    } catch (const Error&) {
      return Membership::Undetermined;  // rounding on the curve itself
    }
  }
  return Membership::Undetermined;
}

inline Membership developed_deltoid_membership(Complex z, const DeltoidParams& p) {
  return developed_deltoid_membership(z, p.k_max, p.escape_radius);
}

// ---------------------------------------------------------------------------
// Marching squares over a tri-state indicator

struct GridSpec {
  Complex lo{-2.0, -2.0};
  Complex hi{2.0, 2.0};
  int resolution = 256;  // cells per axis
  double bisect_tol = 1e-4;

  double cell() const { return std::max(hi.real() - lo.real(), hi.imag() - lo.imag()) / resolution; }
};

/// Boundary cloud of {inside}: each grid edge whose endpoints are Interior and
/// Exterior is bisected to bisect_tol; Undetermined nodes are kept as candidates.
inline PointCloud marching_boundary(const std::function<Membership(Complex)>& member, const GridSpec& grid) {
  if (grid.resolution < 1) throw Error(ErrorKind::InvalidConfig, "grid resolution must be positive");
  const int n = grid.resolution;
  const double dx = (grid.hi.real() - grid.lo.real()) / n;
  const double dy = (grid.hi.imag() - grid.lo.imag()) / n;
  auto node = [&](int i, int j) { return Complex(grid.lo.real() + i * dx, grid.lo.imag() + j * dy); };
  std::vector<Membership> m((n + 1) * (n + 1));
  for (int j = 0; j <= n; ++j)
    for (int i = 0; i <= n; ++i) m[j * (n + 1) + i] = member(node(i, j));
  auto at = [&](int i, int j) { return m[j * (n + 1) + i]; };

  PointCloud out;
  auto bisect = [&](Complex in, Complex ex) {
    while (std::abs(in - ex) > grid.bisect_tol) {
      const Complex mid = 0.5 * (in + ex);
      const auto s = member(mid);
      if (s == Membership::Interior) in = mid;
      else if (s == Membership::Exterior) ex = mid;
      else return mid;
    }
    return 0.5 * (in + ex);
  };
  auto edge = [&](int i0, int j0, int i1, int j1) {
    const auto a = at(i0, j0), b = at(i1, j1);
    if (a == Membership::Interior && b == Membership::Exterior) out.push_back(bisect(node(i0, j0), node(i1, j1)));
    else if (a == Membership::Exterior && b == Membership::Interior) out.push_back(bisect(node(i1, j1), node(i0, j0)));
  };
  for (int j = 0; j <= n; ++j)
    for (int i = 0; i <= n; ++i) {
      if (at(i, j) == Membership::Undetermined) out.push_back(node(i, j));
      if (i < n) edge(i, j, i + 1, j);
      if (j < n) edge(i, j, i, j + 1);
    }
  return out;
}

// Omega pokes slightly past |x|, |y| = 2 (max about 2.08).
inline GridSpec developed_deltoid_grid(int resolution) {
  GridSpec g;
  g.lo = {-2.25, -2.25};
  g.hi = {2.25, 2.25};
  g.resolution = resolution;
  return g;
}

/// Exterior preimages of y under the reflection: roots of w^3 - 2 conj(y) w + 2
/// with |w| > 1, pushed forward by the deltoid map.
inline std::vector<Complex> schwarz_preimages(Complex y) {
  std::vector<Complex> out;
  for (auto w : cubic_roots(1.0, 0.0, -2.0 * std::conj(y), 2.0))
    if (std::abs(w) > 1.0 + 1e-9) out.push_back(deltoid_psi(w));
  return out;
}

/// Backward orbit of the three cusps, `levels` deep. These lie exactly on the
/// boundary of Omega and are dense there.
inline PointCloud cusp_preimages(int levels) {
  PointCloud out, frontier;
  for (int j = 0; j < 3; ++j) frontier.push_back(1.5 * std::polar(1.0, 2 * std::numbers::pi * j / 3));
  out = frontier;
  for (int l = 0; l < levels; ++l) {
    PointCloud next;
    for (auto y : frontier)
      for (auto z : schwarz_preimages(y))
        if (std::abs(z - y) > 1e-9) next.push_back(z);
    out.insert(out.end(), next.begin(), next.end());
    frontier = std::move(next);
  }
  return out;
}

/// Marching-squares contour of the membership indicator, plus the cusp
/// backward orbit so that the thin spikes at the cusps are represented.
inline PointCloud developed_deltoid_boundary(int resolution = 256, const DeltoidParams& p = {}, int cusp_levels = 10) {
  if (resolution < 256) throw Error(ErrorKind::InvalidConfig, "developed deltoid grid needs at least 256 cells per axis");
  auto cloud = marching_boundary([&](Complex z) { return developed_deltoid_membership(z, p); },
                                 developed_deltoid_grid(resolution));
  const auto cusps = cusp_preimages(cusp_levels);
  cloud.insert(cloud.end(), cusps.begin(), cusps.end());
  return cloud;
}

/// Points of the deltoid curve itself, psi(e^{it}).
inline PointCloud deltoid_curve(int samples) {
  PointCloud out;
  for (int k = 0; k < samples; ++k) out.push_back(deltoid_psi(std::polar(1.0, 2 * std::numbers::pi * k / samples)));
  return out;
}

// ---------------------------------------------------------------------------
// Cauliflower

enum class Orbit { Bounded, Escaped };

inline Complex cauliflower_map(Complex z) { return z * z + 0.25; }

inline Orbit cauliflower_membership(Complex z, int max_iter = 2000, double bailout = 2.0) {
  if (bailout < 2.0) throw Error(ErrorKind::InvalidConfig, "bailout must be at least 2");
  for (int k = 0; k < max_iter; ++k) {
    if (std::abs(z) > bailout) return Orbit::Escaped;
    z = cauliflower_map(z);
  }
  return std::abs(z) > bailout ? Orbit::Escaped : Orbit::Bounded;
}

enum class CloudMethod { InverseIteration, Marching };

struct CauliflowerParams {
  int max_iter = 2000;
  double bailout = 2.0;
  std::uint64_t seed = 1;
};

inline GridSpec cauliflower_grid(int resolution) {
  GridSpec g;
  g.lo = {-1.25, -1.25};
  g.hi = {1.25, 1.25};
  g.resolution = resolution;
  return g;
}

/// Julia set sample: `size` points by random inverse iteration, or the
/// marching-squares boundary on a grid with `size` cells per axis.
inline PointCloud cauliflower_boundary(CloudMethod method, int size, const CauliflowerParams& p = {}) {
  if (size < 1) throw Error(ErrorKind::InvalidConfig, "cloud size must be positive");
  if (method == CloudMethod::Marching) {
    return marching_boundary(
        [&](Complex z) {
          return cauliflower_membership(z, p.max_iter, p.bailout) == Orbit::Bounded ? Membership::Interior
                                                                                   : Membership::Exterior;
        },
        cauliflower_grid(size));
  }
  std::mt19937_64 rng(p.seed);
  std::bernoulli_distribution coin(0.5);
  Complex z = 1.0;
  PointCloud out;
  out.reserve(size);
  for (int k = 0; k < size + 100; ++k) {
    z = std::sqrt(z - 0.25);
    if (coin(rng)) z = -z;
    if (k >= 100) out.push_back(z);
  }
  return out;
}

// ---------------------------------------------------------------------------
// Fatou coordinate at the parabolic point 1/2

struct FatouOptions {
  int max_iter = 1000000;
  double min_u = 100.0;  // series is used once |u| exceeds this
  double tol = 1e-9;
};

namespace detail {

// Phi(u) = u - log u + sum b_k u^{-k} solves Phi(u + 1 + 1/(u - 1)) = Phi(u) + 1.
inline Complex fatou_series(Complex u) {
  static constexpr double b[] = {1.0 / 2,           1.0 / 3,          13.0 / 36,          113.0 / 240,
                                 1187.0 / 1800,     877.0 / 945,      14569.0 / 11760,    176017.0 / 120960,
                                 1745717.0 / 1360800};
  const Complex t = 1.0 / u;
  Complex tail = 0;
  for (int k = 8; k >= 0; --k) tail = (tail + b[k]) * t;
  return u - std::log(u) + tail;
}

// Un-normalized coordinate: Phi(u_n) - n once successive estimates agree.
inline Complex fatou_raw(Complex z, const FatouOptions& opts) {
  int n = 0;
  // forward orbit until close to 1/2, then switch to u = 1/(1/2 - z)
  while (std::abs(0.5 - z) > 0.05) {
    if (std::abs(z) > 2.0) throw Error(ErrorKind::OutOfDomain, "orbit escapes; point is outside the filled Julia set");
    if (++n > opts.max_iter) throw Error(ErrorKind::NotConverged, "orbit did not reach the parabolic petal");
    z = cauliflower_map(z);
  }
  if (z == 0.5) throw Error(ErrorKind::OutOfDomain, "orbit lands on the parabolic point");
  Complex u = 1.0 / (0.5 - z);
  Complex prev = Complex(NAN, NAN);
  for (; n <= opts.max_iter; ++n) {
    if (std::abs(u) >= opts.min_u && u.real() > 0) {
      const Complex est = fatou_series(u) - double(n);
      if (std::abs(est - prev) < opts.tol) return est;
      prev = est;
    }
    if (std::abs(u - 1.0) < 1e-300) throw Error(ErrorKind::OutOfDomain, "orbit passes through 1/4 preimage of infinity");
    u = u + 1.0 + 1.0 / (u - 1.0);
  }
  throw Error(ErrorKind::NotConverged, "Fatou coordinate did not converge");
}

}  // namespace detail

/// Attracting Fatou coordinate, psi(f(z)) = psi(z) + 1 and psi(0) = 0.
inline Complex fatou_coordinate(Complex z, const FatouOptions& opts = {}) {
  const Complex base = detail::fatou_raw(0.0, opts);
  return detail::fatou_raw(z, opts) - base;
}

inline Complex cauliflower_limit_function(Complex z, const FatouOptions& opts = {}) {
  return std::cos(std::numbers::pi * fatou_coordinate(z, opts));
}

// ---------------------------------------------------------------------------
// Oracles and serialization

enum class LimitSetKind { Deltoid, DevelopedDeltoid, Cauliflower };

inline const char* to_string(LimitSetKind k) {
  switch (k) {
    case LimitSetKind::Deltoid: return "deltoid";
    case LimitSetKind::DevelopedDeltoid: return "developed_deltoid";
    case LimitSetKind::Cauliflower: return "cauliflower";
  }
  return "?";
}

/// Membership oracle with a lazily computed boundary cloud.
struct LimitSetOracle {
  LimitSetKind kind = LimitSetKind::DevelopedDeltoid;
  int k_max = 200;
  double escape_radius = 8.0;
  int resolution = 256;

  Membership membership(Complex z) const {
    switch (kind) {
      case LimitSetKind::Deltoid: {
        const double f = deltoid_implicit(z);
        return f < 0 ? Membership::Interior : f > 0 ? Membership::Exterior : Membership::Undetermined;
      }
      case LimitSetKind::DevelopedDeltoid: return developed_deltoid_membership(z, k_max, escape_radius);
      case LimitSetKind::Cauliflower:
        return cauliflower_membership(z, k_max, std::max(2.0, escape_radius)) == Orbit::Bounded ? Membership::Interior
                                                                                               : Membership::Exterior;
    }
    return Membership::Undetermined;
  }

  const PointCloud& boundary() const {
    if (cloud_.empty()) {
      switch (kind) {
        case LimitSetKind::Deltoid: cloud_ = deltoid_curve(8 * resolution); break;
        case LimitSetKind::DevelopedDeltoid: cloud_ = developed_deltoid_boundary(resolution, {k_max, escape_radius}); break;
        case LimitSetKind::Cauliflower:
          cloud_ = cauliflower_boundary(CloudMethod::Marching, resolution, {k_max, std::max(2.0, escape_radius), 1});
          break;
      }
    }
    return cloud_;
  }

  nlohmann::json manifest() const {
    return {{"kind", to_string(kind)},
            {"k_max", k_max},
            {"escape_radius", escape_radius},
            {"resolution", resolution},
            {"points", cloud_.size()}};
  }

 private:
  mutable PointCloud cloud_;
};

/// x,y rows with a JSON sidecar `<path>.json` describing how they were made.
inline void write_cloud_csv(const std::string& path, const PointCloud& cloud, const nlohmann::json& params) {
  std::ofstream f(path);
  if (!f) throw Error(ErrorKind::InvalidConfig, "cannot write " + path);
  f.precision(17);
  f << "x,y\n";
  for (auto z : cloud) f << z.real() << "," << z.imag() << "\n";
  std::ofstream side(path + ".json");
  side << params.dump(2) << "\n";
}

inline PointCloud read_cloud_csv(const std::string& path) {
  std::ifstream f(path);
  if (!f) throw Error(ErrorKind::InvalidConfig, "cannot read " + path);
  PointCloud out;
  std::string line;
  std::getline(f, line);
  while (std::getline(f, line)) {
    const auto comma = line.find(',');
    if (comma == std::string::npos) continue;
    out.emplace_back(std::stod(line.substr(0, comma)), std::stod(line.substr(comma + 1)));
  }
  return out;
}

}  // namespace truetrees
