#pragma once

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <functional>
#include <vector>

#include "klee/autodiff.hpp"
#include "klee/error.hpp"
#include "klee/panels.hpp"
#include "klee/quadrature.hpp"

namespace klee {

namespace detail {

// Integral of U(sigma)/sqrt(sigma - s) over a piece [lo, hi] away from s;
// `to_b` marks the last piece, mapped by sigma = hi - len v^2 so that
// half-power behavior of U at b is absorbed.
template <class T, class F>
T abel_piece(F& U, T s, T lo, double hi, bool to_b, int nodes, int depth) {
  using std::sqrt;
  const double len = hi - value(lo), dist = value(lo) - value(s);
  if (depth < 60 && len > 2.0 * dist) {
    const double mid = 0.5 * (value(lo) + hi);
    return abel_piece(U, s, lo, mid, false, nodes, depth + 1) + abel_piece(U, s, T(mid), hi, to_b, nodes, depth + 1);
  }
  const Rule& r = gauss_legendre(nodes);
  T acc(0.0);
  const T L = T(hi) - lo;
  for (size_t i = 0; i < r.x.size(); ++i) {
    const double u = 0.5 * (1.0 + r.x[i]);
    if (to_b) {
      const T sig = T(hi) - L * T(u * u);
      acc += T(r.w[i] * u) * L * U(sig) / sqrt(sig - s);
    } else {
      const T sig = lo + L * T(u);
      acc += T(0.5 * r.w[i]) * L * U(sig) / sqrt(sig - s);
    }
  }
  return acc;
}

}  // namespace detail

/// int_s^b U(sigma) / sqrt(sigma - s) dsigma. The piece next to s uses
/// Gauss–Jacobi with weight t^{-1/2}; the piece next to b absorbs
/// sqrt(b - sigma) behavior; optional interior breaks resolve localized U.
/// T may be double or Dual (derivative with respect to s).
template <class T, class F>
T abel_forward(F&& U, T s, double b, const std::vector<double>& breaks = {}, int nodes = 48) {
  using std::sqrt;
  if (!(value(s) < b)) return T(0.0);
  std::vector<double> pts;
  for (double x : breaks)
    if (x > value(s) + 1e-14 && x < b - 1e-14) pts.push_back(x);
  std::sort(pts.begin(), pts.end());
  if (pts.empty()) pts.push_back(0.5 * (value(s) + b));
  // First piece [s, p1]: sqrt(p1 - s) int_0^1 U(s + (p1-s) t) t^{-1/2} dt.
  const Rule& j = gauss_jacobi(nodes, 0.0, -0.5);
  const T L0 = T(pts[0]) - s;
  T acc(0.0);
  for (size_t i = 0; i < j.x.size(); ++i) {
    const double t = 0.5 * (1.0 + j.x[i]);
    acc += T(j.w[i] / std::sqrt(2.0)) * U(s + L0 * T(t));
  }
  acc = acc * sqrt(L0);
  for (size_t k = 0; k < pts.size(); ++k) {
    const double hi = (k + 1 < pts.size()) ? pts[k + 1] : b;
    acc += detail::abel_piece(U, s, T(pts[k]), hi, k + 1 == pts.size(), nodes, 0);
  }
  return acc;
}

/// int_{x_i}^b U / sqrt(sigma - x_i) for every node x_i, with U the panel
/// interpolant of the given node values. The substitution sigma = x_i + u^2
/// makes each panel integral a polynomial in u, integrated exactly.
std::vector<double> abel_forward_on_grid(const PanelGrid& g, const std::vector<double>& U);

/// R~(s) = d/ds int_s^b R(s')/sqrt(s'-s) ds', by differentiating the
/// quadrature rule in s (R must accept Dual arguments).
template <class F>
double tilde_rhs(F&& R, double s, double b, const std::vector<double>& breaks = {}, int nodes = 48) {
  if (!(s < b)) throw Error(ErrorKind::EndpointSingular, "tilde_rhs requested at the right endpoint");
  return abel_forward(R, Dual(s, 1.0), b, breaks, nodes).d;
}

/// V(s, sigma) = int_0^1 U(s + tau(sigma-s), sigma) / sqrt(tau(1-tau)) dtau
/// by Gauss–Chebyshev quadrature.
template <class T, class F>
T v_kernel(F&& U, T s, double sigma, int nodes = 32) {
  const Rule& r = gauss_chebyshev(nodes);
  T acc(0.0);
  for (size_t i = 0; i < r.x.size(); ++i) {
    const double tau = 0.5 * (1.0 + r.x[i]);
    acc += T(r.w[i]) * U(s + (T(sigma) - s) * T(tau), sigma);
  }
  return acc;
}

struct EquivalenceReport {
  double residual_direct = 0.0;       // max |int U/sqrt - R|
  double residual_transformed = 0.0;  // max |-V(s,s) + int dV/ds - R~|
  double discrepancy = 0.0;           // max |transformed - T(direct)|
  std::vector<double> direct, transformed;
};

/// Evaluates both forms of the weakly singular equation on a grid of s in
/// [a, b) and compares the transformed residual with the transform of the
/// direct residual. U(s, sigma) and R(s) must be generic in the scalar type.
template <class FU, class FR>
EquivalenceReport invert22_equivalence_check(FU&& U, FR&& R, double a, double b, int samples = 10) {
  EquivalenceReport rep;
  auto direct = [&](auto s) {
    using T = decltype(s);
    auto Us = [&](T sig) { return U(s, sig); };
    return abel_forward(Us, s, b) - R(s);
  };
  const Rule& gl = gauss_legendre(48);
  for (int k = 0; k < samples; ++k) {
    const double s = a + (b - a) * k / samples;
    const double r1 = direct(s);
    // -V(s,s) + int_s^b d/ds V(s, sigma) dsigma - R~(s)
    const double Vss = M_PI * value(U(Dual(s), s));
    auto dV = [&](double sig) { return v_kernel(U, Dual(s, 1.0), sig).d; };
    double integral = 0.0;
    const double m = 0.5 * (s + b);
    for (size_t i = 0; i < gl.x.size(); ++i) {
      const double u = 0.5 * (1.0 + gl.x[i]);
      integral += 0.5 * gl.w[i] * (m - s) * dV(s + (m - s) * u);
      integral += gl.w[i] * u * (b - m) * dV(b - (b - m) * u * u);
    }
    const double r2 = -Vss + integral - tilde_rhs(R, s, b);
    const double tr1 = tilde_rhs([&](Dual x) { return direct(x); }, s, b);
    rep.direct.push_back(r1);
    rep.transformed.push_back(r2);
    rep.residual_direct = std::max(rep.residual_direct, std::abs(r1));
    rep.residual_transformed = std::max(rep.residual_transformed, std::abs(r2));
    rep.discrepancy = std::max(rep.discrepancy, std::abs(r2 - tr1));
  }
  return rep;
}

// ---- fixed-point engine -----------------------------------------------------

/// Z(s) = (z_1, ..., z_m) sampled on a panel grid (node-major storage).
struct ChordState {
  PanelGrid grid;
  int m = 4;
  std::vector<double> values;

  double operator()(int node, int comp) const { return values[node * m + comp]; }
  double& operator()(int node, int comp) { return values[node * m + comp]; }
  /// Component comp interpolated at s.
  double at(double s, int comp) const;
  std::vector<double> component(int comp) const;
  double sup_distance(const ChordState& o) const;
};

/// G(s, Z) = int_s^b Theta(s, sigma, Z(sigma)) dsigma + Xi(s), solved by
/// Z <- Z - Q^{-1}[G(s, Z) - int Theta - Xi].
struct SingularSystem {
  int m = 4;
  double b = 1.0;
  std::function<void(double s, const double* Z, double* out)> G;
  std::function<void(double s, double sigma, const double* Z, double* out)> Theta;
  std::function<void(double s, double* out)> Xi;
  /// Optional batch form of int_{s_i}^b Theta at every node (node-major);
  /// replaces the per-node quadrature of Theta when set.
  std::function<void(const ChordState& Z, std::vector<double>& out)> integral;
  Eigen::MatrixXd Q;
  /// Box B: |Z - center(s)| <= radius componentwise.
  std::function<void(double s, double* out)> center;
  std::vector<double> radius;
};

struct PicardOptions {
  double tol = 1e-12;
  int max_iter = 80;
  double max_ratio = 0.9;
  /// Nodes with s >= frozen_from must keep their initial values every sweep
  /// (disabled when frozen_from > b).
  double frozen_from = 2.0;
};

struct PicardResult {
  ChordState Z;
  int iterations = 0;
  double k_hat = 0.0;
  double last_update = 0.0;
  double error_bound = 0.0;
  double frozen_deviation = 0.0;
  bool locality_ok = true;
  std::vector<double> updates;
  std::vector<ChordState> history;  // iterates, kept when requested
};

/// Xi evaluated at the grid nodes.
std::vector<double> xi_at_nodes(const SingularSystem& sys, const PanelGrid& grid);
/// G(s_i, Z_i) - int_{s_i}^b Theta - xi_i at every node (node-major).
std::vector<double> defect_at_nodes(const SingularSystem& sys, const ChordState& Z, const std::vector<double>& xi);
/// One application of the Picard map T.
ChordState apply_T(const SingularSystem& sys, const ChordState& Z, const std::vector<double>& xi);
/// Raw residual G(s, Z) - int Theta - Xi at the nodes (sup norm).
double system_residual(const SingularSystem& sys, const ChordState& Z, const std::vector<double>& xi);

PicardResult picard_solve(const SingularSystem& sys, const ChordState& Z_init, const PicardOptions& opt = {},
                          bool keep_history = false);

/// max over probe pairs of |T Z1 - T Z2| / |Z1 - Z2|.
double contraction_estimate(const SingularSystem& sys, const std::vector<ChordState>& probes);

}  // namespace klee
