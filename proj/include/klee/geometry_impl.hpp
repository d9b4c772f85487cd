#pragma once

// Template bodies for geometry.hpp.

#include <algorithm>
#include <cmath>

#include "klee/quadrature.hpp"

namespace klee {
namespace detail {

// Kind of endpoint treatment of a piece: plain Gauss–Legendre, or a u^2
// substitution absorbing the singular endpoint on the left / right.
enum class PieceKind { Plain, Left, Right };

template <class G>
double integrate_piece(G& g, double lo, double hi, PieceKind kind, double a, double b, const Rule& r, int depth) {
  // Section endpoints not absorbed by the substitution must stay at least
  // half a piece length away, otherwise bisect (geometric grading).
  const double len = hi - lo;
  const double dl = kind == PieceKind::Left ? INFINITY : lo - a;
  const double dr = kind == PieceKind::Right ? INFINITY : b - hi;
  if (depth < 60 && len > 2.0 * std::min(dl, dr)) {
    const double m = 0.5 * (lo + hi);
    const PieceKind kl = kind == PieceKind::Left ? PieceKind::Left : PieceKind::Plain;
    const PieceKind kr = kind == PieceKind::Right ? PieceKind::Right : PieceKind::Plain;
    return integrate_piece(g, lo, m, kl, a, b, r, depth + 1) + integrate_piece(g, m, hi, kr, a, b, r, depth + 1);
  }
  const int n = static_cast<int>(r.x.size());
  double acc = 0.0;
  for (int i = 0; i < n; ++i) {
    const double u = 0.5 * (1.0 + r.x[i]);
    if (kind == PieceKind::Left) acc += r.w[i] * len * u * g(lo + len * u * u);
    else if (kind == PieceKind::Right) acc += r.w[i] * len * u * g(hi - len * u * u);
    else acc += r.w[i] * 0.5 * len * g(lo + len * u);
  }
  return acc;
}

template <class G>
double integrate_with_endpoints(G&& g, double a, double b, std::vector<double> breaks, int nodes) {
  if (!(b > a)) return 0.0;
  std::vector<double> pts{a};
  std::sort(breaks.begin(), breaks.end());
  const double eps = 1e-13 * (b - a);
  for (double x : breaks)
    if (x > a + eps && x < b - eps && x > pts.back() + eps) pts.push_back(x);
  pts.push_back(b);
  const Rule& r = gauss_legendre(nodes);
  const int n = static_cast<int>(r.x.size());
  if (pts.size() == 2) {
    const double m = 0.5 * (a + b), h = 0.5 * (b - a);
    double acc = 0.0;
    for (int i = 0; i < n; ++i) {
      const double th = 0.5 * M_PI * r.x[i];
      acc += r.w[i] * std::cos(th) * g(m + h * std::sin(th));
    }
    return acc * h * 0.5 * M_PI;
  }
  const int P = static_cast<int>(pts.size()) - 1;
  double total = 0.0;
  for (int k = 0; k < P; ++k) {
    const PieceKind kind = k == 0 ? PieceKind::Left : (k == P - 1 ? PieceKind::Right : PieceKind::Plain);
    total += integrate_piece(g, pts[k], pts[k + 1], kind, a, b, r, 0);
  }
  return total;
}

}  // namespace detail

template <class G>
double chord_integral(const ProfileFunction& f, double s, double hval, G&& g, int nodes) {
  const auto [mx, y] = chord_endpoints(f, s, hval);
  const double a = -mx;
  auto integrand = [&](double xi) {
    const ProfileValue v = f.eval(xi);
    return g(xi, v.f * v.f, s * xi + hval);
  };
  return detail::integrate_with_endpoints(integrand, a, y, f.xi_breaks(a, y), nodes);
}

}  // namespace klee
