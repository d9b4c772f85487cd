#include <Eigen/Dense>
#include <algorithm>
#include <cmath>

#include "klee/error.hpp"
#include "klee/geometry.hpp"

namespace klee {
namespace {

constexpr double kGolden = 0.6180339887498949;

// Argmax of a unimodal function on [a, b].
template <class F>
double golden_max(F&& f, double a, double b, int iters) {
  double x1 = b - kGolden * (b - a), x2 = a + kGolden * (b - a);
  double f1 = f(x1), f2 = f(x2);
  for (int i = 0; i < iters && b - a > 1e-16 * (1.0 + std::abs(a)); ++i) {
    if (f1 < f2) {
      a = x1;
      x1 = x2;
      f1 = f2;
      x2 = a + kGolden * (b - a);
      f2 = f(x2);
    } else {
      b = x2;
      x2 = x1;
      f2 = f1;
      x1 = b - kGolden * (b - a);
      f1 = f(x1);
    }
  }
  return f1 < f2 ? x2 : x1;
}

// The section line in the meridian plane: x1 = t u1 + w v1, x2 = t u2 + w v2.
struct Line {
  double u1, u2, v1, v2, t;
  double x1(double w) const { return t * u1 + w * v1; }
  double x2(double w) const { return t * u2 + w * v2; }
};

Line make_line(double alpha, int side, double t) {
  if (!(alpha >= 0.0 && alpha <= M_PI / 2 + 1e-15)) throw Error(ErrorKind::InvalidArgument, "alpha outside [0, pi/2]");
  const double sd = side >= 0 ? 1.0 : -1.0;
  const double c = (alpha == M_PI / 2) ? 0.0 : std::cos(alpha), s = std::sin(alpha);
  return {sd * c, s, -s, sd * c, t};
}

struct Span {
  double w0, w1;
  std::vector<double> breaks;
};

Span section_span(const ProfileFunction& f, const Line& L) {
  Span sp;
  if (std::abs(L.v1) < 1e-15) {
    const double x1 = L.x1(0.0);
    const double fv = f.value_ext(x1);
    const double c = L.x2(0.0);
    if (!(fv > std::abs(c))) throw Error(ErrorKind::EmptySection, "hyperplane misses the body");
    // x2 = c + w v2, |x2| <= fv.
    const double a = (-fv - c) / L.v2, b = (fv - c) / L.v2;
    sp.w0 = std::min(a, b);
    sp.w1 = std::max(a, b);
    return sp;
  }
  const double wa = (L.x1(0.0) - f.mu()) / (-L.v1), wb = (L.x1(0.0) + f.lambda()) / (-L.v1);
  const double lo = std::min(wa, wb), hi = std::max(wa, wb);
  auto g = [&](double w) { return f.value_ext(L.x1(w)) - std::abs(L.x2(w)); };
  const double wm = golden_max(g, lo, hi, 120);
  if (!(g(wm) > 0.0)) throw Error(ErrorKind::EmptySection, "hyperplane misses the body");
  auto root = [&](double a, double b) {
    // g(a) <= 0 < g(b) or reversed; bisection.
    double ga = g(a);
    if (ga > 0.0) throw Error(ErrorKind::RootBracketFailure, "section endpoint not bracketed");
    for (int it = 0; it < 200 && std::abs(b - a) > 1e-15 * (1.0 + std::abs(a)); ++it) {
      const double m = 0.5 * (a + b);
      if (g(m) > 0.0) b = m; else a = m;
    }
    return 0.5 * (a + b);
  };
  sp.w0 = root(lo, wm);
  sp.w1 = root(hi, wm);
  const double xa = L.x1(sp.w0), xb = L.x1(sp.w1);
  for (double xi : f.xi_breaks(std::min(xa, xb), std::max(xa, xb))) sp.breaks.push_back((L.x1(0.0) - xi) / (-L.v1));
  return sp;
}

}  // namespace

double section_volume_by_direction(const BodyOfRevolution& body, double alpha, int side, double t,
                                   const SectionOptions& opt) {
  const Line L = make_line(alpha, side, t);
  const Span sp = section_span(body.profile, L);
  const double e = 0.5 * (body.dim - 2);
  auto g = [&](double w) {
    const double f = body.profile.eval(std::clamp(L.x1(w), -body.profile.lambda(), body.profile.mu())).f;
    const double x2 = L.x2(w);
    const double q = std::max(0.0, f * f - x2 * x2);
    return body.dim == 4 ? q : std::pow(q, e);
  };
  return unit_ball_volume(body.dim - 2) * detail::integrate_with_endpoints(g, sp.w0, sp.w1, sp.breaks, opt.nodes);
}

double section_volume_derivative(const BodyOfRevolution& body, double alpha, int side, double t,
                                 const SectionOptions& opt) {
  const Line L = make_line(alpha, side, t);
  const Span sp = section_span(body.profile, L);
  const double e = 0.5 * (body.dim - 4);
  auto g = [&](double w) {
    const ProfileValue v = body.profile.eval(std::clamp(L.x1(w), -body.profile.lambda(), body.profile.mu()));
    const double x2 = L.x2(w);
    const double q = std::max(1e-300, v.f * v.f - x2 * x2);
    const double dq = 2.0 * v.ff1 * L.u1 - 2.0 * x2 * L.u2;
    return (body.dim == 4 ? 1.0 : std::pow(q, e)) * dq;
  };
  return unit_ball_volume(body.dim - 2) * 0.5 * (body.dim - 2) *
         detail::integrate_with_endpoints(g, sp.w0, sp.w1, sp.breaks, opt.nodes);
}

double section_volume(const BodyOfRevolution& body, const ChordLine& chord, const SectionOptions& opt) {
  const double s = chord.s;
  const double alpha = std::atan2(1.0, std::abs(s));
  const int side = s > 0.0 ? -1 : 1;
  return section_volume_by_direction(body, alpha, side, chord.hval / std::sqrt(1.0 + s * s), opt);
}

std::array<double, 2> support_interval(const BodyOfRevolution& body, double alpha, int side) {
  const Line L = make_line(alpha, side, 0.0);
  const ProfileFunction& f = body.profile;
  const double a = -f.lambda(), b = f.mu();
  auto upper = [&](double xi) { return L.u1 * xi + L.u2 * f.eval(xi).f; };
  auto lower = [&](double xi) { return -(L.u1 * xi - L.u2 * f.eval(xi).f); };
  const double hi = upper(golden_max(upper, a, b, 120));
  const double lo = -lower(golden_max(lower, a, b, 120));
  return {lo, hi};
}

MaxSection max_section(const BodyOfRevolution& body, double alpha, int side, const SectionOptions& opt) {
  const auto [tlo, thi] = support_interval(body, alpha, side);
  const double W = thi - tlo;
  auto vol = [&](double t) { return section_volume_by_direction(body, alpha, side, t, opt); };
  auto dvol = [&](double t) { return section_volume_derivative(body, alpha, side, t, opt); };
  // Golden-section bracket (unimodal by Brunn), then a secant/bisection
  // solve of the first-order condition.
  double a = tlo + 1e-6 * W, b = thi - 1e-6 * W;
  double x1 = b - kGolden * (b - a), x2 = a + kGolden * (b - a);
  double f1 = vol(x1), f2 = vol(x2);
  while (b - a > 1e-3 * W) {
    if (f1 < f2) {
      a = x1; x1 = x2; f1 = f2; x2 = a + kGolden * (b - a); f2 = vol(x2);
    } else {
      b = x2; x2 = x1; f2 = f1; x1 = b - kGolden * (b - a); f1 = vol(x1);
    }
  }
  double da = dvol(a), db = dvol(b);
  if (!(da >= 0.0 && db <= 0.0)) throw Error(ErrorKind::ConvergenceFailure, "first-order condition not bracketed");
  // Illinois false position.
  double t = 0.5 * (a + b);
  int keep = 0;
  for (int it = 0; it < 100 && b - a > 1e-15 * (1.0 + std::abs(t)); ++it) {
    t = (da == db) ? 0.5 * (a + b) : a - da * (b - a) / (db - da);
    if (!(t > a && t < b)) t = 0.5 * (a + b);
    const double dt = dvol(t);
    if (dt == 0.0) { a = b = t; break; }
    if (dt > 0.0) {
      a = t; da = dt;
      if (keep == 1) db *= 0.5;
      keep = 1;
    } else {
      b = t; db = dt;
      if (keep == -1) da *= 0.5;
      keep = -1;
    }
  }
  MaxSection out;
  out.t_star = t;
  out.vol = vol(t);
  out.residual = dvol(t) / out.vol;
  if (!(std::abs(out.residual) <= 1e-9)) throw Error(ErrorKind::ConvergenceFailure, "first-order residual too large");
  return out;
}

std::array<double, 2> chord_endpoints(const ProfileFunction& f, double s, double hval) {
  auto g = [&](double xi) { return f.value_ext(xi) - std::abs(s * xi + hval); };
  const double a = -f.lambda(), b = f.mu();
  const double m = golden_max(g, a, b, 120);
  if (!(g(m) > 0.0)) throw Error(ErrorKind::EmptySection, "chord misses the body");
  auto root = [&](double lo, double hi) {
    for (int it = 0; it < 200 && std::abs(hi - lo) > 1e-15; ++it) {
      const double mid = 0.5 * (lo + hi);
      if (g(mid) > 0.0) hi = mid; else lo = mid;
    }
    return 0.5 * (lo + hi);
  };
  const double left = root(a, m), right = root(b, m);
  return {-left, right};
}

AsymmetryReport asymmetry_certificate(const std::vector<Direction>& dirs, const std::vector<double>& t_star, int dim) {
  const int n = static_cast<int>(dirs.size());
  if (n < dim + 1 || static_cast<int>(t_star.size()) != n)
    throw Error(ErrorKind::DegenerateDirections, "need at least d+1 directions");
  Eigen::MatrixXd A(n, 2);
  Eigen::VectorXd b(n);
  for (int i = 0; i < n; ++i) {
    A(i, 0) = (dirs[i].side >= 0 ? 1.0 : -1.0) * std::cos(dirs[i].alpha);
    A(i, 1) = std::sin(dirs[i].alpha);
    b(i) = t_star[i];
  }
  Eigen::JacobiSVD<Eigen::MatrixXd> svd(A, Eigen::ComputeThinU | Eigen::ComputeThinV);
  const auto& sv = svd.singularValues();
  if (!(sv(1) > 1e-8 * sv(0))) throw Error(ErrorKind::DegenerateDirections, "directions do not span the meridian plane");
  const Eigen::Vector2d c = svd.solve(b);
  AsymmetryReport rep;
  rep.center = {c(0), c(1)};
  rep.residual = std::sqrt((A * c - b).squaredNorm() / n);
  return rep;
}

AsymmetryReport asymmetry_certificate(const BodyOfRevolution& body, const std::vector<Direction>& dirs) {
  std::vector<double> t;
  for (const Direction& d : dirs) t.push_back(max_section(body, d.alpha, d.side).t_star);
  return asymmetry_certificate(dirs, t, body.dim);
}

}  // namespace klee
