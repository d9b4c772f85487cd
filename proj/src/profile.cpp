#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>

#include "klee/error.hpp"
#include "klee/geometry.hpp"

namespace klee {
namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

double arc_lo(const Arc& a) {
  return std::visit([](const auto& x) { return x.lo; }, a);
}
double arc_hi(const Arc& a) {
  return std::visit([](const auto& x) { return x.hi; }, a);
}

ProfileValue eval_circle(double xi) {
  ProfileValue v;
  const double q = std::max(0.0, 1.0 - xi * xi);
  v.f = std::sqrt(q);
  v.f1 = -xi / v.f;
  v.f2 = -1.0 / (q * v.f);
  v.ff1 = -xi;
  return v;
}

// Solve R(alpha) cos(alpha) = target on a polar arc.
double polar_alpha(const PolarArc& arc, double target) {
  const auto& ak = arc.R.knots();
  const auto& xk = arc.xknots;
  const int n = static_cast<int>(ak.size());
  if (target >= xk.front()) return ak.front();
  if (target <= xk.back()) return ak.back();
  // xk is decreasing: first index with xk[i] < target.
  int hi = 1;
  {
    int lo_i = 0, hi_i = n - 1;
    while (hi_i - lo_i > 1) {
      const int mid = (lo_i + hi_i) / 2;
      if (xk[mid] >= target) lo_i = mid; else hi_i = mid;
    }
    hi = hi_i;
  }
  double a = ak[hi - 1], b = ak[hi];
  double alpha = a + (b - a) * (xk[hi - 1] - target) / (xk[hi - 1] - xk[hi]);
  for (int it = 0; it < 60; ++it) {
    const auto r = arc.R.eval(alpha);
    const double c = std::cos(alpha), s = std::sin(alpha);
    const double F = r[0] * c - target;
    const double dF = r[1] * c - r[0] * s;
    if (F == 0.0) break;
    if (F > 0.0) a = alpha; else b = alpha;
    double next = (dF != 0.0) ? alpha - F / dF : 0.5 * (a + b);
    if (!(next >= a && next <= b)) next = 0.5 * (a + b);
    const bool done = std::abs(next - alpha) <= 2e-16 * std::max(1e-3, alpha) || b - a <= 1e-17;
    alpha = next;
    if (done) break;
  }
  return alpha;
}

ProfileValue eval_polar(const PolarArc& arc, double xi) {
  const double alpha = polar_alpha(arc, arc.side * xi);
  const auto r = arc.R.eval(alpha);
  const double R = r[0], R1 = r[1], R2 = r[2];
  const double c = std::cos(alpha), s = std::sin(alpha);
  const double X1 = R1 * c - R * s, Y1 = R1 * s + R * c;
  const double X2 = R2 * c - 2.0 * R1 * s - R * c, Y2 = R2 * s + 2.0 * R1 * c - R * s;
  ProfileValue v;
  v.f = R * s;
  if (alpha == 0.0) {
    v.f1 = -arc.side * kInf;
    v.f2 = -kInf;
    v.ff1 = arc.side * R * Y1 / (R2 - R);
    return v;
  }
  v.f1 = arc.side * Y1 / X1;
  v.f2 = (Y2 * X1 - Y1 * X2) / (X1 * X1 * X1);
  // f f' = R Y1 sin/X1 with sin/X1 = 1/((R1/sin) cos - R).
  v.ff1 = arc.side * R * Y1 / ((R1 / s) * c - R);
  return v;
}

}  // namespace

double unit_ball_volume(int n) {
  if (n < 0) throw Error(ErrorKind::InvalidArgument, "dimension must be nonnegative");
  return std::exp(0.5 * n * std::log(M_PI) - std::lgamma(0.5 * n + 1.0));
}

double sphere_measure(int k) { return (k + 1) * unit_ball_volume(k + 1); }

PolarArc make_polar_arc(int side, std::vector<double> alpha, std::vector<double> R, double slope_lo,
                        double slope_hi) {
  PolarArc arc;
  arc.side = side >= 0 ? 1 : -1;
  arc.xknots.resize(alpha.size());
  for (size_t i = 0; i < alpha.size(); ++i) arc.xknots[i] = R[i] * std::cos(alpha[i]);
  for (size_t i = 1; i < alpha.size(); ++i)
    if (!(arc.xknots[i] < arc.xknots[i - 1])) throw Error(ErrorKind::NonMonotone, "polar arc abscissas not decreasing");
  arc.R = CubicSpline(std::move(alpha), std::move(R), slope_lo, slope_hi);
  if (arc.side > 0) {
    arc.lo = arc.xknots.back();
    arc.hi = arc.xknots.front();
  } else {
    arc.lo = -arc.xknots.front();
    arc.hi = -arc.xknots.back();
  }
  return arc;
}

ProfileFunction::ProfileFunction(std::vector<Arc> arcs, double shift) : arcs_(std::move(arcs)), shift_(shift) {
  if (arcs_.empty()) throw Error(ErrorKind::InvalidArgument, "profile needs at least one arc");
  std::sort(arcs_.begin(), arcs_.end(), [](const Arc& a, const Arc& b) { return arc_lo(a) < arc_lo(b); });
  for (size_t k = 0; k < arcs_.size(); ++k) {
    if (!(arc_hi(arcs_[k]) > arc_lo(arcs_[k]))) throw Error(ErrorKind::InvalidArgument, "empty arc");
    if (k > 0 && std::abs(arc_hi(arcs_[k - 1]) - arc_lo(arcs_[k])) > 1e-9)
      throw Error(ErrorKind::InvalidArgument, "arcs are not contiguous");
    ends_.push_back(arc_hi(arcs_[k]));
    const double len = arc_hi(arcs_[k]) - arc_lo(arcs_[k]);
    double target = 0.25;
    if (std::holds_alternative<PolarArc>(arcs_[k])) target = 0.004;
    if (std::holds_alternative<XiSplineArc>(arcs_[k])) target = 0.02;
    width_.push_back(len / std::ceil(len / target));
  }
  lambda_ = -arc_lo(arcs_.front());
  mu_ = arc_hi(arcs_.back());
  if (!(lambda_ + mu_ > 0.0)) throw Error(ErrorKind::InvalidArgument, "degenerate profile");
}

ProfileFunction ProfileFunction::ball() { return ProfileFunction({CircleArc{-1.0, 1.0}}); }

ProfileFunction ProfileFunction::from_samples(std::vector<double> xi, std::vector<double> f, double slope_lo,
                                              double slope_hi) {
  XiSplineArc arc{CubicSpline(xi, f, slope_lo, slope_hi), xi.front(), xi.back()};
  return ProfileFunction({arc});
}

ProfileFunction ProfileFunction::reflected() const {
  std::vector<Arc> out;
  for (const Arc& a : arcs_) {
    if (const auto* c = std::get_if<CircleArc>(&a)) {
      out.emplace_back(CircleArc{-c->hi, -c->lo});
    } else if (const auto* p = std::get_if<PolarArc>(&a)) {
      PolarArc q = *p;
      q.side = -p->side;
      q.lo = -p->hi;
      q.hi = -p->lo;
      out.emplace_back(q);
    } else {
      const auto& s = std::get<XiSplineArc>(a);
      std::vector<double> x(s.f.knots().rbegin(), s.f.knots().rend()), y(s.f.values().rbegin(), s.f.values().rend());
      for (double& v : x) v = -v;
      out.emplace_back(XiSplineArc{CubicSpline(x, y, -s.f.slope_hi(), -s.f.slope_lo()), -s.hi, -s.lo});
    }
  }
  return ProfileFunction(out, -shift_);
}

std::vector<double> ProfileFunction::xi_breaks(double lo, double hi) const {
  std::vector<double> out;
  for (size_t k = 0; k < arcs_.size(); ++k) {
    const double a = arc_lo(arcs_[k]) + shift_, b = arc_hi(arcs_[k]) + shift_;
    if (b <= lo || a >= hi) continue;
    for (double x = a; x < b - 0.5 * width_[k]; x += width_[k])
      if (x > lo && x < hi) out.push_back(x);
  }
  return out;
}

std::vector<double> ProfileFunction::junctions() const {
  std::vector<double> out;
  for (size_t k = 0; k + 1 < arcs_.size(); ++k) out.push_back(ends_[k] + shift_);
  return out;
}

ProfileValue ProfileFunction::eval(double xi) const {
  double x = xi - shift_;
  const double tol = 1e-12 * (lambda_ + mu_);
  if (x < -lambda_ - tol || x > mu_ + tol) throw Error(ErrorKind::InvalidArgument, "xi outside the profile domain");
  x = std::clamp(x, -lambda_, mu_);
  size_t k = std::lower_bound(ends_.begin(), ends_.end(), x) - ends_.begin();
  if (k >= arcs_.size()) k = arcs_.size() - 1;
  const Arc& a = arcs_[k];
  if (std::holds_alternative<CircleArc>(a)) return eval_circle(x);
  if (const auto* p = std::get_if<PolarArc>(&a)) return eval_polar(*p, x);
  const auto& s = std::get<XiSplineArc>(a);
  const auto r = s.f.eval(x);
  return {r[0], r[1], r[2], r[0] * r[1]};
}

double ProfileFunction::value_ext(double xi) const {
  if (xi <= -lambda()) return -(-lambda() - xi);
  if (xi >= mu()) return -(xi - mu());
  return eval(xi).f;
}

std::array<double, 3> ProfileFunction::stitch_error() const {
  std::array<double, 3> err{0.0, 0.0, 0.0};
  for (size_t k = 0; k + 1 < arcs_.size(); ++k) {
    const double x = ends_[k];
    auto side_eval = [&](const Arc& a) -> ProfileValue {
      if (std::holds_alternative<CircleArc>(a)) return eval_circle(x);
      if (const auto* p = std::get_if<PolarArc>(&a)) return eval_polar(*p, x);
      const auto r = std::get<XiSplineArc>(a).f.eval(x);
      return {r[0], r[1], r[2], r[0] * r[1]};
    };
    const ProfileValue l = side_eval(arcs_[k]), r = side_eval(arcs_[k + 1]);
    err[0] = std::max(err[0], std::abs(l.f - r.f));
    err[1] = std::max(err[1], std::abs(l.f1 - r.f1));
    err[2] = std::max(err[2], std::abs(l.f2 - r.f2));
  }
  return err;
}

BodyOfRevolution BodyOfRevolution::ball(int dim) {
  if (dim < 3) throw Error(ErrorKind::InvalidArgument, "dimension must be at least 3");
  return BodyOfRevolution{dim, ProfileFunction::ball(), std::nullopt};
}

// ---- radial pairs ------------------------------------------------------------

RadialPair::RadialPair(std::vector<double> alpha, std::vector<double> R, std::vector<double> dR,
                       std::vector<double> r, std::vector<double> dr)
    : alpha_(std::move(alpha)), R_(std::move(R)), dR_(std::move(dR)), r_(std::move(r)), dr_(std::move(dr)) {
  const size_t n = alpha_.size();
  if (n < 2 || R_.size() != n || dR_.size() != n || r_.size() != n || dr_.size() != n)
    throw Error(ErrorKind::InvalidArgument, "radial pair arrays must share one grid");
}

RadialPair RadialPair::constant(double value, int n) {
  std::vector<double> a = linspace(0.0, M_PI / 2, n), v(n, value), z(n, 0.0);
  return RadialPair(a, v, z, v, z);
}

RadialSample RadialPair::eval(double alpha) const {
  const int n = static_cast<int>(alpha_.size());
  alpha = std::clamp(alpha, alpha_.front(), alpha_.back());
  int i = static_cast<int>(std::upper_bound(alpha_.begin(), alpha_.end(), alpha) - alpha_.begin()) - 1;
  i = std::clamp(i, 0, n - 2);
  const double h = alpha_[i + 1] - alpha_[i], t = (alpha - alpha_[i]) / h;
  const double h00 = (1 + 2 * t) * (1 - t) * (1 - t), h10 = t * (1 - t) * (1 - t);
  const double h01 = t * t * (3 - 2 * t), h11 = t * t * (t - 1);
  const double d00 = 6 * t * t - 6 * t, d10 = 3 * t * t - 4 * t + 1, d01 = -d00, d11 = 3 * t * t - 2 * t;
  auto herm = [&](const std::vector<double>& v, const std::vector<double>& d, double& val, double& der) {
    val = h00 * v[i] + h * h10 * d[i] + h01 * v[i + 1] + h * h11 * d[i + 1];
    der = (d00 * v[i] + d01 * v[i + 1]) / h + d10 * d[i] + d11 * d[i + 1];
  };
  RadialSample s{};
  herm(R_, dR_, s.R, s.dR);
  herm(r_, dr_, s.r, s.dr);
  return s;
}

namespace {

// Boundary point of the right half-profile g (g(x) = f(+-x)) at polar angle a.
void radial_point(const std::function<ProfileValue(double)>& g, double xmax, double a, double& R, double& dR) {
  if (a <= 0.0) {
    R = xmax;
    dR = 0.0;
    return;
  }
  const double c = std::cos(a), s = std::sin(a);
  double lo = 0.0, hi = xmax;
  for (int it = 0; it < 200 && hi - lo > 1e-16; ++it) {
    const double m = 0.5 * (lo + hi);
    if (g(m).f * c - m * s > 0.0) lo = m; else hi = m;
  }
  const double x = 0.5 * (lo + hi);
  const ProfileValue v = g(x);
  R = std::hypot(x, v.f);
  dR = R * (x + v.ff1) / (x * v.f1 - v.f);
  if (!std::isfinite(dR)) dR = 0.0;
}

}  // namespace

RadialPair radial_from_profile(const BodyOfRevolution& body, int n) {
  const ProfileFunction& f = body.profile;
  if (!(f.lambda() > 0.0 && f.mu() > 0.0)) throw Error(ErrorKind::InvalidArgument, "origin must be interior");
  std::vector<double> a = linspace(0.0, M_PI / 2, n), R(n), dR(n), r(n), dr(n);
  auto right = [&](double x) { return f.eval(x); };
  auto left = [&](double x) {
    ProfileValue v = f.eval(-x);
    v.f1 = -v.f1;
    v.ff1 = -v.ff1;
    return v;
  };
  for (int i = 0; i < n; ++i) {
    radial_point(right, f.mu(), a[i], R[i], dR[i]);
    radial_point(left, f.lambda(), a[i], r[i], dr[i]);
  }
  return RadialPair(a, R, dR, r, dr);
}

ProfileFunction profile_from_radial(const RadialPair& pair, int dim, double circle_from, int knots) {
  if (dim < 3) throw Error(ErrorKind::InvalidArgument, "dimension must be at least 3");
  std::vector<double> a = linspace(0.0, circle_from, knots), R(knots), r(knots);
  for (int i = 0; i < knots; ++i) {
    const RadialSample s = pair.eval(a[i]);
    R[i] = s.R;
    r[i] = s.r;
  }
  const RadialSample s0 = pair.eval(0.0), s1 = pair.eval(circle_from);
  const bool circle = circle_from < M_PI / 2 - 1e-12;
  PolarArc right = make_polar_arc(+1, a, R, s0.dR, circle ? 0.0 : s1.dR);
  PolarArc left = make_polar_arc(-1, a, r, s0.dr, circle ? 0.0 : s1.dr);
  std::vector<Arc> arcs;
  if (circle) {
    arcs = {left, CircleArc{left.hi, right.lo}, right};
  } else {
    const double mid = 0.5 * (left.hi + right.lo);
    left.hi = mid;
    right.lo = mid;
    arcs = {left, right};
  }
  return ProfileFunction(arcs);
}

std::vector<BoundaryPoint> profile_from_chords(const std::vector<double>& s, const std::vector<double>& x,
                                               const std::vector<double>& y, const Perturbation& h) {
  std::vector<BoundaryPoint> pts;
  for (size_t i = 0; i < s.size(); ++i) {
    const double hv = h.eval(s[i]);
    pts.push_back({y[i], s[i] * y[i] + hv});
    pts.push_back({-x[i], s[i] * x[i] - hv});
  }
  std::sort(pts.begin(), pts.end(), [](const BoundaryPoint& a, const BoundaryPoint& b) { return a.xi < b.xi; });
  for (size_t i = 1; i < pts.size(); ++i)
    if (!(pts[i].xi > pts[i - 1].xi)) throw Error(ErrorKind::NonMonotone, "boundary abscissas not strictly ordered");
  return pts;
}

ConvexityReport convexity_check(const ProfileFunction& f, double margin, int samples) {
  ConvexityReport rep;
  rep.worst_f2 = -std::numeric_limits<double>::infinity();
  const double a = -f.lambda(), b = f.mu();
  for (int i = 0; i < samples; ++i) {
    const double xi = a + (b - a) * (i + 0.5) / samples;
    const double f2 = f.eval(xi).f2;
    if (f2 > rep.worst_f2 || std::isnan(f2)) {
      rep.worst_f2 = std::isnan(f2) ? std::numeric_limits<double>::infinity() : f2;
      rep.at_xi = xi;
    }
  }
  for (double xi : f.junctions()) {
    const double f2 = f.eval(xi).f2;
    if (f2 > rep.worst_f2) {
      rep.worst_f2 = f2;
      rep.at_xi = xi;
    }
  }
  rep.pass = rep.worst_f2 <= -margin;
  return rep;
}

}  // namespace klee
