#pragma once

#include <array>
#include <optional>
#include <variant>
#include <vector>

#include "klee/panels.hpp"
#include "klee/perturbation.hpp"

namespace klee {

/// v_n = pi^{n/2} / Gamma(n/2 + 1).
double unit_ball_volume(int n);
/// |S^{k}|, the k-dimensional measure of the unit sphere in R^{k+1}.
double sphere_measure(int k);

/// f(xi) = sqrt(1 - xi^2) on [lo, hi].
struct CircleArc {
  double lo, hi;
};

/// Boundary arc given in polar form: the point at polar angle alpha from the
/// axis is side * R(alpha) * (cos alpha, +-sin alpha), alpha in [a0, a1].
/// side = +1 covers xi > 0, side = -1 covers xi < 0.
struct PolarArc {
  int side = 1;
  CubicSpline R;
  double lo = 0.0, hi = 0.0;        // xi range covered
  std::vector<double> xknots;       // R(alpha) cos(alpha) at the knots
};

/// f given directly as a clamped spline in xi.
struct XiSplineArc {
  CubicSpline f;
  double lo, hi;
};

using Arc = std::variant<CircleArc, PolarArc, XiSplineArc>;

struct ProfileValue {
  double f = 0.0;
  double f1 = 0.0;
  double f2 = 0.0;
  double ff1 = 0.0;  // f f', finite at the poles
};

PolarArc make_polar_arc(int side, std::vector<double> alpha, std::vector<double> R, double slope_lo, double slope_hi);

/// Concave generator f on [-lambda, mu], assembled from contiguous arcs.
class ProfileFunction {
 public:
  ProfileFunction() = default;
  explicit ProfileFunction(std::vector<Arc> arcs, double shift = 0.0);

  static ProfileFunction ball();
  /// f sampled on a xi grid (values only, clamped end slopes).
  static ProfileFunction from_samples(std::vector<double> xi, std::vector<double> f, double slope_lo,
                                      double slope_hi);

  double lambda() const { return lambda_ - shift_; }
  double mu() const { return mu_ + shift_; }
  double shift() const { return shift_; }
  ProfileFunction shifted(double tau) const { return ProfileFunction(arcs_, shift_ + tau); }
  ProfileFunction reflected() const;

  const std::vector<Arc>& arcs() const { return arcs_; }
  /// Interior arc junctions in (shifted) xi coordinates.
  std::vector<double> junctions() const;
  /// Arc junctions and panel subdivision points strictly inside (lo, hi).
  std::vector<double> xi_breaks(double lo, double hi) const;

  /// f and derivatives at xi inside [-lambda, mu]; throws outside.
  ProfileValue eval(double xi) const;
  double operator()(double xi) const { return eval(xi).f; }
  /// f continued by -(distance) outside the domain; used for bracketing.
  double value_ext(double xi) const;

  /// Largest mismatch of value / slope / curvature across junctions.
  std::array<double, 3> stitch_error() const;

 private:
  std::vector<Arc> arcs_;
  std::vector<double> ends_;   // arc right ends (unshifted)
  std::vector<double> width_;  // panel width per arc (unshifted xi)
  double lambda_ = 1.0, mu_ = 1.0, shift_ = 0.0;
};

struct BodyOfRevolution {
  int dim = 3;
  ProfileFunction profile;
  std::optional<Perturbation> perturbation;  // set for constructed bodies

  static BodyOfRevolution ball(int dim);
};

/// L(s, xi) = s xi + hval.
struct ChordLine {
  double s = 0.0;
  double hval = 0.0;
};

struct RadialSample {
  double R, dR, r, dr;
};

/// Radial generators on a shared alpha grid over [0, pi/2], with cubic
/// Hermite interpolation using the stored derivatives.
class RadialPair {
 public:
  RadialPair() = default;
  RadialPair(std::vector<double> alpha, std::vector<double> R, std::vector<double> dR, std::vector<double> r,
             std::vector<double> dr);

  static RadialPair constant(double value, int n = 513);

  RadialSample eval(double alpha) const;
  const std::vector<double>& alpha() const { return alpha_; }
  const std::vector<double>& R() const { return R_; }
  const std::vector<double>& r() const { return r_; }
  const std::vector<double>& dR() const { return dR_; }
  const std::vector<double>& dr() const { return dr_; }
  RadialPair swapped() const { return RadialPair(alpha_, r_, dr_, R_, dR_); }

 private:
  std::vector<double> alpha_, R_, dR_, r_, dr_;
};

// ---- sections --------------------------------------------------------------

struct SectionOptions {
  int nodes = 24;          // Gauss–Legendre nodes per panel
  int circle_nodes = 64;   // nodes for panels lying on analytic circle arcs
};

/// Volume of K ∩ {x2 = s x1 + hval} (rotated to a normal in the x1x2-plane).
double section_volume(const BodyOfRevolution& body, const ChordLine& chord, const SectionOptions& opt = {});

/// Volume of the section at offset t along u = (side cos a, sin a, 0, ...).
double section_volume_by_direction(const BodyOfRevolution& body, double alpha, int side, double t,
                                   const SectionOptions& opt = {});
/// d/dt of the section volume.
double section_volume_derivative(const BodyOfRevolution& body, double alpha, int side, double t,
                                 const SectionOptions& opt = {});

/// Support interval [t_lo, t_hi] of the body along u.
std::array<double, 2> support_interval(const BodyOfRevolution& body, double alpha, int side);

struct MaxSection {
  double t_star = 0.0;
  double vol = 0.0;
  double residual = 0.0;  // (dvol/dt)/vol at t_star
};

MaxSection max_section(const BodyOfRevolution& body, double alpha, int side, const SectionOptions& opt = {});

/// Abscissas -x, y where L meets the graphs of -f and f.
std::array<double, 2> chord_endpoints(const ProfileFunction& f, double s, double hval);

/// Integral over the chord [-x, y] of g(xi, f(xi)^2, L(xi)); g may vanish
/// like a half power at the endpoints.
template <class G>
double chord_integral(const ProfileFunction& f, double s, double hval, G&& g, int nodes = 32);

// ---- profiles from chords and radial data ----------------------------------

struct BoundaryPoint {
  double xi, f;
};

/// Boundary points (y(s), L(s, y)) and (-x(s), -L(s, -x)) ... merged by xi.
std::vector<BoundaryPoint> profile_from_chords(const std::vector<double>& s, const std::vector<double>& x,
                                               const std::vector<double>& y, const Perturbation& h);

RadialPair radial_from_profile(const BodyOfRevolution& body, int n = 2049);
/// Profile from a radial pair. If circle_from < pi/2, the pair must equal 1
/// on [circle_from, pi/2] and that part is represented analytically.
ProfileFunction profile_from_radial(const RadialPair& pair, int dim, double circle_from = M_PI / 2, int knots = 2048);

// ---- certificates ----------------------------------------------------------

struct ConvexityReport {
  bool pass = false;
  double worst_f2 = 0.0;  // max f'' over the scan
  double at_xi = 0.0;
};

ConvexityReport convexity_check(const ProfileFunction& f, double margin, int samples = 20001);

struct Direction {
  double alpha;
  int side;
};

struct AsymmetryReport {
  double residual = 0.0;  // root-mean-square misfit
  std::array<double, 2> center{0.0, 0.0};
};

/// Least-squares common point of the maximal-section hyperplanes.
AsymmetryReport asymmetry_certificate(const std::vector<Direction>& dirs, const std::vector<double>& t_star, int dim);
AsymmetryReport asymmetry_certificate(const BodyOfRevolution& body, const std::vector<Direction>& dirs);

// ---- internal integration helper -------------------------------------------

namespace detail {

/// Integral of g over [a, b] split at `breaks`, absorbing half-power endpoint
/// behavior by u^2 (one-sided) or sine (two-sided) substitutions.
template <class G>
double integrate_with_endpoints(G&& g, double a, double b, std::vector<double> breaks, int nodes);

}  // namespace detail

}  // namespace klee

#include "klee/geometry_impl.hpp"
