#pragma once

#include <array>
#include <vector>

#include <Eigen/Dense>

#include "klee/abel.hpp"
#include "klee/chords.hpp"
#include "klee/geometry.hpp"
#include "klee/perturbation.hpp"
#include "klee/radon.hpp"

namespace klee {

struct OddOptions {
  // Chord system on [1 - 3 delta, 1].
  int nodes_per_panel = 12;
  double coarse_width = 0.01;   // panels outside the bump supports
  double bump_span = 2.5;       // support panels at c + a tanh(v), |v| <= span
  double bump_step = 0.5;       // spacing in v
  int theta_nodes = 16;         // Gauss–Legendre nodes per near segment of Theta
  int v_nodes = 32;             // nodes for V_1, V_2
  bool check_consistency = true;
  PicardOptions picard{};
  int chord_knots = 1201;
  // Zonal stage on [0, pi/2].
  double inner_width = 0.05;    // alpha panels below the cap
  double outer_width = 0.1;     // alpha panels on [pi/4, pi/2]
  int radon_nodes = 12;         // the cap uses the chord breaks mapped by atan
  double extension_tol = 1e-8;
  int k = 2;
  int fit_degree = 12;
  double fit_span = 0.2;
  double cap_tol = 1e-7;
  double concavity_margin = 0.0;
  int radial_knots = 2048;
  /// build_odd_body throws SearchExhausted when the search misses tol;
  /// otherwise it assembles the best point and reports its residual.
  bool require_cancellation = true;
  int max_halvings = 6;
};

/// The differentiated chord system for odd d on [1 - 3 delta, 1]:
/// unknowns Z = (x, y, x', y'), kernels with a 1/sqrt(sigma - s) factor
/// removed and inverted into a regular Volterra system.
struct OddSystemData {
  int d = 3;
  int q = 0;
  double delta = 0.05;
  double constant = 0.0;  // v_{d-1} / v_{d-2}
  Perturbation h;
  PanelGrid grid;
  SingularSystem system;
  ChordState Z_o;
  /// max |discrete Xi_o - analytic Xi_o| over sampled nodes (when checked).
  double xi_consistency = 0.0;

  double a() const { return 1.0 - 3.0 * delta; }
};

/// Chord-grid breaks on [1 - 3 delta, 1]: uniform outside the bump supports,
/// graded toward the support ends inside them, where the bumps are steep.
std::vector<double> odd_breaks(const Perturbation& h, const OddOptions& opt = {});

/// (J_1, J_2) at slope s and abscissa xi for the value f of the profile:
/// (d/ds)^{q+1} (f^2 - L^2)^{q+1/2} = J_1 / sqrt(f^2 - L^2) and
/// (d/ds)^q ((f^2 - L^2)^{q-1/2} L) = J_2 / sqrt(f^2 - L^2).
std::array<double, 2> j_factors(int q, const Perturbation& h, double s, double xi, double f);

/// (K_1, K_2)(s, sigma, xi); throws KernelDomainViolation outside the
/// region (xi + H)(L(sigma) + L(s)) > 0.
std::array<double, 2> odd_kernels(int q, const Perturbation& h, double s, double sigma, double xi);

/// (V_1(s), V_2(s)): integrals of the differentiated section integrands over
/// [-x_o(1), y_o(1)] with the unperturbed profile; s <= 1.
std::array<double, 2> v_integrals(int q, const Perturbation& h, double s, int nodes = 32);

/// (d/ds)^{q+1} (c / sqrt(1 + s^2)).
double odd_rhs(int q, double c, double s);

void odd_G(int q, const Perturbation& h, double s, const double* Z, double* out);
/// Theta rows at (s, sigma) by direct quadrature: with t = s + (sigma - s)
/// sin^2(theta) the endpoint weights disappear, and [s, sigma] is split at the
/// graded support breaks of h. Reference form of the batched integral.
void odd_Theta(int q, const Perturbation& h, double s, double sigma, const double* Z, double* out, int nodes = 16);
/// G_2(s, sigma, z, z') by Gauss–Chebyshev quadrature (for checks).
std::array<double, 2> odd_G2(int q, const Perturbation& h, double s, double sigma, const double* Z, int nodes = 48);
Eigen::Matrix2d odd_A(int q, const Perturbation& h, double s, double x, double y);

OddSystemData build_odd_system(int d, const Perturbation& h, const OddOptions& opt = {});

struct OddChordSolution {
  ChordState Z;
  PicardResult picard;
};

OddChordSolution solve_odd_chords(const OddSystemData& sys, PicardOptions opt = {});

/// Residuals of the undifferentiated conditions at s for profile f:
/// relative error of int (f^2 - L^2)^{q+1/2} against c / sqrt(1 + s^2), and
/// |int (f^2 - L^2)^{q-1/2} L| relative to the same constant.
std::array<double, 2> raw_odd_residual(const ProfileFunction& f, const Perturbation& h, int d, double s);

// ---- zonal stage ------------------------------------------------------------

/// alpha grid on [0, pi/2]: uniform below the cap, the graded chord breaks
/// mapped by atan on the cap, uniform above pi/4.
PanelGrid alpha_grid(const BumpBasis& basis, const OddOptions& opt = {});

/// Radial functions (R, R', r, r') of the chord-built part at angle alpha
/// (the angle of the boundary point above the x_1 axis); 1 for alpha >= pi/4.
RadialSample cap_radial(const ChordFunctions& chords, const Perturbation& h, double alpha);

/// -[R^{d-3} (R sin a)' - r^{d-3} (r sin a)'] at alpha.
double lemma_trum_form(const RadialPair& pair, int d, double alpha);
double lemma_trum_form(const RadialSample& rs, int d, double alpha);

struct ZonalData {
  ZonalFunction Phi, Psi;
  ZonalFunction phi, psi;          // section data before inversion
  double extension_mismatch = 0.0;  // max deviation from the constants where they must agree
  double cap_from = 0.0;            // first alpha break from which the cap data are used
  double roundtrip = 0.0;           // max |R R^{-1} data - data|
};

/// Phi_h = 2 (d-1) R^{-1} phi_h and Psi_h = 2 (d-1) R^{-1} psi_h with phi_h,
/// psi_h taken from the cap and continued by v_{d-1} and 0.
ZonalData phi_psi(int d, const ChordFunctions& chords, const Perturbation& h, const PanelGrid& grid,
                  const OddOptions& opt = {});

struct ThetaData {
  ZonalFunction Theta;
  std::vector<double> B;     // Theta^{(j)}(0), j = 0 .. d + k - 1
  std::vector<double> fit;   // even Chebyshev coefficients of Theta' on [-span, span]
  double span = 0.2;
};

ThetaData theta_h(const ZonalFunction& Psi, int d, int k, int fit_degree = 12, double span = 0.2);

/// Solves R^{d-1} + r^{d-1} = Phi, R^{d-2} - r^{d-2} = Theta / sin^{d-2}
/// per node from the start (r0, R0) (defaults to the ball).
RadialPair solve_radial_pair(const ZonalFunction& Phi, const ThetaData& theta, int d, double R0 = 1.0,
                             double r0 = 1.0);

struct OddPipeline {
  ChordFunctions chords;
  PicardResult picard;
  double xi_consistency = 0.0;
  ZonalData zonal;
  ThetaData theta;
};

/// Chords -> (Phi, Psi) -> Theta -> B for a perturbation h.
OddPipeline run_odd_pipeline(int d, const Perturbation& h, const OddOptions& opt = {});

struct BorsukResult {
  std::vector<double> coeffs;  // unit vector
  std::vector<double> B;
  double residual = 0.0;       // |B| / scale
  bool converged = false;
  int evaluations = 0;
  double antipodal_defect = 0.0;  // max |B(-x) + B(x)| / scale over checked points
  std::vector<double> history;    // residual per accepted step
};

/// Zero of B on the unit sphere of coefficient space by a projected
/// Gauss–Newton iteration with a finite-difference Jacobian.
BorsukResult borsuk_search(int d, const BumpBasis& basis, double scale, const OddOptions& opt = {},
                           double tol = 1e-9, int max_evaluations = 30);

struct OddBuild {
  BodyOfRevolution body;
  RadialPair radial;
  OddPipeline pipeline;
  std::vector<double> coeffs;
  double B_residual = 0.0;     // |B| / scale
  double cap_mismatch = 0.0;   // max |R - R_h|, |r - r_h| on the cap
  double slope_at_zero = 0.0;  // max(|R'(0)|, |r'(0)|)
  double max_asymmetry = 0.0;  // max |R - r|
  ConvexityReport convexity;
  int evaluations = 0;
  BorsukResult search;
  int halvings = 0;            // times the scale was halved after a rejected build
};

/// Body from a perturbation whose cancellation conditions hold; throws
/// CapMismatch or ConvexityFailure.
OddBuild assemble_odd_body(int d, const Perturbation& h, const OddOptions& opt = {});

/// Search plus assembly; the scale is halved after a non-convex or
/// non-contracting build.
OddBuild build_odd_body(int d, const BumpBasis& basis, double scale, const OddOptions& opt = {}, double tol = 1e-9);

}  // namespace klee
