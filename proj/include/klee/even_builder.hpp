#pragma once

#include <array>
#include <memory>
#include <vector>

#include <Eigen/Dense>

#include "klee/abel.hpp"
#include "klee/chords.hpp"
#include "klee/geometry.hpp"
#include "klee/perturbation.hpp"

namespace klee {

struct EvenOptions {
  int nodes_per_panel = 16;
  double panel_width = 0.002;
  PicardOptions picard{};
  int chord_knots = 1201;        // samples per polar arc
  double concavity_margin = 0.0;  // f'' <= -margin required
  double moment_tol = 1e-9;
  double chain_tol = 1e-8;
  int max_halvings = 6;
};

/// The differentiated chord system for even d on [1 - 3 delta, 1]:
/// unknowns Z = (x, y, x', y').
struct EvenSystemData {
  int d = 4;
  int p = 1;
  double delta = 0.05;
  double constant = 0.0;  // v_{d-1} / v_{d-2}
  Perturbation h;
  PanelGrid grid;
  SingularSystem system;
  ChordState Z_o;  // the unperturbed solution on the grid
  /// max |discrete Xi_o - analytic Xi_o| over the nodes; measures how well
  /// the discretized operator reproduces the unperturbed solution.
  double xi_consistency = 0.0;

  double a() const { return 1.0 - 3.0 * delta; }
};

/// (d/ds)^{p+1} (c / sqrt(1 + s^2)).
double even_rhs(int p, double c, double s);

/// The two left-hand forms of the system at (s, Z).
void even_G(int p, const Perturbation& h, double s, const double* Z, double* out);
/// Kernel rows (x', y', Theta_1, Theta_2) before the overall sign.
void even_Theta(int p, const Perturbation& h, double s, double sigma, const double* Z, double* out);
/// The x', y' block of D_Z G.
Eigen::Matrix2d even_A(int p, const Perturbation& h, double s, double x, double y);

/// (Xi_1(s), Xi_2(s)) for perturbation h (Gauss–Legendre over [-x_o(1), y_o(1)]).
std::array<double, 2> xi_integrals(int p, const Perturbation& h, double s);
std::array<double, 2> xi_integrals(const EvenSystemData& sys, double s);

EvenSystemData build_even_system(int d, const Perturbation& h, const EvenOptions& opt = {});

struct EvenSolution {
  ChordState Z;
  PicardResult picard;
};

EvenSolution solve_even(const EvenSystemData& sys, PicardOptions opt = {});

struct MomentReport {
  double deviation = 0.0;     // max |x - x_o| + |y - y_o| on [1-3d, 1-2d]
  double odd_moment = 0.0;    // max |int_{-x}^{y} xi^{2p-1}|
  double even_moment = 0.0;   // max |int_{-x}^{y} xi^{2p} - int_{-x_o}^{y_o} xi^{2p}|
};

MomentReport moment_identity_check(const ChordState& Z, const EvenSystemData& sys);

struct EvenBuild {
  BodyOfRevolution body;
  ChordFunctions chords;
  PicardResult picard;
  MomentReport moments;
  std::vector<double> chain;  // relative residuals of the moment chain, j = 1..p
  ConvexityReport convexity;
  double xi_consistency = 0.0;
  double scale_used = 0.0;
  int halvings = 0;
};

/// Relative residuals of int f^{2j} xi^{2(p-j)} against the circle over the
/// chord at s, j = 1..p.
std::vector<double> moment_chain(const ProfileFunction& f, int p, double s);

/// One construction attempt; throws ChainCheckFailure / ConvexityFailure.
EvenBuild assemble_even_body(int d, const Perturbation& h, const EvenOptions& opt = {});

/// assemble_even_body with the amplitude halved after each rejected attempt.
EvenBuild build_even_body(int d, const Perturbation& h, const EvenOptions& opt = {});

}  // namespace klee
