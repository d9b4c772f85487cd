#pragma once

#include <array>

#include "klee/abel.hpp"
#include "klee/geometry.hpp"
#include "klee/perturbation.hpp"

namespace klee {

/// 1 / sqrt(1 + s^2), the unperturbed chord half-lengths.
double x_unperturbed(double s, int order = 0);

/// Chord functions on all of [0, inf): the solution on [a, b], x_o elsewhere.
struct ChordFunctions {
  ChordState Z;
  double a = 0.85, b = 1.0;
  std::array<double, 2> at(double s) const;  // (x(s), y(s))
};

/// Profile from chord functions: polar arcs over the angles of s in [a, b],
/// unit circle elsewhere.
ProfileFunction chord_profile(const ChordFunctions& chords, const Perturbation& h, int knots);

}  // namespace klee
