#include "klee/chords.hpp"

#include <cmath>

#include "klee/error.hpp"

namespace klee {

double x_unperturbed(double s, int order) {
  const Series<double> S = Series<double>::variable(order, s);
  return pow(1.0 + S * S, -0.5).derivative(order);
}

std::array<double, 2> ChordFunctions::at(double s) const {
  if (s < a || s > b) {
    const double xo = x_unperturbed(s);
    return {xo, xo};
  }
  return {Z.at(s, 0), Z.at(s, 1)};
}

ProfileFunction chord_profile(const ChordFunctions& chords, const Perturbation& h, int knots) {
  const std::vector<double> s = linspace(chords.a, chords.b, knots);
  std::vector<double> ar(knots), Rr(knots), al(knots), Rl(knots);
  for (int i = 0; i < knots; ++i) {
    const auto [x, y] = chords.at(s[i]);
    const double hv = h.eval(s[i]);
    ar[i] = std::atan2(s[i] * y + hv, y);
    Rr[i] = std::hypot(y, s[i] * y + hv);
    al[i] = std::atan2(s[i] * x - hv, x);
    Rl[i] = std::hypot(x, s[i] * x - hv);
  }
  for (int i = 1; i < knots; ++i)
    if (!(ar[i] > ar[i - 1]) || !(al[i] > al[i - 1]))
      throw Error(ErrorKind::NonMonotone, "boundary polar angle not increasing along the chords");
  PolarArc right = make_polar_arc(+1, ar, Rr, 0.0, 0.0);
  PolarArc left = make_polar_arc(-1, al, Rl, 0.0, 0.0);
  std::vector<Arc> arcs{CircleArc{-1.0, left.lo}, left, CircleArc{left.hi, right.lo}, right, CircleArc{right.hi, 1.0}};
  return ProfileFunction(arcs);
}

}  // namespace klee
