#pragma once

#include <vector>

namespace klee {

/// Nodes and weights of a quadrature rule on [-1, 1].
struct Rule {
  std::vector<double> x;
  std::vector<double> w;
};

/// Gauss–Legendre rule with n nodes (cached, thread-safe).
const Rule& gauss_legendre(int n);

/// Gauss–Jacobi rule for the weight (1-x)^a (1+x)^b, a, b > -1 (cached).
const Rule& gauss_jacobi(int n, double a, double b);

/// Gauss–Chebyshev rule for the weight 1/sqrt(1-x^2).
const Rule& gauss_chebyshev(int n);

/// Integrate f over [a, b] with an n-point Gauss–Legendre rule.
template <class F>
double integrate_gl(F&& f, double a, double b, int n) {
  const Rule& r = gauss_legendre(n);
  const double c = 0.5 * (a + b), h = 0.5 * (b - a);
  double acc = 0.0;
  for (size_t i = 0; i < r.x.size(); ++i) acc += r.w[i] * f(c + h * r.x[i]);
  return acc * h;
}

}  // namespace klee
