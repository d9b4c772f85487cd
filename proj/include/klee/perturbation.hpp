#pragma once

#include <cmath>
#include <type_traits>
#include <utility>
#include <vector>

#include "klee/autodiff.hpp"
#include "klee/quadrature.hpp"

namespace klee {

/// m smooth bumps exp(-1/(1-tau^2)) with pairwise disjoint supports inside
/// [1-2 delta, 1-delta]. Support j is the middle `fill` fraction of the j-th
/// of m equal cells.
class BumpBasis {
 public:
  BumpBasis() = default;
  BumpBasis(double delta, int count, double fill = 0.9);

  double delta() const { return delta_; }
  int count() const { return static_cast<int>(supports_.size()); }
  double fill() const { return fill_; }
  const std::vector<std::pair<double, double>>& supports() const { return supports_; }
  /// Index of the support containing s (open interval), or -1.
  int which(double s) const;

  /// Taylor series of bump j at s through the given order.
  template <class T>
  Series<T> taylor(int j, T s, int order) const;

 private:
  double delta_ = 0.05;
  double fill_ = 0.9;
  std::vector<std::pair<double, double>> supports_;
};

/// Panel breaks on [a, b] through 1 - 2 delta, 1 - delta and the support
/// ends: uniform with panels of at most `width` outside the supports, and at
/// c + r tanh(v), |v| <= span in steps of `step`, inside them, which resolves
/// the steep flanks of the bumps.
std::vector<double> graded_breaks(const BumpBasis& basis, double a, double b, double width, double span = 2.5,
                                  double step = 0.5);

/// h = scale * sum_j coeffs_j h_j.
class Perturbation {
 public:
  Perturbation() = default;
  Perturbation(BumpBasis basis, std::vector<double> coeffs, double scale, int max_order = 20);

  /// The zero perturbation on a one-bump basis.
  static Perturbation zero(double delta);

  const BumpBasis& basis() const { return basis_; }
  const std::vector<double>& coeffs() const { return coeffs_; }
  double scale() const { return scale_; }
  int max_order() const { return max_order_; }
  bool is_zero() const;
  Perturbation negated() const;
  Perturbation scaled(double factor) const;

  /// h^(order)(s); exactly 0 outside the supports.
  double eval(double s, int order = 0) const;
  /// Taylor series of h at s through the given order.
  template <class T>
  Series<T> taylor(T s, int order) const;
  /// h^(order) at a possibly dual point.
  template <class T>
  T at(T s, int order) const;

  /// max_{j<=k} sup |h^(j)| over a dense grid.
  double ck_norm(int k) const;

  /// (h(sigma)-h(s))/(sigma-s), via the integral of h' for near-coincident
  /// arguments.
  template <class T>
  T divided_difference(T s, T sigma) const;

 private:
  BumpBasis basis_;
  std::vector<double> coeffs_;
  double scale_ = 0.0;
  int max_order_ = 20;
};

// ---- template implementations -------------------------------------------

template <class T>
Series<T> BumpBasis::taylor(int j, T s, int order) const {
  const auto [lo, hi] = supports_[j];
  const double c = 0.5 * (lo + hi), a = 0.5 * (hi - lo);
  Series<T> out(order);
  const T tau0 = (s - T(c)) * T(1.0 / a);
  const double t0 = value(tau0);
  if (!(1.0 - t0 * t0 > 2e-3)) return out;
  Series<T> tau = Series<T>::variable(order, tau0);
  for (int k = 1; k <= order; ++k) tau[k] = T(0.0);
  if (order >= 1) tau[1] = T(1.0 / a);
  Series<T> one(order, T(1.0));
  Series<T> g = -(one / (one - tau * tau));
  return exp(g);
}

template <class T>
Series<T> Perturbation::taylor(T s, int order) const {
  if (order > max_order_ + 1) throw Error(ErrorKind::OrderTooHigh, "derivative order exceeds configured maximum");
  Series<T> out(order);
  const int j = basis_.which(value(s));
  if (j < 0 || coeffs_[j] == 0.0 || scale_ == 0.0) return out;
  out = basis_.taylor(j, s, order);
  out *= T(scale_ * coeffs_[j]);
  return out;
}

template <class T>
T Perturbation::at(T s, int order) const {
  if constexpr (std::is_same_v<T, double>) {
    return eval(s, order);
  } else {
    return T(eval(s.v, order), eval(s.v, order + 1) * s.d);
  }
}

template <class T>
T Perturbation::divided_difference(T s, T sigma) const {
  const double gap = value(sigma) - value(s);
  if (std::abs(gap) >= 1e-4) return (at(sigma, 0) - at(s, 0)) / (sigma - s);
  // Integral form: int_0^1 h'(s + (sigma-s) tau) dtau, 16-node Gauss–Legendre.
  const Rule& gl = gauss_legendre(16);
  T acc(0.0);
  for (size_t i = 0; i < gl.x.size(); ++i) {
    const double tau = 0.5 * (1.0 + gl.x[i]);
    acc += T(0.5 * gl.w[i]) * at(s + (sigma - s) * T(tau), 1);
  }
  return acc;
}

}  // namespace klee
