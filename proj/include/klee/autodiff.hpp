#pragma once

// Forward-mode differentiation helpers: a first-order dual number and a
// truncated Taylor series templated on its coefficient type, so kernels can
// be written once and evaluated in double, Dual, Series<double> or
// Series<Dual>.

#include <array>
#include <cmath>
#include <cstddef>

#include "klee/error.hpp"

namespace klee {

struct Dual {
  double v = 0.0;
  double d = 0.0;

  constexpr Dual() = default;
  constexpr Dual(double value) : v(value) {}  // NOLINT: implicit by design
  constexpr Dual(double value, double deriv) : v(value), d(deriv) {}

  Dual& operator+=(const Dual& o) { v += o.v; d += o.d; return *this; }
  Dual& operator-=(const Dual& o) { v -= o.v; d -= o.d; return *this; }
  Dual& operator*=(const Dual& o) { d = d * o.v + v * o.d; v *= o.v; return *this; }
  Dual& operator/=(const Dual& o) {
    const double q = v / o.v;
    d = (d - q * o.d) / o.v;
    v = q;
    return *this;
  }
};

inline Dual operator+(Dual a, const Dual& b) { return a += b; }
inline Dual operator-(Dual a, const Dual& b) { return a -= b; }
inline Dual operator*(Dual a, const Dual& b) { return a *= b; }
inline Dual operator/(Dual a, const Dual& b) { return a /= b; }
inline Dual operator-(const Dual& a) { return {-a.v, -a.d}; }
inline bool operator<(const Dual& a, const Dual& b) { return a.v < b.v; }
inline bool operator>(const Dual& a, const Dual& b) { return a.v > b.v; }

inline Dual sqrt(const Dual& a) {
  const double r = std::sqrt(a.v);
  return {r, a.d / (2.0 * r)};
}
inline Dual exp(const Dual& a) {
  const double e = std::exp(a.v);
  return {e, e * a.d};
}
inline Dual log(const Dual& a) { return {std::log(a.v), a.d / a.v}; }
inline Dual pow(const Dual& a, double g) {
  const double p = std::pow(a.v, g);
  return {p, g * std::pow(a.v, g - 1.0) * a.d};
}
inline Dual sin(const Dual& a) { return {std::sin(a.v), std::cos(a.v) * a.d}; }
inline Dual cos(const Dual& a) { return {std::cos(a.v), -std::sin(a.v) * a.d}; }
inline Dual asin(const Dual& a) { return {std::asin(a.v), a.d / std::sqrt(1.0 - a.v * a.v)}; }
inline Dual atan(const Dual& a) { return {std::atan(a.v), a.d / (1.0 + a.v * a.v)}; }

inline double value(double x) { return x; }
inline double value(const Dual& x) { return x.v; }

/// Truncated power series c_0 + c_1 e + ... + c_n e^n with runtime order n.
template <class T>
class Series {
 public:
  static constexpr int kMaxOrder = 24;

  Series() : n_(0) { c_.fill(T(0.0)); }
  explicit Series(int order, T c0 = T(0.0)) : n_(order) {
    if (order < 0 || order > kMaxOrder) throw Error(ErrorKind::OrderTooHigh, "series order out of range");
    c_.fill(T(0.0));
    c_[0] = c0;
  }
  /// The independent variable x0 + e.
  static Series variable(int order, T x0) {
    Series s(order, x0);
    if (order >= 1) s.c_[1] = T(1.0);
    return s;
  }

  int order() const { return n_; }
  T& operator[](int k) { return c_[k]; }
  const T& operator[](int k) const { return c_[k]; }
  /// k-th derivative at the expansion point (k! * c_k).
  T derivative(int k) const {
    double f = 1.0;
    for (int j = 2; j <= k; ++j) f *= j;
    return c_[k] * T(f);
  }

  Series& operator+=(const Series& o) { for (int k = 0; k <= n_; ++k) c_[k] += o.c_[k]; return *this; }
  Series& operator-=(const Series& o) { for (int k = 0; k <= n_; ++k) c_[k] -= o.c_[k]; return *this; }
  Series& operator+=(const T& a) { c_[0] += a; return *this; }
  Series& operator-=(const T& a) { c_[0] -= a; return *this; }
  Series& operator*=(const T& a) { for (int k = 0; k <= n_; ++k) c_[k] *= a; return *this; }
  Series& operator*=(const Series& o) { return *this = *this * o; }

  friend Series operator+(Series a, const Series& b) { return a += b; }
  friend Series operator-(Series a, const Series& b) { return a -= b; }
  friend Series operator+(Series a, const T& b) { return a += b; }
  friend Series operator+(const T& b, Series a) { return a += b; }
  friend Series operator-(Series a, const T& b) { return a -= b; }
  friend Series operator-(const T& b, const Series& a) { return -a + b; }
  friend Series operator*(Series a, const T& b) { return a *= b; }
  friend Series operator*(const T& b, Series a) { return a *= b; }
  friend Series operator-(const Series& a) {
    Series r(a.n_);
    for (int k = 0; k <= a.n_; ++k) r.c_[k] = -a.c_[k];
    return r;
  }
  friend Series operator*(const Series& a, const Series& b) {
    Series r(a.n_ < b.n_ ? a.n_ : b.n_);
    for (int k = 0; k <= r.n_; ++k) {
      T acc(0.0);
      for (int j = 0; j <= k; ++j) acc += a.c_[j] * b.c_[k - j];
      r.c_[k] = acc;
    }
    return r;
  }
  friend Series operator/(const Series& a, const Series& b) {
    Series r(a.n_ < b.n_ ? a.n_ : b.n_);
    for (int k = 0; k <= r.n_; ++k) {
      T acc = a.c_[k];
      for (int j = 1; j <= k; ++j) acc -= b.c_[j] * r.c_[k - j];
      r.c_[k] = acc / b.c_[0];
    }
    return r;
  }

  friend Series exp(const Series& a) {
    using std::exp;
    Series r(a.n_);
    r.c_[0] = exp(a.c_[0]);
    for (int k = 1; k <= a.n_; ++k) {
      T acc(0.0);
      for (int j = 1; j <= k; ++j) acc += T(double(j)) * a.c_[j] * r.c_[k - j];
      r.c_[k] = acc / T(double(k));
    }
    return r;
  }
  /// a^g for a_0 > 0.
  friend Series pow(const Series& a, double g) {
    using std::pow;
    Series r(a.n_);
    r.c_[0] = pow(a.c_[0], g);
    for (int k = 1; k <= a.n_; ++k) {
      T acc(0.0);
      for (int j = 1; j <= k; ++j) acc += T(g * j - (k - j)) * a.c_[j] * r.c_[k - j];
      r.c_[k] = acc / (T(double(k)) * a.c_[0]);
    }
    return r;
  }
  friend Series sqrt(const Series& a) { return pow(a, 0.5); }

 private:
  int n_;
  std::array<T, kMaxOrder + 1> c_;
};

/// Integer power by repeated multiplication (valid for any a_0).
template <class T>
Series<T> ipow(const Series<T>& a, int m) {
  Series<T> r(a.order(), T(1.0));
  for (int i = 0; i < m; ++i) r = r * a;
  return r;
}

template <class T>
T ipow(const T& a, int m) {
  T r(1.0);
  for (int i = 0; i < m; ++i) r = r * a;
  return r;
}

inline double factorial(int n) {
  double f = 1.0;
  for (int j = 2; j <= n; ++j) f *= j;
  return f;
}

inline double double_factorial(int n) {
  double f = 1.0;
  for (int j = n; j > 1; j -= 2) f *= j;
  return f;
}

}  // namespace klee
