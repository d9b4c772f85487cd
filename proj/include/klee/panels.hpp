#pragma once

#include <array>
#include <vector>

namespace klee {

/// Composite Chebyshev–Lobatto grid: consecutive panels share their endpoint
/// node. Panel p owns global nodes [p(n-1), p(n-1)+n-1].
class PanelGrid {
 public:
  PanelGrid() = default;
  PanelGrid(std::vector<double> breaks, int nodes_per_panel);

  int size() const { return static_cast<int>(x_.size()); }
  int panels() const { return static_cast<int>(breaks_.size()) - 1; }
  int nodes_per_panel() const { return n_; }
  double a() const { return breaks_.front(); }
  double b() const { return breaks_.back(); }
  const std::vector<double>& nodes() const { return x_; }
  const std::vector<double>& breaks() const { return breaks_; }
  double node(int i) const { return x_[i]; }
  int panel_start(int p) const { return p * (n_ - 1); }
  double panel_lo(int p) const { return breaks_[p]; }
  double panel_hi(int p) const { return breaks_[p + 1]; }

  /// Panel whose half-open node range [start, end) holds node i.
  int panel_of_node(int i) const;
  /// Panel containing x (clamped to the grid).
  int locate(double x) const;

  /// Barycentric weights of the panel interpolant at x; returns the panel.
  int interp_weights(double x, double* w) const;
  /// Barycentric weights of panel p's interpolant at x (x may be a break).
  void panel_interp_weights(int p, double x, double* w) const;
  double interpolate(const std::vector<double>& v, double x) const;

  /// Weights w_k with sum_k w_k v(x_{start+k}) = integral of the panel
  /// interpolant from x to the panel's right end (x inside panel p).
  void partial_weights(int p, double x, double* w) const;
  /// Clenshaw–Curtis weights of panel p.
  void panel_weights(int p, double* w) const;

  /// I_i = integral from node i to b of the interpolant of v.
  std::vector<double> tail_integral(const std::vector<double>& v) const;
  /// Spectral derivative (shared nodes take the average of both panels).
  std::vector<double> derivative(const std::vector<double>& v) const;

 private:
  std::vector<double> breaks_;
  int n_ = 0;
  std::vector<double> x_;
  std::vector<double> t_;     // reference nodes on [-1, 1]
  std::vector<double> bw_;    // barycentric weights
  std::vector<double> wint_;  // n x n: integral of l_k from t_j to 1
  std::vector<double> dmat_;  // n x n differentiation matrix
};

/// Uniform-or-not clamped cubic spline with value and two derivatives.
class CubicSpline {
 public:
  CubicSpline() = default;
  CubicSpline(std::vector<double> x, std::vector<double> y, double slope_lo, double slope_hi);

  /// Returns {f, f', f''} at t (clamped to the knot range).
  std::array<double, 3> eval(double t) const;
  double operator()(double t) const { return eval(t)[0]; }

  const std::vector<double>& knots() const { return x_; }
  const std::vector<double>& values() const { return y_; }
  double slope_lo() const { return s0_; }
  double slope_hi() const { return s1_; }

 private:
  std::vector<double> x_, y_, m_;
  double s0_ = 0.0, s1_ = 0.0;
};

/// Equally spaced points a, ..., b (n >= 2).
std::vector<double> linspace(double a, double b, int n);

}  // namespace klee
