#include "klee/panels.hpp"

#include <algorithm>
#include <cmath>

#include "klee/error.hpp"
#include "klee/quadrature.hpp"

namespace klee {

PanelGrid::PanelGrid(std::vector<double> breaks, int nodes_per_panel)
    : breaks_(std::move(breaks)), n_(nodes_per_panel) {
  if (n_ < 3 || breaks_.size() < 2) throw Error(ErrorKind::InvalidArgument, "panel grid needs >=3 nodes and >=1 panel");
  for (size_t i = 1; i < breaks_.size(); ++i)
    if (!(breaks_[i] > breaks_[i - 1])) throw Error(ErrorKind::InvalidArgument, "panel breaks must increase");

  t_.resize(n_);
  bw_.resize(n_);
  for (int j = 0; j < n_; ++j) {
    t_[j] = -std::cos(M_PI * j / (n_ - 1));
    bw_[j] = (j % 2 ? -1.0 : 1.0) * ((j == 0 || j == n_ - 1) ? 0.5 : 1.0);
  }
  t_[0] = -1.0;
  t_[n_ - 1] = 1.0;
  if (n_ % 2) t_[n_ / 2] = 0.0;

  // Lagrange basis evaluation on the reference panel.
  auto basis = [&](double t, std::vector<double>& l) {
    l.assign(n_, 0.0);
    for (int k = 0; k < n_; ++k)
      if (t == t_[k]) { l[k] = 1.0; return; }
    double den = 0.0;
    for (int k = 0; k < n_; ++k) { l[k] = bw_[k] / (t - t_[k]); den += l[k]; }
    for (int k = 0; k < n_; ++k) l[k] /= den;
  };

  const Rule& gl = gauss_legendre(n_ + 2);
  std::vector<double> l;
  wint_.assign(n_ * n_, 0.0);
  for (int j = 0; j < n_; ++j) {
    const double lo = t_[j], c = 0.5 * (lo + 1.0), h = 0.5 * (1.0 - lo);
    if (h == 0.0) continue;
    for (size_t q = 0; q < gl.x.size(); ++q) {
      basis(c + h * gl.x[q], l);
      for (int k = 0; k < n_; ++k) wint_[j * n_ + k] += h * gl.w[q] * l[k];
    }
  }

  dmat_.assign(n_ * n_, 0.0);
  for (int j = 0; j < n_; ++j) {
    double diag = 0.0;
    for (int k = 0; k < n_; ++k) {
      if (k == j) continue;
      const double v = (bw_[k] / bw_[j]) / (t_[j] - t_[k]);
      dmat_[j * n_ + k] = v;
      diag -= v;
    }
    dmat_[j * n_ + j] = diag;
  }

  const int P = panels();
  x_.resize(P * (n_ - 1) + 1);
  for (int p = 0; p < P; ++p) {
    const double c = 0.5 * (breaks_[p] + breaks_[p + 1]), h = 0.5 * (breaks_[p + 1] - breaks_[p]);
    for (int j = 0; j < n_; ++j) x_[p * (n_ - 1) + j] = c + h * t_[j];
    x_[p * (n_ - 1)] = breaks_[p];
  }
  x_.back() = breaks_.back();
}

int PanelGrid::panel_of_node(int i) const { return std::min(i / (n_ - 1), panels() - 1); }

int PanelGrid::locate(double x) const {
  auto it = std::upper_bound(breaks_.begin(), breaks_.end(), x);
  int p = static_cast<int>(it - breaks_.begin()) - 1;
  return std::clamp(p, 0, panels() - 1);
}

int PanelGrid::interp_weights(double x, double* w) const {
  const int p = locate(x);
  panel_interp_weights(p, x, w);
  return p;
}

void PanelGrid::panel_interp_weights(int p, double x, double* w) const {
  const double c = 0.5 * (breaks_[p] + breaks_[p + 1]), h = 0.5 * (breaks_[p + 1] - breaks_[p]);
  const double t = (x - c) / h;
  for (int k = 0; k < n_; ++k) w[k] = 0.0;
  for (int k = 0; k < n_; ++k)
    if (t == t_[k]) { w[k] = 1.0; return; }
  double den = 0.0;
  for (int k = 0; k < n_; ++k) { w[k] = bw_[k] / (t - t_[k]); den += w[k]; }
  for (int k = 0; k < n_; ++k) w[k] /= den;
}

double PanelGrid::interpolate(const std::vector<double>& v, double x) const {
  std::vector<double> w(n_);
  const int p = interp_weights(x, w.data());
  double acc = 0.0;
  for (int k = 0; k < n_; ++k) acc += w[k] * v[panel_start(p) + k];
  return acc;
}

void PanelGrid::partial_weights(int p, double x, double* w) const {
  const double c = 0.5 * (breaks_[p] + breaks_[p + 1]), h = 0.5 * (breaks_[p + 1] - breaks_[p]);
  const double t = (x - c) / h;
  for (int j = 0; j < n_; ++j)
    if (std::abs(t - t_[j]) < 1e-15) {
      for (int k = 0; k < n_; ++k) w[k] = h * wint_[j * n_ + k];
      return;
    }
  // Off-node start: integrate the basis directly.
  const Rule& gl = gauss_legendre(n_ + 2);
  const double cc = 0.5 * (t + 1.0), hh = 0.5 * (1.0 - t);
  for (int k = 0; k < n_; ++k) w[k] = 0.0;
  std::vector<double> l(n_);
  for (size_t q = 0; q < gl.x.size(); ++q) {
    const double tq = cc + hh * gl.x[q];
    double den = 0.0;
    for (int k = 0; k < n_; ++k) { l[k] = bw_[k] / (tq - t_[k]); den += l[k]; }
    for (int k = 0; k < n_; ++k) w[k] += h * hh * gl.w[q] * l[k] / den;
  }
}

void PanelGrid::panel_weights(int p, double* w) const {
  const double h = 0.5 * (breaks_[p + 1] - breaks_[p]);
  for (int k = 0; k < n_; ++k) w[k] = h * wint_[k];
}

std::vector<double> PanelGrid::tail_integral(const std::vector<double>& v) const {
  const int N = size(), P = panels();
  std::vector<double> out(N, 0.0);
  double above = 0.0;
  for (int p = P - 1; p >= 0; --p) {
    const double h = 0.5 * (breaks_[p + 1] - breaks_[p]);
    const int s = panel_start(p);
    for (int j = 0; j < n_ - 1; ++j) {
      double acc = 0.0;
      for (int k = 0; k < n_; ++k) acc += wint_[j * n_ + k] * v[s + k];
      out[s + j] = above + h * acc;
    }
    above = out[s];
  }
  out[N - 1] = 0.0;
  return out;
}

std::vector<double> PanelGrid::derivative(const std::vector<double>& v) const {
  const int N = size(), P = panels();
  std::vector<double> out(N, 0.0), cnt(N, 0.0);
  for (int p = 0; p < P; ++p) {
    const double h = 0.5 * (breaks_[p + 1] - breaks_[p]);
    const int s = panel_start(p);
    for (int j = 0; j < n_; ++j) {
      double acc = 0.0;
      for (int k = 0; k < n_; ++k) acc += dmat_[j * n_ + k] * v[s + k];
      out[s + j] += acc / h;
      cnt[s + j] += 1.0;
    }
  }
  for (int i = 0; i < N; ++i) out[i] /= cnt[i];
  return out;
}

CubicSpline::CubicSpline(std::vector<double> x, std::vector<double> y, double slope_lo, double slope_hi)
    : x_(std::move(x)), y_(std::move(y)), s0_(slope_lo), s1_(slope_hi) {
  const int n = static_cast<int>(x_.size());
  if (n < 2 || y_.size() != x_.size()) throw Error(ErrorKind::InvalidArgument, "spline needs matching knots/values");
  // Tridiagonal system for knot second derivatives (clamped ends).
  std::vector<double> a(n), b(n), c(n), r(n);
  for (int i = 0; i < n; ++i) {
    if (i == 0) {
      const double h = x_[1] - x_[0];
      b[i] = h / 3.0; c[i] = h / 6.0; a[i] = 0.0;
      r[i] = (y_[1] - y_[0]) / h - s0_;
    } else if (i == n - 1) {
      const double h = x_[i] - x_[i - 1];
      a[i] = h / 6.0; b[i] = h / 3.0; c[i] = 0.0;
      r[i] = s1_ - (y_[i] - y_[i - 1]) / h;
    } else {
      const double h0 = x_[i] - x_[i - 1], h1 = x_[i + 1] - x_[i];
      a[i] = h0 / 6.0; b[i] = (h0 + h1) / 3.0; c[i] = h1 / 6.0;
      r[i] = (y_[i + 1] - y_[i]) / h1 - (y_[i] - y_[i - 1]) / h0;
    }
  }
  for (int i = 1; i < n; ++i) {
    const double m = a[i] / b[i - 1];
    b[i] -= m * c[i - 1];
    r[i] -= m * r[i - 1];
  }
  m_.assign(n, 0.0);
  m_[n - 1] = r[n - 1] / b[n - 1];
  for (int i = n - 2; i >= 0; --i) m_[i] = (r[i] - c[i] * m_[i + 1]) / b[i];
}

std::array<double, 3> CubicSpline::eval(double t) const {
  t = std::clamp(t, x_.front(), x_.back());
  auto it = std::upper_bound(x_.begin(), x_.end(), t);
  int i = std::clamp(static_cast<int>(it - x_.begin()) - 1, 0, static_cast<int>(x_.size()) - 2);
  const double h = x_[i + 1] - x_[i];
  const double A = (x_[i + 1] - t) / h, B = (t - x_[i]) / h;
  const double f = A * y_[i] + B * y_[i + 1] + ((A * A * A - A) * m_[i] + (B * B * B - B) * m_[i + 1]) * h * h / 6.0;
  const double f1 = (y_[i + 1] - y_[i]) / h - (3.0 * A * A - 1.0) / 6.0 * h * m_[i] + (3.0 * B * B - 1.0) / 6.0 * h * m_[i + 1];
  const double f2 = A * m_[i] + B * m_[i + 1];
  return {f, f1, f2};
}

std::vector<double> linspace(double a, double b, int n) {
  std::vector<double> v(n);
  for (int i = 0; i < n; ++i) v[i] = (i == n - 1) ? b : a + (b - a) * i / (n - 1);
  return v;
}

}  // namespace klee
