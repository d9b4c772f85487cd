#include "klee/even_builder.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <string>

#include "klee/quadrature.hpp"

namespace klee {

namespace {

constexpr double kRootHalf = 0.70710678118654752440;

// Kernel coefficients at one abscissa: d^{p+1}/ds^{p+1} u^p and
// d^p/ds^p (u^{p-1} L(s, xi)), u = L(sigma, xi)^2 - L(s, xi)^2.
struct KernelPair {
  double k1, k2;
};

KernelPair kernel_at(int p, double s, const Series<double>& H, double Lsigma, double xi) {
  const Series<double> S = Series<double>::variable(p + 1, s);
  const Series<double> L = S * xi + H;
  const Series<double> u = Lsigma * Lsigma - L * L;
  const Series<double> up = ipow(u, p - 1);
  return {(up * u).derivative(p + 1), (up * L).derivative(p)};
}

void theta_with(int p, const Series<double>& H, double s, double sigma, double hsigma, const double* Z, double* out) {
  const double x = Z[0], y = Z[1], xp = Z[2], yp = Z[3];
  const KernelPair kx = kernel_at(p, s, H, -sigma * x + hsigma, -x);
  const KernelPair ky = kernel_at(p, s, H, sigma * y + hsigma, y);
  out[0] = -xp;
  out[1] = -yp;
  out[2] = kx.k1 * xp + ky.k1 * yp;
  out[3] = kx.k2 * xp + ky.k2 * yp;
}

std::string sci(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.3e", v);
  return buf;
}

double sign_pow(int p) { return (p % 2 == 0) ? 1.0 : -1.0; }

std::vector<double> even_breaks(const Perturbation& h, double a, double b, double width) {
  std::vector<double> cuts{a, b, 1.0 - 2.0 * h.basis().delta(), 1.0 - h.basis().delta()};
  for (const auto& [lo, hi] : h.basis().supports()) {
    cuts.push_back(lo);
    cuts.push_back(hi);
  }
  std::sort(cuts.begin(), cuts.end());
  std::vector<double> out;
  for (double c : cuts)
    if (c >= a && c <= b && (out.empty() || c - out.back() > 1e-12)) out.push_back(c);
  std::vector<double> breaks{out.front()};
  for (size_t k = 1; k < out.size(); ++k) {
    const int n = std::max(1, static_cast<int>(std::ceil((out[k] - out[k - 1]) / width - 1e-9)));
    for (int j = 1; j <= n; ++j) breaks.push_back(j == n ? out[k] : out[k - 1] + (out[k] - out[k - 1]) * j / n);
  }
  return breaks;
}

void z_unperturbed(double s, double* out) {
  out[0] = out[1] = x_unperturbed(s, 0);
  out[2] = out[3] = x_unperturbed(s, 1);
}

}  // namespace

double even_rhs(int p, double c, double s) { return c * x_unperturbed(s, p + 1); }

void even_G(int p, const Perturbation& h, double s, const double* Z, double* out) {
  const double x = Z[0], y = Z[1], xp = Z[2], yp = Z[3];
  const double hv = h.eval(s), h1 = h.eval(s, 1);
  const double Lx = -s * x + hv, Lsx = -x + h1;
  const double Ly = s * y + hv, Lsy = y + h1;
  const double px = ipow(Lx * Lsx, p - 1), py = ipow(Ly * Lsy, p - 1);
  const double c1 = sign_pow(p) * std::ldexp(factorial(p), p);
  const double c2 = sign_pow(p - 1) * std::ldexp(factorial(p - 1), p - 1);
  out[0] = x;
  out[1] = y;
  out[2] = c1 * (px * Lx * Lsx * xp + py * Ly * Lsy * yp);
  out[3] = c2 * (px * Lx * xp + py * Ly * yp);
}

void even_Theta(int p, const Perturbation& h, double s, double sigma, const double* Z, double* out) {
  theta_with(p, h.taylor(s, p + 1), s, sigma, h.eval(sigma), Z, out);
}

Eigen::Matrix2d even_A(int p, const Perturbation& h, double s, double x, double y) {
  Eigen::Matrix2d A;
  double g[4];
  const double e0[4] = {x, y, 1.0, 0.0}, e1[4] = {x, y, 0.0, 1.0};
  even_G(p, h, s, e0, g);
  A(0, 0) = g[2];
  A(1, 0) = g[3];
  even_G(p, h, s, e1, g);
  A(0, 1) = g[2];
  A(1, 1) = g[3];
  return A;
}

std::array<double, 2> xi_integrals(int p, const Perturbation& h, double s) {
  const Rule& gl = gauss_legendre(24);
  const Series<double> S = Series<double>::variable(p + 1, s);
  const Series<double> H = h.taylor(s, p + 1);
  double a1 = 0.0, a2 = 0.0;
  for (size_t i = 0; i < gl.x.size(); ++i) {
    const double xi = kRootHalf * gl.x[i];
    const Series<double> L = S * xi + H;
    const Series<double> u = (1.0 - xi * xi) - L * L;
    const Series<double> up = ipow(u, p - 1);
    a1 += gl.w[i] * (up * u).derivative(p + 1);
    a2 += gl.w[i] * (up * L).derivative(p);
  }
  return {kRootHalf * a1, kRootHalf * a2};
}

std::array<double, 2> xi_integrals(const EvenSystemData& sys, double s) { return xi_integrals(sys.p, sys.h, s); }

EvenSystemData build_even_system(int d, const Perturbation& h, const EvenOptions& opt) {
  if (d < 4 || d % 2 != 0) throw Error(ErrorKind::InvalidArgument, "even builder needs even d >= 4");
  EvenSystemData out;
  out.d = d;
  out.p = (d - 2) / 2;
  out.delta = h.basis().delta();
  out.constant = unit_ball_volume(d - 1) / unit_ball_volume(d - 2);
  out.h = h;
  const int p = out.p;
  out.grid = PanelGrid(even_breaks(h, out.a(), 1.0, opt.panel_width), opt.nodes_per_panel);
  const PanelGrid& g = out.grid;
  const int N = g.size();

  out.Z_o.grid = g;
  out.Z_o.m = 4;
  out.Z_o.values.resize(N * 4);
  for (int i = 0; i < N; ++i) z_unperturbed(g.node(i), &out.Z_o.values[i * 4]);

  // Picard preconditioner: D_Z G_o at (1, Z_o(1)), by central differences.
  const Perturbation zero = Perturbation::zero(out.delta);
  Eigen::MatrixXd Q(4, 4);
  double z1[4], zp[4], zm[4], gp[4], gm[4];
  z_unperturbed(1.0, z1);
  for (int c = 0; c < 4; ++c) {
    std::copy(z1, z1 + 4, zp);
    std::copy(z1, z1 + 4, zm);
    zp[c] += 1e-6;
    zm[c] -= 1e-6;
    even_G(p, zero, 1.0, zp, gp);
    even_G(p, zero, 1.0, zm, gm);
    for (int r = 0; r < 4; ++r) Q(r, c) = (gp[r] - gm[r]) / 2e-6;
  }

  // Kernel with the Taylor series of h at s cached across the sigma sweep.
  struct Cache {
    double s = std::nan("");
    Series<double> H;
  };
  auto hp = std::make_shared<Perturbation>(h);
  auto make_system = [p](std::shared_ptr<Perturbation> hh) {
    auto cache = std::make_shared<Cache>();
    SingularSystem sys;
    sys.m = 4;
    sys.b = 1.0;
    sys.G = [p, hh](double s, const double* Z, double* o) { even_G(p, *hh, s, Z, o); };
    sys.Theta = [p, hh, cache](double s, double sigma, const double* Z, double* o) {
      if (!(cache->s == s)) {
        cache->H = hh->taylor(s, p + 1);
        cache->s = s;
      }
      theta_with(p, cache->H, s, sigma, hh->eval(sigma), Z, o);
    };
    return sys;
  };

  // Discrete Xi_o: makes Z_o an exact fixed point of the discretized
  // unperturbed system, so the perturbed solution is unchanged wherever h
  // does not reach.
  SingularSystem sys_o = make_system(std::make_shared<Perturbation>(zero));
  sys_o.Q = Q;
  auto xi_disc = std::make_shared<std::vector<double>>(defect_at_nodes(sys_o, out.Z_o, std::vector<double>(N * 4, 0.0)));
  const double c = out.constant;
  for (int i = 0; i < N; ++i) {
    const double s = g.node(i);
    const auto x0 = xi_integrals(p, zero, s);
    const double ana[4] = {kRootHalf, kRootHalf, -x0[0] + even_rhs(p, c, s), -x0[1]};
    for (int k = 0; k < 4; ++k)
      out.xi_consistency = std::max(out.xi_consistency, std::abs((*xi_disc)[i * 4 + k] - ana[k]));
  }
  auto nodes = std::make_shared<std::vector<double>>(N);
  for (int i = 0; i < N; ++i) (*nodes)[i] = g.node(i);

  out.system = make_system(hp);
  out.system.Q = Q;
  out.system.Xi = [p, c, hp, xi_disc, nodes, zero](double s, double* o) {
    const auto xh = xi_integrals(p, *hp, s);
    const auto x0 = xi_integrals(p, zero, s);
    const auto it = std::lower_bound(nodes->begin(), nodes->end(), s);
    if (it != nodes->end() && *it == s) {
      const double* base = &(*xi_disc)[(it - nodes->begin()) * 4];
      o[0] = base[0];
      o[1] = base[1];
      o[2] = base[2] - (xh[0] - x0[0]);
      o[3] = base[3] - (xh[1] - x0[1]);
    } else {
      o[0] = o[1] = kRootHalf;
      o[2] = -xh[0] + even_rhs(p, c, s);
      o[3] = -xh[1];
    }
  };
  out.system.center = [](double s, double* o) { z_unperturbed(s, o); };
  out.system.radius = {0.1, 0.1, 0.5, 0.5};
  return out;
}

EvenSolution solve_even(const EvenSystemData& sys, PicardOptions opt) {
  opt.frozen_from = 1.0 - sys.delta;
  EvenSolution sol;
  sol.picard = picard_solve(sys.system, sys.Z_o, opt);
  if (!sol.picard.locality_ok)
    throw Error(ErrorKind::ConvergenceFailure, "solution moved where the perturbation vanishes");
  sol.Z = sol.picard.Z;
  return sol;
}

MomentReport moment_identity_check(const ChordState& Z, const EvenSystemData& sys) {
  MomentReport rep;
  const int p = sys.p;
  const double hi = 1.0 - 2.0 * sys.delta;
  for (int i = 0; i < Z.grid.size(); ++i) {
    const double s = Z.grid.node(i);
    if (s > hi + 1e-14) continue;
    const double x = Z(i, 0), y = Z(i, 1), xo = x_unperturbed(s);
    rep.deviation = std::max(rep.deviation, std::abs(x - xo) + std::abs(y - xo));
    rep.odd_moment = std::max(rep.odd_moment, std::abs(std::pow(y, 2 * p) - std::pow(x, 2 * p)) / (2 * p));
    const double em = (std::pow(y, 2 * p + 1) + std::pow(x, 2 * p + 1) - 2.0 * std::pow(xo, 2 * p + 1)) / (2 * p + 1);
    rep.even_moment = std::max(rep.even_moment, std::abs(em));
  }
  return rep;
}

std::vector<double> moment_chain(const ProfileFunction& f, int p, double s) {
  const auto [x, y] = chord_endpoints(f, s, 0.0);
  std::vector<double> pts{-x};
  for (double b : f.xi_breaks(-x, y)) pts.push_back(b);
  pts.push_back(y);
  const Rule& gl = gauss_legendre(32);
  std::vector<double> out;
  for (int j = 1; j <= p; ++j) {
    double got = 0.0, ref = 0.0;
    for (size_t k = 1; k < pts.size(); ++k) {
      const double c = 0.5 * (pts[k] + pts[k - 1]), r = 0.5 * (pts[k] - pts[k - 1]);
      for (size_t i = 0; i < gl.x.size(); ++i) {
        const double xi = c + r * gl.x[i];
        const double mono = ipow(xi, 2 * (p - j)) * r * gl.w[i];
        const double fv = f(xi);
        got += mono * ipow(fv * fv, j);
        ref += mono * ipow(1.0 - xi * xi, j);
      }
    }
    out.push_back(std::abs(got - ref) / std::abs(ref));
  }
  return out;
}

EvenBuild assemble_even_body(int d, const Perturbation& h, const EvenOptions& opt) {
  EvenBuild out;
  const EvenSystemData sys = build_even_system(d, h, opt);
  out.xi_consistency = sys.xi_consistency;
  out.scale_used = h.scale();
  const EvenSolution sol = solve_even(sys, opt.picard);
  out.picard = sol.picard;
  out.moments = moment_identity_check(sol.Z, sys);
  if (!(out.moments.deviation <= opt.moment_tol))
    throw Error(ErrorKind::ChainCheckFailure,
                "chords do not return to the circle: deviation " + sci(out.moments.deviation));
  out.chords = ChordFunctions{sol.Z, sys.a(), 1.0};
  const ProfileFunction f = chord_profile(out.chords, h, opt.chord_knots);
  out.chain = moment_chain(f, sys.p, sys.a());
  for (size_t j = 0; j < out.chain.size(); ++j)
    if (!(out.chain[j] <= opt.chain_tol))
      throw Error(ErrorKind::ChainCheckFailure, "moment chain fails at j=" + std::to_string(j + 1) + ": residual " +
                                                    sci(out.chain[j]));
  out.convexity = convexity_check(f, opt.concavity_margin);
  if (!out.convexity.pass)
    throw Error(ErrorKind::ConvexityFailure, "profile not concave near xi=" + sci(out.convexity.at_xi));
  out.body = BodyOfRevolution{d, f, h};
  return out;
}

EvenBuild build_even_body(int d, const Perturbation& h, const EvenOptions& opt) {
  Perturbation cur = h;
  for (int k = 0;; ++k) {
    try {
      EvenBuild b = assemble_even_body(d, cur, opt);
      b.halvings = k;
      return b;
    } catch (const Error& e) {
      const ErrorKind kind = e.kind();
      const bool retry = kind == ErrorKind::ChainCheckFailure || kind == ErrorKind::ConvexityFailure ||
                         kind == ErrorKind::NonMonotone || kind == ErrorKind::DomainEscape ||
                         kind == ErrorKind::NoContraction || kind == ErrorKind::ConvergenceFailure;
      if (!retry || k >= opt.max_halvings) throw;
      cur = cur.scaled(0.5);
    }
  }
}

}  // namespace klee
