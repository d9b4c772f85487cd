#include <algorithm>
#include <cmath>
#include <cstdio>
#include <map>
#include <memory>
#include <mutex>
#include <tuple>

#include "klee/odd_builder.hpp"
#include "klee/quadrature.hpp"

namespace klee {

namespace {

constexpr double kRootHalf = 0.70710678118654752440;

// Truncated power series with a small fixed capacity; the kernels only need
// order q + 1.
template <class T>
struct Poly {
  static constexpr int kCap = 8;
  int n = 0;
  std::array<T, kCap> c{};

  static Poly from(const Series<T>& s, int order) {
    Poly p;
    p.n = order;
    for (int k = 0; k <= order; ++k) p.c[k] = s[k];
    return p;
  }
  Poly operator*(const Poly& o) const {
    Poly r;
    r.n = n;
    for (int k = 0; k <= n; ++k) {
      T acc(0.0);
      for (int j = 0; j <= k; ++j) acc += c[j] * o.c[k - j];
      r.c[k] = acc;
    }
    return r;
  }
};

// J factors from the Taylor series of L(s + e, xi) through order q + 1 and
// f^2. With u(s + e) = u0 + w(e), u0 = f^2 - L(s)^2, the half power is
// expanded binomially and sqrt(u0) factored out.
template <class T>
std::array<T, 2> j_core(int q, const Poly<T>& L, const T& f2) {
  const int n = q + 1;
  if (n >= Poly<T>::kCap) throw Error(ErrorKind::OrderTooHigh, "dimension too large for the odd kernels");
  const T u0 = f2 - L.c[0] * L.c[0];
  Poly<T> w = L * L;
  w.c[0] = T(0.0);
  for (int k = 1; k <= n; ++k) w.c[k] = -w.c[k];
  Poly<T> wk;
  wk.n = n;
  wk.c[0] = T(1.0);
  T J1(0.0), J2(0.0);
  double c1 = 1.0, c2 = 1.0;  // binomial(q + 1/2, k), binomial(q - 1/2, k)
  for (int k = 0; k <= n; ++k) {
    J1 += T(c1) * ipow(u0, n - k) * wk.c[n];
    if (k <= q) {
      T acc(0.0);
      for (int j = 0; j <= q; ++j) acc += wk.c[j] * L.c[q - j];
      J2 += T(c2) * ipow(u0, q - k) * acc;
    }
    c1 *= (q + 0.5 - k) / (k + 1);
    c2 *= (q - 0.5 - k) / (k + 1);
    if (k < n) wk = wk * w;
  }
  return {J1 * T(factorial(n)), J2 * T(factorial(q))};
}

// L(s + e, xi) = (s + e) xi + h(s + e) as a truncated series.
template <class T>
Poly<T> line_series(int q, const T& s, const T& xi, const Poly<T>& Hs) {
  Poly<T> L = Hs;
  L.c[0] += s * xi;
  if (q + 1 >= 1) L.c[1] += xi;
  return L;
}

template <class T>
std::array<T, 2> kernel_core(int q, const T& s, const Poly<T>& Hs, const T& H, double sigma, double hsigma,
                             double xi) {
  using std::sqrt;
  const Poly<T> L = line_series(q, s, T(xi), Hs);
  const double Lsig = sigma * xi + hsigma;
  const auto J = j_core(q, L, T(Lsig * Lsig));
  const T prod = (T(xi) + H) * (T(Lsig) + L.c[0]);
  if (!(value(prod) > 0.0))
    throw Error(ErrorKind::KernelDomainViolation, "kernel evaluated outside (xi + H)(L + L) > 0");
  const T den = sqrt(prod);
  return {J[0] / den, J[1] / den};
}

template <class T>
std::array<T, 2> v_core(int q, const Perturbation& h, const T& s, int nodes) {
  using std::asin;
  using std::sin;
  using std::sqrt;
  const Poly<T> Hs = Poly<T>::from(h.taylor(s, q + 1), q + 1);
  const T hv = Hs.c[0];
  const T n2 = T(1.0) + s * s;
  // 1 - xi^2 - L^2 = (1 + s^2)(r^2 - (xi - c)^2); xi = c + r sin(theta).
  const T c = -(s * hv) / n2;
  const T r = sqrt(n2 - hv * hv) / n2;
  const T t0 = asin((T(-kRootHalf) - c) / r), t1 = asin((T(kRootHalf) - c) / r);
  const Rule& gl = gauss_legendre(nodes);
  const T mid = (t0 + t1) * T(0.5), half = (t1 - t0) * T(0.5);
  T a1(0.0), a2(0.0);
  for (size_t i = 0; i < gl.x.size(); ++i) {
    const T xi = c + r * sin(mid + half * T(gl.x[i]));
    const auto J = j_core(q, line_series(q, s, xi, Hs), T(1.0) - xi * xi);
    a1 += T(gl.w[i]) * J[0];
    a2 += T(gl.w[i]) * J[1];
  }
  const T scale = half / sqrt(n2);
  return {a1 * scale, a2 * scale};
}

Dual rhs_dual(int q, double c, const Dual& s) {
  return {c * x_unperturbed(s.v, q + 1), c * x_unperturbed(s.v, q + 2) * s.d};
}

void z_unperturbed(double s, double* out) {
  out[0] = out[1] = x_unperturbed(s, 0);
  out[2] = out[3] = x_unperturbed(s, 1);
}

// Kernel rows (d/dt K_1, d/dt K_2)(t, sigma) contracted with (x', y') at
// sigma; Hs carries the Taylor data of h at t with a derivative in t.
std::array<double, 2> theta_integrand(int q, const Dual& t, const Poly<Dual>& Hs, const Dual& H, double sigma,
                                      double hsig, const double* Z) {
  const auto kx = kernel_core(q, t, Hs, H, sigma, hsig, -Z[0]);
  const auto ky = kernel_core(q, t, Hs, H, sigma, hsig, Z[1]);
  return {kx[0].d * Z[2] + ky[0].d * Z[3], kx[1].d * Z[2] + ky[1].d * Z[3]};
}

// asin(sqrt((b - s)/(sigma - s))): the angle at which t = s + (sigma - s)
// sin^2 reaches b.
double theta_of(double s, double sigma, double b) {
  return std::asin(std::sqrt(std::clamp((b - s) / (sigma - s), 0.0, 1.0)));
}

void theta_point(int q, const Perturbation& h, double s, double sigma, const double* Z, double* out,
                 const std::vector<double>& breaks, int nodes) {
  out[0] = -Z[2];
  out[1] = -Z[3];
  out[2] = out[3] = 0.0;
  const double hsig = h.eval(sigma);
  if (sigma == s) {
    const Dual t(s, 1.0);
    const auto F = theta_integrand(q, t, Poly<Dual>::from(h.taylor(t, q + 1), q + 1),
                                   h.divided_difference(t, Dual(sigma)), sigma, hsig, Z);
    out[2] = 0.5 * M_PI * F[0];
    out[3] = 0.5 * M_PI * F[1];
    return;
  }
  std::vector<double> th{0.0, 0.5 * M_PI};
  const double lo = std::min(s, sigma), hi = std::max(s, sigma);
  for (double b : breaks)
    if (b > lo && b < hi) th.push_back(theta_of(s, sigma, b));
  std::sort(th.begin(), th.end());
  const Rule& gl = gauss_legendre(nodes);
  for (size_t k = 0; k + 1 < th.size(); ++k) {
    const double half = 0.5 * (th[k + 1] - th[k]), mid = 0.5 * (th[k + 1] + th[k]);
    for (size_t g = 0; g < gl.x.size(); ++g) {
      const double a = mid + half * gl.x[g], c = std::cos(a), sn = std::sin(a);
      const Dual t(s + (sigma - s) * sn * sn, 1.0);
      const auto F = theta_integrand(q, t, Poly<Dual>::from(h.taylor(t, q + 1), q + 1),
                                     h.divided_difference(t, Dual(sigma)), sigma, hsig, Z);
      const double w = 2.0 * half * gl.w[g] * c * c;
      out[2] += w * F[0];
      out[3] += w * F[1];
    }
  }
}

// Fixed nodes on one panel for the t-integral, with the panel interpolation
// matrix at those nodes (nodes x n).
struct Zone {
  int p = 0;
  std::vector<double> t, w, L;
};

// Data on a chord grid for the batched Theta integral. Column k holds rows
// m = 0 .. last node of the panel that owns node k.
struct ThetaTable {
  int q = 0;
  int nodes = 16;
  PanelGrid g;
  std::vector<Poly<Dual>> Hs;
  std::vector<double> hv;
  std::vector<size_t> off;
  std::vector<int> rows;
  std::vector<Dual> H;
  std::vector<double> S;                 // sqrt(sigma_k - t_m), 0 for t_m >= sigma_k
  std::vector<std::vector<Zone>> szone;  // panels near s_i: t = s + v^2
  std::vector<std::vector<Zone>> gzone;  // panels near sigma_k: t = sigma - u^2
};

constexpr double kFar = 2.0;  // panel is far from a point at >= kFar widths

Zone make_zone(const PanelGrid& g, int p, const Rule& gl, double a, double b, bool from_s, double x) {
  const int n = g.nodes_per_panel(), R = static_cast<int>(gl.x.size());
  Zone z;
  z.p = p;
  z.t.resize(R);
  z.w.resize(R);
  z.L.resize(R * n);
  // from_s: t = x + v^2 on [a, b], weight 2 dv; else t = x - u^2, weight 2 u^2 du.
  const double c0 = from_s ? std::sqrt(a - x) : std::sqrt(x - b), c1 = from_s ? std::sqrt(b - x) : std::sqrt(x - a);
  for (int r = 0; r < R; ++r) {
    const double v = 0.5 * (c0 + c1) + 0.5 * (c1 - c0) * gl.x[r];
    z.t[r] = from_s ? x + v * v : x - v * v;
    z.w[r] = (c1 - c0) * gl.w[r] * (from_s ? 1.0 : v * v);
    g.panel_interp_weights(p, z.t[r], &z.L[r * n]);
  }
  return z;
}

ThetaTable theta_table(int q, const Perturbation& h, const PanelGrid& g, int nodes) {
  ThetaTable T;
  T.q = q;
  T.nodes = nodes;
  T.g = g;
  const int N = g.size(), n = g.nodes_per_panel(), P = g.panels();
  T.Hs.resize(N);
  T.hv.resize(N);
  for (int m = 0; m < N; ++m) {
    const Dual t(g.node(m), 1.0);
    T.Hs[m] = Poly<Dual>::from(h.taylor(t, q + 1), q + 1);
    T.hv[m] = h.eval(g.node(m));
  }
  T.off.resize(N + 1, 0);
  T.rows.resize(N);
  for (int k = 0; k < N; ++k) {
    T.rows[k] = std::min(N, g.panel_start(g.panel_of_node(k)) + n);
    T.off[k + 1] = T.off[k] + T.rows[k];
  }
  T.H.resize(T.off[N]);
  T.S.resize(T.off[N]);
  const bool zero = h.is_zero();
  for (int k = 0; k < N; ++k)
    for (int m = 0; m < T.rows[k]; ++m) {
      T.H[T.off[k] + m] = zero ? Dual(0.0) : h.divided_difference(Dual(g.node(m), 1.0), Dual(g.node(k)));
      T.S[T.off[k] + m] = std::sqrt(std::max(g.node(k) - g.node(m), 0.0));
    }
  const Rule& gl = gauss_legendre(nodes);
  T.szone.resize(N);
  T.gzone.resize(N);
  for (int i = 0; i < N; ++i) {
    const double s = g.node(i);
    for (int p = g.panel_of_node(i); p < P; ++p) {
      const double w = g.panel_hi(p) - g.panel_lo(p);
      if (g.panel_lo(p) - s < kFar * w && g.panel_hi(p) > s)
        T.szone[i].push_back(make_zone(g, p, gl, std::max(s, g.panel_lo(p)), g.panel_hi(p), true, s));
    }
    if (i == 0) continue;
    for (int p = (i - 1) / (n - 1); p >= 0; --p) {
      const double w = g.panel_hi(p) - g.panel_lo(p);
      if (s - g.panel_hi(p) < kFar * w && g.panel_lo(p) < s)
        T.gzone[i].push_back(make_zone(g, p, gl, g.panel_lo(p), std::min(s, g.panel_hi(p)), false, s));
    }
  }
  return T;
}

const Zone* find_zone(const std::vector<Zone>& zs, int p) {
  for (const Zone& z : zs)
    if (z.p == p) return &z;
  return nullptr;
}

// int_{s_i}^1 Theta(s_i, sigma, Z(sigma)) dsigma at every node. The inner
// integral over t uses the panel interpolant of the kernel rows at the grid
// nodes, with the weight sqrt((sigma - t)/(t - s)) handled per panel: far
// panels take Clenshaw–Curtis weights, panels near one endpoint substitute
// t = s + v^2 or t = sigma - u^2, and panels near both are integrated in
// theta with t = s + (sigma - s) sin^2(theta).
void theta_batch(const ThetaTable& T, const ChordState& Z, std::vector<double>& out) {
  const PanelGrid& g = T.g;
  const int N = g.size(), n = g.nodes_per_panel(), P = g.panels();
  std::vector<double> F1(T.off[N]), F2(T.off[N]);
  for (int k = 0; k < N; ++k) {
    const double* z = &Z.values[k * 4];
    for (int m = 0; m < T.rows[k]; ++m) {
      const auto F = theta_integrand(T.q, Dual(g.node(m), 1.0), T.Hs[m], T.H[T.off[k] + m], g.node(k), T.hv[k], z);
      F1[T.off[k] + m] = F[0];
      F2[T.off[k] + m] = F[1];
    }
  }
  // Kernel rows at the sigma-zone nodes (independent of s).
  std::vector<std::vector<std::vector<double>>> G1(N), G2(N);
  for (int k = 0; k < N; ++k) {
    for (const Zone& z : T.gzone[k]) {
      const int start = g.panel_start(z.p), R = static_cast<int>(z.t.size());
      std::vector<double> a(R, 0.0), b(R, 0.0);
      for (int r = 0; r < R; ++r)
        for (int m = 0; m < n; ++m) {
          a[r] += z.L[r * n + m] * F1[T.off[k] + start + m];
          b[r] += z.L[r * n + m] * F2[T.off[k] + start + m];
        }
      G1[k].push_back(std::move(a));
      G2[k].push_back(std::move(b));
    }
  }
  std::vector<std::vector<double>> cc(P, std::vector<double>(n));
  for (int p = 0; p < P; ++p) g.panel_weights(p, cc[p].data());
  const Rule& gl = gauss_legendre(T.nodes);
  std::vector<double> lw(n), pw(n), th2(N), th3(N), rs(N);
  std::vector<char> have(N);

  auto theta = [&](int i, int k) {
    const double s = g.node(i), sig = g.node(k);
    const double* f1 = &F1[T.off[k]];
    const double* f2 = &F2[T.off[k]];
    if (k == i) {
      th2[k] = 0.5 * M_PI * f1[i];
      th3[k] = 0.5 * M_PI * f2[i];
      return;
    }
    double a2 = 0.0, a3 = 0.0;
    // Contributions before the 1/(sigma - s) factor, except the theta form.
    double b2 = 0.0, b3 = 0.0;
    auto in_theta = [&](int p, double A, double B) {
      const double t0 = theta_of(s, sig, A), t1 = theta_of(s, sig, B);
      const double half = 0.5 * (t1 - t0), mid = 0.5 * (t1 + t0);
      const int start = g.panel_start(p);
      for (size_t q = 0; q < gl.x.size(); ++q) {
        const double a = mid + half * gl.x[q], c = std::cos(a), sn = std::sin(a);
        g.panel_interp_weights(p, s + (sig - s) * sn * sn, lw.data());
        double v2 = 0.0, v3 = 0.0;
        for (int m = 0; m < n; ++m) {
          v2 += lw[m] * f1[start + m];
          v3 += lw[m] * f2[start + m];
        }
        const double w = 2.0 * half * gl.w[q] * c * c;
        a2 += w * v2;
        a3 += w * v3;
      }
    };
    if (sig < s) {
      in_theta(g.panel_of_node(i), s, sig);
    } else {
      const int pa = g.panel_of_node(i), pb = (k - 1) / (n - 1);
      for (int p = pa; p <= pb; ++p) {
        const double lo = g.panel_lo(p), hi = g.panel_hi(p), w = hi - lo;
        const bool near_s = lo - s < kFar * w, near_sig = sig - hi < kFar * w;
        const int start = g.panel_start(p);
        if (!near_s && !near_sig) {
          for (int m = 0; m < n; ++m) {
            const double wt = cc[p][m] * T.S[T.off[k] + start + m] * rs[start + m];
            b2 += wt * f1[start + m];
            b3 += wt * f2[start + m];
          }
        } else if (near_s && !near_sig) {
          const Zone& z = *find_zone(T.szone[i], p);
          for (size_t r = 0; r < z.t.size(); ++r) {
            double v2 = 0.0, v3 = 0.0;
            for (int m = 0; m < n; ++m) {
              v2 += z.L[r * n + m] * f1[start + m];
              v3 += z.L[r * n + m] * f2[start + m];
            }
            const double wt = z.w[r] * std::sqrt(sig - z.t[r]);
            b2 += wt * v2;
            b3 += wt * v3;
          }
        } else if (!near_s && near_sig) {
          const auto& zs = T.gzone[k];
          size_t idx = 0;
          while (zs[idx].p != p) ++idx;
          const Zone& z = zs[idx];
          for (size_t r = 0; r < z.t.size(); ++r) {
            const double wt = z.w[r] / std::sqrt(z.t[r] - s);
            b2 += wt * G1[k][idx][r];
            b3 += wt * G2[k][idx][r];
          }
        } else {
          in_theta(p, std::max(s, lo), std::min(sig, hi));
        }
      }
    }
    th2[k] = a2 + b2 / (sig - s);
    th3[k] = a3 + b3 / (sig - s);
  };

  out.assign(N * 4, 0.0);
  for (int i = 0; i < N - 1; ++i) {
    std::fill(have.begin(), have.end(), 0);
    const double s = g.node(i);
    for (int m = i + 1; m < N; ++m) rs[m] = 1.0 / std::sqrt(g.node(m) - s);
    const int p0 = g.panel_of_node(i);
    double acc[4] = {0.0, 0.0, 0.0, 0.0};
    for (int p = p0; p < P; ++p) {
      if (p == p0) g.partial_weights(p, s, pw.data());
      else std::copy(cc[p].begin(), cc[p].end(), pw.begin());
      const int start = g.panel_start(p);
      for (int m = 0; m < n; ++m) {
        const int k = start + m;
        if (pw[m] == 0.0) continue;
        if (!have[k]) {
          theta(i, k);
          have[k] = 1;
        }
        acc[0] -= pw[m] * Z(k, 2);
        acc[1] -= pw[m] * Z(k, 3);
        acc[2] += pw[m] * th2[k];
        acc[3] += pw[m] * th3[k];
      }
    }
    std::copy(acc, acc + 4, &out[i * 4]);
  }
}

// Unperturbed discrete data shared by all perturbations on the same grid.
struct Baseline {
  ChordState Z_o;
  std::vector<double> xi_disc;
  Eigen::MatrixXd Q;
};

std::shared_ptr<const Baseline> baseline(int q, const PanelGrid& g, int nodes) {
  using Key = std::tuple<int, std::vector<double>, int, int>;
  static std::mutex mu;
  static std::map<Key, std::shared_ptr<const Baseline>> cache;
  const Key key{q, g.breaks(), g.nodes_per_panel(), nodes};
  {
    std::lock_guard<std::mutex> lock(mu);
    const auto it = cache.find(key);
    if (it != cache.end()) return it->second;
  }
  auto b = std::make_shared<Baseline>();
  const int N = g.size();
  b->Z_o.grid = g;
  b->Z_o.m = 4;
  b->Z_o.values.resize(N * 4);
  for (int i = 0; i < N; ++i) z_unperturbed(g.node(i), &b->Z_o.values[i * 4]);
  const Perturbation zero = Perturbation::zero(0.05);
  b->Q = Eigen::MatrixXd(4, 4);
  double z1[4], zp[4], zm[4], gp[4], gm[4];
  z_unperturbed(1.0, z1);
  for (int c = 0; c < 4; ++c) {
    std::copy(z1, z1 + 4, zp);
    std::copy(z1, z1 + 4, zm);
    zp[c] += 1e-6;
    zm[c] -= 1e-6;
    odd_G(q, zero, 1.0, zp, gp);
    odd_G(q, zero, 1.0, zm, gm);
    for (int r = 0; r < 4; ++r) b->Q(r, c) = (gp[r] - gm[r]) / 2e-6;
  }
  SingularSystem sys_o;
  sys_o.m = 4;
  sys_o.b = 1.0;
  sys_o.G = [q, zero](double s, const double* Z, double* o) { odd_G(q, zero, s, Z, o); };
  auto table = std::make_shared<ThetaTable>(theta_table(q, zero, g, nodes));
  sys_o.integral = [table](const ChordState& Z, std::vector<double>& o) { theta_batch(*table, Z, o); };
  b->xi_disc = defect_at_nodes(sys_o, b->Z_o, std::vector<double>(N * 4, 0.0));
  std::lock_guard<std::mutex> lock(mu);
  return cache.emplace(key, b).first->second;
}

}  // namespace

std::vector<double> odd_breaks(const Perturbation& h, const OddOptions& opt) {
  return graded_breaks(h.basis(), 1.0 - 3.0 * h.basis().delta(), 1.0, opt.coarse_width, opt.bump_span, opt.bump_step);
}

std::array<double, 2> j_factors(int q, const Perturbation& h, double s, double xi, double f) {
  const Poly<double> Hs = Poly<double>::from(h.taylor(s, q + 1), q + 1);
  return j_core(q, line_series(q, s, xi, Hs), f * f);
}

std::array<double, 2> odd_kernels(int q, const Perturbation& h, double s, double sigma, double xi) {
  return kernel_core(q, s, Poly<double>::from(h.taylor(s, q + 1), q + 1), h.divided_difference(s, sigma), sigma,
                     h.eval(sigma), xi);
}

std::array<double, 2> v_integrals(int q, const Perturbation& h, double s, int nodes) {
  if (s > 1.0) throw Error(ErrorKind::InvalidArgument, "V integrals are defined for s <= 1");
  return v_core(q, h, s, nodes);
}

double odd_rhs(int q, double c, double s) { return c * x_unperturbed(s, q + 1); }

void odd_G(int q, const Perturbation& h, double s, const double* Z, double* out) {
  const double x = Z[0], y = Z[1], xp = Z[2], yp = Z[3];
  const Poly<double> Hs = Poly<double>::from(h.taylor(s, q + 1), q + 1);
  const double H = h.eval(s, 1), hv = h.eval(s);
  const auto kx = kernel_core(q, s, Hs, H, s, hv, -x);
  const auto ky = kernel_core(q, s, Hs, H, s, hv, y);
  out[0] = x;
  out[1] = y;
  out[2] = M_PI * (kx[0] * xp + ky[0] * yp);
  out[3] = M_PI * (kx[1] * xp + ky[1] * yp);
}

void odd_Theta(int q, const Perturbation& h, double s, double sigma, const double* Z, double* out, int nodes) {
  theta_point(q, h, s, sigma, Z, out, odd_breaks(h), nodes);
}

std::array<double, 2> odd_G2(int q, const Perturbation& h, double s, double sigma, const double* Z, int nodes) {
  const double x = Z[0], y = Z[1], xp = Z[2], yp = Z[3];
  const Rule& r = gauss_chebyshev(nodes);
  std::array<double, 2> acc{0.0, 0.0};
  for (size_t i = 0; i < r.x.size(); ++i) {
    const double sp = s + (sigma - s) * 0.5 * (1.0 + r.x[i]);
    const auto kx = odd_kernels(q, h, sp, sigma, -x), ky = odd_kernels(q, h, sp, sigma, y);
    acc[0] -= r.w[i] * (kx[0] * xp + ky[0] * yp);
    acc[1] -= r.w[i] * (kx[1] * xp + ky[1] * yp);
  }
  return acc;
}

Eigen::Matrix2d odd_A(int q, const Perturbation& h, double s, double x, double y) {
  Eigen::Matrix2d A;
  double g[4];
  const double e0[4] = {x, y, 1.0, 0.0}, e1[4] = {x, y, 0.0, 1.0};
  odd_G(q, h, s, e0, g);
  A(0, 0) = g[2];
  A(1, 0) = g[3];
  odd_G(q, h, s, e1, g);
  A(0, 1) = g[2];
  A(1, 1) = g[3];
  return A;
}

OddSystemData build_odd_system(int d, const Perturbation& h, const OddOptions& opt) {
  if (d < 3 || d % 2 == 0) throw Error(ErrorKind::InvalidArgument, "odd builder needs odd d >= 3");
  OddSystemData out;
  out.d = d;
  out.q = (d - 3) / 2;
  out.delta = h.basis().delta();
  out.constant = unit_ball_volume(d - 1) / unit_ball_volume(d - 2);
  out.h = h;
  const int q = out.q;
  out.grid = PanelGrid(odd_breaks(h, opt), opt.nodes_per_panel);
  const PanelGrid& g = out.grid;
  const int N = g.size();
  const auto base = baseline(q, g, opt.theta_nodes);
  out.Z_o = base->Z_o;
  const double c = out.constant;
  const Perturbation zero = Perturbation::zero(out.delta);

  if (opt.check_consistency) {
    // The analytic R~_o at sampled nodes away from s = 1, where R_o is only
    // continuous.
    auto R_o = [&](Dual s) {
      const auto v = v_core(q, zero, s, opt.v_nodes);
      return std::array<Dual, 2>{-v[0] + rhs_dual(q, c, s), -v[1]};
    };
    for (int i = 0; i < N; i += 7) {
      const double s = g.node(i);
      if (s > 1.0 - 0.5 * out.delta) break;
      for (int k = 0; k < 2; ++k) {
        const double ana = tilde_rhs([&](Dual t) { return R_o(t)[k]; }, s, 1.0);
        out.xi_consistency = std::max(out.xi_consistency, std::abs(base->xi_disc[i * 4 + 2 + k] - ana));
      }
      out.xi_consistency = std::max(out.xi_consistency, std::abs(base->xi_disc[i * 4] - kRootHalf));
    }
  }

  // R~ - R~_o = int_s^1 (R - R_o)'(s') / sqrt(s' - s) ds', with (R - R_o)'
  // supported in the bumps and represented on the chord grid.
  auto corr = std::make_shared<std::vector<double>>(N * 2, 0.0);
  if (!h.is_zero()) {
    std::vector<double> u1(N, 0.0), u2(N, 0.0);
    for (int i = 0; i < N; ++i) {
      if (h.basis().which(g.node(i)) < 0) continue;
      const Dual s(g.node(i), 1.0);
      const auto vh = v_core(q, h, s, opt.v_nodes), vo = v_core(q, zero, s, opt.v_nodes);
      u1[i] = -(vh[0].d - vo[0].d);
      u2[i] = -(vh[1].d - vo[1].d);
    }
    const auto c1 = abel_forward_on_grid(g, u1), c2 = abel_forward_on_grid(g, u2);
    for (int i = 0; i < N; ++i) {
      (*corr)[i * 2] = c1[i];
      (*corr)[i * 2 + 1] = c2[i];
    }
  }

  auto hp = std::make_shared<Perturbation>(h);
  auto nodes = std::make_shared<std::vector<double>>(g.nodes());
  const int tn = opt.theta_nodes;
  auto breaks = std::make_shared<std::vector<double>>(g.breaks());
  const int vn = opt.v_nodes;
  SingularSystem& sys = out.system;
  sys.m = 4;
  sys.b = 1.0;
  sys.Q = base->Q;
  sys.G = [q, hp](double s, const double* Z, double* o) { odd_G(q, *hp, s, Z, o); };
  sys.Theta = [q, hp, tn, breaks](double s, double sig, const double* Z, double* o) {
    theta_point(q, *hp, s, sig, Z, o, *breaks, tn);
  };
  auto table = std::make_shared<ThetaTable>(theta_table(q, h, g, tn));
  sys.integral = [table](const ChordState& Z, std::vector<double>& o) { theta_batch(*table, Z, o); };
  sys.Xi = [base, corr, nodes, hp, q, c, vn, zero](double s, double* o) {
    const auto it = std::lower_bound(nodes->begin(), nodes->end(), s);
    if (it == nodes->end() || *it != s) {
      // Off-grid: the analytic right-hand side.
      o[0] = o[1] = kRootHalf;
      for (int k = 0; k < 2; ++k)
        o[2 + k] = tilde_rhs(
            [&](Dual t) {
              const auto v = v_core(q, *hp, t, vn);
              return k == 0 ? -v[0] + rhs_dual(q, c, t) : -v[1];
            },
            s, 1.0);
      return;
    }
    const size_t i = it - nodes->begin();
    const double* b = &base->xi_disc[i * 4];
    o[0] = b[0];
    o[1] = b[1];
    o[2] = b[2] + (*corr)[i * 2];
    o[3] = b[3] + (*corr)[i * 2 + 1];
  };
  sys.center = [](double s, double* o) { z_unperturbed(s, o); };
  sys.radius = {0.1, 0.1, 0.5, 0.5};
  return out;
}

OddChordSolution solve_odd_chords(const OddSystemData& sys, PicardOptions opt) {
  opt.frozen_from = 1.0 - sys.delta;
  OddChordSolution sol;
  sol.picard = picard_solve(sys.system, sys.Z_o, opt);
  if (!sol.picard.locality_ok)
    throw Error(ErrorKind::ConvergenceFailure, "solution moved where the perturbation vanishes");
  sol.Z = sol.picard.Z;
  return sol;
}

std::array<double, 2> raw_odd_residual(const ProfileFunction& f, const Perturbation& h, int d, double s) {
  const int q = (d - 3) / 2;
  const double c = unit_ball_volume(d - 1) / unit_ball_volume(d - 2);
  const double hv = h.eval(s);
  const double plus = chord_integral(f, s, hv, [&](double, double F, double L) {
    return std::pow(std::max(F - L * L, 0.0), q + 0.5);
  });
  const double minus = chord_integral(f, s, hv, [&](double, double F, double L) {
    const double u = std::max(F - L * L, 0.0);
    return u > 0.0 ? std::pow(u, q - 0.5) * L : 0.0;
  });
  const double target = c / std::sqrt(1.0 + s * s);
  return {std::abs(plus / target - 1.0), std::abs(minus) / target};
}

}  // namespace klee
