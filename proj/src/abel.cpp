#include "klee/abel.hpp"

#include <algorithm>
#include <cmath>

namespace klee {

std::vector<double> abel_forward_on_grid(const PanelGrid& g, const std::vector<double>& U) {
  const int N = g.size(), n = g.nodes_per_panel();
  const Rule& gl = gauss_legendre(n);
  std::vector<double> out(N, 0.0), w(n);
  for (int i = 0; i < N - 1; ++i) {
    const double s = g.node(i);
    double acc = 0.0;
    for (int p = g.panel_of_node(i); p < g.panels(); ++p) {
      const int start = g.panel_start(p);
      bool zero = true;
      for (int k = 0; k < n && zero; ++k) zero = U[start + k] == 0.0;
      if (zero) continue;
      const double u0 = std::sqrt(std::max(g.panel_lo(p) - s, 0.0)), u1 = std::sqrt(g.panel_hi(p) - s);
      for (size_t q = 0; q < gl.x.size(); ++q) {
        const double u = 0.5 * (u0 + u1) + 0.5 * (u1 - u0) * gl.x[q];
        g.panel_interp_weights(p, s + u * u, w.data());
        double v = 0.0;
        for (int k = 0; k < n; ++k) v += w[k] * U[start + k];
        acc += (u1 - u0) * gl.w[q] * v;
      }
    }
    out[i] = acc;
  }
  return out;
}

double ChordState::at(double s, int comp) const {
  std::vector<double> w(grid.nodes_per_panel());
  const int p = grid.interp_weights(s, w.data());
  double acc = 0.0;
  for (int k = 0; k < grid.nodes_per_panel(); ++k) acc += w[k] * (*this)(grid.panel_start(p) + k, comp);
  return acc;
}

std::vector<double> ChordState::component(int comp) const {
  std::vector<double> out(grid.size());
  for (int i = 0; i < grid.size(); ++i) out[i] = (*this)(i, comp);
  return out;
}

double ChordState::sup_distance(const ChordState& o) const {
  double d = 0.0;
  for (size_t i = 0; i < values.size(); ++i) d = std::max(d, std::abs(values[i] - o.values[i]));
  return d;
}

std::vector<double> xi_at_nodes(const SingularSystem& sys, const PanelGrid& grid) {
  std::vector<double> xi(grid.size() * sys.m);
  for (int i = 0; i < grid.size(); ++i) sys.Xi(grid.node(i), &xi[i * sys.m]);
  return xi;
}

std::vector<double> defect_at_nodes(const SingularSystem& sys, const ChordState& Z, const std::vector<double>& xi) {
  const PanelGrid& g = Z.grid;
  const int N = g.size(), m = sys.m, n = g.nodes_per_panel();
  std::vector<double> out(N * m, 0.0), th(m), w(n), gv(m);
  std::vector<double> integral(m), batch;
  if (sys.integral) sys.integral(Z, batch);
  for (int i = 0; i < N; ++i) {
    const double s = g.node(i);
    std::fill(integral.begin(), integral.end(), 0.0);
    if (sys.integral) {
      std::copy(batch.begin() + i * m, batch.begin() + (i + 1) * m, integral.begin());
    } else if (i < N - 1) {
      const int p0 = g.panel_of_node(i);
      for (int p = p0; p < g.panels(); ++p) {
        if (p == p0) g.partial_weights(p, s, w.data());
        else g.panel_weights(p, w.data());
        const int start = g.panel_start(p);
        for (int k = 0; k < n; ++k) {
          if (w[k] == 0.0) continue;
          sys.Theta(s, g.node(start + k), &Z.values[(start + k) * m], th.data());
          for (int c = 0; c < m; ++c) integral[c] += w[k] * th[c];
        }
      }
    }
    sys.G(s, &Z.values[i * m], gv.data());
    for (int c = 0; c < m; ++c) out[i * m + c] = (gv[c] - integral[c]) - xi[i * m + c];
  }
  return out;
}

double system_residual(const SingularSystem& sys, const ChordState& Z, const std::vector<double>& xi) {
  const auto d = defect_at_nodes(sys, Z, xi);
  double r = 0.0;
  for (double v : d) r = std::max(r, std::abs(v));
  return r;
}

ChordState apply_T(const SingularSystem& sys, const ChordState& Z, const std::vector<double>& xi) {
  const auto d = defect_at_nodes(sys, Z, xi);
  const Eigen::PartialPivLU<Eigen::MatrixXd> lu(sys.Q);
  ChordState out = Z;
  const int m = sys.m;
  for (int i = 0; i < Z.grid.size(); ++i) {
    const Eigen::VectorXd step = lu.solve(Eigen::Map<const Eigen::VectorXd>(&d[i * m], m));
    for (int c = 0; c < m; ++c) out.values[i * m + c] = Z.values[i * m + c] - step(c);
  }
  return out;
}

PicardResult picard_solve(const SingularSystem& sys, const ChordState& Z_init, const PicardOptions& opt,
                          bool keep_history) {
  const std::vector<double> xi = xi_at_nodes(sys, Z_init.grid);
  PicardResult res;
  ChordState Z = Z_init;
  const PanelGrid& g = Z.grid;
  const int m = sys.m;
  std::vector<double> center(m);
  double prev = -1.0;
  if (keep_history) res.history.push_back(Z);
  for (int it = 1; it <= opt.max_iter; ++it) {
    ChordState next = apply_T(sys, Z, xi);
    // Box check.
    if (sys.center) {
      for (int i = 0; i < g.size(); ++i) {
        sys.center(g.node(i), center.data());
        for (int c = 0; c < m; ++c)
          if (!(std::abs(next(i, c) - center[c]) <= sys.radius[c]))
            throw Error(ErrorKind::DomainEscape, "Picard iterate left the admissible box");
      }
    }
    // Locality: nodes at or beyond frozen_from must not move.
    for (int i = 0; i < g.size(); ++i) {
      if (g.node(i) < opt.frozen_from) continue;
      for (int c = 0; c < m; ++c) {
        const double dev = std::abs(next(i, c) - Z_init(i, c));
        res.frozen_deviation = std::max(res.frozen_deviation, dev);
        if (dev != 0.0) res.locality_ok = false;
      }
    }
    const double upd = next.sup_distance(Z);
    res.updates.push_back(upd);
    if (prev > 1e-10) res.k_hat = std::max(res.k_hat, upd / prev);
    prev = upd;
    Z = std::move(next);
    if (keep_history) res.history.push_back(Z);
    res.iterations = it;
    if (res.k_hat >= opt.max_ratio) throw Error(ErrorKind::NoContraction, "measured contraction ratio too large");
    if (upd <= opt.tol) break;
  }
  res.last_update = res.updates.empty() ? 0.0 : res.updates.back();
  if (res.last_update > opt.tol && res.iterations >= opt.max_iter)
    throw Error(ErrorKind::ConvergenceFailure, "Picard iteration did not reach the update tolerance");
  // A-posteriori bound from one more application of T.
  const ChordState TZ = apply_T(sys, Z, xi);
  res.error_bound = TZ.sup_distance(Z) / (1.0 - res.k_hat);
  res.Z = std::move(Z);
  return res;
}

double contraction_estimate(const SingularSystem& sys, const std::vector<ChordState>& probes) {
  if (probes.size() < 2) return 0.0;
  const std::vector<double> xi = xi_at_nodes(sys, probes[0].grid);
  std::vector<ChordState> images;
  for (const auto& p : probes) images.push_back(apply_T(sys, p, xi));
  double k = 0.0;
  for (size_t i = 0; i < probes.size(); ++i)
    for (size_t j = i + 1; j < probes.size(); ++j) {
      const double d = probes[i].sup_distance(probes[j]);
      if (d > 0.0) k = std::max(k, images[i].sup_distance(images[j]) / d);
    }
  return k;
}

}  // namespace klee
