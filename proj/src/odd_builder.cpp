#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <string>

#include "klee/error.hpp"
#include "klee/odd_builder.hpp"
#include "klee/parallel.hpp"

namespace klee {

namespace {

constexpr double kQuarter = M_PI / 4;
constexpr double kSingularTol = 1e-8;  // largest |Theta^(j)(0)|, j <= d - 3, treated as cancelled

std::string sci(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.3e", v);
  return buf;
}

double ipow(double x, int n) {
  double r = 1.0;
  for (int i = 0; i < n; ++i) r *= x;
  return r;
}

// Chord value, its derivative and the boundary angle on one side at slope s.
struct SideState {
  double angle, dangle, R, dR;
};

SideState side_state(const ChordFunctions& chords, const Perturbation& h, int side, double s) {
  const int comp = side > 0 ? 1 : 0;
  double v, dv;
  if (s < chords.a || s > chords.b) {
    v = x_unperturbed(s);
    dv = x_unperturbed(s, 1);
  } else {
    v = chords.Z.at(s, comp);
    dv = chords.Z.at(s, comp + 2);
  }
  const double hv = side * h.eval(s), h1 = side * h.eval(s, 1);
  const double P = s * v + hv, dP = v + s * dv + h1;
  const double R2 = v * v + P * P, R = std::sqrt(R2);
  return {std::atan2(P, v), (v * dP - P * dv) / R2, R, (v * dv + P * dP) / R};
}

// Coefficients of T_n in powers of x, n = 0 .. deg.
std::vector<std::vector<double>> chebyshev_powers(int deg) {
  std::vector<std::vector<double>> T(deg + 1, std::vector<double>(deg + 1, 0.0));
  T[0][0] = 1.0;
  if (deg >= 1) T[1][1] = 1.0;
  for (int n = 2; n <= deg; ++n)
    for (int j = 0; j <= n; ++j) T[n][j] = (j > 0 ? 2.0 * T[n - 1][j - 1] : 0.0) - T[n - 2][j];
  return T;
}

// Taylor coefficients of Theta in alpha at 0.
std::vector<double> theta_series(const ThetaData& th) {
  const int deg = 2 * (static_cast<int>(th.fit.size()) - 1);
  const auto T = chebyshev_powers(deg);
  std::vector<double> p(deg + 1, 0.0);  // Theta' in powers of alpha
  for (size_t m = 0; m < th.fit.size(); ++m)
    for (int j = 0; j <= deg; ++j) p[j] += th.fit[m] * T[2 * m][j];
  std::vector<double> out(deg + 2, 0.0);
  out[0] = th.B.empty() ? 0.0 : th.B[0];
  for (int j = 0; j <= deg; ++j) out[j + 1] = p[j] / ipow(th.span, j) / (j + 1);
  return out;
}

double norm2(const std::vector<double>& v) {
  double s = 0.0;
  for (double x : v) s += x * x;
  return std::sqrt(s);
}

OddBuild assemble_from(int d, const Perturbation& h, OddPipeline pipe, const OddOptions& opt) {
  OddBuild out;
  const RadialPair solved = solve_radial_pair(pipe.zonal.Phi, pipe.theta, d);
  std::vector<double> a = solved.alpha(), R = solved.R(), dR = solved.dR(), r = solved.r(), dr = solved.dr();
  for (size_t i = 0; i < a.size(); ++i) {
    if (a[i] >= kQuarter - 1e-14) {
      R[i] = r[i] = 1.0;
      dR[i] = dr[i] = 0.0;
      continue;
    }
    out.max_asymmetry = std::max(out.max_asymmetry, std::abs(R[i] - r[i]));
    if (a[i] < pipe.zonal.cap_from) continue;
    const RadialSample c = cap_radial(pipe.chords, h, a[i]);
    out.cap_mismatch = std::max({out.cap_mismatch, std::abs(R[i] - c.R), std::abs(r[i] - c.r)});
  }
  out.radial = RadialPair(a, R, dR, r, dr);
  out.slope_at_zero = std::max(std::abs(dR.front()), std::abs(dr.front()));
  out.B_residual = norm2(pipe.theta.B) / (h.scale() > 0.0 ? h.scale() : 1.0);
  out.coeffs = h.coeffs();
  out.pipeline = std::move(pipe);
  if (!(out.cap_mismatch <= opt.cap_tol))
    throw Error(ErrorKind::CapMismatch, "radial solution misses the chord-built cap by " + sci(out.cap_mismatch));
  const ProfileFunction f = profile_from_radial(out.radial, d, kQuarter, opt.radial_knots);
  out.convexity = convexity_check(f, opt.concavity_margin);
  if (!out.convexity.pass)
    throw Error(ErrorKind::ConvexityFailure, "profile not concave near xi=" + sci(out.convexity.at_xi));
  out.body = BodyOfRevolution{d, f, h};
  return out;
}

struct Search {
  BorsukResult result;
  OddPipeline best;
};

Search search(int d, const BumpBasis& basis, double scale, const OddOptions& opt, double tol, int max_evaluations) {
  const int m = basis.count(), nb = d + opt.k;
  if (m != nb + 1) throw Error(ErrorKind::InvalidArgument, "the search needs d + k + 1 basis bumps");
  if (!(scale > 0.0)) throw Error(ErrorKind::InvalidArgument, "scale must be positive");
  Search out;
  BorsukResult& res = out.result;
  auto eval = [&](const Eigen::VectorXd& x) {
    if (res.evaluations >= max_evaluations)
      throw Error(ErrorKind::SearchExhausted, "pipeline budget spent; best residual " + sci(res.residual));
    ++res.evaluations;
    OddPipeline p = run_odd_pipeline(d, Perturbation(basis, std::vector<double>(x.data(), x.data() + m), scale), opt);
    return p;
  };
  auto vec = [](const std::vector<double>& v) { return Eigen::Map<const Eigen::VectorXd>(v.data(), v.size()); };

  // Antipodal pairs of unit starts give the odd part of B to second order.
  // The 2m starts are independent pipelines and run concurrently.
  if (res.evaluations + 2 * m > max_evaluations)
    throw Error(ErrorKind::SearchExhausted, "budget too small for the antipodal starts");
  res.evaluations += 2 * m;
  std::vector<std::vector<double>> Bs(2 * m);
  parallel_for(2 * m, [&](int i) {
    std::vector<double> c(m, 0.0);
    c[i / 2] = i % 2 == 0 ? 1.0 : -1.0;
    Bs[i] = run_odd_pipeline(d, Perturbation(basis, c, scale), opt).theta.B;
  });
  Eigen::MatrixXd M(nb, m);
  for (int j = 0; j < m; ++j) {
    const Eigen::VectorXd Bp = vec(Bs[2 * j]), Bm = vec(Bs[2 * j + 1]);
    M.col(j) = (Bp - Bm) / (2.0 * scale);
    res.antipodal_defect = std::max(res.antipodal_defect, (Bp + Bm).cwiseAbs().maxCoeff() / scale);
  }
  Eigen::JacobiSVD<Eigen::MatrixXd> svd(M, Eigen::ComputeFullU | Eigen::ComputeFullV);
  const Eigen::VectorXd sv = svd.singularValues();
  int rank = 0;
  for (int i = 0; i < sv.size(); ++i)
    if (sv(i) > 1e-9 * sv(0)) ++rank;
  const Eigen::MatrixXd null = svd.matrixV().rightCols(m - rank);
  // Null direction closest to equal weights, which keeps every bump small.
  Eigen::VectorXd x = null * (null.transpose() * Eigen::VectorXd::Ones(m));
  if (x.norm() < 1e-8) x = null.col(0);
  x.normalize();

  res.residual = std::numeric_limits<double>::infinity();
  for (;;) {
    OddPipeline p = eval(x);
    const double r = norm2(p.theta.B) / scale;
    res.history.push_back(r);
    const bool better = r < res.residual;
    if (better) {
      res.residual = r;
      res.coeffs.assign(x.data(), x.data() + m);
      res.B = p.theta.B;
      out.best = std::move(p);
    }
    if (r <= tol) {
      res.converged = true;
      break;
    }
    if (!better || res.evaluations >= max_evaluations) break;
    // Minimum-norm Gauss–Newton step with the fixed Jacobian, then back to the sphere.
    const Eigen::VectorXd b = vec(res.B) / scale;
    Eigen::VectorXd y = svd.matrixU().transpose() * b;
    Eigen::VectorXd z = Eigen::VectorXd::Zero(m);
    for (int i = 0; i < rank; ++i) z(i) = y(i) / sv(i);
    x = x - svd.matrixV() * z;
    x.normalize();
  }
  return out;
}

}  // namespace

PanelGrid alpha_grid(const BumpBasis& basis, const OddOptions& opt) {
  const double a = 1.0 - 3.0 * basis.delta(), lo = std::atan(a);
  std::vector<double> br;
  const int ni = std::max(1, static_cast<int>(std::ceil(lo / opt.inner_width - 1e-9)));
  for (int i = 0; i < ni; ++i) br.push_back(lo * i / ni);
  for (double s : graded_breaks(basis, a, 1.0, opt.coarse_width, opt.bump_span, opt.bump_step))
    br.push_back(std::atan(s));
  const int no = std::max(1, static_cast<int>(std::ceil(kQuarter / opt.outer_width - 1e-9)));
  for (int i = 1; i <= no; ++i) br.push_back(kQuarter + kQuarter * i / no);
  br.back() = M_PI / 2;
  return PanelGrid(br, opt.radon_nodes);
}

RadialSample cap_radial(const ChordFunctions& chords, const Perturbation& h, double alpha) {
  if (alpha >= kQuarter || alpha < std::atan(chords.a) - 0.05) return {1.0, 0.0, 1.0, 0.0};
  RadialSample out{};
  for (int side : {+1, -1}) {
    double s = std::tan(alpha);
    SideState st{};
    for (int it = 0;; ++it) {
      st = side_state(chords, h, side, s);
      const double step = (st.angle - alpha) / st.dangle;
      s = std::clamp(s - step, 0.0, chords.b);
      if (std::abs(step) < 1e-15) break;
      if (it > 60) throw Error(ErrorKind::NewtonDivergence, "boundary angle inversion failed");
    }
    st = side_state(chords, h, side, s);
    if (side > 0) {
      out.R = st.R;
      out.dR = st.dR / st.dangle;
    } else {
      out.r = st.R;
      out.dr = st.dR / st.dangle;
    }
  }
  return out;
}

double lemma_trum_form(const RadialSample& rs, int d, double alpha) {
  const double sa = std::sin(alpha), ca = std::cos(alpha);
  return -(ipow(rs.R, d - 3) * (rs.dR * sa + rs.R * ca) - ipow(rs.r, d - 3) * (rs.dr * sa + rs.r * ca));
}

double lemma_trum_form(const RadialPair& pair, int d, double alpha) {
  return lemma_trum_form(pair.eval(alpha), d, alpha);
}

ZonalData phi_psi(int d, const ChordFunctions& chords, const Perturbation& h, const PanelGrid& grid,
                  const OddOptions& opt) {
  const auto op = zonal_radon_operator(d, grid);
  const Eigen::MatrixXd& W = op->matrix();
  const int N = grid.size();
  const double delta = h.basis().delta();
  // The chord-built part covers alpha >= atan(a), the boundary angle of both
  // endpoints of the chord of slope a (h(a) = 0).
  ZonalData out;
  const auto& br = grid.breaks();
  out.cap_from = *std::lower_bound(br.begin(), br.end(), std::atan(chords.a) - 1e-14);
  const int ic = static_cast<int>(std::lower_bound(grid.nodes().begin(), grid.nodes().end(), out.cap_from - 1e-14) -
                                  grid.nodes().begin());

  // Integrands (R^{d-1} + r^{d-1})/2 - 1 and half the boundary form on the
  // cap; (1/(d-1)) W of them are phi - v_{d-1} and psi.
  Eigen::VectorXd gphi = Eigen::VectorXd::Zero(N), gpsi = Eigen::VectorXd::Zero(N);
  for (int i = ic; i < N; ++i) {
    const double al = grid.node(i);
    if (al >= kQuarter) break;
    const RadialSample rs = cap_radial(chords, h, al);
    gphi(i) = 0.5 * (ipow(rs.R, d - 1) + ipow(rs.r, d - 1)) - 1.0;
    gpsi(i) = 0.5 * lemma_trum_form(rs, d, al);
  }
  const Eigen::VectorXd fphi = W * gphi / (d - 1), fpsi = W * gpsi / (d - 1);
  const double v = unit_ball_volume(d - 1), t2 = 1.0 - 2.0 * delta;
  std::vector<double> dev(N, 0.0), psi(N, 0.0);
  for (int i = ic; i < N; ++i) {
    if (std::tan(grid.node(i)) > t2 + 1e-14) {
      dev[i] = fphi(i);
      psi[i] = fpsi(i);
    } else {
      out.extension_mismatch = std::max({out.extension_mismatch, std::abs(fphi(i)), std::abs(fpsi(i))});
    }
  }
  if (!(out.extension_mismatch <= opt.extension_tol))
    throw Error(ErrorKind::ExtensionMismatch,
                "cap sections differ from the extension constants by " + sci(out.extension_mismatch));

  // Rows below the cap only see alpha >= beta, so with the cap values fixed
  // the inverse there is a square solve for the nodes below atan(a), whose
  // right-hand side is the extension data minus the cap's contribution.
  if (ic > 0) {
    const Eigen::PartialPivLU<Eigen::MatrixXd> lu(W.topLeftCorner(ic, ic));
    const Eigen::VectorXd rp = -(W.topRows(ic) * gphi), rq = -(W.topRows(ic) * gpsi);
    gphi.head(ic) = lu.solve(rp);
    gpsi.head(ic) = lu.solve(rq);
    const Eigen::VectorXd ep = W.topRows(ic) * gphi, eq = W.topRows(ic) * gpsi;
    out.roundtrip = std::max(ep.cwiseAbs().maxCoeff(), eq.cwiseAbs().maxCoeff()) / (d - 1);
  }
  out.phi = {grid, std::vector<double>(N)};
  out.Phi = {grid, std::vector<double>(N)};
  out.psi = {grid, psi};
  out.Psi = {grid, std::vector<double>(N)};
  for (int i = 0; i < N; ++i) {
    out.phi.values[i] = v + dev[i];
    out.Phi.values[i] = 2.0 + 2.0 * gphi(i);
    out.Psi.values[i] = 2.0 * gpsi(i);
  }
  return out;
}

ThetaData theta_h(const ZonalFunction& Psi, int d, int k, int fit_degree, double span) {
  const PanelGrid& g = Psi.grid;
  const int N = g.size();
  std::vector<double> f(N);
  for (int i = 0; i < N; ++i) f[i] = Psi.values[i] * ipow(std::sin(g.node(i)), d - 3);
  ThetaData out;
  out.span = span;
  out.Theta = {g, g.tail_integral(f)};
  for (double& t : out.Theta.values) t *= (d - 2);

  // Least-squares even Chebyshev fit of Theta' = -(d-2) Psi sin^{d-3} on [0, span].
  const int terms = fit_degree / 2 + 1;
  std::vector<int> rows;
  for (int i = 0; i < N; ++i)
    if (g.node(i) <= span + 1e-14) rows.push_back(i);
  if (static_cast<int>(rows.size()) < terms) throw Error(ErrorKind::InvalidArgument, "too few nodes for the fit");
  Eigen::MatrixXd A(rows.size(), terms);
  Eigen::VectorXd y(rows.size());
  for (size_t r = 0; r < rows.size(); ++r) {
    const double x = g.node(rows[r]) / span;
    for (int m = 0; m < terms; ++m) A(r, m) = std::cos(2.0 * m * std::acos(std::clamp(x, -1.0, 1.0)));
    y(r) = -(d - 2) * f[rows[r]];
  }
  const Eigen::VectorXd c = A.colPivHouseholderQr().solve(y);
  out.fit.assign(c.data(), c.data() + terms);
  out.B.assign(d + k, 0.0);
  out.B[0] = out.Theta.values[0];
  const auto ser = theta_series(out);
  double fact = 1.0;
  for (int j = 1; j < d + k; ++j) {
    fact *= j;
    out.B[j] = j < static_cast<int>(ser.size()) ? ser[j] * fact : 0.0;
  }
  return out;
}

RadialPair solve_radial_pair(const ZonalFunction& Phi, const ThetaData& theta, int d, double R0, double r0) {
  const PanelGrid& g = Phi.grid;
  const int N = g.size(), m = d - 2;
  const auto ser = theta_series(theta);
  for (int j = 0; j < m && j < static_cast<int>(ser.size()); ++j)
    if (!(std::abs(theta.B[j]) <= kSingularTol))
      throw Error(ErrorKind::SingularRHS,
                  "Theta^(" + std::to_string(j) + ")(0) = " + sci(theta.B[j]) + " leaves Theta / sin^(d-2) unbounded");
  // Below ac the quotient comes from the fitted series; the singular low-order
  // residue is removed there and blended out by 2 ac.
  const auto& br = g.breaks();
  double ac = br[1];
  for (double b : br)
    if (b <= 0.5 * theta.span + 1e-12) ac = std::max(ac, b);
  std::vector<double> Q(N);
  for (int i = 0; i < N; ++i) {
    const double al = g.node(i);
    if (al == 0.0) {
      Q[i] = ser[m];
    } else if (al < ac) {
      double num = 0.0;
      for (int j = static_cast<int>(ser.size()) - 1; j >= m; --j) num = num * al + ser[j];
      Q[i] = num * ipow(al, m) / ipow(std::sin(al), m);
    } else {
      double low = 0.0;
      for (int j = m - 1; j >= 0; --j) low = low * al + ser[j];
      const double chi = al < 2.0 * ac ? ipow(std::cos(0.5 * M_PI * (al - ac) / ac), 2) : 0.0;
      Q[i] = (theta.Theta.values[i] - chi * low) / ipow(std::sin(al), m);
    }
  }
  const std::vector<double> dPhi = g.derivative(Phi.values), dQ = g.derivative(Q);
  std::vector<double> R(N), r(N), dR(N), dr(N);
  for (int i = 0; i < N; ++i) {
    double a = R0, b = r0;
    Eigen::Matrix2d J;
    for (int it = 0;; ++it) {
      const Eigen::Vector2d F(ipow(a, d - 1) + ipow(b, d - 1) - Phi.values[i], ipow(a, m) - ipow(b, m) - Q[i]);
      J << (d - 1) * ipow(a, d - 2), (d - 1) * ipow(b, d - 2), m * ipow(a, m - 1), -m * ipow(b, m - 1);
      Eigen::Vector2d step = J.partialPivLu().solve(F);
      double t = 1.0;
      while (a - t * step(0) <= 0.0 || b - t * step(1) <= 0.0) t *= 0.5;
      a -= t * step(0);
      b -= t * step(1);
      if (step.cwiseAbs().maxCoeff() < 1e-15) break;
      if (it > 60 || !std::isfinite(a) || !std::isfinite(b))
        throw Error(ErrorKind::NewtonDivergence, "radial pair solve diverged at alpha=" + sci(g.node(i)));
    }
    J << (d - 1) * ipow(a, d - 2), (d - 1) * ipow(b, d - 2), m * ipow(a, m - 1), -m * ipow(b, m - 1);
    const Eigen::Vector2d dv = J.partialPivLu().solve(Eigen::Vector2d(dPhi[i], dQ[i]));
    R[i] = a;
    r[i] = b;
    dR[i] = dv(0);
    dr[i] = dv(1);
  }
  return RadialPair(g.nodes(), R, dR, r, dr);
}

OddPipeline run_odd_pipeline(int d, const Perturbation& h, const OddOptions& opt) {
  OddPipeline out;
  const OddSystemData sys = build_odd_system(d, h, opt);
  out.xi_consistency = sys.xi_consistency;
  OddChordSolution sol = solve_odd_chords(sys, opt.picard);
  out.picard = std::move(sol.picard);
  out.chords = ChordFunctions{std::move(sol.Z), sys.a(), 1.0};
  out.zonal = phi_psi(d, out.chords, h, alpha_grid(h.basis(), opt), opt);
  out.theta = theta_h(out.zonal.Psi, d, opt.k, opt.fit_degree, opt.fit_span);
  return out;
}

BorsukResult borsuk_search(int d, const BumpBasis& basis, double scale, const OddOptions& opt, double tol,
                           int max_evaluations) {
  return search(d, basis, scale, opt, tol, max_evaluations).result;
}

OddBuild assemble_odd_body(int d, const Perturbation& h, const OddOptions& opt) {
  return assemble_from(d, h, run_odd_pipeline(d, h, opt), opt);
}

OddBuild build_odd_body(int d, const BumpBasis& basis, double scale, const OddOptions& opt, double tol) {
  for (int k = 0;; ++k) {
    try {
      Search s = search(d, basis, scale, opt, tol, 30);
      if (!s.result.converged && opt.require_cancellation)
        throw Error(ErrorKind::SearchExhausted,
                    "cancellation residual " + sci(s.result.residual) + " above " + sci(tol));
      const Perturbation h(basis, s.result.coeffs, scale);
      OddBuild out = assemble_from(d, h, std::move(s.best), opt);
      out.evaluations = s.result.evaluations;
      out.search = std::move(s.result);
      out.halvings = k;
      return out;
    } catch (const Error& e) {
      const ErrorKind kind = e.kind();
      const bool retry = kind == ErrorKind::ConvexityFailure || kind == ErrorKind::NonMonotone ||
                         kind == ErrorKind::DomainEscape || kind == ErrorKind::NoContraction ||
                         kind == ErrorKind::ConvergenceFailure;
      if (!retry || k >= opt.max_halvings) throw;
      scale *= 0.5;
    }
  }
}

}  // namespace klee
