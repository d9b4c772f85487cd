#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <functional>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "klee/abel.hpp"
#include "klee/commands.hpp"
#include "klee/error.hpp"
#include "klee/even_builder.hpp"
#include "klee/odd_builder.hpp"
#include "klee/radon.hpp"
#include "klee/verify.hpp"

using namespace klee;

namespace {

struct Outcome {
  bool pass = true;
  std::vector<std::string> lines;

  void check(bool ok, const std::string& what) {
    pass = pass && ok;
    lines.push_back(std::string(ok ? "ok   " : "FAIL ") + what);
  }
};

std::string sci(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.3g", v);
  return buf;
}

double seconds_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

Perturbation even_bump(double eps) { return Perturbation(BumpBasis(0.05, 1), {1.0}, eps); }

// Shared between criteria.
std::optional<BodyOfRevolution> even_body;
std::vector<double> odd_coeffs;
std::string klee_exe;

// ---- 1 ----------------------------------------------------------------------

Outcome ball_baseline() {
  Outcome o;
  const auto t0 = std::chrono::steady_clock::now();
  std::mt19937 rng(1);
  std::uniform_real_distribution<double> us(0.0, 3.0);
  for (int d = 3; d <= 6; ++d) {
    BuildConfig cfg;
    cfg.dim = d;
    cfg.h_scale = 0.0;
    const BodyRecord rec = build_body(cfg);
    const bool is_ball = rec.body.profile.arcs().size() == 1 &&
                         std::holds_alternative<CircleArc>(rec.body.profile.arcs()[0]) && !rec.body.perturbation;
    o.check(is_ball, "d=" + std::to_string(d) + " unperturbed build is the unit ball");
    VerifyOptions opt;
    opt.directions = 200;
    const VerificationReport r = verify_body(rec.body, opt);
    const double vd = unit_ball_volume(d - 1);
    const double dev = std::max(std::abs(r.max / vd - 1), std::abs(r.min / vd - 1));
    o.check(r.spread <= 1e-10 && dev <= 1e-10,
            "d=" + std::to_string(d) + " M_K spread " + sci(r.spread) + ", |M_K/v_{d-1} - 1| " + sci(dev));
    double worst = 0.0;
    const double c = vd / unit_ball_volume(d - 2);
    for (int i = 0; i < 20; ++i) {
      const double s = us(rng);
      const double I = chord_integral(rec.body.profile, s, 0.0, [&](double, double F, double L) {
        return std::pow(std::max(F - L * L, 0.0), 0.5 * (d - 2));
      });
      worst = std::max(worst, std::abs(I * std::sqrt(1 + s * s) / c - 1));
    }
    o.check(worst <= 1e-10, "d=" + std::to_string(d) + " chord-integral constant, 20 slopes, rel err " + sci(worst));
  }
  const double t = seconds_since(t0);
  o.check(t < 10.0, "runtime " + sci(t) + " s");
  return o;
}

// ---- 2 ----------------------------------------------------------------------

Outcome even_construction() {
  Outcome o;
  const auto t0 = std::chrono::steady_clock::now();
  const EvenBuild b = build_even_body(4, even_bump(1e-3));
  even_body = b.body;
  o.check(b.halvings == 0, "amplitude 1e-3 accepted (used " + sci(b.scale_used) + " after " +
                               std::to_string(b.halvings) + " halvings for concavity)");
  VerifyOptions opt;
  opt.directions = 200;
  opt.tol = 1e-5;
  const VerificationReport r = verify_body(b.body, opt);
  o.check(r.spread <= 1e-5, "M_K spread over 200 directions " + sci(r.spread));
  o.check(b.moments.deviation <= 1e-9, "return to the semicircle on [1-3delta, 1-2delta] " + sci(b.moments.deviation));
  double chain = 0.0;
  for (double c : b.chain) chain = std::max(chain, c);
  o.check(!b.chain.empty() && chain <= 1e-8, "moment chain residual " + sci(chain));
  o.check(r.concavity_margin > 0.0, "concavity margin " + sci(r.concavity_margin));
  o.check(r.asymmetry > 1e-4, "asymmetry residual " + sci(r.asymmetry) + " (needs > 1e-4)");
  const double t = seconds_since(t0);
  o.check(t < 300.0, "runtime " + sci(t) + " s");
  return o;
}

// ---- 3 ----------------------------------------------------------------------

Outcome odd_construction() {
  Outcome o;
  const auto t0 = std::chrono::steady_clock::now();
  const BumpBasis basis(0.05, 3 + 2 + 1);
  OddOptions opt;
  opt.k = 2;
  opt.require_cancellation = false;
  const OddBuild b = build_odd_body(3, basis, 1e-5, opt);
  odd_coeffs = b.coeffs;
  o.check(b.B_residual <= 1e-9, "|B(x*)| / scale " + sci(b.B_residual) + " after " +
                                    std::to_string(b.search.evaluations) + " pipeline runs");
  o.check(b.cap_mismatch <= 1e-7, "cap mismatch " + sci(b.cap_mismatch));
  o.check(b.slope_at_zero <= 1e-6, "max(|R'(0)|, |r'(0)|) " + sci(b.slope_at_zero));
  VerifyOptions vo;
  vo.directions = 200;
  vo.tol = 1e-5;
  const VerificationReport r = verify_body(b.body, vo);
  o.check(r.spread <= 1e-5, "M_K spread over 200 directions " + sci(r.spread));
  o.check(r.concavity_margin > 0.0, "concavity margin " + sci(r.concavity_margin));
  o.check(r.asymmetry > 1e-4, "asymmetry residual " + sci(r.asymmetry) + " (needs > 1e-4; max|R - r| " +
                                  sci(b.max_asymmetry) + ")");
  const double t = seconds_since(t0);
  o.check(t < 1800.0, "runtime " + sci(t) + " s");
  return o;
}

// ---- 4 ----------------------------------------------------------------------

ChordState offset_state(const ChordState& Z, double amp, int mode, double delta) {
  ChordState out = Z;
  const double cut = 1.0 - delta, a = Z.grid.a();
  for (int i = 0; i < Z.grid.size(); ++i) {
    const double s = Z.grid.node(i);
    if (s >= cut) continue;
    const double w = std::sin(M_PI * (s - a) / (cut - a) * mode) * (cut - s);
    for (int c = 0; c < Z.m; ++c) out(i, c) += amp * w * (c % 2 ? -1.0 : 1.0);
  }
  return out;
}

Outcome abel_volterra_suite() {
  Outcome o;
  double worst = 0.0;
  auto track = [&](double v, double exact) { worst = std::max(worst, std::abs(v - exact)); };
  const double b = 1.0;
  track(abel_forward([](double) { return 1.0; }, 0.0, b), 2.0);
  track(abel_forward([](double x) { return x; }, 0.0, b), 2.0 / 3.0);
  for (double s : {0.0, 0.3, 0.7, 0.95}) {
    track(abel_forward([](double x) { return std::sqrt(1.0 - x); }, s, b), M_PI / 2 * (b - s));
    track(tilde_rhs([](Dual) { return Dual(2.5); }, s, b), -2.5 / std::sqrt(b - s));
    track(tilde_rhs([](Dual x) { return sqrt(Dual(1.0) - x); }, s, b), -M_PI / 2);
  }
  // Composition of two Abel transforms collapses to pi times the integral.
  auto inner = [&](double s) { return abel_forward([](double x) { return std::exp(x); }, s, b); };
  track(abel_forward(inner, 0.1, b), M_PI * (std::exp(b) - std::exp(0.1)));
  auto U = [](double x, double sig) { return 2.0 * x - 0.5 + sig * sig; };
  track(v_kernel([](double, double) { return 1.0; }, 0.2, 0.7), M_PI);
  track(v_kernel(U, 0.2, 0.9), M_PI * U(0.55, 0.9));
  o.check(worst <= 1e-10, "abel_forward / tilde_rhs / v_kernel analytic pairs, max residual " + sci(worst));

  std::mt19937 rng(5);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  double disc = 0.0;
  for (int trial = 0; trial < 10; ++trial) {
    const double a0 = u(rng), a1 = u(rng), a2 = u(rng), a3 = u(rng), c0 = u(rng), c1 = u(rng);
    auto Uc = [=](auto s, auto sig) {
      using std::exp;
      using T = decltype(s * sig);
      return T(a0) + T(a1) * s + T(a2) * sig * sig + T(a3) * exp(s * sig);
    };
    auto R = [=](auto s) {
      using T = decltype(s);
      return T(c0) + T(c1) * s * s;
    };
    disc = std::max(disc, invert22_equivalence_check(Uc, R, 0.5, 1.0).discrepancy);
  }
  o.check(disc <= 1e-8, "two-form agreement on 10 synthetic systems " + sci(disc));

  // Contraction of the unperturbed Picard maps, probed around Z_o.
  const EvenSystemData e4 = build_even_system(4, Perturbation::zero(0.05));
  const OddSystemData o3 = build_odd_system(3, Perturbation::zero(0.05));
  for (const auto* sys : {&e4.system, &o3.system}) {
    const ChordState& Zo = sys == &e4.system ? e4.Z_o : o3.Z_o;
    std::vector<ChordState> probes{Zo};
    for (int k = 1; k <= 3; ++k) probes.push_back(offset_state(Zo, 1e-4 * k, k, 0.05));
    const double k_hat = contraction_estimate(*sys, probes);
    o.check(k_hat <= 0.5, std::string(sys == &e4.system ? "d=4" : "d=3") + " unperturbed contraction factor " +
                              sci(k_hat));
  }

  // A-posteriori Banach bound along 5 restarts of a perturbed d = 4 system.
  const EvenSystemData sys = build_even_system(4, even_bump(1.5625e-5));
  const auto xi = xi_at_nodes(sys.system, sys.grid);
  bool bound_ok = true, unique = true;
  std::optional<ChordState> first;
  double worst_ratio = 0.0;
  for (int r = 1; r <= 5; ++r) {
    const PicardResult res = picard_solve(sys.system, offset_state(sys.Z_o, 2e-4 * r, r, 0.05), {}, true);
    for (size_t j = 0; j + 1 < res.history.size(); ++j) {
      const ChordState& Zj = res.history[j];
      const double pred = apply_T(sys.system, Zj, xi).sup_distance(Zj) / (1.0 - res.k_hat);
      const double actual = Zj.sup_distance(res.Z);
      if (actual > pred * (1 + 1e-9) + 1e-13) bound_ok = false;
      if (pred > 0) worst_ratio = std::max(worst_ratio, actual / pred);
    }
    if (!first) first = res.Z;
    else if (first->sup_distance(res.Z) > 1e-11) unique = false;
  }
  o.check(bound_ok, "a-posteriori bound holds on 5 restarts (max actual/bound " + sci(worst_ratio) + ")");
  o.check(unique, "restarts reach the same fixed point");

  const EvenSolution es = solve_even(sys);
  const OddChordSolution os = solve_odd_chords(build_odd_system(3, Perturbation(BumpBasis(0.05, 6), {0.5, -0.2, -0.4, -0.4, -0.1, 0.6}, 1e-5)));
  o.check(es.picard.locality_ok && es.picard.frozen_deviation == 0.0 && os.picard.locality_ok &&
              os.picard.frozen_deviation == 0.0,
          "solution frozen on [1-delta, 1] in every sweep (d=4, d=3)");
  return o;
}

// ---- 5 ----------------------------------------------------------------------

Outcome radon_suite() {
  Outcome o;
  const PanelGrid g(linspace(0.0, M_PI / 2, 25), 16);
  double cal = 0.0;
  for (int d = 3; d <= 7; ++d) {
    const ZonalRadon R(d, g);
    for (double v : R.forward(ZonalFunction::sample(g, [](double) { return 1.0; })).values)
      cal = std::max(cal, std::abs(v / sphere_measure(d - 2) - 1));
  }
  o.check(cal <= 1e-10, "g = 1 maps to |S^{d-2}|, d = 3..7, rel err " + sci(cal));

  std::mt19937 rng(11);
  std::uniform_real_distribution<double> u(-0.05, 0.05);
  double rt = 0.0;
  const PanelGrid cap = alpha_grid(BumpBasis(0.05, 6));
  for (int t = 0; t < 20; ++t) {
    const int d = 3 + t % 3;
    const PanelGrid& grid = t % 2 ? cap : g;
    const ZonalRadon& R = *zonal_radon_operator(d, grid);
    const double c1 = u(rng), c2 = u(rng), c3 = u(rng);
    const auto data = ZonalFunction::sample(grid, [&](double b) {
      return sphere_measure(d - 2) * (1 + c1 * std::cos(2 * b) + c2 * std::cos(4 * b) + c3 * std::pow(std::sin(b), 3));
    });
    const auto back = R.forward(R.inverse(data));
    for (size_t i = 0; i < data.values.size(); ++i) rt = std::max(rt, std::abs(back.values[i] - data.values[i]));
  }
  o.check(rt <= 1e-7, "inverse roundtrip on 20 perturbed zonal functions " + sci(rt));

  double lin = 0.0;
  for (int d : {3, 5}) {
    const ZonalRadon R(d, g);
    const auto a = ZonalFunction::sample(g, [](double b) { return 1 + 0.02 * std::cos(2 * b); });
    const auto c = ZonalFunction::sample(g, [](double x) { return 0.5 - 0.01 * std::sin(x) * std::sin(x); });
    std::vector<double> sum(a.values.size());
    for (size_t i = 0; i < sum.size(); ++i) sum[i] = 2.0 * a.values[i] - 3.0 * c.values[i];
    const auto ia = R.inverse(a.values), ic = R.inverse(c.values), is = R.inverse(sum);
    for (size_t i = 0; i < sum.size(); ++i) lin = std::max(lin, std::abs(is[i] - 2.0 * ia[i] + 3.0 * ic[i]));
  }
  o.check(lin <= 1e-9, "linearity of the inverse " + sci(lin));
  return o;
}

// ---- 6 ----------------------------------------------------------------------

double shifted_radius(const RadialPair& P, int side, double a, double t) {
  auto miss = [&](double rho) {
    const double x = side * rho * std::cos(a) + t, y = rho * std::sin(a);
    const RadialSample s = P.eval(std::atan2(y, std::abs(x)));
    return std::hypot(x, y) - (x > 0 ? s.R : s.r);
  };
  double r0 = side > 0 ? P.eval(a).R : P.eval(a).r, r1 = r0 - side * t * std::cos(a);
  double f0 = miss(r0), f1 = miss(r1);
  for (int it = 0; it < 60 && f1 != 0.0 && f1 != f0; ++it) {
    const double r2 = r1 - f1 * (r1 - r0) / (f1 - f0);
    r0 = r1;
    f0 = f1;
    r1 = r2;
    f1 = miss(r1);
  }
  return r1;
}

Outcome lemma_gradient() {
  Outcome o;
  std::mt19937 rng(23);
  std::uniform_real_distribution<double> U(-0.03, 0.03), A(0.2, 1.4);
  double worst = 0.0;
  for (int trial = 0; trial < 20; ++trial) {
    const double a1 = U(rng), a2 = U(rng), b1 = U(rng), b2 = U(rng);
    const int n = 2049;
    std::vector<double> al(n), R(n), dR(n), r(n), dr(n);
    for (int i = 0; i < n; ++i) {
      const double a = M_PI / 2 * i / (n - 1);
      al[i] = a;
      R[i] = 1 + a1 * std::cos(2 * a) + a2 * std::cos(4 * a);
      dR[i] = -2 * a1 * std::sin(2 * a) - 4 * a2 * std::sin(4 * a);
      r[i] = 1 + b1 * std::cos(2 * a) + b2 * std::cos(4 * a);
      dr[i] = -2 * b1 * std::sin(2 * a) - 4 * b2 * std::sin(4 * a);
    }
    const RadialPair P(al, R, dR, r, dr);
    const int d = trial % 2 ? 5 : 3;
    const double a = A(rng), t = 1e-5;
    double fd = 0.0;
    for (int side : {1, -1}) {
      const double rho = side > 0 ? P.eval(a).R : P.eval(a).r;
      fd += std::pow(rho, d - 2) * (shifted_radius(P, side, a, t) - shifted_radius(P, side, a, -t)) / (2 * t);
    }
    worst = std::max(worst, std::abs(lemma_trum_form(P, d, a) / fd - 1));
  }
  o.check(worst <= 1e-6, "boundary form vs central differences, 20 radial pairs, rel err " + sci(worst));
  return o;
}

// ---- 7 ----------------------------------------------------------------------

Outcome scaling_study() {
  Outcome o;
  const std::vector<double> eps{1e-3, 5e-4, 2.5e-4};
  std::vector<double> zr, pr, qr;
  for (double e : eps) {
    const EvenSystemData sys = build_even_system(4, even_bump(e));
    zr.push_back(solve_even(sys).Z.sup_distance(sys.Z_o) / e);
  }
  const std::vector<double> c = odd_coeffs.empty() ? std::vector<double>(6, 1.0 / std::sqrt(6.0)) : odd_coeffs;
  // The cap/extension mismatch is a discretization error of relative size
  // ~1e-4; the absolute default (1e-8) is tuned for amplitudes near 1e-5.
  OddOptions odd;
  odd.extension_tol = 1e-6;
  for (double e : eps) {
    try {
      const OddPipeline p = run_odd_pipeline(3, Perturbation(BumpBasis(0.05, 6), c, e), odd);
      double m = 0.0, q = 0.0;
      for (double v : p.zonal.Phi.values) m = std::max(m, std::abs(v - 2.0));
      for (double v : p.zonal.Psi.values) q = std::max(q, std::abs(v));
      pr.push_back(m / e);
      qr.push_back(q / e);
    } catch (const Error& err) {
      o.check(false, "odd pipeline at eps " + sci(e) + ": " + err.what());
    }
  }
  auto spread = [](const std::vector<double>& v) {
    const auto [lo, hi] = std::minmax_element(v.begin(), v.end());
    return *hi / *lo - 1;
  };
  o.check(spread(zr) <= 0.2, "|Z - Z_o| / eps varies by " + sci(spread(zr)));
  if (pr.size() == eps.size()) {
    // Observed order of |Phi_h - 2| in eps over the factor-4 range.
    const double order = 1.0 + std::log(pr.front() / pr.back()) / std::log(eps.front() / eps.back());
    o.check(spread(pr) <= 0.2, "|Phi_h - 2| / eps varies by " + sci(spread(pr)) + " (observed order " + sci(order) + ")");
    o.check(spread(qr) <= 0.2, "|Psi_h| / eps varies by " + sci(spread(qr)));
  }
  for (double e : eps) {
    try {
      const EvenBuild b = assemble_even_body(4, even_bump(e));
      VerifyOptions opt;
      const VerificationReport r = verify_body(b.body, opt);
      o.check(r.pass, "even build at eps " + sci(e) + " verifies (spread " + sci(r.spread) + ", asymmetry " +
                          sci(r.asymmetry) + ")");
    } catch (const Error& err) {
      o.check(false, "even build at eps " + sci(e) + ": " + to_string(err.kind()));
    }
  }
  for (double e : eps) {
    try {
      const OddBuild b = assemble_odd_body(3, Perturbation(BumpBasis(0.05, 6), c, e), odd);
      o.check(false, "odd build at eps " + sci(e) + " assembled, but |B| / eps " + sci(b.B_residual) +
                         " uses the coefficients of the 1e-5 search");
    } catch (const Error& err) {
      o.check(false, "odd build at eps " + sci(e) + ": " + to_string(err.kind()));
    }
  }
  return o;
}

// ---- 8 ----------------------------------------------------------------------

Outcome negative_control() {
  Outcome o;
  BodyRecord rec = ball_record(4);
  if (even_body) rec.body = *even_body;
  rec.body.profile = corrupted_profile(rec.body.profile, 0.2, 0.6, 1e-3);
  const std::string body = "acceptance_corrupted.json", out = "acceptance_corrupted_report.json";
  save_body(rec, body);
  const std::string cmd = klee_exe + " verify " + body + " --directions 200 --tol 1e-5 > " + out;
  const int status = std::system(cmd.c_str());
  const int code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
  o.check(code == 3, "verify exits with code " + std::to_string(code) + " (3 = rejected)");
  std::ifstream in(out);
  try {
    const json j = json::parse(in);
    const double spread = j.at("spread").get<double>();
    o.check(spread > 1e-5, "spread " + sci(spread) + " > 1e-5");
    o.check(j["verdicts"]["spread"] == "FAIL", "spread verdict FAIL");
  } catch (const std::exception& e) {
    o.check(false, std::string("report unreadable: ") + e.what());
  }
  return o;
}

}  // namespace

int main(int argc, char** argv) {
  klee_exe = argc > 1 ? argv[1] : "klee";
  // Optional criterion ids after the executable path select a subset.
  std::vector<int> only;
  for (int i = 2; i < argc; ++i) only.push_back(std::atoi(argv[i]));
  struct Item {
    int id;
    const char* name;
    std::function<Outcome()> run;
  };
  const std::vector<Item> items{
      {1, "ball baseline", ball_baseline},
      {2, "even construction d=4", even_construction},
      {3, "odd construction d=3", odd_construction},
      {4, "Abel/Volterra suite", abel_volterra_suite},
      {5, "Radon suite", radon_suite},
      {6, "boundary-form gradient check", lemma_gradient},
      {7, "scaling study", scaling_study},
      {8, "negative control", negative_control},
  };
  int failed = 0;
  int run = 0;
  for (const Item& it : items) {
    if (!only.empty() && std::find(only.begin(), only.end(), it.id) == only.end()) continue;
    ++run;
    const auto t0 = std::chrono::steady_clock::now();
    Outcome o;
    try {
      o = it.run();
    } catch (const std::exception& e) {
      o.check(false, std::string("exception: ") + e.what());
    }
    for (const auto& l : o.lines) std::printf("    %s\n", l.c_str());
    std::printf("criterion %d (%s): %s  [%.1f s]\n", it.id, it.name, o.pass ? "PASS" : "FAIL", seconds_since(t0));
    std::fflush(stdout);
    if (!o.pass) ++failed;
  }
  std::printf("%d of %d criteria passed\n", run - failed, run);
  return failed == 0 ? 0 : 1;
}
