#include "klee/commands.hpp"

#include <cmath>
#include <cstdio>
#include <random>

#include "klee/chords.hpp"
#include "klee/error.hpp"

namespace klee {

namespace {

template <class T>
void take(const json& j, const char* key, T& out) {
  if (j.contains(key)) out = j.at(key).get<T>();
}

std::string row(std::initializer_list<double> v) {
  std::string s;
  char buf[32];
  for (double x : v) {
    std::snprintf(buf, sizeof buf, "%.17g", x);
    if (!s.empty()) s += ',';
    s += buf;
  }
  return s + '\n';
}

}  // namespace

void apply_config(BuildConfig& cfg, const json& j) {
  try {
    take(j, "dim", cfg.dim);
    take(j, "delta", cfg.delta);
    if (j.contains("h-scale")) cfg.h_scale = j.at("h-scale").get<double>();
    take(j, "h-coeffs", cfg.h_coeffs);
    take(j, "k", cfg.k);
    take(j, "seed", cfg.seed);
    take(j, "count", cfg.count);
    take(j, "fill", cfg.fill);
    take(j, "directions", cfg.directions);
    take(j, "tol", cfg.tol);
    cfg.odd.k = cfg.k;
  } catch (const json::exception& e) {
    throw Error(ErrorKind::ParseError, std::string("config: ") + e.what());
  }
}

json config_to_json(const BuildConfig& cfg) {
  json j = {{"dim", cfg.dim},     {"delta", cfg.delta}, {"h-scale", cfg.scale()},         {"k", cfg.k},
            {"seed", cfg.seed},   {"count", cfg.count}, {"fill", cfg.fill},               {"directions", cfg.directions},
            {"tol", cfg.tol}};
  if (!cfg.h_coeffs.empty()) j["h-coeffs"] = cfg.h_coeffs;
  return j;
}

std::vector<double> even_coefficients(const BuildConfig& cfg) {
  if (!cfg.h_coeffs.empty()) return cfg.h_coeffs;
  if (cfg.count == 1) return {1.0};
  std::mt19937_64 rng(cfg.seed);
  std::uniform_real_distribution<double> u(0.5, 1.0);
  std::vector<double> c(cfg.count);
  for (double& x : c) x = u(rng);
  return c;
}

BodyRecord build_body(const BuildConfig& cfg) {
  if (cfg.dim < 3) throw Error(ErrorKind::InvalidArgument, "dimension must be at least 3");
  const double scale = cfg.scale();
  if (scale < 0.0) throw Error(ErrorKind::InvalidArgument, "h-scale must be non-negative");
  BodyRecord rec;
  if (scale == 0.0) {
    rec = ball_record(cfg.dim);
  } else if (cfg.dim % 2 == 0) {
    const std::vector<double> c = even_coefficients(cfg);
    const Perturbation h(BumpBasis(cfg.delta, static_cast<int>(c.size()), cfg.fill), c, scale);
    rec = record_from(build_even_body(cfg.dim, h, cfg.even));
  } else {
    OddOptions opt = cfg.odd;
    opt.k = cfg.k;
    if (!cfg.h_coeffs.empty()) {
      const int m = static_cast<int>(cfg.h_coeffs.size());
      const Perturbation h(BumpBasis(cfg.delta, m, cfg.fill), cfg.h_coeffs, scale);
      rec = record_from(assemble_odd_body(cfg.dim, h, opt));
    } else {
      const BumpBasis basis(cfg.delta, cfg.dim + cfg.k + 1, cfg.fill);
      rec = record_from(build_odd_body(cfg.dim, basis, scale, opt));
    }
  }
  rec.report["config"] = config_to_json(cfg);
  return rec;
}

ProfileFunction corrupted_profile(const ProfileFunction& f, double lo, double hi, double amp, int knots) {
  if (f.shift() != 0.0) throw Error(ErrorKind::InvalidArgument, "corrupt an unshifted profile");
  if (!(-f.lambda() < lo && lo < hi && hi < f.mu())) throw Error(ErrorKind::InvalidArgument, "bump outside the profile");
  std::vector<Arc> arcs;
  for (Arc a : f.arcs()) {
    const double alo = std::visit([](const auto& x) { return x.lo; }, a);
    const double ahi = std::visit([](const auto& x) { return x.hi; }, a);
    if (alo < lo) {
      Arc left = a;
      std::visit([&](auto& x) { x.hi = std::min(ahi, lo); }, left);
      arcs.push_back(left);
    }
    if (ahi > hi) {
      Arc right = a;
      std::visit([&](auto& x) { x.lo = std::max(alo, hi); }, right);
      arcs.push_back(right);
    }
  }
  std::vector<double> xi = linspace(lo, hi, knots), v(knots);
  for (int i = 0; i < knots; ++i) {
    const double tau = (2.0 * xi[i] - lo - hi) / (hi - lo);
    v[i] = f(xi[i]) + (std::abs(tau) < 1.0 ? amp * std::exp(1.0 - 1.0 / (1.0 - tau * tau)) : 0.0);
  }
  arcs.push_back(XiSplineArc{CubicSpline(xi, v, f.eval(lo).f1, f.eval(hi).f1), lo, hi});
  return ProfileFunction(std::move(arcs));
}

PlotTables plot_tables(const BodyRecord& rec, const VerificationReport& scan, int samples) {
  PlotTables t;
  const ProfileFunction& f = rec.body.profile;
  t.profile = "xi,f,f1,f2\n";
  // Endpoints are poles (infinite slope); report them with value only.
  const std::vector<double> xi = linspace(-f.lambda(), f.mu(), samples);
  for (int i = 0; i < samples; ++i) {
    if (i == 0 || i == samples - 1) {
      t.profile += row({xi[i], 0.0, NAN, NAN});
      continue;
    }
    const ProfileValue v = f.eval(xi[i]);
    t.profile += row({xi[i], v.f, v.f1, v.f2});
  }

  t.chords = "s,x,y,x_o\n";
  ChordSamples ch;
  if (rec.chords) {
    ch = *rec.chords;
  } else {
    ch.s = linspace(0.0, 1.0, 201);
    for (double s : ch.s) {
      ch.x.push_back(x_unperturbed(s));
      ch.y.push_back(x_unperturbed(s));
    }
  }
  for (size_t i = 0; i < ch.s.size(); ++i) t.chords += row({ch.s[i], ch.x[i], ch.y[i], x_unperturbed(ch.s[i])});

  t.radial = "alpha,R,r\n";
  const RadialPair pair = rec.radial ? *rec.radial : radial_from_profile(rec.body, samples);
  for (size_t i = 0; i < pair.alpha().size(); ++i) t.radial += row({pair.alpha()[i], pair.R()[i], pair.r()[i]});

  t.mk = "alpha,side,t_star,M_K\n";
  for (const auto& s : scan.samples) t.mk += row({s.alpha, static_cast<double>(s.side), s.t_star, s.value});
  return t;
}

}  // namespace klee
