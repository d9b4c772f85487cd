#include <cmath>
#include <cstdio>
#include <random>
#include <sstream>

#include "doctest.h"
#include "klee/commands.hpp"
#include "klee/error.hpp"
#include "klee/io.hpp"

using namespace klee;

namespace {

RadialPair ellipse_pair(double a, double b, int n = 2049) {
  std::vector<double> al = linspace(0.0, M_PI / 2, n), R, dR;
  for (double t : al) {
    const double c = std::cos(t), s = std::sin(t);
    const double q = c * c / (a * a) + s * s / (b * b);
    R.push_back(1.0 / std::sqrt(q));
    dR.push_back(-0.5 * std::pow(q, -1.5) * 2.0 * c * s * (1.0 / (b * b) - 1.0 / (a * a)));
  }
  return RadialPair(al, R, dR, R, dR);
}

ProfileFunction polar_profile() {
  std::vector<double> a = linspace(0.0, M_PI / 2, 513), R, dR, r, dr;
  for (double t : a) {
    const double c2 = std::cos(t) * std::cos(t), cs = std::cos(t) * std::sin(t);
    R.push_back(1.0 + 0.02 * c2 * c2);
    dR.push_back(-0.08 * c2 * cs);
    r.push_back(1.0 - 0.01 * c2 * c2);
    dr.push_back(0.04 * c2 * cs);
  }
  return profile_from_radial(RadialPair(a, R, dR, r, dr), 3);
}

void check_same(const ProfileFunction& f, const ProfileFunction& g) {
  REQUIRE(f.arcs().size() == g.arcs().size());
  CHECK(f.lambda() == g.lambda());
  CHECK(f.mu() == g.mu());
  std::mt19937 rng(3);
  std::uniform_real_distribution<double> u(-f.lambda(), f.mu());
  for (int i = 0; i < 200; ++i) {
    const double xi = u(rng);
    const ProfileValue a = f.eval(xi), b = g.eval(xi);
    CHECK(a.f == b.f);
    CHECK(a.f1 == b.f1);
    CHECK(a.f2 == b.f2);
  }
}

}  // namespace

TEST_CASE("profile JSON roundtrip is exact") {
  for (const ProfileFunction& f : {ProfileFunction::ball(), ProfileFunction::ball().shifted(0.125), polar_profile(),
                                   corrupted_profile(ProfileFunction::ball(), 0.2, 0.6, 1e-3)}) {
    const json j = profile_to_json(f);
    check_same(f, profile_from_json(json::parse(j.dump())));
  }
}

TEST_CASE("body record roundtrip through a file") {
  BodyRecord rec;
  rec.body = BodyOfRevolution{5, polar_profile(), Perturbation(BumpBasis(0.05, 3), {0.3, -0.2, 0.9}, 1e-5)};
  rec.chords = ChordSamples{{0.85, 0.9, 1.0}, {0.76, 0.74, 0.7}, {0.76, 0.74, 0.71}};
  rec.radial = ellipse_pair(1.2, 0.9, 33);
  rec.report = {{"kind", "test"}, {"value", 0.1}};
  const std::string path = "test_io_body.json";
  save_body(rec, path);
  const BodyRecord back = load_body(path);
  std::remove(path.c_str());
  CHECK(back.body.dim == 5);
  check_same(rec.body.profile, back.body.profile);
  REQUIRE(back.body.perturbation);
  CHECK(back.body.perturbation->coeffs() == rec.body.perturbation->coeffs());
  CHECK(back.body.perturbation->scale() == 1e-5);
  CHECK(back.body.perturbation->basis().count() == 3);
  CHECK(back.body.perturbation->eval(0.925) == rec.body.perturbation->eval(0.925));
  REQUIRE(back.chords);
  CHECK(back.chords->y == rec.chords->y);
  REQUIRE(back.radial);
  CHECK(back.radial->R() == rec.radial->R());
  CHECK(back.radial->dr() == rec.radial->dr());
  CHECK(back.report == rec.report);
}

TEST_CASE("malformed bodies raise ParseError") {
  json good = body_to_json(ball_record(3));
  auto kind_of = [](const json& j) {
    try {
      body_from_json(j);
    } catch (const Error& e) {
      return e.kind();
    }
    return ErrorKind::InvalidArgument;
  };
  CHECK_NOTHROW(body_from_json(good));
  json bad = good;
  bad["format"] = "klee-body/0";
  CHECK(kind_of(bad) == ErrorKind::ParseError);
  bad = good;
  bad.erase("dim");
  CHECK(kind_of(bad) == ErrorKind::ParseError);
  bad = good;
  bad["profile"]["arcs"][0]["type"] = "spiral";
  CHECK(kind_of(bad) == ErrorKind::ParseError);
  bad = good;
  bad["profile"]["arcs"][0]["hi"] = 0.5;
  bad["profile"]["arcs"].push_back({{"type", "circle"}, {"lo", 0.6}, {"hi", 1.0}});
  CHECK(kind_of(bad) == ErrorKind::ParseError);
  bad = good;
  bad["perturbation"] = {{"delta", 0.5}, {"count", 1}, {"coeffs", {1.0}}, {"scale", 1.0}};
  CHECK(kind_of(bad) == ErrorKind::ParseError);
  CHECK_THROWS_AS(load_body("does/not/exist.json"), Error);
}

TEST_CASE("config overrides and coefficient draws") {
  BuildConfig cfg;
  CHECK(cfg.scale() == 1e-3);
  cfg.dim = 3;
  CHECK(cfg.scale() == 1e-5);
  apply_config(cfg, json{{"dim", 6}, {"h-scale", 0.0}, {"count", 3}, {"seed", 7}, {"tol", 1e-6}});
  CHECK(cfg.dim == 6);
  CHECK(cfg.scale() == 0.0);
  CHECK(cfg.tol == 1e-6);
  const auto c1 = even_coefficients(cfg), c2 = even_coefficients(cfg);
  CHECK(c1 == c2);
  REQUIRE(c1.size() == 3);
  for (double c : c1) CHECK((c >= 0.5 && c <= 1.0));
  cfg.seed = 8;
  CHECK(even_coefficients(cfg) != c1);
  CHECK_THROWS_AS(apply_config(cfg, json{{"dim", "four"}}), Error);
}

TEST_CASE("zero amplitude builds the exact ball in every dimension") {
  for (int d = 3; d <= 6; ++d) {
    BuildConfig cfg;
    cfg.dim = d;
    cfg.h_scale = 0.0;
    const BodyRecord rec = build_body(cfg);
    CHECK(rec.body.dim == d);
    REQUIRE(rec.body.profile.arcs().size() == 1);
    CHECK(std::holds_alternative<CircleArc>(rec.body.profile.arcs()[0]));
    CHECK_FALSE(rec.body.perturbation);
  }
}

TEST_CASE("plot tables of the ball") {
  const BodyRecord rec = ball_record(4);
  VerifyOptions opt;
  opt.directions = 10;
  const PlotTables t = plot_tables(rec, verify_body(rec.body, opt), 41);
  std::istringstream in(t.profile);
  std::string line;
  std::getline(in, line);
  CHECK(line == "xi,f,f1,f2");
  int rows = 0;
  double err = 0.0;
  while (std::getline(in, line)) {
    double xi, f;
    REQUIRE(std::sscanf(line.c_str(), "%lf,%lf", &xi, &f) == 2);
    err = std::max(err, std::abs(f - std::sqrt(std::max(0.0, 1 - xi * xi))));
    ++rows;
  }
  CHECK(rows == 41);
  CHECK(err < 1e-14);
  CHECK(t.mk.rfind("alpha,side,t_star,M_K\n", 0) == 0);
  CHECK(t.radial.rfind("alpha,R,r\n", 0) == 0);
  CHECK(t.chords.rfind("s,x,y,x_o\n", 0) == 0);
}
