#include <cmath>
#include <random>

#include "doctest.h"
#include "klee/geometry.hpp"

using namespace klee;

TEST_CASE("unit ball volumes") {
  CHECK(unit_ball_volume(0) == doctest::Approx(1.0));
  CHECK(unit_ball_volume(1) == doctest::Approx(2.0));
  CHECK(unit_ball_volume(2) == doctest::Approx(M_PI));
  CHECK(unit_ball_volume(3) == doctest::Approx(4 * M_PI / 3));
  CHECK(sphere_measure(2) == doctest::Approx(4 * M_PI));
  CHECK(sphere_measure(3) == doctest::Approx(2 * M_PI * M_PI));
}

TEST_CASE("ball sections") {
  CHECK(section_volume(BodyOfRevolution::ball(3), {0.0, 0.0}) == doctest::Approx(M_PI).epsilon(1e-14));
  CHECK(section_volume(BodyOfRevolution::ball(3), {1.0, 0.0}) == doctest::Approx(M_PI).epsilon(1e-14));
  CHECK(section_volume(BodyOfRevolution::ball(4), {0.5, 0.0}) == doctest::Approx(4 * M_PI / 3).epsilon(1e-14));
  const auto b3 = BodyOfRevolution::ball(3);
  CHECK(section_volume_by_direction(b3, M_PI / 2, 1, 0.0) == doctest::Approx(M_PI).epsilon(1e-14));
  CHECK(section_volume_by_direction(b3, 0.0, 1, 0.6) == doctest::Approx(0.64 * M_PI).epsilon(1e-14));
  const auto b5 = BodyOfRevolution::ball(5);
  CHECK(section_volume_by_direction(b5, 0.3, -1, 0.5) == doctest::Approx(unit_ball_volume(4) * 0.75 * 0.75).epsilon(1e-13));
  CHECK_THROWS_AS(section_volume_by_direction(b3, 0.4, 1, 1.2), Error);
}

TEST_CASE("property: ball sections match the closed form for all directions and offsets") {
  std::mt19937 rng(11);
  std::uniform_real_distribution<double> ua(0.0, M_PI / 2), ut(-0.95, 0.95);
  for (int d = 3; d <= 6; ++d) {
    const auto b = BodyOfRevolution::ball(d);
    for (int i = 0; i < 20; ++i) {
      const double a = ua(rng), t = ut(rng);
      const int side = i % 2 ? 1 : -1;
      const double exact = unit_ball_volume(d - 1) * std::pow(1 - t * t, 0.5 * (d - 1));
      CHECK(section_volume_by_direction(b, a, side, t) == doctest::Approx(exact).epsilon(1e-12));
      const double dexact = -unit_ball_volume(d - 1) * (d - 1) * t * std::pow(1 - t * t, 0.5 * (d - 3));
      CHECK(section_volume_derivative(b, a, side, t) == doctest::Approx(dexact).epsilon(1e-10).scale(1e-12));
    }
  }
}

TEST_CASE("max section of the ball and translation covariance") {
  for (int d : {3, 4, 5}) {
    const auto b = BodyOfRevolution::ball(d);
    for (double a : {0.0, 0.4, 1.1, M_PI / 2}) {
      const MaxSection m = max_section(b, a, 1);
      CHECK(std::abs(m.t_star) < 1e-12);
      CHECK(m.vol == doctest::Approx(unit_ball_volume(d - 1)).epsilon(1e-13));
    }
  }
  const double tau = 0.137;
  BodyOfRevolution shifted{3, ProfileFunction::ball().shifted(tau), std::nullopt};
  const MaxSection m = max_section(shifted, 0.0, 1);
  CHECK(m.t_star == doctest::Approx(tau).epsilon(1e-12));
  const MaxSection m2 = max_section(shifted, 0.0, -1);
  CHECK(m2.t_star == doctest::Approx(-tau).epsilon(1e-12));
  // General direction: t_star = <u, tau e1>.
  const MaxSection m3 = max_section(shifted, 0.7, 1);
  CHECK(m3.t_star == doctest::Approx(tau * std::cos(0.7)).epsilon(1e-11));
  CHECK(section_volume_by_direction(shifted, 0.7, -1, 0.2 - tau * std::cos(0.7)) ==
        doctest::Approx(section_volume_by_direction(BodyOfRevolution::ball(3), 0.7, -1, 0.2)).epsilon(1e-12));
}

TEST_CASE("Brunn unimodality: vol^{1/(d-1)} is concave along offsets") {
  // A non-ball convex profile: ellipse-like via radial pair R = 1 + 0.1 cos^2.
  std::vector<double> a = linspace(0.0, M_PI / 2, 513), R, dR, r, dr;
  for (double t : a) {
    R.push_back(1.0 + 0.05 * std::cos(t) * std::cos(t));
    dR.push_back(-0.1 * std::cos(t) * std::sin(t));
    r.push_back(1.0 - 0.03 * std::cos(t) * std::cos(t));
    dr.push_back(0.06 * std::cos(t) * std::sin(t));
  }
  BodyOfRevolution body{4, profile_from_radial(RadialPair(a, R, dR, r, dr), 4), std::nullopt};
  for (double al : {0.2, 0.9}) {
    const auto [lo, hi] = support_interval(body, al, 1);
    std::vector<double> g;
    for (int i = 1; i < 40; ++i) g.push_back(std::cbrt(section_volume_by_direction(body, al, 1, lo + (hi - lo) * i / 40)));
    for (size_t i = 1; i + 1 < g.size(); ++i) CHECK(g[i + 1] - 2 * g[i] + g[i - 1] <= 1e-12);
  }
}

TEST_CASE("profile and radial conversions") {
  const auto ball = BodyOfRevolution::ball(3);
  const RadialPair rp = radial_from_profile(ball, 257);
  for (size_t i = 0; i < rp.alpha().size(); ++i) {
    CHECK(rp.R()[i] == doctest::Approx(1.0).epsilon(1e-14));
    CHECK(rp.r()[i] == doctest::Approx(1.0).epsilon(1e-14));
    CHECK(std::abs(rp.dR()[i]) < 1e-7);
  }
  const ProfileFunction f = profile_from_radial(RadialPair::constant(1.0), 3);
  CHECK(f.lambda() == doctest::Approx(1.0));
  CHECK(f.mu() == doctest::Approx(1.0));
  for (double xi : {-0.99, -0.5, 0.0, 0.3, 0.999}) {
    const ProfileValue v = f.eval(xi);
    CHECK(v.f == doctest::Approx(std::sqrt(1 - xi * xi)).epsilon(1e-12));
    CHECK(v.f1 == doctest::Approx(-xi / std::sqrt(1 - xi * xi)).epsilon(1e-9));
  }
  // roundtrip on a non-ball pair
  std::vector<double> a = linspace(0.0, M_PI / 2, 1025), R, dR, r, dr;
  for (double t : a) {
    const double c2 = std::cos(t) * std::cos(t), cs = std::cos(t) * std::sin(t);
    R.push_back(1.0 + 0.02 * c2 * c2);
    dR.push_back(-0.08 * c2 * cs);
    r.push_back(1.0 - 0.01 * c2 * c2);
    dr.push_back(0.04 * c2 * cs);
  }
  RadialPair pair(a, R, dR, r, dr);
  BodyOfRevolution body{3, profile_from_radial(pair, 3), std::nullopt};
  const RadialPair back = radial_from_profile(body, 301);
  double err = 0.0;
  for (size_t i = 0; i < back.alpha().size(); ++i) {
    const RadialSample s = pair.eval(back.alpha()[i]);
    err = std::max({err, std::abs(s.R - back.R()[i]), std::abs(s.r - back.r()[i])});
  }
  CHECK(err < 1e-8);
}

TEST_CASE("profile_from_chords on the unperturbed chord functions") {
  std::vector<double> s{1.0, 2.0, 10.0}, x, y;
  for (double v : s) x.push_back(1 / std::sqrt(1 + v * v)), y.push_back(1 / std::sqrt(1 + v * v));
  const auto pts = profile_from_chords(s, x, y, Perturbation::zero(0.05));
  CHECK(pts.size() == 6);
  CHECK(pts.back().xi == doctest::Approx(1 / std::sqrt(2.0)));
  CHECK(pts.back().f == doctest::Approx(1 / std::sqrt(2.0)));
  for (const auto& p : pts) CHECK(p.xi * p.xi + p.f * p.f == doctest::Approx(1.0));
}

TEST_CASE("convexity check") {
  const auto rep = convexity_check(ProfileFunction::ball(), 0.5);
  CHECK(rep.pass);
  CHECK(rep.worst_f2 == doctest::Approx(-1.0).epsilon(1e-6));
  std::vector<double> xi = linspace(-0.9, 0.9, 181), f;
  for (double x : xi) f.push_back(1 - x * x * x * x);
  const auto bad = convexity_check(ProfileFunction::from_samples(xi, f, 4 * 0.729, -4 * 0.729), 0.01);
  CHECK_FALSE(bad.pass);
  CHECK(std::abs(bad.at_xi) < 0.1);
}

TEST_CASE("asymmetry certificate") {
  std::vector<Direction> dirs;
  for (int i = 0; i < 12; ++i) dirs.push_back({M_PI / 2 * i / 11.0, i % 2 ? 1 : -1});
  const auto ball = BodyOfRevolution::ball(3);
  CHECK(asymmetry_certificate(ball, dirs).residual < 1e-12);
  BodyOfRevolution shifted{3, ProfileFunction::ball().shifted(0.2), std::nullopt};
  const auto rep = asymmetry_certificate(shifted, dirs);
  CHECK(rep.residual < 1e-12);
  CHECK(rep.center[0] == doctest::Approx(0.2).epsilon(1e-10));
  CHECK(std::abs(rep.center[1]) < 1e-10);
  CHECK_THROWS_AS(asymmetry_certificate(std::vector<Direction>{{0.1, 1}}, {0.0}, 3), Error);
}
