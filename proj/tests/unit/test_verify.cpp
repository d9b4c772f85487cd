#include <cmath>
#include <cstdlib>
#include <fstream>
#include <string>

#include "doctest.h"
#include "klee/commands.hpp"
#include "klee/verify.hpp"

using namespace klee;

namespace {

BodyOfRevolution ellipsoid(int d, double a, double b) {
  std::vector<double> al = linspace(0.0, M_PI / 2, 2049), R, dR;
  for (double t : al) {
    const double c = std::cos(t), s = std::sin(t);
    const double q = c * c / (a * a) + s * s / (b * b);
    R.push_back(1.0 / std::sqrt(q));
    dR.push_back(-std::pow(q, -1.5) * c * s * (1.0 / (b * b) - 1.0 / (a * a)));
  }
  return {d, profile_from_radial(RadialPair(al, R, dR, R, dR), d), std::nullopt};
}

int run(const std::string& args) {
  const int status = std::system((std::string(KLEE_EXE) + " " + args + " > /dev/null 2>&1").c_str());
  return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

}  // namespace

TEST_CASE("angle grid") {
  const auto a = verify_angles(6);
  REQUIRE(a.size() == 6);
  CHECK(a.front() == 0.0);
  CHECK(a.back() == M_PI / 2);
  const double step = M_PI / 8;
  for (int i = 1; i < 5; ++i) CHECK(a[i] == doctest::Approx((i - 0.5) * step));
  CHECK_THROWS_AS(verify_angles(1), Error);
}

TEST_CASE("balls have constant maximal sections") {
  for (int d = 3; d <= 6; ++d) {
    VerifyOptions opt;
    opt.directions = 100;
    const auto r = verify_body(BodyOfRevolution::ball(d), opt);
    CHECK(r.samples.size() == 199);
    CHECK(r.spread <= 1e-10);
    CHECK(r.mean == doctest::Approx(unit_ball_volume(d - 1)).epsilon(1e-12));
    CHECK(r.asymmetry < 1e-12);
    CHECK(r.pass);
    CHECK(r.note == "symmetric reference");
    CHECK(r.min <= r.mean);
    CHECK(r.mean <= r.max);
  }
}

TEST_CASE("translated ball: same M_K, common center") {
  BodyOfRevolution b{4, ProfileFunction::ball().shifted(-0.3), std::nullopt};
  VerifyOptions opt;
  opt.directions = 40;
  const auto r = verify_body(b, opt);
  CHECK(r.spread <= 1e-10);
  CHECK(r.asymmetry < 1e-10);
  for (const auto& s : r.samples) CHECK(s.t_star == doctest::Approx(-0.3 * s.side * std::cos(s.alpha)).epsilon(1e-9));
}

TEST_CASE("ellipsoid of revolution matches the closed form") {
  // vol(E ∩ u⊥) = v_{d-1} a b^{d-1} / |A u| for E = diag(a, b, ..., b) B.
  const double a = 1.2, b = 0.9;
  for (int d : {3, 4}) {
    VerifyOptions opt;
    opt.directions = 30;
    const auto r = verify_body(ellipsoid(d, a, b), opt);
    for (const auto& s : r.samples) {
      const double c = std::cos(s.alpha), sn = std::sin(s.alpha);
      const double exact = unit_ball_volume(d - 1) * a * std::pow(b, d - 1) / std::hypot(a * c, b * sn);
      CHECK(s.value == doctest::Approx(exact).epsilon(1e-9));
      CHECK(std::abs(s.t_star) < 1e-7);
    }
    CHECK(r.spread > 0.1);
    CHECK_FALSE(r.pass);
  }
}

TEST_CASE("negative control: a hand-made bump is detected") {
  BodyOfRevolution b{4, corrupted_profile(ProfileFunction::ball(), 0.2, 0.6, 1e-3), std::nullopt};
  VerifyOptions opt;
  opt.directions = 60;
  const auto r = verify_body(b, opt);
  CHECK(r.spread > 1e-5);
  CHECK_FALSE(r.spread_ok);
  CHECK_FALSE(r.pass);
  const json j = report_to_json(r);
  CHECK(j["verdicts"]["overall"] == "FAIL");
  CHECK_FALSE(j.contains("runtime_s"));
  CHECK(report_to_json(r, true).contains("runtime_s"));
}

TEST_CASE("reports are deterministic across thread counts") {
  BodyOfRevolution b{3, corrupted_profile(ProfileFunction::ball(), -0.5, 0.1, 1e-4), std::nullopt};
  VerifyOptions one, many;
  one.directions = many.directions = 20;
  one.threads = 1;
  many.threads = 4;
  CHECK(report_to_json(verify_body(b, one)).dump() == report_to_json(verify_body(b, many)).dump());
}

TEST_CASE("command line exit codes") {
  CHECK(run("build --dim 4 --h-scale 0 -o cli_ball.json") == 0);
  CHECK(run("verify cli_ball.json --directions 50") == 0);
  CHECK(run("plotdata cli_ball.json -o cli_plot --directions 10") == 0);
  CHECK(std::ifstream("cli_plot/mk.csv").good());
  BodyRecord bad = load_body("cli_ball.json");
  bad.body.profile = corrupted_profile(bad.body.profile, 0.2, 0.6, 1e-3);
  save_body(bad, "cli_bad.json");
  CHECK(run("verify cli_bad.json --directions 50") == 3);
  std::ofstream("cli_broken.json") << "{\"format\": \"klee-body/1\"";
  CHECK(run("verify cli_broken.json") == 2);
  CHECK(run("build --dim 1 -o cli_x.json") == 2);
  CHECK(run("verify") == 2);
  std::ofstream("cli_cfg.json") << "{\"dim\": 5, \"h-scale\": 0}";
  CHECK(std::system(("KLEE_CONFIG=cli_cfg.json " + std::string(KLEE_EXE) + " build -o cli_cfg_body.json > /dev/null").c_str()) == 0);
  CHECK(load_body("cli_cfg_body.json").body.dim == 5);
}
