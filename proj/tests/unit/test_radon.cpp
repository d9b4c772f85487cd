#include <cmath>
#include <random>

#include "doctest.h"
#include "klee/geometry.hpp"
#include "klee/radon.hpp"

using namespace klee;

namespace {

PanelGrid uniform_grid(int panels, int n = 16) { return PanelGrid(linspace(0.0, M_PI / 2, panels + 1), n); }

double max_abs_diff(const std::vector<double>& a, const std::vector<double>& b) {
  double e = 0.0;
  for (size_t i = 0; i < a.size(); ++i) e = std::max(e, std::abs(a[i] - b[i]));
  return e;
}

}  // namespace

TEST_CASE("constant function integrates to the subsphere measure") {
  const PanelGrid g = uniform_grid(24);
  for (int d : {3, 4, 5, 7}) {
    const ZonalRadon R(d, g);
    const auto out = R.forward(ZonalFunction::sample(g, [](double) { return 1.0; }));
    for (double v : out.values) CHECK(std::abs(v / sphere_measure(d - 2) - 1) < 1e-10);
  }
}

TEST_CASE("matrix transform agrees with direct quadrature in phi") {
  const PanelGrid g = uniform_grid(24);
  auto fn = [](double a) { return std::exp(0.3 * std::cos(a)) + 0.2 * std::pow(std::sin(a), 4); };
  for (int d : {3, 5}) {
    const ZonalRadon R(d, g);
    const auto out = R.forward(ZonalFunction::sample(g, fn));
    for (int i = 0; i < g.size(); i += 7) CHECK(std::abs(out.values[i] - R.apply(fn, g.node(i))) < 1e-10);
  }
}

TEST_CASE("d = 3 transform of cos^2 in closed form") {
  // For g = cos^2 alpha: Rg(beta) = 2 |S^0| int_0^{pi/2} cos^2 phi cos^2 beta dphi = pi cos^2 beta.
  const PanelGrid g = uniform_grid(16);
  const ZonalRadon R(3, g);
  const auto out = R.forward(ZonalFunction::sample(g, [](double a) { return std::cos(a) * std::cos(a); }));
  for (int i = 0; i < g.size(); ++i) CHECK(out.values[i] == doctest::Approx(M_PI * std::pow(std::cos(g.node(i)), 2)).epsilon(1e-11));
}

TEST_CASE("inverse reproduces the data") {
  const PanelGrid g = uniform_grid(32);
  const ZonalRadon R(3, g);
  const auto gb = ZonalFunction::sample(g, [](double b) { return 2 * M_PI * (1 + 0.01 * std::cos(2 * b)); });
  CHECK(max_abs_diff(R.forward(R.inverse(gb)).values, gb.values) <= 1e-7);
  std::mt19937 rng(11);
  std::uniform_real_distribution<double> u(-0.05, 0.05);
  for (int d : {3, 4, 5}) {
    const ZonalRadon& Rd = *zonal_radon_operator(d, g);
    for (int t = 0; t < 20; ++t) {
      const double c1 = u(rng), c2 = u(rng), c3 = u(rng);
      const auto data = ZonalFunction::sample(g, [&](double b) {
        return sphere_measure(d - 2) * (1 + c1 * std::cos(2 * b) + c2 * std::cos(4 * b) + c3 * std::pow(std::sin(b), 3));
      });
      CHECK(max_abs_diff(Rd.forward(Rd.inverse(data)).values, data.values) <= 1e-7);
    }
  }
}

TEST_CASE("inverse recovers a smooth function") {
  const PanelGrid g = uniform_grid(32);
  auto fn = [](double a) { return 1 + 0.3 * std::cos(a) * std::cos(a) + 0.1 * std::pow(std::cos(a), 6); };
  const ZonalRadon R(3, g);
  const auto rec = R.inverse(R.forward(ZonalFunction::sample(g, fn)));
  for (int i = 0; i < g.size(); ++i) CHECK(std::abs(rec.values[i] - fn(g.node(i))) < 1e-6);
}

TEST_CASE("inverse is linear") {
  const PanelGrid g = uniform_grid(32);
  const ZonalRadon R(5, g);
  const auto a = ZonalFunction::sample(g, [](double b) { return 1 + 0.02 * std::cos(2 * b); });
  const auto b = ZonalFunction::sample(g, [](double x) { return 0.5 - 0.01 * std::sin(x) * std::sin(x); });
  std::vector<double> sum(a.values.size());
  for (size_t i = 0; i < sum.size(); ++i) sum[i] = a.values[i] + b.values[i];
  const auto ia = R.inverse(a.values), ib = R.inverse(b.values), is = R.inverse(sum);
  for (size_t i = 0; i < sum.size(); ++i) CHECK(std::abs(is[i] - ia[i] - ib[i]) < 1e-10);
}

TEST_CASE("operator cache returns the same instance") {
  const PanelGrid g = uniform_grid(8);
  CHECK(zonal_radon_operator(3, g) == zonal_radon_operator(3, g));
  CHECK(zonal_radon_operator(3, g) != zonal_radon_operator(4, g));
}

TEST_CASE("central sections of ellipsoids of revolution") {
  // vol(K ∩ v^perp) = (1/(d-1)) R[rho^{d-1}](v) for origin-symmetric K.
  const PanelGrid g = uniform_grid(24);
  std::mt19937 rng(3);
  std::uniform_real_distribution<double> u(0.8, 1.25);
  for (int t = 0; t < 20; ++t) {
    const int d = 3 + t % 3;
    const double a = u(rng), b = u(rng);
    auto rho = [&](double al) { return 1.0 / std::sqrt(std::pow(std::cos(al) / a, 2) + std::pow(std::sin(al) / b, 2)); };
    auto drho = [&](double al) {
      const double c = std::cos(al), s = std::sin(al);
      return -std::pow(rho(al), 3) * c * s * (1 / (b * b) - 1 / (a * a));
    };
    std::vector<double> al = linspace(0.0, M_PI / 2, 1025), R(al.size()), dR(al.size());
    for (size_t i = 0; i < al.size(); ++i) {
      R[i] = rho(al[i]);
      dR[i] = drho(al[i]);
    }
    BodyOfRevolution body{d, profile_from_radial(RadialPair(al, R, dR, R, dR), d), std::nullopt};
    const ZonalRadon& W = *zonal_radon_operator(d, g);
    const auto sec = W.forward(ZonalFunction::sample(g, [&](double x) { return std::pow(rho(x), d - 1); }));
    for (double beta : {0.1, 0.6, 1.1, 1.5}) {
      const double radon = g.interpolate(sec.values, beta) / (d - 1);
      const double direct = section_volume_by_direction(body, M_PI / 2 - beta, +1, 0.0);
      CHECK(std::abs(radon / direct - 1) <= 1e-6);
    }
  }
}
