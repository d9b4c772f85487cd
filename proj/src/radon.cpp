#include "klee/radon.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <mutex>
#include <tuple>

#include "klee/error.hpp"
#include "klee/geometry.hpp"
#include "klee/quadrature.hpp"

namespace klee {

ZonalFunction ZonalFunction::sample(const PanelGrid& grid, const std::function<double(double)>& g) {
  ZonalFunction z{grid, std::vector<double>(grid.size())};
  for (int i = 0; i < grid.size(); ++i) z.values[i] = g(grid.node(i));
  return z;
}

namespace {

double alpha_of(double phi, double cb) { return std::acos(std::clamp(std::cos(phi) * cb, -1.0, 1.0)); }
double phi_of(double alpha, double cb) { return std::acos(std::clamp(std::cos(alpha) / cb, -1.0, 1.0)); }

}  // namespace

ZonalRadon::ZonalRadon(int dim, PanelGrid grid, double regularization)
    : dim_(dim), grid_(std::move(grid)), lambda_(regularization) {
  if (dim < 3) throw Error(ErrorKind::InvalidArgument, "zonal Radon transform needs d >= 3");
  const int N = grid_.size(), P = grid_.panels(), n = grid_.nodes_per_panel();
  const double c = 2.0 * sphere_measure(dim - 3);
  W_ = Eigen::MatrixXd::Zero(N, N);
  const Rule& gl = gauss_legendre(32);
  std::vector<double> w(n);
  for (int i = 0; i < N; ++i) {
    const double beta = grid_.node(i), cb = std::cos(beta);
    if (cb < 1e-14) {
      W_(i, N - 1) = sphere_measure(dim - 2);
      continue;
    }
    for (int p = grid_.panel_of_node(i); p < P; ++p) {
      const double lo = std::max(grid_.panel_lo(p), beta), hi = grid_.panel_hi(p);
      if (hi <= lo) continue;
      const double f0 = phi_of(lo, cb), f1 = phi_of(hi, cb);
      const int pieces = std::max(1, static_cast<int>(std::ceil((f1 - f0) / 0.1)));
      for (int k = 0; k < pieces; ++k) {
        const double a = f0 + (f1 - f0) * k / pieces, b = f0 + (f1 - f0) * (k + 1) / pieces;
        for (size_t q = 0; q < gl.x.size(); ++q) {
          const double phi = 0.5 * (a + b) + 0.5 * (b - a) * gl.x[q];
          const double alpha = std::clamp(alpha_of(phi, cb), grid_.panel_lo(p), grid_.panel_hi(p));
          const double weight = c * 0.5 * (b - a) * gl.w[q] * std::pow(std::sin(phi), dim - 3);
          grid_.panel_interp_weights(p, alpha, w.data());
          const int s = grid_.panel_start(p);
          for (int t = 0; t < n; ++t) W_(i, s + t) += weight * w[t];
        }
      }
    }
  }
}

const Eigen::HouseholderQR<Eigen::MatrixXd>& ZonalRadon::solver() const {
  std::call_once(*solver_once_, [this] {
    const int N = grid_.size();
    // Global Tikhonov least squares with a second-difference penalty; a panel-by-panel
    // march from pi/2 amplifies errors geometrically for d >= 5.
    const int rows = N + std::max(N - 2, 0);
    Eigen::MatrixXd S = Eigen::MatrixXd::Zero(rows, N);
    S.topRows(N) = W_;
    // Divided second differences, scaled to the mean spacing so the weight is
    // dimensionless; a plain index stencil penalizes the uneven Lobatto spacing.
    const double hbar = (grid_.node(N - 1) - grid_.node(0)) / (N - 1);
    const double mu = std::sqrt(lambda_ * W_.squaredNorm() / N);
    for (int r = 0; r + 2 < N; ++r) {
      const double h1 = grid_.node(r + 1) - grid_.node(r), h2 = grid_.node(r + 2) - grid_.node(r + 1);
      const double k = mu * hbar * hbar * 2.0 / (h1 + h2);
      S(N + r, r) = k / h1;
      S(N + r, r + 1) = -k * (1.0 / h1 + 1.0 / h2);
      S(N + r, r + 2) = k / h2;
    }
    solver_ = std::make_shared<Eigen::HouseholderQR<Eigen::MatrixXd>>(S);
  });
  return *solver_;
}

std::vector<double> ZonalRadon::forward(const std::vector<double>& g) const {
  const Eigen::VectorXd out = W_ * Eigen::Map<const Eigen::VectorXd>(g.data(), g.size());
  return std::vector<double>(out.data(), out.data() + out.size());
}

ZonalFunction ZonalRadon::forward(const ZonalFunction& g) const { return {grid_, forward(g.values)}; }

double ZonalRadon::apply(const std::function<double(double)>& g, double beta, int nodes) const {
  const double cb = std::cos(beta);
  const Rule& gl = gauss_legendre(nodes);
  double acc = 0.0;
  const int pieces = 8;
  for (int k = 0; k < pieces; ++k) {
    const double a = M_PI / 2 * k / pieces, b = M_PI / 2 * (k + 1) / pieces;
    for (size_t q = 0; q < gl.x.size(); ++q) {
      const double phi = 0.5 * (a + b) + 0.5 * (b - a) * gl.x[q];
      acc += 0.5 * (b - a) * gl.w[q] * g(alpha_of(phi, cb)) * std::pow(std::sin(phi), dim_ - 3);
    }
  }
  return 2.0 * sphere_measure(dim_ - 3) * acc;
}

std::vector<double> ZonalRadon::inverse(const std::vector<double>& gbar, double tol) const {
  const int N = grid_.size();
  if (static_cast<int>(gbar.size()) != N) throw Error(ErrorKind::InvalidArgument, "Radon data does not match the grid");
  const Eigen::Map<const Eigen::VectorXd> rhs(gbar.data(), N);
  Eigen::VectorXd b = Eigen::VectorXd::Zero(solver().rows());
  b.head(N) = rhs;
  const Eigen::VectorXd g = solver().solve(b);
  const double ref = std::max(rhs.cwiseAbs().maxCoeff(), 1e-300);
  const double res = (W_ * g - rhs).cwiseAbs().maxCoeff();
  if (!(res <= tol * ref)) throw Error(ErrorKind::IllConditioned, "regularized Radon solve did not reproduce the data");
  return std::vector<double>(g.data(), g.data() + N);
}

ZonalFunction ZonalRadon::inverse(const ZonalFunction& gbar, double tol) const {
  return {grid_, inverse(gbar.values, tol)};
}

std::shared_ptr<const ZonalRadon> zonal_radon_operator(int dim, const PanelGrid& grid) {
  using Key = std::tuple<int, std::vector<double>, int>;
  static std::mutex mu;
  static std::map<Key, std::shared_ptr<const ZonalRadon>> cache;
  Key key{dim, grid.breaks(), grid.nodes_per_panel()};
  {
    std::lock_guard<std::mutex> lock(mu);
    auto it = cache.find(key);
    if (it != cache.end()) return it->second;
  }
  auto op = std::make_shared<const ZonalRadon>(dim, grid);
  std::lock_guard<std::mutex> lock(mu);
  return cache.emplace(key, op).first->second;
}

ZonalFunction zonal_radon(const ZonalFunction& g, int dim) { return zonal_radon_operator(dim, g.grid)->forward(g); }

ZonalFunction zonal_radon_inverse(const ZonalFunction& gbar, int dim) {
  return zonal_radon_operator(dim, gbar.grid)->inverse(gbar);
}

}  // namespace klee
