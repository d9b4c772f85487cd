#include "klee/quadrature.hpp"

#include <Eigen/Eigenvalues>
#include <cmath>
#include <map>
#include <memory>
#include <mutex>
#include <tuple>

#include "klee/error.hpp"

namespace klee {
namespace {

Rule make_legendre(int n) {
  Rule r;
  r.x.resize(n);
  r.w.resize(n);
  for (int i = 0; i < (n + 1) / 2; ++i) {
    double x = std::cos(M_PI * (i + 0.75) / (n + 0.5));
    double dp = 0.0;
    for (int it = 0; it < 100; ++it) {
      double p0 = 1.0, p1 = x;
      for (int k = 2; k <= n; ++k) {
        const double p2 = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / k;
        p0 = p1;
        p1 = p2;
      }
      if (n == 1) p0 = 1.0, p1 = x;
      dp = n * (x * p1 - p0) / (x * x - 1.0);
      const double dx = p1 / dp;
      x -= dx;
      if (std::abs(dx) < 1e-16) break;
    }
    double p0 = 1.0, p1 = x;
    for (int k = 2; k <= n; ++k) {
      const double p2 = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / k;
      p0 = p1;
      p1 = p2;
    }
    dp = n * (x * p1 - p0) / (x * x - 1.0);
    r.x[i] = -x;
    r.x[n - 1 - i] = x;
    r.w[i] = r.w[n - 1 - i] = 2.0 / ((1.0 - x * x) * dp * dp);
  }
  return r;
}

// Golub–Welsch on the monic Jacobi recurrence.
Rule make_jacobi(int n, double a, double b) {
  if (a <= -1.0 || b <= -1.0) throw Error(ErrorKind::InvalidArgument, "Jacobi exponents must exceed -1");
  Eigen::MatrixXd J = Eigen::MatrixXd::Zero(n, n);
  const double ab = a + b;
  for (int k = 0; k < n; ++k) {
    const double t = 2.0 * k + ab;
    J(k, k) = (k == 0) ? (b - a) / (ab + 2.0) : (b * b - a * a) / (t * (t + 2.0));
    if (k + 1 < n) {
      const double m = k + 1.0, u = 2.0 * m + ab;
      const double num = 4.0 * m * (m + a) * (m + b) * (m + ab);
      const double den = u * u * (u + 1.0) * (u - 1.0);
      J(k, k + 1) = J(k + 1, k) = std::sqrt(num / den);
    }
  }
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(J);
  const double mu0 = std::exp((ab + 1.0) * std::log(2.0) + std::lgamma(a + 1.0) + std::lgamma(b + 1.0) -
                              std::lgamma(ab + 2.0));
  Rule r;
  r.x.resize(n);
  r.w.resize(n);
  for (int i = 0; i < n; ++i) {
    r.x[i] = es.eigenvalues()(i);
    const double v = es.eigenvectors()(0, i);
    r.w[i] = mu0 * v * v;
  }
  return r;
}

Rule make_chebyshev(int n) {
  Rule r;
  r.x.resize(n);
  r.w.assign(n, M_PI / n);
  for (int k = 0; k < n; ++k) r.x[k] = -std::cos(M_PI * (2.0 * k + 1.0) / (2.0 * n));
  return r;
}

std::mutex g_mutex;

template <class Key, class Make>
const Rule& cached(std::map<Key, std::unique_ptr<Rule>>& cache, const Key& key, Make make) {
  std::lock_guard<std::mutex> lock(g_mutex);
  auto it = cache.find(key);
  if (it == cache.end()) it = cache.emplace(key, std::make_unique<Rule>(make())).first;
  return *it->second;
}

}  // namespace

const Rule& gauss_legendre(int n) {
  if (n < 1) throw Error(ErrorKind::InvalidArgument, "rule size must be positive");
  static std::map<int, std::unique_ptr<Rule>> cache;
  return cached(cache, n, [n] { return make_legendre(n); });
}

const Rule& gauss_jacobi(int n, double a, double b) {
  if (n < 1) throw Error(ErrorKind::InvalidArgument, "rule size must be positive");
  static std::map<std::tuple<int, double, double>, std::unique_ptr<Rule>> cache;
  return cached(cache, std::make_tuple(n, a, b), [=] { return make_jacobi(n, a, b); });
}

const Rule& gauss_chebyshev(int n) {
  if (n < 1) throw Error(ErrorKind::InvalidArgument, "rule size must be positive");
  static std::map<int, std::unique_ptr<Rule>> cache;
  return cached(cache, n, [n] { return make_chebyshev(n); });
}

}  // namespace klee
