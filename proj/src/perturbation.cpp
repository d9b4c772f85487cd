#include "klee/perturbation.hpp"

#include <algorithm>
#include <cmath>

namespace klee {

BumpBasis::BumpBasis(double delta, int count, double fill) : delta_(delta), fill_(fill) {
  if (!(delta > 0.0 && delta <= 0.125)) throw Error(ErrorKind::InvalidArgument, "delta must lie in (0, 1/8]");
  if (count < 1) throw Error(ErrorKind::InvalidArgument, "bump count must be positive");
  if (!(fill > 0.0 && fill < 1.0)) throw Error(ErrorKind::InvalidArgument, "fill must lie in (0, 1)");
  const double lo = 1.0 - 2.0 * delta, w = delta / count;
  for (int j = 0; j < count; ++j) {
    const double c = lo + (j + 0.5) * w;
    supports_.emplace_back(c - 0.5 * fill * w, c + 0.5 * fill * w);
  }
}

int BumpBasis::which(double s) const {
  for (int j = 0; j < count(); ++j)
    if (s > supports_[j].first && s < supports_[j].second) return j;
  return -1;
}

Perturbation::Perturbation(BumpBasis basis, std::vector<double> coeffs, double scale, int max_order)
    : basis_(std::move(basis)), coeffs_(std::move(coeffs)), scale_(scale), max_order_(max_order) {
  if (static_cast<int>(coeffs_.size()) != basis_.count())
    throw Error(ErrorKind::InvalidArgument, "coefficient count must match the basis size");
  if (max_order_ + 1 > Series<double>::kMaxOrder) throw Error(ErrorKind::OrderTooHigh, "max order too large");
}

std::vector<double> graded_breaks(const BumpBasis& basis, double a, double b, double width, double span,
                                  double step) {
  const double delta = basis.delta();
  std::vector<double> cuts{a, b};
  for (double c : {1.0 - 2.0 * delta, 1.0 - delta})
    if (c > a && c < b) cuts.push_back(c);
  for (const auto& [l, r] : basis.supports())
    for (double c : {l, r})
      if (c > a && c < b) cuts.push_back(c);
  std::sort(cuts.begin(), cuts.end());
  cuts.erase(std::unique(cuts.begin(), cuts.end(), [](double x, double y) { return y - x <= 1e-12; }), cuts.end());
  std::vector<double> breaks{cuts.front()};
  const int steps = std::max(1, static_cast<int>(std::lround(2.0 * span / step)));
  for (size_t k = 1; k < cuts.size(); ++k) {
    const double lo = cuts[k - 1], hi = cuts[k];
    const int j = basis.which(0.5 * (lo + hi));
    if (j >= 0 && std::abs(lo - basis.supports()[j].first) < 1e-12 && std::abs(hi - basis.supports()[j].second) < 1e-12) {
      const double c = 0.5 * (lo + hi), r = 0.5 * (hi - lo);
      for (int i = 0; i <= steps; ++i) breaks.push_back(c + r * std::tanh(-span + 2.0 * span * i / steps));
      breaks.push_back(hi);
    } else {
      const int n = std::max(1, static_cast<int>(std::ceil((hi - lo) / width - 1e-9)));
      for (int i = 1; i <= n; ++i) breaks.push_back(i == n ? hi : lo + (hi - lo) * i / n);
    }
  }
  return breaks;
}

Perturbation Perturbation::zero(double delta) { return Perturbation(BumpBasis(delta, 1), {0.0}, 0.0); }

bool Perturbation::is_zero() const {
  return scale_ == 0.0 || std::all_of(coeffs_.begin(), coeffs_.end(), [](double c) { return c == 0.0; });
}

Perturbation Perturbation::negated() const {
  std::vector<double> c(coeffs_);
  for (double& v : c) v = -v;
  return Perturbation(basis_, c, scale_, max_order_);
}

Perturbation Perturbation::scaled(double factor) const {
  return Perturbation(basis_, coeffs_, scale_ * factor, max_order_);
}

double Perturbation::eval(double s, int order) const {
  if (order < 0 || order > max_order_) throw Error(ErrorKind::OrderTooHigh, "derivative order exceeds configured maximum");
  const int j = basis_.which(s);
  if (j < 0 || coeffs_[j] == 0.0 || scale_ == 0.0) return 0.0;
  return scale_ * coeffs_[j] * basis_.taylor(j, s, order).derivative(order);
}

double Perturbation::ck_norm(int k) const {
  if (k > max_order_) throw Error(ErrorKind::OrderTooHigh, "norm order exceeds configured maximum");
  double best = 0.0;
  if (is_zero()) return 0.0;
  for (int j = 0; j < basis_.count(); ++j) {
    if (coeffs_[j] == 0.0) continue;
    const auto [lo, hi] = basis_.supports()[j];
    const int n = 2001;
    for (int i = 1; i < n - 1; ++i) {
      const double s = lo + (hi - lo) * i / (n - 1);
      const Series<double> t = basis_.taylor(j, s, k);
      for (int o = 0; o <= k; ++o) best = std::max(best, std::abs(scale_ * coeffs_[j] * t.derivative(o)));
    }
  }
  return best;
}

}  // namespace klee
