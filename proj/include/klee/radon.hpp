#pragma once

#include <functional>
#include <memory>
#include <mutex>
#include <vector>

#include <Eigen/Dense>

#include "klee/panels.hpp"

namespace klee {

/// Even rotation-invariant function on S^{d-1}, stored as a function of the
/// polar angle alpha in [0, pi/2] (cos alpha = |u_1|) on a panel grid.
struct ZonalFunction {
  PanelGrid grid;
  std::vector<double> values;

  double operator()(double alpha) const { return grid.interpolate(values, alpha); }
  std::vector<double> derivative() const { return grid.derivative(values); }

  static ZonalFunction sample(const PanelGrid& grid, const std::function<double(double)>& g);
};

/// Spherical Radon transform restricted to zonal functions:
///   (Rg)(beta) = 2|S^{d-3}| int_0^{pi/2} g(arccos(cos phi cos beta)) sin^{d-3} phi dphi,
/// the integral of g over the great subsphere orthogonal to v with
/// v_1 = sin beta. (Rg)(beta) only sees g on [beta, pi/2].
class ZonalRadon {
 public:
  ZonalRadon(int dim, PanelGrid grid, double regularization = 1e-10);

  int dim() const { return dim_; }
  const PanelGrid& grid() const { return grid_; }
  /// Node-to-node matrix of the transform acting on panel interpolants.
  const Eigen::MatrixXd& matrix() const { return W_; }

  ZonalFunction forward(const ZonalFunction& g) const;
  std::vector<double> forward(const std::vector<double>& g) const;
  /// Transform at beta of an arbitrary function of alpha, by adaptive
  /// quadrature in phi (independent of the grid).
  double apply(const std::function<double(double)>& g, double beta, int nodes = 64) const;

  /// g with Rg = gbar, by least squares with a small second-difference
  /// penalty; throws IllConditioned if the residual exceeds tol relative
  /// to |gbar|.
  ZonalFunction inverse(const ZonalFunction& gbar, double tol = 1e-8) const;
  std::vector<double> inverse(const std::vector<double>& gbar, double tol = 1e-8) const;

 private:
  int dim_;
  PanelGrid grid_;
  double lambda_;
  Eigen::MatrixXd W_;
  // Stacked [W; penalty] factorization, built on first use.
  const Eigen::HouseholderQR<Eigen::MatrixXd>& solver() const;
  mutable std::shared_ptr<Eigen::HouseholderQR<Eigen::MatrixXd>> solver_;
  std::shared_ptr<std::once_flag> solver_once_ = std::make_shared<std::once_flag>();
};

/// Shared transform for (dim, grid); built once per distinct key.
std::shared_ptr<const ZonalRadon> zonal_radon_operator(int dim, const PanelGrid& grid);

ZonalFunction zonal_radon(const ZonalFunction& g, int dim);
ZonalFunction zonal_radon_inverse(const ZonalFunction& gbar, int dim);

}  // namespace klee
