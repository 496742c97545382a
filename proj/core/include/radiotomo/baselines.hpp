#pragma once

#include "radiotomo/geometry.hpp"
#include "radiotomo/synthesis.hpp"

#include <Eigen/Dense>

#include <optional>
#include <span>
#include <vector>

namespace radiotomo {

/// [C]_ij = sigma_s2 * exp(-|x_i - x_j| / kappa) over the grid points.
Eigen::MatrixXd exp_kernel_covariance(const Grid& grid, double sigma_s2, double kappa);

struct RidgeConfig {
  double reg_weight = 0.015;
  /// SPD prior covariance; identity when empty.
  std::optional<Eigen::MatrixXd> covariance;
};

/// Solves (W W' + mu C^-1) f = W s. With mu = 0 the system must be nonsingular.
LossField ridge_ls(const MeasurementSet& data, const RidgeConfig& config);

struct TvConfig {
  double reg_weight = 1e-11;
  double tolerance = 1e-8;  ///< on the relative change of f between iterations
  int max_iter = 200;
  double epsilon = 1e-8;  ///< floor on |difference| in the reweighting
};

struct TvResult {
  LossField field;
  std::vector<double> objective;  ///< at the start and after each accepted iteration
  int iterations = 0;
  bool converged = false;
};

/// Anisotropic TV: sum of |F(a+1,b) - F(a,b)| and |F(a,b+1) - F(a,b)|.
double tv_seminorm(const Grid& grid, std::span<const double> field);

/// (1/2) |s - W' f|^2 + mu * TV(f).
double tv_objective(const MeasurementSet& data, const Grid& grid, std::span<const double> field,
                    double reg_weight);

/// Minimizes tv_objective by iteratively reweighted least squares, a
/// majorize-minimize scheme, starting from f = 0. The objective trace never
/// increases: an iterate that would raise it ends the run with the previous
/// one. `converged` is false if max_iter was hit first.
TvResult tv_ls(const MeasurementSet& data, const Grid& grid, const TvConfig& config);

}  // namespace radiotomo
