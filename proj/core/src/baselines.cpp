#include "radiotomo/baselines.hpp"

#include "radiotomo/error.hpp"

#include <Eigen/Sparse>

#include <algorithm>
#include <cmath>
#include <string>

namespace radiotomo {

Eigen::MatrixXd exp_kernel_covariance(const Grid& grid, double sigma_s2, double kappa) {
  if (!(sigma_s2 > 0.0) || !(kappa > 0.0))
    throw InvalidArgument("kernel variance and length scale must be positive");
  const auto n = static_cast<Eigen::Index>(grid.size());
  Eigen::MatrixXd c(n, n);
  for (Eigen::Index i = 0; i < n; ++i) {
    c(i, i) = sigma_s2;
    for (Eigen::Index j = 0; j < i; ++j) {
      const double d = distance(grid.point(static_cast<std::size_t>(i)),
                                grid.point(static_cast<std::size_t>(j)));
      c(i, j) = c(j, i) = sigma_s2 * std::exp(-d / kappa);
    }
  }
  return c;
}

namespace {

using SpMat = Eigen::SparseMatrix<double>;

SpMat sparse_weights(const MeasurementSet& data) {
  const WeightMatrix& w = data.weights();
  std::vector<Eigen::Triplet<double>> entries;
  for (std::size_t tau = 0; tau < w.cols(); ++tau) {
    const auto& col = w.column(tau);
    for (std::size_t j = 0; j < col.nnz(); ++j)
      entries.emplace_back(static_cast<int>(col.index[j]), static_cast<int>(tau), col.value[j]);
  }
  SpMat out(static_cast<Eigen::Index>(w.rows()), static_cast<Eigen::Index>(w.cols()));
  out.setFromTriplets(entries.begin(), entries.end());
  return out;
}

Eigen::VectorXd shadowing_vector(const MeasurementSet& data) {
  return Eigen::Map<const Eigen::VectorXd>(data.shadowing().data(),
                                           static_cast<Eigen::Index>(data.size()));
}

LossField to_field(const Eigen::VectorXd& v) { return LossField(v.data(), v.data() + v.size()); }

// Rows of the anisotropic difference operator, horizontal then vertical.
SpMat difference_operator(const Grid& grid) {
  std::vector<Eigen::Triplet<double>> entries;
  int row = 0;
  for (std::size_t b = 0; b < grid.ny(); ++b)
    for (std::size_t a = 0; a + 1 < grid.nx(); ++a, ++row) {
      entries.emplace_back(row, static_cast<int>(grid.index(a + 1, b)), 1.0);
      entries.emplace_back(row, static_cast<int>(grid.index(a, b)), -1.0);
    }
  for (std::size_t b = 0; b + 1 < grid.ny(); ++b)
    for (std::size_t a = 0; a < grid.nx(); ++a, ++row) {
      entries.emplace_back(row, static_cast<int>(grid.index(a, b + 1)), 1.0);
      entries.emplace_back(row, static_cast<int>(grid.index(a, b)), -1.0);
    }
  SpMat d(row, static_cast<Eigen::Index>(grid.size()));
  d.setFromTriplets(entries.begin(), entries.end());
  return d;
}

}  // namespace

LossField ridge_ls(const MeasurementSet& data, const RidgeConfig& config) {
  if (!(config.reg_weight >= 0.0) || !std::isfinite(config.reg_weight))
    throw InvalidArgument("ridge weight must be finite and nonnegative");
  const auto n = static_cast<Eigen::Index>(data.weights().rows());
  if (config.covariance && (config.covariance->rows() != n || config.covariance->cols() != n))
    throw InvalidArgument("ridge covariance must be N_g x N_g");

  const Eigen::MatrixXd w = data.weights().dense();
  const Eigen::VectorXd rhs = w * shadowing_vector(data);
  Eigen::MatrixXd a = w * w.transpose();
  if (config.reg_weight > 0.0) {
    if (config.covariance) {
      Eigen::LLT<Eigen::MatrixXd> llt(*config.covariance);
      if (llt.info() != Eigen::Success)
        throw InvalidArgument("ridge covariance is not symmetric positive definite");
      a += config.reg_weight * llt.solve(Eigen::MatrixXd::Identity(n, n));
    } else {
      a.diagonal().array() += config.reg_weight;
    }
    Eigen::LDLT<Eigen::MatrixXd> ldlt(a);
    if (ldlt.info() != Eigen::Success) throw NumericalError("ridge system factorization failed");
    return to_field(ldlt.solve(rhs));
  }
  Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(a);
  if (qr.rank() < n)
    throw NumericalError("singular ridge system: W has rank " + std::to_string(qr.rank()) +
                         " < " + std::to_string(n) + " and the regularization weight is 0");
  return to_field(qr.solve(rhs));
}

double tv_seminorm(const Grid& grid, std::span<const double> f) {
  if (f.size() != grid.size()) throw InvalidArgument("field does not match the grid");
  double total = 0.0;
  for (std::size_t b = 0; b < grid.ny(); ++b) {
    for (std::size_t a = 0; a < grid.nx(); ++a) {
      const std::size_t i = grid.index(a, b);
      if (a + 1 < grid.nx()) total += std::abs(f[i + 1] - f[i]);
      if (b + 1 < grid.ny()) total += std::abs(f[i + grid.nx()] - f[i]);
    }
  }
  return total;
}

double tv_objective(const MeasurementSet& data, const Grid& grid, std::span<const double> f,
                    double reg_weight) {
  if (f.size() != grid.size()) throw InvalidArgument("field does not match the grid");
  double misfit = 0.0;
  for (std::size_t tau = 0; tau < data.size(); ++tau) {
    const double r = data.shadowing()[tau] - data.weights().column(tau).dot(f);
    misfit += r * r;
  }
  return 0.5 * misfit + reg_weight * tv_seminorm(grid, f);
}

TvResult tv_ls(const MeasurementSet& data, const Grid& grid, const TvConfig& config) {
  if (!(config.reg_weight >= 0.0) || !std::isfinite(config.reg_weight))
    throw InvalidArgument("TV weight must be finite and nonnegative");
  if (!(config.tolerance > 0.0)) throw InvalidArgument("TV tolerance must be positive");
  if (!(config.epsilon > 0.0)) throw InvalidArgument("TV epsilon must be positive");
  if (config.max_iter < 1) throw InvalidArgument("TV max_iter must be at least 1");
  if (data.weights().rows() != grid.size())
    throw InvalidArgument("measurement weights do not match the grid");

  const SpMat w = sparse_weights(data);
  const SpMat d = difference_operator(grid);
  const SpMat wwt = w * SpMat(w.transpose());
  const Eigen::VectorXd rhs = w * shadowing_vector(data);
  const auto n = static_cast<Eigen::Index>(grid.size());

  TvResult out;
  Eigen::VectorXd f = Eigen::VectorXd::Zero(n);
  out.field = to_field(f);
  out.objective.push_back(tv_objective(data, grid, out.field, config.reg_weight));

  Eigen::SimplicialLDLT<SpMat> solver;
  for (int it = 0; it < config.max_iter; ++it) {
    SpMat system = wwt;
    if (config.reg_weight > 0.0) {
      const Eigen::VectorXd df = d * f;
      Eigen::VectorXd weight(df.size());
      for (Eigen::Index e = 0; e < df.size(); ++e)
        weight[e] = config.reg_weight / std::max(std::abs(df[e]), config.epsilon);
      system += SpMat(d.transpose() * weight.asDiagonal() * d);
    }
    solver.compute(system);
    if (solver.info() != Eigen::Success)
      throw NumericalError("TV reweighted system is singular at iteration " + std::to_string(it + 1));
    const Eigen::VectorXd next = solver.solve(rhs);
    if (!next.allFinite())
      throw NumericalError("TV iterate became non-finite at iteration " + std::to_string(it + 1));

    const LossField candidate = to_field(next);
    const double objective = tv_objective(data, grid, candidate, config.reg_weight);
    if (objective > out.objective.back()) {
      out.converged = true;
      break;
    }
    const double change = (next - f).norm() / std::max(1.0, next.norm());
    f = next;
    out.field = candidate;
    out.objective.push_back(objective);
    out.iterations = it + 1;
    if (change < config.tolerance) {
      out.converged = true;
      break;
    }
  }
  return out;
}

}  // namespace radiotomo
