#pragma once

#include "radiotomo/geometry.hpp"
#include "radiotomo/synthesis.hpp"

#include <cstdint>
#include <functional>
#include <optional>
#include <span>
#include <vector>

namespace radiotomo {

/// Fixed hyper-hyperparameters. Gamma factors use shape/scale, so the prior
/// mean of a precision is shape * scale.
struct HyperPriors {
  double a_nu = 1300.0;
  double b_nu = 2.0;
  std::vector<double> m;       ///< prior means of the class means
  std::vector<double> sigma2;  ///< prior variances of the class means
  std::vector<double> a;       ///< shapes of the class-precision priors
  std::vector<double> b;       ///< scales of the class-precision priors

  std::size_t classes() const { return m.size(); }
  void validate() const;
};

/// Parameters of the mean-field posterior q(f|z) q(z) q(theta).
///
/// Per-site arrays are site-major: entry (i, k) lives at i * classes + k.
struct VariationalState {
  std::size_t sites = 0;
  std::size_t classes = 0;

  std::vector<double> field_mean;  ///< mean of q(f_i | z_i = k)
  std::vector<double> field_var;   ///< variance of q(f_i | z_i = k)
  std::vector<double> label_prob;  ///< q(z_i = k)

  double noise_shape = 1.0;  ///< shape of q(phi_nu)
  double noise_scale = 1.0;  ///< scale of q(phi_nu)

  std::vector<double> mean_mean;   ///< mean of q(mu_k)
  std::vector<double> mean_var;    ///< variance of q(mu_k)
  std::vector<double> prec_shape;  ///< shape of q(phi_k)
  std::vector<double> prec_scale;  ///< scale of q(phi_k)

  // Derived caches, refreshed by VbModel::refresh_caches().
  std::vector<double> site_mean;    ///< sum_k q(z_i = k) * field_mean(i, k)
  std::vector<double> shadow_mean;  ///< w_tau' site_mean for each measurement

  std::size_t at(std::size_t i, std::size_t k) const { return i * classes + k; }
  double noise_precision() const { return noise_shape * noise_scale; }
  double class_precision(std::size_t k) const { return prec_shape[k] * prec_scale[k]; }

  friend bool operator==(const VariationalState&, const VariationalState&) = default;
};

struct VbEstimates {
  LossField f_mmse;
  LabelField z_map;
  HyperParams theta_mmse;
};

/// How the per-site updates of q(f|z) and q(z) are carried out.
enum class UpdateScheme {
  /// Sites are visited in raster order and each site's factor is set to its
  /// exact optimum given the current values of every other factor. The
  /// label exponent therefore also carries the expected log-likelihood and
  /// the entropy of q(f_i | z_i = k). Every step is a coordinate ascent
  /// step, so the ELBO never decreases.
  kCoordinateAscent,
  /// All sites are updated simultaneously from the previous values, and the
  /// label exponent keeps only the conditional-field, log-precision and
  /// Potts terms. Cheaper to parallelize but without a monotonicity
  /// guarantee.
  kPublished,
};

/// Individual terms of the ELBO; the sum is ELBO + ln C(beta).
struct ElboTerms {
  double likelihood = 0.0;
  double field_prior = 0.0;
  double potts = 0.0;
  double noise_prior = 0.0;
  double mean_prior = 0.0;
  double precision_prior = 0.0;
  double label_entropy = 0.0;
  double field_entropy = 0.0;
  double noise_entropy = 0.0;
  double mean_entropy = 0.0;
  double precision_entropy = 0.0;

  double total() const;
};

/// Measurement data, priors and Potts parameters of one VB problem, with the
/// per-site link index the updates need. Immutable after construction.
class VbModel {
 public:
  VbModel(const Grid& grid, const MeasurementSet& data, HyperPriors priors, PottsParams potts,
          UpdateScheme scheme = UpdateScheme::kCoordinateAscent);

  const Grid& grid() const { return grid_; }
  const HyperPriors& priors() const { return priors_; }
  const PottsParams& potts() const { return potts_; }
  UpdateScheme scheme() const { return scheme_; }
  std::size_t sites() const { return grid_.size(); }
  std::size_t classes() const { return priors_.classes(); }
  std::size_t measurements() const { return shadowing_.size(); }

  /// Random initial state: field means, noise scale, class-mean variances and
  /// class-precision shape/scale ~ U(0, 1); class means at the prior means;
  /// uniform labels; noise shape a_nu + t/2; field variances from one
  /// variance update.
  VariationalState init_state(std::uint64_t seed) const;

  void refresh_caches(VariationalState& state) const;

  void update_field_variances(VariationalState& state) const;
  void update_field_means(VariationalState& state) const;
  /// Variances then means.
  void update_field_factors(VariationalState& state) const;
  void update_label_probs(VariationalState& state) const;
  void update_noise_precision(VariationalState& state) const;
  void update_class_means(VariationalState& state) const;
  void update_class_precisions(VariationalState& state) const;

  /// One full pass: field variances, field means, labels, noise scale,
  /// class means, class precisions.
  void iterate(VariationalState& state) const;

  ElboTerms elbo_terms(const VariationalState& state) const;
  double elbo(const VariationalState& state) const { return elbo_terms(state).total(); }

  /// E_q[(w_tau' f)^2] by the law of total variance.
  double expected_squared_projection(const VariationalState& state, std::size_t tau) const;

  /// Throws InvalidArgument if the state's dimensions do not fit this model.
  void check_dimensions(const VariationalState& state) const;

 private:
  double residual_correlation(const VariationalState& state, std::size_t i) const;
  void shift_site_mean(VariationalState& state, std::size_t i, double new_mean) const;

  Grid grid_;
  HyperPriors priors_;
  PottsParams potts_;
  UpdateScheme scheme_;

  std::vector<double> shadowing_;
  std::vector<SparseVector> columns_;
  // Transposed weight matrix: links through site i are
  // site_link_[site_ptr_[i] .. site_ptr_[i + 1]).
  std::vector<std::size_t> site_ptr_;
  std::vector<std::uint32_t> site_link_;
  std::vector<double> site_weight_;
  std::vector<double> site_w2_;  ///< sum_tau w_{tau,i}^2
};

/// Resumable snapshot of a VB run.
struct VbCheckpoint {
  VariationalState state;
  int iteration = 0;
  std::vector<double> elbo_trace;  ///< ELBO after init and after each iteration
  bool converged = false;
};

struct VbOptions {
  int max_iter = 3000;
  double tolerance = 1e-6;  ///< stop when the ELBO gain is at most this
  std::uint64_t seed = 0;
  /// Called after every completed iteration with the run so far.
  std::function<void(const VbCheckpoint&)> on_iteration;
};

struct VbResult {
  VbEstimates estimates;
  VbCheckpoint final;
};

/// Runs coordinate ascent until the ELBO gain drops to `tolerance` or
/// `max_iter` iterations have been done. Throws DivergenceError on a
/// non-finite ELBO.
VbResult run_vb(const VbModel& model, const VbOptions& options);
/// Continues a previous run. A converged checkpoint is returned unchanged.
VbResult run_vb(const VbModel& model, const VbOptions& options, VbCheckpoint resume);

/// MAP labels (argmax of q(z_i), lowest class on ties), field means at those
/// labels, and posterior means of theta.
VbEstimates extract_estimates(const VariationalState& state);

/// Normalizes exponents into probabilities with max subtraction.
void softmax_in_place(std::span<double> exponents);

}  // namespace radiotomo
