#include "radiotomo/vb.hpp"

#include "radiotomo/error.hpp"

#include <boost/math/special_functions/digamma.hpp>

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <random>
#include <string>

namespace radiotomo {

namespace {

constexpr double kLog2Pi = 1.8378770664093454836;  // ln(2 pi)

double digamma(double x) { return boost::math::digamma(x); }

// E[ln phi] for phi ~ Gamma(shape, scale).
double expected_log(double shape, double scale) { return digamma(shape) + std::log(scale); }

double gamma_entropy(double shape, double scale) {
  return shape + std::log(scale) + std::lgamma(shape) + (1.0 - shape) * digamma(shape);
}

// E_{Gamma(shape, scale)}[ln Gamma(prior_shape, prior_scale) density].
double gamma_cross(double prior_shape, double prior_scale, double shape, double scale) {
  return -std::lgamma(prior_shape) - prior_shape * std::log(prior_scale) +
         (prior_shape - 1.0) * expected_log(shape, scale) - shape * scale / prior_scale;
}

void require_positive(double value, const char* what) {
  if (!(value > 0.0) || !std::isfinite(value))
    throw NumericalError(std::string("corrupt state: ") + what + " = " + std::to_string(value) +
                         " is not a positive finite number");
}

// Expected squared deviation E[(f_i - mu_k)^2] under q(f_i | z_i = k) q(mu_k).
double squared_deviation(const VariationalState& s, std::size_t i, std::size_t k) {
  const std::size_t ik = s.at(i, k);
  const double mu = s.field_mean[ik];
  return s.field_var[ik] + mu * mu - 2.0 * s.mean_mean[k] * mu + s.mean_var[k] +
         s.mean_mean[k] * s.mean_mean[k];
}

}  // namespace

void HyperPriors::validate() const {
  const std::size_t K = m.size();
  if (K < 2) throw InvalidArgument("priors need at least two classes");
  if (sigma2.size() != K || a.size() != K || b.size() != K)
    throw InvalidArgument("prior vectors m, sigma2, a, b must have equal length");
  if (!(a_nu > 0.0) || !(b_nu > 0.0) || !std::isfinite(a_nu) || !std::isfinite(b_nu))
    throw InvalidArgument("noise-precision prior shape and scale must be positive");
  for (std::size_t k = 0; k < K; ++k) {
    if (!std::isfinite(m[k])) throw InvalidArgument("prior mean m_k must be finite");
    if (!(sigma2[k] > 0.0) || !(a[k] > 0.0) || !(b[k] > 0.0) || !std::isfinite(sigma2[k]) ||
        !std::isfinite(a[k]) || !std::isfinite(b[k]))
      throw InvalidArgument("class prior " + std::to_string(k) +
                            ": sigma2, a and b must be positive");
  }
}

double ElboTerms::total() const {
  return likelihood + field_prior + potts + noise_prior + mean_prior + precision_prior +
         label_entropy + field_entropy + noise_entropy + mean_entropy + precision_entropy;
}

VbModel::VbModel(const Grid& grid, const MeasurementSet& data, HyperPriors priors,
                 PottsParams potts, UpdateScheme scheme)
    : grid_(grid),
      priors_(std::move(priors)),
      potts_(potts),
      scheme_(scheme),
      shadowing_(data.shadowing()),
      columns_(data.weights().columns()) {
  priors_.validate();
  potts_.validate();
  if (static_cast<std::size_t>(potts_.classes) != priors_.classes())
    throw InvalidArgument("Potts class count does not match the priors");
  if (data.weights().rows() != grid_.size())
    throw InvalidArgument("weight matrix rows do not match the grid");

  const std::size_t n = grid_.size();
  std::vector<std::size_t> count(n, 0);
  for (const auto& col : columns_)
    for (auto idx : col.index) ++count[idx];
  site_ptr_.assign(n + 1, 0);
  for (std::size_t i = 0; i < n; ++i) site_ptr_[i + 1] = site_ptr_[i] + count[i];
  site_link_.resize(site_ptr_[n]);
  site_weight_.resize(site_ptr_[n]);
  std::vector<std::size_t> fill(site_ptr_.begin(), site_ptr_.end() - 1);
  for (std::size_t tau = 0; tau < columns_.size(); ++tau) {
    const auto& col = columns_[tau];
    for (std::size_t j = 0; j < col.nnz(); ++j) {
      const std::size_t pos = fill[col.index[j]]++;
      site_link_[pos] = static_cast<std::uint32_t>(tau);
      site_weight_[pos] = col.value[j];
    }
  }
  site_w2_.assign(n, 0.0);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t p = site_ptr_[i]; p < site_ptr_[i + 1]; ++p)
      site_w2_[i] += site_weight_[p] * site_weight_[p];
}

void VbModel::check_dimensions(const VariationalState& s) const {
  const std::size_t nk = sites() * classes();
  if (s.sites != sites() || s.classes != classes() || s.field_mean.size() != nk ||
      s.field_var.size() != nk || s.label_prob.size() != nk ||
      s.mean_mean.size() != classes() || s.mean_var.size() != classes() ||
      s.prec_shape.size() != classes() || s.prec_scale.size() != classes())
    throw InvalidArgument("variational state dimensions do not match the model");
}

VariationalState VbModel::init_state(std::uint64_t seed) const {
  const std::size_t n = sites();
  const std::size_t K = classes();
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> unif(std::numeric_limits<double>::min(), 1.0);

  VariationalState s;
  s.sites = n;
  s.classes = K;
  s.field_mean.resize(n * K);
  for (auto& v : s.field_mean) v = unif(rng);
  s.noise_scale = unif(rng);
  s.mean_var.resize(K);
  for (auto& v : s.mean_var) v = unif(rng);
  s.prec_shape.resize(K);
  for (auto& v : s.prec_shape) v = unif(rng);
  s.prec_scale.resize(K);
  for (auto& v : s.prec_scale) v = unif(rng);
  s.mean_mean = priors_.m;
  s.label_prob.assign(n * K, 1.0 / static_cast<double>(K));
  s.noise_shape = priors_.a_nu + 0.5 * static_cast<double>(measurements());
  s.field_var.assign(n * K, 1.0);
  update_field_variances(s);
  refresh_caches(s);
  return s;
}

void VbModel::refresh_caches(VariationalState& s) const {
  const std::size_t K = classes();
  s.site_mean.assign(sites(), 0.0);
  for (std::size_t i = 0; i < sites(); ++i) {
    double acc = 0.0;
    for (std::size_t k = 0; k < K; ++k) acc += s.label_prob[s.at(i, k)] * s.field_mean[s.at(i, k)];
    s.site_mean[i] = acc;
  }
  s.shadow_mean.resize(columns_.size());
  for (std::size_t tau = 0; tau < columns_.size(); ++tau)
    s.shadow_mean[tau] = columns_[tau].dot(s.site_mean);
}

void VbModel::update_field_variances(VariationalState& s) const {
  const double phi_nu = s.noise_precision();
  require_positive(phi_nu, "noise precision");
  for (std::size_t k = 0; k < classes(); ++k) require_positive(s.class_precision(k), "class precision");
  for (std::size_t i = 0; i < sites(); ++i)
    for (std::size_t k = 0; k < classes(); ++k)
      s.field_var[s.at(i, k)] = 1.0 / (phi_nu * site_w2_[i] + s.class_precision(k));
}

double VbModel::residual_correlation(const VariationalState& s, std::size_t i) const {
  double acc = 0.0;
  for (std::size_t p = site_ptr_[i]; p < site_ptr_[i + 1]; ++p) {
    const std::size_t tau = site_link_[p];
    acc += site_weight_[p] * (shadowing_[tau] - s.shadow_mean[tau]);
  }
  return acc;
}

void VbModel::shift_site_mean(VariationalState& s, std::size_t i, double new_mean) const {
  const double delta = new_mean - s.site_mean[i];
  s.site_mean[i] = new_mean;
  if (delta == 0.0) return;
  for (std::size_t p = site_ptr_[i]; p < site_ptr_[i + 1]; ++p)
    s.shadow_mean[site_link_[p]] += site_weight_[p] * delta;
}

void VbModel::update_field_means(VariationalState& s) const {
  const std::size_t K = classes();
  const double phi_nu = s.noise_precision();
  require_positive(phi_nu, "noise precision");

  if (scheme_ == UpdateScheme::kCoordinateAscent) {
    for (std::size_t i = 0; i < sites(); ++i) {
      const double g = residual_correlation(s, i);
      const double mbar = s.site_mean[i];
      double next = 0.0;
      for (std::size_t k = 0; k < K; ++k) {
        const std::size_t ik = s.at(i, k);
        const double phi_k = s.class_precision(k);
        s.field_mean[ik] =
            mbar + s.field_var[ik] * ((s.mean_mean[k] - mbar) * phi_k + phi_nu * g);
        next += s.label_prob[ik] * s.field_mean[ik];
      }
      shift_site_mean(s, i, next);
    }
    return;
  }

  std::vector<double> g(sites());
  for (std::size_t i = 0; i < sites(); ++i) g[i] = residual_correlation(s, i);
  for (std::size_t i = 0; i < sites(); ++i) {
    const double mbar = s.site_mean[i];
    for (std::size_t k = 0; k < K; ++k) {
      const std::size_t ik = s.at(i, k);
      s.field_mean[ik] =
          mbar + s.field_var[ik] * ((s.mean_mean[k] - mbar) * s.class_precision(k) + phi_nu * g[i]);
    }
  }
  refresh_caches(s);
}

void VbModel::update_field_factors(VariationalState& s) const {
  update_field_variances(s);
  update_field_means(s);
}

void softmax_in_place(std::span<double> x) {
  const double top = *std::max_element(x.begin(), x.end());
  double total = 0.0;
  for (double& v : x) {
    v = std::exp(v - top);
    total += v;
  }
  for (double& v : x) v /= total;
}

void VbModel::update_label_probs(VariationalState& s) const {
  const std::size_t K = classes();
  const double beta = potts_.beta;
  const double phi_nu = s.noise_precision();
  std::vector<double> half_log_prec(K);
  for (std::size_t k = 0; k < K; ++k) {
    require_positive(s.prec_shape[k], "class precision shape");
    require_positive(s.prec_scale[k], "class precision scale");
    half_log_prec[k] = 0.5 * expected_log(s.prec_shape[k], s.prec_scale[k]);
  }
  std::vector<double> exponent(K);
  std::size_t nb[4];

  if (scheme_ == UpdateScheme::kCoordinateAscent) {
    for (std::size_t i = 0; i < sites(); ++i) {
      const double c = site_w2_[i];
      const double h = residual_correlation(s, i) + c * s.site_mean[i];
      const std::size_t count = grid_.neighbors(i, nb);
      for (std::size_t k = 0; k < K; ++k) {
        const std::size_t ik = s.at(i, k);
        const double mu = s.field_mean[ik];
        const double var = s.field_var[ik];
        double coupling = 0.0;
        for (std::size_t j = 0; j < count; ++j) coupling += s.label_prob[s.at(nb[j], k)];
        exponent[k] = -0.5 * s.class_precision(k) * squared_deviation(s, i, k) +
                      half_log_prec[k] + 0.5 * std::log(var) + beta * coupling -
                      0.5 * phi_nu * (c * (var + mu * mu) - 2.0 * mu * h);
      }
      softmax_in_place(exponent);
      double next = 0.0;
      for (std::size_t k = 0; k < K; ++k) {
        s.label_prob[s.at(i, k)] = exponent[k];
        next += exponent[k] * s.field_mean[s.at(i, k)];
      }
      shift_site_mean(s, i, next);
    }
    return;
  }

  const std::vector<double> previous = s.label_prob;
  for (std::size_t i = 0; i < sites(); ++i) {
    const std::size_t count = grid_.neighbors(i, nb);
    for (std::size_t k = 0; k < K; ++k) {
      double coupling = 0.0;
      for (std::size_t j = 0; j < count; ++j) coupling += previous[s.at(nb[j], k)];
      exponent[k] = -0.5 * s.class_precision(k) * squared_deviation(s, i, k) +
                    half_log_prec[k] + beta * coupling;
    }
    softmax_in_place(exponent);
    for (std::size_t k = 0; k < K; ++k) s.label_prob[s.at(i, k)] = exponent[k];
  }
  refresh_caches(s);
}

double VbModel::expected_squared_projection(const VariationalState& s, std::size_t tau) const {
  const auto& col = columns_.at(tau);
  double acc = 0.0;
  for (std::size_t j = 0; j < col.nnz(); ++j) {
    const std::size_t i = col.index[j];
    double second = 0.0;
    for (std::size_t k = 0; k < classes(); ++k) {
      const std::size_t ik = s.at(i, k);
      second += s.label_prob[ik] * (s.field_var[ik] + s.field_mean[ik] * s.field_mean[ik]);
    }
    acc += col.value[j] * col.value[j] * (second - s.site_mean[i] * s.site_mean[i]);
  }
  return acc + s.shadow_mean[tau] * s.shadow_mean[tau];
}

namespace {

// Per-site variance of f_i under q: sum_k q (var + mean^2) - site_mean^2.
std::vector<double> site_variances(const VariationalState& s) {
  std::vector<double> v(s.sites);
  for (std::size_t i = 0; i < s.sites; ++i) {
    double second = 0.0;
    for (std::size_t k = 0; k < s.classes; ++k) {
      const std::size_t ik = s.at(i, k);
      second += s.label_prob[ik] * (s.field_var[ik] + s.field_mean[ik] * s.field_mean[ik]);
    }
    v[i] = second - s.site_mean[i] * s.site_mean[i];
  }
  return v;
}

}  // namespace

void VbModel::update_noise_precision(VariationalState& s) const {
  const std::vector<double> v = site_variances(s);
  double sum = 0.0;
  for (std::size_t tau = 0; tau < columns_.size(); ++tau) {
    const auto& col = columns_[tau];
    double spread = 0.0;
    for (std::size_t j = 0; j < col.nnz(); ++j) spread += col.value[j] * col.value[j] * v[col.index[j]];
    const double r = shadowing_[tau] - s.shadow_mean[tau];
    sum += r * r + spread;
  }
  const double scale = 1.0 / (1.0 / priors_.b_nu + 0.5 * sum);
  if (!(scale > 0.0) || !std::isfinite(scale))
    throw NumericalError("noise-scale update produced a nonpositive value; state is inconsistent");
  s.noise_scale = scale;
}

void VbModel::update_class_means(VariationalState& s) const {
  for (std::size_t k = 0; k < classes(); ++k) {
    const double phi_k = s.class_precision(k);
    require_positive(phi_k, "class precision");
    double mass = 0.0;
    double weighted = 0.0;
    for (std::size_t i = 0; i < sites(); ++i) {
      const std::size_t ik = s.at(i, k);
      mass += s.label_prob[ik];
      weighted += s.label_prob[ik] * s.field_mean[ik];
    }
    const double var = 1.0 / (1.0 / priors_.sigma2[k] + mass * phi_k);
    require_positive(var, "class-mean variance");
    s.mean_var[k] = var;
    s.mean_mean[k] = var * (priors_.m[k] / priors_.sigma2[k] + phi_k * weighted);
  }
}

void VbModel::update_class_precisions(VariationalState& s) const {
  for (std::size_t k = 0; k < classes(); ++k) {
    double mass = 0.0;
    double spread = 0.0;
    for (std::size_t i = 0; i < sites(); ++i) {
      const double q = s.label_prob[s.at(i, k)];
      mass += q;
      spread += q * squared_deviation(s, i, k);
    }
    const double scale = 1.0 / (1.0 / priors_.b[k] + 0.5 * spread);
    require_positive(scale, "class-precision scale");
    s.prec_shape[k] = priors_.a[k] + 0.5 * mass;
    s.prec_scale[k] = scale;
  }
}

void VbModel::iterate(VariationalState& s) const {
  refresh_caches(s);
  update_field_variances(s);
  update_field_means(s);
  update_label_probs(s);
  update_noise_precision(s);
  update_class_means(s);
  update_class_precisions(s);
}

ElboTerms VbModel::elbo_terms(const VariationalState& s) const {
  check_dimensions(s);
  const std::size_t K = classes();
  const auto t = static_cast<double>(measurements());
  ElboTerms e;

  const double phi_nu = s.noise_precision();
  const double log_phi_nu = expected_log(s.noise_shape, s.noise_scale);

  const std::vector<double> v = site_variances(s);
  double residual = 0.0;
  for (std::size_t tau = 0; tau < columns_.size(); ++tau) {
    const auto& col = columns_[tau];
    double spread = 0.0;
    for (std::size_t j = 0; j < col.nnz(); ++j) spread += col.value[j] * col.value[j] * v[col.index[j]];
    const double r = shadowing_[tau] - s.shadow_mean[tau];
    residual += r * r + spread;
  }
  e.likelihood = 0.5 * t * (log_phi_nu - kLog2Pi) - 0.5 * phi_nu * residual;

  std::vector<double> log_phi(K);
  for (std::size_t k = 0; k < K; ++k) log_phi[k] = expected_log(s.prec_shape[k], s.prec_scale[k]);

  for (std::size_t i = 0; i < sites(); ++i) {
    for (std::size_t k = 0; k < K; ++k) {
      const std::size_t ik = s.at(i, k);
      const double q = s.label_prob[ik];
      if (q <= 0.0) continue;
      e.field_prior += q * (0.5 * (log_phi[k] - kLog2Pi) -
                            0.5 * s.class_precision(k) * squared_deviation(s, i, k));
      e.label_entropy -= q * std::log(q);
      e.field_entropy += q * 0.5 * (kLog2Pi + 1.0 + std::log(s.field_var[ik]));
    }
  }

  double agree = 0.0;
  for (std::size_t i = 0; i < sites(); ++i) {
    const std::size_t a = grid_.col_of(i);
    const std::size_t b = grid_.row_of(i);
    auto overlap = [&](std::size_t j) {
      double acc = 0.0;
      for (std::size_t k = 0; k < K; ++k) acc += s.label_prob[s.at(i, k)] * s.label_prob[s.at(j, k)];
      return acc;
    };
    if (a + 1 < grid_.nx()) agree += overlap(i + 1);
    if (b + 1 < grid_.ny()) agree += overlap(i + grid_.nx());
  }
  e.potts = potts_.beta * agree;

  e.noise_prior = gamma_cross(priors_.a_nu, priors_.b_nu, s.noise_shape, s.noise_scale);
  e.noise_entropy = gamma_entropy(s.noise_shape, s.noise_scale);

  for (std::size_t k = 0; k < K; ++k) {
    const double dm = s.mean_mean[k] - priors_.m[k];
    e.mean_prior += -0.5 * (kLog2Pi + std::log(priors_.sigma2[k])) -
                    (s.mean_var[k] + dm * dm) / (2.0 * priors_.sigma2[k]);
    e.mean_entropy += 0.5 * (kLog2Pi + 1.0 + std::log(s.mean_var[k]));
    e.precision_prior += gamma_cross(priors_.a[k], priors_.b[k], s.prec_shape[k], s.prec_scale[k]);
    e.precision_entropy += gamma_entropy(s.prec_shape[k], s.prec_scale[k]);
  }
  return e;
}

VbEstimates extract_estimates(const VariationalState& s) {
  VbEstimates out;
  out.f_mmse.resize(s.sites);
  out.z_map.resize(s.sites);
  for (std::size_t i = 0; i < s.sites; ++i) {
    std::size_t best = 0;
    for (std::size_t k = 1; k < s.classes; ++k)
      if (s.label_prob[s.at(i, k)] > s.label_prob[s.at(i, best)]) best = k;
    out.z_map[i] = static_cast<int>(best);
    out.f_mmse[i] = s.field_mean[s.at(i, best)];
  }
  out.theta_mmse.noise_precision = s.noise_precision();
  out.theta_mmse.class_means = s.mean_mean;
  out.theta_mmse.class_precisions.resize(s.classes);
  for (std::size_t k = 0; k < s.classes; ++k)
    out.theta_mmse.class_precisions[k] = s.class_precision(k);
  return out;
}

VbResult run_vb(const VbModel& model, const VbOptions& options) {
  VbCheckpoint start;
  start.state = model.init_state(options.seed);
  start.iteration = 0;
  const double e0 = model.elbo(start.state);
  if (!std::isfinite(e0)) throw DivergenceError("non-finite ELBO at initialization", 0);
  start.elbo_trace.push_back(e0);
  return run_vb(model, options, std::move(start));
}

VbResult run_vb(const VbModel& model, const VbOptions& options, VbCheckpoint run) {
  if (options.max_iter < 1) throw InvalidArgument("max_iter must be at least 1");
  if (!(options.tolerance > 0.0)) throw InvalidArgument("ELBO tolerance must be positive");
  model.check_dimensions(run.state);
  if (run.elbo_trace.empty()) run.elbo_trace.push_back(model.elbo(run.state));

  while (!run.converged && run.iteration < options.max_iter) {
    try {
      model.iterate(run.state);
    } catch (const NumericalError& err) {
      throw DivergenceError(std::string(err.what()) + " at iteration " +
                                std::to_string(run.iteration + 1),
                            run.iteration + 1);
    }
    ++run.iteration;
    const double e = model.elbo(run.state);
    if (!std::isfinite(e))
      throw DivergenceError("non-finite ELBO at iteration " + std::to_string(run.iteration),
                            run.iteration);
    const double gain = e - run.elbo_trace.back();
    run.elbo_trace.push_back(e);
    if (gain <= options.tolerance) run.converged = true;
    if (options.on_iteration) options.on_iteration(run);
  }
  model.refresh_caches(run.state);
  VbResult out;
  out.estimates = extract_estimates(run.state);
  out.final = std::move(run);
  return out;
}

}  // namespace radiotomo
