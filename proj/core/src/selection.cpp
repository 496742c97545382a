#include "radiotomo/selection.hpp"

#include "radiotomo/error.hpp"
#include "radiotomo/evaluation.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <string>

namespace radiotomo {

double score_pair(const SparseVector& w, const VariationalState& state) {
  if (w.dim != state.sites) throw InvalidArgument("weight vector does not match the state");
  const double phi_nu = state.noise_precision();
  double total = 0.0;
  for (std::size_t j = 0; j < w.nnz(); ++j) {
    const std::size_t i = w.index[j];
    const double w2 = w.value[j] * w.value[j];
    for (std::size_t k = 0; k < state.classes; ++k) {
      const std::size_t ik = state.at(i, k);
      total += state.label_prob[ik] * std::log1p(phi_nu * state.field_var[ik] * w2);
    }
  }
  return total;
}

std::vector<std::size_t> top_k(std::span<const double> scores, std::span<const Candidate> pool,
                               std::size_t batch) {
  if (pool.empty()) throw InvalidArgument("cannot select from an empty pool");
  if (scores.size() != pool.size()) throw InvalidArgument("one score per candidate is required");
  if (batch < 1 || batch > pool.size())
    throw InvalidArgument("batch size " + std::to_string(batch) + " outside [1, " +
                          std::to_string(pool.size()) + "]");
  std::vector<std::size_t> order(pool.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  auto better = [&](std::size_t x, std::size_t y) {
    if (scores[x] != scores[y]) return scores[x] > scores[y];
    if (pool[x].link != pool[y].link) return pool[x].link < pool[y].link;
    return x < y;
  };
  std::partial_sort(order.begin(), order.begin() + static_cast<std::ptrdiff_t>(batch), order.end(),
                    better);
  order.resize(batch);
  return order;
}

std::vector<std::size_t> select_batch(std::span<const Candidate> pool,
                                      const VariationalState& state, std::size_t batch) {
  std::vector<double> scores(pool.size());
  for (std::size_t p = 0; p < pool.size(); ++p) scores[p] = score_pair(pool[p].weight, state);
  return top_k(scores, pool, batch);
}

EntropyReduction entropy_reduction_exact(std::span<const double> w, std::span<const int> labels,
                                         const VariationalState& state, double phi_nu) {
  const std::size_t n = state.sites;
  if (w.size() != n || labels.size() != n)
    throw InvalidArgument("weights and labels must have one entry per site");
  Eigen::VectorXd omega(n);
  Eigen::VectorXd sigma(n);
  for (std::size_t i = 0; i < n; ++i) {
    const auto k = static_cast<std::size_t>(labels[i]);
    if (labels[i] < 0 || k >= state.classes) throw InvalidArgument("label outside the class range");
    omega[static_cast<Eigen::Index>(i)] = w[i] * w[i];
    sigma[static_cast<Eigen::Index>(i)] = state.field_var[state.at(i, k)];
  }
  const auto dim = static_cast<Eigen::Index>(n);
  const Eigen::MatrixXd m = Eigen::MatrixXd::Identity(dim, dim) +
                            phi_nu * omega.asDiagonal() * Eigen::MatrixXd(sigma.asDiagonal());
  EntropyReduction out;
  out.determinant = 0.5 * std::log(m.partialPivLu().determinant());
  for (std::size_t i = 0; i < n; ++i)
    out.diagonal += 0.5 * std::log1p(phi_nu * sigma[static_cast<Eigen::Index>(i)] *
                                     omega[static_cast<Eigen::Index>(i)]);
  return out;
}

RankOneReduction entropy_reduction_rank_one(const Eigen::VectorXd& w, const Eigen::MatrixXd& sigma,
                                            double phi_nu) {
  if (sigma.rows() != w.size() || sigma.cols() != w.size())
    throw InvalidArgument("covariance must be square with the dimension of w");
  const Eigen::MatrixXd m =
      Eigen::MatrixXd::Identity(w.size(), w.size()) + phi_nu * w * w.transpose() * sigma;
  RankOneReduction out;
  out.determinant = 0.5 * std::log(m.partialPivLu().determinant());
  out.lemma = 0.5 * std::log1p(phi_nu * w.dot(sigma * w));
  return out;
}

SyntheticSource::SyntheticSource(Grid grid, SensorSet sensors, double lambda, LossField truth,
                                 double noise_precision, std::size_t pool_size,
                                 std::uint64_t seed)
    : grid_(grid),
      sensors_(std::move(sensors)),
      lambda_(lambda),
      truth_(std::move(truth)),
      noise_sd_(0.0),
      pool_size_(pool_size),
      seed_(seed) {
  if (truth_.size() != grid_.size()) throw InvalidArgument("true field does not match the grid");
  if (!(noise_precision > 0.0)) throw InvalidArgument("noise precision must be positive");
  if (pool_size_ == 0) throw InvalidArgument("pool size must be positive");
  noise_sd_ = 1.0 / std::sqrt(noise_precision);
}

std::vector<Candidate> SyntheticSource::pool(std::size_t slot) {
  std::mt19937_64 rng(derive_seed(seed_, 2 * slot));
  const auto links = random_links(pool_size_, sensors_.size(), rng);
  last_.clear();
  last_.reserve(links.size());
  for (const Link& link : links) last_.push_back({link, weight_vector(link, grid_, sensors_, lambda_)});
  return last_;
}

std::vector<double> SyntheticSource::acquire(std::size_t slot, std::span<const std::size_t> chosen) {
  const std::uint64_t noise_seed = derive_seed(seed_, 2 * slot + 1);
  std::vector<double> out;
  out.reserve(chosen.size());
  for (std::size_t p : chosen) {
    if (p >= last_.size()) throw InvalidArgument("chosen candidate is not in the current pool");
    std::mt19937_64 rng(derive_seed(noise_seed, p));
    std::normal_distribution<double> normal(0.0, 1.0);
    out.push_back(last_[p].weight.dot(truth_) + noise_sd_ * normal(rng));
    ++calls_;
  }
  return out;
}

LoggedSource::LoggedSource(const Grid& grid, const SensorSet& sensors, double lambda,
                           std::vector<LoggedMeasurement> log, std::size_t pool_size,
                           std::uint64_t seed)
    : log_(std::move(log)), pool_size_(pool_size), seed_(seed) {
  if (pool_size_ == 0) throw InvalidArgument("pool size must be positive");
  weights_.reserve(log_.size());
  for (const auto& entry : log_) weights_.push_back(weight_vector(entry.link, grid, sensors, lambda));
  unused_.resize(log_.size());
  std::iota(unused_.begin(), unused_.end(), std::size_t{0});
}

std::vector<Candidate> LoggedSource::pool(std::size_t slot) {
  std::mt19937_64 rng(derive_seed(seed_, slot));
  const std::size_t size = std::min(pool_size_, unused_.size());
  std::vector<std::size_t> shuffled = unused_;
  // Partial Fisher-Yates: the first `size` entries are a uniform sample.
  for (std::size_t j = 0; j < size; ++j) {
    std::uniform_int_distribution<std::size_t> pick(j, shuffled.size() - 1);
    std::swap(shuffled[j], shuffled[pick(rng)]);
  }
  offered_.assign(shuffled.begin(), shuffled.begin() + static_cast<std::ptrdiff_t>(size));
  std::vector<Candidate> out;
  out.reserve(size);
  for (std::size_t e : offered_) out.push_back({log_[e].link, weights_[e]});
  return out;
}

std::vector<double> LoggedSource::acquire(std::size_t, std::span<const std::size_t> chosen) {
  std::vector<double> out;
  out.reserve(chosen.size());
  for (std::size_t p : chosen) {
    if (p >= offered_.size()) throw InvalidArgument("chosen candidate is not in the current pool");
    const std::size_t e = offered_[p];
    const auto it = std::find(unused_.begin(), unused_.end(), e);
    if (it == unused_.end()) throw InvalidArgument("logged measurement acquired twice");
    unused_.erase(it);
    out.push_back(log_[e].shadowing);
  }
  return out;
}

namespace {

std::vector<std::size_t> random_subset(std::size_t pool, std::size_t batch, std::mt19937_64& rng) {
  std::vector<std::size_t> idx(pool);
  std::iota(idx.begin(), idx.end(), std::size_t{0});
  for (std::size_t j = 0; j < batch; ++j) {
    std::uniform_int_distribution<std::size_t> pick(j, pool - 1);
    std::swap(idx[j], idx[pick(rng)]);
  }
  idx.resize(batch);
  return idx;
}

}  // namespace

Trajectory run_adaptive(const Grid& grid, MeasurementSet initial, const HyperPriors& priors,
                        const PottsParams& potts, MeasurementSource& source,
                        const AdaptiveSchedule& schedule, const VbOptions& vb,
                        UpdateScheme scheme, const LabelField* truth) {
  if (initial.empty()) throw InvalidArgument("adaptive loop needs a nonempty initial data set");
  if (schedule.slots > 0 && (schedule.batch == 0 || schedule.batch > schedule.pool_size))
    throw InvalidArgument("batch size must lie in [1, pool size]");
  if (truth && truth->size() != grid.size())
    throw InvalidArgument("ground-truth labels do not match the grid");

  Trajectory out{{}, std::move(initial), AdaptiveStatus::kCompleted};
  std::mt19937_64 policy_rng(derive_seed(schedule.seed, 0x5e1ec7));

  auto reconstruct = [&](std::size_t slot, VariationalState* state) {
    const VbModel model(grid, out.data, priors, potts, scheme);
    VbResult result = run_vb(model, vb);
    SlotRecord record;
    record.slot = slot;
    record.measurements = out.data.size();
    record.iterations = result.final.iteration;
    record.elbo_final = result.final.elbo_trace.back();
    record.labeling_error = truth ? labeling_error(*truth, result.estimates.z_map)
                                  : std::numeric_limits<double>::quiet_NaN();
    record.estimates = std::move(result.estimates);
    if (state) *state = std::move(result.final.state);
    return record;
  };

  for (std::size_t slot = 0;; ++slot) {
    VariationalState state;
    SlotRecord record = reconstruct(slot, &state);
    if (slot == schedule.slots) {
      out.slots.push_back(std::move(record));
      break;
    }

    const std::vector<Candidate> pool = source.pool(slot + 1);
    if (pool.empty()) {
      out.status = AdaptiveStatus::kPoolExhausted;
      out.slots.push_back(std::move(record));
      break;
    }
    const std::size_t batch = std::min(schedule.batch, pool.size());
    std::vector<std::size_t> chosen = schedule.mode == SelectionMode::kAdaptive
                                          ? select_batch(pool, state, batch)
                                          : random_subset(pool.size(), batch, policy_rng);
    std::sort(chosen.begin(), chosen.end());
    const std::vector<double> values = source.acquire(slot + 1, chosen);
    for (std::size_t j = 0; j < chosen.size(); ++j) {
      const Candidate& c = pool[chosen[j]];
      out.data.append(c.link, c.weight, values[j]);
      record.selected.push_back(c.link);
    }
    out.slots.push_back(std::move(record));
    if (batch < schedule.batch) {
      // A short pool means the log is used up; reconstruct once more from
      // everything acquired and stop.
      out.status = AdaptiveStatus::kPoolExhausted;
      out.slots.push_back(reconstruct(slot + 1, nullptr));
      break;
    }
  }
  return out;
}

}  // namespace radiotomo
