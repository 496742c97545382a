#pragma once

#include "radiotomo/geometry.hpp"
#include "radiotomo/synthesis.hpp"
#include "radiotomo/vb.hpp"

#include <Eigen/Dense>

#include <cstdint>
#include <random>
#include <span>
#include <vector>

namespace radiotomo {

/// One entry of the pool M_tau of sensor pairs available in a slot.
struct Candidate {
  Link link;
  SparseVector weight;
};

/// Entropy-reduction surrogate of measuring along `w`:
/// sum_i sum_k q(z_i = k) ln(1 + phi_nu * var(i, k) * w_i^2).
///
/// The value is twice the expected reduction of the conditional entropy of f
/// under q(z); the constant factor does not change any ranking.
double score_pair(const SparseVector& w, const VariationalState& state);

/// Pool indices of the `batch` highest-scoring candidates, best first.
/// Equal scores are ordered by (tx, rx) and then by pool index.
std::vector<std::size_t> select_batch(std::span<const Candidate> pool,
                                      const VariationalState& state, std::size_t batch);
/// Same ranking rule applied to precomputed scores.
std::vector<std::size_t> top_k(std::span<const double> scores, std::span<const Candidate> pool,
                               std::size_t batch);

/// Entropy reduction (1/2) ln|I + phi_nu Omega Sigma_z| for a fixed label
/// field, by a dense determinant and by the diagonal shortcut.
struct EntropyReduction {
  double determinant = 0.0;
  double diagonal = 0.0;
};
EntropyReduction entropy_reduction_exact(std::span<const double> w, std::span<const int> labels,
                                         const VariationalState& state, double phi_nu);

/// Dense-covariance form (1/2) ln|I + phi_nu w w' Sigma| by a direct
/// determinant and by the matrix determinant lemma (1/2) ln(1 + phi_nu w' Sigma w).
struct RankOneReduction {
  double determinant = 0.0;
  double lemma = 0.0;
};
RankOneReduction entropy_reduction_rank_one(const Eigen::VectorXd& w, const Eigen::MatrixXd& sigma,
                                            double phi_nu);

/// Supplies candidate pools and the measurements of the chosen candidates.
class MeasurementSource {
 public:
  virtual ~MeasurementSource() = default;
  /// Pool for `slot`. An empty pool means the source is exhausted.
  virtual std::vector<Candidate> pool(std::size_t slot) = 0;
  /// Shadowing values for the entries `chosen` of the pool last returned for
  /// `slot`, in the order given.
  virtual std::vector<double> acquire(std::size_t slot, std::span<const std::size_t> chosen) = 0;
};

/// Simulated acquisition from a known loss field. Pools are drawn uniformly
/// with replacement. The noise of pool entry p in slot s depends only on
/// (seed, s, p), so two policies choosing the same entry see the same value.
class SyntheticSource final : public MeasurementSource {
 public:
  SyntheticSource(Grid grid, SensorSet sensors, double lambda, LossField truth,
                  double noise_precision, std::size_t pool_size, std::uint64_t seed);

  std::vector<Candidate> pool(std::size_t slot) override;
  std::vector<double> acquire(std::size_t slot, std::span<const std::size_t> chosen) override;

  /// Number of synthesized measurements so far.
  std::size_t synthesis_calls() const { return calls_; }

 private:
  Grid grid_;
  SensorSet sensors_;
  double lambda_;
  LossField truth_;
  double noise_sd_;
  std::size_t pool_size_;
  std::uint64_t seed_;
  std::vector<Candidate> last_;
  std::size_t calls_ = 0;
};

struct LoggedMeasurement {
  Link link;
  double shadowing = 0.0;
};

/// Replays a measurement log. Pools are drawn without replacement from the
/// entries not yet acquired; entries offered but not chosen stay available.
class LoggedSource final : public MeasurementSource {
 public:
  LoggedSource(const Grid& grid, const SensorSet& sensors, double lambda,
               std::vector<LoggedMeasurement> log, std::size_t pool_size, std::uint64_t seed);

  std::vector<Candidate> pool(std::size_t slot) override;
  std::vector<double> acquire(std::size_t slot, std::span<const std::size_t> chosen) override;

  std::size_t remaining() const { return unused_.size(); }

 private:
  std::vector<LoggedMeasurement> log_;
  std::vector<SparseVector> weights_;
  std::vector<std::size_t> unused_;
  std::vector<std::size_t> offered_;
  std::size_t pool_size_;
  std::uint64_t seed_;
};

enum class SelectionMode { kAdaptive, kRandom };

struct AdaptiveSchedule {
  std::size_t slots = 8;
  std::size_t pool_size = 200;
  std::size_t batch = 100;
  SelectionMode mode = SelectionMode::kAdaptive;
  std::uint64_t seed = 0;  ///< drives the random policy
};

struct SlotRecord {
  std::size_t slot = 0;
  std::size_t measurements = 0;  ///< t used for this slot's reconstruction
  int iterations = 0;
  double elbo_final = 0.0;
  double labeling_error = 0.0;  ///< NaN without ground truth
  VbEstimates estimates;
  std::vector<Link> selected;  ///< pairs acquired after this slot's reconstruction
};

enum class AdaptiveStatus { kCompleted, kPoolExhausted };

struct Trajectory {
  std::vector<SlotRecord> slots;
  MeasurementSet data;
  AdaptiveStatus status = AdaptiveStatus::kCompleted;
};

/// Measure-and-reconstruct loop. Slot 0 reconstructs from `initial`; each
/// of the following `schedule.slots` slots draws a pool, picks a batch (by
/// score or uniformly at random), acquires it and reconstructs again from a
/// fresh initialization. Chosen pairs are appended in pool order.
Trajectory run_adaptive(const Grid& grid, MeasurementSet initial, const HyperPriors& priors,
                        const PottsParams& potts, MeasurementSource& source,
                        const AdaptiveSchedule& schedule, const VbOptions& vb,
                        UpdateScheme scheme = UpdateScheme::kCoordinateAscent,
                        const LabelField* truth = nullptr);

}  // namespace radiotomo
