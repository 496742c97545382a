#pragma once

#include "radiotomo/geometry.hpp"

#include <cstdint>
#include <random>
#include <span>
#include <utility>
#include <vector>

namespace radiotomo {

/// Class labels, one per grid site, in vec() order. Internally labels are
/// 0-based (0..K-1); files store them 1-based.
using LabelField = std::vector<int>;
/// Spatial loss field values, one per grid site, in vec() order.
using LossField = std::vector<double>;

struct PottsParams {
  double beta = 1.5;
  int classes = 4;

  void validate() const;
};

/// Hyperparameter vector theta = (noise precision, class means, class precisions).
struct HyperParams {
  double noise_precision = 20.0;
  std::vector<double> class_means;
  std::vector<double> class_precisions;

  std::size_t classes() const { return class_means.size(); }
  void validate() const;
};

struct PathlossParams {
  double g0 = 0.0;     ///< dB gain at unit distance
  double gamma = 0.0;  ///< pathloss exponent
};

/// Calibrated shadowing values with the links and weight columns that
/// produced them. Grows append-only.
class MeasurementSet {
 public:
  MeasurementSet(std::size_t grid_size, double lambda) : weights_(grid_size, lambda) {}

  void append(const Link& link, SparseVector weight, double shadowing);

  std::size_t size() const { return shadowing_.size(); }
  bool empty() const { return shadowing_.empty(); }
  const std::vector<double>& shadowing() const { return shadowing_; }
  const WeightMatrix& weights() const { return weights_; }
  const std::vector<Link>& links() const { return links_; }

 private:
  std::vector<double> shadowing_;
  WeightMatrix weights_;
  std::vector<Link> links_;
};

// Potts prior. The joint is p(z) ∝ exp(beta * #{unordered 4-neighbor pairs
// with equal labels}), so the full conditional of a site is
// p(z_i = k | rest) ∝ exp(beta * #{neighbors labelled k}).

/// beta times the number of equal-label neighbor pairs, each pair counted once.
double potts_energy(const Grid& grid, std::span<const int> labels, double beta);

std::vector<double> potts_conditional(const Grid& grid, std::span<const int> labels,
                                      std::size_t site, const PottsParams& params);

/// One raster-scan Gibbs sweep over every site, in place.
void gibbs_sweep(const Grid& grid, LabelField& labels, const PottsParams& params,
                 std::mt19937_64& rng);

/// State after `sweeps` full sweeps from a uniform-random start.
LabelField sample_potts(const Grid& grid, const PottsParams& params, int sweeps,
                        std::uint64_t seed);

/// f_i ~ N(mu_{z_i}, 1 / phi_{z_i}) independently.
LossField sample_slf(std::span<const int> labels, const HyperParams& hp, std::uint64_t seed);

/// s_tau = w_tau' f + nu_tau with nu_tau ~ N(0, 1 / phi_nu).
MeasurementSet synthesize_measurements(std::span<const double> field,
                                       std::span<const Link> links, const Grid& grid,
                                       const SensorSet& sensors, double lambda,
                                       const HyperParams& hp, std::uint64_t seed);

/// Uniformly random ordered pairs (n, n') with n != n', drawn with replacement.
std::vector<Link> random_links(std::size_t count, std::size_t sensors, std::mt19937_64& rng);

/// Sensors placed uniformly at random along the boundary of `area`.
SensorSet perimeter_sensors(const Rect& area, std::size_t count, std::uint64_t seed);

/// g0 - gamma * 10 log10(d).
double pathloss_db(double distance, const PathlossParams& pl);

/// Least-squares fit of g = g0 - gamma * 10 log10(d) to (distance, gain) pairs.
PathlossParams calibrate_pathloss(std::span<const std::pair<double, double>> samples);

/// Residual sum of squares of a pathloss fit; used to compare candidate fits.
double pathloss_rss(std::span<const std::pair<double, double>> samples, const PathlossParams& pl);

/// Shadowing estimate from a raw gain: g0 - gamma * 10 log10(d) - raw.
double calibrated_shadowing(double raw_gain_db, double distance, const PathlossParams& pl);

/// Independent 64-bit stream seed derived from (seed, stream).
std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t stream);

}  // namespace radiotomo
