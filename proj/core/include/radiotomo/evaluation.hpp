#pragma once

#include "radiotomo/geometry.hpp"
#include "radiotomo/synthesis.hpp"

#include <cstdint>
#include <functional>
#include <map>
#include <span>
#include <string>
#include <vector>

namespace radiotomo {

/// Fraction of sites whose labels differ.
double labeling_error(std::span<const int> truth, std::span<const int> estimate);

/// Label of the nearest class mean at every site (lowest class on ties).
LabelField nearest_class_labels(std::span<const double> field, std::span<const double> class_means);

/// Shadowing between two arbitrary points of the area.
using ShadowFn = std::function<double(Point, Point)>;

/// Discretized shadowing w(a, b)' f for a loss field on `grid`.
ShadowFn field_shadow(const Grid& grid, std::span<const double> field, double lambda);

struct PointPair {
  Point a;
  Point b;
};

/// Point pairs drawn uniformly and independently by arc length along the
/// boundary of `area`; coincident draws are redrawn.
std::vector<PointPair> sample_boundary_pairs(const Rect& area, std::size_t count,
                                             std::uint64_t seed);

/// sum (s - s_hat)^2 / sum s^2 over the given pairs.
double nmse(const ShadowFn& truth, const ShadowFn& estimate, std::span<const PointPair> pairs);
/// Same over `sample_pairs` boundary pairs drawn with `seed`.
double nmse(const ShadowFn& truth, const ShadowFn& estimate, const Rect& area,
            std::size_t sample_pairs, std::uint64_t seed);

struct GainMap {
  Point rx;
  std::vector<double> gains;   ///< dB; NaN where missing
  std::vector<double> shadow;  ///< NaN where missing
  std::vector<bool> missing;   ///< grid point coincides with rx
};

/// Channel gain from every grid point to `rx`:
/// g_i = g0 - gamma * 10 log10 d(x_i, rx) - s_hat(x_i, rx).
GainMap build_gain_map(std::span<const double> field, Point rx, const PathlossParams& pathloss,
                       const Grid& grid, double lambda);

/// Named metric traces of one Monte Carlo run, indexed by slot.
using McTrace = std::map<std::string, std::vector<double>>;

struct McFailure {
  std::size_t run = 0;
  std::uint64_t seed = 0;
  std::string message;
};

struct McMetric {
  std::vector<std::vector<double>> traces;  ///< one per successful run
  std::vector<double> mean;                 ///< per slot
  std::vector<double> stddev;               ///< per slot, sample standard deviation
  std::vector<std::size_t> count;           ///< runs contributing to each slot
};

struct McReport {
  std::vector<std::uint64_t> seeds;  ///< of the successful runs, in run order
  std::vector<McFailure> failures;
  std::map<std::string, McMetric> metrics;
};

/// Runs `experiment(base_seed + r)` for r = 0..runs-1. A run that throws is
/// recorded as a failure and left out of the statistics.
McReport run_mc(const std::function<McTrace(std::uint64_t)>& experiment, std::size_t runs,
                std::uint64_t base_seed);

/// Recomputes mean, stddev and count of a metric from its traces.
void aggregate(McMetric& metric);

}  // namespace radiotomo
