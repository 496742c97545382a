#include "radiotomo/synthesis.hpp"

#include "radiotomo/error.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

namespace radiotomo {

void PottsParams::validate() const {
  if (classes < 2) throw InvalidArgument("Potts prior needs at least two classes");
  if (!std::isfinite(beta) || beta < 0.0)
    throw InvalidArgument("granularity coefficient beta must be finite and nonnegative");
}

void HyperParams::validate() const {
  if (class_means.size() != class_precisions.size())
    throw InvalidArgument("class means and precisions differ in length");
  if (class_means.empty()) throw InvalidArgument("at least one class is required");
  if (!(noise_precision > 0.0) || !std::isfinite(noise_precision))
    throw InvalidArgument("invalid hyperparameter: noise precision must be positive");
  for (std::size_t k = 0; k < class_precisions.size(); ++k) {
    if (!(class_precisions[k] > 0.0) || !std::isfinite(class_precisions[k]))
      throw InvalidArgument("invalid hyperparameter: class precision " + std::to_string(k) +
                            " must be positive");
    if (!std::isfinite(class_means[k]))
      throw InvalidArgument("invalid hyperparameter: class mean " + std::to_string(k));
  }
}

void MeasurementSet::append(const Link& link, SparseVector weight, double shadowing) {
  weights_.append(std::move(weight));
  links_.push_back(link);
  shadowing_.push_back(shadowing);
}

double potts_energy(const Grid& grid, std::span<const int> labels, double beta) {
  if (labels.size() != grid.size()) throw InvalidArgument("label field does not match grid");
  std::size_t agree = 0;
  for (std::size_t b = 0; b < grid.ny(); ++b) {
    for (std::size_t a = 0; a < grid.nx(); ++a) {
      const std::size_t i = grid.index(a, b);
      if (a + 1 < grid.nx() && labels[i] == labels[i + 1]) ++agree;
      if (b + 1 < grid.ny() && labels[i] == labels[i + grid.nx()]) ++agree;
    }
  }
  return beta * static_cast<double>(agree);
}

namespace {

// Writes the normalized conditional of `site` into `prob` (size K).
void conditional_into(const Grid& grid, std::span<const int> labels, std::size_t site,
                      const PottsParams& params, std::span<double> prob) {
  std::fill(prob.begin(), prob.end(), 0.0);
  std::size_t nb[4];
  const std::size_t count = grid.neighbors(site, nb);
  for (std::size_t j = 0; j < count; ++j) prob[static_cast<std::size_t>(labels[nb[j]])] += 1.0;
  double max_count = 0.0;
  for (double c : prob) max_count = std::max(max_count, c);
  double total = 0.0;
  for (double& p : prob) {
    p = std::exp(params.beta * (p - max_count));
    total += p;
  }
  for (double& p : prob) p /= total;
}

}  // namespace

std::vector<double> potts_conditional(const Grid& grid, std::span<const int> labels,
                                      std::size_t site, const PottsParams& params) {
  params.validate();
  if (labels.size() != grid.size()) throw InvalidArgument("label field does not match grid");
  if (site >= grid.size()) throw InvalidArgument("site index out of range");
  std::vector<double> prob(static_cast<std::size_t>(params.classes));
  conditional_into(grid, labels, site, params, prob);
  return prob;
}

void gibbs_sweep(const Grid& grid, LabelField& labels, const PottsParams& params,
                 std::mt19937_64& rng) {
  std::vector<double> prob(static_cast<std::size_t>(params.classes));
  std::uniform_real_distribution<double> unif(0.0, 1.0);
  for (std::size_t i = 0; i < grid.size(); ++i) {
    conditional_into(grid, labels, i, params, prob);
    const double u = unif(rng);
    double acc = 0.0;
    int chosen = params.classes - 1;
    for (int k = 0; k < params.classes; ++k) {
      acc += prob[static_cast<std::size_t>(k)];
      if (u < acc) {
        chosen = k;
        break;
      }
    }
    labels[i] = chosen;
  }
}

LabelField sample_potts(const Grid& grid, const PottsParams& params, int sweeps,
                        std::uint64_t seed) {
  params.validate();
  if (sweeps < 1) throw InvalidArgument("sample_potts needs at least one sweep");
  std::mt19937_64 rng(seed);
  std::uniform_int_distribution<int> start(0, params.classes - 1);
  LabelField labels(grid.size());
  for (auto& z : labels) z = start(rng);
  for (int s = 0; s < sweeps; ++s) gibbs_sweep(grid, labels, params, rng);
  return labels;
}

LossField sample_slf(std::span<const int> labels, const HyperParams& hp, std::uint64_t seed) {
  hp.validate();
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> normal(0.0, 1.0);
  LossField f(labels.size());
  for (std::size_t i = 0; i < labels.size(); ++i) {
    const auto k = static_cast<std::size_t>(labels[i]);
    if (labels[i] < 0 || k >= hp.classes())
      throw InvalidArgument("label " + std::to_string(labels[i]) + " at site " +
                            std::to_string(i) + " is outside the class range");
    f[i] = hp.class_means[k] + normal(rng) / std::sqrt(hp.class_precisions[k]);
  }
  return f;
}

MeasurementSet synthesize_measurements(std::span<const double> field,
                                       std::span<const Link> links, const Grid& grid,
                                       const SensorSet& sensors, double lambda,
                                       const HyperParams& hp, std::uint64_t seed) {
  hp.validate();
  if (field.size() != grid.size()) throw InvalidArgument("loss field does not match grid");
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> normal(0.0, 1.0);
  const double noise_sd = 1.0 / std::sqrt(hp.noise_precision);
  MeasurementSet out(grid.size(), lambda);
  for (const Link& link : links) {
    SparseVector w = weight_vector(link, grid, sensors, lambda);
    const double s = w.dot(field) + noise_sd * normal(rng);
    out.append(link, std::move(w), s);
  }
  return out;
}

std::vector<Link> random_links(std::size_t count, std::size_t sensors, std::mt19937_64& rng) {
  if (sensors < 2) throw InvalidArgument("need at least two sensors to form a link");
  std::uniform_int_distribution<std::size_t> pick(0, sensors - 1);
  std::vector<Link> out;
  out.reserve(count);
  while (out.size() < count) {
    const Link link{pick(rng), pick(rng)};
    if (link.tx != link.rx) out.push_back(link);
  }
  return out;
}

SensorSet perimeter_sensors(const Rect& area, std::size_t count, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> arc(0.0, area.perimeter());
  std::vector<Point> pts;
  pts.reserve(count);
  while (pts.size() < count) {
    const Point p = area.boundary_point(arc(rng));
    if (std::find(pts.begin(), pts.end(), p) == pts.end()) pts.push_back(p);
  }
  return SensorSet(std::move(pts));
}

double pathloss_db(double distance, const PathlossParams& pl) {
  if (!(distance > 0.0)) throw InvalidArgument("link distance must be positive");
  return pl.g0 - pl.gamma * 10.0 * std::log10(distance);
}

PathlossParams calibrate_pathloss(std::span<const std::pair<double, double>> samples) {
  if (samples.size() < 2) throw InvalidArgument("calibration needs at least two samples");
  double mean_x = 0.0;
  double mean_g = 0.0;
  for (const auto& [d, g] : samples) {
    if (!(d > 0.0)) throw InvalidArgument("calibration distance must be positive");
    mean_x += 10.0 * std::log10(d);
    mean_g += g;
  }
  const auto n = static_cast<double>(samples.size());
  mean_x /= n;
  mean_g /= n;
  double sxx = 0.0;
  double sxg = 0.0;
  for (const auto& [d, g] : samples) {
    const double x = 10.0 * std::log10(d) - mean_x;
    sxx += x * x;
    sxg += x * (g - mean_g);
  }
  if (!(sxx > 1e-12 * std::max(1.0, mean_x * mean_x) * n))
    throw NumericalError("rank-deficient calibration: all distances are equal");
  const double slope = sxg / sxx;
  return {mean_g - slope * mean_x, -slope};
}

double pathloss_rss(std::span<const std::pair<double, double>> samples, const PathlossParams& pl) {
  double rss = 0.0;
  for (const auto& [d, g] : samples) {
    const double r = g - pathloss_db(d, pl);
    rss += r * r;
  }
  return rss;
}

double calibrated_shadowing(double raw_gain_db, double distance, const PathlossParams& pl) {
  return pathloss_db(distance, pl) - raw_gain_db;
}

std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t stream) {
  // splitmix64 finalizer over a combination of the two words
  std::uint64_t z = seed + 0x9e3779b97f4a7c15ULL * (stream + 1);
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

}  // namespace radiotomo
