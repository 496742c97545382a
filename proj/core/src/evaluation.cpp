#include "radiotomo/evaluation.hpp"

#include "radiotomo/error.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>

namespace radiotomo {

double labeling_error(std::span<const int> truth, std::span<const int> estimate) {
  if (truth.size() != estimate.size())
    throw InvalidArgument("label fields differ in length: " + std::to_string(truth.size()) +
                          " vs " + std::to_string(estimate.size()));
  if (truth.empty()) throw InvalidArgument("label fields are empty");
  std::size_t wrong = 0;
  for (std::size_t i = 0; i < truth.size(); ++i) wrong += truth[i] != estimate[i];
  return static_cast<double>(wrong) / static_cast<double>(truth.size());
}

LabelField nearest_class_labels(std::span<const double> field, std::span<const double> means) {
  if (means.empty()) throw InvalidArgument("at least one class mean is required");
  LabelField out(field.size());
  for (std::size_t i = 0; i < field.size(); ++i) {
    std::size_t best = 0;
    for (std::size_t k = 1; k < means.size(); ++k)
      if (std::abs(field[i] - means[k]) < std::abs(field[i] - means[best])) best = k;
    out[i] = static_cast<int>(best);
  }
  return out;
}

ShadowFn field_shadow(const Grid& grid, std::span<const double> field, double lambda) {
  if (field.size() != grid.size()) throw InvalidArgument("field does not match the grid");
  return [grid, f = std::vector<double>(field.begin(), field.end()), lambda](Point a, Point b) {
    return weight_vector(a, b, grid, lambda).dot(f);
  };
}

std::vector<PointPair> sample_boundary_pairs(const Rect& area, std::size_t count,
                                             std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> arc(0.0, area.perimeter());
  std::vector<PointPair> out;
  out.reserve(count);
  while (out.size() < count) {
    const Point a = area.boundary_point(arc(rng));
    const Point b = area.boundary_point(arc(rng));
    if (!(a == b)) out.push_back({a, b});
  }
  return out;
}

double nmse(const ShadowFn& truth, const ShadowFn& estimate, std::span<const PointPair> pairs) {
  if (pairs.empty()) throw InvalidArgument("NMSE needs at least one point pair");
  double num = 0.0;
  double den = 0.0;
  for (const auto& [a, b] : pairs) {
    const double s = truth(a, b);
    const double e = s - estimate(a, b);
    num += e * e;
    den += s * s;
  }
  if (den == 0.0) throw NumericalError("NMSE undefined: true shadowing is identically zero");
  return num / den;
}

double nmse(const ShadowFn& truth, const ShadowFn& estimate, const Rect& area,
            std::size_t sample_pairs, std::uint64_t seed) {
  if (sample_pairs < 1) throw InvalidArgument("NMSE needs at least one point pair");
  const auto pairs = sample_boundary_pairs(area, sample_pairs, seed);
  return nmse(truth, estimate, pairs);
}

GainMap build_gain_map(std::span<const double> field, Point rx, const PathlossParams& pathloss,
                       const Grid& grid, double lambda) {
  if (field.size() != grid.size()) throw InvalidArgument("field does not match the grid");
  if (!grid.area().contains(rx)) throw InvalidArgument("receiver lies outside the area");
  const double nan = std::numeric_limits<double>::quiet_NaN();
  GainMap out{rx, std::vector<double>(grid.size(), nan), std::vector<double>(grid.size(), nan),
              std::vector<bool>(grid.size(), false)};
  for (std::size_t i = 0; i < grid.size(); ++i) {
    const Point p = grid.point(i);
    if (p == rx) {
      out.missing[i] = true;
      continue;
    }
    out.shadow[i] = weight_vector(p, rx, grid, lambda).dot(field);
    out.gains[i] = pathloss_db(distance(p, rx), pathloss) - out.shadow[i];
  }
  return out;
}

void aggregate(McMetric& metric) {
  std::size_t slots = 0;
  for (const auto& t : metric.traces) slots = std::max(slots, t.size());
  metric.mean.assign(slots, 0.0);
  metric.stddev.assign(slots, 0.0);
  metric.count.assign(slots, 0);
  for (const auto& t : metric.traces)
    for (std::size_t s = 0; s < t.size(); ++s) {
      metric.mean[s] += t[s];
      ++metric.count[s];
    }
  for (std::size_t s = 0; s < slots; ++s) metric.mean[s] /= static_cast<double>(metric.count[s]);
  for (const auto& t : metric.traces)
    for (std::size_t s = 0; s < t.size(); ++s) {
      const double d = t[s] - metric.mean[s];
      metric.stddev[s] += d * d;
    }
  for (std::size_t s = 0; s < slots; ++s)
    metric.stddev[s] = metric.count[s] > 1
                           ? std::sqrt(metric.stddev[s] / static_cast<double>(metric.count[s] - 1))
                           : 0.0;
}

McReport run_mc(const std::function<McTrace(std::uint64_t)>& experiment, std::size_t runs,
                std::uint64_t base_seed) {
  if (runs < 1) throw InvalidArgument("Monte Carlo needs at least one run");
  McReport report;
  for (std::size_t r = 0; r < runs; ++r) {
    const std::uint64_t seed = base_seed + r;
    McTrace trace;
    try {
      trace = experiment(seed);
    } catch (const std::exception& err) {
      report.failures.push_back({r, seed, err.what()});
      continue;
    }
    report.seeds.push_back(seed);
    for (auto& [name, values] : trace) report.metrics[name].traces.push_back(std::move(values));
  }
  for (auto& [name, metric] : report.metrics) aggregate(metric);
  return report;
}

}  // namespace radiotomo
