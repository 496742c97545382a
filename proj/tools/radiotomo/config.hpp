#pragma once

#include <radiotomo/baselines.hpp>
#include <radiotomo/geometry.hpp>
#include <radiotomo/selection.hpp>
#include <radiotomo/synthesis.hpp>
#include <radiotomo/vb.hpp>

#include <json.hpp>

#include <cstdint>
#include <filesystem>
#include <stdexcept>
#include <string>
#include <vector>

namespace radiotomo::cli {

/// Invalid or inconsistent configuration (exit code 2).
class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct SceneConfig {
  std::string file;  ///< scene JSON; when set it replaces grid, sensors and lambda
  std::size_t nx = 60;
  std::size_t ny = 60;
  double spacing = 1.0;
  Point origin{1.0, 1.0};
  std::size_t sensors = 200;
  double lambda = 0.39;
  PottsParams potts;
  HyperParams truth;
  int gibbs_sweeps = 500;
  std::size_t initial_measurements = 800;
};

struct DataConfig {
  std::string measurements;  ///< measurement log (input of reconstruct/adaptive)
  std::string labels;        ///< ground-truth labels, for metrics
  std::string field;         ///< ground-truth loss field, for metrics and synthetic acquisition
  std::string pool_log;      ///< log replayed by the "log" acquisition source
  std::string kind = "shadowing";  ///< "shadowing" or "raw_gain"
  std::string calibration;         ///< distance,gain CSV fitted when kind is raw_gain
  PathlossParams pathloss{0.0, 0.0};
};

struct VbConfig {
  int max_iter = 3000;
  double tolerance = 1e-6;
  UpdateScheme scheme = UpdateScheme::kCoordinateAscent;
  int checkpoint_every = 0;
};

struct SelectionConfig {
  std::size_t slots = 8;
  std::size_t pool_size = 200;
  std::size_t batch = 100;
  SelectionMode mode = SelectionMode::kAdaptive;
  std::string source = "synthetic";  ///< "synthetic" or "log"
};

struct RidgeSettings {
  double reg_weight = 0.015;
  std::string covariance = "identity";  ///< or "exp_kernel"
  double sigma_s2 = 1.0;
  double kappa = 1.0;
};

struct EvaluationConfig {
  std::size_t runs = 20;
  std::size_t nmse_pairs = 500;
  std::string resampling = "noise";  ///< "noise" or "deployment"
  std::vector<std::string> policies{"adaptive", "random"};
};

struct ExperimentConfig {
  SceneConfig scene;
  DataConfig data;
  HyperPriors priors;
  VbConfig vb;
  SelectionConfig selection;
  RidgeSettings ridge;
  TvConfig tv;
  EvaluationConfig evaluation;
  std::string method = "vb";  ///< reconstruct method: vb, ridge or tv

  nlohmann::json source;  ///< merged JSON the fields were read from
};

/// Built-in defaults, mirroring the full-scale synthetic setup.
nlohmann::json default_config();

/// Applies `key.path=value` overrides. The value is parsed as JSON when
/// possible and taken as a string otherwise.
void apply_override(nlohmann::json& config, const std::string& assignment);

/// Reads `path` (empty: defaults only), merges it over the defaults, applies
/// the overrides and validates everything. Throws ConfigError.
ExperimentConfig load_config(const std::filesystem::path& path,
                             const std::vector<std::string>& overrides);

/// Parses and validates a merged configuration document.
ExperimentConfig parse_config(const nlohmann::json& merged);

/// FNV-1a hash of the canonical JSON dump, as 16 hex digits.
std::string config_hash(const nlohmann::json& config);

}  // namespace radiotomo::cli
