#include "config.hpp"

#include <radiotomo/error.hpp>
#include <radiotomo/io.hpp>

#include <cstdio>

namespace radiotomo::cli {

using nlohmann::json;

json default_config() {
  return json::parse(R"({
    "scene": {
      "file": "",
      "grid": {"nx": 60, "ny": 60, "spacing": 1.0, "origin": [1.0, 1.0]},
      "sensors": 200,
      "lambda": 0.39,
      "beta": 1.5,
      "classes": 4,
      "class_means": [0.0, 1.0, 2.5, 5.5],
      "class_precisions": [10.0, 10.0, 2.0, 2.0],
      "noise_precision": 20.0,
      "gibbs_sweeps": 500,
      "initial_measurements": 800
    },
    "data": {
      "measurements": "",
      "labels": "",
      "field": "",
      "pool_log": "",
      "kind": "shadowing",
      "calibration": "",
      "pathloss": {"g0": 0.0, "gamma": 0.0}
    },
    "priors": {
      "a_nu": 1300.0,
      "b_nu": 2.0,
      "m": [0.0, 0.9, 2.7, 5.3],
      "sigma2": [1e-4, 1e-4, 1e-4, 1e-4],
      "a": [0.8, 0.8, 0.8, 0.8],
      "b": [1.0, 1.0, 0.5, 0.5]
    },
    "vb": {"max_iter": 3000, "tolerance": 1e-6, "scheme": "coordinate_ascent", "checkpoint_every": 0},
    "selection": {"slots": 8, "pool_size": 200, "batch": 100, "mode": "adaptive", "source": "synthetic"},
    "baselines": {
      "ridge": {"reg_weight": 0.015, "covariance": "identity", "sigma_s2": 1.0, "kappa": 1.0},
      "tv": {"reg_weight": 1e-11, "tolerance": 1e-8, "max_iter": 200, "epsilon": 1e-8}
    },
    "evaluation": {"runs": 20, "nmse_pairs": 500, "resampling": "noise", "policies": ["adaptive", "random"]},
    "reconstruct": {"method": "vb"}
  })");
}

namespace {

void merge_into(json& base, const json& patch, const std::string& where) {
  if (!patch.is_object()) throw ConfigError(where + ": expected an object");
  for (const auto& [key, value] : patch.items()) {
    const std::string path = where.empty() ? key : where + "." + key;
    if (!base.contains(key)) throw ConfigError("unknown configuration key '" + path + "'");
    if (base[key].is_object())
      merge_into(base[key], value, path);
    else
      base[key] = value;
  }
}

template <typename T>
T get(const json& j, const char* key, const std::string& where) {
  try {
    return j.at(key).get<T>();
  } catch (const json::exception&) {
    throw ConfigError("configuration value '" + where + "." + key + "' has the wrong type");
  }
}

std::size_t get_count(const json& j, const char* key, const std::string& where) {
  const json& v = j.at(key);
  if (!v.is_number_unsigned())
    throw ConfigError("configuration value '" + where + "." + key +
                      "' must be a nonnegative integer");
  return v.get<std::size_t>();
}

void require(bool ok, const std::string& message) {
  if (!ok) throw ConfigError(message);
}

template <typename T>
std::vector<T> get_vector(const json& j, const char* key, const std::string& where) {
  return get<std::vector<T>>(j, key, where);
}

}  // namespace

void apply_override(json& config, const std::string& assignment) {
  const auto eq = assignment.find('=');
  if (eq == std::string::npos || eq == 0)
    throw ConfigError("override '" + assignment + "' is not of the form key=value");
  const std::string key = assignment.substr(0, eq);
  const std::string text = assignment.substr(eq + 1);
  json value;
  try {
    value = json::parse(text);
  } catch (const json::parse_error&) {
    value = text;
  }
  json* node = &config;
  std::size_t start = 0;
  while (true) {
    const auto dot = key.find('.', start);
    const std::string part = key.substr(start, dot == std::string::npos ? std::string::npos : dot - start);
    if (!node->is_object() || !node->contains(part))
      throw ConfigError("unknown configuration key '" + key + "'");
    node = &(*node)[part];
    if (dot == std::string::npos) break;
    start = dot + 1;
  }
  if (node->is_object()) throw ConfigError("cannot override section '" + key + "' with a value");
  *node = value;
}

std::string config_hash(const json& config) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : config.dump()) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

ExperimentConfig parse_config(const json& merged) {
  ExperimentConfig cfg;
  cfg.source = merged;

  const json& sc = merged.at("scene");
  SceneConfig& scene = cfg.scene;
  scene.file = get<std::string>(sc, "file", "scene");
  const json& grid = sc.at("grid");
  scene.nx = get_count(grid, "nx", "scene.grid");
  scene.ny = get_count(grid, "ny", "scene.grid");
  scene.spacing = get<double>(grid, "spacing", "scene.grid");
  const auto origin = get_vector<double>(grid, "origin", "scene.grid");
  require(origin.size() == 2, "scene.grid.origin must have two coordinates");
  scene.origin = {origin[0], origin[1]};
  require(scene.nx > 0 && scene.ny > 0, "scene.grid.nx and ny must be positive");
  require(scene.spacing > 0.0, "scene.grid.spacing must be positive");
  scene.sensors = get_count(sc, "sensors", "scene");
  require(scene.sensors >= 2, "scene.sensors must be at least 2");
  scene.lambda = get<double>(sc, "lambda", "scene");
  require(scene.lambda > 0.0, "scene.lambda must be positive");
  scene.potts.beta = get<double>(sc, "beta", "scene");
  scene.potts.classes = get<int>(sc, "classes", "scene");
  scene.truth.class_means = get_vector<double>(sc, "class_means", "scene");
  scene.truth.class_precisions = get_vector<double>(sc, "class_precisions", "scene");
  scene.truth.noise_precision = get<double>(sc, "noise_precision", "scene");
  scene.gibbs_sweeps = get<int>(sc, "gibbs_sweeps", "scene");
  require(scene.gibbs_sweeps >= 1, "scene.gibbs_sweeps must be at least 1");
  scene.initial_measurements = get_count(sc, "initial_measurements", "scene");

  const json& d = merged.at("data");
  DataConfig& data = cfg.data;
  data.measurements = get<std::string>(d, "measurements", "data");
  data.labels = get<std::string>(d, "labels", "data");
  data.field = get<std::string>(d, "field", "data");
  data.pool_log = get<std::string>(d, "pool_log", "data");
  data.kind = get<std::string>(d, "kind", "data");
  require(data.kind == "shadowing" || data.kind == "raw_gain",
          "data.kind must be 'shadowing' or 'raw_gain'");
  data.calibration = get<std::string>(d, "calibration", "data");
  data.pathloss.g0 = get<double>(d.at("pathloss"), "g0", "data.pathloss");
  data.pathloss.gamma = get<double>(d.at("pathloss"), "gamma", "data.pathloss");
  require(data.pathloss.gamma >= 0.0, "data.pathloss.gamma must be nonnegative");

  const json& p = merged.at("priors");
  cfg.priors.a_nu = get<double>(p, "a_nu", "priors");
  cfg.priors.b_nu = get<double>(p, "b_nu", "priors");
  cfg.priors.m = get_vector<double>(p, "m", "priors");
  cfg.priors.sigma2 = get_vector<double>(p, "sigma2", "priors");
  cfg.priors.a = get_vector<double>(p, "a", "priors");
  cfg.priors.b = get_vector<double>(p, "b", "priors");

  const json& v = merged.at("vb");
  cfg.vb.max_iter = get<int>(v, "max_iter", "vb");
  cfg.vb.tolerance = get<double>(v, "tolerance", "vb");
  require(cfg.vb.max_iter >= 1, "vb.max_iter must be at least 1");
  require(cfg.vb.tolerance > 0.0, "vb.tolerance must be positive");
  const auto scheme = get<std::string>(v, "scheme", "vb");
  if (scheme == "coordinate_ascent")
    cfg.vb.scheme = UpdateScheme::kCoordinateAscent;
  else if (scheme == "published")
    cfg.vb.scheme = UpdateScheme::kPublished;
  else
    throw ConfigError("vb.scheme must be 'coordinate_ascent' or 'published'");
  cfg.vb.checkpoint_every = get<int>(v, "checkpoint_every", "vb");
  require(cfg.vb.checkpoint_every >= 0, "vb.checkpoint_every must be nonnegative");

  const json& s = merged.at("selection");
  cfg.selection.slots = get_count(s, "slots", "selection");
  cfg.selection.pool_size = get_count(s, "pool_size", "selection");
  cfg.selection.batch = get_count(s, "batch", "selection");
  require(cfg.selection.pool_size >= 1, "selection.pool_size must be at least 1");
  require(cfg.selection.batch >= 1 && cfg.selection.batch <= cfg.selection.pool_size,
          "selection.batch must lie in [1, selection.pool_size]");
  const auto mode = get<std::string>(s, "mode", "selection");
  if (mode == "adaptive")
    cfg.selection.mode = SelectionMode::kAdaptive;
  else if (mode == "random")
    cfg.selection.mode = SelectionMode::kRandom;
  else
    throw ConfigError("selection.mode must be 'adaptive' or 'random'");
  cfg.selection.source = get<std::string>(s, "source", "selection");
  require(cfg.selection.source == "synthetic" || cfg.selection.source == "log",
          "selection.source must be 'synthetic' or 'log'");

  const json& r = merged.at("baselines").at("ridge");
  cfg.ridge.reg_weight = get<double>(r, "reg_weight", "baselines.ridge");
  cfg.ridge.covariance = get<std::string>(r, "covariance", "baselines.ridge");
  cfg.ridge.sigma_s2 = get<double>(r, "sigma_s2", "baselines.ridge");
  cfg.ridge.kappa = get<double>(r, "kappa", "baselines.ridge");
  require(cfg.ridge.reg_weight >= 0.0, "baselines.ridge.reg_weight must be nonnegative");
  require(cfg.ridge.covariance == "identity" || cfg.ridge.covariance == "exp_kernel",
          "baselines.ridge.covariance must be 'identity' or 'exp_kernel'");
  require(cfg.ridge.sigma_s2 > 0.0 && cfg.ridge.kappa > 0.0,
          "baselines.ridge.sigma_s2 and kappa must be positive");
  const json& t = merged.at("baselines").at("tv");
  cfg.tv.reg_weight = get<double>(t, "reg_weight", "baselines.tv");
  cfg.tv.tolerance = get<double>(t, "tolerance", "baselines.tv");
  cfg.tv.max_iter = get<int>(t, "max_iter", "baselines.tv");
  cfg.tv.epsilon = get<double>(t, "epsilon", "baselines.tv");
  require(cfg.tv.reg_weight >= 0.0, "baselines.tv.reg_weight must be nonnegative");
  require(cfg.tv.tolerance > 0.0 && cfg.tv.epsilon > 0.0,
          "baselines.tv.tolerance and epsilon must be positive");
  require(cfg.tv.max_iter >= 1, "baselines.tv.max_iter must be at least 1");

  const json& e = merged.at("evaluation");
  cfg.evaluation.runs = get_count(e, "runs", "evaluation");
  cfg.evaluation.nmse_pairs = get_count(e, "nmse_pairs", "evaluation");
  cfg.evaluation.resampling = get<std::string>(e, "resampling", "evaluation");
  cfg.evaluation.policies = get_vector<std::string>(e, "policies", "evaluation");
  require(cfg.evaluation.runs >= 1, "evaluation.runs must be at least 1");
  require(cfg.evaluation.nmse_pairs >= 1, "evaluation.nmse_pairs must be at least 1");
  require(cfg.evaluation.resampling == "noise" || cfg.evaluation.resampling == "deployment",
          "evaluation.resampling must be 'noise' or 'deployment'");
  require(!cfg.evaluation.policies.empty(), "evaluation.policies must not be empty");
  for (const auto& policy : cfg.evaluation.policies)
    require(policy == "adaptive" || policy == "random",
            "evaluation.policies entries must be 'adaptive' or 'random'");

  cfg.method = get<std::string>(merged.at("reconstruct"), "method", "reconstruct");
  require(cfg.method == "vb" || cfg.method == "ridge" || cfg.method == "tv",
          "unknown reconstruction method '" + cfg.method + "' (expected vb, ridge or tv)");

  // Cross-checks against the types the pipeline will build.
  try {
    scene.potts.validate();
    scene.truth.validate();
    cfg.priors.validate();
  } catch (const InvalidArgument& err) {
    throw ConfigError(err.what());
  }
  const auto K = static_cast<std::size_t>(scene.potts.classes);
  require(scene.truth.classes() == K,
          "scene.class_means and class_precisions must have scene.classes entries");
  require(cfg.priors.classes() == K, "priors must have scene.classes entries");
  for (const std::string* file : {&scene.file, &data.measurements, &data.labels, &data.field,
                                  &data.pool_log, &data.calibration})
    require(file->empty() || std::filesystem::exists(*file),
            "referenced file '" + *file + "' does not exist");
  return cfg;
}

ExperimentConfig load_config(const std::filesystem::path& path,
                             const std::vector<std::string>& overrides) {
  json merged = default_config();
  if (!path.empty()) {
    json user;
    try {
      user = json::parse(read_text(path));
    } catch (const json::parse_error& err) {
      throw ConfigError(path.string() + ": " + err.what());
    }
    merge_into(merged, user, "");
  }
  for (const auto& o : overrides) apply_override(merged, o);
  return parse_config(merged);
}

}  // namespace radiotomo::cli
