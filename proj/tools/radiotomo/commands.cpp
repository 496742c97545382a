#include "commands.hpp"

#include <radiotomo/baselines.hpp>
#include <radiotomo/error.hpp>
#include <radiotomo/evaluation.hpp>
#include <radiotomo/io.hpp>
#include <radiotomo/selection.hpp>
#include <radiotomo/synthesis.hpp>
#include <radiotomo/vb.hpp>

#include <cmath>
#include <cstdio>
#include <iostream>
#include <optional>
#include <sstream>

namespace radiotomo::cli {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

// Stream identifiers for derive_seed; each randomized stage draws from its own.
enum Stream : std::uint64_t {
  kSensors = 1,
  kLabels = 2,
  kField = 3,
  kLinks = 4,
  kNoise = 5,
  kPool = 7,
  kPolicy = 8,
  kNmsePairs = 9,
};

struct Truth {
  Scene scene;
  LabelField labels;
  LossField field;
};

Scene configured_scene(const ExperimentConfig& cfg, std::uint64_t sensor_seed) {
  if (!cfg.scene.file.empty()) return read_scene(cfg.scene.file);
  const Grid grid(cfg.scene.nx, cfg.scene.ny, cfg.scene.spacing, cfg.scene.origin);
  return {grid, perimeter_sensors(grid.area(), cfg.scene.sensors, sensor_seed), cfg.scene.lambda};
}

Truth make_truth(const ExperimentConfig& cfg, std::uint64_t seed) {
  Scene scene = configured_scene(cfg, derive_seed(seed, kSensors));
  LabelField z = sample_potts(scene.grid, cfg.scene.potts, cfg.scene.gibbs_sweeps,
                              derive_seed(seed, kLabels));
  LossField f = sample_slf(z, cfg.scene.truth, derive_seed(seed, kField));
  return {std::move(scene), std::move(z), std::move(f)};
}

MeasurementSet initial_measurements(const ExperimentConfig& cfg, const Scene& scene,
                                    const LossField& field, std::uint64_t seed) {
  if (cfg.scene.initial_measurements == 0)
    throw ConfigError("scene.initial_measurements must be positive");
  std::mt19937_64 rng(derive_seed(seed, kLinks));
  const auto links = random_links(cfg.scene.initial_measurements, scene.sensors.size(), rng);
  return synthesize_measurements(field, links, scene.grid, scene.sensors, scene.lambda,
                                 cfg.scene.truth, derive_seed(seed, kNoise));
}

Scene required_scene(const ExperimentConfig& cfg) {
  if (cfg.scene.file.empty())
    throw ConfigError("scene.file is required when measurements come from a file");
  return read_scene(cfg.scene.file);
}

PathlossParams pathloss_for(const ExperimentConfig& cfg) {
  if (cfg.data.calibration.empty()) return cfg.data.pathloss;
  return calibrate_pathloss(read_calibration_csv(cfg.data.calibration));
}

std::vector<LoggedMeasurement> load_log(const ExperimentConfig& cfg, const Scene& scene,
                                        const std::string& path) {
  auto log = read_measurement_log(path, scene.sensors.size());
  if (cfg.data.kind == "raw_gain") {
    const PathlossParams pl = pathloss_for(cfg);
    for (auto& entry : log) {
      const double d = distance(scene.sensors[entry.link.tx], scene.sensors[entry.link.rx]);
      entry.shadowing = calibrated_shadowing(entry.shadowing, d, pl);
    }
  }
  return log;
}

MeasurementSet to_measurements(const Scene& scene, const std::vector<LoggedMeasurement>& log) {
  MeasurementSet data(scene.grid.size(), scene.lambda);
  for (const auto& entry : log)
    data.append(entry.link, weight_vector(entry.link, scene.grid, scene.sensors, scene.lambda),
                entry.shadowing);
  return data;
}

MeasurementSet load_measurements(const ExperimentConfig& cfg, const Scene& scene) {
  if (cfg.data.measurements.empty()) throw ConfigError("data.measurements is required");
  auto data = to_measurements(scene, load_log(cfg, scene, cfg.data.measurements));
  if (data.empty()) throw ConfigError("measurement log " + cfg.data.measurements + " is empty");
  return data;
}

json meta(const ExperimentConfig& cfg, const char* command, std::uint64_t seed, const Grid& grid) {
  return {{"command", command},
          {"seed", seed},
          {"config_hash", config_hash(cfg.source)},
          {"grid", {{"nx", grid.nx()}, {"ny", grid.ny()}, {"spacing", grid.spacing()},
                    {"origin", {grid.origin().x, grid.origin().y}}}},
          {"classes", cfg.scene.potts.classes},
          {"layout", "ny rows of nx values; row b holds sites b*nx .. b*nx+nx-1"}};
}

void write_json(const fs::path& path, const json& j) { write_text(path, j.dump(2) + "\n"); }

json theta_json(const HyperParams& theta) {
  return {{"noise_precision", theta.noise_precision},
          {"class_means", theta.class_means},
          {"class_precisions", theta.class_precisions}};
}

std::string slot_name(std::size_t slot) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "slot_%02zu", slot);
  return buf;
}

std::string pairs_text(const std::vector<Link>& links) {
  std::string out;
  for (std::size_t j = 0; j < links.size(); ++j) {
    if (j) out += ';';
    out += std::to_string(links[j].tx + 1) + "-" + std::to_string(links[j].rx + 1);
  }
  return out;
}

VbOptions vb_options(const ExperimentConfig& cfg, std::uint64_t seed) {
  VbOptions o;
  o.max_iter = cfg.vb.max_iter;
  o.tolerance = cfg.vb.tolerance;
  o.seed = seed;
  return o;
}

std::optional<LabelField> optional_labels(const ExperimentConfig& cfg, const Grid& grid) {
  if (cfg.data.labels.empty()) return std::nullopt;
  return read_label_csv(cfg.data.labels, grid, cfg.scene.potts.classes);
}

}  // namespace

void cmd_simulate(const ExperimentConfig& cfg, const fs::path& out, std::uint64_t seed) {
  const Truth truth = make_truth(cfg, seed);
  const MeasurementSet data = initial_measurements(cfg, truth.scene, truth.field, seed);
  const Grid& grid = truth.scene.grid;

  write_scene(out / "scene.json", truth.scene);
  write_label_csv(out / "labels.csv", grid, truth.labels);
  write_field_csv(out / "field.csv", grid, truth.field);
  write_measurement_log(out / "measurements.csv", data.links(), data.shadowing());
  json m = meta(cfg, "simulate", seed, grid);
  m["measurements"] = data.size();
  m["sensors"] = truth.scene.sensors.size();
  m["config"] = cfg.source;
  write_json(out / "meta.json", m);
  std::cout << "simulate: " << grid.nx() << "x" << grid.ny() << " grid, "
            << truth.scene.sensors.size() << " sensors, " << data.size() << " measurements -> "
            << out.string() << "\n";
}

void cmd_reconstruct(const ExperimentConfig& cfg, const fs::path& out, std::uint64_t seed,
                     const fs::path& resume) {
  const Scene scene = required_scene(cfg);
  const Grid& grid = scene.grid;
  const MeasurementSet data = load_measurements(cfg, scene);
  const auto truth_labels = optional_labels(cfg, grid);
  if (!resume.empty() && cfg.method != "vb")
    throw ConfigError("--resume applies to the vb method only");

  json m = meta(cfg, "reconstruct", seed, grid);
  m["method"] = cfg.method;
  m["measurements"] = data.size();
  json report;
  LossField field;

  if (cfg.method == "vb") {
    const VbModel model(grid, data, cfg.priors, cfg.scene.potts, cfg.vb.scheme);
    VbOptions options = vb_options(cfg, seed);
    const fs::path checkpoint_path = out / "checkpoint.txt";
    if (cfg.vb.checkpoint_every > 0) {
      options.on_iteration = [&](const VbCheckpoint& cp) {
        if (cp.iteration % cfg.vb.checkpoint_every == 0) write_checkpoint(checkpoint_path, cp);
      };
    }
    VbResult result = resume.empty() ? run_vb(model, options)
                                     : run_vb(model, options, read_checkpoint(resume));
    write_checkpoint(checkpoint_path, result.final);
    field = result.estimates.f_mmse;
    write_label_csv(out / "labels.csv", grid, result.estimates.z_map);
    write_json(out / "theta.json", theta_json(result.estimates.theta_mmse));
    std::string trace = "iteration,elbo\n";
    for (std::size_t j = 0; j < result.final.elbo_trace.size(); ++j)
      trace += std::to_string(j) + "," + format_double(result.final.elbo_trace[j]) + "\n";
    write_text(out / "elbo.csv", trace);
    report["iterations"] = result.final.iteration;
    report["converged"] = result.final.converged;
    report["elbo_final"] = result.final.elbo_trace.back();
    if (truth_labels) report["labeling_error"] = labeling_error(*truth_labels, result.estimates.z_map);
  } else if (cfg.method == "ridge") {
    RidgeConfig rc;
    rc.reg_weight = cfg.ridge.reg_weight;
    if (cfg.ridge.covariance == "exp_kernel")
      rc.covariance = exp_kernel_covariance(grid, cfg.ridge.sigma_s2, cfg.ridge.kappa);
    field = ridge_ls(data, rc);
  } else {
    const TvResult tv = tv_ls(data, grid, cfg.tv);
    field = tv.field;
    std::string trace = "iteration,objective\n";
    for (std::size_t j = 0; j < tv.objective.size(); ++j)
      trace += std::to_string(j) + "," + format_double(tv.objective[j]) + "\n";
    write_text(out / "objective.csv", trace);
    report["iterations"] = tv.iterations;
    report["converged"] = tv.converged;
    if (!tv.converged) std::cerr << "warning: TV solver stopped at max_iter; best iterate kept\n";
  }

  write_field_csv(out / "field.csv", grid, field);
  if (!cfg.data.field.empty()) {
    const LossField truth = read_field_csv(cfg.data.field, grid);
    report["nmse"] = nmse(field_shadow(grid, truth, scene.lambda),
                          field_shadow(grid, field, scene.lambda), grid.area(),
                          cfg.evaluation.nmse_pairs, derive_seed(seed, kNmsePairs));
  }
  m["report"] = report;
  write_json(out / "meta.json", m);
  std::cout << "reconstruct (" << cfg.method << "): " << data.size() << " measurements -> "
            << out.string() << "\n";
}

void cmd_adaptive(const ExperimentConfig& cfg, const fs::path& out, std::uint64_t seed) {
  std::optional<Truth> truth;
  std::optional<Scene> scene;
  std::optional<MeasurementSet> initial;
  std::unique_ptr<MeasurementSource> source;
  SyntheticSource* synthetic = nullptr;

  if (cfg.data.measurements.empty()) {
    if (cfg.selection.source == "log")
      throw ConfigError("selection.source=log needs data.measurements and data.pool_log");
    truth = make_truth(cfg, seed);
    scene = truth->scene;
    initial = initial_measurements(cfg, *scene, truth->field, seed);
  } else {
    scene = required_scene(cfg);
    initial = load_measurements(cfg, *scene);
  }
  const Grid& grid = scene->grid;

  if (cfg.selection.source == "synthetic") {
    LossField field;
    if (truth) {
      field = truth->field;
    } else {
      if (cfg.data.field.empty())
        throw ConfigError("synthetic acquisition from a measurement file needs data.field");
      field = read_field_csv(cfg.data.field, grid);
    }
    auto s = std::make_unique<SyntheticSource>(grid, scene->sensors, scene->lambda, field,
                                               cfg.scene.truth.noise_precision,
                                               cfg.selection.pool_size, derive_seed(seed, kPool));
    synthetic = s.get();
    source = std::move(s);
  } else {
    if (cfg.data.pool_log.empty()) throw ConfigError("selection.source=log needs data.pool_log");
    source = std::make_unique<LoggedSource>(grid, scene->sensors, scene->lambda,
                                            load_log(cfg, *scene, cfg.data.pool_log),
                                            cfg.selection.pool_size, derive_seed(seed, kPool));
  }

  std::optional<LabelField> labels;
  if (truth)
    labels = truth->labels;
  else
    labels = optional_labels(cfg, grid);

  AdaptiveSchedule schedule;
  schedule.slots = cfg.selection.slots;
  schedule.pool_size = cfg.selection.pool_size;
  schedule.batch = cfg.selection.batch;
  schedule.mode = cfg.selection.mode;
  schedule.seed = derive_seed(seed, kPolicy);

  const Trajectory traj =
      run_adaptive(grid, std::move(*initial), cfg.priors, cfg.scene.potts, *source, schedule,
                   vb_options(cfg, seed), cfg.vb.scheme, labels ? &*labels : nullptr);

  std::string csv = "tau,t,elbo_final,labeling_error,selected_pairs\n";
  for (const SlotRecord& r : traj.slots) {
    csv += std::to_string(r.slot) + "," + std::to_string(r.measurements) + "," +
           format_double(r.elbo_final) + "," +
           (std::isnan(r.labeling_error) ? std::string() : format_double(r.labeling_error)) + "," +
           pairs_text(r.selected) + "\n";
    write_field_csv(out / "slots" / (slot_name(r.slot) + "_field.csv"), grid, r.estimates.f_mmse);
    write_label_csv(out / "slots" / (slot_name(r.slot) + "_labels.csv"), grid, r.estimates.z_map);
  }
  write_text(out / "trajectory.csv", csv);
  write_field_csv(out / "field.csv", grid, traj.slots.back().estimates.f_mmse);
  write_label_csv(out / "labels.csv", grid, traj.slots.back().estimates.z_map);
  write_json(out / "theta.json", theta_json(traj.slots.back().estimates.theta_mmse));
  write_measurement_log(out / "measurements.csv", traj.data.links(), traj.data.shadowing());
  if (truth) {
    write_scene(out / "scene.json", truth->scene);
    write_label_csv(out / "truth_labels.csv", grid, truth->labels);
    write_field_csv(out / "truth_field.csv", grid, truth->field);
  }

  json m = meta(cfg, "adaptive", seed, grid);
  m["mode"] = cfg.selection.mode == SelectionMode::kAdaptive ? "adaptive" : "random";
  m["source"] = cfg.selection.source;
  m["status"] = traj.status == AdaptiveStatus::kCompleted ? "completed" : "pool_exhausted";
  m["slots_run"] = traj.slots.size();
  m["synthesis_calls"] = synthetic ? synthetic->synthesis_calls() : 0;
  write_json(out / "meta.json", m);
  std::cout << "adaptive: " << traj.slots.size() << " reconstructions, final t = "
            << traj.data.size() << " (" << m["status"].get<std::string>() << ") -> "
            << out.string() << "\n";
}

void cmd_evaluate(const ExperimentConfig& cfg, const fs::path& out, std::uint64_t seed) {
  const Truth base = make_truth(cfg, seed);
  const bool redeploy = cfg.evaluation.resampling == "deployment";

  auto experiment = [&](std::uint64_t run_seed) {
    Scene scene = base.scene;
    if (redeploy) {
      if (!cfg.scene.file.empty())
        throw ConfigError("evaluation.resampling=deployment cannot redeploy a scene file");
      scene.sensors = perimeter_sensors(scene.grid.area(), cfg.scene.sensors,
                                        derive_seed(run_seed, kSensors));
    }
    const Grid& grid = scene.grid;
    const auto pairs = sample_boundary_pairs(grid.area(), cfg.evaluation.nmse_pairs,
                                             derive_seed(run_seed, kNmsePairs));
    const ShadowFn truth_shadow = field_shadow(grid, base.field, scene.lambda);

    McTrace trace;
    for (const std::string& policy : cfg.evaluation.policies) {
      SyntheticSource source(grid, scene.sensors, scene.lambda, base.field,
                             cfg.scene.truth.noise_precision, cfg.selection.pool_size,
                             derive_seed(run_seed, kPool));
      AdaptiveSchedule schedule;
      schedule.slots = cfg.selection.slots;
      schedule.pool_size = cfg.selection.pool_size;
      schedule.batch = cfg.selection.batch;
      schedule.mode = policy == "adaptive" ? SelectionMode::kAdaptive : SelectionMode::kRandom;
      schedule.seed = derive_seed(run_seed, kPolicy);
      const Trajectory traj =
          run_adaptive(grid, initial_measurements(cfg, scene, base.field, run_seed), cfg.priors,
                       cfg.scene.potts, source, schedule, vb_options(cfg, run_seed),
                       cfg.vb.scheme, &base.labels);
      auto& err = trace[policy + ".labeling_error"];
      auto& nm = trace[policy + ".nmse"];
      for (const SlotRecord& r : traj.slots) {
        err.push_back(r.labeling_error);
        nm.push_back(nmse(truth_shadow, field_shadow(grid, r.estimates.f_mmse, scene.lambda), pairs));
      }
    }
    return trace;
  };

  const McReport report = run_mc(experiment, cfg.evaluation.runs, seed);

  std::string summary_csv = "metric,slot,mean,std,count\n";
  std::string runs_csv = "metric,run_seed,slot,value\n";
  json finals = json::object();
  for (const auto& [name, metric] : report.metrics) {
    for (std::size_t s = 0; s < metric.mean.size(); ++s)
      summary_csv += name + "," + std::to_string(s) + "," + format_double(metric.mean[s]) + "," +
                     format_double(metric.stddev[s]) + "," + std::to_string(metric.count[s]) + "\n";
    for (std::size_t r = 0; r < metric.traces.size(); ++r)
      for (std::size_t s = 0; s < metric.traces[r].size(); ++s)
        runs_csv += name + "," + std::to_string(report.seeds[r]) + "," + std::to_string(s) + "," +
                    format_double(metric.traces[r][s]) + "\n";
    if (!metric.mean.empty())
      finals[name] = {{"mean", metric.mean.back()}, {"std", metric.stddev.back()}};
  }
  write_text(out / "report.csv", summary_csv);
  write_text(out / "runs.csv", runs_csv);

  json m = meta(cfg, "evaluate", seed, base.scene.grid);
  m["runs"] = cfg.evaluation.runs;
  m["resampling"] = cfg.evaluation.resampling;
  m["succeeded"] = report.seeds.size();
  json failures = json::array();
  for (const auto& f : report.failures)
    failures.push_back({{"run", f.run}, {"seed", f.seed}, {"message", f.message}});
  m["failures"] = failures;
  m["final_slot"] = finals;
  write_json(out / "summary.json", m);

  std::cout << "evaluate: " << report.seeds.size() << "/" << cfg.evaluation.runs
            << " runs succeeded -> " << out.string() << "\n";
  for (const auto& [name, stats] : finals.items())
    std::cout << "  " << name << " final mean " << stats["mean"].get<double>() << " (std "
              << stats["std"].get<double>() << ")\n";
  for (const auto& f : report.failures)
    std::cerr << "run " << f.run << " (seed " << f.seed << ") failed: " << f.message << "\n";
  if (report.seeds.empty()) throw NumericalError("every Monte Carlo run failed");
}

}  // namespace radiotomo::cli
