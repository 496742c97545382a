#pragma once

#include "radiotomo/geometry.hpp"
#include "radiotomo/selection.hpp"
#include "radiotomo/synthesis.hpp"
#include "radiotomo/vb.hpp"

#include <filesystem>
#include <span>
#include <string>
#include <vector>

namespace radiotomo {

/// Shortest decimal text that parses back to exactly `value`.
std::string format_double(double value);
/// Parses a complete decimal number; throws IoError otherwise.
double parse_double(std::string_view text);

struct Scene {
  Grid grid;
  SensorSet sensors;
  double lambda;
};

/// `{"grid": {"nx", "ny", "spacing", "origin": [x, y]}, "sensors": [[x, y], ...],
/// "lambda": l}`.
Scene read_scene(const std::filesystem::path& path);
void write_scene(const std::filesystem::path& path, const Scene& scene);

/// Grid values as ny lines of nx comma-separated numbers; line b holds
/// sites b * nx .. b * nx + nx - 1.
void write_field_csv(const std::filesystem::path& path, const Grid& grid,
                     std::span<const double> values);
std::vector<double> read_field_csv(const std::filesystem::path& path, const Grid& grid);

/// Same layout for labels, stored 1-based.
void write_label_csv(const std::filesystem::path& path, const Grid& grid,
                     std::span<const int> labels);
/// Returns 0-based labels; every stored value must lie in 1..classes.
LabelField read_label_csv(const std::filesystem::path& path, const Grid& grid, int classes);

/// CSV with header `tau,n,n_prime,value` and 1-based tau and sensor indices.
void write_measurement_log(const std::filesystem::path& path, std::span<const Link> links,
                           std::span<const double> values);
/// Parses a measurement log. Sensor indices are checked against `sensors`.
/// Errors name the offending line.
std::vector<LoggedMeasurement> read_measurement_log(const std::filesystem::path& path,
                                                    std::size_t sensors);

/// Rows of `distance,gain` for the pathloss calibration fit.
std::vector<std::pair<double, double>> read_calibration_csv(const std::filesystem::path& path);

/// One JSON header line, then one CSV block per variational array.
void write_checkpoint(const std::filesystem::path& path, const VbCheckpoint& checkpoint);
VbCheckpoint read_checkpoint(const std::filesystem::path& path);

/// Writes text to a file, creating parent directories. Throws IoError.
void write_text(const std::filesystem::path& path, const std::string& text);
std::string read_text(const std::filesystem::path& path);

}  // namespace radiotomo
