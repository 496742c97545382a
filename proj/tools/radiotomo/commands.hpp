#pragma once

#include "config.hpp"

#include <cstdint>
#include <filesystem>
#include <string>

namespace radiotomo::cli {

/// Synthesizes a scene: labels, loss field, sensors and initial measurements.
void cmd_simulate(const ExperimentConfig& config, const std::filesystem::path& out,
                  std::uint64_t seed);

/// Reconstructs from a measurement log with config.method. `resume` names a
/// VB checkpoint to continue from (vb only; empty for a fresh run).
void cmd_reconstruct(const ExperimentConfig& config, const std::filesystem::path& out,
                     std::uint64_t seed, const std::filesystem::path& resume);

/// Runs the measure-and-reconstruct loop and writes its trajectory.
void cmd_adaptive(const ExperimentConfig& config, const std::filesystem::path& out,
                  std::uint64_t seed);

/// Monte Carlo comparison of the configured policies on synthetic scenes.
void cmd_evaluate(const ExperimentConfig& config, const std::filesystem::path& out,
                  std::uint64_t seed);

}  // namespace radiotomo::cli
