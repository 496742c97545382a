#include "commands.hpp"
#include "config.hpp"

#include <radiotomo/error.hpp>

#include <CLI11.hpp>

#include <iostream>

namespace {

enum ExitCode { kOk = 0, kConfig = 2, kNumerical = 3, kIo = 4 };

}  // namespace

int main(int argc, char** argv) {
  namespace cli = radiotomo::cli;

  CLI::App app{"Radio tomographic imaging with variational Bayes and adaptive sensor selection"};
  app.require_subcommand(1, 1);

  std::string config_path;
  std::vector<std::string> overrides;
  std::string out_dir;
  std::uint64_t seed = 0;
  std::string resume;
  std::string method;

  auto add_common = [&](CLI::App* sub) {
    sub->add_option("--config", config_path, "JSON configuration file")->check(CLI::ExistingFile);
    sub->add_option("--set", overrides, "Override a configuration value (key.path=value)")
        ->take_all();
    sub->add_option("--out", out_dir, "Output directory")->required();
    sub->add_option("--seed", seed, "Random seed");
  };

  auto* simulate = app.add_subcommand("simulate", "Synthesize a scene and initial measurements");
  auto* reconstruct = app.add_subcommand("reconstruct", "Reconstruct a loss field from measurements");
  auto* adaptive = app.add_subcommand("adaptive", "Run the adaptive measure-and-reconstruct loop");
  auto* evaluate = app.add_subcommand("evaluate", "Monte Carlo comparison of selection policies");
  for (auto* sub : {simulate, reconstruct, adaptive, evaluate}) add_common(sub);
  reconstruct->add_option("--method", method, "vb, ridge or tv (overrides reconstruct.method)");
  reconstruct->add_option("--resume", resume, "VB checkpoint to continue from")
      ->check(CLI::ExistingFile);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& err) {
    const int code = app.exit(err);
    return code == 0 ? kOk : kConfig;
  }

  try {
    if (!method.empty()) overrides.push_back("reconstruct.method=\"" + method + "\"");
    const cli::ExperimentConfig config = cli::load_config(config_path, overrides);
    if (simulate->parsed())
      cli::cmd_simulate(config, out_dir, seed);
    else if (reconstruct->parsed())
      cli::cmd_reconstruct(config, out_dir, seed, resume);
    else if (adaptive->parsed())
      cli::cmd_adaptive(config, out_dir, seed);
    else
      cli::cmd_evaluate(config, out_dir, seed);
  } catch (const cli::ConfigError& err) {
    std::cerr << "configuration error: " << err.what() << "\n";
    return kConfig;
  } catch (const radiotomo::InvalidArgument& err) {
    std::cerr << "invalid input: " << err.what() << "\n";
    return kConfig;
  } catch (const radiotomo::DivergenceError& err) {
    std::cerr << "VB diverged: " << err.what() << "\n";
    return kNumerical;
  } catch (const radiotomo::NumericalError& err) {
    std::cerr << "numerical failure: " << err.what() << "\n";
    return kNumerical;
  } catch (const radiotomo::IoError& err) {
    std::cerr << "I/O error: " << err.what() << "\n";
    return kIo;
  }
  return kOk;
}
