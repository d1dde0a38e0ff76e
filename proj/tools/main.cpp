#include <iostream>
#include <memory>

#include <CLI11.hpp>
#include <tbb/global_control.h>

#include "commands.hpp"
#include "config.hpp"

using namespace cofreq::cli;

// Exit status: 0 all checks pass, 1 a check failed, 2 bad configuration or arguments, 3 runtime error.
int main(int argc, char **argv) {
  CLI::App app{"cofreq: frequency, singular set and flattening experiments"};
  app.require_subcommand(1);
  std::string config_path, out_dir = "out";
  unsigned long seed = 1;
  int jobs = 0;
  app.add_option("--config", config_path, "YAML experiment config (defaults when omitted)");
  app.add_option("--out", out_dir, "output directory");
  app.add_option("--seed", seed, "random seed");
  app.add_option("--jobs", jobs, "worker threads, 0 for all cores")->check(CLI::NonNegativeNumber);
  for (const auto &name : command_names()) app.add_subcommand(name);
  app.fallthrough();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError &e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }
  std::unique_ptr<tbb::global_control> limit;
  if (jobs > 0) limit = std::make_unique<tbb::global_control>(tbb::global_control::max_allowed_parallelism, jobs);

  const std::string command = app.get_subcommands().front()->get_name();
  try {
    const ExperimentConfig cfg = config_path.empty() ? ExperimentConfig{} : load_config(config_path);
    const RunReport report = run_command(command, cfg, out_dir, seed);
    for (const auto &c : report.checks)
      std::cout << (c.pass ? "PASS " : "FAIL ") << c.name << ": " << c.measured << " " << c.comparison << " "
                << c.tolerance << "\n";
    std::cout << "report: " << out_dir << "/report.json\n";
    return report.pass() ? 0 : 1;
  } catch (const ConfigError &e) {
    std::cerr << (config_path.empty() ? "config" : config_path) << ": " << e.what() << "\n";
    return 2;
  } catch (const std::exception &e) {
    std::cerr << "error: " << e.what() << "\n";
    return 3;
  }
}
