#pragma once

#include <string>
#include <vector>

#include <json.hpp>

#include "config.hpp"

namespace cofreq::cli {

struct CheckRecord {
  std::string name;
  bool pass = false;
  double measured = 0.0;
  std::string comparison;
  double tolerance = 0.0;
  nlohmann::json info = nlohmann::json::object();
};

struct RunReport {
  std::string command;
  unsigned long seed = 0;
  nlohmann::json config;
  std::vector<CheckRecord> checks;
  std::vector<std::string> artifacts;  // file names relative to the output directory

  bool pass() const;
  nlohmann::json to_json() const;
};

const std::vector<std::string> &command_names();

/// Runs one subcommand, writing artifacts and report.json into `out_dir`.
/// Throws ConfigError for configurations the command cannot use.
RunReport run_command(const std::string &command, const ExperimentConfig &cfg, const std::string &out_dir,
                      unsigned long seed);

}  // namespace cofreq::cli
