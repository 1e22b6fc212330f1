#pragma once

#include <iosfwd>
#include <string>
#include <vector>

#include <agepde/experiments.hpp>

#include "config.hpp"

namespace agepde::cli {

enum ExitCode : int { kSuccess = 0, kCheckFailed = 1, kUsage = 2, kNumerical = 3 };

const std::vector<std::string>& subcommands();

/// Subcommand -> experiment id it runs ("solve" and "constants" have none).
std::string experiment_for(const std::string& subcommand);

ModelSpec build_model(const RunConfig& c);
Scenario build_scenario(const RunConfig& c);
MmsConfig build_mms(const RunConfig& c);
DecayConfig build_decay(const RunConfig& c);
BackwardConfig build_backward(const RunConfig& c);
SuiteConfig build_suite(const RunConfig& c);
EpidemicConfig build_epidemic(const RunConfig& c);
TraceConfig build_trace(const RunConfig& c);

/// Parses the config, runs the subcommand, writes artifacts under [output].dir and
/// prints a one-line summary to `out`. Errors go to `err`. Returns the exit code.
int dispatch(const std::string& subcommand, const std::string& config_path, const std::vector<std::string>& overrides,
             std::ostream& out, std::ostream& err);

}  // namespace agepde::cli
