#pragma once

#include <ostream>
#include <string>
#include <vector>

#include "config.hpp"

namespace dioph::cli {

enum ExitCode : int { ok = 0, config_error = 2, construction_error = 3, io_error = 4 };

const std::vector<std::string>& pipelines();

/// Runs one pipeline and writes report.json, audit.csv and the optional
/// artifacts into cfg.output.directory. Progress goes to `log`, diagnostics
/// to `err`. Failed hard assertions yield construction_error after the
/// artifacts are written.
int run(const ExperimentConfig& cfg, const std::string& pipeline, std::ostream& log,
        std::ostream& err, bool quiet = false);

/// Command-line entry point.
int run_cli(int argc, const char* const* argv, std::ostream& log, std::ostream& err);

}  // namespace dioph::cli
