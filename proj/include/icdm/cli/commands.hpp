#pragma once

#include "icdm/cli/run_config.hpp"

#include <ostream>
#include <string>
#include <vector>

namespace icdm::cli {

enum ExitCode : int { ok = 0, validation_error = 1, runtime_error = 2, check_failed = 3 };

/// Output layout under RunConfig::out:
///
///   manifest.json   one entry per command: config echo, seed, version, wall time
///   config.json     effective configuration of the latest command
///   tasks/          <task_id>.json
///   solutions/      <task_id>.json
///   corpus/         sft.jsonl, dpt.jsonl and their manifests
///   reports/        evaluation and simulation outputs
///
/// Every command reads its inputs from files written by earlier commands.
/// Each returns an ExitCode; messages go to `log`.
int cmd_gen(const RunConfig& config, std::ostream& log);
int cmd_solve(const RunConfig& config, std::ostream& log);
int cmd_export(const RunConfig& config, std::ostream& log);
int cmd_eval(const RunConfig& config, std::ostream& log);
int cmd_theory_sim(const RunConfig& config, std::ostream& log);
int cmd_darkroom(const RunConfig& config, std::ostream& log);

/// Parses the command line (subcommand plus --config, --seed, --out, --jobs,
/// --policy; flags override the config file, which overrides defaults), runs
/// the command and maps exceptions to exit codes: ConfigError and ParseError
/// to 1, other failures to 2.
int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

} // namespace icdm::cli
