#pragma once

#include "smallpar/cli/config.hpp"
#include "smallpar/cli/output.hpp"

#include <optional>
#include <ostream>
#include <string>
#include <vector>

namespace smallpar::cli {

enum ExitCode : int { kHolds = 0, kUsageError = 1, kFails = 2, kInconclusive = 3 };

int exit_code(Verdict v);

struct CommandResult {
  Table table;
  std::vector<std::string> comments;
  std::string verdict;
  int exit_code = kHolds;
  std::optional<Plot> plot;
};

/// Runs one analysis command ("check" takes A0, A1, A2 or A3 as `condition`).
/// ConfigError propagates; numerical failures become verdicts.
CommandResult run_command(const std::string& command, const std::string& condition,
                          const RunConfig& cfg);

/// Text description of a system: components, Jacobian, divergence,
/// parameters and convention notes.
void describe_system(std::ostream& out, const SystemDef& sys, const std::string& summary = {},
                     const std::string& notes = {});

}  // namespace smallpar::cli
