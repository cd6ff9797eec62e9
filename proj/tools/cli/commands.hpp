#pragma once

#include <string>
#include <vector>

#include "run_config.hpp"

namespace skillrrt::cli {

enum ExitCode : int { kExitOk = 0, kExitConfig = 2, kExitIo = 3 };

// Each command writes its artifacts under rc.out and throws ConfigError or
// IoError on failure.
void CmdPlan(const RunConfig& rc);
void CmdMine(const RunConfig& rc);
void CmdFilter(const RunConfig& rc);
void CmdExport(const RunConfig& rc);
void CmdBench(const RunConfig& rc);

/// Full command-line entry point; returns the process exit code.
int RunCli(const std::vector<std::string>& args);

std::string PlanId(std::size_t problem_index);

}  // namespace skillrrt::cli
