#pragma once

#include <string>
#include <vector>

namespace crossdiff {

// Orchestrates a run: parse config, apply flag overrides, run the stepper
// with the estimate ledger attached, write estimates.csv, field snapshots
// and the manifest.  Exit codes: 0 success, 1 usage/config error, 2 solver
// failure, 3 audit failure (artifacts still written).
int run_cli(const std::vector<std::string>& args);

int run_cli(int argc, char** argv);

}  // namespace crossdiff
