// experiments.hpp — experiment orchestration and result emission
//
// Artifacts per run: one or more CSV tables plus a JSON manifest echoing the
// config, the library/tooling versions, achieved tolerances and wall time.
// Exit codes: 0 all checks passed, 1 execution error, 2 at least one physics
// audit failed. CSV bodies are byte-identical for identical config + seed.

#pragma once

#include <string>
#include <vector>

#include "wcl/model.hpp"

namespace wcl::cli {

struct RunResult {
    int exit_code = 0;
    bool all_pass = true;
    std::vector<std::string> artifacts;
};

RunResult run_experiment(const ScenarioConfig& cfg);

}  // namespace wcl::cli
