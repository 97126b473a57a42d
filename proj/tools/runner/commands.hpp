#pragma once

#include <filesystem>
#include <vector>

#include "json.hpp"

#include "config.hpp"

namespace darksearch::runner {

struct CommandResult {
    std::vector<std::filesystem::path> files;
    nlohmann::ordered_json summary;
};

/// Rate curves of the two ground-state branches and the piecewise model.
CommandResult cmd_rate(const RunConfig& c);
/// Ensemble of trajectories; final detunings at every checkpoint.
CommandResult cmd_simulate(const RunConfig& c);
/// Summaries of a simulate run in c.output.directory against the closed-form theory.
CommandResult cmd_analyze(const RunConfig& c);
/// V/R~ and scan information over the configured grids.
CommandResult cmd_fisher(const RunConfig& c);
/// Scan vs. search information and their crossover.
CommandResult cmd_compare(const RunConfig& c);
/// Scaling exponents of heavy-tailed sums.
CommandResult cmd_clt(const RunConfig& c);

/// Run descriptor stripped of scheduling and output location, which do not
/// affect results.
[[nodiscard]] nlohmann::ordered_json result_relevant_config(const RunConfig& c);

}  // namespace darksearch::runner
