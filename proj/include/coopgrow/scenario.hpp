#pragma once

#include <cstddef>
#include <optional>
#include <string>

#include "coopgrow/config.hpp"
#include "coopgrow/field.hpp"
#include "coopgrow/metrics.hpp"

namespace coopgrow {

struct ScenarioRun {
    FieldTrajectory trajectory;
    ScenarioSummary summary;
    /// Uncontrolled companion run used for the rejection threshold; absent
    /// when the scenario is itself the uncontrolled baseline or the
    /// threshold is fixed in the config.
    std::optional<FieldTrajectory> baseline_trajectory;
    std::optional<ScenarioSummary> baseline;
    std::optional<ComparisonReport> comparison;
    double threshold = 0.0;
};

/// Simulates the scenario and, when needed, its uncontrolled companion (same
/// field, constant policy at baseline_u_bar, same schedule).
ScenarioRun run_scenario(const ScenarioConfig& cfg, std::size_t threads = 1);

/// Trajectory CSV thinned to the config's output interval.
std::string trajectory_csv(const ScenarioConfig& cfg, const FieldTrajectory& traj);
/// Self-describing JSON document: config echo, summaries, comparison.
std::string summary_json(const ScenarioConfig& cfg, const ScenarioRun& run);

}  // namespace coopgrow
