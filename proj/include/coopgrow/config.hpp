#pragma once

#include <cstddef>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "coopgrow/control.hpp"
#include "coopgrow/field.hpp"
#include "coopgrow/fitting.hpp"

namespace coopgrow {

/// One simulation scenario, read from a flat INI-style file with sections
/// [scenario], [params], [field], [control], [schedule], [metrics], [output].
/// Unknown sections or keys are rejected.
struct ScenarioConfig {
    std::string name = "scenario";
    FieldConfig field;
    ControlPolicy policy;
    ActuationSchedule schedule;
    /// Fixed rejection threshold; when empty it is taken from an uncontrolled
    /// companion run with baseline_u_bar on the same seed.
    std::optional<double> threshold;
    double baseline_u_bar = 0.075;
    std::size_t histogram_bins = 20;
    double trajectory_every_days = 1.0;

    void validate() const;
    bool operator==(const ScenarioConfig& other) const;
};

/// "section.key=value"
struct Override {
    std::string key;
    std::string value;
};
Override parse_override(std::string_view text);

ScenarioConfig parse_scenario(const std::string& text, const std::vector<Override>& overrides = {},
                              bool check_params = true);
ScenarioConfig load_scenario(const std::string& path, const std::vector<Override>& overrides = {},
                             bool check_params = true);
std::string serialize_scenario(const ScenarioConfig& cfg);

/// Fit specification file: [params] holds the initial guess, [fit] the rest.
FitSpec parse_fit_spec(const std::string& text);
FitSpec load_fit_spec(const std::string& path);

std::string read_text_file(const std::string& path);

}  // namespace coopgrow
