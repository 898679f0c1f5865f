#include "coopgrow/scenario.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include <nlohmann/json.hpp>

namespace coopgrow {

namespace {

bool is_own_baseline(const ScenarioConfig& cfg)
{
    return cfg.policy.kind == PolicyKind::constant && cfg.policy.saturation.u_bar == cfg.baseline_u_bar;
}

}  // namespace

ScenarioRun run_scenario(const ScenarioConfig& cfg, std::size_t threads)
{
    cfg.validate();
    ScenarioRun run;
    run.trajectory = simulate_field(cfg.field, cfg.policy, cfg.schedule, threads);

    if (!cfg.threshold && !is_own_baseline(cfg)) {
        ControlPolicy constant = cfg.policy;
        constant.kind = PolicyKind::constant;
        constant.noise_frac = 0.0;
        constant.saturation = {cfg.baseline_u_bar, 0.0};
        run.baseline_trajectory = simulate_field(cfg.field, constant, cfg.schedule, threads);
    }

    if (cfg.threshold) {
        run.threshold = *cfg.threshold;
    } else {
        const auto& reference = run.baseline_trajectory ? *run.baseline_trajectory : run.trajectory;
        run.threshold = rejection_threshold(reference.final_outputs, cfg.field.rejection_percentile);
    }

    std::vector<std::vector<double>> pooled{run.trajectory.final_outputs};
    if (run.baseline_trajectory) {
        pooled.push_back(run.baseline_trajectory->final_outputs);
    }
    const std::vector<double> edges = shared_edges(pooled, cfg.histogram_bins);
    run.summary = summarize(run.trajectory, run.threshold, cfg.name, edges);
    if (run.baseline_trajectory) {
        run.baseline = summarize(*run.baseline_trajectory, run.threshold, cfg.name + "-baseline", edges);
        run.comparison = compare(*run.baseline, run.summary);
    }
    return run;
}

std::string trajectory_csv(const ScenarioConfig& cfg, const FieldTrajectory& traj)
{
    const auto every = static_cast<std::size_t>(std::max(1.0, std::round(cfg.trajectory_every_days / cfg.field.dt)));
    std::ostringstream os;
    write_trajectory_csv(os, traj, every);
    return os.str();
}

std::string summary_json(const ScenarioConfig& cfg, const ScenarioRun& run)
{
    nlohmann::json doc;
    doc["scenario"] = cfg.name;
    doc["config"] = serialize_scenario(cfg);
    doc["threshold"] = run.threshold;
    doc["summary"] = run.summary;
    if (run.baseline) {
        doc["baseline"] = *run.baseline;
    }
    if (run.comparison) {
        doc["comparison"] = *run.comparison;
    }
    return doc.dump(2) + "\n";
}

}  // namespace coopgrow
