#pragma once

#include <array>
#include <cstddef>
#include <iosfwd>
#include <span>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "coopgrow/field.hpp"

namespace coopgrow {

struct FiveNumber {
    double min = 0.0, q1 = 0.0, median = 0.0, q3 = 0.0, max = 0.0;
};

struct Histogram {
    std::vector<double> edges;  ///< bins + 1 ascending edges
    std::vector<std::size_t> counts;
};

struct ScenarioSummary {
    std::string name;
    std::size_t n_plants = 0;
    double mean = 0.0;
    double variance = 0.0;  ///< population variance, g^2
    double threshold = 0.0;
    double fraction_above = 0.0;
    /// Sum over plants and applications of the nitrogen made available, g.
    double total_nitrogen = 0.0;
    /// Same ledger weighted by how long each application was held, g*day.
    double nitrogen_exposure = 0.0;
    std::size_t applications = 0;  ///< ledger entries per plant
    FiveNumber five_number;
    Histogram histogram;
};

struct ComparisonReport {
    std::string base;
    std::string other;
    double variance_ratio = 1.0;
    double fraction_delta = 0.0;
    /// Ratio of held-nitrogen exposure; independent of actuation frequency.
    double nitrogen_ratio = 1.0;
    /// Ratio of raw ledger totals; only comparable for matching schedules.
    double ledger_ratio = 1.0;
    bool plant_count_mismatch = false;
};

FiveNumber five_number(std::span<const double> values);
/// `bins` equal-width bins spanning [lo, hi]; the last bin is closed.
std::vector<double> equal_width_edges(double lo, double hi, std::size_t bins);
Histogram histogram(std::span<const double> values, std::vector<double> edges);
/// Edges over the pooled min/max of several samples so histograms line up.
std::vector<double> shared_edges(std::span<const std::vector<double>> samples, std::size_t bins);

double population_variance(std::span<const double> values);

ScenarioSummary summarize(const FieldTrajectory& traj, double threshold, std::string name,
                          std::vector<double> edges);
/// Histogram over the trajectory's own range with `bins` bins.
ScenarioSummary summarize(const FieldTrajectory& traj, double threshold, std::string name,
                          std::size_t bins = 20);

ComparisonReport compare(const ScenarioSummary& base, const ScenarioSummary& other);

struct DoseResponseTable {
    std::vector<double> u_grid;
    std::vector<std::vector<double>> final_b;  ///< one row per parameter set

    /// Indices (row, column) where a row decreases from column-1 to column.
    std::vector<std::pair<std::size_t, std::size_t>> monotonicity_breaks() const;
};

/// Final structural biomass after `day` days under each constant input.
DoseResponseTable dose_response_sweep(std::span<const PlantParams> param_sets, std::vector<double> u_grid,
                                      const PlantState& s0, const EnvSignal& env, double dt,
                                      double day = 50.0, std::size_t threads = 1);

void to_json(nlohmann::json& j, const FiveNumber& f);
void from_json(const nlohmann::json& j, FiveNumber& f);
void to_json(nlohmann::json& j, const Histogram& h);
void from_json(const nlohmann::json& j, Histogram& h);
void to_json(nlohmann::json& j, const ScenarioSummary& s);
void from_json(const nlohmann::json& j, ScenarioSummary& s);
void to_json(nlohmann::json& j, const ComparisonReport& r);

void write_summary_csv(std::ostream& os, std::span<const ScenarioSummary> summaries);
void write_comparison_csv(std::ostream& os, std::span<const ScenarioSummary> summaries);
void write_dose_response_csv(std::ostream& os, const DoseResponseTable& table);

}  // namespace coopgrow
