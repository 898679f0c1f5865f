#include "coopgrow/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <ostream>
#include <stdexcept>

#include <fmt/format.h>

#include "coopgrow/parallel.hpp"

namespace coopgrow {

FiveNumber five_number(std::span<const double> values)
{
    return {percentile(values, 0.0), percentile(values, 25.0), percentile(values, 50.0),
            percentile(values, 75.0), percentile(values, 100.0)};
}

std::vector<double> equal_width_edges(double lo, double hi, std::size_t bins)
{
    if (bins == 0) {
        throw std::invalid_argument("histogram needs at least one bin");
    }
    if (hi <= lo) {
        // Degenerate sample: widen symmetrically so every value lands in a bin.
        const double pad = std::max(1e-9, std::abs(lo) * 1e-9);
        lo -= pad;
        hi += pad;
    }
    std::vector<double> edges(bins + 1);
    for (std::size_t i = 0; i <= bins; ++i) {
        edges[i] = lo + (hi - lo) * static_cast<double>(i) / static_cast<double>(bins);
    }
    edges.back() = hi;
    return edges;
}

Histogram histogram(std::span<const double> values, std::vector<double> edges)
{
    if (edges.size() < 2) {
        throw std::invalid_argument("histogram needs at least two edges");
    }
    Histogram h;
    h.counts.assign(edges.size() - 1, 0);
    for (double x : values) {
        if (x < edges.front() || x > edges.back()) {
            continue;
        }
        auto it = std::upper_bound(edges.begin(), edges.end(), x);
        auto bin = static_cast<std::size_t>(it - edges.begin());
        bin = bin == 0 ? 0 : bin - 1;
        bin = std::min(bin, h.counts.size() - 1);
        ++h.counts[bin];
    }
    h.edges = std::move(edges);
    return h;
}

std::vector<double> shared_edges(std::span<const std::vector<double>> samples, std::size_t bins)
{
    double lo = std::numeric_limits<double>::infinity();
    double hi = -std::numeric_limits<double>::infinity();
    for (const auto& s : samples) {
        for (double x : s) {
            lo = std::min(lo, x);
            hi = std::max(hi, x);
        }
    }
    if (!std::isfinite(lo)) {
        throw std::invalid_argument("shared_edges: all samples empty");
    }
    return equal_width_edges(lo, hi, bins);
}

double population_variance(std::span<const double> values)
{
    if (values.empty()) {
        throw std::invalid_argument("variance of an empty sample");
    }
    double sum = 0.0;
    for (double x : values) {
        sum += x;
    }
    const double mean = sum / static_cast<double>(values.size());
    double sq = 0.0;
    for (double x : values) {
        sq += (x - mean) * (x - mean);
    }
    return sq / static_cast<double>(values.size());
}

ScenarioSummary summarize(const FieldTrajectory& traj, double threshold, std::string name,
                          std::vector<double> edges)
{
    const auto& y = traj.final_outputs;
    if (y.empty()) {
        throw std::invalid_argument("summarize: empty trajectory");
    }
    ScenarioSummary s;
    s.name = std::move(name);
    s.n_plants = y.size();
    double sum = 0.0;
    std::size_t above = 0;
    for (double v : y) {
        sum += v;
        above += v >= threshold ? 1 : 0;
    }
    s.mean = sum / static_cast<double>(y.size());
    s.variance = population_variance(y);
    s.threshold = threshold;
    s.fraction_above = static_cast<double>(above) / static_cast<double>(y.size());
    for (const auto& plant : traj.ledger) {
        for (const Application& a : plant) {
            s.total_nitrogen += a.u;
            s.nitrogen_exposure += a.u * a.duration;
        }
    }
    s.applications = traj.ledger.empty() ? 0 : traj.ledger.front().size();
    s.five_number = five_number(y);
    s.histogram = histogram(y, std::move(edges));
    return s;
}

ScenarioSummary summarize(const FieldTrajectory& traj, double threshold, std::string name,
                          std::size_t bins)
{
    const auto& y = traj.final_outputs;
    if (y.empty()) {
        throw std::invalid_argument("summarize: empty trajectory");
    }
    const auto [lo, hi] = std::minmax_element(y.begin(), y.end());
    return summarize(traj, threshold, std::move(name), equal_width_edges(*lo, *hi, bins));
}

namespace {
double ratio(double num, double den)
{
    if (den == 0.0) {
        return num == 0.0 ? 1.0 : std::numeric_limits<double>::infinity();
    }
    return num / den;
}
}  // namespace

ComparisonReport compare(const ScenarioSummary& base, const ScenarioSummary& other)
{
    ComparisonReport r;
    r.base = base.name;
    r.other = other.name;
    r.variance_ratio = ratio(other.variance, base.variance);
    r.fraction_delta = other.fraction_above - base.fraction_above;
    r.nitrogen_ratio = ratio(other.nitrogen_exposure, base.nitrogen_exposure);
    r.ledger_ratio = ratio(other.total_nitrogen, base.total_nitrogen);
    r.plant_count_mismatch = base.n_plants != other.n_plants;
    return r;
}

std::vector<std::pair<std::size_t, std::size_t>> DoseResponseTable::monotonicity_breaks() const
{
    std::vector<std::pair<std::size_t, std::size_t>> breaks;
    for (std::size_t r = 0; r < final_b.size(); ++r) {
        for (std::size_t c = 1; c < final_b[r].size(); ++c) {
            if (final_b[r][c] < final_b[r][c - 1]) {
                breaks.emplace_back(r, c);
            }
        }
    }
    return breaks;
}

DoseResponseTable dose_response_sweep(std::span<const PlantParams> param_sets, std::vector<double> u_grid,
                                      const PlantState& s0, const EnvSignal& env, double dt, double day,
                                      std::size_t threads)
{
    for (std::size_t i = 0; i < u_grid.size(); ++i) {
        if (u_grid[i] < 0.0 || (i > 0 && u_grid[i] < u_grid[i - 1])) {
            throw std::invalid_argument("dose-response grid must be ascending and nonnegative");
        }
    }
    DoseResponseTable table;
    table.u_grid = std::move(u_grid);
    table.final_b.assign(param_sets.size(), std::vector<double>(table.u_grid.size()));
    const std::size_t cols = table.u_grid.size();
    parallel_for(param_sets.size() * cols, threads, [&](std::size_t idx) {
        const std::size_t r = idx / cols;
        const std::size_t c = idx % cols;
        const Trajectory tr =
            integrate(param_sets[r], s0, InputSignal::constant(table.u_grid[c]), env, 0.0, day, dt);
        table.final_b[r][c] = tr.final_state().b;
    });
    return table;
}

void to_json(nlohmann::json& j, const FiveNumber& f)
{
    j = {{"min", f.min}, {"q1", f.q1}, {"median", f.median}, {"q3", f.q3}, {"max", f.max}};
}

void from_json(const nlohmann::json& j, FiveNumber& f)
{
    j.at("min").get_to(f.min);
    j.at("q1").get_to(f.q1);
    j.at("median").get_to(f.median);
    j.at("q3").get_to(f.q3);
    j.at("max").get_to(f.max);
}

void to_json(nlohmann::json& j, const Histogram& h) { j = {{"edges", h.edges}, {"counts", h.counts}}; }

void from_json(const nlohmann::json& j, Histogram& h)
{
    j.at("edges").get_to(h.edges);
    j.at("counts").get_to(h.counts);
}

void to_json(nlohmann::json& j, const ScenarioSummary& s)
{
    j = {{"name", s.name},
         {"n_plants", s.n_plants},
         {"mean", s.mean},
         {"variance", s.variance},
         {"threshold", s.threshold},
         {"fraction_above", s.fraction_above},
         {"total_nitrogen", s.total_nitrogen},
         {"nitrogen_exposure", s.nitrogen_exposure},
         {"applications", s.applications},
         {"five_number", s.five_number},
         {"histogram", s.histogram}};
}

void from_json(const nlohmann::json& j, ScenarioSummary& s)
{
    j.at("name").get_to(s.name);
    j.at("n_plants").get_to(s.n_plants);
    j.at("mean").get_to(s.mean);
    j.at("variance").get_to(s.variance);
    j.at("threshold").get_to(s.threshold);
    j.at("fraction_above").get_to(s.fraction_above);
    j.at("total_nitrogen").get_to(s.total_nitrogen);
    j.at("nitrogen_exposure").get_to(s.nitrogen_exposure);
    j.at("applications").get_to(s.applications);
    j.at("five_number").get_to(s.five_number);
    j.at("histogram").get_to(s.histogram);
}

void to_json(nlohmann::json& j, const ComparisonReport& r)
{
    j = {{"base", r.base},
         {"other", r.other},
         {"variance_ratio", r.variance_ratio},
         {"fraction_delta", r.fraction_delta},
         {"nitrogen_ratio", r.nitrogen_ratio},
         {"ledger_ratio", r.ledger_ratio},
         {"plant_count_mismatch", r.plant_count_mismatch}};
}

void write_summary_csv(std::ostream& os, std::span<const ScenarioSummary> summaries)
{
    os << "scenario,n_plants,mean,variance,threshold,fraction_above,total_nitrogen,nitrogen_exposure,"
          "applications,min,q1,median,q3,max\n";
    for (const auto& s : summaries) {
        const auto& f = s.five_number;
        os << fmt::format("{},{},{:.10g},{:.10g},{:.10g},{:.6g},{:.10g},{:.10g},{},{:.10g},{:.10g},{:.10g},"
                          "{:.10g},{:.10g}\n",
                          s.name, s.n_plants, s.mean, s.variance, s.threshold, s.fraction_above,
                          s.total_nitrogen, s.nitrogen_exposure, s.applications, f.min, f.q1, f.median, f.q3,
                          f.max);
    }
}

void write_comparison_csv(std::ostream& os, std::span<const ScenarioSummary> summaries)
{
    os << "scenario,variance,fraction_above,total_nitrogen,variance_ratio,fraction_delta,nitrogen_ratio\n";
    if (summaries.empty()) {
        return;
    }
    const ScenarioSummary& base = summaries.front();
    for (const auto& s : summaries) {
        const ComparisonReport r = compare(base, s);
        os << fmt::format("{},{:.10g},{:.6g},{:.10g},{:.6g},{:.6g},{:.6g}\n", s.name, s.variance,
                          s.fraction_above, s.total_nitrogen, r.variance_ratio, r.fraction_delta,
                          r.nitrogen_ratio);
    }
}

void write_dose_response_csv(std::ostream& os, const DoseResponseTable& table)
{
    os << "param_set,u,final_b\n";
    for (std::size_t r = 0; r < table.final_b.size(); ++r) {
        for (std::size_t c = 0; c < table.u_grid.size(); ++c) {
            os << fmt::format("{},{:.8g},{:.12g}\n", r, table.u_grid[c], table.final_b[r][c]);
        }
    }
}

}  // namespace coopgrow
