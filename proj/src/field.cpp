#include "coopgrow/field.hpp"

#include <algorithm>
#include <cmath>
#include <ostream>
#include <sstream>
#include <stdexcept>

#include <fmt/format.h>

#include "coopgrow/error.hpp"
#include "coopgrow/parallel.hpp"
#include "coopgrow/rng.hpp"

namespace coopgrow {

void FieldConfig::validate() const
{
    if (n_plants == 0) {
        throw ConfigError("field needs at least one plant");
    }
    if (grid_rows * grid_cols != n_plants) {
        std::ostringstream os;
        os << "grid " << grid_rows << "x" << grid_cols << " does not hold " << n_plants << " plants";
        throw ConfigError(os.str());
    }
    if (!(perturbation_frac >= 0.0 && perturbation_frac < 0.5)) {
        throw ConfigError("perturbation_frac must lie in [0, 0.5)");
    }
    if (!(season_days > 0.0)) {
        throw ConfigError("season_days must be > 0");
    }
    if (!(rejection_percentile >= 0.0 && rejection_percentile <= 100.0)) {
        throw ConfigError("rejection_percentile must lie in [0, 100]");
    }
    steps_in(season_days, dt);
    if (s0.b < kBiomassFloor || s0.c < 0.0 || s0.n < 0.0) {
        throw ConfigError("initial state violates b >= floor, c >= 0, n >= 0");
    }
    for (const EnvPoint& e : env.values()) {
        if (!(e.I >= 0.0)) {
            throw ConfigError("light intensity must be >= 0");
        }
    }
}

PlantParams sample_params(const PlantParams& nominal, double frac, std::uint64_t seed,
                          std::size_t plant_index)
{
    if (!(frac >= 0.0)) {
        throw ConfigError("perturbation fraction must be >= 0");
    }
    if (frac == 0.0) {
        return nominal;
    }
    constexpr int kMaxAttempts = 100;
    Substream rng(seed, StreamTag::params, {plant_index});
    PlantParams::Values values{};
    for (std::size_t i = 0; i < kParamCount; ++i) {
        const double mean = nominal.values()[i];
        bool ok = false;
        for (int attempt = 0; attempt < kMaxAttempts && !ok; ++attempt) {
            const double draw = rng.normal(mean, frac * mean);
            ok = draw > 0.0 && (static_cast<Param>(i) != Param::psi || draw < 1.0);
            values[i] = draw;
        }
        if (!ok) {
            throw ConfigError(fmt::format("could not draw a valid {} for plant {} in {} attempts",
                                          kParamNames[i], plant_index, kMaxAttempts));
        }
    }
    return PlantParams(values);
}

std::vector<std::size_t> neighbors(std::size_t plant_index, std::size_t grid_rows, std::size_t grid_cols)
{
    if (plant_index >= grid_rows * grid_cols) {
        throw std::out_of_range(fmt::format("plant index {} outside {}x{} grid", plant_index, grid_rows,
                                            grid_cols));
    }
    const auto row = static_cast<std::ptrdiff_t>(plant_index / grid_cols);
    const auto col = static_cast<std::ptrdiff_t>(plant_index % grid_cols);
    std::vector<std::size_t> out;
    for (std::ptrdiff_t dr = -1; dr <= 1; ++dr) {
        for (std::ptrdiff_t dc = -1; dc <= 1; ++dc) {
            if (dr == 0 && dc == 0) {
                continue;
            }
            const std::ptrdiff_t r = row + dr;
            const std::ptrdiff_t c = col + dc;
            if (r < 0 || c < 0 || r >= static_cast<std::ptrdiff_t>(grid_rows) ||
                c >= static_cast<std::ptrdiff_t>(grid_cols)) {
                continue;
            }
            out.push_back(static_cast<std::size_t>(r) * grid_cols + static_cast<std::size_t>(c));
        }
    }
    return out;
}

Topology grid_topology(std::size_t grid_rows, std::size_t grid_cols)
{
    Topology topo(grid_rows * grid_cols);
    for (std::size_t i = 0; i < topo.size(); ++i) {
        topo[i] = neighbors(i, grid_rows, grid_cols);
    }
    return topo;
}

double percentile(std::span<const double> values, double p)
{
    if (values.empty()) {
        throw std::invalid_argument("percentile of an empty sample");
    }
    if (!(p >= 0.0 && p <= 100.0)) {
        throw std::invalid_argument("percentile must lie in [0, 100]");
    }
    std::vector<double> sorted(values.begin(), values.end());
    std::sort(sorted.begin(), sorted.end());
    const double pos = p / 100.0 * static_cast<double>(sorted.size() - 1);
    const auto lo = static_cast<std::size_t>(std::floor(pos));
    const std::size_t hi = std::min(lo + 1, sorted.size() - 1);
    const double frac = pos - static_cast<double>(lo);
    return sorted[lo] + frac * (sorted[hi] - sorted[lo]);
}

double rejection_threshold(std::span<const double> final_outputs, double p)
{
    return percentile(final_outputs, p);
}

FieldTrajectory simulate_field(const FieldConfig& cfg, const ControlPolicy& policy,
                               const ActuationSchedule& schedule, std::size_t threads)
{
    cfg.validate();
    policy.validate();
    schedule.validate(cfg.dt);

    const std::size_t n = cfg.n_plants;
    const Topology topology = grid_topology(cfg.grid_rows, cfg.grid_cols);

    // Segment starts: a baseline segment if the first application is late,
    // then one per application.
    std::vector<double> starts;
    const std::vector<double> applications = schedule.application_times(cfg.season_days);
    const bool baseline_lead = applications.empty() || applications.front() > kGridTolerance;
    if (baseline_lead) {
        starts.push_back(0.0);
    }
    starts.insert(starts.end(), applications.begin(), applications.end());

    FieldTrajectory out;
    out.params.reserve(n);
    for (std::size_t i = 0; i < n; ++i) {
        out.params.push_back(sample_params(cfg.nominal_params, cfg.perturbation_frac, cfg.seed, i));
    }
    out.plants.resize(n);
    out.ledger.resize(n);

    std::vector<PlantState> state(n, cfg.s0);
    std::vector<double> current(n);
    for (std::size_t i = 0; i < n; ++i) {
        current[i] = output(cfg.s0, out.params[i]);
    }

    for (std::size_t seg = 0; seg < starts.size(); ++seg) {
        const double t0 = starts[seg];
        const double t1 = seg + 1 < starts.size() ? starts[seg + 1] : cfg.season_days;

        std::vector<double> u;
        if (seg == 0 && baseline_lead) {
            u.assign(n, policy.saturation.u_bar);
        } else {
            const std::size_t epoch = baseline_lead ? seg - 1 : seg;
            const std::vector<double> seen = observe(current, policy.noise_frac, cfg.seed, epoch);
            u = apply_policy(seen, topology, policy);
        }

        parallel_for(n, threads, [&](std::size_t i) {
            Trajectory piece = integrate(out.params[i], state[i], InputSignal::constant(u[i], t0), cfg.env,
                                         t0, t1, cfg.dt);
            Trajectory& whole = out.plants[i];
            const std::size_t skip = whole.times.empty() ? 0 : 1;
            whole.times.insert(whole.times.end(), piece.times.begin() + skip, piece.times.end());
            whole.states.insert(whole.states.end(), piece.states.begin() + skip, piece.states.end());
            whole.outputs.insert(whole.outputs.end(), piece.outputs.begin() + skip, piece.outputs.end());
            state[i] = piece.final_state();
            current[i] = piece.final_output();
            out.ledger[i].push_back({t0, u[i], t1 - t0});
        });
    }
    out.final_outputs = current;
    return out;
}

void write_trajectory_csv(std::ostream& os, const FieldTrajectory& traj, std::size_t every)
{
    every = std::max<std::size_t>(1, every);
    os << "plant_id,t,b,c,n,y,u\n";
    for (std::size_t p = 0; p < traj.plants.size(); ++p) {
        const Trajectory& tr = traj.plants[p];
        const auto& ledger = traj.ledger[p];
        std::size_t seg = 0;
        for (std::size_t k = 0; k < tr.size(); ++k) {
            const bool last = k + 1 == tr.size();
            if (k % every != 0 && !last) {
                continue;
            }
            const double t = tr.times[k];
            while (seg + 1 < ledger.size() && ledger[seg + 1].time <= t + kGridTolerance) {
                ++seg;
            }
            const double u = ledger.empty() ? 0.0 : ledger[seg].u;
            const PlantState& s = tr.states[k];
            os << fmt::format("{},{:.6f},{:.12g},{:.12g},{:.12g},{:.12g},{:.12g}\n", p, t, s.b, s.c, s.n,
                              tr.outputs[k], u);
        }
    }
}

}  // namespace coopgrow
