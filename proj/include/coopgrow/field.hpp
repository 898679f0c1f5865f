#pragma once

#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <span>
#include <vector>

#include "coopgrow/control.hpp"
#include "coopgrow/integrator.hpp"
#include "coopgrow/model.hpp"

namespace coopgrow {

struct FieldConfig {
    std::size_t n_plants = 100;
    std::size_t grid_rows = 10;
    std::size_t grid_cols = 10;
    PlantParams nominal_params = PlantParams::nominal();
    double perturbation_frac = 0.05;
    std::uint64_t seed = 1;
    PlantState s0{0.005, 0.001, 0.0001};
    EnvSignal env = EnvSignal::constant(EnvPoint{22.0, 500.0});
    double season_days = 50.0;
    double dt = kDefaultStep;
    double rejection_percentile = 10.0;

    void validate() const;
};

struct Application {
    double time = 0.0;
    double u = 0.0;         ///< g nitrogen made available
    double duration = 0.0;  ///< days until the next application or season end
};

struct FieldTrajectory {
    std::vector<Trajectory> plants;
    std::vector<std::vector<Application>> ledger;  ///< per plant, in time order
    std::vector<PlantParams> params;
    std::vector<double> final_outputs;

    std::size_t plant_count() const { return plants.size(); }
};

/// Draws plant `plant_index`'s parameters: each entry ~ N(nominal, (frac*nominal)^2),
/// redrawn (up to 100 times) while it violates the parameter invariants.
PlantParams sample_params(const PlantParams& nominal, double frac, std::uint64_t seed,
                          std::size_t plant_index);

/// Moore neighbourhood on a row-major grid without wraparound.
std::vector<std::size_t> neighbors(std::size_t plant_index, std::size_t grid_rows, std::size_t grid_cols);
Topology grid_topology(std::size_t grid_rows, std::size_t grid_cols);

/// Linear-interpolation percentile (numpy's default convention), p in [0, 100].
double percentile(std::span<const double> values, double p);
double rejection_threshold(std::span<const double> final_outputs, double p);

/// Marches the field through the actuation epochs: at each application time
/// the policy sees the (optionally noised) outputs and fixes every plant's
/// input until the next application. Plants receive the policy's u_bar
/// before the first application. Results do not depend on `threads`.
FieldTrajectory simulate_field(const FieldConfig& cfg, const ControlPolicy& policy,
                               const ActuationSchedule& schedule, std::size_t threads = 1);

/// Long-format CSV: plant_id,t,b,c,n,y,u. `every` thins the step grid.
void write_trajectory_csv(std::ostream& os, const FieldTrajectory& traj, std::size_t every = 1);

}  // namespace coopgrow
