#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <span>
#include <string>
#include <vector>

#include "coopgrow/integrator.hpp"
#include "coopgrow/model.hpp"

namespace coopgrow {

enum class MassKind { fresh, dry };

/// Fresh-to-dry conversion used for harvested lettuce.
inline constexpr double kDryMatterFraction = 0.1;

struct BiomassTimeseries {
    std::string plant_id;
    std::vector<double> times;   ///< days
    std::vector<double> masses;  ///< g
    MassKind kind = MassKind::dry;

    /// Throws ConfigError unless times ascend, masses >= 0 and there are >= 3 points.
    void validate() const;
};

BiomassTimeseries to_dry(BiomassTimeseries series);

using ParamMask = std::array<bool, kParamCount>;

struct FitSpec {
    PlantParams guess = PlantParams::nominal();
    PlantParams::Values lower{};
    PlantParams::Values upper{};
    ParamMask free{};  ///< true = estimated, false = held at the guess
    EnvSignal env = EnvSignal::constant(EnvPoint{22.0, 500.0});
    double u = 0.075;
    PlantState s0{0.005, 0.001, 0.0001};
    double t0 = 0.0;
    double dt = kDefaultStep;
    std::size_t max_iterations = 200;
    double tolerance = 1e-8;

    /// Bounds guess/bound_factor .. guess*bound_factor (psi capped below 1);
    /// T_op, theta_c, theta_n and k held fixed.
    static FitSpec defaults(const PlantParams& guess, double bound_factor = 10.0);
    static ParamMask mask_of(std::span<const Param> free_params);

    void validate() const;
    std::size_t free_count() const;
};

struct FitResult {
    PlantParams params = PlantParams::nominal();
    double cost = 0.0;
    double nrmse = 0.0;
    std::size_t iterations = 0;
    bool converged = false;
};

/// Model output minus observation at each observation time. The model is
/// sampled at the step-grid time nearest each observation.
std::vector<double> residuals(const PlantParams& p, const FitSpec& spec, const BiomassTimeseries& series);
/// Mean squared residual, g^2.
double cost(const PlantParams& p, const FitSpec& spec, const BiomassTimeseries& series);
/// sqrt(cost) over the observed range (or over the max for a constant series).
double nrmse(const PlantParams& p, const FitSpec& spec, const BiomassTimeseries& series);
double nrmse_from_cost(double cost, std::span<const double> masses);

FitResult fit(const FitSpec& spec, const BiomassTimeseries& series);

struct BatchFitEntry {
    std::string plant_id;
    bool ok = false;
    std::string error;
    FitResult result;
};

std::vector<BatchFitEntry> fit_batch(const FitSpec& spec, std::span<const BiomassTimeseries> dataset,
                                     std::size_t threads = 1);

struct SyntheticSpec {
    std::size_t series_count = 20;
    PlantParams nominal = PlantParams::nominal();
    double perturbation_frac = 0.05;
    std::size_t min_points = 3;
    std::size_t max_points = 12;
    double first_day = 3.0;
    double last_day = 50.0;
    bool even_spacing = false;
    double noise_frac = 0.0;  ///< multiplicative Gaussian noise on masses
    MassKind kind = MassKind::dry;
    std::uint64_t seed = 1;
    EnvSignal env = EnvSignal::constant(EnvPoint{22.0, 500.0});
    double u = 0.075;
    PlantState s0{0.005, 0.001, 0.0001};
    double dt = kDefaultStep;
};

struct SyntheticSeries {
    BiomassTimeseries series;
    PlantParams truth = PlantParams::nominal();
};

std::vector<SyntheticSeries> generate_synthetic(const SyntheticSpec& spec);

/// Reads `plant_id,day,mass_g,kind` rows; series are returned in order of
/// first appearance. Throws ConfigError on malformed input or no rows.
std::vector<BiomassTimeseries> read_series_csv(std::istream& is);
void write_series_csv(std::ostream& os, std::span<const BiomassTimeseries> dataset);
void write_fit_results_csv(std::ostream& os, std::span<const BatchFitEntry> entries);

}  // namespace coopgrow
