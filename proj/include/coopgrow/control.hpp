#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace coopgrow {

using Topology = std::vector<std::vector<std::size_t>>;

struct SaturationSpec {
    double u_bar = 0.075;    ///< baseline nitrogen per application, g
    double u_range = 0.0075; ///< half-width of the admissible band, g

    void validate() const;
};

enum class PolicyKind { constant, global_proportional, local_proportional };

std::string_view policy_name(PolicyKind kind);
PolicyKind policy_from_name(std::string_view name);

struct ControlPolicy {
    PolicyKind kind = PolicyKind::constant;
    double gain = 0.05;  ///< g nitrogen per g of output deviation
    SaturationSpec saturation;
    double noise_frac = 0.0;  ///< observation noise sd as a fraction of y

    void validate() const;
};

struct ActuationSchedule {
    double interval_days = 1.0;
    double first_application_day = 0.0;

    void validate(double dt) const;
    /// Application times in [first_application_day, season_days).
    std::vector<double> application_times(double season_days) const;
};

/// clamp(x, -u_range, +u_range)
double saturate(double x, const SaturationSpec& spec);

/// u_i = u_bar + sat(gain * (mean(y) - y_i)); the mean includes plant i.
std::vector<double> global_proportional(std::span<const double> outputs, const ControlPolicy& policy);

/// u_i = u_bar + sat(gain / |N_i| * sum_{j in N_i} (y_j - y_i)).
std::vector<double> local_proportional(std::span<const double> outputs, const Topology& topology,
                                       const ControlPolicy& policy);

/// Noisy view of the outputs: max(0, y_i + e_i) with e_i ~ N(0, (noise_frac*y_i)^2)
/// drawn from the substream keyed by (seed, epoch, plant index).
std::vector<double> observe(std::span<const double> outputs, double noise_frac, std::uint64_t seed,
                            std::uint64_t epoch);

/// Dispatches on policy.kind; `topology` is only read by the local policy.
std::vector<double> apply_policy(std::span<const double> observed, const Topology& topology,
                                 const ControlPolicy& policy);

}  // namespace coopgrow
