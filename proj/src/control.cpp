#include "coopgrow/control.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "coopgrow/error.hpp"
#include "coopgrow/integrator.hpp"
#include "coopgrow/rng.hpp"

namespace coopgrow {

void SaturationSpec::validate() const
{
    if (!(u_bar >= 0.0) || !std::isfinite(u_bar)) {
        throw ConfigError("u_bar must be a finite nonnegative value");
    }
    if (!(u_range >= 0.0) || u_range > u_bar) {
        throw ConfigError("u_range must satisfy 0 <= u_range <= u_bar");
    }
}

std::string_view policy_name(PolicyKind kind)
{
    switch (kind) {
    case PolicyKind::constant: return "constant";
    case PolicyKind::global_proportional: return "global";
    case PolicyKind::local_proportional: return "local";
    }
    return "constant";
}

PolicyKind policy_from_name(std::string_view name)
{
    if (name == "constant") return PolicyKind::constant;
    if (name == "global") return PolicyKind::global_proportional;
    if (name == "local") return PolicyKind::local_proportional;
    throw ConfigError("unknown control policy '" + std::string(name) +
                      "' (expected constant, global or local)");
}

void ControlPolicy::validate() const
{
    saturation.validate();
    if (!(gain >= 0.0) || !std::isfinite(gain)) {
        throw ConfigError("control gain must be >= 0");
    }
    if (!(noise_frac >= 0.0) || !std::isfinite(noise_frac)) {
        throw ConfigError("noise_frac must be >= 0");
    }
}

void ActuationSchedule::validate(double dt) const
{
    if (!(interval_days >= dt) || !std::isfinite(interval_days)) {
        throw ConfigError("actuation interval must be at least one integration step");
    }
    if (!(first_application_day >= 0.0)) {
        throw ConfigError("first_application_day must be >= 0");
    }
}

std::vector<double> ActuationSchedule::application_times(double season_days) const
{
    std::vector<double> times;
    for (std::size_t m = 0;; ++m) {
        const double t = first_application_day + static_cast<double>(m) * interval_days;
        if (t >= season_days - kGridTolerance) {
            break;
        }
        times.push_back(t);
    }
    return times;
}

double saturate(double x, const SaturationSpec& spec) { return std::clamp(x, -spec.u_range, spec.u_range); }

std::vector<double> global_proportional(std::span<const double> outputs, const ControlPolicy& policy)
{
    if (outputs.empty()) {
        throw std::invalid_argument("global_proportional: no outputs");
    }
    double sum = 0.0;
    for (double y : outputs) {
        sum += y;
    }
    const double mean = sum / static_cast<double>(outputs.size());
    std::vector<double> u(outputs.size());
    for (std::size_t i = 0; i < outputs.size(); ++i) {
        u[i] = policy.saturation.u_bar + saturate(policy.gain * (mean - outputs[i]), policy.saturation);
    }
    return u;
}

std::vector<double> local_proportional(std::span<const double> outputs, const Topology& topology,
                                       const ControlPolicy& policy)
{
    if (topology.size() != outputs.size()) {
        throw std::invalid_argument("local_proportional: topology size does not match outputs");
    }
    std::vector<double> u(outputs.size());
    for (std::size_t i = 0; i < outputs.size(); ++i) {
        const auto& nb = topology[i];
        if (nb.empty()) {
            std::ostringstream os;
            os << "local_proportional: plant " << i << " has no neighbours";
            throw std::invalid_argument(os.str());
        }
        double acc = 0.0;
        for (std::size_t j : nb) {
            acc += outputs[j] - outputs[i];
        }
        const double x = policy.gain / static_cast<double>(nb.size()) * acc;
        u[i] = policy.saturation.u_bar + saturate(x, policy.saturation);
    }
    return u;
}

std::vector<double> observe(std::span<const double> outputs, double noise_frac, std::uint64_t seed,
                            std::uint64_t epoch)
{
    std::vector<double> seen(outputs.begin(), outputs.end());
    if (noise_frac == 0.0) {
        return seen;
    }
    for (std::size_t i = 0; i < seen.size(); ++i) {
        Substream rng(seed, StreamTag::observation, {epoch, i});
        seen[i] = std::max(0.0, outputs[i] + noise_frac * outputs[i] * rng.normal());
    }
    return seen;
}

std::vector<double> apply_policy(std::span<const double> observed, const Topology& topology,
                                 const ControlPolicy& policy)
{
    switch (policy.kind) {
    case PolicyKind::constant:
        return std::vector<double>(observed.size(), policy.saturation.u_bar);
    case PolicyKind::global_proportional:
        return global_proportional(observed, policy);
    case PolicyKind::local_proportional:
        return local_proportional(observed, topology, policy);
    }
    return {};
}

}  // namespace coopgrow
