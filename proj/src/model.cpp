#include "coopgrow/model.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>
#include <stdexcept>

#include "coopgrow/error.hpp"
#include "coopgrow/rng.hpp"

namespace coopgrow {

Param param_from_name(std::string_view name)
{
    for (std::size_t i = 0; i < kParamCount; ++i) {
        if (kParamNames[i] == name) {
            return static_cast<Param>(i);
        }
    }
    throw ConfigError("unknown plant parameter '" + std::string(name) + "'");
}

std::string_view param_name(Param p) { return kParamNames[static_cast<std::size_t>(p)]; }

std::string PlantParams::violation(const Values& values)
{
    for (std::size_t i = 0; i < kParamCount; ++i) {
        if (!std::isfinite(values[i]) || values[i] <= 0.0) {
            std::ostringstream os;
            os << "parameter " << kParamNames[i] << " must be finite and > 0 (got " << values[i] << ")";
            return os.str();
        }
    }
    const double psi = values[static_cast<std::size_t>(Param::psi)];
    if (psi >= 1.0) {
        std::ostringstream os;
        os << "parameter psi must lie in (0, 1) (got " << psi << ")";
        return os.str();
    }
    return {};
}

PlantParams::PlantParams(const Values& values) : values_(values)
{
    if (auto msg = violation(values); !msg.empty()) {
        throw ConfigError(msg);
    }
}

PlantParams PlantParams::unchecked(const Values& values) { return PlantParams(values, NoCheck{}); }

PlantParams PlantParams::nominal()
{
    return PlantParams(Values{1000.0, 0.149, 0.0221, 0.260, 70.0, 0.0620, 0.144, 0.115, 0.718, 22.0,
                              6.89e-2, 5.57e-6});
}

PlantParams PlantParams::with(Param p, double value) const
{
    Values v = values_;
    v[static_cast<std::size_t>(p)] = value;
    return PlantParams(v);
}

namespace {

void require_biomass(double b, const char* where)
{
    if (!(b >= kBiomassFloor)) {
        std::ostringstream os;
        os << where << ": structural biomass " << b << " below floor " << kBiomassFloor;
        throw std::domain_error(os.str());
    }
}

// Shared shape of the two assimilation terms:
//   rate * m * x / ((1 + m/v)(1 + store/(m*j)))  with m the effective mass.
// Rewritten without nested fractions as rate*x*v*j*m^2 / ((v+m)(m*j+store)).
double assimilation(double rate, double mass, double store, double input, double v, double j)
{
    return rate * input * v * j * mass * mass / ((v + mass) * (mass * j + store));
}

// d/d mass of the assimilation term.
double assimilation_dmass(double rate, double mass, double store, double input, double v, double j)
{
    const double a = assimilation(rate, mass, store, input, v, j);
    return a * (2.0 / mass - 1.0 / (v + mass) - j / (mass * j + store));
}

}  // namespace

double temperature_response(double T, double T_op)
{
    return std::max(0.0, (T_op - std::abs(T_op - T)) / T_op);
}

double growth_flux(const PlantState& s, double T, const PlantParams& p)
{
    require_biomass(s.b, "growth_flux");
    return p.k() * temperature_response(T, p.T_op()) * (s.c / s.b) * (s.n / s.b) * s.b;
}

double litter_loss(double b, const PlantParams& p)
{
    if (b <= 0.0) {
        return 0.0;
    }
    return p.k_l() * b / (1.0 + p.k_ml() / b);
}

double carbon_consumption(const PlantState& s, double T, const PlantParams& p)
{
    require_biomass(s.b, "carbon_consumption");
    return p.theta_c() * p.k() * temperature_response(T, p.T_op()) * (s.c / s.b) * s.b;
}

double nitrogen_consumption(const PlantState& s, double T, const PlantParams& p)
{
    require_biomass(s.b, "nitrogen_consumption");
    return p.theta_n() * p.k() * temperature_response(T, p.T_op()) * (s.n / s.b) * s.b;
}

double photosynthesis(const PlantState& s, double I, const PlantParams& p)
{
    require_biomass(s.b, "photosynthesis");
    return assimilation(p.sigma_c(), p.psi() * s.b, s.c, I, p.v(), p.j_c());
}

double nitrogen_uptake(const PlantState& s, double u, const PlantParams& p)
{
    require_biomass(s.b, "nitrogen_uptake");
    return assimilation(p.sigma_n(), (1.0 - p.psi()) * s.b, s.n, u, p.v(), p.j_n());
}

StateDerivative rhs(const PlantState& s, double u, const EnvPoint& env, const PlantParams& p)
{
    return {growth_flux(s, env.T, p) - litter_loss(s.b, p),
            photosynthesis(s, env.I, p) - carbon_consumption(s, env.T, p),
            nitrogen_uptake(s, u, p) - nitrogen_consumption(s, env.T, p)};
}

double output(const PlantState& s, const PlantParams& p) { return p.psi() * s.b; }

Vector3 output_row(const PlantParams& p) { return {p.psi(), 0.0, 0.0}; }

Matrix3 jacobian_state(const PlantState& s, double u, const EnvPoint& env, const PlantParams& p)
{
    require_biomass(s.b, "jacobian_state");
    const double rate = p.k() * temperature_response(env.T, p.T_op());
    const double b = s.b;
    const double psi = p.psi();
    const double gamma = 1.0 - psi;

    // Litter: k_l b^2 / (b + k_ml)
    const double dL_db = p.k_l() * b * (b + 2.0 * p.k_ml()) / ((b + p.k_ml()) * (b + p.k_ml()));

    const double shoot = psi * b;
    const double root = gamma * b;
    const double Ac = assimilation(p.sigma_c(), shoot, s.c, env.I, p.v(), p.j_c());
    const double An = assimilation(p.sigma_n(), root, s.n, u, p.v(), p.j_n());

    Matrix3 J{};
    J[0][0] = -rate * s.c * s.n / (b * b) - dL_db;
    J[0][1] = rate * s.n / b;
    J[0][2] = rate * s.c / b;

    J[1][0] = psi * assimilation_dmass(p.sigma_c(), shoot, s.c, env.I, p.v(), p.j_c());
    J[1][1] = -Ac / (shoot * p.j_c() + s.c) - p.theta_c() * rate;
    J[1][2] = 0.0;

    J[2][0] = gamma * assimilation_dmass(p.sigma_n(), root, s.n, u, p.v(), p.j_n());
    J[2][1] = 0.0;
    J[2][2] = -An / (root * p.j_n() + s.n) - p.theta_n() * rate;
    return J;
}

Vector3 jacobian_input(const PlantState& s, double /*u*/, const EnvPoint& /*env*/,
                       const PlantParams& p)
{
    require_biomass(s.b, "jacobian_input");
    // Uptake is linear in u.
    return {0.0, 0.0, nitrogen_uptake(s, 1.0, p)};
}

CooperativityReport check_cooperativity(const PlantParams& p, const EnvPoint& env,
                                        std::size_t sample_count, std::uint64_t seed,
                                        const StateBox& box, std::size_t max_listed)
{
    if (sample_count == 0) {
        throw ConfigError("check_cooperativity: sample_count must be >= 1");
    }
    CooperativityReport report;
    report.samples = sample_count;
    report.min_offdiagonal = std::numeric_limits<double>::infinity();
    report.min_input_entry = std::numeric_limits<double>::infinity();
    report.min_flux = std::numeric_limits<double>::infinity();

    auto log_uniform = [](Substream& rng, double lo, double hi) {
        return std::exp(rng.uniform(std::log(lo), std::log(hi)));
    };

    const Vector3 C = output_row(p);
    report.output_nonnegative = std::all_of(C.begin(), C.end(), [](double x) { return x >= 0.0; });

    auto record = [&](const PlantState& s, double u, std::string what) {
        ++report.violation_count;
        if (report.violations.size() < max_listed) {
            report.violations.push_back({s, u, std::move(what)});
        }
    };

    if (!report.output_nonnegative) {
        record({}, 0.0, "output row C has a negative entry");
    }

    for (std::size_t i = 0; i < sample_count; ++i) {
        Substream rng(seed, StreamTag::cooperativity, {i});
        PlantState s;
        s.b = log_uniform(rng, box.b_min, box.b_max);
        s.c = log_uniform(rng, box.c_min, box.c_max);
        s.n = log_uniform(rng, box.n_min, box.n_max);
        const double u = log_uniform(rng, box.u_min, box.u_max);

        const Matrix3 J = jacobian_state(s, u, env, p);
        for (int r = 0; r < 3; ++r) {
            for (int c = 0; c < 3; ++c) {
                if (r == c) {
                    continue;
                }
                report.min_offdiagonal = std::min(report.min_offdiagonal, J[r][c]);
                if (!(J[r][c] >= 0.0)) {
                    std::ostringstream os;
                    os << "J[" << r << "][" << c << "]=" << J[r][c];
                    record(s, u, os.str());
                }
            }
        }
        const Vector3 Ju = jacobian_input(s, u, env, p);
        for (int r = 0; r < 3; ++r) {
            report.min_input_entry = std::min(report.min_input_entry, Ju[r]);
            if (!(Ju[r] >= 0.0)) {
                std::ostringstream os;
                os << "dF/du[" << r << "]=" << Ju[r];
                record(s, u, os.str());
            }
        }
        const std::array<std::pair<const char*, double>, 6> fluxes = {{
            {"G", growth_flux(s, env.T, p)},
            {"L_b", litter_loss(s.b, p)},
            {"B_c", carbon_consumption(s, env.T, p)},
            {"B_n", nitrogen_consumption(s, env.T, p)},
            {"A_c", photosynthesis(s, env.I, p)},
            {"A_n", nitrogen_uptake(s, u, p)},
        }};
        for (const auto& [name, value] : fluxes) {
            report.min_flux = std::min(report.min_flux, value);
            if (!(value >= 0.0)) {
                std::ostringstream os;
                os << "flux " << name << "=" << value;
                record(s, u, os.str());
            }
        }
    }
    return report;
}

}  // namespace coopgrow
