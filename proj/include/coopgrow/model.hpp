#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

namespace coopgrow {

/// Index of each plant parameter inside PlantParams.
enum class Param : std::size_t {
    k = 0,
    k_l,
    k_ml,
    sigma_c,
    sigma_n,
    v,
    j_c,
    j_n,
    psi,
    T_op,
    theta_c,
    theta_n,
};

inline constexpr std::size_t kParamCount = 12;

inline constexpr std::array<std::string_view, kParamCount> kParamNames = {
    "k", "k_l", "k_ml", "sigma_c", "sigma_n", "v",
    "j_c", "j_n", "psi", "T_op", "theta_c", "theta_n"};

/// Throws ConfigError for an unknown name.
Param param_from_name(std::string_view name);
std::string_view param_name(Param p);

/// Per-plant model parameters. Rates are per day.
///
/// Instances built through the checked constructor always satisfy the
/// invariants (all strictly positive, 0 < psi < 1). `unchecked` exists for
/// test harnesses that need to feed deliberately invalid parameter sets to
/// the verification routines.
class PlantParams {
public:
    using Values = std::array<double, kParamCount>;

    explicit PlantParams(const Values& values);

    static PlantParams unchecked(const Values& values);
    /// Values reported for the "good fit" reference plant.
    static PlantParams nominal();

    /// Empty string when valid, otherwise a description of the first violation.
    static std::string violation(const Values& values);

    double operator[](Param p) const { return values_[static_cast<std::size_t>(p)]; }
    const Values& values() const { return values_; }
    PlantParams with(Param p, double value) const;

    double k() const { return (*this)[Param::k]; }
    double k_l() const { return (*this)[Param::k_l]; }
    double k_ml() const { return (*this)[Param::k_ml]; }
    double sigma_c() const { return (*this)[Param::sigma_c]; }
    double sigma_n() const { return (*this)[Param::sigma_n]; }
    double v() const { return (*this)[Param::v]; }
    double j_c() const { return (*this)[Param::j_c]; }
    double j_n() const { return (*this)[Param::j_n]; }
    double psi() const { return (*this)[Param::psi]; }
    double T_op() const { return (*this)[Param::T_op]; }
    double theta_c() const { return (*this)[Param::theta_c]; }
    double theta_n() const { return (*this)[Param::theta_n]; }

    bool operator==(const PlantParams&) const = default;

private:
    struct NoCheck {};
    PlantParams(const Values& values, NoCheck) : values_(values) {}
    Values values_;
};

/// Numerical floor on structural biomass; the fluxes divide by b.
inline constexpr double kBiomassFloor = 1e-6;

/// Compartment masses in grams of dry matter.
struct PlantState {
    double b = 0.0;  ///< structural biomass
    double c = 0.0;  ///< carbon store
    double n = 0.0;  ///< nitrogen store

    bool operator==(const PlantState&) const = default;
};

struct EnvPoint {
    double T = 22.0;  ///< temperature, deg C
    double I = 0.0;   ///< light intensity, >= 0

    bool operator==(const EnvPoint&) const = default;
};

struct StateDerivative {
    double db = 0.0;
    double dc = 0.0;
    double dn = 0.0;
};

using Matrix3 = std::array<std::array<double, 3>, 3>;
using Vector3 = std::array<double, 3>;

// Flux terms. Functions that divide by b throw std::domain_error when
// b < kBiomassFloor.
double temperature_response(double T, double T_op);
double growth_flux(const PlantState& s, double T, const PlantParams& p);
double litter_loss(double b, const PlantParams& p);
double carbon_consumption(const PlantState& s, double T, const PlantParams& p);
double nitrogen_consumption(const PlantState& s, double T, const PlantParams& p);
double photosynthesis(const PlantState& s, double I, const PlantParams& p);
double nitrogen_uptake(const PlantState& s, double u, const PlantParams& p);

StateDerivative rhs(const PlantState& s, double u, const EnvPoint& env, const PlantParams& p);

/// Shoot dry biomass y = psi * b.
double output(const PlantState& s, const PlantParams& p);
/// Output map row C = [psi, 0, 0].
Vector3 output_row(const PlantParams& p);

/// d rhs / d (b, c, n); rows are (db, dc, dn).
Matrix3 jacobian_state(const PlantState& s, double u, const EnvPoint& env, const PlantParams& p);
/// d rhs / d u.
Vector3 jacobian_input(const PlantState& s, double u, const EnvPoint& env, const PlantParams& p);

/// Log-uniform sampling ranges for the cooperativity check.
struct StateBox {
    double b_min = 1e-4, b_max = 500.0;
    double c_min = 1e-7, c_max = 50.0;
    double n_min = 1e-7, n_max = 50.0;
    double u_min = 1e-4, u_max = 1.0;
};

struct CooperativityViolation {
    PlantState state;
    double u = 0.0;
    std::string what;  ///< e.g. "J[0][1]=-3.2"
};

struct CooperativityReport {
    std::size_t samples = 0;
    std::size_t violation_count = 0;
    /// Bounded listing; violation_count is the full total.
    std::vector<CooperativityViolation> violations;
    double min_offdiagonal = 0.0;
    double min_input_entry = 0.0;
    double min_flux = 0.0;
    bool output_nonnegative = true;

    bool ok() const { return violation_count == 0; }
};

/// Samples states log-uniformly over `box` and checks the Kamke sign
/// conditions (off-diagonal state Jacobian, input Jacobian, output row)
/// together with nonnegativity of every flux term.
CooperativityReport check_cooperativity(const PlantParams& p, const EnvPoint& env,
                                        std::size_t sample_count, std::uint64_t seed,
                                        const StateBox& box = {},
                                        std::size_t max_listed = 20);

}  // namespace coopgrow
