#include "coopgrow/fitting.hpp"

#include <algorithm>
#include <cmath>
#include <istream>
#include <map>
#include <ostream>
#include <sstream>
#include <stdexcept>

#include <boost/algorithm/string.hpp>
#include <fmt/format.h>

#include "coopgrow/error.hpp"
#include "coopgrow/field.hpp"
#include "coopgrow/optimize.hpp"
#include "coopgrow/parallel.hpp"
#include "coopgrow/rng.hpp"

namespace coopgrow {

void BiomassTimeseries::validate() const
{
    if (times.size() != masses.size()) {
        throw ConfigError(fmt::format("series {}: times and masses differ in length", plant_id));
    }
    if (times.size() < 3) {
        throw ConfigError(fmt::format("series {}: needs at least 3 observations (has {})", plant_id,
                                      times.size()));
    }
    for (std::size_t i = 0; i < times.size(); ++i) {
        if (!std::isfinite(times[i]) || !std::isfinite(masses[i])) {
            throw ConfigError(fmt::format("series {}: non-finite value", plant_id));
        }
        if (masses[i] < 0.0) {
            throw ConfigError(fmt::format("series {}: negative mass", plant_id));
        }
        if (i > 0 && !(times[i] > times[i - 1])) {
            throw ConfigError(fmt::format("series {}: times must be strictly ascending", plant_id));
        }
    }
}

BiomassTimeseries to_dry(BiomassTimeseries series)
{
    if (series.kind == MassKind::fresh) {
        for (double& m : series.masses) {
            m *= kDryMatterFraction;
        }
        series.kind = MassKind::dry;
    }
    return series;
}

FitSpec FitSpec::defaults(const PlantParams& guess, double bound_factor)
{
    FitSpec spec;
    spec.guess = guess;
    for (std::size_t i = 0; i < kParamCount; ++i) {
        spec.lower[i] = guess.values()[i] / bound_factor;
        spec.upper[i] = guess.values()[i] * bound_factor;
    }
    const auto psi = static_cast<std::size_t>(Param::psi);
    spec.upper[psi] = std::min(spec.upper[psi], 0.99);
    spec.lower[psi] = std::min(spec.lower[psi], 0.5 * guess.psi());
    spec.free.fill(true);
    for (Param fixed : {Param::T_op, Param::theta_c, Param::theta_n, Param::k}) {
        spec.free[static_cast<std::size_t>(fixed)] = false;
    }
    return spec;
}

ParamMask FitSpec::mask_of(std::span<const Param> free_params)
{
    ParamMask mask{};
    for (Param p : free_params) {
        mask[static_cast<std::size_t>(p)] = true;
    }
    return mask;
}

void FitSpec::validate() const
{
    for (std::size_t i = 0; i < kParamCount; ++i) {
        const auto name = kParamNames[i];
        if (!(lower[i] > 0.0) || !(upper[i] > lower[i])) {
            throw ConfigError(fmt::format("fit bounds for {} must satisfy 0 < lower < upper", name));
        }
        if (static_cast<Param>(i) == Param::psi && upper[i] >= 1.0) {
            throw ConfigError("fit upper bound for psi must be < 1");
        }
        const double g = guess.values()[i];
        if (g < lower[i] || g > upper[i]) {
            throw ConfigError(fmt::format("initial guess for {} lies outside its bounds", name));
        }
    }
    if (!(u >= 0.0)) {
        throw ConfigError("assumed nitrogen input must be >= 0");
    }
    if (!(dt > 0.0)) {
        throw ConfigError("fit step dt must be > 0");
    }
}

std::size_t FitSpec::free_count() const
{
    return static_cast<std::size_t>(std::count(free.begin(), free.end(), true));
}

std::vector<double> residuals(const PlantParams& p, const FitSpec& spec, const BiomassTimeseries& series)
{
    if (series.kind != MassKind::dry) {
        throw std::invalid_argument("residuals: series must be converted to dry mass first");
    }
    if (series.times.empty()) {
        return {};
    }
    if (series.times.front() < spec.t0 - kGridTolerance) {
        throw ConfigError(fmt::format("series {}: observation before the simulation start", series.plant_id));
    }
    auto grid_index = [&](double t) {
        return static_cast<std::size_t>(std::llround((t - spec.t0) / spec.dt));
    };
    const std::size_t last = std::max<std::size_t>(1, grid_index(series.times.back()));
    const Trajectory traj = integrate(p, spec.s0, InputSignal::constant(spec.u, spec.t0), spec.env, spec.t0,
                                      spec.t0 + static_cast<double>(last) * spec.dt, spec.dt);
    std::vector<double> r(series.times.size());
    for (std::size_t j = 0; j < r.size(); ++j) {
        r[j] = traj.outputs[grid_index(series.times[j])] - series.masses[j];
    }
    return r;
}

double cost(const PlantParams& p, const FitSpec& spec, const BiomassTimeseries& series)
{
    const std::vector<double> r = residuals(p, spec, series);
    if (r.empty()) {
        return 0.0;
    }
    double sq = 0.0;
    for (double x : r) {
        sq += x * x;
    }
    return sq / static_cast<double>(r.size());
}

double nrmse_from_cost(double cost_value, std::span<const double> masses)
{
    if (masses.empty()) {
        throw std::invalid_argument("nrmse: empty series");
    }
    const auto [lo, hi] = std::minmax_element(masses.begin(), masses.end());
    double scale = *hi - *lo;
    if (scale <= 0.0) {
        scale = *hi;
    }
    if (scale <= 0.0) {
        throw std::domain_error("nrmse undefined for an all-zero series");
    }
    return std::sqrt(cost_value) / scale;
}

double nrmse(const PlantParams& p, const FitSpec& spec, const BiomassTimeseries& series)
{
    return nrmse_from_cost(cost(p, spec, series), series.masses);
}

FitResult fit(const FitSpec& spec, const BiomassTimeseries& input)
{
    spec.validate();
    input.validate();
    const BiomassTimeseries series = to_dry(input);

    std::vector<std::size_t> index;
    for (std::size_t i = 0; i < kParamCount; ++i) {
        if (spec.free[i]) {
            index.push_back(i);
        }
    }
    // Optimise log-parameters: all positive, spanning several decades.
    std::vector<double> z0, lo, hi;
    for (std::size_t i : index) {
        z0.push_back(std::log(spec.guess.values()[i]));
        lo.push_back(std::log(spec.lower[i]));
        hi.push_back(std::log(spec.upper[i]));
    }
    auto unpack = [&](const std::vector<double>& z) {
        PlantParams::Values v = spec.guess.values();
        for (std::size_t k = 0; k < index.size(); ++k) {
            v[index[k]] = std::exp(z[k]);
        }
        return PlantParams(v);
    };
    auto objective = [&](const std::vector<double>& z) { return cost(unpack(z), spec, series); };

    const double initial = cost(spec.guess, spec, series);
    if (!std::isfinite(initial)) {
        throw std::runtime_error(fmt::format("series {}: cost not finite at initial guess", series.plant_id));
    }

    BoxOptions options;
    options.max_iterations = spec.max_iterations;
    options.gradient_tolerance = spec.tolerance;
    const BoxResult best = minimize_box(objective, z0, lo, hi, options);

    FitResult result;
    result.params = unpack(best.x);
    result.cost = best.value;
    result.nrmse = nrmse_from_cost(best.value, series.masses);
    result.iterations = best.iterations;
    result.converged = best.converged;
    return result;
}

std::vector<BatchFitEntry> fit_batch(const FitSpec& spec, std::span<const BiomassTimeseries> dataset,
                                     std::size_t threads)
{
    std::vector<BatchFitEntry> entries(dataset.size());
    parallel_for(dataset.size(), threads, [&](std::size_t i) {
        BatchFitEntry& e = entries[i];
        e.plant_id = dataset[i].plant_id;
        try {
            e.result = fit(spec, dataset[i]);
            e.ok = true;
        } catch (const std::exception& ex) {
            e.ok = false;
            e.error = ex.what();
        }
    });
    return entries;
}

std::vector<SyntheticSeries> generate_synthetic(const SyntheticSpec& spec)
{
    if (spec.min_points < 3 || spec.max_points < spec.min_points) {
        throw ConfigError("synthetic series need 3 <= min_points <= max_points");
    }
    if (!(spec.last_day > spec.first_day) || spec.first_day < 0.0) {
        throw ConfigError("synthetic observation window must satisfy 0 <= first_day < last_day");
    }
    const auto first = static_cast<std::int64_t>(std::ceil(spec.first_day));
    const auto last = static_cast<std::int64_t>(std::floor(spec.last_day));
    if (last - first + 1 < static_cast<std::int64_t>(spec.max_points)) {
        throw ConfigError("synthetic observation window too short for max_points distinct days");
    }

    std::vector<SyntheticSeries> out(spec.series_count);
    for (std::size_t s = 0; s < spec.series_count; ++s) {
        Substream rng(spec.seed, StreamTag::synthetic, {s});
        SyntheticSeries& item = out[s];
        item.truth = sample_params(spec.nominal, spec.perturbation_frac, spec.seed, s);

        const auto count = static_cast<std::size_t>(
            rng.uniform_int(static_cast<std::int64_t>(spec.min_points), static_cast<std::int64_t>(spec.max_points)));
        std::vector<double> days;
        if (spec.even_spacing) {
            for (std::size_t k = 0; k < count; ++k) {
                const double frac = count == 1 ? 0.0 : static_cast<double>(k) / static_cast<double>(count - 1);
                days.push_back(std::round(spec.first_day + frac * (spec.last_day - spec.first_day)));
            }
            days.erase(std::unique(days.begin(), days.end()), days.end());
        } else {
            // Partial Fisher-Yates over the candidate days.
            std::vector<double> pool;
            for (std::int64_t d = first; d <= last; ++d) {
                pool.push_back(static_cast<double>(d));
            }
            for (std::size_t k = 0; k < count; ++k) {
                const auto j = static_cast<std::size_t>(
                    rng.uniform_int(static_cast<std::int64_t>(k), static_cast<std::int64_t>(pool.size() - 1)));
                std::swap(pool[k], pool[j]);
            }
            days.assign(pool.begin(), pool.begin() + static_cast<std::ptrdiff_t>(count));
            std::sort(days.begin(), days.end());
        }

        const Trajectory traj = integrate(item.truth, spec.s0, InputSignal::constant(spec.u), spec.env, 0.0,
                                          days.back(), spec.dt);
        item.series.plant_id = fmt::format("synthetic-{}", s);
        item.series.kind = spec.kind;
        for (double d : days) {
            const auto idx = static_cast<std::size_t>(std::llround(d / spec.dt));
            double mass = traj.outputs[idx];
            if (spec.noise_frac > 0.0) {
                mass = std::max(0.0, mass * (1.0 + spec.noise_frac * rng.normal()));
            }
            if (spec.kind == MassKind::fresh) {
                mass /= kDryMatterFraction;
            }
            item.series.times.push_back(d);
            item.series.masses.push_back(mass);
        }
    }
    return out;
}

namespace {

MassKind parse_kind(const std::string& text, std::size_t line)
{
    if (text == "dry") return MassKind::dry;
    if (text == "fresh" || text == "wet") return MassKind::fresh;
    throw ConfigError(fmt::format("line {}: unknown mass kind '{}'", line, text));
}

double parse_number(const std::string& text, std::size_t line, const char* column)
{
    try {
        std::size_t used = 0;
        const double v = std::stod(text, &used);
        if (used != text.size()) {
            throw std::invalid_argument(text);
        }
        return v;
    } catch (const std::exception&) {
        throw ConfigError(fmt::format("line {}: column {} is not a number: '{}'", line, column, text));
    }
}

}  // namespace

std::vector<BiomassTimeseries> read_series_csv(std::istream& is)
{
    std::string line;
    std::size_t line_no = 0;
    bool header_seen = false;
    std::vector<BiomassTimeseries> out;
    std::map<std::string, std::size_t> slot;

    while (std::getline(is, line)) {
        ++line_no;
        if (!line.empty() && line.back() == '\r') {
            line.pop_back();
        }
        if (line_no == 1 && line.rfind("\xEF\xBB\xBF", 0) == 0) {
            line.erase(0, 3);
        }
        boost::algorithm::trim(line);
        if (line.empty()) {
            continue;
        }
        std::vector<std::string> cols;
        boost::algorithm::split(cols, line, boost::is_any_of(","));
        for (auto& c : cols) {
            boost::algorithm::trim(c);
        }
        if (!header_seen) {
            if (cols != std::vector<std::string>{"plant_id", "day", "mass_g", "kind"}) {
                throw ConfigError("expected header 'plant_id,day,mass_g,kind'");
            }
            header_seen = true;
            continue;
        }
        if (cols.size() != 4) {
            throw ConfigError(fmt::format("line {}: expected 4 columns, found {}", line_no, cols.size()));
        }
        const MassKind kind = parse_kind(cols[3], line_no);
        auto [it, inserted] = slot.try_emplace(cols[0], out.size());
        if (inserted) {
            out.push_back({cols[0], {}, {}, kind});
        }
        BiomassTimeseries& series = out[it->second];
        if (series.kind != kind) {
            throw ConfigError(fmt::format("line {}: series {} mixes fresh and dry rows", line_no, cols[0]));
        }
        series.times.push_back(parse_number(cols[1], line_no, "day"));
        series.masses.push_back(parse_number(cols[2], line_no, "mass_g"));
    }
    if (out.empty()) {
        throw ConfigError("no observations in input");
    }
    return out;
}

void write_series_csv(std::ostream& os, std::span<const BiomassTimeseries> dataset)
{
    os << "plant_id,day,mass_g,kind\n";
    for (const auto& s : dataset) {
        for (std::size_t i = 0; i < s.times.size(); ++i) {
            os << fmt::format("{},{:.17g},{:.17g},{}\n", s.plant_id, s.times[i], s.masses[i],
                              s.kind == MassKind::dry ? "dry" : "fresh");
        }
    }
}

void write_fit_results_csv(std::ostream& os, std::span<const BatchFitEntry> entries)
{
    os << "plant_id,status,nrmse,cost,iterations,converged";
    for (auto name : kParamNames) {
        os << ',' << name;
    }
    os << '\n';
    for (const auto& e : entries) {
        if (!e.ok) {
            std::string msg = e.error;
            std::replace(msg.begin(), msg.end(), ',', ';');
            std::replace(msg.begin(), msg.end(), '\n', ' ');
            os << fmt::format("{},error: {},,,,", e.plant_id, msg);
            for (std::size_t i = 0; i < kParamCount; ++i) {
                os << ',';
            }
            os << '\n';
            continue;
        }
        const FitResult& r = e.result;
        os << fmt::format("{},ok,{:.8g},{:.8g},{},{}", e.plant_id, r.nrmse, r.cost, r.iterations,
                          r.converged ? 1 : 0);
        for (double v : r.params.values()) {
            os << fmt::format(",{:.10g}", v);
        }
        os << '\n';
    }
}

}  // namespace coopgrow
