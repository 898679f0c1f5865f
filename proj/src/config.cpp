#include "coopgrow/config.hpp"

#include <fstream>
#include <map>
#include <set>
#include <sstream>

#include <boost/algorithm/string.hpp>
#include <boost/property_tree/ini_parser.hpp>
#include <boost/property_tree/ptree.hpp>
#include <fmt/format.h>

#include "coopgrow/error.hpp"

namespace coopgrow {

namespace pt = boost::property_tree;

namespace {

const std::map<std::string, std::set<std::string>>& scenario_schema()
{
    static const std::map<std::string, std::set<std::string>> schema = [] {
        std::map<std::string, std::set<std::string>> s;
        s["scenario"] = {"name"};
        s["params"] = std::set<std::string>(kParamNames.begin(), kParamNames.end());
        s["field"] = {"n_plants",   "grid_rows", "grid_cols", "perturbation_frac", "seed",
                      "b0",         "c0",        "n0",        "temperature",       "light",
                      "env_schedule", "season_days", "dt",    "rejection_percentile"};
        s["control"] = {"policy", "gain", "u_bar", "u_range", "noise_frac"};
        s["schedule"] = {"interval_days", "first_application_day"};
        s["metrics"] = {"threshold", "baseline_u_bar", "histogram_bins"};
        s["output"] = {"trajectory_every_days"};
        return s;
    }();
    return schema;
}

const std::map<std::string, std::set<std::string>>& fit_schema()
{
    static const std::map<std::string, std::set<std::string>> schema = [] {
        std::map<std::string, std::set<std::string>> s;
        s["params"] = std::set<std::string>(kParamNames.begin(), kParamNames.end());
        std::set<std::string> fit = {"free",  "bound_factor", "u",  "temperature",    "light",
                                     "b0",    "c0",           "n0", "dt",             "t0",
                                     "max_iterations",        "tolerance"};
        for (auto name : kParamNames) {
            fit.insert("lower_" + std::string(name));
            fit.insert("upper_" + std::string(name));
        }
        s["fit"] = fit;
        return s;
    }();
    return schema;
}

pt::ptree parse_ini(const std::string& text)
{
    pt::ptree tree;
    std::istringstream is(text);
    try {
        pt::read_ini(is, tree);
    } catch (const pt::ini_parser_error& e) {
        throw ConfigError(fmt::format("config syntax error at line {}: {}", e.line(), e.message()));
    }
    return tree;
}

void check_schema(const pt::ptree& tree, const std::map<std::string, std::set<std::string>>& schema)
{
    for (const auto& [section, body] : tree) {
        auto it = schema.find(section);
        if (it == schema.end()) {
            if (body.empty() && !body.data().empty()) {
                throw ConfigError(fmt::format("key '{}' must appear inside a section", section));
            }
            throw ConfigError(fmt::format("unknown config section [{}]", section));
        }
        for (const auto& [key, value] : body) {
            if (!it->second.count(key)) {
                throw ConfigError(fmt::format("unknown key '{}' in section [{}]", key, section));
            }
        }
    }
}

class Reader {
public:
    explicit Reader(const pt::ptree& tree) : tree_(tree) {}

    std::optional<std::string> text(const std::string& section, const std::string& key) const
    {
        auto sec = tree_.get_child_optional(section);
        if (!sec) return std::nullopt;
        auto v = sec->get_optional<std::string>(pt::ptree::path_type(key, '\0'));
        if (!v) return std::nullopt;
        return boost::algorithm::trim_copy(*v);
    }

    double number(const std::string& section, const std::string& key, double fallback) const
    {
        auto t = text(section, key);
        return t ? to_number(section, key, *t) : fallback;
    }

    std::uint64_t integer(const std::string& section, const std::string& key, std::uint64_t fallback) const
    {
        auto t = text(section, key);
        if (!t) return fallback;
        try {
            std::size_t used = 0;
            const unsigned long long v = std::stoull(*t, &used);
            if (used != t->size() || t->front() == '-') throw std::invalid_argument(*t);
            return v;
        } catch (const std::exception&) {
            throw ConfigError(fmt::format("[{}] {}: expected a nonnegative integer, got '{}'", section, key, *t));
        }
    }

    static double to_number(const std::string& section, const std::string& key, const std::string& t)
    {
        try {
            std::size_t used = 0;
            const double v = std::stod(t, &used);
            if (used != t.size()) throw std::invalid_argument(t);
            return v;
        } catch (const std::exception&) {
            throw ConfigError(fmt::format("[{}] {}: expected a number, got '{}'", section, key, t));
        }
    }

private:
    const pt::ptree& tree_;
};

PlantParams read_params(const Reader& r, const PlantParams& base, bool check)
{
    PlantParams::Values v = base.values();
    for (std::size_t i = 0; i < kParamCount; ++i) {
        v[i] = r.number("params", std::string(kParamNames[i]), v[i]);
    }
    return check ? PlantParams(v) : PlantParams::unchecked(v);
}

EnvSignal parse_env_schedule(const std::string& text)
{
    std::vector<std::string> entries;
    boost::algorithm::split(entries, text, boost::is_any_of(";"));
    std::vector<double> times;
    std::vector<EnvPoint> points;
    for (auto& e : entries) {
        boost::algorithm::trim(e);
        if (e.empty()) continue;
        std::vector<std::string> parts;
        boost::algorithm::split(parts, e, boost::is_any_of(":"));
        if (parts.size() != 3) {
            throw ConfigError(fmt::format("env_schedule entry '{}' must be day:temperature:light", e));
        }
        times.push_back(Reader::to_number("field", "env_schedule", boost::algorithm::trim_copy(parts[0])));
        points.push_back({Reader::to_number("field", "env_schedule", boost::algorithm::trim_copy(parts[1])),
                          Reader::to_number("field", "env_schedule", boost::algorithm::trim_copy(parts[2]))});
    }
    if (times.empty()) {
        throw ConfigError("env_schedule is empty");
    }
    return EnvSignal(times, points);
}

std::string num(double v) { return fmt::format("{:.17g}", v); }

}  // namespace

Override parse_override(std::string_view text)
{
    const auto eq = text.find('=');
    const auto dot = text.find('.');
    if (eq == std::string_view::npos || dot == std::string_view::npos || dot > eq || dot == 0 || dot + 1 == eq) {
        throw ConfigError(fmt::format("override '{}' must look like section.key=value", text));
    }
    return {std::string(text.substr(0, eq)), std::string(text.substr(eq + 1))};
}

void ScenarioConfig::validate() const
{
    if (name.empty() || name.find_first_of("/\\ ") != std::string::npos) {
        throw ConfigError("scenario name must be non-empty without spaces or slashes");
    }
    field.validate();
    policy.validate();
    schedule.validate(field.dt);
    steps_in(schedule.interval_days, field.dt);
    if (schedule.first_application_day > 0.0) {
        steps_in(schedule.first_application_day, field.dt);
    }
    if (histogram_bins == 0) {
        throw ConfigError("histogram_bins must be >= 1");
    }
    if (!(baseline_u_bar >= 0.0)) {
        throw ConfigError("baseline_u_bar must be >= 0");
    }
    if (!(trajectory_every_days > 0.0)) {
        throw ConfigError("trajectory_every_days must be > 0");
    }
}

bool ScenarioConfig::operator==(const ScenarioConfig& o) const
{
    const auto& a = field;
    const auto& b = o.field;
    return name == o.name && a.n_plants == b.n_plants && a.grid_rows == b.grid_rows &&
           a.grid_cols == b.grid_cols && a.nominal_params == b.nominal_params &&
           a.perturbation_frac == b.perturbation_frac && a.seed == b.seed && a.s0 == b.s0 &&
           a.env.breakpoints() == b.env.breakpoints() && a.env.values() == b.env.values() &&
           a.season_days == b.season_days && a.dt == b.dt && a.rejection_percentile == b.rejection_percentile &&
           policy.kind == o.policy.kind && policy.gain == o.policy.gain &&
           policy.saturation.u_bar == o.policy.saturation.u_bar &&
           policy.saturation.u_range == o.policy.saturation.u_range && policy.noise_frac == o.policy.noise_frac &&
           schedule.interval_days == o.schedule.interval_days &&
           schedule.first_application_day == o.schedule.first_application_day && threshold == o.threshold &&
           baseline_u_bar == o.baseline_u_bar && histogram_bins == o.histogram_bins &&
           trajectory_every_days == o.trajectory_every_days;
}

ScenarioConfig parse_scenario(const std::string& text, const std::vector<Override>& overrides, bool check_params)
{
    pt::ptree tree = parse_ini(text);
    for (const Override& o : overrides) {
        const auto dot = o.key.find('.');
        const std::string section = o.key.substr(0, dot);
        const std::string key = o.key.substr(dot + 1);
        if (!tree.get_child_optional(section)) {
            tree.add_child(section, pt::ptree{});
        }
        tree.get_child(section).put(pt::ptree::path_type(key, '\0'), o.value);
    }
    check_schema(tree, scenario_schema());
    const Reader r(tree);

    ScenarioConfig cfg;
    if (auto name = r.text("scenario", "name")) cfg.name = *name;

    FieldConfig& f = cfg.field;
    f.nominal_params = read_params(r, PlantParams::nominal(), check_params);
    f.n_plants = r.integer("field", "n_plants", f.n_plants);
    f.grid_rows = r.integer("field", "grid_rows", f.grid_rows);
    f.grid_cols = r.integer("field", "grid_cols", f.grid_cols);
    f.perturbation_frac = r.number("field", "perturbation_frac", f.perturbation_frac);
    f.seed = r.integer("field", "seed", f.seed);
    f.s0.b = r.number("field", "b0", f.s0.b);
    f.s0.c = r.number("field", "c0", f.s0.c);
    f.s0.n = r.number("field", "n0", f.s0.n);
    if (auto sched = r.text("field", "env_schedule")) {
        if (r.text("field", "temperature") || r.text("field", "light")) {
            throw ConfigError("[field] env_schedule cannot be combined with temperature/light");
        }
        f.env = parse_env_schedule(*sched);
    } else {
        const EnvPoint base = f.env.values().front();
        f.env = EnvSignal::constant({r.number("field", "temperature", base.T), r.number("field", "light", base.I)});
    }
    f.season_days = r.number("field", "season_days", f.season_days);
    f.dt = r.number("field", "dt", f.dt);
    f.rejection_percentile = r.number("field", "rejection_percentile", f.rejection_percentile);

    ControlPolicy& p = cfg.policy;
    if (auto kind = r.text("control", "policy")) p.kind = policy_from_name(*kind);
    p.gain = r.number("control", "gain", p.gain);
    p.saturation.u_bar = r.number("control", "u_bar", p.saturation.u_bar);
    p.saturation.u_range = r.number("control", "u_range", p.saturation.u_range);
    p.noise_frac = r.number("control", "noise_frac", p.noise_frac);

    cfg.schedule.interval_days = r.number("schedule", "interval_days", cfg.schedule.interval_days);
    cfg.schedule.first_application_day =
        r.number("schedule", "first_application_day", cfg.schedule.first_application_day);

    if (auto t = r.text("metrics", "threshold"); t && *t != "auto") {
        cfg.threshold = Reader::to_number("metrics", "threshold", *t);
    }
    cfg.baseline_u_bar = r.number("metrics", "baseline_u_bar", cfg.baseline_u_bar);
    cfg.histogram_bins = r.integer("metrics", "histogram_bins", cfg.histogram_bins);
    cfg.trajectory_every_days = r.number("output", "trajectory_every_days", cfg.trajectory_every_days);

    if (check_params) {
        cfg.validate();
    }
    return cfg;
}

ScenarioConfig load_scenario(const std::string& path, const std::vector<Override>& overrides, bool check_params)
{
    return parse_scenario(read_text_file(path), overrides, check_params);
}

std::string serialize_scenario(const ScenarioConfig& cfg)
{
    std::ostringstream os;
    os << "[scenario]\nname = " << cfg.name << "\n\n[params]\n";
    for (std::size_t i = 0; i < kParamCount; ++i) {
        os << kParamNames[i] << " = " << num(cfg.field.nominal_params.values()[i]) << '\n';
    }
    const FieldConfig& f = cfg.field;
    os << "\n[field]\n"
       << "n_plants = " << f.n_plants << '\n'
       << "grid_rows = " << f.grid_rows << '\n'
       << "grid_cols = " << f.grid_cols << '\n'
       << "perturbation_frac = " << num(f.perturbation_frac) << '\n'
       << "seed = " << f.seed << '\n'
       << "b0 = " << num(f.s0.b) << '\n'
       << "c0 = " << num(f.s0.c) << '\n'
       << "n0 = " << num(f.s0.n) << '\n';
    if (f.env.breakpoints().size() == 1 && f.env.breakpoints().front() == 0.0) {
        os << "temperature = " << num(f.env.values().front().T) << '\n'
           << "light = " << num(f.env.values().front().I) << '\n';
    } else {
        os << "env_schedule = ";
        for (std::size_t i = 0; i < f.env.breakpoints().size(); ++i) {
            os << (i ? "; " : "") << num(f.env.breakpoints()[i]) << ':' << num(f.env.values()[i].T) << ':'
               << num(f.env.values()[i].I);
        }
        os << '\n';
    }
    os << "season_days = " << num(f.season_days) << '\n'
       << "dt = " << num(f.dt) << '\n'
       << "rejection_percentile = " << num(f.rejection_percentile) << '\n';

    os << "\n[control]\n"
       << "policy = " << policy_name(cfg.policy.kind) << '\n'
       << "gain = " << num(cfg.policy.gain) << '\n'
       << "u_bar = " << num(cfg.policy.saturation.u_bar) << '\n'
       << "u_range = " << num(cfg.policy.saturation.u_range) << '\n'
       << "noise_frac = " << num(cfg.policy.noise_frac) << '\n';
    os << "\n[schedule]\n"
       << "interval_days = " << num(cfg.schedule.interval_days) << '\n'
       << "first_application_day = " << num(cfg.schedule.first_application_day) << '\n';
    os << "\n[metrics]\n"
       << "threshold = " << (cfg.threshold ? num(*cfg.threshold) : std::string("auto")) << '\n'
       << "baseline_u_bar = " << num(cfg.baseline_u_bar) << '\n'
       << "histogram_bins = " << cfg.histogram_bins << '\n';
    os << "\n[output]\n"
       << "trajectory_every_days = " << num(cfg.trajectory_every_days) << '\n';
    return os.str();
}

FitSpec parse_fit_spec(const std::string& text)
{
    const pt::ptree tree = parse_ini(text);
    check_schema(tree, fit_schema());
    const Reader r(tree);

    const PlantParams guess = read_params(r, PlantParams::nominal(), true);
    FitSpec spec = FitSpec::defaults(guess, r.number("fit", "bound_factor", 10.0));
    if (auto list = r.text("fit", "free")) {
        std::vector<std::string> names;
        boost::algorithm::split(names, *list, boost::is_any_of(", "), boost::token_compress_on);
        std::vector<Param> free;
        for (const auto& n : names) {
            if (!n.empty()) free.push_back(param_from_name(n));
        }
        if (free.empty()) {
            throw ConfigError("[fit] free lists no parameters");
        }
        spec.free = FitSpec::mask_of(free);
    }
    for (std::size_t i = 0; i < kParamCount; ++i) {
        const std::string name(kParamNames[i]);
        spec.lower[i] = r.number("fit", "lower_" + name, spec.lower[i]);
        spec.upper[i] = r.number("fit", "upper_" + name, spec.upper[i]);
    }
    spec.u = r.number("fit", "u", spec.u);
    const EnvPoint env{r.number("fit", "temperature", 22.0), r.number("fit", "light", 500.0)};
    spec.env = EnvSignal::constant(env);
    spec.s0 = {r.number("fit", "b0", spec.s0.b), r.number("fit", "c0", spec.s0.c), r.number("fit", "n0", spec.s0.n)};
    spec.dt = r.number("fit", "dt", spec.dt);
    spec.t0 = r.number("fit", "t0", spec.t0);
    spec.max_iterations = r.integer("fit", "max_iterations", spec.max_iterations);
    spec.tolerance = r.number("fit", "tolerance", spec.tolerance);
    spec.validate();
    return spec;
}

FitSpec load_fit_spec(const std::string& path) { return parse_fit_spec(read_text_file(path)); }

std::string read_text_file(const std::string& path)
{
    std::ifstream in(path, std::ios::binary);
    if (!in) {
        throw ConfigError(fmt::format("cannot open '{}'", path));
    }
    std::ostringstream os;
    os << in.rdbuf();
    return os.str();
}

}  // namespace coopgrow
