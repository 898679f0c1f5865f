#include "cli.hpp"

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <sstream>

#include <CLI11.hpp>
#include <fmt/format.h>
#include <nlohmann/json.hpp>

#include "coopgrow/config.hpp"
#include "coopgrow/error.hpp"
#include "coopgrow/field.hpp"
#include "coopgrow/fitting.hpp"
#include "coopgrow/metrics.hpp"
#include "coopgrow/scenario.hpp"

namespace coopgrow::cli {

namespace fs = std::filesystem;

namespace {

struct Common {
    std::string config;
    std::optional<std::uint64_t> seed;
    std::string out_dir = ".";
    std::size_t threads = 1;
    std::vector<std::string> sets;
};

void add_common(CLI::App* cmd, Common& c, bool needs_config)
{
    auto* opt = cmd->add_option("--config", c.config, "scenario config file");
    if (needs_config) {
        opt->required();
    }
    cmd->add_option("--seed", c.seed, "override [field] seed");
    cmd->add_option("--out-dir", c.out_dir, "directory for output files");
    cmd->add_option("--threads", c.threads, "worker threads (results do not depend on it)")
        ->check(CLI::PositiveNumber);
    cmd->add_option("--set", c.sets, "override a config value: section.key=value");
}

std::vector<Override> overrides_of(const Common& c)
{
    std::vector<Override> out;
    for (const auto& s : c.sets) {
        out.push_back(parse_override(s));
    }
    if (c.seed) {
        out.push_back({"field.seed", std::to_string(*c.seed)});
    }
    return out;
}

void write_file(const fs::path& path, const std::string& content)
{
    if (path.has_parent_path()) {
        fs::create_directories(path.parent_path());
    }
    std::ofstream out(path, std::ios::binary);
    if (!out) {
        throw std::runtime_error(fmt::format("cannot write '{}'", path.string()));
    }
    out << content;
}

std::vector<PlantParams> perturbed_sets(const ScenarioConfig& cfg, std::size_t count)
{
    std::vector<PlantParams> sets;
    for (std::size_t i = 0; i < count; ++i) {
        sets.push_back(sample_params(cfg.field.nominal_params, cfg.field.perturbation_frac, cfg.field.seed, i));
    }
    return sets;
}

std::vector<double> linear_grid(double hi, std::size_t points)
{
    std::vector<double> grid(points);
    for (std::size_t i = 0; i < points; ++i) {
        grid[i] = points == 1 ? hi : hi * static_cast<double>(i) / static_cast<double>(points - 1);
    }
    return grid;
}

int cmd_simulate(const Common& c, std::ostream& out)
{
    const ScenarioConfig cfg = load_scenario(c.config, overrides_of(c));
    const ScenarioRun run = run_scenario(cfg, c.threads);
    const fs::path dir(c.out_dir);
    write_file(dir / (cfg.name + "_trajectory.csv"), trajectory_csv(cfg, run.trajectory));
    write_file(dir / (cfg.name + "_summary.json"), summary_json(cfg, run));
    std::vector<ScenarioSummary> rows{run.summary};
    if (run.baseline) {
        rows.insert(rows.begin(), *run.baseline);
    }
    std::ostringstream csv;
    write_summary_csv(csv, rows);
    write_file(dir / (cfg.name + "_summary.csv"), csv.str());

    const auto& s = run.summary;
    out << fmt::format("{}: mean {:.3f} g, variance {:.3f} g^2, threshold {:.3f} g, above {:.2f}, nitrogen {:.4f} g\n",
                       s.name, s.mean, s.variance, s.threshold, s.fraction_above, s.total_nitrogen);
    if (run.comparison) {
        out << fmt::format("vs uncontrolled: variance ratio {:.3f}, nitrogen ratio {:.4f}\n",
                           run.comparison->variance_ratio, run.comparison->nitrogen_ratio);
    }
    return 0;
}

struct VerifyOptions {
    std::size_t samples = 10000;
    std::size_t sets = 10;
    std::size_t points = 20;
    double u_max = 0.3;
    bool unchecked = false;
};

int cmd_verify(const Common& c, const VerifyOptions& v, std::ostream& out)
{
    const ScenarioConfig cfg = load_scenario(c.config, overrides_of(c), !v.unchecked);
    const PlantParams& p = cfg.field.nominal_params;

    nlohmann::json doc;
    doc["samples"] = v.samples;
    std::size_t violations = 0;
    out << fmt::format("cooperativity check: {} samples per environment point\n", v.samples);
    nlohmann::json envs = nlohmann::json::array();
    for (const EnvPoint& env : cfg.field.env.values()) {
        const CooperativityReport rep = check_cooperativity(p, env, v.samples, cfg.field.seed);
        violations += rep.violation_count;
        nlohmann::json listed = nlohmann::json::array();
        for (const auto& vi : rep.violations) {
            listed.push_back({{"b", vi.state.b}, {"c", vi.state.c}, {"n", vi.state.n}, {"u", vi.u}, {"what", vi.what}});
        }
        envs.push_back({{"T", env.T},
                        {"I", env.I},
                        {"violations", rep.violation_count},
                        {"min_offdiagonal", rep.min_offdiagonal},
                        {"min_input_entry", rep.min_input_entry},
                        {"min_flux", rep.min_flux},
                        {"listed", listed}});
        out << fmt::format("  T={} I={}: {} violations, min off-diagonal {:.6g}, min input entry {:.6g}\n", env.T,
                           env.I, rep.violation_count, rep.min_offdiagonal, rep.min_input_entry);
        for (const auto& vi : rep.violations) {
            out << fmt::format("    violation at b={:.6g} c={:.6g} n={:.6g} u={:.6g}: {}\n", vi.state.b, vi.state.c,
                               vi.state.n, vi.u, vi.what);
        }
    }
    doc["cooperativity"] = envs;

    nlohmann::json sweep;
    try {
        std::vector<PlantParams> sets;
        if (v.unchecked) {
            sets.assign(v.sets, p);
        } else {
            sets = perturbed_sets(cfg, v.sets);
        }
        const DoseResponseTable table = dose_response_sweep(sets, linear_grid(v.u_max, v.points), cfg.field.s0,
                                                            cfg.field.env, cfg.field.dt, cfg.field.season_days,
                                                            c.threads);
        const auto breaks = table.monotonicity_breaks();
        violations += breaks.size();
        sweep = {{"sets", v.sets}, {"points", v.points}, {"monotonicity_breaks", breaks.size()}};
        out << fmt::format("dose-response: {} sets x {} points, {} monotonicity breaks\n", v.sets, v.points,
                           breaks.size());
    } catch (const std::exception& e) {
        ++violations;
        sweep = {{"error", e.what()}};
        out << "dose-response: failed: " << e.what() << '\n';
    }
    doc["dose_response"] = sweep;
    doc["violations"] = violations;
    if (!c.out_dir.empty() && c.out_dir != ".") {
        write_file(fs::path(c.out_dir) / "verify_monotone.json", doc.dump(2) + "\n");
    }
    out << (violations == 0 ? "PASS" : "FAIL") << ": " << violations << " violations\n";
    return violations == 0 ? 0 : 1;
}

struct SweepOptions {
    std::size_t sets = 10;
    std::size_t points = 20;
    double u_max = 0.3;
    double day = 50.0;
};

int cmd_sweep(const Common& c, const SweepOptions& s, std::ostream& out)
{
    const ScenarioConfig cfg = load_scenario(c.config, overrides_of(c));
    const auto sets = perturbed_sets(cfg, s.sets);
    const DoseResponseTable table =
        dose_response_sweep(sets, linear_grid(s.u_max, s.points), cfg.field.s0, cfg.field.env, cfg.field.dt, s.day,
                            c.threads);
    std::ostringstream csv;
    write_dose_response_csv(csv, table);
    write_file(fs::path(c.out_dir) / "dose_response.csv", csv.str());
    out << fmt::format("dose-response: {} sets x {} points, {} monotonicity breaks\n", s.sets, s.points,
                       table.monotonicity_breaks().size());
    return 0;
}

struct FitOptions {
    std::string data;
    std::size_t bins = 20;
};

int cmd_fit(const Common& c, const FitOptions& f, std::ostream& out, std::ostream& err)
{
    const FitSpec spec = load_fit_spec(c.config);
    std::ifstream in(f.data, std::ios::binary);
    if (!in) {
        throw ConfigError(fmt::format("cannot open '{}'", f.data));
    }
    const std::vector<BiomassTimeseries> dataset = read_series_csv(in);
    const std::vector<BatchFitEntry> entries = fit_batch(spec, dataset, c.threads);

    std::ostringstream csv;
    write_fit_results_csv(csv, entries);
    write_file(fs::path(c.out_dir) / "fit_results.csv", csv.str());

    std::vector<double> scores;
    for (const auto& e : entries) {
        if (e.ok) {
            scores.push_back(e.result.nrmse);
        } else {
            err << "warning: series " << e.plant_id << " failed: " << e.error << '\n';
        }
    }
    std::ostringstream hist;
    hist << "bin_lo,bin_hi,count\n";
    if (!scores.empty()) {
        const auto [lo, hi] = std::minmax_element(scores.begin(), scores.end());
        const Histogram h = histogram(scores, equal_width_edges(std::min(0.0, *lo), *hi, f.bins));
        for (std::size_t i = 0; i < h.counts.size(); ++i) {
            hist << fmt::format("{:.6g},{:.6g},{}\n", h.edges[i], h.edges[i + 1], h.counts[i]);
        }
    }
    write_file(fs::path(c.out_dir) / "nrmse_histogram.csv", hist.str());
    out << fmt::format("fitted {} of {} series", scores.size(), entries.size());
    if (!scores.empty()) {
        out << fmt::format(", median NRMSE {:.4f}", percentile(scores, 50.0));
    }
    out << '\n';
    return 0;
}

int cmd_report(const Common& c, const std::vector<std::string>& paths, std::ostream& out, std::ostream& err)
{
    std::vector<ScenarioSummary> summaries;
    for (const auto& path : paths) {
        nlohmann::json doc;
        try {
            doc = nlohmann::json::parse(read_text_file(path));
            summaries.push_back(doc.contains("summary") ? doc.at("summary").get<ScenarioSummary>()
                                                        : doc.get<ScenarioSummary>());
        } catch (const nlohmann::json::exception& e) {
            throw ConfigError(fmt::format("{}: not a scenario summary ({})", path, e.what()));
        }
    }
    const ScenarioSummary& base = summaries.front();
    for (const auto& s : summaries) {
        if (s.n_plants != base.n_plants) {
            err << fmt::format("warning: {} has {} plants but {} has {}\n", s.name, s.n_plants, base.name,
                               base.n_plants);
        }
    }
    std::ostringstream csv;
    write_comparison_csv(csv, summaries);
    write_file(fs::path(c.out_dir) / "comparison.csv", csv.str());
    out << csv.str();
    return 0;
}

struct GenerateOptions {
    std::size_t count = 20;
    double noise = 0.0;
    std::size_t min_points = 3;
    std::size_t max_points = 12;
    bool even = false;
    std::string kind = "dry";
    std::string output = "synthetic.csv";
};

int cmd_generate(const Common& c, const GenerateOptions& g, std::ostream& out)
{
    const ScenarioConfig cfg = load_scenario(c.config, overrides_of(c));
    SyntheticSpec spec;
    spec.series_count = g.count;
    spec.nominal = cfg.field.nominal_params;
    spec.perturbation_frac = cfg.field.perturbation_frac;
    spec.min_points = g.min_points;
    spec.max_points = g.max_points;
    spec.last_day = cfg.field.season_days;
    spec.even_spacing = g.even;
    spec.noise_frac = g.noise;
    if (g.kind != "dry" && g.kind != "fresh") {
        throw ConfigError("--kind must be dry or fresh");
    }
    spec.kind = g.kind == "dry" ? MassKind::dry : MassKind::fresh;
    spec.seed = cfg.field.seed;
    spec.env = cfg.field.env;
    spec.u = cfg.policy.saturation.u_bar;
    spec.s0 = cfg.field.s0;
    spec.dt = cfg.field.dt;
    const auto data = generate_synthetic(spec);
    std::vector<BiomassTimeseries> series;
    for (const auto& d : data) {
        series.push_back(d.series);
    }
    std::ostringstream csv;
    write_series_csv(csv, series);
    write_file(fs::path(c.out_dir) / g.output, csv.str());
    out << fmt::format("wrote {} series to {}\n", series.size(), (fs::path(c.out_dir) / g.output).string());
    return 0;
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err)
{
    CLI::App app{"Cooperative lettuce growth model: simulation, fitting and verification", "coopgrow"};
    app.require_subcommand(1);

    Common common;
    VerifyOptions verify;
    SweepOptions sweep;
    FitOptions fit_opts;
    GenerateOptions gen;
    std::vector<std::string> report_paths;

    auto* sim = app.add_subcommand("simulate", "run one field scenario");
    add_common(sim, common, true);

    auto* ver = app.add_subcommand("verify-monotone", "check the Kamke conditions and dose-response order");
    add_common(ver, common, true);
    ver->add_option("--samples", verify.samples, "sampled states")->check(CLI::PositiveNumber);
    ver->add_option("--sets", verify.sets, "perturbed parameter sets in the sweep");
    ver->add_option("--points", verify.points, "nitrogen grid points in the sweep");
    ver->add_option("--u-max", verify.u_max, "largest nitrogen level in the sweep");
    ver->add_flag("--unchecked-params", verify.unchecked, "load [params] without validation");

    auto* swp = app.add_subcommand("sweep", "final biomass under constant nitrogen levels");
    add_common(swp, common, true);
    swp->add_option("--sets", sweep.sets, "perturbed parameter sets");
    swp->add_option("--points", sweep.points, "nitrogen grid points")->check(CLI::PositiveNumber);
    swp->add_option("--u-max", sweep.u_max, "largest nitrogen level");
    swp->add_option("--day", sweep.day, "evaluation day");

    auto* fitc = app.add_subcommand("fit", "fit parameters to biomass time series");
    add_common(fitc, common, true);
    fitc->add_option("--data", fit_opts.data, "CSV with plant_id,day,mass_g,kind")->required();
    fitc->add_option("--bins", fit_opts.bins, "NRMSE histogram bins")->check(CLI::PositiveNumber);

    auto* rep = app.add_subcommand("report", "compare scenario summaries (first is the base)");
    add_common(rep, common, false);
    rep->add_option("summaries", report_paths, "summary JSON files")->required();

    auto* gen_cmd = app.add_subcommand("generate-data", "synthetic biomass time series");
    add_common(gen_cmd, common, true);
    gen_cmd->add_option("--count", gen.count, "number of series");
    gen_cmd->add_option("--noise", gen.noise, "multiplicative observation noise sd");
    gen_cmd->add_option("--min-points", gen.min_points, "fewest observations per series");
    gen_cmd->add_option("--max-points", gen.max_points, "most observations per series");
    gen_cmd->add_flag("--even", gen.even, "evenly spaced observation days");
    gen_cmd->add_option("--kind", gen.kind, "dry or fresh");
    gen_cmd->add_option("--output", gen.output, "file name inside --out-dir");

    try {
        std::vector<std::string> reversed(args.rbegin(), args.rend());
        app.parse(reversed);
    } catch (const CLI::CallForHelp&) {
        out << app.help();
        return 0;
    } catch (const CLI::ParseError& e) {
        err << "error: " << e.what() << '\n';
        return 2;
    }

    try {
        if (*sim) return cmd_simulate(common, out);
        if (*ver) return cmd_verify(common, verify, out);
        if (*swp) return cmd_sweep(common, sweep, out);
        if (*fitc) return cmd_fit(common, fit_opts, out, err);
        if (*rep) return cmd_report(common, report_paths, out, err);
        if (*gen_cmd) return cmd_generate(common, gen, out);
    } catch (const ConfigError& e) {
        err << "config error: " << e.what() << '\n';
        return 2;
    } catch (const std::exception& e) {
        err << "error: " << e.what() << '\n';
        return 1;
    }
    return 2;
}

}  // namespace coopgrow::cli
